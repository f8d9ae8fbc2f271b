//! Discrete action ids.
//!
//! Movement is in the world frame and independent of heading.

use crate::math::Vec2;

pub type Action = u8;

pub const MOVE_UP: Action = 0;
pub const MOVE_DOWN: Action = 1;
pub const MOVE_RIGHT: Action = 2;
pub const MOVE_LEFT: Action = 3;
/// Counter-clockwise by the configured rotation step.
pub const ROTATE: Action = 4;
pub const ATTACK: Action = 5;
/// Always available to dead and padding slots; available to live units only
/// when the scenario enables it.
pub const NOOP: Action = 6;

pub const NUM_ACTIONS: usize = 7;
pub const MOVES: [Action; 4] = [MOVE_UP, MOVE_DOWN, MOVE_RIGHT, MOVE_LEFT];

/// Unit direction of a move action, `None` for everything else.
pub fn move_direction(action: Action) -> Option<Vec2> {
    match action {
        MOVE_UP => Some(Vec2::new(0.0, 1.0)),
        MOVE_DOWN => Some(Vec2::new(0.0, -1.0)),
        MOVE_RIGHT => Some(Vec2::new(1.0, 0.0)),
        MOVE_LEFT => Some(Vec2::new(-1.0, 0.0)),
        _ => None,
    }
}

pub fn action_name(action: Action) -> &'static str {
    match action {
        MOVE_UP => "up",
        MOVE_DOWN => "down",
        MOVE_RIGHT => "right",
        MOVE_LEFT => "left",
        ROTATE => "rotate",
        ATTACK => "attack",
        NOOP => "noop",
        _ => "invalid",
    }
}
