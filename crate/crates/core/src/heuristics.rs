//! Role-modulated, priority-based heuristic controller.
//!
//! Roles are derived from unit attributes and are not mutually exclusive:
//! assassins (fast) flank low-health targets, rangers (long reach) kite and
//! seek bushes, healers stay close to injured allies. Every unit decides
//! independently through one shared priority cascade.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::action::{move_direction, Action, ATTACK, MOVES, ROTATE};
use crate::combat::hurtbox_overlaps;
use crate::config::{Field, HeuristicParams, PhysicsParams};
use crate::math::Vec2;
use crate::perception::{BoolMatrix, VisibilityMatrix};
use crate::unit::{UnitSpec, UnitState};
use crate::zone::{swamp_multiplier, Zone, ZoneType};

/// Extra clearance between bodies when an assassin positions behind a target.
pub const FLANK_MARGIN: f64 = 0.5;
/// Fraction of attack range used as the frontal standoff distance.
pub const STANDOFF_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoleFlags {
    pub assassin: bool,
    pub ranger: bool,
    pub healer: bool,
}

pub fn classify_roles(spec: &UnitSpec, params: &HeuristicParams) -> RoleFlags {
    RoleFlags {
        assassin: spec.speed >= params.assassin_speed_threshold,
        ranger: spec.attack_range >= params.ranger_range_threshold && spec.attack_damage > 0.0,
        healer: spec.attack_damage < 0.0,
    }
}

/// Last known position of the unit's most recent target.
pub type HeuristicMemory = Option<Vec2>;

/// Read-only view of one environment at decision time.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub states: &'a [UnitState],
    pub zones: &'a [Zone],
    pub visibility: &'a VisibilityMatrix,
    pub attackable: &'a BoolMatrix,
    pub field: &'a Field,
    pub physics: &'a PhysicsParams,
}

/// Which cascade branch produced the action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Attack,
    Align,
    Retreat,
    Approach,
    Pursue,
    SeekBush,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub action: Action,
    pub branch: Branch,
    /// Set when the ε-override replaced the cascade's action.
    pub overridden: bool,
}

fn visible_alive<'a>(scene: &'a Scene<'a>, i: usize) -> impl Iterator<Item = (usize, &'a UnitState)> + 'a {
    let vis = scene.visibility;
    scene
        .states
        .iter()
        .enumerate()
        .filter(move |(j, u)| *j != i && u.alive && vis.get(i, *j))
}

fn nearest<'a>(origin: Vec2, candidates: impl Iterator<Item = (usize, &'a UnitState)>) -> Option<usize> {
    candidates
        .map(|(j, u)| ((u.position - origin).length_squared(), j))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, j)| j)
}

/// Role-specific target choice among visible living units.
pub fn select_heuristic_target(i: usize, scene: &Scene, roles: RoleFlags) -> Option<usize> {
    let me = &scene.states[i];
    let origin = me.position;
    if roles.healer {
        let injured = nearest(
            origin,
            visible_alive(scene, i).filter(|(_, u)| u.team == me.team && u.health < u.spec.max_health),
        );
        return injured.or_else(|| nearest(origin, visible_alive(scene, i).filter(|(_, u)| u.team == me.team)));
    }
    let enemies = visible_alive(scene, i).filter(|(_, u)| u.team != me.team);
    if roles.assassin {
        return enemies
            .map(|(j, u)| (u.spec.max_health, (u.position - origin).length_squared(), j))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, j)| j);
    }
    nearest(origin, enemies)
}

/// Where the unit wants to stand relative to its target.
pub fn desired_position(me: &UnitState, target: &UnitState, roles: RoleFlags) -> Vec2 {
    let facing = target.heading_vec();
    let contact = me.spec.body_radius + target.spec.body_radius;
    if roles.healer {
        target.position
    } else if roles.assassin {
        target.position - facing * (contact + FLANK_MARGIN)
    } else {
        let standoff = (STANDOFF_FRACTION * me.spec.attack_range).max(contact);
        target.position + facing * standoff
    }
}

/// Position after one step of `action`, clipped to the field.
fn projected(me: &UnitState, action: Action, scene: &Scene) -> Vec2 {
    let dir = move_direction(action).unwrap_or(Vec2::ZERO);
    let speed = me.spec.speed * swamp_multiplier(scene.zones, me.position);
    scene.field.clamp(me.position + dir * (speed * scene.physics.dt))
}

/// Greedy one-step navigation: the move minimizing (or maximizing) the
/// distance to `goal`, ties to the lowest action id. Returns the move and the
/// resulting distance.
fn best_move(me: &UnitState, goal: Vec2, scene: &Scene, maximize: bool) -> (Action, f64) {
    let mut best = (MOVES[0], projected(me, MOVES[0], scene).distance(goal));
    for &a in &MOVES[1..] {
        let d = projected(me, a, scene).distance(goal);
        let better = if maximize { d > best.1 } else { d < best.1 };
        if better {
            best = (a, d);
        }
    }
    best
}

fn rotated(me: &UnitState, step: f64) -> UnitState {
    let mut r = me.clone();
    r.heading += step;
    r
}

/// The priority cascade without the ε-override. Updates `memory`.
pub fn cascade(i: usize, scene: &Scene, memory: &mut HeuristicMemory, params: &HeuristicParams) -> (Action, Branch) {
    let me = &scene.states[i];
    let roles = classify_roles(&me.spec, params);
    let target = select_heuristic_target(i, scene, roles);

    if let Some(t) = target {
        *memory = Some(scene.states[t].position);
        if scene.attackable.get(i, t) && me.cooldown_timer == 0.0 {
            return (ATTACK, Branch::Attack);
        }
        let tu = &scene.states[t];
        if !hurtbox_overlaps(me, tu) && hurtbox_overlaps(&rotated(me, scene.physics.rotation_step()), tu) {
            return (ROTATE, Branch::Align);
        }
    }

    if roles.ranger {
        let threat = nearest(me.position, visible_alive(scene, i).filter(|(_, u)| u.team != me.team));
        if let Some(e) = threat {
            let d = me.position.distance(scene.states[e].position);
            if d < params.aggressive_threshold * me.spec.attack_range {
                return (best_move(me, scene.states[e].position, scene, true).0, Branch::Retreat);
            }
        }
    }

    if let Some(t) = target {
        let tu = &scene.states[t];
        let goal = desired_position(me, tu, roles);
        let (action, d) = best_move(me, goal, scene, false);
        if d >= me.position.distance(goal) && !hurtbox_overlaps(me, tu) {
            // Already as close as one step allows: turn toward the target instead.
            return (ROTATE, Branch::Approach);
        }
        return (action, Branch::Approach);
    }

    if let Some(last) = *memory {
        if me.position.distance(last) <= me.spec.body_radius {
            *memory = None;
        } else {
            return (best_move(me, last, scene, false).0, Branch::Pursue);
        }
    }

    if roles.ranger {
        let in_bush = scene.zones.iter().any(|z| z.zone_type == ZoneType::Bush && z.contains(me.position));
        let bush = scene
            .zones
            .iter()
            .filter(|z| z.zone_type == ZoneType::Bush)
            .map(|z| (me.position.distance(z.center), z.center))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let (false, Some((_, center))) = (in_bush, bush) {
            return (best_move(me, center, scene, false).0, Branch::SeekBush);
        }
    }

    (ROTATE, Branch::Search)
}

/// Full heuristic decision for unit `i`: the cascade followed by the
/// ε-override, which picks uniformly among the `valid` actions.
pub fn heuristic_step<R: Rng>(
    i: usize,
    scene: &Scene,
    memory: &mut HeuristicMemory,
    params: &HeuristicParams,
    valid: &[Action],
    rng: &mut R,
) -> Decision {
    let (action, branch) = cascade(i, scene, memory, params);
    let roll: f64 = rng.random();
    if roll < params.epsilon {
        if let Some(&a) = valid.choose(rng) {
            return Decision { action: a, branch, overridden: true };
        }
    }
    Decision { action, branch, overridden: false }
}
