//! Hurtbox geometry, attackable matrix, closest-target selection and
//! simultaneous damage application.

use crate::action::{Action, ATTACK};
use crate::math::Vec2;
use crate::perception::{in_fov, BoolMatrix, VisibilityMatrix};
use crate::unit::UnitState;

/// `attacked[i][j]`: unit `i` hit (or healed) unit `j` this step.
pub type InteractionMatrix = BoolMatrix;

/// Whether `target`'s body overlaps `attacker`'s hurtbox.
///
/// The hurtbox is a rectangle starting at the attacker's center and running
/// along its heading for `body_radius + attack_range`, with half-width
/// `body_radius`. The target's center must also lie inside the attacker's
/// view fan.
pub fn hurtbox_overlaps(attacker: &UnitState, target: &UnitState) -> bool {
    let axis = attacker.heading_vec();
    let rel = target.position - attacker.position;
    let along = rel.dot(axis);
    let across = axis.cross(rel);
    let length = attacker.spec.body_radius + attacker.spec.attack_range;
    let half_width = attacker.spec.body_radius;
    let ds = along - along.clamp(0.0, length);
    let dt = across - across.clamp(-half_width, half_width);
    let r = target.spec.body_radius;
    ds * ds + dt * dt <= r * r && in_fov(attacker, target.position)
}

/// Hurtbox test of `attacker` against every slot; inactive targets and the
/// attacker itself (same position and identity) never hit.
pub fn hurtbox_hits(attacker_index: usize, states: &[UnitState]) -> Vec<bool> {
    let attacker = &states[attacker_index];
    states
        .iter()
        .enumerate()
        .map(|(j, t)| j != attacker_index && t.active && hurtbox_overlaps(attacker, t))
        .collect()
}

/// Role gate: damage dealers hit enemies only, healers affect allies only.
pub fn role_allows(attacker: &UnitState, target: &UnitState) -> bool {
    let dmg = attacker.spec.attack_damage;
    (dmg > 0.0 && attacker.team != target.team) || (dmg < 0.0 && attacker.team == target.team)
}

/// `[i][j]` true iff both units are alive, `j` is in `i`'s hurtbox, the role
/// gate passes, and `i` can see `j`.
pub fn attackable_matrix(states: &[UnitState], visibility: &VisibilityMatrix) -> BoolMatrix {
    let n = states.len();
    let mut m = BoolMatrix::new(n);
    for i in 0..n {
        let a = &states[i];
        if !a.alive {
            continue;
        }
        for j in 0..n {
            let t = &states[j];
            if i != j && t.alive && visibility.get(i, j) && role_allows(a, t) && hurtbox_overlaps(a, t) {
                m.set(i, j, true);
            }
        }
    }
    m
}

/// Closest attackable unit to `i`; ties go to the lowest index.
pub fn select_target(i: usize, attackable: &BoolMatrix, positions: &[Vec2]) -> Option<usize> {
    let origin = positions[i];
    let mut best: Option<(f64, usize)> = None;
    for (j, &ok) in attackable.row(i).iter().enumerate() {
        if !ok {
            continue;
        }
        let d = (positions[j] - origin).length_squared();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, j));
        }
    }
    best.map(|(_, j)| j)
}

/// Executes every eligible attack action and returns who hit whom.
///
/// An attack is eligible when the unit is alive with a zero cooldown timer.
/// Eligible attacks always reset the cooldown, even without a target. All
/// health deltas are summed against the pre-combat health and clamped once.
pub fn resolve_combat(states: &mut [UnitState], actions: &[Action], attackable: &BoolMatrix) -> InteractionMatrix {
    let n = states.len();
    let positions: Vec<Vec2> = states.iter().map(|u| u.position).collect();
    let mut attacked = BoolMatrix::new(n);
    let mut delta = vec![0.0; n];
    let mut any = false;
    for i in 0..n {
        let u = &states[i];
        if actions.get(i) != Some(&ATTACK) || !u.alive || u.cooldown_timer > 0.0 {
            continue;
        }
        if let Some(j) = select_target(i, attackable, &positions) {
            attacked.set(i, j, true);
            delta[j] -= u.spec.attack_damage;
            any = true;
        }
        states[i].cooldown_timer = states[i].spec.attack_cooldown;
    }
    if any {
        for (u, d) in states.iter_mut().zip(&delta) {
            if *d != 0.0 {
                u.health = (u.health + d).clamp(0.0, u.spec.max_health);
            }
        }
    }
    attacked
}
