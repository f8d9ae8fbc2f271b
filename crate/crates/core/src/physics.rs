//! Kinematic integration, circle contacts, impulse resolution, and the
//! out-of-bounds penalty.
//!
//! All functions operate in place on a slice of unit slots. Inactive slots are
//! never touched.

use crate::config::{Field, PhysicsParams};
use crate::math::Vec2;
use crate::unit::UnitState;

/// Overlap between units `i < j`; `normal` points from `i` toward `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub i: usize,
    pub j: usize,
    pub normal: Vec2,
    pub depth: f64,
}

/// Remainders below this fraction of `dt` count as expired, so a timer of
/// `k·dt` lasts exactly `k` steps despite rounding.
const TIMER_SNAP: f64 = 1e-9;

fn decrement(timer: f64, dt: f64) -> f64 {
    let left = timer - dt;
    if left <= dt * TIMER_SNAP {
        0.0
    } else {
        left
    }
}

/// Explicit Euler step. Each active unit's velocity becomes its commanded
/// velocity plus the impulse delta carried over from the previous resolution
/// pass; timers count down and floor at zero.
pub fn integrate_kinematics(states: &mut [UnitState], commanded: &[Vec2], dt: f64) {
    for (u, cmd) in states.iter_mut().zip(commanded) {
        if !u.active {
            continue;
        }
        u.velocity = *cmd + u.impulse_velocity;
        u.position += u.velocity * dt;
        u.cooldown_timer = decrement(u.cooldown_timer, dt);
        u.reveal_timer = decrement(u.reveal_timer, dt);
    }
}

fn contact_between(states: &[UnitState], i: usize, j: usize) -> Option<Contact> {
    let (a, b) = (&states[i], &states[j]);
    let delta = b.position - a.position;
    let reach = a.spec.body_radius + b.spec.body_radius;
    let dist_sq = delta.length_squared();
    if dist_sq >= reach * reach {
        return None;
    }
    let dist = dist_sq.sqrt();
    if dist == 0.0 {
        return Some(Contact { i, j, normal: Vec2::new(1.0, 0.0), depth: reach });
    }
    Some(Contact { i, j, normal: delta * (1.0 / dist), depth: reach - dist })
}

/// Every overlapping pair of active units, dead or alive, in ascending
/// `(i, j)` order.
///
/// Uses a sweep over the x-extent of each body; the result is identical to the
/// all-pairs test.
pub fn detect_contacts(states: &[UnitState]) -> Vec<Contact> {
    let mut order: Vec<usize> = (0..states.len()).filter(|&k| states[k].active).collect();
    order.sort_by(|&a, &b| {
        let la = states[a].position.x - states[a].spec.body_radius;
        let lb = states[b].position.x - states[b].spec.body_radius;
        la.total_cmp(&lb).then(a.cmp(&b))
    });

    let mut contacts = Vec::new();
    for (k, &a) in order.iter().enumerate() {
        let right = states[a].position.x + states[a].spec.body_radius;
        for &b in &order[k + 1..] {
            if states[b].position.x - states[b].spec.body_radius > right {
                break;
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if let Some(c) = contact_between(states, i, j) {
                contacts.push(c);
            }
        }
    }
    contacts.sort_by_key(|c| (c.i, c.j));
    contacts
}

/// All-pairs reference implementation of [`detect_contacts`].
pub fn detect_contacts_brute_force(states: &[UnitState]) -> Vec<Contact> {
    let mut contacts = Vec::new();
    for i in 0..states.len() {
        if !states[i].active {
            continue;
        }
        for j in i + 1..states.len() {
            if states[j].active {
                if let Some(c) = contact_between(states, i, j) {
                    contacts.push(c);
                }
            }
        }
    }
    contacts
}

/// Applies the impulse response (approaching pairs only) followed by the
/// slop-thresholded positional correction, one contact at a time in the given
/// order. Kinematic bodies have zero inverse mass and are never moved.
pub fn resolve_contacts(states: &mut [UnitState], contacts: &[Contact], params: &PhysicsParams) {
    for c in contacts {
        let inv_i = states[c.i].inverse_mass();
        let inv_j = states[c.j].inverse_mass();
        let inv_sum = inv_i + inv_j;
        if inv_sum == 0.0 {
            continue;
        }
        let n = c.normal;

        let rel_normal = (states[c.j].velocity - states[c.i].velocity).dot(n);
        if rel_normal <= 0.0 {
            let jm = -(1.0 + params.restitution) * rel_normal / inv_sum;
            states[c.i].velocity -= n * (jm * inv_i);
            states[c.j].velocity += n * (jm * inv_j);
        }

        let correction = params.correction_percent * (c.depth - params.penetration_slop).max(0.0) / inv_sum;
        if correction > 0.0 {
            states[c.i].position -= n * (correction * inv_i);
            states[c.j].position += n * (correction * inv_j);
        }
    }
}

/// Out-of-bounds penalty: alive units outside the field lose
/// `coeff · max_health · dt`; every active unit is then clipped into bounds.
pub fn apply_boundary(states: &mut [UnitState], field: &Field, coeff: f64, dt: f64) {
    for u in states.iter_mut().filter(|u| u.active) {
        if field.contains(u.position) {
            continue;
        }
        if u.alive {
            u.health = (u.health - coeff * u.spec.max_health * dt).max(0.0);
        }
        u.position = field.clamp(u.position);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit::{Preset, UnitSpec, ALLY, ENEMY};

    fn ball(x: f64, y: f64, radius: f64, mass: f64) -> UnitState {
        let mut spec: UnitSpec = Preset::Farmer.spec();
        spec.body_radius = radius;
        spec.body_mass = mass;
        UnitState::spawn(spec, ALLY, Vec2::new(x, y), 0.0)
    }

    #[test]
    fn euler_advances_farmer() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0)];
        integrate_kinematics(&mut s, &[Vec2::new(1.1, 0.0)], 0.1);
        assert!((s[0].position.x - 0.11).abs() < 1e-15);
        assert_eq!(s[0].position.y, 0.0);
    }

    #[test]
    fn zero_velocity_keeps_position() {
        let mut s = vec![ball(3.0, 4.0, 1.0, 1.0)];
        integrate_kinematics(&mut s, &[Vec2::ZERO], 0.7);
        assert_eq!(s[0].position, Vec2::new(3.0, 4.0));
    }

    #[test]
    fn timers_floor_at_zero() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0)];
        s[0].cooldown_timer = 0.05;
        s[0].reveal_timer = 0.3;
        integrate_kinematics(&mut s, &[Vec2::ZERO], 0.1);
        assert_eq!(s[0].cooldown_timer, 0.0);
        assert!((s[0].reveal_timer - 0.2).abs() < 1e-12);
    }

    #[test]
    fn whole_step_timers_expire_on_time() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0)];
        s[0].cooldown_timer = 2.5;
        s[0].reveal_timer = 1.0;
        for _ in 0..10 {
            integrate_kinematics(&mut s, &[Vec2::ZERO], 0.1);
        }
        assert_eq!(s[0].reveal_timer, 0.0);
        for _ in 0..15 {
            integrate_kinematics(&mut s, &[Vec2::ZERO], 0.1);
        }
        assert_eq!(s[0].cooldown_timer, 0.0);
    }

    #[test]
    fn inactive_units_are_untouched() {
        let mut s = vec![UnitState::placeholder()];
        s[0].cooldown_timer = 1.0;
        let before = s.clone();
        integrate_kinematics(&mut s, &[Vec2::new(5.0, 5.0)], 0.1);
        apply_boundary(&mut s, &Field::new(1.0, 1.0, 0.0), 0.1, 0.1);
        assert_eq!(s, before);
    }

    #[test]
    fn overlap_depth() {
        let s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(1.5, 0.0, 1.0, 1.0)];
        let c = detect_contacts(&s);
        assert_eq!(c.len(), 1);
        assert!((c[0].depth - 0.5).abs() < 1e-12);
        assert_eq!(c[0].normal, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn touching_is_not_a_contact() {
        let s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(2.0, 0.0, 1.0, 1.0)];
        assert!(detect_contacts(&s).is_empty());
    }

    #[test]
    fn dead_units_still_collide() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(1.0, 0.0, 1.0, 1.0)];
        s[1].health = 0.0;
        s[1].alive = false;
        assert_eq!(detect_contacts(&s).len(), 1);
        s[1].active = false;
        assert!(detect_contacts(&s).is_empty());
    }

    #[test]
    fn coincident_centers_use_default_normal() {
        let s = vec![ball(5.0, 5.0, 1.0, 1.0), ball(5.0, 5.0, 0.5, 1.0)];
        let c = detect_contacts(&s);
        assert_eq!(c[0].normal, Vec2::new(1.0, 0.0));
        assert_eq!(c[0].depth, 1.5);
    }

    #[test]
    fn elastic_head_on_exchange() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(1.9, 0.0, 1.0, 1.0)];
        s[0].velocity = Vec2::new(1.0, 0.0);
        s[1].velocity = Vec2::new(-1.0, 0.0);
        let params = PhysicsParams { restitution: 1.0, ..PhysicsParams::default() };
        let contacts = detect_contacts(&s);
        resolve_contacts(&mut s, &contacts, &params);
        assert!((s[0].velocity.x + 1.0).abs() < 1e-9);
        assert!((s[1].velocity.x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separating_pair_gets_only_positional_correction() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(1.5, 0.0, 1.0, 1.0)];
        s[0].velocity = Vec2::new(-1.0, 0.0);
        s[1].velocity = Vec2::new(1.0, 0.0);
        let params = PhysicsParams { penetration_slop: 0.01, correction_percent: 0.8, ..PhysicsParams::default() };
        let contacts = detect_contacts(&s);
        resolve_contacts(&mut s, &contacts, &params);
        assert_eq!(s[0].velocity, Vec2::new(-1.0, 0.0));
        assert_eq!(s[1].velocity, Vec2::new(1.0, 0.0));
        // c = 0.8 * (0.5 - 0.01) / (1 + 1) = 0.196, split by inverse mass 1 each
        assert!((s[0].position.x + 0.196).abs() < 1e-12);
        assert!((s[1].position.x - (1.5 + 0.196)).abs() < 1e-12);
    }

    #[test]
    fn kinematic_body_is_exempt() {
        let mut mammoth = UnitState::spawn(Preset::Mammoth.spec(), ENEMY, Vec2::new(0.0, 0.0), 0.0);
        mammoth.spec.kinematic = true;
        mammoth.velocity = Vec2::new(0.5, 0.0);
        let mut farmer = UnitState::spawn(Preset::Farmer.spec(), ALLY, Vec2::new(5.0, 0.0), 0.0);
        farmer.velocity = Vec2::new(-1.0, 0.0);
        let mut s = vec![mammoth.clone(), farmer];
        let params = PhysicsParams::default();
        let contacts = detect_contacts(&s);
        assert_eq!(contacts.len(), 1);
        resolve_contacts(&mut s, &contacts, &params);
        assert_eq!(s[0], mammoth);
        // inv_sum = 1, v_rel·n = -1.5 → jm = 1.5 * 1.5 = 2.25
        assert!((s[1].velocity.x - 1.25).abs() < 1e-12);
        // depth 0.25, c = 0.8 * 0.24 / 1
        assert!((s[1].position.x - (5.0 + 0.192)).abs() < 1e-12);
    }

    #[test]
    fn slop_suppresses_small_corrections() {
        let mut s = vec![ball(0.0, 0.0, 1.0, 1.0), ball(1.995, 0.0, 1.0, 1.0)];
        let contacts = detect_contacts(&s);
        resolve_contacts(&mut s, &contacts, &PhysicsParams::default());
        assert_eq!(s[0].position.x, 0.0);
        assert_eq!(s[1].position.x, 1.995);
    }

    #[test]
    fn boundary_penalty_and_clip() {
        let mut spec = Preset::Farmer.spec();
        spec.max_health = 100.0;
        let mut s = vec![UnitState::spawn(spec, ALLY, Vec2::new(-0.5, 10.0), 0.0)];
        apply_boundary(&mut s, &Field::new(40.0, 40.0, 0.0), 0.1, 0.1);
        assert!((s[0].health - 99.0).abs() < 1e-12);
        assert_eq!(s[0].position, Vec2::new(0.0, 10.0));

        let mut f = vec![UnitState::spawn(Preset::Farmer.spec(), ALLY, Vec2::new(41.0, 10.0), 0.0)];
        apply_boundary(&mut f, &Field::new(40.0, 40.0, 0.0), 0.1, 0.1);
        assert!((60.0 - f[0].health - 0.6).abs() < 1e-12);
    }

    #[test]
    fn inside_bounds_is_unchanged_and_dead_units_take_no_damage() {
        let mut s = vec![UnitState::spawn(Preset::Farmer.spec(), ALLY, Vec2::new(5.0, 5.0), 0.0)];
        let before = s.clone();
        apply_boundary(&mut s, &Field::new(40.0, 40.0, 0.0), 0.1, 0.1);
        assert_eq!(s, before);

        s[0].position = Vec2::new(50.0, 5.0);
        s[0].health = 0.0;
        s[0].alive = false;
        apply_boundary(&mut s, &Field::new(40.0, 40.0, 0.0), 0.1, 0.1);
        assert_eq!(s[0].health, 0.0);
        assert_eq!(s[0].position.x, 40.0);
    }
}
