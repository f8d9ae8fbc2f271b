//! Fan-shaped field of view, bush concealment, and the observation /
//! global-state feature layout.

use crate::config::Field;
use crate::math::Vec2;
use crate::unit::UnitState;
use crate::zone::{Zone, ZoneType};

/// Dense square boolean matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    n: usize,
    data: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, data: vec![false; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }
}

/// `visible[i][j]`: unit `i` can observe unit `j`.
pub type VisibilityMatrix = BoolMatrix;

/// Whether `point` lies inside the observer's view fan (range and half-angle
/// both inclusive).
pub fn in_fov(observer: &UnitState, point: Vec2) -> bool {
    let d = point - observer.position;
    let dist_sq = d.length_squared();
    if dist_sq == 0.0 {
        return true;
    }
    let range = observer.spec.sight_range;
    if dist_sq > range * range {
        return false;
    }
    let h = observer.heading_vec();
    let deviation = h.cross(d).atan2(h.dot(d)).abs();
    deviation <= observer.spec.sight_angle / 2.0
}

/// Bit `k` set iff bush `k` contains `p`. Validation caps zones at 64.
fn bush_mask(zones: &[Zone], p: Vec2) -> u64 {
    zones
        .iter()
        .enumerate()
        .filter(|(_, z)| z.zone_type == ZoneType::Bush && z.contains(p))
        .fold(0u64, |m, (k, _)| m | (1u64 << k))
}

/// Whether `target` is hidden from `observer` by a bush, ignoring the FoV.
///
/// Hidden iff the target stands in a bush, belongs to the other team, has no
/// reveal time left, and the observer does not share any bush with it.
pub fn concealed(observer: &UnitState, target: &UnitState, zones: &[Zone]) -> bool {
    if observer.team == target.team || target.reveal_timer > 0.0 {
        return false;
    }
    let target_bushes = bush_mask(zones, target.position);
    target_bushes != 0 && target_bushes & bush_mask(zones, observer.position) == 0
}

pub fn visibility_matrix(states: &[UnitState], zones: &[Zone]) -> VisibilityMatrix {
    let n = states.len();
    let masks: Vec<u64> = states.iter().map(|u| bush_mask(zones, u.position)).collect();
    let mut vis = BoolMatrix::new(n);
    for i in 0..n {
        if !states[i].active {
            continue;
        }
        vis.set(i, i, true);
        for j in 0..n {
            if i == j || !states[j].active {
                continue;
            }
            let (a, b) = (&states[i], &states[j]);
            let hidden = a.team != b.team && b.reveal_timer == 0.0 && masks[j] != 0 && masks[j] & masks[i] == 0;
            vis.set(i, j, !hidden && in_fov(a, b.position));
        }
    }
    vis
}

/// Sets the reveal timer of every unit that attacked, healed, or was hit this step.
pub fn update_reveal_timers(states: &mut [UnitState], interactions: &BoolMatrix, reveal_duration: f64) {
    for i in 0..interactions.size() {
        for j in 0..interactions.size() {
            if interactions.get(i, j) {
                states[i].reveal_timer = reveal_duration;
                states[j].reveal_timer = reveal_duration;
            }
        }
    }
}

/// Scale for the absolute max-health feature.
pub const H_REF: f64 = 1000.0;

/// Fixed observation layout shared by every scenario with the same
/// `(max_units, max_zones)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationLayout {
    pub own_dim: usize,
    pub per_other_dim: usize,
    pub per_zone_dim: usize,
    pub max_units: usize,
    pub max_zones: usize,
}

impl ObservationLayout {
    pub const OWN_DIM: usize = 15;
    pub const OTHER_DIM: usize = 17;
    pub const ZONE_DIM: usize = 8;

    pub fn new(max_units: usize, max_zones: usize) -> Self {
        Self {
            own_dim: Self::OWN_DIM,
            per_other_dim: Self::OTHER_DIM,
            per_zone_dim: Self::ZONE_DIM,
            max_units,
            max_zones,
        }
    }

    pub fn total(&self) -> usize {
        self.own_dim + self.max_units.saturating_sub(1) * self.per_other_dim + self.max_zones * self.per_zone_dim
    }

    pub fn global_total(&self) -> usize {
        self.own_dim * self.max_units + self.max_zones * self.per_zone_dim
    }

    /// Offset of the block describing unit `j` inside observer `i`'s vector.
    pub fn other_offset(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        let slot = if j < i { j } else { j - 1 };
        self.own_dim + slot * self.per_other_dim
    }

    pub fn zone_offset(&self, k: usize) -> usize {
        self.own_dim + self.max_units.saturating_sub(1) * self.per_other_dim + k * self.per_zone_dim
    }
}

fn cooldown_ratio(u: &UnitState) -> f64 {
    if u.spec.attack_cooldown > 0.0 {
        u.cooldown_timer / u.spec.attack_cooldown
    } else {
        0.0
    }
}

fn own_block(u: &UnitState, field: &Field, out: &mut [f32]) {
    let h = u.heading_vec();
    let vals = [
        u.health_ratio(),
        u.spec.max_health / H_REF,
        u.position.x / field.width,
        u.position.y / field.height,
        h.x,
        h.y,
        u.spec.attack_range,
        u.spec.attack_damage,
        u.cooldown_timer,
        cooldown_ratio(u),
        u.spec.body_radius,
        u.spec.body_mass,
        u.spec.sight_angle,
        if u.alive { 1.0 } else { 0.0 },
        u.spec.speed,
    ];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v as f32;
    }
}

fn other_block(observer: &UnitState, u: &UnitState, attackable: bool, field: &Field, out: &mut [f32]) {
    let h = u.heading_vec();
    let rel = u.position - observer.position;
    let vals = [
        u.health_ratio(),
        u.spec.max_health / H_REF,
        rel.x / field.width,
        rel.y / field.height,
        h.x,
        h.y,
        u.spec.attack_range,
        u.spec.attack_damage,
        u.cooldown_timer,
        cooldown_ratio(u),
        u.spec.body_radius,
        u.spec.body_mass,
        u.spec.sight_angle,
        if u.alive { 1.0 } else { 0.0 },
        if u.team == observer.team { 1.0 } else { 0.0 },
        if attackable { 1.0 } else { 0.0 },
        u.spec.speed,
    ];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v as f32;
    }
}

fn zone_block(z: &Zone, origin: Vec2, field: &Field, out: &mut [f32]) {
    if !z.is_active() {
        out.fill(0.0);
        return;
    }
    let rel = z.center - origin;
    let vals = [
        (z.zone_type == ZoneType::Lava) as u8 as f64,
        (z.zone_type == ZoneType::Bush) as u8 as f64,
        (z.zone_type == ZoneType::Swamp) as u8 as f64,
        rel.x / field.width,
        rel.y / field.height,
        z.semi_axes.x,
        z.semi_axes.y,
        z.effect,
    ];
    for (o, v) in out.iter_mut().zip(vals) {
        *o = v as f32;
    }
}

/// Writes agent `i`'s observation into `out` (length `layout.total()`).
///
/// `zones` must already be padded to `layout.max_zones` slots. Invisible and
/// padding units contribute all-zero blocks; an inactive observer gets an
/// all-zero vector.
pub fn write_observation(
    out: &mut [f32],
    i: usize,
    states: &[UnitState],
    zones: &[Zone],
    visibility: &VisibilityMatrix,
    attackable: &BoolMatrix,
    field: &Field,
    layout: &ObservationLayout,
) {
    out.fill(0.0);
    let me = &states[i];
    if !me.active {
        return;
    }
    own_block(me, field, &mut out[..layout.own_dim]);
    for (j, u) in states.iter().enumerate() {
        if j == i || !u.active || !visibility.get(i, j) {
            continue;
        }
        let off = layout.other_offset(i, j);
        other_block(me, u, attackable.get(i, j), field, &mut out[off..off + layout.per_other_dim]);
    }
    for (k, z) in zones.iter().enumerate().take(layout.max_zones) {
        let off = layout.zone_offset(k);
        zone_block(z, me.position, field, &mut out[off..off + layout.per_zone_dim]);
    }
}

pub fn build_observation(
    i: usize,
    states: &[UnitState],
    zones: &[Zone],
    visibility: &VisibilityMatrix,
    attackable: &BoolMatrix,
    field: &Field,
    layout: &ObservationLayout,
) -> Vec<f32> {
    let mut out = vec![0.0; layout.total()];
    write_observation(&mut out, i, states, zones, visibility, attackable, field, layout);
    out
}

/// Unmasked state: every unit slot's own-style block followed by every zone
/// block (zone centers relative to the field origin).
pub fn build_global_state(states: &[UnitState], zones: &[Zone], field: &Field, layout: &ObservationLayout) -> Vec<f32> {
    let mut out = vec![0.0; layout.global_total()];
    for (k, u) in states.iter().enumerate().take(layout.max_units) {
        if u.active {
            own_block(u, field, &mut out[k * layout.own_dim..(k + 1) * layout.own_dim]);
        }
    }
    let base = layout.own_dim * layout.max_units;
    for (k, z) in zones.iter().enumerate().take(layout.max_zones) {
        let off = base + k * layout.per_zone_dim;
        zone_block(z, Vec2::ZERO, field, &mut out[off..off + layout.per_zone_dim]);
    }
    out
}
