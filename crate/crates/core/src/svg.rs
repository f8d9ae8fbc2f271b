//! Static SVG frames of an environment state.

use std::fmt::Write;

use crate::env::EnvState;
use crate::math::Vec2;
use crate::unit::ALLY;
use crate::zone::ZoneType;

const SCALE: f64 = 10.0;

fn zone_fill(t: ZoneType) -> &'static str {
    match t {
        ZoneType::Lava => "#e4572e",
        ZoneType::Bush => "#4c9f38",
        ZoneType::Swamp => "#6c8ead",
        ZoneType::Inactive => "none",
    }
}

/// Renders zones, view fans, bodies and headings. World `y` points up.
pub fn render_svg(state: &EnvState) -> String {
    let field = &state.config.field;
    let (w, h) = (field.width * SCALE, field.height * SCALE);
    let px = |p: Vec2| (p.x * SCALE, h - p.y * SCALE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#f4f1e8" stroke="#333"/>"##);
    let _ = writeln!(s, r#"<text x="4" y="14" font-size="12" font-family="monospace">{} t={}</text>"#, escape(&state.config.name), state.t);

    for z in state.zones.iter().filter(|z| z.is_active()) {
        let (cx, cy) = px(z.center);
        let _ = writeln!(
            s,
            r#"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{:.2}" ry="{:.2}" fill="{}" fill-opacity="0.45"/>"#,
            z.semi_axes.x * SCALE,
            z.semi_axes.y * SCALE,
            zone_fill(z.zone_type)
        );
    }

    for u in state.units.iter().filter(|u| u.alive) {
        let half = u.spec.sight_angle / 2.0;
        let r = u.spec.sight_range;
        let (ox, oy) = px(u.position);
        let (ax, ay) = px(u.position + Vec2::from_angle(u.heading + half) * r);
        let (bx, by) = px(u.position + Vec2::from_angle(u.heading - half) * r);
        let large = if u.spec.sight_angle > std::f64::consts::PI { 1 } else { 0 };
        let color = if u.team == ALLY { "#d62828" } else { "#2a9d8f" };
        let _ = writeln!(
            s,
            r#"<path d="M {ox:.2} {oy:.2} L {bx:.2} {by:.2} A {rr:.2} {rr:.2} 0 {large} 1 {ax:.2} {ay:.2} Z" fill="{color}" fill-opacity="0.08"/>"#,
            rr = r * SCALE
        );
    }

    for (id, u) in state.units.iter().enumerate().filter(|(_, u)| u.active) {
        let (cx, cy) = px(u.position);
        let color = match (u.alive, u.team == ALLY) {
            (false, _) => "#999999",
            (true, true) => "#d62828",
            (true, false) => "#2a9d8f",
        };
        let (hx, hy) = px(u.position + u.heading_vec() * u.spec.body_radius);
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="white" stroke="{color}" stroke-width="2"><title>{id} {} {:.1}/{:.1}</title></circle>"#,
            u.spec.body_radius * SCALE,
            escape(&u.spec.name),
            u.health,
            u.spec.max_health
        );
        let _ = writeln!(s, r#"<line x1="{cx:.2}" y1="{cy:.2}" x2="{hx:.2}" y2="{hy:.2}" stroke="{color}" stroke-width="2"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
