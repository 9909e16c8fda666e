//! SVG rendering of a planning run: field, obstacles, milestones, every
//! roadmap link as a thin grey line and the chosen path as a thick blue line.

use std::fmt::Write;

use crate::geometry::{Disc, FieldModel, Vec2};
use crate::planner::{PlanOutcome, GOAL_INDEX, START_INDEX};

const PX_PER_M: f64 = 80.0;
const PAD: f64 = 20.0;

pub const PATH_COLOR: &str = "#1f4fd8";
pub const LINK_COLOR: &str = "#9a9a9a";

struct Canvas {
    hx: f64,
    hy: f64,
}

impl Canvas {
    fn x(&self, x: f64) -> f64 {
        PAD + (x + self.hx) * PX_PER_M
    }

    fn y(&self, y: f64) -> f64 {
        PAD + (self.hy - y) * PX_PER_M
    }
}

pub fn plan_svg(
    field: &FieldModel,
    obstacles: &[Disc],
    start: Vec2,
    target: Vec2,
    outcome: Option<&PlanOutcome>,
) -> String {
    let c = Canvas {
        hx: field.half_length(),
        hy: field.half_width(),
    };
    let w = field.length * PX_PER_M + 2.0 * PAD;
    let h = field.width * PX_PER_M + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#2e7d32" stroke="white" stroke-width="2"/>"##,
        c.x(-c.hx),
        c.y(c.hy),
        field.length * PX_PER_M,
        field.width * PX_PER_M
    );
    let _ = writeln!(
        s,
        r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="white" stroke-width="1"/>"#,
        c.x(0.0),
        c.y(c.hy),
        c.y(-c.hy)
    );
    for gx in [-c.hx, c.hx] {
        let _ = writeln!(
            s,
            r#"<line class="goal" x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="white" stroke-width="5"/>"#,
            c.x(gx),
            c.y(field.goal_width / 2.0),
            c.y(-field.goal_width / 2.0)
        );
    }
    for d in obstacles {
        let _ = writeln!(
            s,
            r##"<circle class="obstacle" cx="{:.1}" cy="{:.1}" r="{:.1}" fill="#222" stroke="#ffd600" stroke-width="1"/>"##,
            c.x(d.center.x),
            c.y(d.center.y),
            d.radius() * PX_PER_M
        );
    }
    if let Some(o) = outcome {
        let nodes = &o.roadmap.nodes;
        for (u, v, _) in o.roadmap.edges() {
            let _ = writeln!(
                s,
                r#"<line class="link" x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{LINK_COLOR}" stroke-width="1"/>"#,
                c.x(nodes[u].x),
                c.y(nodes[u].y),
                c.x(nodes[v].x),
                c.y(nodes[v].y)
            );
        }
        if let Some(path) = &o.path {
            let pts: Vec<String> = path
                .iter()
                .map(|&i| format!("{:.1},{:.1}", c.x(nodes[i].x), c.y(nodes[i].y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="path" points="{}" fill="none" stroke="{PATH_COLOR}" stroke-width="5" stroke-linejoin="round"/>"#,
                pts.join(" ")
            );
        }
        for (i, p) in nodes.iter().enumerate() {
            if i == START_INDEX || i == GOAL_INDEX {
                continue;
            }
            let _ = writeln!(
                s,
                r#"<circle class="milestone" cx="{:.1}" cy="{:.1}" r="3" fill="white"/>"#,
                c.x(p.x),
                c.y(p.y)
            );
        }
    }
    for (class, p, color) in [("start", start, "#00e5ff"), ("target", target, "#ff6d00")] {
        let _ = writeln!(
            s,
            r#"<circle class="{class}" cx="{:.1}" cy="{:.1}" r="6" fill="{color}"/>"#,
            c.x(p.x),
            c.y(p.y)
        );
    }
    s.push_str("</svg>\n");
    s
}
