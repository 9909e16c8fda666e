//! Worlds and oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use omnissl::geometry::ROBOT_RADIUS;
use omnissl::planner::point_clear;
use omnissl::{Disc, FieldModel, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORRIDOR_WALL: f64 = 3.0;

/// Smallest of `|p - c|² - (r + clearance)²` over 1e5 evenly spaced points of
/// the segment, for obstacles whose inflated box meets the segment's box.
pub fn dense_margin(a: Vec2, b: Vec2, obstacles: &[Disc], clearance: f64) -> f64 {
    const POINTS: usize = 100_000;
    let (lo, hi) = (
        Vec2::new(a.x.min(b.x), a.y.min(b.y)),
        Vec2::new(a.x.max(b.x), a.y.max(b.y)),
    );
    let mut worst = f64::INFINITY;
    for d in obstacles {
        let reach = d.radius() + clearance;
        if d.center.x + reach < lo.x
            || d.center.x - reach > hi.x
            || d.center.y + reach < lo.y
            || d.center.y - reach > hi.y
        {
            continue;
        }
        let r2 = reach * reach;
        for i in 0..POINTS {
            let t = i as f64 / (POINTS - 1) as f64;
            let p = Vec2::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
            let dx = p.x - d.center.x;
            let dy = p.y - d.center.y;
            worst = worst.min(dx * dx + dy * dy - r2);
        }
    }
    worst
}

/// A wall of robot discs across `x = 0`, `wall_length` long and centred on
/// the x axis, with one gap of 0.5 m between disc edges at a random height.
/// Start and target sit 2 m either side of it.
pub fn corridor_world(seed: u64, wall_length: f64) -> (Vec<Disc>, Vec2, Vec2) {
    const GAP: f64 = 0.5;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let half = wall_length / 2.0;
    let gap_lo = r.random_range(-half + 0.3..=half - 0.3 - GAP);
    let gap_hi = gap_lo + GAP;
    let mut discs = Vec::new();
    let mut y = -half + ROBOT_RADIUS;
    while y + ROBOT_RADIUS <= gap_lo {
        discs.push(Disc::robot(Vec2::new(0.0, y)));
        y += 2.0 * ROBOT_RADIUS;
    }
    if discs
        .last()
        .is_none_or(|d| d.center.y + ROBOT_RADIUS < gap_lo)
    {
        discs.push(Disc::robot(Vec2::new(0.0, gap_lo - ROBOT_RADIUS)));
    }
    let mut y = gap_hi + ROBOT_RADIUS;
    while y - ROBOT_RADIUS <= half {
        discs.push(Disc::robot(Vec2::new(0.0, y.min(half - ROBOT_RADIUS))));
        y += 2.0 * ROBOT_RADIUS;
    }
    let start = Vec2::new(-2.0, r.random_range(-1.0..=1.0));
    let target = Vec2::new(2.0, r.random_range(-1.0..=1.0));
    (discs, start, target)
}

/// Breadth-first search over a 2 cm grid of clear points.
pub fn grid_reachable(field: &FieldModel, obstacles: &[Disc], c: f64, s: Vec2, g: Vec2) -> bool {
    let h = 0.02;
    let hx = field.half_length() - field.boundary_margin;
    let hy = field.half_width() - field.boundary_margin;
    let nx = (2.0 * hx / h) as i64 + 1;
    let ny = (2.0 * hy / h) as i64 + 1;
    let cell = |p: Vec2| (((p.x + hx) / h).round() as i64, ((p.y + hy) / h).round() as i64);
    let at = |i: i64, j: i64| Vec2::new(-hx + i as f64 * h, -hy + j as f64 * h);
    let mut seen = vec![false; (nx * ny) as usize];
    let (si, sj) = cell(s);
    let goal = cell(g);
    let mut queue = VecDeque::from([(si, sj)]);
    seen[(si * ny + sj) as usize] = true;
    while let Some((i, j)) = queue.pop_front() {
        if (i, j) == goal {
            return true;
        }
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= nx || b >= ny {
                continue;
            }
            let k = (a * ny + b) as usize;
            if !seen[k] {
                seen[k] = true;
                if point_clear(at(a, b), obstacles, c) {
                    queue.push_back((a, b));
                }
            }
        }
    }
    false
}
