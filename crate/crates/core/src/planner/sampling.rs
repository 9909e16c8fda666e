use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PlannerError, PlannerParams};
use crate::geometry::{point_disc_distance, segment_disc_distance, Disc, FieldModel, Vec2};

/// True iff `p` is outside every obstacle inflated by `clearance`.
pub fn point_clear(p: Vec2, obstacles: &[Disc], clearance: f64) -> bool {
    obstacles
        .iter()
        .all(|d| point_disc_distance(p, &d.inflated(clearance)) > 0.0)
}

/// True iff the segment keeps strictly outside every obstacle inflated by
/// `clearance`.
pub fn segment_clear(a: Vec2, b: Vec2, obstacles: &[Disc], clearance: f64) -> bool {
    obstacles
        .iter()
        .all(|d| segment_disc_distance(a, b, &d.inflated(clearance)) > 0.0)
}

/// Draw `n_samples` milestones uniformly inside the field (less its boundary
/// margin), redrawing any sample that lands in an inflated obstacle.
pub fn sample_milestones(
    params: &PlannerParams,
    field: &FieldModel,
    obstacles: &[Disc],
) -> Result<Vec<Vec2>, PlannerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let hx = field.half_length() - field.boundary_margin;
    let hy = field.half_width() - field.boundary_margin;
    let mut out = Vec::with_capacity(params.n_samples);
    for slot in 0..params.n_samples {
        let mut placed = false;
        for _ in 0..params.max_resample_attempts {
            let p = Vec2::new(rng.random_range(-hx..=hx), rng.random_range(-hy..=hy));
            if point_clear(p, obstacles, params.clearance) {
                out.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(PlannerError::FreeSpaceExhausted {
                slot,
                attempts: params.max_resample_attempts,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, seed: u64) -> PlannerParams {
        PlannerParams {
            n_samples: n,
            rng_seed: seed,
            ..PlannerParams::default()
        }
    }

    #[test]
    fn deterministic_and_in_bounds() {
        let field = FieldModel::division_b();
        let a = sample_milestones(&params(10, 42), &field, &[]).unwrap();
        let b = sample_milestones(&params(10, 42), &field, &[]).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        for p in &a {
            assert!(p.x.abs() <= 4.4 && p.y.abs() <= 2.9);
        }
        let c = sample_milestones(&params(10, 43), &field, &[]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn covered_field_exhausts() {
        let field = FieldModel::division_b();
        let blanket = Disc::new(Vec2::ZERO, 10.0).unwrap();
        assert_eq!(
            sample_milestones(&params(10, 1), &field, &[blanket]),
            Err(PlannerError::FreeSpaceExhausted {
                slot: 0,
                attempts: 100
            })
        );
    }

    #[test]
    fn samples_avoid_inflated_obstacle() {
        let field = FieldModel::division_b();
        let obstacle = Disc::new(Vec2::ZERO, 0.5).unwrap();
        let p = PlannerParams {
            clearance: 0.09,
            ..params(100, 7)
        };
        let pts = sample_milestones(&p, &field, &[obstacle]).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|q| q.norm() >= 0.59));
    }

    #[test]
    fn segment_clear_examples() {
        let obstacle = [Disc::new(Vec2::ZERO, 0.1).unwrap()];
        assert!(!segment_clear(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), &obstacle, 0.09));
        assert!(segment_clear(Vec2::new(-1.0, 1.0), Vec2::new(1.0, 1.0), &obstacle, 0.09));
        assert!(segment_clear(Vec2::new(-1.0, 0.0), Vec2::new(1.0, 0.0), &[], 0.09));
    }
}
