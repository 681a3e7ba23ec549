//! Seeded random metrics satisfying the structural constraints, for
//! property tests that cross-check the closed-form curvature against the
//! finite-difference oracle on inputs nobody hand-picked.
//!
//! The generated warps are analytic trigonometric series kept safely
//! positive on a working window `r in [0.4, 1.6]`, `s in [0.6, pi - 0.6]`,
//! and the fiber field is a circle curve (band-free or through one cutoff
//! band), so the closed-form assumptions — constant `sum_j m_j` and
//! `sum_j (d_r m_j)(d_s m_j) = 0` — hold exactly by construction.

use crate::fiber::{AngleCurve, Band, CircleCurve, Cutoff, FiberField};
use crate::metric::WarpedMetric;
use crate::profiles::{AngularProfile, AnalyticSeries, RadialProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Window of `(r, s)` on which the synthetic metrics are guaranteed
/// nondegenerate (warps bounded away from zero).
pub const SYNTHETIC_WINDOW: ((f64, f64), (f64, f64)) = ((0.4, 1.6), (0.6, std::f64::consts::PI - 0.6));

fn series(rng: &mut ChaCha8Rng, base: f64, slope_scale: f64, amp_scale: f64) -> AnalyticSeries {
    let terms = (0..3)
        .map(|_| {
            (
                amp_scale * rng.gen_range(0.2..1.0),
                rng.gen_range(0.4..2.2),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    AnalyticSeries { c0: base, c1: slope_scale * rng.gen_range(-1.0..1.0), terms }
}

/// A random smooth warped metric, deterministic in `seed`.  With
/// `banded = false` the fiber curve acts at every angle; with `true` it
/// passes through one wide cutoff band so all six fiber partials are
/// exercised.
pub fn random_metric(seed: u64, banded: bool) -> WarpedMetric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radial_base = rng.gen_range(1.2..2.0);
    let radial = RadialProfile::Series(series(&mut rng, radial_base, 0.15, 0.08));
    let angular_base = rng.gen_range(1.0..1.6);
    let angular = AngularProfile::Series(series(&mut rng, angular_base, 0.10, 0.06));
    let circle = CircleCurve {
        c: rng.gen_range(0.005..0.03),
        angle: AngleCurve::SmoothBump {
            amp: rng.gen_range(-1.0..1.0),
            lo: rng.gen_range(0.3..0.6),
            hi: rng.gen_range(0.9..1.4),
        },
    };
    let m_bar = rng.gen_range(0.5..2.0);
    let fiber = if banded {
        let band = Band {
            cutoff: Cutoff::build(
                (0.35, std::f64::consts::PI - 0.35),
                (1.1, std::f64::consts::PI - 1.1),
                0.01,
                rng.gen_range(30.0..80.0),
                0.15,
                0.25,
            )
            .expect("synthetic band geometry is feasible"),
            circle,
        };
        FiberField::banded(vec![band], m_bar).expect("single band cannot overlap")
    } else {
        FiberField::Circle { circle, m_bar }
    };
    WarpedMetric { radial, angular, fiber, name: format!("synthetic(seed={seed})") }
}

/// Deterministic low-discrepancy points of the synthetic window,
/// for oracle comparisons.
pub fn window_points(n: usize) -> Vec<(f64, f64)> {
    let ((r_lo, r_hi), (s_lo, s_hi)) = SYNTHETIC_WINDOW;
    (0..n)
        .map(|i| {
            let u = (i as f64 + 0.5) / n as f64;
            let v = (u * 1.618_033_988_749_895).fract();
            (r_lo + (r_hi - r_lo) * u, s_lo + (s_hi - s_lo) * v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ricci::{ricci_closed_form, ricci_oracle, RicciDiagonal};

    #[test]
    fn synthetic_metrics_are_deterministic_and_nondegenerate() {
        for seed in 0..8u64 {
            let w1 = random_metric(seed, seed % 2 == 0);
            let w2 = random_metric(seed, seed % 2 == 0);
            for &(r, s) in &window_points(9) {
                let d1 = w1.frame_metric(r, s).unwrap();
                let d2 = w2.frame_metric(r, s).unwrap();
                assert_eq!(d1, d2, "same seed, same metric");
                assert!(d1.iter().all(|&x| x > 1e-4), "degenerate at ({r}, {s}): {d1:?}");
            }
        }
    }

    #[test]
    fn closed_form_matches_oracle_on_random_metrics() {
        for seed in 0..6u64 {
            let w = random_metric(seed, seed % 2 == 0);
            for &(r, s) in &window_points(4) {
                let closed = ricci_closed_form(&w, r, s).unwrap();
                let p = crate::metric::ConePoint::axis(r, s);
                let fd = ricci_oracle(&w, &p, 1e-3).unwrap();
                let fd_diag = RicciDiagonal {
                    ric_rr: fd[0][0],
                    ric_ss: fd[1][1],
                    ric_jj: [fd[2][2], fd[3][3], fd[4][4]],
                };
                let scale = 1.0 + closed.norm();
                assert!(
                    (closed.ric_rr - fd_diag.ric_rr).abs() < 1e-6 * scale
                        && (closed.ric_ss - fd_diag.ric_ss).abs() < 1e-6 * scale,
                    "seed {seed} at ({r}, {s}): closed {closed:?} vs oracle {fd_diag:?}"
                );
                for j in 0..3 {
                    assert!(
                        (closed.ric_jj[j] - fd_diag.ric_jj[j]).abs() < 1e-6 * scale,
                        "seed {seed} fiber {j} at ({r}, {s})"
                    );
                }
                for i in 0..5 {
                    for k in 0..5 {
                        if i != k {
                            assert!(
                                fd[i][k].abs() < 1e-6 * scale,
                                "off-diagonal Ricci {i}{k} = {} at seed {seed}",
                                fd[i][k]
                            );
                        }
                    }
                }
            }
        }
    }
}
