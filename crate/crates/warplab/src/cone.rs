//! Tangent-cone fiber spaces along the singular ray.
//!
//! The cone at the ray point `gamma(r)` is `R x C(S^3, g(r))` with
//! `g(r) = sum_j e^{2 m_j(r)} sigma_j^2` diagonal in the right-invariant
//! frame.  To compare cones at nearby radii without resampling noise, a
//! single Haar atlas of `S^3` is built once and shared by every fiber
//! metric.  Distances come from the complete chord graph: along the
//! one-parameter subgroup joining two atlas points the right-invariant
//! velocity is constant, so the chord length `sqrt(sum_a e^{2 m_a} u_a^2)`
//! is computed in closed form from the cached relative log `u`.  For the
//! round metric chords are geodesics and the graph is exact; anisotropy is
//! absorbed by Dijkstra, which relays through other atlas points whenever a
//! broken chord is shorter.  Aligned indices make identity-correspondence
//! bounds between two fiber metrics cancel most of the discretization bias.

use crate::gh::{cone_ball, half_disc_skeleton};
use crate::graph::FiniteMetricSpace;
use crate::quat::Quat;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reusable discretization of `S^3`: Haar points, the cached relative logs
/// of every pair, and a farthest-point net of Dijkstra sources.
pub struct FiberAtlas {
    /// Haar sample of the fiber shared by every metric.
    pub points: Vec<Quat>,
    /// Net indices (into `points`) used as Dijkstra sources and as the
    /// restriction defining the finite fiber spaces.
    pub net: Vec<usize>,
    /// Covering radius of the net in the round metric.
    pub net_radius: f64,
    /// Lower-triangular cache of `log(xi_i xi_j^{-1})` for `i > j`; the sign
    /// ambiguity of the orientation squares away in the weights.
    logs: Vec<[f64; 3]>,
    seed: u64,
}

/// Chord length of the relative log `u` under axis scales `lambda = e^m`.
fn chord(u: &[f64; 3], lambda: &[f64; 3]) -> f64 {
    ((lambda[0] * u[0]).powi(2) + (lambda[1] * u[1]).powi(2) + (lambda[2] * u[2]).powi(2))
        .sqrt()
}

impl FiberAtlas {
    /// Builds the atlas: `n` Haar points and a farthest-point net of
    /// `net_size` sources (the finite fiber spaces live on the net).
    pub fn build(n: usize, net_size: usize, seed: u64) -> Result<FiberAtlas> {
        if n < 8 || net_size < 2 || net_size > n {
            return Err(Error::InvalidInput(format!(
                "atlas needs n >= 8 and 2 <= net <= n; got n={n} net={net_size}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Quat> = (0..n).map(|_| Quat::haar(&mut rng)).collect();

        let mut logs = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in 0..i {
                logs.push(points[i].mul(&points[j].conj()).log_unit());
            }
        }

        // Farthest-point net in the round metric, seeded at the point of
        // largest eccentricity.
        let mut start = 0;
        let mut ecc = -1.0;
        for i in 0..n {
            let e = (0..n)
                .map(|j| points[i].round_distance(&points[j]))
                .fold(0.0, f64::max);
            if e > ecc {
                ecc = e;
                start = i;
            }
        }
        let mut net = vec![start];
        let mut near: Vec<f64> =
            (0..n).map(|j| points[start].round_distance(&points[j])).collect();
        while net.len() < net_size {
            let (mut arg, mut far) = (0usize, -1.0);
            for j in 0..n {
                if near[j] > far {
                    far = near[j];
                    arg = j;
                }
            }
            net.push(arg);
            for j in 0..n {
                near[j] = near[j].min(points[arg].round_distance(&points[j]));
            }
        }
        let net_radius = near.iter().cloned().fold(0.0, f64::max);
        Ok(FiberAtlas { points, net, net_radius, logs, seed })
    }

    /// Number of atlas points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Whether the atlas is empty (never true for a built atlas).
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn log_between(&self, i: usize, j: usize) -> &[f64; 3] {
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        &self.logs[hi * (hi - 1) / 2 + lo]
    }

    /// Dense Dijkstra over the complete chord graph.
    fn distances(&self, src: usize, lambda: &[f64; 3]) -> Vec<f64> {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[src] = 0.0;
        for _ in 0..n {
            let mut v = usize::MAX;
            let mut dv = f64::INFINITY;
            for (i, &d) in dist.iter().enumerate() {
                if !done[i] && d < dv {
                    dv = d;
                    v = i;
                }
            }
            if v == usize::MAX {
                break;
            }
            done[v] = true;
            for w in 0..n {
                if !done[w] {
                    let nd = dv + chord(self.log_between(v, w), lambda);
                    if nd < dist[w] {
                        dist[w] = nd;
                    }
                }
            }
        }
        dist
    }

    /// Finite fiber space on the net under exponents `m`: broken-chord
    /// distances of the re-weighted atlas, symmetrized, restricted to the
    /// net.  Exact for isotropic exponents; an upper approximation within
    /// the chord curvature error otherwise.
    pub fn fiber_space(&self, m: &[f64; 3]) -> Result<FiniteMetricSpace> {
        let lambda = [m[0].exp(), m[1].exp(), m[2].exp()];
        let nn = self.net.len();
        let rows: Vec<Vec<f64>> =
            self.net.iter().map(|&s| self.distances(s, &lambda)).collect();
        let mut d = vec![0.0f64; nn * nn];
        for i in 0..nn {
            for j in 0..i {
                let v = 0.5 * (rows[i][self.net[j]] + rows[j][self.net[i]]);
                d[i * nn + j] = v;
                d[j * nn + i] = v;
            }
        }
        FiniteMetricSpace::from_matrix(
            nn,
            d,
            &format!(
                "fiber net (seed {}, exponents [{:.6}, {:.6}, {:.6}])",
                self.seed, m[0], m[1], m[2]
            ),
        )
    }

    /// Exact round distances on the net (the `m = 0` oracle).
    pub fn round_space(&self) -> Result<FiniteMetricSpace> {
        let nn = self.net.len();
        let mut d = vec![0.0f64; nn * nn];
        for i in 0..nn {
            for j in 0..i {
                let v = self.points[self.net[i]].round_distance(&self.points[self.net[j]]);
                d[i * nn + j] = v;
                d[j * nn + i] = v;
            }
        }
        FiniteMetricSpace::from_matrix(nn, d, "round fiber net")
    }

    /// Sampled unit ball of the tangent cone `R x C(S^3, m)`: the half-disc
    /// skeleton of `skeleton_size` points combined with the fiber net.
    pub fn cone_unit_ball(
        &self,
        m: &[f64; 3],
        skeleton_size: usize,
    ) -> Result<FiniteMetricSpace> {
        let fiber = self.fiber_space(m)?;
        cone_ball(&fiber, &half_disc_skeleton(skeleton_size))
    }
}
