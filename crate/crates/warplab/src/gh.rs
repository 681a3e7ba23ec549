//! Gromov-Hausdorff estimates between finite metric spaces: an exact
//! enumeration oracle for tiny spaces, certified lower bounds, seeded
//! annealing upper bounds with correspondence witnesses, farthest-point
//! nets, and sampled cones `R x C(S^3, g)` over finite fiber spaces.
//!
//! Everything is phrased through correspondences: `d_GH = inf dis(R) / 2`
//! over doubly surjective relations `R`.  Every correspondence contains one
//! of the form `graph(f) u graph(g)^T` with `f : X -> Y` and `g : Y -> X`,
//! and passing to a subset never increases distortion, so both the oracle
//! and the annealer search only that family.

use crate::graph::FiniteMetricSpace;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A doubly surjective relation between two finite metric spaces, stored as
/// explicit index pairs.
#[derive(Debug, Clone)]
pub struct Correspondence {
    /// Pairs `(i, a)` relating point `i` of `X` to point `a` of `Y`.
    pub pairs: Vec<(u32, u32)>,
}

impl Correspondence {
    /// Builds the relation `graph(f) u graph(g)^T` from the two maps.
    pub fn from_maps(f: &[usize], g: &[usize]) -> Correspondence {
        let mut pairs: Vec<(u32, u32)> =
            f.iter().enumerate().map(|(i, &a)| (i as u32, a as u32)).collect();
        for (a, &i) in g.iter().enumerate() {
            if f.get(i) != Some(&a) {
                pairs.push((i as u32, a as u32));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Correspondence { pairs }
    }

    /// Whether every point of both spaces appears in some pair.
    pub fn is_doubly_surjective(&self, nx: usize, ny: usize) -> bool {
        let mut cx = vec![false; nx];
        let mut cy = vec![false; ny];
        for &(i, a) in &self.pairs {
            if (i as usize) < nx && (a as usize) < ny {
                cx[i as usize] = true;
                cy[a as usize] = true;
            } else {
                return false;
            }
        }
        cx.into_iter().all(|b| b) && cy.into_iter().all(|b| b)
    }

    /// Distortion `max |d_X(x, x') - d_Y(y, y')|` over pairs of pairs.
    pub fn distortion(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
        let mut m = 0.0f64;
        for (k, &(i, a)) in self.pairs.iter().enumerate() {
            for &(j, b) in &self.pairs[k + 1..] {
                m = m.max(
                    (x.d(i as usize, j as usize) - y.d(a as usize, b as usize)).abs(),
                );
            }
        }
        m
    }
}

/// Certified interval around the Gromov-Hausdorff distance.
#[derive(Debug, Clone)]
pub struct GhBounds {
    /// Valid lower bound.
    pub lower: f64,
    /// Distortion/2 of the witness.
    pub upper: f64,
    /// Correspondence realizing `upper`.
    pub witness: Correspondence,
}

/// Greedy seed correspondence: both spaces ranked by eccentricity and
/// matched proportionally along the ranking.
fn greedy_maps(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> (Vec<usize>, Vec<usize>) {
    let rank = |s: &FiniteMetricSpace| -> Vec<usize> {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        let ecc: Vec<f64> = (0..s.len())
            .map(|i| (0..s.len()).map(|j| s.d(i, j)).fold(0.0, f64::max))
            .collect();
        idx.sort_by(|&a, &b| ecc[a].partial_cmp(&ecc[b]).unwrap().then(a.cmp(&b)));
        idx
    };
    let rx = rank(x);
    let ry = rank(y);
    let (nx, ny) = (x.len(), y.len());
    let mut f = vec![0usize; nx];
    for (pos, &i) in rx.iter().enumerate() {
        f[i] = ry[pos * ny / nx];
    }
    let mut g = vec![0usize; ny];
    for (pos, &a) in ry.iter().enumerate() {
        g[a] = rx[pos * nx / ny];
    }
    (f, g)
}

struct ExactSearch<'a> {
    x: &'a FiniteMetricSpace,
    y: &'a FiniteMetricSpace,
    best: f64,
}

impl ExactSearch<'_> {
    fn assign_f(&mut self, f: &mut Vec<usize>, cur: f64) {
        let i = f.len();
        if i == self.x.len() {
            let mut covered = vec![false; self.y.len()];
            for &a in f.iter() {
                covered[a] = true;
            }
            let uncovered: Vec<usize> =
                (0..self.y.len()).filter(|&a| !covered[a]).collect();
            self.assign_g(f, &uncovered, &mut Vec::new(), cur);
            return;
        }
        for a in 0..self.y.len() {
            let mut m = cur;
            for (j, &fj) in f.iter().enumerate() {
                m = m.max((self.x.d(i, j) - self.y.d(a, fj)).abs());
            }
            if m < self.best {
                f.push(a);
                self.assign_f(f, m);
                f.pop();
            }
        }
    }

    fn assign_g(
        &mut self,
        f: &[usize],
        uncovered: &[usize],
        g: &mut Vec<usize>,
        cur: f64,
    ) {
        let t = g.len();
        if t == uncovered.len() {
            self.best = cur;
            return;
        }
        let a = uncovered[t];
        for xx in 0..self.x.len() {
            let mut m = cur;
            for (j, &fj) in f.iter().enumerate() {
                m = m.max((self.x.d(xx, j) - self.y.d(a, fj)).abs());
            }
            for (u, &gu) in g.iter().enumerate() {
                m = m.max((self.x.d(xx, gu) - self.y.d(a, uncovered[u])).abs());
            }
            if m < self.best {
                g.push(xx);
                self.assign_g(f, uncovered, g, m);
                g.pop();
            }
        }
    }
}

/// Exact Gromov-Hausdorff distance by branch-and-bound enumeration.
/// Restricted to spaces of at most six points.
pub fn gh_exact(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    if x.len() > 6 || y.len() > 6 {
        return Err(Error::InvalidInput(format!(
            "exact enumeration is limited to 6x6 points, got {}x{}",
            x.len(),
            y.len()
        )));
    }
    let (f0, g0) = greedy_maps(x, y);
    let seed_dis = Correspondence::from_maps(&f0, &g0).distortion(x, y);
    let mut search = ExactSearch { x, y, best: seed_dis + 1e-15 };
    search.assign_f(&mut Vec::new(), 0.0);
    Ok(0.5 * search.best.min(seed_dis))
}

fn hausdorff_1d(a: &[f64], b: &[f64]) -> f64 {
    // Both inputs sorted ascending.
    let side = |from: &[f64], to: &[f64]| -> f64 {
        let mut worst = 0.0f64;
        for &v in from {
            let i = to.partition_point(|&t| t < v);
            let mut near = f64::INFINITY;
            if i < to.len() {
                near = near.min((to[i] - v).abs());
            }
            if i > 0 {
                near = near.min((v - to[i - 1]).abs());
            }
            worst = worst.max(near);
        }
        worst
    };
    side(a, b).max(side(b, a))
}

fn spectrum(s: &FiniteMetricSpace) -> Vec<f64> {
    let mut sp = vec![0.0];
    for i in 0..s.len() {
        for j in 0..i {
            sp.push(s.d(i, j));
        }
    }
    sp.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    sp
}

/// Certified lower bound: the larger of the diameter gap and the Hausdorff
/// distance between the pairwise-distance sets (zero adjoined).  Any
/// correspondence of distortion `D` matches every distance of one space to a
/// distance of the other (or to a collapsed pair, distance zero) within `D`.
pub fn gh_lower(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let diam = 0.5 * (x.diameter() - y.diameter()).abs();
    diam.max(0.5 * hausdorff_1d(&spectrum(x), &spectrum(y)))
}

fn anneal_energy(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &[usize],
    g: &[usize],
) -> f64 {
    let (nx, ny) = (x.len(), y.len());
    let total = nx + ny;
    let pair = |k: usize| -> (usize, usize) {
        if k < nx {
            (k, f[k])
        } else {
            (g[k - nx], k - nx)
        }
    };
    let mut m = 0.0f64;
    for k in 0..total {
        let (i, a) = pair(k);
        for l in k + 1..total {
            let (j, b) = pair(l);
            m = m.max((x.d(i, j) - y.d(a, b)).abs());
        }
    }
    m
}

/// Energy together with the combined row indices of a maximizing pair
/// (rows `0..nx` are `(i, f(i))`, rows `nx..` are `(g(a), a)`).
fn anneal_energy_arg(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &[usize],
    g: &[usize],
) -> (f64, usize, usize) {
    let (nx, ny) = (x.len(), y.len());
    let total = nx + ny;
    let pair = |k: usize| -> (usize, usize) {
        if k < nx {
            (k, f[k])
        } else {
            (g[k - nx], k - nx)
        }
    };
    let mut m = -1.0f64;
    let mut arg = (0usize, 0usize);
    for k in 0..total {
        let (i, a) = pair(k);
        for l in k + 1..total {
            let (j, b) = pair(l);
            let v = (x.d(i, j) - y.d(a, b)).abs();
            if v > m {
                m = v;
                arg = (k, l);
            }
        }
    }
    (m.max(0.0), arg.0, arg.1)
}

/// Distortion of `(f, g)` if it is strictly below `cap`, with early abort.
fn energy_below(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &[usize],
    g: &[usize],
    cap: f64,
) -> Option<f64> {
    let (nx, ny) = (x.len(), y.len());
    let total = nx + ny;
    let pair = |k: usize| -> (usize, usize) {
        if k < nx {
            (k, f[k])
        } else {
            (g[k - nx], k - nx)
        }
    };
    let mut m = 0.0f64;
    for k in 0..total {
        let (i, a) = pair(k);
        for l in k + 1..total {
            let (j, b) = pair(l);
            m = m.max((x.d(i, j) - y.d(a, b)).abs());
            if m >= cap {
                return None;
            }
        }
    }
    Some(m)
}

/// Deterministic best-improvement descent over single coordinate changes of
/// `f` and `g`, repeated until stable or the sweep budget runs out.
fn polish(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    f: &mut [usize],
    g: &mut [usize],
    energy: &mut f64,
    max_sweeps: usize,
) {
    let (nx, ny) = (x.len(), y.len());
    for _ in 0..max_sweeps {
        let mut improved = false;
        for i in 0..nx {
            let old = f[i];
            let mut best_a = old;
            let mut best_e = *energy;
            for a in 0..ny {
                if a == old {
                    continue;
                }
                f[i] = a;
                if let Some(e) = energy_below(x, y, f, g, best_e) {
                    best_e = e;
                    best_a = a;
                }
            }
            f[i] = best_a;
            if best_a != old {
                *energy = best_e;
                improved = true;
            }
        }
        for b in 0..ny {
            let old = g[b];
            let mut best_i = old;
            let mut best_e = *energy;
            for i in 0..nx {
                if i == old {
                    continue;
                }
                g[b] = i;
                if let Some(e) = energy_below(x, y, f, g, best_e) {
                    best_e = e;
                    best_i = i;
                }
            }
            g[b] = best_i;
            if best_i != old {
                *energy = best_e;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Annealed upper bound with witness: seeded local search over map pairs
/// `(f, g)` with Metropolis schedule `T_k = T0 * 0.95^k`, best-so-far over
/// all restarts and iterations (so the bound is non-increasing in both).
pub fn gh_upper(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> (f64, Correspondence) {
    let (nx, ny) = (x.len(), y.len());
    let (mut best_f, mut best_g) = greedy_maps(x, y);
    let mut best = anneal_energy(x, y, &best_f, &best_g);

    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(
            seed.wrapping_add((restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );
        let (mut f, mut g) = if restart == 0 {
            (best_f.clone(), best_g.clone())
        } else {
            (
                (0..nx).map(|_| rng.gen_range(0..ny)).collect(),
                (0..ny).map(|_| rng.gen_range(0..nx)).collect(),
            )
        };
        let (mut energy, mut hot_a, mut hot_b) = anneal_energy_arg(x, y, &f, &g);
        let mut local_f = f.clone();
        let mut local_g = g.clone();
        let mut local_e = energy;
        let t0 = 0.5 * energy.max(1e-12);
        for k in 0..iters {
            let temp = t0 * 0.95f64.powi(k as i32);
            let kind = rng.gen_range(0..4u32);
            let undo: (usize, usize, Option<(usize, usize)>, bool);
            match kind {
                0 => {
                    let i = rng.gen_range(0..nx);
                    let a = rng.gen_range(0..ny);
                    undo = (i, f[i], None, true);
                    f[i] = a;
                }
                1 => {
                    let i = rng.gen_range(0..nx);
                    let j = rng.gen_range(0..nx);
                    undo = (i, f[i], Some((j, f[j])), true);
                    f.swap(i, j);
                }
                2 => {
                    let a = rng.gen_range(0..ny);
                    let i = rng.gen_range(0..nx);
                    undo = (a, g[a], None, false);
                    g[a] = i;
                }
                _ => {
                    // Min-conflict: reassign a coordinate of the pair that
                    // realizes the current maximum distortion.
                    let row = if rng.gen::<bool>() { hot_a } else { hot_b };
                    if row < nx {
                        let a = rng.gen_range(0..ny);
                        undo = (row, f[row], None, true);
                        f[row] = a;
                    } else {
                        let a = row - nx;
                        let i = rng.gen_range(0..nx);
                        undo = (a, g[a], None, false);
                        g[a] = i;
                    }
                }
            }
            let (proposed, pa, pb) = anneal_energy_arg(x, y, &f, &g);
            let accept = proposed <= energy
                || rng.gen::<f64>() < ((energy - proposed) / temp.max(1e-300)).exp();
            if accept {
                energy = proposed;
                hot_a = pa;
                hot_b = pb;
                if energy < local_e {
                    local_e = energy;
                    local_f = f.clone();
                    local_g = g.clone();
                }
            } else {
                let (p, old, second, on_f) = undo;
                if on_f {
                    f[p] = old;
                    if let Some((j, oldj)) = second {
                        f[j] = oldj;
                    }
                } else {
                    g[p] = old;
                }
            }
        }
        let sweeps = if nx + ny <= 24 { 60 } else { 4 };
        polish(x, y, &mut local_f, &mut local_g, &mut local_e, sweeps);
        if local_e < best {
            best = local_e;
            best_f = local_f;
            best_g = local_g;
        }
    }
    (0.5 * best, Correspondence::from_maps(&best_f, &best_g))
}

/// Lower and upper bound in one report.
pub fn gh_bounds(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> GhBounds {
    let lower = gh_lower(x, y);
    let (upper, witness) = gh_upper(x, y, restarts, iters, seed);
    GhBounds { lower, upper, witness }
}

/// Upper bound from the identity correspondence between two spaces sampled
/// on the same index set (aligned clouds): half the sup difference of the
/// distance matrices.  Far cheaper than annealing and exact whenever the
/// aligned map is optimal.
pub fn aligned_upper(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "aligned bound needs equal sizes, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let mut m = 0.0f64;
    for i in 0..x.len() {
        for j in 0..i {
            m = m.max((x.d(i, j) - y.d(i, j)).abs());
        }
    }
    Ok(0.5 * m)
}

/// Farthest-point subsample of at most `m` points: returns the chosen
/// indices and the covering radius of the net (additive error budget for
/// comparisons through the net).
pub fn fps_net(space: &FiniteMetricSpace, m: usize) -> (Vec<usize>, f64) {
    let n = space.len();
    if m == 0 || n == 0 {
        return (Vec::new(), f64::INFINITY);
    }
    // Start from the point of largest eccentricity (smallest index on ties).
    let mut start = 0;
    let mut ecc_best = -1.0;
    for i in 0..n {
        let e = (0..n).map(|j| space.d(i, j)).fold(0.0, f64::max);
        if e > ecc_best {
            ecc_best = e;
            start = i;
        }
    }
    let mut net = vec![start];
    let mut near: Vec<f64> = (0..n).map(|j| space.d(start, j)).collect();
    while net.len() < m.min(n) {
        let (mut arg, mut far) = (0usize, -1.0);
        for j in 0..n {
            if near[j] > far {
                far = near[j];
                arg = j;
            }
        }
        if far <= 0.0 {
            break;
        }
        net.push(arg);
        for j in 0..n {
            near[j] = near[j].min(space.d(arg, j));
        }
    }
    let radius = near.iter().cloned().fold(0.0, f64::max);
    (net, radius)
}

/// Deterministic half-disc skeleton `(t, rho)` with `rho >= 0` and
/// `t^2 + rho^2 <= 1`: a Fibonacci spiral folded onto the upper half-disc.
pub fn half_disc_skeleton(m: usize) -> Vec<(f64, f64)> {
    let golden = 0.5 * (5.0f64.sqrt() - 1.0);
    (0..m)
        .map(|i| {
            let rad = (((i as f64) + 0.5) / m as f64).sqrt();
            let phi = std::f64::consts::PI * (((i as f64) * golden) % 1.0);
            (rad * phi.cos(), rad * phi.sin())
        })
        .collect()
}

/// Samples the unit ball of `R x C(fiber)` over a finite fiber space: the
/// skeleton supplies `(t, rho)` positions, fiber indices cycle through the
/// fiber points, and distances combine the exact cone law of cosines (angle
/// clamped at pi) with the line factor in quadrature.
pub fn cone_ball(
    fiber: &FiniteMetricSpace,
    skeleton: &[(f64, f64)],
) -> Result<FiniteMetricSpace> {
    if fiber.is_empty() || skeleton.is_empty() {
        return Err(Error::InvalidInput("cone over an empty fiber or skeleton".into()));
    }
    let nf = fiber.len();
    let n = skeleton.len();
    let mut clamped = 0usize;
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        let (ti, ri) = skeleton[i];
        for j in 0..i {
            let (tj, rj) = skeleton[j];
            let mut ang = fiber.d(i % nf, j % nf);
            if ang > std::f64::consts::PI {
                ang = std::f64::consts::PI;
                clamped += 1;
            }
            let cone2 = ri * ri + rj * rj - 2.0 * ri * rj * ang.cos();
            let dist = ((ti - tj).powi(2) + cone2.max(0.0)).sqrt();
            d[i * n + j] = dist;
            d[j * n + i] = dist;
        }
    }
    let mut prov = format!("cone over {} ({} fiber points)", fiber.provenance, nf);
    if clamped > 0 {
        prov.push_str(&format!("; {clamped} angles clamped at pi"));
    }
    FiniteMetricSpace::from_matrix(n, d, &prov)
}
