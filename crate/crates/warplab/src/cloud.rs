//! Point clouds sampled from a warped metric: cell-stratified in the
//! half-plane with counts proportional to Riemannian volume, Haar-uniform on
//! the fiber, and caller-supplied anchor points included verbatim.
//!
//! Volume-proportional counts are what make ball-volume ratios measurable by
//! point counting, so the sampler allocates a deterministic quota to each
//! grid cell by largest-remainder apportionment of the cell masses and then
//! rejection-samples inside the cell against a local density envelope.

use crate::metric::WarpedMetric;
use crate::quat::Quat;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rectangle in the half-plane chart.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    /// Radial extent `(lo, hi)`, `0 < lo < hi`.
    pub r: (f64, f64),
    /// Angular extent `(lo, hi)` inside `[0, pi]`.
    pub s: (f64, f64),
}

impl Region {
    /// Validated rectangle.
    pub fn new(r: (f64, f64), s: (f64, f64)) -> Result<Region> {
        let pi = std::f64::consts::PI;
        if !(r.0 > 0.0 && r.0 < r.1 && s.0 >= 0.0 && s.0 < s.1 && s.1 <= pi) {
            return Err(Error::InvalidInput(format!(
                "empty or invalid sampling region r = {r:?}, s = {s:?}"
            )));
        }
        Ok(Region { r, s })
    }

    /// Whether `(r, s)` lies in the closed rectangle.
    pub fn contains(&self, r: f64, s: f64) -> bool {
        r >= self.r.0 && r <= self.r.1 && s >= self.s.0 && s <= self.s.1
    }
}

/// One sampled point.  Points on the singular rays (`s` at `0` or `pi`)
/// carry no fiber coordinate: the fiber there has collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    /// Cone radius.
    pub r: f64,
    /// Suspension angle.
    pub s: f64,
    /// Fiber position, absent on the singular rays.
    pub xi: Option<Quat>,
}

impl CloudPoint {
    /// Interior point with an explicit fiber position.
    pub fn interior(r: f64, s: f64, xi: Quat) -> CloudPoint {
        CloudPoint { r, s, xi: Some(xi) }
    }

    /// Singular-ray point (`s` should be `0` or `pi`).
    pub fn pole(r: f64, s: f64) -> CloudPoint {
        CloudPoint { r, s, xi: None }
    }
}

/// A deterministic sample of a warped metric.
#[derive(Debug, Clone)]
pub struct SampleCloud {
    /// Anchors first, then stratified samples.
    pub points: Vec<CloudPoint>,
    /// How many leading points are caller anchors.
    pub n_anchors: usize,
    /// Seed the stratified tail was drawn from.
    pub seed: u64,
    /// Half-plane rectangle the tail was drawn in.
    pub region: Region,
}

/// Riemannian volume density `sqrt(det g)` of the warp at `(r, s)`, and `0`
/// outside the metric's domain (the singular rays).
fn density(w: &WarpedMetric, r: f64, s: f64) -> f64 {
    match w.frame_metric(r, s) {
        Ok(fm) => (fm[1] * fm[2] * fm[3] * fm[4]).sqrt(),
        Err(_) => 0.0,
    }
}

/// Draws `n` points of `w` in `region`: the `anchors` verbatim (they count
/// toward `n`), then `n - anchors.len()` volume-distributed samples.
pub fn sample_cloud(
    w: &WarpedMetric,
    region: Region,
    n: usize,
    seed: u64,
    anchors: &[CloudPoint],
) -> Result<SampleCloud> {
    if n < anchors.len() || n == 0 {
        return Err(Error::InvalidInput(format!(
            "cloud size {n} cannot hold {} anchors",
            anchors.len()
        )));
    }
    let mut points: Vec<CloudPoint> = anchors.to_vec();
    let rest = n - anchors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if rest > 0 {
        // Lattice of densities: cell (i, j) spans lattice nodes
        // (2i..2i+2) x (2j..2j+2), so corners, edge midpoints and the
        // center are all probed.
        let g = (((rest as f64) / 4.0).sqrt().ceil() as usize).clamp(1, 64);
        let m = 2 * g + 1;
        let (rlo, rhi) = region.r;
        let (slo, shi) = region.s;
        let node = |i: usize, j: usize| -> (f64, f64) {
            (
                rlo + (rhi - rlo) * i as f64 / (m - 1) as f64,
                slo + (shi - slo) * j as f64 / (m - 1) as f64,
            )
        };
        let mut lattice = vec![0.0f64; m * m];
        for i in 0..m {
            for j in 0..m {
                let (r, s) = node(i, j);
                lattice[i * m + j] = density(w, r, s);
            }
        }
        let mut mass = vec![0.0f64; g * g];
        let mut envelope = vec![0.0f64; g * g];
        for ci in 0..g {
            for cj in 0..g {
                let (mut sum, mut max) = (0.0, 0.0f64);
                for di in 0..3 {
                    for dj in 0..3 {
                        let v = lattice[(2 * ci + di) * m + 2 * cj + dj];
                        sum += v;
                        max = max.max(v);
                    }
                }
                mass[ci * g + cj] = sum;
                envelope[ci * g + cj] = 1.5 * max;
            }
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput(
                "sampling region carries no volume".into(),
            ));
        }

        // Largest-remainder apportionment of the remaining points.
        let mut quota: Vec<usize> = Vec::with_capacity(g * g);
        let mut rema: Vec<(f64, usize)> = Vec::with_capacity(g * g);
        let mut assigned = 0usize;
        for (c, &mc) in mass.iter().enumerate() {
            let ideal = rest as f64 * mc / total;
            let base = ideal.floor() as usize;
            quota.push(base);
            assigned += base;
            rema.push((ideal - base as f64, c));
        }
        rema.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, c) in rema.iter().take(rest - assigned) {
            quota[c] += 1;
        }

        for ci in 0..g {
            for cj in 0..g {
                let c = ci * g + cj;
                let env = envelope[c];
                let (r0, s0) = node(2 * ci, 2 * cj);
                let (r1, s1) = node(2 * ci + 2, 2 * cj + 2);
                for _ in 0..quota[c] {
                    let mut accepted = false;
                    for _ in 0..100_000 {
                        let r = r0 + (r1 - r0) * rng.gen::<f64>();
                        let s = s0 + (s1 - s0) * rng.gen::<f64>();
                        if rng.gen::<f64>() * env <= density(w, r, s) {
                            points.push(CloudPoint::interior(r, s, Quat::haar(&mut rng)));
                            accepted = true;
                            break;
                        }
                    }
                    if !accepted {
                        return Err(Error::SolverFailed(format!(
                            "rejection sampling starved in cell ({ci}, {cj})"
                        )));
                    }
                }
            }
        }
    }

    Ok(SampleCloud { points, n_anchors: anchors.len(), seed, region })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::build_flat;

    #[test]
    fn same_seed_reproduces_the_cloud() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.2, 2.9)).unwrap();
        let a = sample_cloud(&w, region, 300, 7, &[]).unwrap();
        let b = sample_cloud(&w, region, 300, 7, &[]).unwrap();
        assert_eq!(a.points, b.points);
        let c = sample_cloud(&w, region, 300, 8, &[]).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn single_anchor_cloud_is_the_anchor() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.2, 2.9)).unwrap();
        let anchor = CloudPoint::pole(1.0, 0.0);
        let cloud = sample_cloud(&w, region, 1, 3, &[anchor]).unwrap();
        assert_eq!(cloud.points.len(), 1);
        assert_eq!(cloud.points[0], anchor);
        assert!(cloud.points[0].xi.is_none());
    }

    #[test]
    fn samples_respect_the_region() {
        let w = build_flat();
        let region = Region::new((0.8, 1.2), (0.6, 1.1)).unwrap();
        let cloud = sample_cloud(&w, region, 500, 5, &[]).unwrap();
        for p in &cloud.points {
            assert!(region.contains(p.r, p.s), "({}, {}) escaped", p.r, p.s);
            assert!(p.xi.is_some());
            let q = p.xi.unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_track_volume_on_the_flat_cone() {
        // Flat-cone density is r^4 sin^3 s; integrating over s leaves the
        // radial mass r^4, so the expected fraction with r < 1 over
        // [0.5, 1.5] is (1 - 0.5^5) / (1.5^5 - 0.5^5).
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.0, std::f64::consts::PI)).unwrap();
        let n = 4000;
        let cloud = sample_cloud(&w, region, n, 11, &[]).unwrap();
        let inner = cloud.points.iter().filter(|p| p.r < 1.0).count();
        let want = (1.0 - 0.5f64.powi(5)) / (1.5f64.powi(5) - 0.5f64.powi(5));
        let got = inner as f64 / n as f64;
        assert!(
            (got - want).abs() < 0.02,
            "volume fraction {got:.4} vs {want:.4}"
        );
    }

    #[test]
    fn degenerate_regions_are_rejected() {
        assert!(Region::new((1.0, 0.9), (0.2, 2.9)).is_err());
        assert!(Region::new((0.0, 1.0), (0.2, 2.9)).is_err());
        assert!(Region::new((0.5, 1.5), (2.9, 0.2)).is_err());
        assert!(Region::new((0.5, 1.5), (0.2, 4.0)).is_err());
    }

    #[test]
    fn oversubscribed_anchor_list_errors() {
        let w = build_flat();
        let region = Region::new((0.5, 1.5), (0.2, 2.9)).unwrap();
        let anchors = [CloudPoint::pole(1.0, 0.0), CloudPoint::pole(1.1, 0.0)];
        assert!(sample_cloud(&w, region, 1, 3, &anchors).is_err());
    }
}
