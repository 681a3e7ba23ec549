//! Exact geodesics of the reduced two-dimensional metric `dr^2 + a(r)^2 ds^2`
//! on the half-plane `r > 0`, `s in [0, pi]`.
//!
//! The full cone metric dominates its `(r, s)` projection: dropping the fiber
//! velocity never lengthens a curve, and a curve at constant fiber position
//! has exactly the reduced length.  Hence distances between points with equal
//! fiber coordinate — and all distances from singular-ray points, which carry
//! no fiber coordinate at all — are computed exactly by this two-dimensional
//! solver.  That is what makes desk-scale excess experiments along the
//! singular ray possible at all: graph distances carry percent-level noise,
//! while the quantity under study decays like the square of the ball radius.
//!
//! Geodesics obey the Clairaut relation `a(r)^2 s' = nu` (unit speed), so `s`
//! is monotone along every geodesic and each geodesic either has monotone `r`
//! or descends to a single turning radius `r_t` with `a(r_t) = nu` and rises
//! again.  For a strictly increasing radial warp those two families exhaust
//! all geodesics; the solver scans both, brackets every parameter matching
//! the angular separation, and returns the shortest.  Quadratures use the
//! substitution `r = r_t + u^2`, which removes the inverse-square-root
//! turning singularity.

use crate::profiles::RadialProfile;
use crate::util::{GL8_NODES, GL8_WEIGHTS};
use crate::{Error, Result};

/// Distance in the flat half-plane sector (`a(r) = r`, `s in [0, pi]`): the
/// sector is a convex subset of the plane, so the distance is the chord.
pub fn flat_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let ds = (p.1 - q.1).abs();
    let c2 = p.0 * p.0 + q.0 * q.0 - 2.0 * p.0 * q.0 * ds.cos();
    c2.max(0.0).sqrt()
}

/// Which of the two Clairaut families a solved geodesic belongs to.
#[derive(Debug, Clone, Copy)]
enum Branch {
    /// `r` monotone between the endpoints; Clairaut constant `nu` with
    /// formal turning radius `rt = a^{-1}(nu)` below both endpoints.
    /// `nu = 0` is the radial segment.
    Monotone { nu: f64, rt: f64 },
    /// Descends to the turning radius `rt` (`a(rt) = nu`) and rises again.
    Turning { nu: f64, rt: f64 },
    /// Fallback bound through the bottom `r -> 0` (radial in, arc, radial
    /// out); the exact limit for conic warps at angular separation pi.
    Bottom,
}

/// A solved geodesic between two half-plane points.
#[derive(Debug, Clone, Copy)]
pub struct Geodesic2d {
    /// Start point `(r, s)`.
    pub p: (f64, f64),
    /// End point `(r, s)`.
    pub q: (f64, f64),
    /// Geodesic length.
    pub length: f64,
    branch: Branch,
}

/// The reduced half-plane metric `dr^2 + a(r)^2 ds^2` for a strictly
/// increasing radial warp `a`.
#[derive(Debug, Clone)]
pub struct HalfPlane {
    /// Radial warp profile.
    pub radial: RadialProfile,
}

const PANELS: usize = 14;

impl HalfPlane {
    /// Wraps a radial profile.  The solver requires `a` strictly increasing
    /// on the radii it visits; this is checked cheaply at solve time.
    pub fn new(radial: RadialProfile) -> HalfPlane {
        HalfPlane { radial }
    }

    fn a(&self, r: f64) -> f64 {
        self.radial.jet(r).v
    }

    /// Inverse warp: the radius where `a = v`, sought in `(0, hi]`.
    fn a_inv(&self, v: f64, hi: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let mut lo = hi;
        while self.a(lo) > v {
            lo *= 0.5;
            if lo < 1e-150 {
                return 0.0;
            }
        }
        crate::util::bisect(|r| self.a(r) - v, lo, hi, 1e-15 * (1.0 + hi))
    }

    /// Integrand factors `(a, 2u / sqrt(a^2 - nu^2))` at `r = rt + u^2` for
    /// Clairaut constant `nu = a(rt)`.  Near the turning point the
    /// difference `a - nu` cancels catastrophically, so it is replaced by
    /// its Taylor form from the warp jet at `rt`.
    fn clairaut_node(&self, j0: &crate::util::Jet2, nu: f64, rt: f64, u: f64) -> (f64, f64) {
        let a = self.a(rt + u * u);
        let c = if u * u < 1e-6 * (rt + 1.0) {
            // a - nu = (a'(rt) + a''(rt) u^2 / 2) u^2: the factor u cancels
            // exactly, leaving a finite value through the turning point.
            let slope = j0.d1 + 0.5 * j0.d2 * u * u;
            2.0 / (slope * (a + nu)).max(1e-300).sqrt()
        } else {
            let qq = ((a - nu).max(0.0) * (a + nu)).max(1e-300);
            2.0 * u / qq.sqrt()
        };
        (a, c)
    }

    /// Angular advance and length of the ascent from `r_from` to `r_to`
    /// (both `>= rt`) at Clairaut constant `nu = a(rt)`, via `r = rt + u^2`.
    fn leg(&self, nu: f64, rt: f64, r_from: f64, r_to: f64) -> (f64, f64) {
        let j0 = self.radial.jet(rt.max(1e-300));
        let (u0, u1) = ((r_from - rt).max(0.0).sqrt(), (r_to - rt).max(0.0).sqrt());
        let (mut ds, mut len) = (0.0, 0.0);
        let step = (u1 - u0) / PANELS as f64;
        for p in 0..PANELS {
            let mid = u0 + (p as f64 + 0.5) * step;
            for i in 0..8 {
                let u = mid + 0.5 * step * GL8_NODES[i];
                let w = 0.5 * step * GL8_WEIGHTS[i];
                let (a, c) = self.clairaut_node(&j0, nu, rt, u);
                ds += nu / a * c * w;
                len += a * c * w;
            }
        }
        (ds, len)
    }

    /// Angular advance and length of the whole geodesic of branch `b`
    /// between radii `r1` and `r2`.
    fn advance(&self, b: Branch, r1: f64, r2: f64) -> (f64, f64) {
        let (rlo, rhi) = (r1.min(r2), r1.max(r2));
        match b {
            Branch::Monotone { nu, rt } => {
                if nu == 0.0 {
                    (0.0, rhi - rlo)
                } else {
                    self.leg(nu, rt, rlo, rhi)
                }
            }
            Branch::Turning { nu, rt } => {
                let (dsa, la) = self.leg(nu, rt, rt, rlo);
                let (dsb, lb) = self.leg(nu, rt, rt, rhi);
                (dsa + dsb, la + lb)
            }
            Branch::Bottom => (f64::INFINITY, f64::INFINITY),
        }
    }

    /// Shortest path between half-plane points; `s` coordinates in `[0, pi]`
    /// (the boundary values are the singular rays).
    pub fn solve(&self, p: (f64, f64), q: (f64, f64)) -> Result<Geodesic2d> {
        let pi = std::f64::consts::PI;
        for &(r, s) in [&p, &q] {
            if !(r > 0.0 && (0.0..=pi).contains(&s)) {
                return Err(Error::InvalidInput(format!(
                    "half-plane point (r, s) = ({r}, {s}) outside r > 0, 0 <= s <= pi"
                )));
            }
        }
        let target = (p.1 - q.1).abs();
        let (rlo, rhi) = (p.0.min(q.0), p.0.max(q.0));
        if target < 1e-13 {
            return Ok(Geodesic2d {
                p,
                q,
                length: rhi - rlo,
                branch: Branch::Monotone { nu: 0.0, rt: 0.0 },
            });
        }
        // The families assume an increasing warp; spot-check the range.
        let floor = (rlo * 1e-3).max(1e-9);
        let mut prev_a = 0.0;
        for i in 0..=8 {
            let r = floor + (rhi - floor) * i as f64 / 8.0;
            let v = self.a(r);
            if v <= prev_a {
                return Err(Error::InvalidInput(format!(
                    "radial warp not increasing near r = {r}; the Clairaut solver needs a' > 0"
                )));
            }
            prev_a = v;
        }

        // Scan parameters in order of increasing angular advance: the
        // monotone family by nu (starting at the radial segment, advance 0),
        // then the turning family by rt descending from rlo toward 0.
        let vmax = self.a(rlo);
        let mut params: Vec<Branch> = Vec::new();
        for i in 0..=24 {
            let x = (0.5 * pi * i as f64 / 24.0).sin();
            let nu = vmax * if i == 24 { 1.0 - 1e-12 } else { x };
            params.push(Branch::Monotone { nu, rt: self.a_inv(nu, rlo) });
        }
        let mut g = 1.0;
        while g > 1e-7 {
            g *= if g > 0.05 { 0.92 } else { 0.55 };
            let rt = rlo * g;
            params.push(Branch::Turning { nu: self.a(rt), rt });
        }

        let mut best: Option<(f64, Branch)> = None;
        let mut record = |len: f64, b: Branch| {
            if best.map_or(true, |(l, _)| len < l) {
                best = Some((len, b));
            }
        };

        // Bisection on the family parameter between two scan entries whose
        // angular advances straddle the target.  Family junctions (monotone
        // at nu -> a(rlo) versus turning at rt -> rlo) describe the same
        // limiting geodesic, so a mixed bracket is refined from the turning
        // side.
        let refine = |ba0: Branch, fa0: f64, bb0: Branch| -> Branch {
            let (mut ba, mut fa, mut bb) = (ba0, fa0, bb0);
            for _ in 0..56 {
                let mid = match (ba, bb) {
                    (Branch::Monotone { nu: n1, .. }, Branch::Monotone { nu: n2, .. }) => {
                        let nu = 0.5 * (n1 + n2);
                        Branch::Monotone { nu, rt: self.a_inv(nu, rlo) }
                    }
                    (Branch::Turning { rt: t1, .. }, Branch::Turning { rt: t2, .. }) => {
                        let rt = 0.5 * (t1 + t2);
                        Branch::Turning { nu: self.a(rt), rt }
                    }
                    (Branch::Monotone { .. }, Branch::Turning { rt, .. })
                    | (Branch::Turning { rt, .. }, Branch::Monotone { .. }) => {
                        let mid_rt = 0.5 * (rlo + rt);
                        Branch::Turning { nu: self.a(mid_rt), rt: mid_rt }
                    }
                    _ => unreachable!("bisection only runs over family branches"),
                };
                let fm = self.advance(mid, p.0, q.0).0 - target;
                if fm.abs() < 1e-14 {
                    return mid;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    ba = mid;
                    fa = fm;
                } else {
                    bb = mid;
                }
            }
            ba
        };

        let mut prev: Option<(Branch, f64)> = None;
        for b in params {
            let f = self.advance(b, p.0, q.0).0 - target;
            if f.abs() < 1e-12 {
                record(self.advance(b, p.0, q.0).1, b);
            } else if let Some((pb, pf)) = prev {
                if (pf > 0.0) != (f > 0.0) {
                    let root = refine(pb, pf, b);
                    record(self.advance(root, p.0, q.0).1, root);
                }
            }
            prev = Some((b, f));
        }

        // Through-bottom fallback: always a valid upper bound, and the only
        // candidate when the scan finds no interior geodesic.
        let bottom = p.0 + q.0 + self.a(1e-12_f64.min(0.5 * rlo)) * target;
        let (length, branch) = match best {
            Some((len, b)) if len <= bottom + 1e-12 => (len, b),
            _ => (bottom, Branch::Bottom),
        };
        Ok(Geodesic2d { p, q, length, branch })
    }

    /// Geodesic distance between two half-plane points.
    pub fn distance(&self, p: (f64, f64), q: (f64, f64)) -> Result<f64> {
        Ok(self.solve(p, q)?.length)
    }

    /// `n + 1` samples `(tau, r, s)` along the geodesic from `p` to `q`,
    /// uniform in arclength `tau in [0, length]`.
    pub fn geodesic(&self, p: (f64, f64), q: (f64, f64), n: usize) -> Result<Vec<(f64, f64, f64)>> {
        let sol = self.solve(p, q)?;
        let sgn = (q.1 - p.1).signum();

        // Segment list (d_tau, d_s, r_lo, r_hi) of one ascending leg, walked
        // by trapezoid accumulation in the regularized variable u.
        let fine = 800usize;
        let leg_segments = |nu: f64, rt: f64, r_from: f64, r_to: f64| -> Vec<(f64, f64, f64, f64)> {
            let j0 = self.radial.jet(rt.max(1e-300));
            let (u0, u1) = ((r_from - rt).max(0.0).sqrt(), (r_to - rt).max(0.0).sqrt());
            let integ = |u: f64| -> (f64, f64) {
                let (a, c) = self.clairaut_node(&j0, nu, rt, u);
                (nu / a * c, a * c)
            };
            let mut segs = Vec::with_capacity(fine);
            let mut fu = integ(u0);
            let mut r_prev = rt + u0 * u0;
            for i in 1..=fine {
                let u = u0 + (u1 - u0) * i as f64 / fine as f64;
                let fv = integ(u);
                let du = (u1 - u0) / fine as f64;
                let r = rt + u * u;
                segs.push((0.5 * (fu.1 + fv.1) * du, 0.5 * (fu.0 + fv.0) * du, r_prev, r));
                fu = fv;
                r_prev = r;
            }
            segs
        };

        let mut pts: Vec<(f64, f64, f64)> = vec![(0.0, p.0, p.1)];
        let extend = |pts: &mut Vec<(f64, f64, f64)>, segs: &[(f64, f64, f64, f64)], descending: bool| {
            if descending {
                // Same geometry traversed from the high end: reversed
                // segment order, each ending at its own low radius.
                for &(dtau, dsm, r_lo, _) in segs.iter().rev() {
                    let (t, _, s) = *pts.last().unwrap();
                    pts.push((t + dtau, r_lo, s + sgn * dsm));
                }
            } else {
                for &(dtau, dsm, _, r_hi) in segs {
                    let (t, _, s) = *pts.last().unwrap();
                    pts.push((t + dtau, r_hi, s + sgn * dsm));
                }
            }
        };

        match sol.branch {
            Branch::Monotone { nu, rt } => {
                if nu == 0.0 {
                    pts.push((sol.length, q.0, q.1));
                } else if p.0 <= q.0 {
                    extend(&mut pts, &leg_segments(nu, rt, p.0, q.0), false);
                } else {
                    extend(&mut pts, &leg_segments(nu, rt, q.0, p.0), true);
                }
            }
            Branch::Turning { nu, rt } => {
                extend(&mut pts, &leg_segments(nu, rt, rt, p.0), true);
                extend(&mut pts, &leg_segments(nu, rt, rt, q.0), false);
            }
            Branch::Bottom => {
                return Err(Error::SolverFailed(format!(
                    "no interior geodesic between {p:?} and {q:?}; path passes the cone bottom"
                )));
            }
        }
        // Snap the accumulated endpoint onto q (trapezoid drift ~ 1e-7).
        let tail = pts.len() - 1;
        pts[tail].1 = q.0;
        pts[tail].2 = q.1;

        // Resample at uniform arclength.
        let total = pts[tail].0;
        let mut out = Vec::with_capacity(n + 1);
        let mut j = 0;
        for i in 0..=n {
            let t = total * i as f64 / n as f64;
            while j + 1 < pts.len() && pts[j + 1].0 < t {
                j += 1;
            }
            let (t0, r0, s0) = pts[j];
            let (t1, r1, s1) = pts[(j + 1).min(tail)];
            let w = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
            out.push((t, r0 + w * (r1 - r0), s0 + w * (s1 - s0)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PI: f64 = std::f64::consts::PI;

    fn flat() -> HalfPlane {
        HalfPlane::new(RadialProfile::Cone { slope: 1.0 })
    }

    #[test]
    fn flat_solver_matches_planar_chord() {
        let hp = flat();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let p = (0.2 + 1.6 * rng.gen::<f64>(), PI * rng.gen::<f64>());
            let q = (0.2 + 1.6 * rng.gen::<f64>(), PI * rng.gen::<f64>());
            let want = flat_distance(p, q);
            let got = hp.distance(p, q).unwrap();
            assert!((got - want).abs() < 1e-7 * (1.0 + want), "{p:?} {q:?}: {got} vs {want}");
            let sym = hp.distance(q, p).unwrap();
            assert!((got - sym).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_pole_distances_match_chord() {
        let hp = flat();
        for (rp, x) in [(0.7, (1.1, 0.4)), (1.3, (0.5, 2.8)), (1.0, (1.0, PI))] {
            let want = flat_distance((rp, 0.0), x);
            let got = hp.distance((rp, 0.0), x).unwrap();
            // Separation pi is the grazing limit of the turning family;
            // quadrature there is good to ~1e-6 only.
            assert!((got - want).abs() < 2e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn radial_segments_are_exact() {
        let hp = flat();
        assert!((hp.distance((0.3, 1.0), (1.2, 1.0)).unwrap() - 0.9).abs() < 1e-15);
        let a = HalfPlane::new(RadialProfile::Cone { slope: 0.5 });
        assert!((a.distance((2.0, 0.0), (0.5, 0.0)).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn narrow_cone_compresses_angles() {
        // Slope 1/2 cone developed onto the plane: angles scale by the
        // slope, so the same angular separation costs less length.
        let hp = HalfPlane::new(RadialProfile::Cone { slope: 0.5 });
        let p = (1.0, 0.2);
        let q = (1.0, 2.8);
        let d = hp.distance(p, q).unwrap();
        let want = 2.0f64.sqrt() * (1.0 - (0.5 * 2.6f64).cos()).sqrt();
        assert!((d - want).abs() < 1e-7, "{d} vs {want}");
        assert!(d < flat_distance(p, q));
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let hp = HalfPlane::new(RadialProfile::Cone { slope: 0.8 });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let mut pt = || (0.3 + rng.gen::<f64>(), PI * rng.gen::<f64>());
            let (x, y, z) = (pt(), pt(), pt());
            let (dxy, dyz, dxz) = (
                hp.distance(x, y).unwrap(),
                hp.distance(y, z).unwrap(),
                hp.distance(x, z).unwrap(),
            );
            assert!(dxz <= dxy + dyz + 1e-9);
            assert!(dxz >= (x.0 - z.0).abs() - 1e-9, "projection lower bound");
        }
    }

    #[test]
    fn geodesic_samples_interpolate_the_chord() {
        let hp = flat();
        for (p, q) in [((1.0, 0.3), (1.4, 1.9)), ((1.5, 2.0), (0.9, 0.4)), ((1.0, 0.1), (1.0, 2.4))] {
            let path = hp.geodesic(p, q, 32).unwrap();
            assert_eq!(path.len(), 33);
            assert!((path[0].1 - p.0).abs() < 1e-12 && (path[0].2 - p.1).abs() < 1e-12);
            assert!((path[32].1 - q.0).abs() < 1e-9 && (path[32].2 - q.1).abs() < 1e-9);
            let total = hp.distance(p, q).unwrap();
            for (i, &(tau, r, s)) in path.iter().enumerate() {
                // Every sample lies on the geodesic: distances to the two
                // ends add up to the total, and match the arclength tag.
                let dp = flat_distance(p, (r, s));
                let dq = flat_distance((r, s), q);
                assert!((dp + dq - total).abs() < 3e-5, "sample {i} off the chord: {}", dp + dq - total);
                assert!((dp - tau).abs() < 3e-5, "arclength drift at {i}: {dp} vs {tau}");
            }
        }
    }

    #[test]
    fn decreasing_warp_is_rejected() {
        let hp = HalfPlane::new(RadialProfile::Cusp(crate::profiles::CuspProfile::build(
            0.2, 1e-3,
        )));
        assert!(hp.distance((1.2, 0.1), (1.4, 0.5)).is_err());
    }
}
