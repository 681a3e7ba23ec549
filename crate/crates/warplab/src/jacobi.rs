//! Jacobi-field ratios and Hessian integrals along half-plane geodesics.
//!
//! A fixed-fiber curve in the warped cone is a geodesic exactly when its
//! `(r, s)` trace is a geodesic of the reduced half-plane metric, so every
//! path produced by [`crate::halfplane::HalfPlane::geodesic`] lifts to a
//! geodesic of the five-dimensional space.  Along such a lift the fiber
//! frame fields stay parallel after normalization, which reduces the Jacobi
//! equation in each fiber direction to the scalar ODE
//!
//! ```text
//!     j'' + K(tau) j = 0,      K = -f'' / f,
//! ```
//!
//! where `f(tau)` is the closed-form norm of the corresponding Killing
//! field (`a b e^{m_j}` for the fiber directions, `a` for the angular
//! direction along radial geodesics).  The coefficient `K = -f''/f` is
//! assembled from the metric jets by the chain rule, with velocities read
//! off the sampled path by finite differences and accelerations supplied by
//! the geodesic equation; second differences of the resampled polyline
//! itself are avoided because the resampling kinks do not vanish under
//! refinement.  The Killing norms double as independent oracles for the
//! integration through the Wronskian identity.

use crate::halfplane::flat_distance;
use crate::metric::WarpedMetric;
use crate::{Error, Result};

/// Normal direction carried along a geodesic by a Jacobi field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobiDirection {
    /// The suspension direction `d_s / a`; parallel only along radial
    /// (constant-`s`) geodesics, which is enforced.
    Angular,
    /// One of the three fiber frame directions `V_j / |V_j|`.
    Fiber(usize),
}

/// Jacobi integration along a geodesic window.
#[derive(Debug, Clone)]
pub struct JacobiReport {
    /// Arclength parameters of the retained window samples.
    pub taus: Vec<f64>,
    /// Integrated Jacobi norm `j(tau)` with `j = 0`, `j' = 1` at the start
    /// of the path.
    pub j: Vec<f64>,
    /// Closed-form Killing-field norm at the same samples (the second,
    /// independent solution of the same ODE).
    pub killing: Vec<f64>,
    /// Largest sampled `|K|` along the path.
    pub max_abs_k: f64,
    /// Largest deviation `|j(t) s / (j(s) t) - 1|` from the cone law over
    /// window pairs `s < t` (parameters normalized by path length).
    pub max_cone_gap: f64,
    /// Fitted envelope constant: max over window pairs of
    /// `|j(t) s / (j(s) t) - 1| sqrt(delta) / sqrt(t - s)`.
    pub envelope_c: f64,
    /// Largest relative gap between `j` and the Wronskian-identity
    /// representation `f (alpha + W0 \int f^{-2})` anchored at the first
    /// window sample, an independent check of the integration against the
    /// closed-form norm.
    pub wronskian_gap: f64,
}

/// Closed-form norm of the direction's Killing field together with its
/// first and second chart partials, from the warp jets.
fn norm_jets(
    w: &WarpedMetric,
    dir: JacobiDirection,
    r: f64,
    s: f64,
) -> Result<(f64, [f64; 2], [f64; 3])> {
    let jets = w.warp_jets(r, s)?;
    let (a, ap, app) = (jets.a.v, jets.a.d1, jets.a.d2);
    match dir {
        JacobiDirection::Angular => Ok((a, [ap, 0.0], [app, 0.0, 0.0])),
        JacobiDirection::Fiber(j) if j < 3 => {
            let (b, bp, bpp) = (jets.b.v, jets.b.d1, jets.b.d2);
            let (m, mr, ms) = (jets.m.m[j], jets.m.mr[j], jets.m.ms[j]);
            let (mrr, mss, mrs) = (jets.m.mrr[j], jets.m.mss[j], jets.m.mrs[j]);
            let e = m.exp();
            let v = a * b * e;
            let vr = (ap + a * mr) * b * e;
            let vs = a * (bp + b * ms) * e;
            let vrr = (app + 2.0 * ap * mr + a * mrr + a * mr * mr) * b * e;
            let vss = a * (bpp + 2.0 * bp * ms + b * mss + b * ms * ms) * e;
            let vrs = e * (a * b * mrs + (ap + a * mr) * (bp + b * ms));
            Ok((v, [vr, vs], [vrr, vrs, vss]))
        }
        JacobiDirection::Fiber(j) => {
            Err(Error::InvalidInput(format!("fiber direction index {j} out of range 0..3")))
        }
    }
}

/// Integrates the Jacobi field vanishing at the start of `path` in the
/// direction `dir`, and reports its ratios against the cone law over the
/// arclength window `[delta, 1 - delta]` (fractions of path length).
///
/// `path` must be uniform-arclength samples `(tau, r, s)` as produced by
/// [`crate::halfplane::HalfPlane::geodesic`]; at least 33 samples are
/// required for the curvature stencil.  The angular direction demands a
/// radial path.  A conjugate point inside the window (the integrated field
/// returning to zero) is reported as a solver failure.
pub fn jacobi_ratio(
    w: &WarpedMetric,
    path: &[(f64, f64, f64)],
    dir: JacobiDirection,
    delta: f64,
) -> Result<JacobiReport> {
    if path.len() < 33 {
        return Err(Error::InvalidInput(format!(
            "need at least 33 geodesic samples, got {}",
            path.len()
        )));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("window fraction delta = {delta} outside (0, 0.5)")));
    }
    let n = path.len() - 1;
    let total = path[n].0 - path[0].0;
    if !(total > 0.0) {
        return Err(Error::InvalidInput("geodesic path has zero length".into()));
    }
    let h = total / n as f64;
    for (i, win) in path.windows(2).enumerate() {
        let dt = win[1].0 - win[0].0;
        if (dt - h).abs() > 1e-6 * h {
            return Err(Error::InvalidInput(format!(
                "path samples not uniform in arclength near index {i}"
            )));
        }
    }
    if dir == JacobiDirection::Angular {
        let s0 = path[0].2;
        if path.iter().any(|&(_, _, s)| (s - s0).abs() > 1e-9 * (1.0 + s0.abs())) {
            return Err(Error::InvalidInput(
                "angular Jacobi direction requires a radial (constant-s) path".into(),
            ));
        }
    }

    // Closed-form Killing norm, its chart partials, and the scalar
    // curvature coefficient K = -f''/f via the chain rule along the
    // unit-speed geodesic: velocities from path differences (projected back
    // to unit speed), accelerations from the geodesic equation of the
    // half-plane metric dr^2 + a^2 ds^2.
    let mut f = vec![0.0; n + 1];
    let mut fp = vec![0.0; n + 1];
    let mut k = vec![0.0; n + 1];
    for i in 0..=n {
        let (_, r, s) = path[i];
        let (v, grad, hess) = norm_jets(w, dir, r, s)?;
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!(
                "direction norm vanishes at sample {i}; path touches a singular ray"
            )));
        }
        let (j0, j1) = (i.saturating_sub(1), (i + 1).min(n));
        let span = path[j1].0 - path[j0].0;
        let mut rd = (path[j1].1 - path[j0].1) / span;
        let mut sd = (path[j1].2 - path[j0].2) / span;
        let jets = w.warp_jets(r, s)?;
        let (a, ap) = (jets.a.v, jets.a.d1);
        let speed = (rd * rd + a * a * sd * sd).sqrt();
        rd /= speed;
        sd /= speed;
        let rdd = a * ap * sd * sd;
        let sdd = -2.0 * ap / a * rd * sd;
        let fpp = hess[0] * rd * rd
            + 2.0 * hess[1] * rd * sd
            + hess[2] * sd * sd
            + grad[0] * rdd
            + grad[1] * sdd;
        f[i] = v;
        fp[i] = grad[0] * rd + grad[1] * sd;
        k[i] = -fpp / v;
    }
    let max_abs_k = k.iter().fold(0.0f64, |m, &v| m.max(v.abs()));

    // RK4 on j'' = -K j from (j, j') = (0, 1), K linear between samples.
    let k_at = |t: f64| -> f64 {
        let x = (t / h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let w1 = x - i as f64;
        k[i] * (1.0 - w1) + k[i + 1] * w1
    };
    let mut j = vec![0.0; n + 1];
    let mut jd = vec![0.0; n + 1];
    let mut jv = 0.0f64;
    let mut jp = 1.0f64;
    jd[0] = jp;
    for i in 0..n {
        let t = i as f64 * h;
        let acc = |t: f64, y: f64| -k_at(t) * y;
        let (k1y, k1p) = (jp, acc(t, jv));
        let (k2y, k2p) = (jp + 0.5 * h * k1p, acc(t + 0.5 * h, jv + 0.5 * h * k1y));
        let (k3y, k3p) = (jp + 0.5 * h * k2p, acc(t + 0.5 * h, jv + 0.5 * h * k2y));
        let (k4y, k4p) = (jp + h * k3p, acc(t + h, jv + h * k3y));
        jv += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        jp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        j[i + 1] = jv;
        jd[i + 1] = jp;
    }

    // Window extraction and the cone-law envelope.
    let lo = delta * total;
    let hi = (1.0 - delta) * total;
    let idx: Vec<usize> =
        (0..=n).filter(|&i| path[i].0 - path[0].0 >= lo && path[i].0 - path[0].0 <= hi).collect();
    if idx.len() < 2 {
        return Err(Error::InvalidInput("window [delta, 1-delta] holds fewer than 2 samples".into()));
    }
    if let Some(&i) = idx.iter().find(|&&i| !(j[i] > 0.0)) {
        return Err(Error::SolverFailed(format!(
            "Jacobi field vanishes inside the window at tau = {}; conjugate point",
            path[i].0 - path[0].0
        )));
    }
    let stride = idx.len().div_ceil(200).max(1);
    let kept: Vec<usize> = idx.iter().copied().step_by(stride).collect();
    let mut max_cone_gap = 0.0f64;
    let mut envelope_c = 0.0f64;
    for (ai, &ia) in kept.iter().enumerate() {
        let ts = (path[ia].0 - path[0].0) / total;
        for &ib in &kept[ai + 1..] {
            let tt = (path[ib].0 - path[0].0) / total;
            let gap = (j[ib] * ts / (j[ia] * tt) - 1.0).abs();
            max_cone_gap = max_cone_gap.max(gap);
            envelope_c = envelope_c.max(gap * delta.sqrt() / (tt - ts).sqrt());
        }
    }
    // Wronskian-identity oracle: any solution is f (alpha + W0 int f^{-2})
    // with constant Wronskian W0 = j' f - j f'; anchoring the quadrature at
    // the first window sample keeps it well conditioned even when the path
    // starts at the tip where f^{-2} blows up.
    let i0 = idx[0];
    let alpha = j[i0] / f[i0];
    let w0 = jd[i0] * f[i0] - j[i0] * fp[i0];
    let mut wronskian_gap = 0.0f64;
    let mut quad = 0.0;
    let mut prev = i0;
    // Trapezoid with the Euler-Maclaurin endpoint correction; the
    // correction uses the analytic f' and removes the h^2 error term.
    let gp = |i: usize| -2.0 * fp[i] / (f[i] * f[i] * f[i]);
    for &i in &idx[1..] {
        for step_i in prev..i {
            quad += 0.5 * h * (1.0 / (f[step_i] * f[step_i]) + 1.0 / (f[step_i + 1] * f[step_i + 1]));
        }
        prev = i;
        let corrected = quad + h * h / 12.0 * (gp(i0) - gp(i));
        let j_w = f[i] * (alpha + w0 * corrected);
        wronskian_gap = wronskian_gap.max((j[i] / j_w - 1.0).abs());
    }

    Ok(JacobiReport {
        taus: idx.iter().map(|&i| path[i].0 - path[0].0).collect(),
        j: idx.iter().map(|&i| j[i]).collect(),
        killing: idx.iter().map(|&i| f[i]).collect(),
        max_abs_k,
        max_cone_gap,
        envelope_c,
        wronskian_gap,
    })
}

/// One Hessian evaluation along a geodesic.
#[derive(Debug, Clone, Copy)]
pub struct HessianSample {
    /// Arclength parameter.
    pub tau: f64,
    /// Squared Frobenius norm of the Hessian in an orthonormal frame.
    pub frob_sq: f64,
    /// Trace of the Hessian (the Laplacian of `f`).
    pub trace: f64,
}

/// Hessian integral of a chart scalar along a geodesic window.
#[derive(Debug, Clone)]
pub struct HessianReport {
    /// Per-sample values inside the window.
    pub samples: Vec<HessianSample>,
    /// Trapezoid integral of the squared Frobenius norm over the window.
    pub integral: f64,
    /// Largest sampled squared Frobenius norm.
    pub max_frob_sq: f64,
}

/// Integrates `|Hess f|^2` along the arclength window `[delta, 1 - delta]`
/// of `path` (fractions of path length) for a fiber-independent chart
/// scalar `f(r, s)`.
///
/// Second partials of `f` come from central differences with step `step`;
/// the connection terms come from the exact warp jets.  In the orthonormal
/// frame `(d_r, d_s/a, V_j/|V_j|)` the nonzero entries are
///
/// ```text
///     H_rr = f_rr
///     H_rs = (f_rs - (a'/a) f_s) / a
///     H_ss = (f_ss + a a' f_r) / a^2
///     H_jj = (a'/a + m_j_r) f_r + (b'/b + m_j_s) f_s / a^2
/// ```
///
/// Samples whose difference stencil would leave the chart domain produce an
/// error.
pub fn hessian_along_geodesic(
    w: &WarpedMetric,
    path: &[(f64, f64, f64)],
    f: &dyn Fn(f64, f64) -> f64,
    delta: f64,
    step: f64,
) -> Result<HessianReport> {
    if path.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 geodesic samples".into()));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidInput(format!("window fraction delta = {delta} outside (0, 0.5)")));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("difference step {step} must be positive")));
    }
    let total = path[path.len() - 1].0 - path[0].0;
    let lo = delta * total;
    let hi = (1.0 - delta) * total;
    let pi = std::f64::consts::PI;

    let mut samples = Vec::new();
    for &(tau, r, s) in path {
        let t = tau - path[0].0;
        if t < lo || t > hi {
            continue;
        }
        if r - step <= 0.0 || s - step <= 0.0 || s + step >= pi {
            return Err(Error::InvalidInput(format!(
                "difference stencil at (r, s) = ({r}, {s}) with step {step} leaves the chart"
            )));
        }
        let jets = w.warp_jets(r, s)?;
        let (a, ap) = (jets.a.v, jets.a.d1);
        let (b, bs) = (jets.b.v, jets.b.d1);

        let fc = f(r, s);
        let f_r = (f(r + step, s) - f(r - step, s)) / (2.0 * step);
        let f_s = (f(r, s + step) - f(r, s - step)) / (2.0 * step);
        let f_rr = (f(r + step, s) - 2.0 * fc + f(r - step, s)) / (step * step);
        let f_ss = (f(r, s + step) - 2.0 * fc + f(r, s - step)) / (step * step);
        let f_rs = (f(r + step, s + step) - f(r + step, s - step) - f(r - step, s + step)
            + f(r - step, s - step))
            / (4.0 * step * step);

        let h_rr = f_rr;
        let h_rs = (f_rs - ap / a * f_s) / a;
        let h_ss = (f_ss + a * ap * f_r) / (a * a);
        let mut frob_sq = h_rr * h_rr + 2.0 * h_rs * h_rs + h_ss * h_ss;
        let mut trace = h_rr + h_ss;
        for jf in 0..3 {
            let h_jj = (ap / a + jets.m.mr[jf]) * f_r + (bs / b + jets.m.ms[jf]) * f_s / (a * a);
            frob_sq += h_jj * h_jj;
            trace += h_jj;
        }
        samples.push(HessianSample { tau: t, frob_sq, trace });
    }
    if samples.len() < 2 {
        return Err(Error::InvalidInput("window [delta, 1-delta] holds fewer than 2 samples".into()));
    }
    let mut integral = 0.0;
    let mut max_frob_sq = 0.0f64;
    for win in samples.windows(2) {
        integral += 0.5 * (win[1].tau - win[0].tau) * (win[0].frob_sq + win[1].frob_sq);
    }
    for s in &samples {
        max_frob_sq = max_frob_sq.max(s.frob_sq);
    }
    Ok(HessianReport { samples, integral, max_frob_sq })
}

/// Distance from the cone tip as a chart scalar.
pub fn tip_distance(r: f64, _s: f64) -> f64 {
    r
}

/// Flat-cone distance from a fixed half-plane point, as a chart scalar on
/// the fiber-aligned slice (the orbit distance of the warped product).
pub fn flat_point_distance(p: (f64, f64)) -> impl Fn(f64, f64) -> f64 {
    move |r, s| flat_distance(p, (r, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{build_example_a, build_flat, Constants};
    use crate::halfplane::HalfPlane;

    const PI: f64 = std::f64::consts::PI;

    fn radial_path(w: &WarpedMetric, s0: f64, r0: f64, r1: f64, n: usize) -> Vec<(f64, f64, f64)> {
        HalfPlane::new(w.radial.clone()).geodesic((r0, s0), (r1, s0), n).unwrap()
    }

    #[test]
    fn flat_radial_jacobi_follows_cone_law_exactly() {
        let w = build_flat();
        let path = radial_path(&w, 1.1, 1e-9, 1.0, 2000);
        for dir in
            [JacobiDirection::Angular, JacobiDirection::Fiber(0), JacobiDirection::Fiber(2)]
        {
            let rep = jacobi_ratio(&w, &path, dir, 0.1).unwrap();
            assert!(rep.max_abs_k < 1e-4, "flat curvature leak {}", rep.max_abs_k);
            assert!(rep.max_cone_gap < 1e-7, "cone law broken: {}", rep.max_cone_gap);
            assert!(rep.envelope_c < 1e-6, "flat envelope {}", rep.envelope_c);
            assert!(rep.wronskian_gap < 1e-7, "oracle gap {}", rep.wronskian_gap);
            // The Killing norm vanishing at the tip is the same solution up
            // to its slope at the start.
            let ratio = rep.killing[0] / rep.j[0];
            for (jv, kv) in rep.j.iter().zip(&rep.killing) {
                assert!((kv / jv - ratio).abs() < 1e-6 * ratio);
            }
        }
    }

    #[test]
    fn flat_skew_geodesic_has_zero_curvature_and_cone_law() {
        let w = build_flat();
        let hp = HalfPlane::new(w.radial.clone());
        let path = hp.geodesic((0.8, 0.9), (1.3, 2.1), 2000).unwrap();
        let rep = jacobi_ratio(&w, &path, JacobiDirection::Fiber(1), 0.05).unwrap();
        assert!(rep.max_abs_k < 1e-4, "flat curvature leak {}", rep.max_abs_k);
        assert!(rep.max_cone_gap < 1e-7);
        assert!(rep.envelope_c < 1e-6);
        assert!(rep.wronskian_gap < 1e-7);
        // t = s pairs are degenerate ratios equal to one by definition.
        let mid = rep.j.len() / 2;
        assert_eq!(rep.j[mid] / rep.j[mid], 1.0);
    }

    #[test]
    fn jacobi_input_validation() {
        let w = build_flat();
        let path = radial_path(&w, 1.0, 0.1, 1.0, 2000);
        assert!(jacobi_ratio(&w, &path[..20], JacobiDirection::Fiber(0), 0.1).is_err());
        assert!(jacobi_ratio(&w, &path, JacobiDirection::Fiber(3), 0.1).is_err());
        assert!(jacobi_ratio(&w, &path, JacobiDirection::Fiber(0), 0.6).is_err());
        let hp = HalfPlane::new(w.radial.clone());
        let skew = hp.geodesic((0.8, 0.9), (1.3, 2.1), 2000).unwrap();
        assert!(jacobi_ratio(&w, &skew, JacobiDirection::Angular, 0.1).is_err());
        let mut jagged = path.clone();
        jagged[40].0 += 1e-3;
        assert!(jacobi_ratio(&w, &jagged, JacobiDirection::Fiber(0), 0.1).is_err());
    }

    #[test]
    fn banded_metric_jacobi_stays_inside_desk_envelope() {
        let k = Constants::canonical();
        let ex = build_example_a(k.t0, &k).unwrap();
        let path = radial_path(&ex.member, PI / 2.0, 0.02, 1.2, 3000);
        for dir in [JacobiDirection::Fiber(0), JacobiDirection::Fiber(1), JacobiDirection::Fiber(2)]
        {
            let rep = jacobi_ratio(&ex.member, &path, dir, 0.05).unwrap();
            assert!(
                rep.wronskian_gap < 1e-4,
                "finite-difference curvature drifts from closed form: {}",
                rep.wronskian_gap
            );
            assert!(rep.envelope_c <= 10.0, "envelope constant {}", rep.envelope_c);
        }
    }

    #[test]
    fn tip_distance_hessian_matches_closed_form() {
        let w = build_flat();
        let path = radial_path(&w, 1.2, 1e-6, 1.0, 4000);
        for delta in [0.05, 0.1, 0.2] {
            let rep = hessian_along_geodesic(&w, &path, &tip_distance, delta, 1e-5).unwrap();
            // Four tangential directions, each contributing 1/r: the
            // squared norm is 4/r^2 and the window integral follows.
            let want = 4.0 * (1.0 / delta - 1.0 / (1.0 - delta));
            assert!(
                (rep.integral - want).abs() < 0.02 * want,
                "delta {delta}: integral {} vs {}",
                rep.integral,
                want
            );
            assert!(rep.integral <= 4.0 / delta);
            for s in &rep.samples {
                let r = s.tau + 1e-6;
                assert!((s.frob_sq - 4.0 / (r * r)).abs() < 1e-3 * (4.0 / (r * r)));
                assert!((s.trace - 4.0 / r).abs() < 1e-3 * (4.0 / r));
            }
        }
    }

    #[test]
    fn linear_coordinate_has_vanishing_hessian() {
        let w = build_flat();
        let hp = HalfPlane::new(w.radial.clone());
        let path = hp.geodesic((0.7, 0.8), (1.4, 2.2), 2000).unwrap();
        // x0 = r cos s is a genuine linear coordinate of the flat cone.
        let rep =
            hessian_along_geodesic(&w, &path, &|r, s| r * s.cos(), 0.05, 1e-5).unwrap();
        assert!(rep.max_frob_sq < 1e-8, "linear function bent: {}", rep.max_frob_sq);
        assert!(rep.integral < 1e-8);
    }

    #[test]
    fn half_squared_tip_distance_traces_dimension() {
        let w = build_flat();
        let path = radial_path(&w, 0.9, 1e-6, 1.0, 2000);
        let rep =
            hessian_along_geodesic(&w, &path, &|r, _| 0.5 * r * r, 0.1, 1e-4).unwrap();
        for s in &rep.samples {
            assert!((s.trace - 5.0).abs() < 1e-5, "trace {} at tau {}", s.trace, s.tau);
        }
    }

    #[test]
    fn off_tip_distance_hessian_matches_orbit_formula() {
        let w = build_flat();
        let rp = 0.35;
        let s0 = 1.3;
        let path = radial_path(&w, s0, rp + 0.05, rp + 0.75, 2000);
        let rep =
            hessian_along_geodesic(&w, &path, &flat_point_distance((rp, s0)), 0.05, 1e-5)
                .unwrap();
        // Beyond p on its own ray the slice contributes 1/(r - rp) and each
        // fiber direction 1/r (distance to the orbit of p, not to p).
        for s in &rep.samples {
            let r = rp + 0.05 + s.tau;
            let want = 1.0 / ((r - rp) * (r - rp)) + 3.0 / (r * r);
            assert!(
                (s.frob_sq - want).abs() < 1e-3 * want,
                "at r = {r}: {} vs {want}",
                s.frob_sq
            );
        }
    }

    #[test]
    fn hessian_input_validation() {
        let w = build_flat();
        let path = radial_path(&w, 1.2, 0.1, 1.0, 500);
        assert!(hessian_along_geodesic(&w, &path, &tip_distance, 0.6, 1e-5).is_err());
        assert!(hessian_along_geodesic(&w, &path, &tip_distance, 0.1, 0.0).is_err());
        assert!(hessian_along_geodesic(&w, &path[..2], &tip_distance, 0.1, 1e-5).is_err());
        // A stencil wider than the clearance to the chart edge must error.
        assert!(hessian_along_geodesic(&w, &path, &tip_distance, 0.1, 0.2).is_err());
    }
}
