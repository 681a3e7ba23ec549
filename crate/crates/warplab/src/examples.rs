//! The two canonical example families: doubly warped cone metrics with
//! nonnegative Ricci curvature whose tangent cones at points of the singular
//! rays change along the ray — smoothly for family A, at an exact Hölder rate
//! for family B.
//!
//! Each builder returns a pair of metrics.  The `member` applies the fiber
//! stretching through angular cutoff bands and is the object the curvature
//! certificate runs on: every fiber derivative obeys the slope/curvature
//! allowances (checked by [`crate::ricci::verify_positivity_conditions`]) and
//! the minimal Ricci eigenvalue is nonnegative at grid resolution.  The
//! `limit` applies the same radial stretching at *every* angle
//! ([`FiberField::Circle`]): it is the geometry whose tangent cone at the ray
//! point `gamma(r)` is `R x C(S^3, g(r))` with `g(r)` read off the circle
//! curve, so all tangent-cone comparisons are made against it.  For family A
//! the limit is itself Ricci-nonnegative (the angle swing is gentle); for
//! family B it is the asymptotic model only — the ideal cusp curve has
//! unbounded second derivatives at `r = 1`, which is precisely why the rate
//! is Hölder and nothing better, and the members restore positivity by
//! smoothing the cusp at scale `rho_i` inside ever-deeper bands.

use crate::fiber::{slope_shape, AngleCurve, Band, CircleCurve, Cutoff, FiberField};
use crate::metric::WarpedMetric;
use crate::profiles::{AngularProfile, CuspProfile, LogDipProfile, RadialProfile, SineDipProfile};
use crate::ricci::{fiber_intrinsic_ricci, Condition, CurvatureGrid};
use crate::{Error, Result};

/// The pinned constants of the canonical constructions.  The underlying
/// existence argument only needs "suitable" constants; reproducible numerics
/// need fixed ones, so these values are frozen here (and mirrored in the
/// version-controlled CLI config) after a margin search: each is documented
/// by the worst margin it leaves in the positivity report.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    /// Cone slope of the radial warp near the tip.
    pub a0: f64,
    /// Amplitude of the radial log-log dip.
    pub a1: f64,
    /// Log scale of the radial dip, `l_r = -log(r0 r)`.
    pub r0: f64,
    /// Angular band scale of family A (cutoff support `[t0, pi - t0]`).
    pub t0: f64,
    /// Amplitude of the angular log-log dip.
    pub b1: f64,
    /// Log scale of the angular dip, `l = -log(s0 sin s)`.
    pub s0: f64,
    /// Fiber circle budget: `sum_j m_j^2 = c` on the unshifted circle.
    pub c: f64,
    /// Fiber shrinking exponent; all exponents stay `<= -m0`.
    pub m0: f64,
    /// Radial fiber-derivative allowance.
    pub a2: f64,
    /// Angular fiber-derivative allowance.
    pub b2: f64,
    /// Family-A angle swing amplitude across `r` in `[1/2, 1]`.
    pub amp_a: f64,
    /// Family-B angle scale of the cusp `theta0 sign(r-1)|r-1|^{(1+delta)/2}`.
    pub theta0: f64,
    /// Family-B Hölder offset: the fiber curve is `C^{(1+delta)/2}` exactly.
    pub delta: f64,
    /// Band depth constant `K` in `t_i = exp(-K 2^i)`.
    pub band_log_scale: f64,
    /// Number of cutoff bands in the family-B member.
    pub n_bands: usize,
    /// Base smoothing scale of the band curves, `rho_i = rho0 3^{-i}`.
    pub rho0: f64,
    /// Half-width of the quartic cap smoothing the radial cusp at `r = 1`.
    pub cusp_width: f64,
    /// Ramp smoothing fraction on the ray side of each cutoff.
    pub pole_edge: f64,
    /// Ramp smoothing fraction on the equator side of each cutoff.
    pub equator_edge: f64,
    /// Ramp smoothing fraction of the family-B band cutoffs (both sides).
    /// Wider than `pole_edge`: the bands pay a curvature price `~1/edge` at
    /// the ramp corners where the `sin^{-2}` allowance is weakest.
    pub band_edge: f64,
}

impl Constants {
    /// The frozen canonical values.
    pub fn canonical() -> Constants {
        Constants {
            a0: 0.5,
            a1: 0.3,
            r0: 0.05,
            t0: 0.05,
            b1: 1.15,
            s0: 0.01,
            c: 0.01,
            m0: 1.0,
            a2: 0.75,
            b2: 10.0,
            amp_a: 0.3,
            theta0: 1.2,
            delta: 0.2,
            band_log_scale: 1.0,
            n_bands: 3,
            rho0: 0.06,
            cusp_width: 1e-3,
            pole_edge: 0.10,
            equator_edge: 0.25,
            band_edge: 0.15,
        }
    }

    /// Uniform downward shift of the fiber exponents (both families).
    pub fn m_bar(&self) -> f64 {
        2.0 * self.m0
    }

    /// Radius of the fiber circle, `sqrt(2c/3) = max_j |m_j + m_bar|`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.c / 3.0).sqrt()
    }

    /// Cutoff slope allowance that makes `|d_s m_j| <= b2 * shape` exact for
    /// a band of circle amplitude `sqrt(2c/3)`: the bound is imposed on the
    /// fiber exponents, so the bump itself may ramp `b2 / sqrt(2c/3)` times
    /// the shape.
    pub fn band_allowance(&self) -> f64 {
        self.b2 / self.amplitude()
    }
}

/// Slope-bound shape in the radial direction: `1 / (r l_r L_r)` with
/// `l_r = -log(r0 r)` and `L_r = log l_r`.  Returns infinity (no constraint)
/// where the logs degenerate (`r >= 1/(e r0)`).
pub fn radial_slope_shape(r: f64, r0: f64) -> f64 {
    let ell = -(r0 * r).ln();
    if !(ell > 1.0) {
        return f64::INFINITY;
    }
    1.0 / (r * ell * ell.ln())
}

/// One of the two canonical families, assembled.
pub struct ExampleSpace {
    /// Cutoff-banded metric carrying the curvature certificate.
    pub member: WarpedMetric,
    /// Band-free metric whose tangent cones at ray points vary with `r`.
    pub limit: WarpedMetric,
    /// The radial circle curve generating the tangent-cone family (for
    /// family B this is the ideal cusp the band curves converge to).
    pub circle: CircleCurve,
    /// Pointwise hypotheses behind the positivity argument, evaluated on the
    /// member.
    pub conditions: Vec<Condition>,
    /// Certification grid (dense on the cutoff ramps; family B excludes the
    /// cusp-cap collar `|r-1| < 2w` in `r`).
    pub grid: CurvatureGrid,
    /// Constants the space was built with.
    pub constants: Constants,
}

impl ExampleSpace {
    /// Fiber exponents of the tangent-cone cross-section at the ray point
    /// `gamma(r)`: the cone there is `R x C(S^3, g(r))` with
    /// `g(r) = sum_j e^{2 m_j} sigma_j^2`.
    pub fn link_exponents(&self, r: f64) -> [f64; 3] {
        self.limit.fiber.eval(r, std::f64::consts::FRAC_PI_2).m
    }

    /// Sup-distance between the tangent-cone fiber exponents at two radii;
    /// the log-scale separation of the cones at `gamma(r1)` and `gamma(r2)`.
    pub fn link_distance(&self, r1: f64, r2: f64) -> f64 {
        let (m1, m2) = (self.link_exponents(r1), self.link_exponents(r2));
        (0..3).map(|j| (m1[j] - m2[j]).abs()).fold(0.0, f64::max)
    }
}

fn max_abs(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Shared fiber-derivative hypotheses: exponents below `-m0`, angular slope
/// and curvature within the `b2` allowances.
fn fiber_bound_conditions(w: &WarpedMetric, k: &Constants) -> Vec<Condition> {
    let m0 = k.m0;
    let (b2, s0) = (k.b2, k.s0);
    let wa = w.clone();
    let wb = w.clone();
    let wc = w.clone();
    vec![
        Condition::new("fiber exponents <= -m0", move |r, s| match wa.warp_jets(r, s) {
            Ok(j) => -m0 - j.m.m.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x)),
            Err(_) => f64::NEG_INFINITY,
        }),
        Condition::new("angular fiber slope within allowance", move |r, s| {
            match wb.warp_jets(r, s) {
                Ok(j) => b2 * slope_shape(s, s0) - max_abs(&j.m.ms),
                Err(_) => f64::NEG_INFINITY,
            }
        }),
        Condition::new("angular fiber curvature within allowance", move |r, s| {
            match wc.warp_jets(r, s) {
                Ok(j) => b2 / (s.sin() * s.sin()) - max_abs(&j.m.mss),
                Err(_) => f64::NEG_INFINITY,
            }
        }),
    ]
}

/// Angular-warp hypotheses shared by both families: `|b'| <= 2` and the
/// concavity floor `b_ss/b <= -1` outside `[t0/4, pi - t0/4]`, `<= -1/2`
/// inside, sharpened to `<= -1/2 - cot^2(s) b1 / (l L^2)` on
/// `[t0/2, pi - t0/2]` (the term that pays for the cutoff slopes).
fn angular_warp_conditions(w: &WarpedMetric, k: &Constants, t0: f64) -> Vec<Condition> {
    let (b1, s0) = (k.b1, k.s0);
    let wa = w.clone();
    let wb = w.clone();
    let pi = std::f64::consts::PI;
    vec![
        Condition::new("angular warp slope cap", move |_r, s| match wa.warp_jets(1.0, s) {
            Ok(j) => 2.0 - j.b.d1.abs(),
            Err(_) => f64::NEG_INFINITY,
        }),
        Condition::new("angular warp concavity floor", move |_r, s| {
            let Ok(j) = wb.warp_jets(1.0, s) else { return f64::NEG_INFINITY };
            let ratio = -j.b.d2 / j.b.v;
            let inner = s.min(pi - s);
            if inner < t0 / 4.0 {
                ratio - 1.0
            } else if inner < t0 / 2.0 {
                ratio - 0.5
            } else {
                let ell = -(s0 * s.sin()).ln();
                let cot = s.tan().recip();
                ratio - 0.5 - cot * cot * b1 / (ell * ell.ln() * ell.ln())
            }
        }),
    ]
}

/// The family-A hypothesis list (evaluated on the member metric).
fn conditions_a(w: &WarpedMetric, k: &Constants, t0: f64) -> Vec<Condition> {
    let (a2, r0, a0) = (k.a2, k.r0, k.a0);
    let pi = std::f64::consts::PI;
    let mut out = Vec::new();

    let wi = w.clone();
    out.push(Condition::new("fiber intrinsic Ricci >= 1", move |r, s| {
        let Ok(j) = wi.warp_jets(r, s) else { return f64::NEG_INFINITY };
        let amp = [(2.0 * j.m.m[0]).exp(), (2.0 * j.m.m[1]).exp(), (2.0 * j.m.m[2]).exp()];
        let ric = fiber_intrinsic_ricci(amp);
        (0..3).map(|i| ric[i] / amp[i]).fold(f64::INFINITY, f64::min) - 1.0
    }));
    out.extend(fiber_bound_conditions(w, k));

    let ws = w.clone();
    out.push(Condition::new("radial fiber slope within allowance", move |r, s| {
        match ws.warp_jets(r, s) {
            Ok(j) => a2 * radial_slope_shape(r, r0) - max_abs(&j.m.mr),
            Err(_) => f64::NEG_INFINITY,
        }
    }));
    let wc = w.clone();
    out.push(Condition::new("radial fiber curvature within allowance", move |r, s| {
        match wc.warp_jets(r, s) {
            Ok(j) => a2 / (r * r) - max_abs(&j.m.mrr),
            Err(_) => f64::NEG_INFINITY,
        }
    }));
    let wr = w.clone();
    out.push(Condition::new("radial fiber slope supported in [t0, 1]", move |r, s| {
        let Ok(j) = wr.warp_jets(r, s) else { return f64::NEG_INFINITY };
        if (t0..=1.0).contains(&r) {
            1.0
        } else {
            -max_abs(&j.m.mr)
        }
    }));
    let wband = w.clone();
    out.push(Condition::new("fiber slopes supported in angular band", move |r, s| {
        let Ok(j) = wband.warp_jets(r, s) else { return f64::NEG_INFINITY };
        if (t0..=pi - t0).contains(&s) {
            1.0
        } else {
            -max_abs(&j.m.ms).max(max_abs(&j.m.mr))
        }
    }));
    let wcv = w.clone();
    out.push(Condition::new("radial warp concave", move |r, _s| match wcv.warp_jets(r, 1.0) {
        Ok(j) => -j.a.d2,
        Err(_) => f64::NEG_INFINITY,
    }));
    let wsl = w.clone();
    out.push(Condition::new("radial warp slope cap", move |r, _s| match wsl.warp_jets(r, 1.0) {
        Ok(j) => 2.0 * a0 - j.a.d1.abs(),
        Err(_) => f64::NEG_INFINITY,
    }));
    out.extend(angular_warp_conditions(w, k, t0));
    out
}

/// The family-B hypothesis list (evaluated on the member metric).
/// `s_band` is the angular interval containing all cutoff supports and
/// `t0_b` the analogue of `t0` for the angular profile.
fn conditions_b(
    w: &WarpedMetric,
    k: &Constants,
    delta: f64,
    s_band: (f64, f64),
    t0_b: f64,
) -> Vec<Condition> {
    let (a2, cw) = (k.a2, k.cusp_width);
    let mut out = fiber_bound_conditions(w, k);

    let ws = w.clone();
    out.push(Condition::new("radial fiber slope within cusp allowance", move |r, s| {
        let Ok(j) = ws.warp_jets(r, s) else { return f64::NEG_INFINITY };
        let x = (r - 1.0).abs().max(cw);
        a2 * x.powf(-0.5 * (1.0 - delta)) - max_abs(&j.m.mr)
    }));
    let wc = w.clone();
    out.push(Condition::new("radial fiber curvature within angular allowance", move |r, s| {
        match wc.warp_jets(r, s) {
            Ok(j) => a2 / (s.sin() * s.sin()) - max_abs(&j.m.mrr),
            Err(_) => f64::NEG_INFINITY,
        }
    }));
    let wb = w.clone();
    out.push(Condition::new("fiber slopes supported in angular bands", move |r, s| {
        let Ok(j) = wb.warp_jets(r, s) else { return f64::NEG_INFINITY };
        if (s_band.0..=s_band.1).contains(&s) {
            1.0
        } else {
            -max_abs(&j.m.ms).max(max_abs(&j.m.mr))
        }
    }));
    let wcv = w.clone();
    out.push(Condition::new("radial warp concave", move |r, _s| match wcv.warp_jets(r, 1.0) {
        Ok(j) => -j.a.d2,
        Err(_) => f64::NEG_INFINITY,
    }));
    let wlc = w.clone();
    out.push(Condition::new("radial warp log-concavity floor", move |r, _s| {
        let Ok(j) = wlc.warp_jets(r, 1.0) else { return f64::NEG_INFINITY };
        let x = (r - 1.0).abs().max(cw);
        -j.a.d2 / j.a.v - 0.5 * delta * (1.0 + delta) * x.powf(delta - 1.0)
    }));
    out.extend(angular_warp_conditions(w, k, t0_b));
    out
}

/// Builds family A at band scale `t0`: radial and angular log-log dips, one
/// angular cutoff band with support `[t0, pi - t0]` and plateau
/// `[6 t0, pi - 6 t0]` (capped at 1.45 for large `t0`), and a smooth angle
/// swing of amplitude `amp_a` across `r` in `[1/2, 1]`.  Fails with the
/// cutoff-infeasibility error when `t0` is too large for the `b2` allowance.
pub fn build_example_a(t0: f64, k: &Constants) -> Result<ExampleSpace> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::InvalidInput(format!("band scale t0 = {t0} outside (0, 1)")));
    }
    let pi = std::f64::consts::PI;
    let plateau_lo = (6.0 * t0).min(1.45);
    let cutoff = Cutoff::build(
        (t0, pi - t0),
        (plateau_lo, pi - plateau_lo),
        k.s0,
        k.b2,
        k.pole_edge,
        k.equator_edge,
    )?;
    let circle = CircleCurve {
        c: k.c,
        angle: AngleCurve::SmoothBump { amp: k.amp_a, lo: 0.5, hi: 1.0 },
    };
    let radial = RadialProfile::LogDip(LogDipProfile::build(k.a0, k.a1, k.r0, t0));
    let angular = AngularProfile::SineDip(SineDipProfile::build(k.b1, k.s0, t0 / 3.0));
    let member = WarpedMetric {
        radial: radial.clone(),
        angular: angular.clone(),
        fiber: FiberField::banded(vec![Band { cutoff, circle: circle.clone() }], k.m_bar())?,
        name: format!("example-a(t0={t0})"),
    };
    let limit = WarpedMetric {
        radial,
        angular,
        fiber: FiberField::Circle { circle: circle.clone(), m_bar: k.m_bar() },
        name: format!("example-a-limit(t0={t0})"),
    };
    let conditions = conditions_a(&member, k, t0);
    let grid = CurvatureGrid::uniform((t0 / 8.0, 2.0), 50, t0 / 8.0, 50)
        .refine_s(CurvatureGrid::band_samples((t0, pi - t0), (plateau_lo, pi - plateau_lo), 40));
    Ok(ExampleSpace { member, limit, circle, conditions, grid, constants: *k })
}

/// Plateau multiples of the depth scale `t_i` for a band whose support gap
/// to the next shallower scale is `gap = t_{i-1} / t_i`.  Both ramps need
/// width in the stretched coordinate: a ramp's slope cost scales like
/// `1 / width^2` while the available concavity only grows linearly in the
/// depth `l`, so thin plateaus (wide ramps) are what keep bands affordable.
/// Deep bands (gap ratio `e^2` and beyond) have room to park the plateau
/// above the nominal scale; the shallowest band's gap is only a factor `e`,
/// so its plateau hugs `t_i` to leave its falling ramp — squeezed against
/// the weakest stretch of the `sin^{-2}` curvature allowance — wide enough.
fn plateau_multiples(gap: f64) -> (f64, f64) {
    if gap > 6.0 {
        (1.2, 1.6)
    } else {
        (0.95, 1.15)
    }
}

/// Builds family B at Hölder offset `delta` with `n` cutoff bands: radial
/// cusp `2 - |r-1|^{1+delta}`, band depths `t_i = exp(-K 2^i)`, and per-band
/// circle curves smoothing the ideal cusp angle at scale `rho_i`.  With
/// `n = 0` the fiber is constant (no bands, no variation).  Fails when a
/// band is infeasible for the allowance (too deep: at canonical constants
/// this caps the desk-scale construction at three bands).
pub fn build_example_b(delta: f64, n: usize, k: &Constants) -> Result<ExampleSpace> {
    if !(delta > 0.0 && delta <= 0.3) {
        return Err(Error::InvalidInput(format!("Hölder offset delta = {delta} outside (0, 0.3]")));
    }
    let m_bar = k.m_bar();
    let radial = RadialProfile::Cusp(CuspProfile::build(delta, k.cusp_width));
    let ideal = CircleCurve { c: k.c, angle: AngleCurve::HolderCusp { theta0: k.theta0, delta } };

    let t = |i: usize| (-k.band_log_scale * (2.0f64).powi(i as i32)).exp();
    let (fiber_member, fiber_limit, s_band, t0_b) = if n == 0 {
        let m = [-m_bar; 3];
        (FiberField::Constant(m), FiberField::Constant(m), (0.2, 0.3), k.t0)
    } else {
        let mut bands = Vec::with_capacity(n);
        for i in 1..=n {
            let support = (0.5 * (t(i) + t(i + 1)), 0.5 * (t(i - 1) + t(i)));
            let (p_lo, p_hi) = plateau_multiples(t(i - 1) / t(i));
            let plateau = (p_lo * t(i), p_hi * t(i));
            let cutoff = Cutoff::build(
                support,
                plateau,
                k.s0,
                k.band_allowance(),
                k.band_edge,
                k.band_edge,
            )?;
            let rho = (k.rho0 * (3.0f64).powi(-(i as i32))).max(3.0 * k.cusp_width);
            let circle = CircleCurve {
                c: k.c,
                angle: AngleCurve::SmoothedCusp { theta0: k.theta0, delta, rho },
            };
            bands.push(Band { cutoff, circle });
        }
        let s_band = (0.5 * (t(n) + t(n + 1)), 0.5 * (t(0) + t(1)));
        (
            FiberField::banded(bands, m_bar)?,
            FiberField::Circle { circle: ideal.clone(), m_bar },
            s_band,
            s_band.0,
        )
    };
    let angular = AngularProfile::SineDip(SineDipProfile::build(k.b1, k.s0, t0_b / 3.0));
    let member = WarpedMetric {
        radial: radial.clone(),
        angular: angular.clone(),
        fiber: fiber_member,
        name: format!("example-b(delta={delta},n={n})"),
    };
    let limit = WarpedMetric {
        radial,
        angular,
        fiber: fiber_limit,
        name: format!("example-b-limit(delta={delta})"),
    };
    let conditions = conditions_b(&member, k, delta, s_band, t0_b);
    let mut grid = CurvatureGrid::uniform((1.0 - delta, 1.0 + delta), 41, 0.45 * s_band.0, 50);
    grid.r.retain(|&r| (r - 1.0).abs() >= 2.0 * k.cusp_width);
    if let FiberField::Banded { bands, .. } = &member.fiber {
        for band in bands {
            grid = grid.refine_s(CurvatureGrid::band_samples(
                band.cutoff.support(),
                band.cutoff.plateau(),
                40,
            ));
        }
    }
    Ok(ExampleSpace { member, limit, circle: ideal, conditions, grid, constants: *k })
}

/// The flat cone: `a = r`, `b = sin s`, round unit fiber.  Isometric to
/// `R^5` minus the origin's chart degeneracies; the control space for every
/// comparison experiment.
pub fn build_flat() -> WarpedMetric {
    WarpedMetric {
        radial: RadialProfile::Cone { slope: 1.0 },
        angular: AngularProfile::Sine,
        fiber: FiberField::Constant([0.0; 3]),
        name: "flat".into(),
    }
}
