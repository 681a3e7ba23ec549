//! Warping profiles `a(r)` and `b(s)` with exact second-order jets.
//!
//! The interesting profiles are piecewise-analytic branches spliced into C^2
//! functions by quintic Hermite windows, so that outside a small window each
//! branch formula holds exactly (no global mollification error) while the
//! spliced function stays twice continuously differentiable everywhere.

use crate::util::{EvenQuarticCap, Jet2, QuinticJoint};

/// Jet of the log-log dip factor `G(x) = 1 - amp / log(-log(scale * x))`.
///
/// Returns a NaN jet when `-log(scale * x) <= 1` (the factor is undefined
/// there); callers treat NaN as a positivity violation rather than a panic
/// so that deliberately broken control configurations can still be scanned.
pub fn logdip_factor_jet(x: f64, scale: f64, amp: f64) -> Jet2 {
    let ell = -(scale * x).ln();
    if !(ell > 1.000_000_1) || x <= 0.0 {
        return Jet2 { v: f64::NAN, d1: f64::NAN, d2: f64::NAN };
    }
    let lg = ell.ln();
    // ell' = -1/x, L' = -1/(x ell), L'' = 1/(x^2 ell) - 1/(x^2 ell^2).
    let lp = -1.0 / (x * ell);
    let lpp = 1.0 / (x * x * ell) - 1.0 / (x * x * ell * ell);
    Jet2 {
        v: 1.0 - amp / lg,
        d1: amp * lp / (lg * lg),
        d2: amp * (lpp / (lg * lg) - 2.0 * lp * lp / (lg * lg * lg)),
    }
}

/// Trigonometric series `c0 + c1 x + sum_k amp_k cos(freq_k x + phase_k)`;
/// used for randomized smooth profiles in oracle tests.
#[derive(Clone, Debug, Default)]
pub struct AnalyticSeries {
    pub c0: f64,
    pub c1: f64,
    pub terms: Vec<(f64, f64, f64)>,
}

impl AnalyticSeries {
    /// Exact jet at `x`.
    pub fn jet(&self, x: f64) -> Jet2 {
        let mut j = Jet2 { v: self.c0 + self.c1 * x, d1: self.c1, d2: 0.0 };
        for &(amp, freq, phase) in &self.terms {
            let arg = freq * x + phase;
            j.v += amp * arg.cos();
            j.d1 -= amp * freq * arg.sin();
            j.d2 -= amp * freq * freq * arg.cos();
        }
        j
    }
}

/// Concave radial profile with an exact cone at the bottom, a log-log dip in
/// the middle and an exact half-slope line at the top:
///
/// ```text
/// a(r) = a0 r                                   r <= k1 - w1
///      = a0 r (1 - a1 / log(-log(r0 r))) + off  k1 + w1 <= r <= 1
///      = a0 r / 2 + c3                          r >= rj
/// ```
///
/// with quintic/quartic C^2 joints on (k1-w1, k1+w1) and (1, rj). The offset
/// `off` makes the two lower branches cross at `k1` (so the cone branch is
/// exact near the tip), and `c3` is the emergent constant of the top tail
/// whose slope and curvature match the middle branch at `r = 1` and reach
/// exactly slope `a0/2`, curvature `0` at `rj`. A constant offset at the top
/// is forced: no concave C^1 function can join the middle branch at `r = 1`
/// to the un-shifted line `a0 r / 2` (the mean slope required on `[1, 2]`
/// would exceed the slope available at `r = 1`).
#[derive(Clone, Debug)]
pub struct LogDipProfile {
    pub a0: f64,
    pub a1: f64,
    pub r0: f64,
    /// Crossing of cone and dip branches.
    pub k1: f64,
    /// Half-width of the lower joint window.
    pub w1: f64,
    /// Offset added to the dip branch so it crosses the cone branch at `k1`.
    pub off: f64,
    /// Right end of the top tail window starting at `r = 1`.
    pub rj: f64,
    /// Constant of the top line `a0 r / 2 + c3`.
    pub c3: f64,
    lower: QuinticJoint,
    tail: QuarticTail,
}

impl LogDipProfile {
    /// Build from the scale constants. `k1 = 2 t0 / 3`, `w1 = t0 / 16`,
    /// `rj = 1.25`. Degenerate constants (control runs) still build; the
    /// resulting profile may fail positivity checks downstream by design.
    pub fn build(a0: f64, a1: f64, r0: f64, t0: f64) -> LogDipProfile {
        assert!(a0 > 0.0 && t0 > 0.0 && r0 > 0.0 && r0 < 0.3, "profile scales out of range");
        let k1 = 2.0 * t0 / 3.0;
        let w1 = t0 / 16.0;
        let g = logdip_factor_jet(k1, r0, a1);
        let off = if g.v.is_finite() { a0 * k1 * (1.0 - g.v) } else { 0.0 };
        let dip = |r: f64| -> Jet2 {
            let g = logdip_factor_jet(r, r0, a1);
            Jet2 {
                v: a0 * r * g.v + off,
                d1: a0 * (g.v + r * g.d1),
                d2: a0 * (2.0 * g.d1 + r * g.d2),
            }
        };
        let cone_left = Jet2 { v: a0 * (k1 - w1), d1: a0, d2: 0.0 };
        let lower = QuinticJoint::new(k1 - w1, cone_left, k1 + w1, dip(k1 + w1));
        let at1 = dip(1.0);
        let rj = 1.25;
        let tail = QuarticTail::new(1.0, rj, at1, a0 / 2.0, 0.0);
        let c3 = tail.jet(rj).v - a0 * rj / 2.0;
        LogDipProfile { a0, a1, r0, k1, w1, off, rj, c3, lower, tail }
    }

    /// Exact jet at `r > 0`.
    pub fn jet(&self, r: f64) -> Jet2 {
        if r <= self.k1 - self.w1 {
            Jet2 { v: self.a0 * r, d1: self.a0, d2: 0.0 }
        } else if r < self.k1 + self.w1 {
            self.lower.jet(r)
        } else if r <= 1.0 {
            let g = logdip_factor_jet(r, self.r0, self.a1);
            Jet2 {
                v: self.a0 * r * g.v + self.off,
                d1: self.a0 * (g.v + r * g.d1),
                d2: self.a0 * (2.0 * g.d1 + r * g.d2),
            }
        } else if r < self.rj {
            self.tail.jet(r)
        } else {
            Jet2 { v: self.a0 * r / 2.0 + self.c3, d1: self.a0 / 2.0, d2: 0.0 }
        }
    }
}

/// Quartic tail on `[x0, x1]` matching a full jet on the left and slope plus
/// curvature on the right; the right-end value is emergent. Keeps the spliced
/// function C^2 when only the asymptotic slope of the continuation is pinned.
#[derive(Clone, Copy, Debug)]
struct QuarticTail {
    x0: f64,
    h: f64,
    coef: [f64; 5],
}

impl QuarticTail {
    fn new(x0: f64, x1: f64, left: Jet2, right_slope: f64, right_curv: f64) -> Self {
        assert!(x1 > x0);
        let h = x1 - x0;
        let (s0, s1) = (left.d1 * h, right_slope * h);
        let (c0, c1) = (left.d2 * h * h, right_curv * h * h);
        let a3 = (s1 - s0) - (2.0 * c0 + c1) / 3.0;
        let a4 = (-2.0 * (s1 - s0) + (c0 + c1)) / 4.0;
        QuarticTail { x0, h, coef: [left.v, s0, 0.5 * c0, a3, a4] }
    }

    fn jet(&self, x: f64) -> Jet2 {
        let t = (x - self.x0) / self.h;
        let c = &self.coef;
        let v = (((c[4] * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
        let d1 = ((4.0 * c[4] * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
        let d2 = (12.0 * c[4] * t + 6.0 * c[3]) * t + 2.0 * c[2];
        Jet2 { v, d1: d1 / self.h, d2: d2 / (self.h * self.h) }
    }
}

/// Radial cusp profile `a(r) = 2 - |r-1|^{1+delta}` with an even quartic C^2
/// cap on `|r-1| < w` (the cap is concave and matches value, slope and
/// curvature at the window edge).
#[derive(Clone, Debug)]
pub struct CuspProfile {
    pub delta: f64,
    pub w: f64,
    cap: EvenQuarticCap,
}

impl CuspProfile {
    /// Build with smoothing half-width `w`.
    pub fn build(delta: f64, w: f64) -> CuspProfile {
        assert!(delta > 0.0 && delta <= 0.5 && w > 0.0 && w < 0.1);
        let p = 1.0 + delta;
        let edge = Jet2 {
            v: 2.0 - w.powf(p),
            d1: -p * w.powf(delta),
            d2: -p * delta * w.powf(delta - 1.0),
        };
        CuspProfile { delta, w, cap: EvenQuarticCap::new(w, edge) }
    }

    /// Exact jet at `r`.
    pub fn jet(&self, r: f64) -> Jet2 {
        let x = r - 1.0;
        if x.abs() < self.w {
            self.cap.jet(x)
        } else {
            let p = 1.0 + self.delta;
            let ax = x.abs();
            Jet2 {
                v: 2.0 - ax.powf(p),
                d1: -p * ax.powf(self.delta) * x.signum(),
                d2: -p * self.delta * ax.powf(self.delta - 1.0),
            }
        }
    }
}

/// Radial warping profile.
#[derive(Clone, Debug)]
pub enum RadialProfile {
    /// `a(r) = slope * r`; with `b = sin` and constant equal fiber exponents
    /// this is a metric cone (slope 1, zero exponents: flat `R^5`).
    Cone { slope: f64 },
    /// Log-log dip profile of the smooth example family.
    LogDip(LogDipProfile),
    /// Cusp profile `2 - |r-1|^{1+delta}` of the Hoelder-critical family.
    Cusp(CuspProfile),
    /// Analytic series (randomized tests).
    Series(AnalyticSeries),
}

impl RadialProfile {
    /// Exact jet of `a` at `r`.
    pub fn jet(&self, r: f64) -> Jet2 {
        match self {
            RadialProfile::Cone { slope } => Jet2 { v: slope * r, d1: *slope, d2: 0.0 },
            RadialProfile::LogDip(p) => p.jet(r),
            RadialProfile::Cusp(p) => p.jet(r),
            RadialProfile::Series(s) => s.jet(r),
        }
    }
}

/// Sine-based angular profile with a log-log dip in the variable
/// `x = sin s`, so both poles are treated symmetrically:
///
/// ```text
/// B(x) = x                                        x <= xc - wx
///      = x (1 - b1 / log(-log(s0 x))) + b0        x >= xc + wx
/// b(s) = B(sin s)
/// ```
///
/// `b0` makes the branches cross at `xc`, and a quintic joint splices them
/// on `(xc - wx, xc + wx)`. Near the poles `b = sin s` exactly, so the space
/// is an exact warped cone there.
#[derive(Clone, Debug)]
pub struct SineDipProfile {
    pub b1: f64,
    pub s0: f64,
    pub b0: f64,
    pub xc: f64,
    pub wx: f64,
    joint: QuinticJoint,
}

impl SineDipProfile {
    /// Build with crossing at `x = sin(s_cross)`.
    pub fn build(b1: f64, s0: f64, s_cross: f64) -> SineDipProfile {
        assert!(s0 > 0.0 && s0 < 0.3 && s_cross > 0.0 && s_cross < 0.5);
        let xc = s_cross.sin();
        let wx = xc / 5.0;
        let g = logdip_factor_jet(xc, s0, b1);
        let b0 = if g.v.is_finite() { xc * (1.0 - g.v) } else { 0.0 };
        let dip = |x: f64| -> Jet2 {
            let g = logdip_factor_jet(x, s0, b1);
            Jet2 {
                v: x * g.v + b0,
                d1: g.v + x * g.d1,
                d2: 2.0 * g.d1 + x * g.d2,
            }
        };
        let sin_left = Jet2 { v: xc - wx, d1: 1.0, d2: 0.0 };
        let joint = QuinticJoint::new(xc - wx, sin_left, xc + wx, dip(xc + wx));
        SineDipProfile { b1, s0, b0, xc, wx, joint }
    }

    /// Jet of `B` in the variable `x = sin s`.
    pub fn jet_in_x(&self, x: f64) -> Jet2 {
        if x <= self.xc - self.wx {
            Jet2 { v: x, d1: 1.0, d2: 0.0 }
        } else if x < self.xc + self.wx {
            self.joint.jet(x)
        } else {
            let g = logdip_factor_jet(x, self.s0, self.b1);
            Jet2 {
                v: x * g.v + self.b0,
                d1: g.v + x * g.d1,
                d2: 2.0 * g.d1 + x * g.d2,
            }
        }
    }

    /// Exact jet of `b(s) = B(sin s)`.
    pub fn jet(&self, s: f64) -> Jet2 {
        let inner = crate::util::sin_jet(s);
        self.jet_in_x(inner.v).chain(inner)
    }
}

/// Angular warping profile `b(s)` on `(0, pi)`.
#[derive(Clone, Debug)]
pub enum AngularProfile {
    /// `b = sin s` (round suspension).
    Sine,
    /// Sine profile with a symmetric log-log dip away from the poles.
    SineDip(SineDipProfile),
    /// Analytic series (randomized tests).
    Series(AnalyticSeries),
}

impl AngularProfile {
    /// Exact jet of `b` at `s`.
    pub fn jet(&self, s: f64) -> Jet2 {
        match self {
            AngularProfile::Sine => crate::util::sin_jet(s),
            AngularProfile::SineDip(p) => p.jet(s),
            AngularProfile::Series(series) => series.jet(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A0: f64 = 0.5;
    const A1: f64 = 0.3;
    const R0: f64 = 0.05;
    const T0: f64 = 0.05;
    const B1: f64 = 1.0;
    const S0: f64 = 0.01;

    fn fd_check(jet_at: &dyn Fn(f64) -> Jet2, x: f64, tol1: f64, tol2: f64) {
        let h = 1e-5;
        let c = jet_at(x);
        let p = jet_at(x + h);
        let m = jet_at(x - h);
        let fd1 = (p.v - m.v) / (2.0 * h);
        let fd2 = (p.v - 2.0 * c.v + m.v) / (h * h);
        assert!((c.d1 - fd1).abs() < tol1, "d1 at {x}: {} vs fd {}", c.d1, fd1);
        assert!((c.d2 - fd2).abs() < tol2, "d2 at {x}: {} vs fd {}", c.d2, fd2);
    }

    #[test]
    fn logdip_branches_are_exact() {
        let p = LogDipProfile::build(A0, A1, R0, T0);
        // Cone branch below the joint window.
        for r in [1e-3, 0.01, 0.02, T0 / 2.0] {
            assert_eq!(p.jet(r).v, A0 * r);
            assert_eq!(p.jet(r).d1, A0);
        }
        // Dip branch between window and 1 (offset included).
        for r in [T0, 0.2, 0.6, 1.0] {
            let g = logdip_factor_jet(r, R0, A1);
            assert!((p.jet(r).v - (A0 * r * g.v + p.off)).abs() < 1e-15);
        }
        // Exact half-slope line at the top.
        for r in [p.rj, 1.5, 2.0, 3.0] {
            assert_eq!(p.jet(r).d1, A0 / 2.0);
            assert!((p.jet(r).v - (A0 * r / 2.0 + p.c3)).abs() < 1e-15);
        }
        assert!(p.c3 > 0.0, "top line offset should be positive");
    }

    #[test]
    fn logdip_is_c2_concave_positive() {
        let p = LogDipProfile::build(A0, A1, R0, T0);
        let jet_at = |r: f64| p.jet(r);
        // C^2 at every seam: the one-sided jets agree (the third derivative
        // jumps there, so a centered difference straddling a seam would be
        // biased -- compare the exact branch jets instead).
        for x in [p.k1 - p.w1, p.k1 + p.w1, 1.0, p.rj] {
            let e = 1e-9;
            let (l, r) = (p.jet(x - e), p.jet(x + e));
            assert!((l.v - r.v).abs() < 1e-8, "value jump at {x}");
            assert!((l.d1 - r.d1).abs() < 1e-7, "slope jump at {x}: {} vs {}", l.d1, r.d1);
            assert!((l.d2 - r.d2).abs() < 1e-4, "curvature jump at {x}: {} vs {}", l.d2, r.d2);
        }
        // Finite differences in the interior of each branch.
        for r in [0.02, p.k1, 0.5, 0.5 * (1.0 + p.rj), p.rj + 0.5] {
            fd_check(&jet_at, r, 1e-6, 1e-3);
        }
        // Concavity, slope bound and positivity on a fine grid.
        let n = 4000;
        for i in 0..=n {
            let r = T0 / 2.0 + (2.0 - T0 / 2.0) * i as f64 / n as f64;
            let j = p.jet(r);
            assert!(j.v > 0.0, "a({r}) = {} not positive", j.v);
            assert!(j.d2 <= 1e-9, "a''({r}) = {} not concave", j.d2);
            assert!(j.d1.abs() <= 2.0 * A0 + 1e-12, "|a'({r})| = {} too steep", j.d1);
        }
    }

    #[test]
    fn logdip_top_slope_exceeds_half_at_one() {
        // Feasibility of the top tail: the dip branch must arrive at r = 1
        // with slope above a0/2 so the concave tail can settle onto it.
        let p = LogDipProfile::build(A0, A1, R0, T0);
        assert!(p.jet(1.0).d1 > A0 / 2.0);
        // And the tail slope decreases monotonically.
        let mut last = p.jet(1.0).d1 + 1e-12;
        for i in 0..=100 {
            let r = 1.0 + (p.rj - 1.0) * i as f64 / 100.0;
            let s = p.jet(r).d1;
            assert!(s <= last + 1e-12, "tail slope not monotone at {r}");
            last = s;
        }
    }

    #[test]
    fn cusp_branches_and_cap() {
        let w = 1e-3;
        let p = CuspProfile::build(0.2, w);
        for r in [0.8, 0.95, 1.0 + 2.0 * w, 1.2] {
            let x = (r - 1.0_f64).abs();
            assert!(x >= w);
            assert!((p.jet(r).v - (2.0 - x.powf(1.2))).abs() < 1e-15);
        }
        let jet_at = |r: f64| p.jet(r);
        for r in [1.0 - w, 1.0, 1.0 + w] {
            fd_check(&jet_at, r, 1e-4, 10.0);
        }
        // Concave through the cap, even around r = 1.
        for k in 0..=40 {
            let x = -w + 2.0 * w * k as f64 / 40.0;
            let j = p.jet(1.0 + x);
            assert!(j.d2 < 0.0);
            assert!((j.v - p.jet(1.0 - x).v).abs() < 1e-15);
        }
    }

    #[test]
    fn sinedip_exact_branches_and_symmetry() {
        let p = SineDipProfile::build(B1, S0, T0 / 3.0);
        // Pure sine below the crossing window.
        for s in [1e-4_f64, 0.005, 0.012] {
            assert!(s.sin() < p.xc - p.wx);
            assert_eq!(p.jet(s).v, s.sin());
        }
        // Dip branch above the window.
        for s in [T0 / 2.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2] {
            let x = s.sin();
            assert!(x > p.xc + p.wx);
            let g = logdip_factor_jet(x, S0, B1);
            assert!((p.jet(s).v - (x * g.v + p.b0)).abs() < 1e-15);
        }
        // Mirror symmetry through the equator.
        for s in [0.01, 0.4, 1.2] {
            let d = (p.jet(s).v - p.jet(std::f64::consts::PI - s).v).abs();
            assert!(d < 1e-12);
        }
        // Positive at the equator.
        assert!(p.jet(std::f64::consts::FRAC_PI_2).v > 0.05);
    }

    #[test]
    fn sinedip_is_c2_with_bounded_slope_and_strong_concavity() {
        let p = SineDipProfile::build(B1, S0, T0 / 3.0);
        let jet_at = |s: f64| p.jet(s);
        let sc = (p.xc).asin();
        for s in [sc - 1.5 * p.wx, sc, sc + 1.5 * p.wx, 0.5, 1.5] {
            fd_check(&jet_at, s, 1e-5, 1e-2);
        }
        // b_dot bounded by 2 and b_ddot <= -b/2 away from the poles
        // (the profile constraints of the positivity lemma).
        let n = 6000;
        let lo = T0 / 4.0;
        let hi = std::f64::consts::PI - T0 / 4.0;
        for i in 0..=n {
            let s = lo + (hi - lo) * i as f64 / n as f64;
            let j = p.jet(s);
            assert!(j.v > 0.0);
            assert!(j.d1.abs() <= 2.0, "|b'({s})| = {}", j.d1);
            assert!(j.d2 <= -j.v / 2.0 + 1e-9, "b''({s}) = {} vs -b/2 = {}", j.d2, -j.v / 2.0);
        }
    }

    #[test]
    fn series_jets_match_fd() {
        let s = AnalyticSeries {
            c0: 1.5,
            c1: -0.2,
            terms: vec![(0.3, 2.0, 0.4), (0.1, 5.0, -1.0)],
        };
        let jet_at = |x: f64| s.jet(x);
        for x in [-1.0, 0.0, 0.7, 2.2] {
            fd_check(&jet_at, x, 1e-6, 1e-3);
        }
    }
}
