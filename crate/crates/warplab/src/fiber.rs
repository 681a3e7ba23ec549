//! Angular cutoffs and the banded fiber exponents `m_j(r, s)`.
//!
//! The three fiber exponents of a warped metric factor through a product
//! ansatz: `m_j(r, s) = sum_i psi_i(s) * mu_{ij}(r) - m_bar`, where each
//! `psi_i` is a C^2 bump in the angular variable with prescribed support and
//! plateau, and `r -> (mu_{i1}, mu_{i2}, mu_{i3})(r)` traces a circle inside
//! the plane `{sum_j x_j = 0}`.  The circle parametrization makes the two
//! structural constraints exact at every point rather than approximate:
//! `sum_j m_j` is constant and `sum_j (d_r m_j)(d_s m_j) = 0`.
//!
//! The cutoffs must obey a slope bound whose shape is
//! `|cot s| / (l(s) L(s))` with `l = -log(s0 sin s)`, `L = log l`.  That
//! shape is exactly the derivative of `u(s) = log log l(s)`, so a bump built
//! as a fixed C^2 profile in the normalized `u`-coordinate saturates the
//! bound *uniformly*: its slope utilization is the same constant at every
//! point of the ramp.  Feasibility then reduces to a closed-form inequality
//! per ramp (no quadrature), and infeasible geometry (a ramp too short in
//! `u`-length for the requested allowance) is reported as an error.

use crate::util::{cos_jet, ln_jet, pow_jet, sin_jet, smootherstep, Jet2};
use crate::{Error, Result};

/// Jet of the stretched angular coordinate `u(s) = log log(-log(s0 sin s))`.
///
/// `u` decreases from `+inf` to its equator value on `(0, pi/2]` and mirrors
/// back up on `[pi/2, pi)`.  Requires `0 < s < pi` and `-log(s0 sin s) > 1`
/// (guaranteed for `s0 <= 0.3`); outside that domain the jet is NaN.
pub fn loglog_jet(s: f64, s0: f64) -> Jet2 {
    if s <= 0.0 || s >= std::f64::consts::PI {
        return Jet2 { v: f64::NAN, d1: f64::NAN, d2: f64::NAN };
    }
    let ell = ln_jet(sin_jet(s).scale(s0)).scale(-1.0);
    if ell.v <= 1.000_000_1 {
        return Jet2 { v: f64::NAN, d1: f64::NAN, d2: f64::NAN };
    }
    ln_jet(ln_jet(ell))
}

/// The slope-bound shape `|cot s| / (l(s) L(s))`, i.e. `|u'(s)|`.
pub fn slope_shape(s: f64, s0: f64) -> f64 {
    loglog_jet(s, s0).d1.abs()
}

/// Jet (in `x`) of the integral of the smootherstep polynomial:
/// `I(x) = x^6 - 3x^5 + 2.5x^4`, so `I' = 6x^5 - 15x^4 + 10x^3` and
/// `I(1) = 1/2`.  Clamped with C^2 continuation outside `[0, 1]`.
fn smoother_integral_jet(x: f64) -> Jet2 {
    if x <= 0.0 {
        return Jet2::constant(0.0);
    }
    if x >= 1.0 {
        return Jet2 { v: x - 0.5, d1: 1.0, d2: 0.0 };
    }
    let x2 = x * x;
    Jet2 {
        v: x2 * x2 * (2.5 + x * (-3.0 + x)),
        d1: x * x2 * (10.0 + x * (-15.0 + 6.0 * x)),
        d2: 30.0 * x2 * (1.0 + x * (-2.0 + x)),
    }
}

/// Normalized C^2 ramp profile `Phi: [0,1] -> [0,1]` with `Phi(0) = 0`,
/// `Phi(1) = 1`, vanishing first and second derivatives at both ends, and a
/// trapezoidal slope: smootherstep rise on `[0, f_lo]`, constant maximal
/// slope `1/eff` in the middle, smootherstep fall on `[1 - f_hi, 1]`, where
/// `eff = 1 - f_lo/2 - f_hi/2` is the exact slope efficiency.
pub(crate) fn plateau_ramp_jet(tau: f64, f_lo: f64, f_hi: f64) -> Jet2 {
    let eff = 1.0 - 0.5 * f_lo - 0.5 * f_hi;
    if tau <= 0.0 {
        return Jet2::constant(0.0);
    }
    if tau >= 1.0 {
        return Jet2::constant(1.0);
    }
    if tau < f_lo {
        let i = smoother_integral_jet(tau / f_lo);
        Jet2 { v: f_lo * i.v / eff, d1: i.d1 / eff, d2: i.d2 / (eff * f_lo) }
    } else if tau <= 1.0 - f_hi {
        Jet2 { v: (tau - 0.5 * f_lo) / eff, d1: 1.0 / eff, d2: 0.0 }
    } else {
        let i = smoother_integral_jet((1.0 - tau) / f_hi);
        Jet2 { v: 1.0 - f_hi * i.v / eff, d1: i.d1 / eff, d2: -i.d2 / (eff * f_hi) }
    }
}

/// Coordinate a ramp is built in: the normalized profile lives in `u(s)`,
/// so the slope bound the ramp saturates uniformly is `|u'(s)|`.
#[derive(Debug, Clone, Copy)]
enum RampCoord {
    /// Stretched coordinate `u = log log(-log(s0 sin s))`; bound shape
    /// `|cot s| / (l L)`.
    LogLog { s0: f64 },
    /// Plain coordinate `u = s`; constant bound shape 1.
    Linear,
}

impl RampCoord {
    fn jet(&self, s: f64) -> Jet2 {
        match *self {
            RampCoord::LogLog { s0 } => loglog_jet(s, s0),
            RampCoord::Linear => Jet2::variable(s),
        }
    }
}

/// One monotone C^2 piece of a cutoff, carrying `psi` from `v0` at `s_lo`
/// to `v1` at `s_hi` along the normalized `u`-coordinate.
#[derive(Debug, Clone)]
pub struct Ramp {
    s_lo: f64,
    s_hi: f64,
    u_lo: f64,
    du: f64,
    f_lo: f64,
    f_hi: f64,
    v0: f64,
    v1: f64,
    coord: RampCoord,
}

impl Ramp {
    /// Builds the ramp; `pole_edge`/`equator_edge` are the smoothing
    /// fractions assigned to whichever end lies closer to / farther from the
    /// nearest singular ray (smaller / larger `sin s`).
    fn new(s_lo: f64, s_hi: f64, v0: f64, v1: f64, s0: f64, pole_edge: f64, equator_edge: f64) -> Self {
        let (f_lo, f_hi) = if s_lo.sin() < s_hi.sin() {
            (pole_edge, equator_edge)
        } else {
            (equator_edge, pole_edge)
        };
        let coord = RampCoord::LogLog { s0 };
        let u_lo = coord.jet(s_lo).v;
        let u_hi = coord.jet(s_hi).v;
        Ramp { s_lo, s_hi, u_lo, du: u_hi - u_lo, f_lo, f_hi, v0, v1, coord }
    }

    /// A ramp in the plain coordinate against a constant slope bound:
    /// carries 0 to 1 over `[s_lo, s_hi]` when `rising` (1 to 0 otherwise),
    /// with peak slope `1 / (eff * (s_hi - s_lo))`.  Fails when the bound is
    /// too small for the width: feasibility is `bound * eff * width >= 1`.
    pub fn constant_bound(s_lo: f64, s_hi: f64, rising: bool, edge: f64, bound: f64) -> Result<Ramp> {
        if !(s_lo < s_hi) {
            return Err(Error::InvalidInput(format!("ramp needs s_lo < s_hi, got [{s_lo}, {s_hi}]")));
        }
        if !(edge > 0.0 && edge < 0.5) {
            return Err(Error::InvalidInput(format!("edge fraction {edge} outside (0, 0.5)")));
        }
        let (v0, v1) = if rising { (0.0, 1.0) } else { (1.0, 0.0) };
        let ramp = Ramp {
            s_lo,
            s_hi,
            u_lo: s_lo,
            du: s_hi - s_lo,
            f_lo: edge,
            f_hi: edge,
            v0,
            v1,
            coord: RampCoord::Linear,
        };
        let margin = bound * ramp.eff() * ramp.u_length();
        if !(margin >= 1.0) {
            return Err(Error::CutoffInfeasible(format!(
                "ramp of width {:.6} cannot meet constant slope bound {:.3} (margin {:.4} < 1)",
                s_hi - s_lo,
                bound,
                margin
            )));
        }
        Ok(ramp)
    }

    fn eff(&self) -> f64 {
        1.0 - 0.5 * self.f_lo - 0.5 * self.f_hi
    }

    /// `u`-length of the ramp; the peak slope utilization against an
    /// allowance `A` times the bound shape is `1 / (A * eff * u_length)`.
    fn u_length(&self) -> f64 {
        self.du.abs()
    }

    /// Largest `|d psi / ds|` the ramp attains, over the bound shape
    /// (`|u'(s)|` for stretched ramps, 1 for plain ones).
    pub fn peak_normalized_slope(&self) -> f64 {
        1.0 / (self.eff() * self.u_length())
    }

    /// Value and two derivatives of the ramp at `s` (constant outside
    /// `[s_lo, s_hi]`).
    pub fn jet(&self, s: f64) -> Jet2 {
        if s <= self.s_lo {
            return Jet2::constant(self.v0);
        }
        if s >= self.s_hi {
            return Jet2::constant(self.v1);
        }
        let u = self.coord.jet(s);
        let tau = Jet2 { v: (u.v - self.u_lo) / self.du, d1: u.d1 / self.du, d2: u.d2 / self.du };
        let phi = plateau_ramp_jet(tau.v, self.f_lo, self.f_hi).chain(tau);
        phi.scale(self.v1 - self.v0).add(Jet2::constant(self.v0))
    }
}

/// A C^2 angular bump: identically 0 outside `support`, identically 1 on
/// `plateau`, monotone on the two connecting ramps, with slope controlled
/// pointwise by `allowance * |cot s| / (l L)`.
#[derive(Debug, Clone)]
pub struct Cutoff {
    support: (f64, f64),
    plateau: (f64, f64),
    ramps: [Ramp; 2],
    allowance: f64,
}

impl Cutoff {
    /// Builds the bump, or fails with `CutoffInfeasible` when a ramp is too
    /// short in the stretched coordinate: the constructed peak slope is
    /// `1 / (eff * u_length)` times the bound shape, so the bump exists with
    /// the requested allowance iff `allowance * eff * u_length >= 1` on both
    /// ramps.
    pub fn build(
        support: (f64, f64),
        plateau: (f64, f64),
        s0: f64,
        allowance: f64,
        pole_edge: f64,
        equator_edge: f64,
    ) -> Result<Cutoff> {
        let pi = std::f64::consts::PI;
        if !(0.0 < support.0 && support.0 < plateau.0 && plateau.0 < plateau.1 && plateau.1 < support.1 && support.1 < pi) {
            return Err(Error::InvalidInput(format!(
                "cutoff needs 0 < support.0 < plateau.0 < plateau.1 < support.1 < pi, got support {:?} plateau {:?}",
                support, plateau
            )));
        }
        if !(s0 > 0.0 && s0 <= 0.3) {
            return Err(Error::InvalidInput(format!("cutoff scale s0 = {s0} outside (0, 0.3]")));
        }
        for f in [pole_edge, equator_edge] {
            if !(f > 0.0 && f < 0.5) {
                return Err(Error::InvalidInput(format!("edge fraction {f} outside (0, 0.5)")));
            }
        }
        let ramps = [
            Ramp::new(support.0, plateau.0, 0.0, 1.0, s0, pole_edge, equator_edge),
            Ramp::new(plateau.1, support.1, 1.0, 0.0, s0, pole_edge, equator_edge),
        ];
        for ramp in &ramps {
            let margin = allowance * ramp.eff() * ramp.u_length();
            if !(margin >= 1.0) {
                return Err(Error::CutoffInfeasible(format!(
                    "ramp [{:.6}, {:.6}] has stretched length {:.6}; allowance {:.3} x efficiency {:.3} x length = {:.4} < 1",
                    ramp.s_lo, ramp.s_hi, ramp.u_length(), allowance, ramp.eff(), margin
                )));
            }
        }
        Ok(Cutoff { support, plateau, ramps, allowance })
    }

    /// Interval outside of which the bump vanishes identically.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Interval on which the bump is identically 1.
    pub fn plateau(&self) -> (f64, f64) {
        self.plateau
    }

    /// Slope allowance the bump was built against.
    pub fn allowance(&self) -> f64 {
        self.allowance
    }

    /// Smallest feasibility margin `allowance * eff * u_length` over the two
    /// ramps; `>= 1` by construction, and `1 / margin` is the peak ratio of
    /// `|psi'|` to `allowance` times the bound shape.
    pub fn min_slope_margin(&self) -> f64 {
        self.ramps
            .iter()
            .map(|ramp| self.allowance * ramp.eff() * ramp.u_length())
            .fold(f64::INFINITY, f64::min)
    }

    /// Value and two angular derivatives of the bump at `s`.
    pub fn jet(&self, s: f64) -> Jet2 {
        if s <= self.support.0 || s >= self.support.1 {
            return Jet2::constant(0.0);
        }
        if s >= self.plateau.0 && s <= self.plateau.1 {
            return Jet2::constant(1.0);
        }
        if s < self.plateau.0 {
            self.ramps[0].jet(s)
        } else {
            self.ramps[1].jet(s)
        }
    }
}

/// The rotation angle `theta(r)` steering a circle-valued radial curve.
#[derive(Debug, Clone)]
pub enum AngleCurve {
    /// Constant angle: the fiber exponents do not vary with `r`.
    Constant(f64),
    /// Smootherstep swing from 0 to `amp` across `[lo, hi]`; C^2, constant
    /// outside the window.
    SmoothBump { amp: f64, lo: f64, hi: f64 },
    /// The idealized Holder cusp `theta0 * sign(r - 1) |r - 1|^{(1+delta)/2}`.
    /// C^1 but not C^2 at `r = 1` (the second derivative blows up); used as a
    /// reference target, not inside smooth metrics.
    HolderCusp { theta0: f64, delta: f64 },
    /// Mollified cusp `theta0 * (r - 1) ((r-1)^2 + rho^2)^{(delta-1)/4}`:
    /// smooth everywhere, approaches `HolderCusp` as `rho -> 0`, and obeys
    /// `|theta'| <= theta0 ((r-1)^2 + rho^2)^{(delta-1)/4}` pointwise.
    SmoothedCusp { theta0: f64, delta: f64, rho: f64 },
}

impl AngleCurve {
    /// Value and two radial derivatives of the angle at `r`.
    pub fn jet(&self, r: f64) -> Jet2 {
        match *self {
            AngleCurve::Constant(theta) => Jet2::constant(theta),
            AngleCurve::SmoothBump { amp, lo, hi } => {
                let w = hi - lo;
                let s = smootherstep((r - lo) / w);
                Jet2 { v: amp * s.v, d1: amp * s.d1 / w, d2: amp * s.d2 / (w * w) }
            }
            AngleCurve::HolderCusp { theta0, delta } => {
                let x = r - 1.0;
                let p = 0.5 * (1.0 + delta);
                if x == 0.0 {
                    return Jet2 { v: 0.0, d1: f64::INFINITY, d2: f64::NAN };
                }
                let a = x.abs();
                Jet2 {
                    v: theta0 * x.signum() * a.powf(p),
                    d1: theta0 * p * a.powf(p - 1.0),
                    d2: theta0 * p * (p - 1.0) * x.signum() * a.powf(p - 2.0),
                }
            }
            AngleCurve::SmoothedCusp { theta0, delta, rho } => {
                let x = r - 1.0;
                let q = pow_jet(
                    Jet2 { v: x * x + rho * rho, d1: 2.0 * x, d2: 2.0 },
                    0.25 * (delta - 1.0),
                );
                Jet2 {
                    v: theta0 * x * q.v,
                    d1: theta0 * (q.v + x * q.d1),
                    d2: theta0 * (2.0 * q.d1 + x * q.d2),
                }
            }
        }
    }
}

/// A radial curve on the circle of radius `sqrt(2c/3)` in the trace-free
/// plane: `mu_j(r) = sqrt(2c/3) cos(theta(r) + 2 pi j / 3)`.  Exactly
/// `sum_j mu_j = 0`, `sum_j mu_j^2 = c`, and `sum_j mu_j mu_j' = 0`.
#[derive(Debug, Clone)]
pub struct CircleCurve {
    /// Squared radius budget: `sum_j mu_j^2 = c` identically.
    pub c: f64,
    /// Angle along the circle as a function of `r`.
    pub angle: AngleCurve,
}

impl CircleCurve {
    /// Circle radius `sqrt(2c/3)`, the max of `|mu_j|`.
    pub fn amplitude(&self) -> f64 {
        (2.0 * self.c / 3.0).sqrt()
    }

    /// Value and two radial derivatives of `mu_j(r)` for `j` in `0..3`.
    pub fn mu_jet(&self, j: usize, r: f64) -> Jet2 {
        let theta = self.angle.jet(r);
        let phase = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
        cos_jet(theta.v + phase).chain(theta).scale(self.amplitude())
    }
}

/// One angular band: a cutoff in `s` times a circle curve in `r`.
#[derive(Debug, Clone)]
pub struct Band {
    /// Angular bump selecting where the band is active.
    pub cutoff: Cutoff,
    /// Radial circle curve giving the band's fiber exponents.
    pub circle: CircleCurve,
}

/// Value and all first/second partials of the fiber exponents at a point.
#[derive(Debug, Clone, Copy)]
pub struct FiberJet {
    /// `m_j`.
    pub m: [f64; 3],
    /// `d_r m_j`.
    pub mr: [f64; 3],
    /// `d_s m_j`.
    pub ms: [f64; 3],
    /// `d_rr m_j`.
    pub mrr: [f64; 3],
    /// `d_ss m_j`.
    pub mss: [f64; 3],
    /// `d_rs m_j`.
    pub mrs: [f64; 3],
}

impl FiberJet {
    fn constant(m: [f64; 3]) -> FiberJet {
        FiberJet { m, mr: [0.0; 3], ms: [0.0; 3], mrr: [0.0; 3], mss: [0.0; 3], mrs: [0.0; 3] }
    }
}

/// The full fiber-exponent field `m_j(r, s)`.
#[derive(Debug, Clone)]
pub enum FiberField {
    /// Constant exponents (round or stretched fibers, no (r, s) dependence).
    Constant([f64; 3]),
    /// Sum of disjoint bands, shifted down by the constant `m_bar`:
    /// `m_j = sum_i psi_i(s) mu_{ij}(r) - m_bar`.
    Banded {
        /// Bands with pairwise disjoint cutoff supports.
        bands: Vec<Band>,
        /// Uniform downward shift keeping all exponents negative.
        m_bar: f64,
    },
    /// Band-free field `m_j(r, s) = mu_j(r) - m_bar`, constant in `s`: the
    /// limit the banded members converge to as the cutoffs fill all angles,
    /// and the field whose tangent cones at ray points vary with `r`.
    Circle {
        /// Radial circle curve acting at every angle.
        circle: CircleCurve,
        /// Uniform downward shift keeping all exponents negative.
        m_bar: f64,
    },
}

impl FiberField {
    /// Banded field; fails if two cutoff supports overlap in more than a
    /// point (the product ansatz needs at most one active band per `s`).
    pub fn banded(bands: Vec<Band>, m_bar: f64) -> Result<FiberField> {
        let mut spans: Vec<(f64, f64)> = bands.iter().map(|b| b.cutoff.support()).collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in spans.windows(2) {
            if pair[0].1 > pair[1].0 + 1e-15 {
                return Err(Error::InvalidInput(format!(
                    "band supports {:?} and {:?} overlap",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(FiberField::Banded { bands, m_bar })
    }

    /// True when the field has no (r, s) dependence at all.
    pub fn is_constant(&self) -> bool {
        matches!(self, FiberField::Constant(_))
    }

    /// Exponents and partials at `(r, s)`.
    pub fn eval(&self, r: f64, s: f64) -> FiberJet {
        match self {
            FiberField::Constant(m) => FiberJet::constant(*m),
            FiberField::Banded { bands, m_bar } => {
                let mut out = FiberJet::constant([-m_bar; 3]);
                for band in bands {
                    let (lo, hi) = band.cutoff.support();
                    if s <= lo || s >= hi {
                        continue;
                    }
                    let psi = band.cutoff.jet(s);
                    for j in 0..3 {
                        let mu = band.circle.mu_jet(j, r);
                        out.m[j] += psi.v * mu.v;
                        out.mr[j] += psi.v * mu.d1;
                        out.ms[j] += psi.d1 * mu.v;
                        out.mrr[j] += psi.v * mu.d2;
                        out.mss[j] += psi.d2 * mu.v;
                        out.mrs[j] += psi.d1 * mu.d1;
                    }
                }
                out
            }
            FiberField::Circle { circle, m_bar } => {
                let mut out = FiberJet::constant([-m_bar; 3]);
                for j in 0..3 {
                    let mu = circle.mu_jet(j, r);
                    out.m[j] += mu.v;
                    out.mr[j] = mu.d1;
                    out.mrr[j] = mu.d2;
                }
                out
            }
        }
    }
}
