//! The doubly warped cone metrics and their coordinate charts.
//!
//! Every space in the laboratory is a metric of the form
//! `g = dr^2 + a(r)^2 (ds^2 + b(s)^2 g_fib(r, s))` on
//! `(0, inf) x (0, pi) x S^3`, where the fiber metric
//! `g_fib = sum_j e^{2 m_j(r, s)} sigma_j^2` is diagonal in the
//! right-invariant coframe of the unit quaternions.  The chart degenerates on
//! the two rays `s = 0` and `s = pi`; evaluation there is a domain error.

use crate::fiber::{FiberField, FiberJet};
use crate::profiles::{AngularProfile, RadialProfile};
use crate::quat::{chart_frame_coeffs, Quat};
use crate::util::Jet2;
use crate::{Error, Result};

/// A point of the cone in chart coordinates: radius `r > 0`, suspension
/// angle `s` strictly between 0 and pi, and a unit quaternion `xi`.
#[derive(Debug, Clone, Copy)]
pub struct ConePoint {
    /// Cone radius.
    pub r: f64,
    /// Suspension angle in `(0, pi)`.
    pub s: f64,
    /// Fiber position.
    pub xi: Quat,
}

impl ConePoint {
    /// Point with the identity fiber position.
    pub fn axis(r: f64, s: f64) -> ConePoint {
        ConePoint { r, s, xi: crate::quat::IDENTITY }
    }
}

/// Warp data at `(r, s)`: radial jet of `a`, angular jet of `b`, and the
/// fiber exponents with their partials.
#[derive(Debug, Clone, Copy)]
pub struct WarpJets {
    /// `(a, a', a'')` at `r`.
    pub a: Jet2,
    /// `(b, b_s, b_ss)` at `s`.
    pub b: Jet2,
    /// `m_j` and partials at `(r, s)`.
    pub m: FiberJet,
}

/// A doubly warped cone metric assembled from three profile layers.
#[derive(Debug, Clone)]
pub struct WarpedMetric {
    /// Radial warp `a(r)`.
    pub radial: RadialProfile,
    /// Angular warp `b(s)`.
    pub angular: AngularProfile,
    /// Fiber exponents `m_j(r, s)`.
    pub fiber: FiberField,
    /// Label used in reports and output manifests.
    pub name: String,
}

impl WarpedMetric {
    fn check_domain(&self, r: f64, s: f64) -> Result<()> {
        if !(r > 0.0) || !(s > 0.0 && s < std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!(
                "point (r, s) = ({r}, {s}) outside the chart domain r > 0, 0 < s < pi"
            )));
        }
        Ok(())
    }

    /// All warp jets at `(r, s)`.
    pub fn warp_jets(&self, r: f64, s: f64) -> Result<WarpJets> {
        self.check_domain(r, s)?;
        Ok(WarpJets { a: self.radial.jet(r), b: self.angular.jet(s), m: self.fiber.eval(r, s) })
    }

    /// Diagonal metric coefficients `(1, a^2, a^2 b^2 e^{2 m_j})` in the
    /// orthogonal frame `(d_r, d_s, V_1, V_2, V_3)`.
    pub fn frame_metric(&self, r: f64, s: f64) -> Result<[f64; 5]> {
        let w = self.warp_jets(r, s)?;
        let a2 = w.a.v * w.a.v;
        let ab2 = a2 * w.b.v * w.b.v;
        Ok([
            1.0,
            a2,
            ab2 * (2.0 * w.m.m[0]).exp(),
            ab2 * (2.0 * w.m.m[1]).exp(),
            ab2 * (2.0 * w.m.m[2]).exp(),
        ])
    }

    /// Metric tensor at `p` as a symmetric 5x5 matrix in the frame
    /// `(d_r, d_s, V_1, V_2, V_3)`; diagonal by construction.
    pub fn eval_metric(&self, p: &ConePoint) -> Result<[[f64; 5]; 5]> {
        let d = self.frame_metric(p.r, p.s)?;
        let mut g = [[0.0; 5]; 5];
        for i in 0..5 {
            g[i][i] = d[i];
        }
        Ok(g)
    }

    /// Squared length of a tangent vector with components
    /// `(v_r, v_s, w_1, w_2, w_3)` in the orthogonal frame at `(r, s)`.
    pub fn qform(&self, r: f64, s: f64, v: &[f64; 5]) -> Result<f64> {
        let d = self.frame_metric(r, s)?;
        Ok((0..5).map(|i| d[i] * v[i] * v[i]).sum())
    }

    /// Metric components in the full coordinate chart
    /// `x = (r, s, u_1, u_2, u_3)`, where `u` is the exponential fiber chart
    /// `xi(u) = exp_pure(u) xi0` around an arbitrary base fiber point.  The
    /// result does not depend on the base point.  Used by finite-difference
    /// curvature checks; out-of-domain `x` yields NaN entries rather than an
    /// error.
    pub fn chart_metric(&self, x: &[f64; 5]) -> [[f64; 5]; 5] {
        let (r, s) = (x[0], x[1]);
        let a = self.radial.jet(r).v;
        let b = self.angular.jet(s).v;
        let m = self.fiber.eval(r, s).m;
        let scale = a * a * b * b;
        let c = chart_frame_coeffs([x[2], x[3], x[4]]);
        let mut g = [[0.0; 5]; 5];
        g[0][0] = 1.0;
        g[1][1] = a * a;
        for p in 0..3 {
            for q in p..3 {
                let mut acc = 0.0;
                for j in 0..3 {
                    acc += (2.0 * m[j]).exp() * c[p][j] * c[q][j];
                }
                g[2 + p][2 + q] = scale * acc;
                g[2 + q][2 + p] = scale * acc;
            }
        }
        g
    }
}
