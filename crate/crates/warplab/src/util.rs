//! Shared numeric helpers: second-order jets, C^2 joint polynomials,
//! quadrature, root bracketing and a tiny stable hash.

/// Value and first two derivatives of a scalar function at a point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    /// f(x)
    pub v: f64,
    /// f'(x)
    pub d1: f64,
    /// f''(x)
    pub d2: f64,
}

impl Jet2 {
    /// Jet of a constant.
    pub fn constant(v: f64) -> Self {
        Jet2 { v, d1: 0.0, d2: 0.0 }
    }

    /// Jet of the identity map at `x`.
    pub fn variable(x: f64) -> Self {
        Jet2 { v: x, d1: 1.0, d2: 0.0 }
    }

    /// Jet of `f + g`.
    pub fn add(self, other: Jet2) -> Jet2 {
        Jet2 { v: self.v + other.v, d1: self.d1 + other.d1, d2: self.d2 + other.d2 }
    }

    /// Jet of `f * g` (Leibniz).
    pub fn mul(self, other: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * other.v,
            d1: self.d1 * other.v + self.v * other.d1,
            d2: self.d2 * other.v + 2.0 * self.d1 * other.d1 + self.v * other.d2,
        }
    }

    /// Jet of `c * f`.
    pub fn scale(self, c: f64) -> Jet2 {
        Jet2 { v: c * self.v, d1: c * self.d1, d2: c * self.d2 }
    }

    /// Jet of `f(g(x))` where `self` is the jet of `f` at `g.v` and `inner`
    /// the jet of `g` at `x`.
    pub fn chain(self, inner: Jet2) -> Jet2 {
        Jet2 {
            v: self.v,
            d1: self.d1 * inner.d1,
            d2: self.d2 * inner.d1 * inner.d1 + self.d1 * inner.d2,
        }
    }
}

/// Jet of `sin` at `x`.
pub fn sin_jet(x: f64) -> Jet2 {
    Jet2 { v: x.sin(), d1: x.cos(), d2: -x.sin() }
}

/// Jet of `cos` at `x`.
pub fn cos_jet(x: f64) -> Jet2 {
    Jet2 { v: x.cos(), d1: -x.sin(), d2: -x.cos() }
}

/// Jet of `exp` at `x`.
pub fn exp_jet(x: f64) -> Jet2 {
    let e = x.exp();
    Jet2 { v: e, d1: e, d2: e }
}

/// Jet of `ln(f)` given the jet of a positive `f`.
pub fn ln_jet(inner: Jet2) -> Jet2 {
    let q = inner.d1 / inner.v;
    Jet2 { v: inner.v.ln(), d1: q, d2: inner.d2 / inner.v - q * q }
}

/// Jet of `f^e` given the jet of a positive `f`.
pub fn pow_jet(inner: Jet2, e: f64) -> Jet2 {
    let p = inner.v.powf(e);
    let p1 = e * inner.v.powf(e - 1.0);
    let p2 = e * (e - 1.0) * inner.v.powf(e - 2.0);
    Jet2 { v: p, d1: p1 * inner.d1, d2: p2 * inner.d1 * inner.d1 + p1 * inner.d2 }
}

/// Jet of the clamped smootherstep `S(x) = 6x^5 - 15x^4 + 10x^3` on [0,1].
///
/// `S` is C^2 across the clamps: S' and S'' vanish at both ends.
pub fn smootherstep(x: f64) -> Jet2 {
    if x <= 0.0 {
        Jet2::constant(0.0)
    } else if x >= 1.0 {
        Jet2::constant(1.0)
    } else {
        let x2 = x * x;
        let x3 = x2 * x;
        Jet2 {
            v: x3 * (6.0 * x2 - 15.0 * x + 10.0),
            d1: 30.0 * x2 * (x - 1.0) * (x - 1.0),
            d2: 60.0 * x * (x - 1.0) * (2.0 * x - 1.0),
        }
    }
}

/// C^2 window that rises 0 -> 1 on [lo, lo+edge], holds 1 on
/// [lo+edge, hi-edge] and falls back to 0 on [hi-edge, hi].
pub fn window_jet(x: f64, lo: f64, hi: f64, edge: f64) -> Jet2 {
    assert!(hi - lo > 2.0 * edge && edge > 0.0, "window needs room for both edges");
    if x <= lo || x >= hi {
        return Jet2::constant(0.0);
    }
    if x < lo + edge {
        let t = smootherstep((x - lo) / edge);
        Jet2 { v: t.v, d1: t.d1 / edge, d2: t.d2 / (edge * edge) }
    } else if x > hi - edge {
        let t = smootherstep((hi - x) / edge);
        Jet2 { v: t.v, d1: -t.d1 / edge, d2: t.d2 / (edge * edge) }
    } else {
        Jet2::constant(1.0)
    }
}

/// Quintic Hermite joint on `[x0, x1]` matching value, slope and curvature of
/// two branches at its endpoints. Used to splice exact profile branches into
/// a single C^2 function; outside the window callers keep the exact branches.
#[derive(Clone, Copy, Debug)]
pub struct QuinticJoint {
    x0: f64,
    h: f64,
    /// Polynomial coefficients in the normalized variable t = (x-x0)/h.
    coef: [f64; 6],
}

impl QuinticJoint {
    /// Build the unique quintic with jets `left` at `x0` and `right` at `x1`.
    pub fn new(x0: f64, left: Jet2, x1: f64, right: Jet2) -> Self {
        assert!(x1 > x0, "joint window must have positive width");
        let h = x1 - x0;
        let (v0, v1) = (left.v, right.v);
        let (s0, s1) = (left.d1 * h, right.d1 * h);
        let (c0, c1) = (left.d2 * h * h, right.d2 * h * h);
        let dv = v1 - v0;
        let coef = [
            v0,
            s0,
            0.5 * c0,
            10.0 * dv - 6.0 * s0 - 4.0 * s1 - 1.5 * c0 + 0.5 * c1,
            -15.0 * dv + 8.0 * s0 + 7.0 * s1 + 1.5 * c0 - c1,
            6.0 * dv - 3.0 * s0 - 3.0 * s1 - 0.5 * c0 + 0.5 * c1,
        ];
        QuinticJoint { x0, h, coef }
    }

    /// Window bounds `(x0, x1)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.x0, self.x0 + self.h)
    }

    /// Evaluate the joint jet at `x` (valid inside the window).
    pub fn jet(&self, x: f64) -> Jet2 {
        let t = (x - self.x0) / self.h;
        let c = &self.coef;
        let v = ((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
        let d1 = (((5.0 * c[5] * t + 4.0 * c[4]) * t + 3.0 * c[3]) * t + 2.0 * c[2]) * t + c[1];
        let d2 = ((20.0 * c[5] * t + 12.0 * c[4]) * t + 6.0 * c[3]) * t + 2.0 * c[2];
        Jet2 { v, d1: d1 / self.h, d2: d2 / (self.h * self.h) }
    }
}

/// Even quartic cap `A + B x^2 + C x^4` on `|x| <= w`, matching value, slope
/// and curvature of an even function at `x = w`. Caps a symmetric cusp
/// (e.g. `2 - |x|^{1+delta}`) with a concave C^2 core.
#[derive(Clone, Copy, Debug)]
pub struct EvenQuarticCap {
    w: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl EvenQuarticCap {
    /// Build from the half-width `w` and the jet of the outer branch at `+w`.
    pub fn new(w: f64, edge: Jet2) -> Self {
        assert!(w > 0.0);
        let c = (edge.d2 - edge.d1 / w) / (8.0 * w * w);
        let b = edge.d1 / (2.0 * w) - 2.0 * c * w * w;
        let a = edge.v - b * w * w - c * w * w * w * w;
        EvenQuarticCap { w, a, b, c }
    }

    /// Half-width of the cap window.
    pub fn half_width(&self) -> f64 {
        self.w
    }

    /// Evaluate the cap jet at signed offset `x` from the center.
    pub fn jet(&self, x: f64) -> Jet2 {
        let x2 = x * x;
        Jet2 {
            v: self.a + self.b * x2 + self.c * x2 * x2,
            d1: 2.0 * self.b * x + 4.0 * self.c * x2 * x,
            d2: 2.0 * self.b + 12.0 * self.c * x2,
        }
    }
}

/// 8-point Gauss-Legendre nodes on [-1, 1].
pub const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

/// 8-point Gauss-Legendre weights on [-1, 1].
pub const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Integrate `f` over `[lo, hi]` with composite 8-point Gauss-Legendre on
/// `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    assert!(panels > 0 && hi >= lo);
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Find a root of `f` on `[lo, hi]` by bisection. Panics unless
/// `f(lo)` and `f(hi)` have opposite signs.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo), f(hi));
    assert!(
        flo * fhi <= 0.0,
        "bisect: no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
    );
    let rising = fhi >= flo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm >= 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// FNV-1a 64-bit hash; stable across platforms and toolchain versions, used
/// for input fingerprints in run manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Standard normal sample via Box-Muller from two uniform draws.
pub fn sample_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        if u1 > f64::MIN_POSITIVE {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_and_pow_jets_match_finite_differences() {
        let h = 1e-5;
        let f = |x: f64| Jet2 { v: 2.0 + x.sin(), d1: x.cos(), d2: -x.sin() };
        for x in [0.3f64, 1.1, 2.4] {
            let jl = ln_jet(f(x));
            let (lm, lp) = (f(x - h).v.ln(), f(x + h).v.ln());
            assert!((jl.d1 - (lp - lm) / (2.0 * h)).abs() < 1e-7);
            assert!((jl.d2 - (lp - 2.0 * jl.v + lm) / (h * h)).abs() < 1e-4);

            let jp = pow_jet(f(x), -1.7);
            let (pm, pp) = (f(x - h).v.powf(-1.7), f(x + h).v.powf(-1.7));
            assert!((jp.d1 - (pp - pm) / (2.0 * h)).abs() < 1e-6);
            assert!((jp.d2 - (pp - 2.0 * jp.v + pm) / (h * h)).abs() < 1e-3);
        }
    }

    #[test]
    fn smootherstep_is_c2_at_clamps() {
        for eps in [1e-9, 1e-6] {
            let lo = smootherstep(eps);
            assert!(lo.v < 1e-5 && lo.d1 < 1e-3 && lo.d2 < 1.0);
            let hi = smootherstep(1.0 - eps);
            assert!((hi.v - 1.0).abs() < 1e-5 && hi.d1 < 1e-3 && hi.d2.abs() < 1.0);
        }
        assert_eq!(smootherstep(0.5).v, 0.5);
    }

    #[test]
    fn quintic_joint_matches_end_jets() {
        let left = Jet2 { v: 1.0, d1: -0.3, d2: 0.7 };
        let right = Jet2 { v: 2.0, d1: 0.9, d2: -1.1 };
        let j = QuinticJoint::new(2.0, left, 2.5, right);
        let jl = j.jet(2.0);
        let jr = j.jet(2.5);
        for (got, want) in [
            (jl.v, left.v),
            (jl.d1, left.d1),
            (jl.d2, left.d2),
            (jr.v, right.v),
            (jr.d1, right.d1),
            (jr.d2, right.d2),
        ] {
            assert!((got - want).abs() < 1e-12, "jet mismatch: {got} vs {want}");
        }
    }

    #[test]
    fn quintic_joint_jets_consistent_with_fd() {
        let left = Jet2 { v: 0.2, d1: 1.0, d2: 0.0 };
        let right = Jet2 { v: 0.5, d1: 0.4, d2: -2.0 };
        let j = QuinticJoint::new(0.0, left, 1.0, right);
        let h = 1e-5;
        for x in [0.21, 0.5, 0.83] {
            let c = j.jet(x);
            let fd1 = (j.jet(x + h).v - j.jet(x - h).v) / (2.0 * h);
            let fd2 = (j.jet(x + h).v - 2.0 * c.v + j.jet(x - h).v) / (h * h);
            assert!((c.d1 - fd1).abs() < 1e-8);
            assert!((c.d2 - fd2).abs() < 1e-4);
        }
    }

    #[test]
    fn even_cap_matches_edge_and_stays_concave() {
        // Outer branch 2 - |x|^{1.2} at w = 1e-3.
        let w: f64 = 1e-3;
        let delta = 0.2;
        let edge = Jet2 {
            v: 2.0 - w.powf(1.0 + delta),
            d1: -(1.0 + delta) * w.powf(delta),
            d2: -(1.0 + delta) * delta * w.powf(delta - 1.0),
        };
        let cap = EvenQuarticCap::new(w, edge);
        let j = cap.jet(w);
        assert!((j.v - edge.v).abs() < 1e-12);
        assert!((j.d1 - edge.d1).abs() < 1e-9);
        assert!((j.d2 - edge.d2).abs() / edge.d2.abs() < 1e-9);
        // Concave across the cap, minimum curvature magnitude at the edge.
        for k in 0..=20 {
            let x = w * (k as f64 / 20.0);
            assert!(cap.jet(x).d2 <= edge.d2 * 0.99);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        // Degree 15 is exact for 8-point Gauss-Legendre.
        let f = |x: f64| 3.0 * x.powi(15) - 2.0 * x.powi(7) + x * x + 1.0;
        let got = integrate(f, -1.0, 2.0, 1);
        let exact = |x: f64| 3.0 / 16.0 * x.powi(16) - 0.25 * x.powi(8) + x * x * x / 3.0 + x;
        assert!((got - (exact(2.0) - exact(-1.0))).abs() < 1e-10);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13);
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fnv_matches_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
