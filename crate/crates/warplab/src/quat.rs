//! Unit quaternions as points of the fiber `S^3`, with the exponential chart
//! and the frame coefficients needed to express chart coordinate vectors in
//! the right-invariant basis.
//!
//! Conventions: `S^3` is the group of unit quaternions; the right-invariant
//! frame is `V_j(xi) = e_j * xi` with `e_1 = i, e_2 = j, e_3 = k`, so
//! `[V_a, V_b] = -2 eps_{abc} V_c`. The fiber metric is diagonal in this
//! frame: `<V_j, V_k> = e^{2 m_j} delta_{jk}`.

use rand::Rng;

/// Quaternion `w + x i + y j + z k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The identity quaternion.
pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

impl Quat {
    /// Quaternion from scalar and vector parts.
    pub fn new(w: f64, v: [f64; 3]) -> Self {
        Quat { w, x: v[0], y: v[1], z: v[2] }
    }

    /// Vector (imaginary) part.
    pub fn vector(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Hamilton product `self * rhs`.
    pub fn mul(&self, rhs: &Quat) -> Quat {
        Quat {
            w: self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            x: self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            y: self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            z: self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        }
    }

    /// Conjugate (inverse for unit quaternions).
    pub fn conj(&self) -> Quat {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Euclidean norm in R^4.
    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Rescale to unit norm.
    pub fn normalized(&self) -> Quat {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero quaternion");
        Quat { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    /// Group exponential of the pure-imaginary quaternion with vector `v`.
    pub fn exp_pure(v: [f64; 3]) -> Quat {
        let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let s = sinc(theta);
        Quat { w: theta.cos(), x: s * v[0], y: s * v[1], z: s * v[2] }
    }

    /// Group logarithm of a unit quaternion: the vector `v` with
    /// `exp_pure(v) = self` and `|v| <= pi`.
    pub fn log_unit(&self) -> [f64; 3] {
        let vn = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        let theta = vn.atan2(self.w.max(-1.0).min(1.0));
        if vn < 1e-300 {
            // Either identity or the antipode -1; the antipode log is any
            // direction of length pi, pick the i-axis deterministically.
            if self.w < 0.0 {
                return [std::f64::consts::PI, 0.0, 0.0];
            }
            return [0.0, 0.0, 0.0];
        }
        let scale = theta / vn;
        [scale * self.x, scale * self.y, scale * self.z]
    }

    /// Geodesic distance to `rhs` on the unit round `S^3` (angle in R^4).
    pub fn round_distance(&self, rhs: &Quat) -> f64 {
        let dot = self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z;
        dot.max(-1.0).min(1.0).acos()
    }

    /// Haar-uniform unit quaternion from four normal draws.
    pub fn haar<R: Rng>(rng: &mut R) -> Quat {
        loop {
            let q = Quat {
                w: crate::util::sample_normal(rng),
                x: crate::util::sample_normal(rng),
                y: crate::util::sample_normal(rng),
                z: crate::util::sample_normal(rng),
            };
            if q.norm() > 1e-6 {
                return q.normalized();
            }
        }
    }
}

/// `sin(t)/t`, series-stabilized near zero.
pub fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-2 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0
    } else {
        t.sin() / t
    }
}

/// Frame coefficients of the exponential fiber chart.
///
/// For `xi(u) = exp_pure(u) * xi0` the chart vector fields decompose in the
/// right-invariant frame as `d xi / d u_a = sum_j c[a][j] V_j(xi(u))`, with
/// `c[a][j] = delta_{aj}` at `u = 0`. Explicitly, with `theta = |u|`:
///
/// ```text
/// c_a = f3(theta) u_a u + f1(theta) e_a - f2(theta) (e_a x u)
/// f1 = sin(2 theta) / (2 theta)
/// f2 = (sin theta / theta)^2
/// f3 = (2 theta - sin 2 theta) / (2 theta^3)
/// ```
pub fn chart_frame_coeffs(u: [f64; 3]) -> [[f64; 3]; 3] {
    let theta2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    let theta = theta2.sqrt();
    let (f1, f2, f3) = if theta < 1e-2 {
        // Series with relative error ~ theta^6.
        let t2 = theta2;
        (
            1.0 - 2.0 * t2 / 3.0 + 2.0 * t2 * t2 / 15.0 - 4.0 * t2 * t2 * t2 / 315.0,
            1.0 - t2 / 3.0 + 2.0 * t2 * t2 / 45.0 - t2 * t2 * t2 / 315.0,
            2.0 / 3.0 - 2.0 * t2 / 15.0 + 4.0 * t2 * t2 / 315.0 - 2.0 * t2 * t2 * t2 / 2835.0,
        )
    } else {
        let s2t = (2.0 * theta).sin();
        (
            s2t / (2.0 * theta),
            (theta.sin() / theta).powi(2),
            (2.0 * theta - s2t) / (2.0 * theta2 * theta),
        )
    };
    let mut c = [[0.0; 3]; 3];
    for a in 0..3 {
        let mut e_cross_u = [0.0; 3];
        // e_a x u with (e_a)_i = delta_{ai}.
        e_cross_u[(a + 1) % 3] = -u[(a + 2) % 3];
        e_cross_u[(a + 2) % 3] = u[(a + 1) % 3];
        for j in 0..3 {
            c[a][j] = f3 * u[a] * u[j] - f2 * e_cross_u[j];
            if a == j {
                c[a][j] += f1;
            }
        }
    }
    c
}
