//! Ricci curvature of the warped metrics: exact diagonal formulas, an
//! independent finite-difference oracle, grid minimization, and hypothesis
//! reports.
//!
//! The closed-form components below assume the structural constraints that
//! the banded fiber fields satisfy exactly: `sum_j m_j` constant and
//! `sum_j (d_r m_j)(d_s m_j) = 0`.  Under those constraints the Ricci tensor
//! is diagonal in the frame `(d_r, d_s, V_1, V_2, V_3)`.  The oracle computes
//! the full tensor from finite differences of the chart metric with no
//! knowledge of the formulas, so the two paths cross-validate each other.

use crate::fiber::FiberField;
use crate::metric::{ConePoint, WarpedMetric};
use crate::{Error, Result};

/// Diagonal Ricci components in the frame `(d_r, d_s, V_1, V_2, V_3)`, as
/// a (0,2)-tensor (not normalized by the metric).
#[derive(Debug, Clone, Copy)]
pub struct RicciDiagonal {
    /// `Ric(d_r, d_r)`.
    pub ric_rr: f64,
    /// `Ric(d_s, d_s)`.
    pub ric_ss: f64,
    /// `Ric(V_j, V_j)` for `j = 0, 1, 2`.
    pub ric_jj: [f64; 3],
}

impl RicciDiagonal {
    /// Frobenius norm of the diagonal.
    pub fn norm(&self) -> f64 {
        (self.ric_rr * self.ric_rr
            + self.ric_ss * self.ric_ss
            + self.ric_jj.iter().map(|x| x * x).sum::<f64>())
        .sqrt()
    }
}

/// Intrinsic Ricci (0,2)-components of a left-diagonal metric
/// `sum_j A_j sigma_j^2` on the 3-sphere, from the structure constants
/// `[V_a, V_b] = -2 eps_{abc} V_c` via the Koszul formula.  Scale-invariant
/// in `A`; the round case `A = (1,1,1)` returns `(2,2,2)`.
pub fn fiber_intrinsic_ricci(amp: [f64; 3]) -> [f64; 3] {
    let eps = |a: usize, b: usize, c: usize| -> f64 {
        if (a, b, c) == (0, 1, 2) || (a, b, c) == (1, 2, 0) || (a, b, c) == (2, 0, 1) {
            1.0
        } else if (a, b, c) == (0, 2, 1) || (a, b, c) == (2, 1, 0) || (a, b, c) == (1, 0, 2) {
            -1.0
        } else {
            0.0
        }
    };
    // C^c_{ab} and Gamma^c_{ab} = eps_{abc} (A_a - A_b - A_c) / A_c.
    let c = |a: usize, b: usize, k: usize| -2.0 * eps(a, b, k);
    let gamma = |a: usize, b: usize, k: usize| eps(a, b, k) * (amp[a] - amp[b] - amp[k]) / amp[k];
    let mut ric = [0.0; 3];
    for b in 0..3 {
        let mut acc = 0.0;
        for a in 0..3 {
            for e in 0..3 {
                // Sum over the curvature contraction in a frame with constant
                // structure functions: gamma^e_bb gamma^a_ae - gamma^e_ab
                // gamma^a_be - C^e_ab gamma^a_eb.
                acc += gamma(b, b, e) * gamma(a, e, a)
                    - gamma(a, b, e) * gamma(b, e, a)
                    - c(a, b, e) * gamma(e, b, a);
            }
        }
        ric[b] = acc;
    }
    ric
}

/// Exact diagonal Ricci components at `(r, s)` from the warp jets.
pub fn ricci_closed_form(w: &WarpedMetric, r: f64, s: f64) -> Result<RicciDiagonal> {
    let wj = w.warp_jets(r, s)?;
    let (a, b, m) = (wj.a, wj.b, wj.m);
    let sum_mr2: f64 = m.mr.iter().map(|x| x * x).sum();
    let sum_ms2: f64 = m.ms.iter().map(|x| x * x).sum();
    let ric_rr = -4.0 * a.d2 / a.v - sum_mr2;
    let ric_ss = -3.0 * b.d2 / b.v - sum_ms2 - a.v * a.d2 - 3.0 * a.d1 * a.d1;
    let amp = [(2.0 * m.m[0]).exp(), (2.0 * m.m[1]).exp(), (2.0 * m.m[2]).exp()];
    let intrinsic = fiber_intrinsic_ricci(amp);
    let (b2, a2b2) = (b.v * b.v, a.v * a.v * b.v * b.v);
    let mut ric_jj = [0.0; 3];
    for j in 0..3 {
        let angular_block = b2
            * (-b.d2 / b.v - 2.0 * (b.d1 / b.v) * (b.d1 / b.v)
                - 3.0 * (b.d1 / b.v) * m.ms[j]
                - m.mss[j]);
        let radial_block = a2b2
            * (-a.d2 / a.v - 3.0 * (a.d1 / a.v) * (a.d1 / a.v)
                - 4.0 * (a.d1 / a.v) * m.mr[j]
                - m.mrr[j]);
        ric_jj[j] = intrinsic[j] + amp[j] * (angular_block + radial_block);
    }
    Ok(RicciDiagonal { ric_rr, ric_ss, ric_jj })
}

fn invert5(a: &[[f64; 5]; 5]) -> Option<[[f64; 5]; 5]> {
    let mut m = *a;
    let mut inv = [[0.0; 5]; 5];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..5 {
        let pivot = (col..5).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for k in 0..5 {
            m[col][k] /= d;
            inv[col][k] /= d;
        }
        for row in 0..5 {
            if row != col {
                let f = m[row][col];
                if f != 0.0 {
                    for k in 0..5 {
                        m[row][k] -= f * m[col][k];
                        inv[row][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// One finite-difference Ricci evaluation with step `h` (no Richardson).
fn ricci_fd(w: &WarpedMetric, x0: &[f64; 5], h: f64) -> Result<[[f64; 5]; 5]> {
    let at = |dx: [f64; 5]| {
        let mut x = *x0;
        for i in 0..5 {
            x[i] += dx[i];
        }
        w.chart_metric(&x)
    };
    let g0 = at([0.0; 5]);
    let ginv = invert5(&g0)
        .ok_or_else(|| Error::SolverFailed("chart metric is singular at the base point".into()))?;

    // First and second coordinate derivatives of the metric by central
    // differences.
    let mut gp = [[[0.0; 5]; 5]; 5];
    let mut gm = [[[0.0; 5]; 5]; 5];
    for k in 0..5 {
        let mut dx = [0.0; 5];
        dx[k] = h;
        gp[k] = at(dx);
        dx[k] = -h;
        gm[k] = at(dx);
    }
    let mut dg = [[[0.0; 5]; 5]; 5]; // dg[k][i][j] = d_k g_ij
    let mut ddg = [[[[0.0; 5]; 5]; 5]; 5]; // ddg[k][l][i][j] = d_k d_l g_ij
    for k in 0..5 {
        for i in 0..5 {
            for j in 0..5 {
                dg[k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * h);
                ddg[k][k][i][j] = (gp[k][i][j] - 2.0 * g0[i][j] + gm[k][i][j]) / (h * h);
            }
        }
    }
    for k in 0..5 {
        for l in (k + 1)..5 {
            let mut dx = [0.0; 5];
            dx[k] = h;
            dx[l] = h;
            let gpp = at(dx);
            dx[l] = -h;
            let gpm = at(dx);
            dx[k] = -h;
            dx[l] = h;
            let gmp = at(dx);
            dx[l] = -h;
            let gmm = at(dx);
            for i in 0..5 {
                for j in 0..5 {
                    let v = (gpp[i][j] - gpm[i][j] - gmp[i][j] + gmm[i][j]) / (4.0 * h * h);
                    ddg[k][l][i][j] = v;
                    ddg[l][k][i][j] = v;
                }
            }
        }
    }

    // Inverse-metric derivative: d_k g^{-1} = -g^{-1} (d_k g) g^{-1}.
    let mut dginv = [[[0.0; 5]; 5]; 5];
    for k in 0..5 {
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for p in 0..5 {
                    for q in 0..5 {
                        acc -= ginv[i][p] * dg[k][p][q] * ginv[q][j];
                    }
                }
                dginv[k][i][j] = acc;
            }
        }
    }

    // Christoffel symbols and their coordinate derivatives.
    let mut gam = [[[0.0; 5]; 5]; 5]; // gam[l][i][j] = Gamma^l_ij
    let mut dgam = [[[[0.0; 5]; 5]; 5]; 5]; // dgam[m][l][i][j] = d_m Gamma^l_ij
    for l in 0..5 {
        for i in 0..5 {
            for j in 0..5 {
                let mut acc = 0.0;
                for k in 0..5 {
                    acc += ginv[l][k] * (dg[i][j][k] + dg[j][i][k] - dg[k][i][j]);
                }
                gam[l][i][j] = 0.5 * acc;
                for m in 0..5 {
                    let mut d = 0.0;
                    for k in 0..5 {
                        d += dginv[m][l][k] * (dg[i][j][k] + dg[j][i][k] - dg[k][i][j])
                            + ginv[l][k]
                                * (ddg[m][i][j][k] + ddg[m][j][i][k] - ddg[m][k][i][j]);
                    }
                    dgam[m][l][i][j] = 0.5 * d;
                }
            }
        }
    }

    // Ric_ij = d_m Gamma^m_ij - d_j Gamma^m_mi + Gamma^m_ml Gamma^l_ij
    //          - Gamma^m_jl Gamma^l_mi.
    let mut ric = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            let mut acc = 0.0;
            for m in 0..5 {
                acc += dgam[m][m][i][j] - dgam[j][m][m][i];
                for l in 0..5 {
                    acc += gam[m][m][l] * gam[l][i][j] - gam[m][j][l] * gam[l][m][i];
                }
            }
            ric[i][j] = acc;
        }
    }
    Ok(ric)
}

/// Full Ricci tensor at `p` in the chart `(r, s, u_1, u_2, u_3)` centered on
/// `p`, by nested central differences of the chart metric with Richardson
/// extrapolation from steps `h` and `h/2`.
///
/// The chart coordinate vectors at the center coincide with the orthogonal
/// frame `(d_r, d_s, V_1, V_2, V_3)`, so the result is directly comparable
/// with `ricci_closed_form`; on any Ricci-flat space the output vanishes to
/// finite-difference accuracy.  `h` must stay small against the smallest
/// profile feature near `p` and against the distance from `p` to the
/// singular rays.
pub fn ricci_oracle(w: &WarpedMetric, p: &ConePoint, h: f64) -> Result<[[f64; 5]; 5]> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step h = {h} must be > 0")));
    }
    w.eval_metric(p)?;
    let x0 = [p.r, p.s, 0.0, 0.0, 0.0];
    let coarse = ricci_fd(w, &x0, h)?;
    let fine = ricci_fd(w, &x0, 0.5 * h)?;
    let mut out = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            out[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
        }
    }
    Ok(out)
}

/// Evaluation grid in `(r, s)`, uniform with optional extra angular samples.
#[derive(Debug, Clone)]
pub struct CurvatureGrid {
    /// Radial samples, ascending.
    pub r: Vec<f64>,
    /// Angular samples, ascending, inside `(0, pi)`.
    pub s: Vec<f64>,
}

impl CurvatureGrid {
    /// Uniform grid: `nr` radii across `r_range`, `ns` angles across
    /// `[s_margin, pi - s_margin]`.
    pub fn uniform(r_range: (f64, f64), nr: usize, s_margin: f64, ns: usize) -> CurvatureGrid {
        let lerp = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64).collect()
        };
        CurvatureGrid {
            r: lerp(r_range.0, r_range.1, nr),
            s: lerp(s_margin, std::f64::consts::PI - s_margin, ns),
        }
    }

    /// Adds angular samples (e.g. dense coverage of cutoff ramps), keeping
    /// the list sorted and deduplicated.
    pub fn refine_s(mut self, extra: impl IntoIterator<Item = f64>) -> CurvatureGrid {
        self.s.extend(extra);
        self.s.retain(|&s| s > 0.0 && s < std::f64::consts::PI);
        self.s.sort_by(f64::total_cmp);
        self.s.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        self
    }

    /// Dense angular coverage of a cutoff band: `n` points per ramp plus the
    /// plateau edges.
    pub fn band_samples(support: (f64, f64), plateau: (f64, f64), n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * n + 2);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            out.push(support.0 + (plateau.0 - support.0) * t);
            out.push(plateau.1 + (support.1 - plateau.1) * t);
        }
        out
    }
}

/// Result of minimizing normalized Ricci over a grid.
#[derive(Debug, Clone)]
pub struct MinRicci {
    /// Smallest normalized eigenvalue `Ric_ii / g_ii` found.
    pub value: f64,
    /// Radius where the minimum occurs.
    pub r: f64,
    /// Angle where the minimum occurs.
    pub s: f64,
    /// Which frame direction realized the minimum.
    pub component: &'static str,
}

const COMPONENT_NAMES: [&str; 5] = ["rr", "ss", "fiber-1", "fiber-2", "fiber-3"];

/// Minimum over the grid of the Ricci quadratic form normalized by the
/// metric, i.e. the smallest eigenvalue of `Ric` relative to `g`.  Grid
/// points where the metric degenerates (a warp factor vanishes or turns
/// negative) report `-inf`.
pub fn min_ricci_eigenvalue(w: &WarpedMetric, grid: &CurvatureGrid) -> Result<MinRicci> {
    let mut best = MinRicci { value: f64::INFINITY, r: f64::NAN, s: f64::NAN, component: "none" };
    for &r in &grid.r {
        for &s in &grid.s {
            let d = w.frame_metric(r, s)?;
            let ric = ricci_closed_form(w, r, s)?;
            let eigs = [ric.ric_rr, ric.ric_ss / d[1], ric.ric_jj[0] / d[2], ric.ric_jj[1] / d[3], ric.ric_jj[2] / d[4]];
            for (i, &e) in eigs.iter().enumerate() {
                let e = if d[i].is_finite() && d[i] > 0.0 && e.is_finite() { e } else { f64::NEG_INFINITY };
                if e < best.value {
                    best = MinRicci { value: e, r, s, component: COMPONENT_NAMES[i] };
                }
            }
        }
    }
    if best.value.is_infinite() && best.value > 0.0 {
        return Err(Error::InvalidInput("empty curvature grid".into()));
    }
    Ok(best)
}

/// One row of a curvature table (CSV-friendly).
#[derive(Debug, Clone, Copy)]
pub struct CurvatureRow {
    /// Radius.
    pub r: f64,
    /// Angle.
    pub s: f64,
    /// Diagonal Ricci components.
    pub ric: RicciDiagonal,
    /// Smallest normalized eigenvalue at this point.
    pub min_eig: f64,
}

/// Dense curvature table over a grid.
pub fn curvature_table(w: &WarpedMetric, grid: &CurvatureGrid) -> Result<Vec<CurvatureRow>> {
    let mut rows = Vec::with_capacity(grid.r.len() * grid.s.len());
    for &r in &grid.r {
        for &s in &grid.s {
            let d = w.frame_metric(r, s)?;
            let ric = ricci_closed_form(w, r, s)?;
            let min_eig = [ric.ric_rr, ric.ric_ss / d[1], ric.ric_jj[0] / d[2], ric.ric_jj[1] / d[3], ric.ric_jj[2] / d[4]]
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            rows.push(CurvatureRow { r, s, ric, min_eig });
        }
    }
    Ok(rows)
}

/// A pointwise hypothesis with a signed margin: satisfied where the margin
/// is nonnegative.
pub struct Condition {
    /// Human-readable label.
    pub name: String,
    /// Margin function of `(r, s)`; negative values are violations.
    pub margin: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl Condition {
    /// Convenience constructor.
    pub fn new(name: &str, margin: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Condition {
        Condition { name: name.to_string(), margin: Box::new(margin) }
    }
}

/// Worst margin of one condition over the grid.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    /// Condition label.
    pub name: String,
    /// Most negative (or least positive) margin found.
    pub worst_margin: f64,
    /// Grid point realizing the worst margin.
    pub at: (f64, f64),
    /// Whether the condition held everywhere (up to `MARGIN_TOL`).
    pub pass: bool,
}

/// Grace tolerance when classifying a worst margin as a pass.
pub const MARGIN_TOL: f64 = 1e-9;

/// Full hypothesis report: per-condition worst margins plus the grid
/// curvature minimum.  Violations are recorded as data, never as errors.
#[derive(Debug)]
pub struct PositivityReport {
    /// Metric label.
    pub metric: String,
    /// Per-condition results.
    pub conditions: Vec<ConditionReport>,
    /// Grid minimum of normalized Ricci.
    pub min_ricci: MinRicci,
}

impl PositivityReport {
    /// True when every condition passed and the curvature minimum is
    /// nonnegative up to tolerance.
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass) && self.min_ricci.value >= -1e-8
    }
}

impl std::fmt::Display for PositivityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "hypothesis report for {}", self.metric)?;
        for c in &self.conditions {
            writeln!(
                f,
                "  [{}] {:<44} worst margin {:+.3e} at (r, s) = ({:.4}, {:.4})",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.worst_margin,
                c.at.0,
                c.at.1
            )?;
        }
        writeln!(
            f,
            "  min normalized Ricci {:+.3e} at (r, s) = ({:.4}, {:.4}) [{}]",
            self.min_ricci.value, self.min_ricci.r, self.min_ricci.s, self.min_ricci.component
        )
    }
}

/// Evaluates every condition margin over the grid and minimizes normalized
/// Ricci.  A negative margin marks where a hypothesis fails; it is reported,
/// not raised.
pub fn verify_positivity_conditions(
    w: &WarpedMetric,
    conditions: &[Condition],
    grid: &CurvatureGrid,
) -> Result<PositivityReport> {
    let mut reports = Vec::with_capacity(conditions.len());
    for cond in conditions {
        let mut worst = f64::INFINITY;
        let mut at = (f64::NAN, f64::NAN);
        for &r in &grid.r {
            for &s in &grid.s {
                let m = (cond.margin)(r, s);
                let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
                if m < worst {
                    worst = m;
                    at = (r, s);
                }
            }
        }
        reports.push(ConditionReport {
            name: cond.name.clone(),
            worst_margin: worst,
            at,
            pass: worst >= -MARGIN_TOL,
        });
    }
    Ok(PositivityReport {
        metric: w.name.clone(),
        conditions: reports,
        min_ricci: min_ricci_eigenvalue(w, grid)?,
    })
}

/// True when the fiber field of `w` satisfies the structural constraints the
/// closed form requires, checked numerically at `(r, s)`.
pub fn constraints_hold(w: &WarpedMetric, r: f64, s: f64, tol: f64) -> bool {
    match &w.fiber {
        FiberField::Constant(_) => true,
        _ => {
            let Ok(wj) = w.warp_jets(r, s) else { return false };
            let cross: f64 = (0..3).map(|j| wj.m.mr[j] * wj.m.ms[j]).sum();
            let trace_r: f64 = wj.m.mr.iter().sum();
            let trace_s: f64 = wj.m.ms.iter().sum();
            cross.abs() <= tol && trace_r.abs() <= tol && trace_s.abs() <= tol
        }
    }
}
