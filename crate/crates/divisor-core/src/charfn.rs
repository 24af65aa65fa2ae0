//! Characteristic functions, admissibility certificates, and the second
//! characteristic `ψ` (the continuous logarithm of the characteristic
//! function normalized by `ψ(0) = 0`).
//!
//! `ψ` is computed by marching outward from 0 and accumulating
//! principal-branch logarithms of consecutive ratios. Each step carries
//! a no-winding certificate: the argument of the ratio must stay below
//! `π − PHASE_MARGIN`, otherwise the step is bisected recursively. The
//! negative axis is marched independently and conjugate symmetry is
//! asserted afterwards rather than assumed.

use num_complex::Complex64;

use crate::measures::DistExpr;
use crate::{Error, Result};

/// A principal-log step is bisected when the ratio argument comes within
/// this margin of ±π.
pub const PHASE_MARGIN: f64 = 0.35;

/// Maximum recursive bisection depth per marching step.
pub const MAX_REFINEMENT_DEPTH: u32 = 24;

/// Moduli below this are treated as zeros of the characteristic function.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Relative tolerance for the `exp(ψ) = cf` consistency check.
const CONSISTENCY_RTOL: f64 = 1e-9;

/// Evaluates the characteristic function `ĥμ(y) = ∫ e^{iyx} μ(dx)` in
/// closed form.
pub fn cf_eval(expr: &DistExpr, y: f64) -> Complex64 {
    match expr {
        DistExpr::AtomicLeaf(m) => m
            .atoms()
            .iter()
            .map(|a| a.weight * Complex64::new(0.0, y * a.location).exp())
            .sum(),
        DistExpr::CauchyLeaf { scale } => Complex64::new((-scale * y.abs()).exp(), 0.0),
        DistExpr::GaussianLeaf { mean, variance } => {
            Complex64::new(-variance * y * y / 2.0, mean * y).exp()
        }
        DistExpr::Convolve(children) => children
            .iter()
            .map(|c| cf_eval(c, y))
            .fold(Complex64::new(1.0, 0.0), |acc, v| acc * v),
        DistExpr::Mixture(pairs) => pairs
            .iter()
            .map(|(w, c)| w * cf_eval(c, y))
            .sum(),
    }
}

/// Outcome of an admissibility scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// No zero of the characteristic function was detected on the grid.
    AdmissibleOnGrid,
    /// A refined interior minimum fell below the zero tolerance.
    ZeroFound { y: f64 },
}

/// Result of [`admissibility_check`]: the verdict plus the smallest
/// modulus observed and where, with the grid parameters recording the
/// scope of the certificate.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityReport {
    pub verdict: Admissibility,
    pub min_modulus: f64,
    pub at_y: f64,
    pub y_max: f64,
    pub n_samples: usize,
    pub zero_tol: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        matches!(self.verdict, Admissibility::AdmissibleOnGrid)
    }
}

/// Scans `|ĥμ|` on a symmetric grid of `2·n_samples + 1` points over
/// `[-y_max, y_max]`, refines interior local minima by bisection, and
/// reports the smallest modulus found.
///
/// The zero verdict is raised only by *interior* minima (or exact zero
/// samples): a smoothly decaying characteristic function such as the
/// Cauchy one reaches very small moduli at the window boundary without
/// vanishing anywhere, and must stay admissible.
pub fn admissibility_check(
    expr: &DistExpr,
    y_max: f64,
    n_samples: usize,
) -> Result<AdmissibilityReport> {
    admissibility_check_with_tol(expr, y_max, n_samples, DEFAULT_ZERO_TOL)
}

/// [`admissibility_check`] with an explicit zero tolerance.
pub fn admissibility_check_with_tol(
    expr: &DistExpr,
    y_max: f64,
    n_samples: usize,
    zero_tol: f64,
) -> Result<AdmissibilityReport> {
    if !(y_max > 0.0) || !y_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "y_max must be > 0, got {y_max}"
        )));
    }
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "n_samples must be >= 16, got {n_samples}"
        )));
    }
    let n = n_samples as i64;
    let dy = y_max / n_samples as f64;
    let ys: Vec<f64> = (-n..=n).map(|k| k as f64 * dy).collect();
    let mods: Vec<f64> = ys.iter().map(|&y| cf_eval(expr, y).norm()).collect();

    let mut min_modulus = f64::INFINITY;
    let mut at_y = 0.0;
    for (&y, &m) in ys.iter().zip(&mods) {
        if m < min_modulus {
            min_modulus = m;
            at_y = y;
        }
    }
    let mut verdict = Admissibility::AdmissibleOnGrid;
    if min_modulus == 0.0 {
        verdict = Admissibility::ZeroFound { y: at_y };
    }

    // refine every interior local minimum of the sampled modulus
    for i in 1..ys.len() - 1 {
        if mods[i] <= mods[i - 1] && mods[i] <= mods[i + 1] {
            let (ry, rm) = refine_minimum(expr, ys[i - 1], ys[i + 1]);
            if rm < min_modulus {
                min_modulus = rm;
                at_y = ry;
            }
            if rm < zero_tol && matches!(verdict, Admissibility::AdmissibleOnGrid) {
                verdict = Admissibility::ZeroFound { y: ry };
            }
        }
    }

    Ok(AdmissibilityReport {
        verdict,
        min_modulus,
        at_y,
        y_max,
        n_samples,
        zero_tol,
    })
}

/// Golden-section search for the minimum of `|ĥμ|` on `[a, b]`.
fn refine_minimum(expr: &DistExpr, a: f64, b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = cf_eval(expr, x1).norm();
    let mut f2 = cf_eval(expr, x2).norm();
    for _ in 0..120 {
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = cf_eval(expr, x1).norm();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = cf_eval(expr, x2).norm();
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, cf_eval(expr, mid).norm())
}

/// The second characteristic sampled along a symmetric frequency grid,
/// with any bisection refinement points included as samples.
#[derive(Debug, Clone)]
pub struct PsiTrace {
    y_max: f64,
    refinement_depth: u32,
    /// `(y, ψ(y))` sorted by `y`; contains `(0, 0)`.
    samples: Vec<(f64, Complex64)>,
}

impl PsiTrace {
    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Deepest bisection level needed while marching (0 = base grid
    /// sufficed).
    pub fn refinement_depth(&self) -> u32 {
        self.refinement_depth
    }

    pub fn samples(&self) -> &[(f64, Complex64)] {
        &self.samples
    }

    /// `ψ(y)` from the trace: exact at sample points, linear
    /// interpolation in between.
    pub fn psi_at(&self, y: f64) -> Result<Complex64> {
        let range = self.y_max * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        if y.abs() > range {
            return Err(Error::PointsOutOfRange {
                requested: y,
                range: self.y_max,
            });
        }
        let idx = self
            .samples
            .partition_point(|(sy, _)| *sy < y);
        if idx < self.samples.len() {
            let (sy, sv) = self.samples[idx];
            if (sy - y).abs() <= 1e-12 * self.y_max.max(1.0) {
                return Ok(sv);
            }
        }
        if idx == 0 {
            return Ok(self.samples[0].1);
        }
        if idx == self.samples.len() {
            return Ok(self.samples[idx - 1].1);
        }
        let (y0, v0) = self.samples[idx - 1];
        let (y1, v1) = self.samples[idx];
        let s = (y - y0) / (y1 - y0);
        Ok(v0 + (v1 - v0) * Complex64::new(s, 0.0))
    }
}

/// Computes the second characteristic on a symmetric grid of
/// `2·n_samples + 1` base points over `[-y_max, y_max]`.
///
/// Marches outward from `ψ(0) = 0` in both directions, accumulating the
/// principal logarithm of each consecutive ratio. Steps whose ratio
/// argument comes within [`PHASE_MARGIN`] of ±π are bisected up to
/// [`MAX_REFINEMENT_DEPTH`]; the midpoints become trace samples, so the
/// no-winding certificate holds between every pair of consecutive
/// samples. Fails with [`Error::NotAdmissible`] when the admissibility
/// scan (same grid parameters) finds a zero.
pub fn second_characteristic(expr: &DistExpr, y_max: f64, n_samples: usize) -> Result<PsiTrace> {
    second_characteristic_with_points(expr, y_max, n_samples, &[])
}

/// [`second_characteristic`] that additionally visits `extra_points`
/// (so `psi_at` is exact there, not interpolated).
pub fn second_characteristic_with_points(
    expr: &DistExpr,
    y_max: f64,
    n_samples: usize,
    extra_points: &[f64],
) -> Result<PsiTrace> {
    let report = admissibility_check(expr, y_max, n_samples)?;
    if let Admissibility::ZeroFound { y } = report.verdict {
        return Err(Error::NotAdmissible {
            y,
            modulus: report.min_modulus,
        });
    }

    let dy = y_max / n_samples as f64;
    let dedupe = 1e-9 * dy;
    let mut pos_targets: Vec<f64> = (1..=n_samples).map(|k| k as f64 * dy).collect();
    let mut neg_targets: Vec<f64> = (1..=n_samples).map(|k| -(k as f64) * dy).collect();
    for &p in extra_points {
        if p > 0.0 && p <= y_max {
            pos_targets.push(p);
        } else if p < 0.0 && p >= -y_max {
            neg_targets.push(p);
        }
    }
    pos_targets.sort_by(f64::total_cmp);
    pos_targets.dedup_by(|a, b| (*a - *b).abs() <= dedupe);
    neg_targets.sort_by(|a, b| b.total_cmp(a));
    neg_targets.dedup_by(|a, b| (*a - *b).abs() <= dedupe);

    let mut samples = vec![(0.0, Complex64::new(0.0, 0.0))];
    let mut max_depth = 0u32;
    march_targets(expr, &pos_targets, &mut samples, &mut max_depth)?;
    march_targets(expr, &neg_targets, &mut samples, &mut max_depth)?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let trace = PsiTrace {
        y_max,
        refinement_depth: max_depth,
        samples,
    };
    check_trace_consistency(expr, &trace, n_samples, dy)?;
    Ok(trace)
}

/// Marches from 0 through `targets` in order, appending every visited
/// point to `samples`.
fn march_targets(
    expr: &DistExpr,
    targets: &[f64],
    samples: &mut Vec<(f64, Complex64)>,
    max_depth: &mut u32,
) -> Result<()> {
    let mut y_prev = 0.0;
    let mut h_prev = Complex64::new(1.0, 0.0);
    let mut psi_prev = Complex64::new(0.0, 0.0);
    for &y in targets {
        let (psi, h) = march_step(expr, y_prev, h_prev, psi_prev, y, 0, max_depth, samples)?;
        y_prev = y;
        h_prev = h;
        psi_prev = psi;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn march_step(
    expr: &DistExpr,
    y_from: f64,
    h_from: Complex64,
    psi_from: Complex64,
    y_to: f64,
    depth: u32,
    max_depth: &mut u32,
    samples: &mut Vec<(f64, Complex64)>,
) -> Result<(Complex64, Complex64)> {
    let h_to = cf_eval(expr, y_to);
    if !h_to.re.is_finite() || !h_to.im.is_finite() || h_to.norm() == 0.0 {
        return Err(Error::NotAdmissible {
            y: y_to,
            modulus: h_to.norm(),
        });
    }
    let ratio = h_to / h_from;
    if ratio.arg().abs() >= std::f64::consts::PI - PHASE_MARGIN {
        if depth >= MAX_REFINEMENT_DEPTH {
            return Err(Error::RefinementExhausted { y: y_to, depth });
        }
        let mid = 0.5 * (y_from + y_to);
        let (psi_mid, h_mid) = march_step(
            expr, y_from, h_from, psi_from, mid, depth + 1, max_depth, samples,
        )?;
        return march_step(
            expr, mid, h_mid, psi_mid, y_to, depth + 1, max_depth, samples,
        );
    }
    *max_depth = (*max_depth).max(depth);
    let psi_to = psi_from + ratio.ln();
    samples.push((y_to, psi_to));
    Ok((psi_to, h_to))
}

/// Asserts the trace invariants: `exp(ψ) = ĥμ` within 1e-9 relative at
/// every sample, and conjugate symmetry at the mirrored base grid.
fn check_trace_consistency(
    expr: &DistExpr,
    trace: &PsiTrace,
    n_samples: usize,
    dy: f64,
) -> Result<()> {
    for &(y, psi) in &trace.samples {
        let h = cf_eval(expr, y);
        let err = (psi.exp() - h).norm() / h.norm();
        if !(err <= CONSISTENCY_RTOL) {
            return Err(Error::InvariantViolation(format!(
                "exp(psi({y})) deviates from the characteristic function by {err:e} relative"
            )));
        }
    }
    for k in 1..=n_samples {
        let y = k as f64 * dy;
        let p = trace.psi_at(y)?;
        let m = trace.psi_at(-y)?;
        if (m - p.conj()).norm() > 1e-9 * (1.0 + p.norm()) {
            return Err(Error::InvariantViolation(format!(
                "conjugate symmetry violated at y = {y}"
            )));
        }
    }
    Ok(())
}

/// Closed-form second characteristic, where one exists:
///
/// - Cauchy of scale `s`: `-s|y|`
/// - Gaussian: `i·mean·y - variance·y²/2`
/// - convolutions: sum of the children's values
/// - atomic distributions (and mixtures flattening to one) with a
///   *dominant* atom — one weight exceeding the sum of all others — via
///   `i·y·x_d + Log Σ_j w_j e^{iy(x_j - x_d)}`; factoring out the
///   dominant phase keeps the remaining sum in the right half-plane, so
///   the principal logarithm is the continuous one.
///
/// Returns `None` when no sufficient condition applies; callers fall
/// back to [`second_characteristic`].
pub fn psi_closed_form(expr: &DistExpr, y: f64) -> Option<Complex64> {
    match expr {
        DistExpr::CauchyLeaf { scale } => Some(Complex64::new(-scale * y.abs(), 0.0)),
        DistExpr::GaussianLeaf { mean, variance } => {
            Some(Complex64::new(-variance * y * y / 2.0, mean * y))
        }
        DistExpr::Convolve(children) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in children {
                acc += psi_closed_form(c, y)?;
            }
            Some(acc)
        }
        DistExpr::AtomicLeaf(_) | DistExpr::Mixture(_) => {
            let form = expr.flatten_product()?;
            if form.cauchy_scale != 0.0 || form.gauss_var != 0.0 {
                return None;
            }
            let dom = form.dominant_atom()?;
            let mut g = Complex64::new(0.0, 0.0);
            for a in form.atomic.atoms() {
                g += a.weight * Complex64::new(0.0, y * (a.location - dom.location)).exp();
            }
            Some(Complex64::new(0.0, y * dom.location) + g.ln())
        }
    }
}

/// True when [`psi_closed_form`] is available for this expression.
pub fn has_closed_form_psi(expr: &DistExpr) -> bool {
    psi_closed_form(expr, 1.0).is_some()
}
