//! Fractional convolution powers `μ^{*t} = F⁻¹(e^{tψ})`.
//!
//! Three routes, used as cross-checking oracles for one another on their
//! common domain:
//!
//! - **series**: for compound distributions `ν = (1+α)⁻¹(δ₀ + αθ)` the
//!   power is the generalized binomial series
//!   `(1+α)^{-t} Σ_l C(t,l) α^l θ^{*l}`, truncated under an explicit
//!   total-variation tail bound. Exact (finite) for integer `t`.
//! - **closed-form density**: the same series smeared by a Cauchy factor
//!   gives a signed density as a sum of Cauchy kernels; the stock
//!   `θ = δ₁` family is [`cauchy_compound_density`].
//! - **grid**: sample `e^{tψ}` on a symmetric frequency window and apply
//!   the discrete inverse Fourier transform with the
//!   continuous-transform normalization (`dx = π/y_max`).
//!
//! Lattice-supported atomic distributions without a dominant atom get a
//! fourth, spectral route ([`real_root`] uses it): unwind `log ĥ` around
//! the unit circle and read the fractional power's weights off a DFT.
//!
//! Results may be signed. Negative mass is returned as-is — it is the
//! signal the membership tests look for — never clamped.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::charfn::{has_closed_form_psi, psi_closed_form, second_characteristic};
use crate::measures::{canonicalize, Atom, DistExpr, GridSignedDensity, SignedAtomicMeasure};
use crate::{Error, Result};

/// Default total-variation tail tolerance for truncated series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Series term budget; exceeding it raises [`Error::TailNotConverged`].
pub const L_MAX: usize = 1_000_000;

/// Relative tolerance on the imaginary residue of the inverse transform.
pub const IMAG_TOL_REL: f64 = 1e-8;

/// Tolerance on the mass defect of a grid-route fractional power.
pub const GRID_MASS_TOL: f64 = 1e-6;

/// The characteristic function must have decayed below this (relative to
/// its value 1 at the origin) at the frequency-window edge.
pub const EDGE_DECAY_TOL: f64 = 1e-6;

/// Generalized binomial coefficient `C(t, l) = t(t-1)⋯(t-l+1)/l!`,
/// with `C(t, 0) = 1`. For integer `t` and `l > t` the product contains
/// an exactly zero factor, so the result is exactly 0.
pub fn gen_binomial(t: f64, l: u32) -> f64 {
    let mut c = 1.0;
    for k in 0..l {
        c *= (t - k as f64) / (k as f64 + 1.0);
    }
    c
}

/// `√α/(1-α)`: at or above this `t`, the Cauchy-compound density is
/// provably non-negative (the Cauchy-kernel terms dominate pairwise).
pub fn ray_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(alpha.sqrt() / (1.0 - alpha))
}

/// Parameters of a compound binomial series `(1+α)^{-t} Σ C(t,l) α^l θ^{*l}`.
#[derive(Debug, Clone)]
pub struct BinomialSeriesParams {
    alpha: f64,
    t: f64,
    tail_tol: f64,
    theta: SignedAtomicMeasure,
}

impl BinomialSeriesParams {
    /// Validates `0 < alpha < 1` (so `|αθ̂| < 1` and the series
    /// converges), `t > 0`, `tail_tol > 0`, and that `theta` is a
    /// probability measure.
    pub fn new(alpha: f64, t: f64, tail_tol: f64, theta: SignedAtomicMeasure) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_tol must be > 0, got {tail_tol}"
            )));
        }
        if !theta.is_probability(1e-9) {
            return Err(Error::InvalidArgument(
                "theta must be a probability measure".into(),
            ));
        }
        Ok(Self {
            alpha,
            t,
            tail_tol,
            theta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn theta(&self) -> &SignedAtomicMeasure {
        &self.theta
    }
}

/// Walks the series terms `(1+α)^{-t} C(t,l) α^l`, reporting when the
/// remaining tail's total-variation bound has dropped below `tail_tol`.
///
/// Beyond `l > t` the coefficient magnitudes decrease (the successive
/// ratio is `(l-t)/(l+1) < 1`), so the remaining total variation is
/// bounded by the geometric sum `term_l · α/(1-α)`.
struct SeriesTerms {
    alpha: f64,
    t: f64,
    tail_tol: f64,
    integer_t: bool,
    l: usize,
    coeff: f64, // (1+α)^{-t} C(t,l) α^l
}

impl SeriesTerms {
    fn new(alpha: f64, t: f64, tail_tol: f64) -> Self {
        Self {
            alpha,
            t,
            tail_tol,
            integer_t: t.fract() == 0.0,
            l: 0,
            coeff: (1.0 + alpha).powf(-t),
        }
    }

    /// Coefficient of `θ^{*l}` for the current `l`.
    fn current(&self) -> (usize, f64) {
        (self.l, self.coeff)
    }

    /// True when the series is complete after the current term.
    fn done(&self) -> bool {
        if self.integer_t {
            return self.l as f64 >= self.t;
        }
        self.l as f64 > self.t
            && self.coeff.abs() * self.alpha / (1.0 - self.alpha) < self.tail_tol
    }

    fn advance(&mut self) -> Result<()> {
        let l = self.l as f64;
        self.coeff *= (self.t - l) / (l + 1.0) * self.alpha;
        self.l += 1;
        if self.l > L_MAX {
            return Err(Error::TailNotConverged { l_max: L_MAX });
        }
        Ok(())
    }
}

/// Evaluates the compound power `(1+α)^{-t} Σ_l C(t,l) α^l θ^{*l}` as a
/// signed atomic measure, truncated once the tail's total-variation
/// bound falls below `tail_tol`. For integer `t` the series terminates
/// exactly at `l = t`.
pub fn compound_power_atoms(p: &BinomialSeriesParams) -> Result<SignedAtomicMeasure> {
    compound_atoms_impl(p.alpha, p.t, p.tail_tol, &p.theta)
}

fn compound_atoms_impl(
    alpha: f64,
    t: f64,
    tail_tol: f64,
    theta: &SignedAtomicMeasure,
) -> Result<SignedAtomicMeasure> {
    let mut terms = SeriesTerms::new(alpha, t, tail_tol);
    let mut theta_pow = SignedAtomicMeasure::delta(0.0);
    let mut acc: Vec<Atom> = Vec::new();
    loop {
        let (_, coeff) = terms.current();
        if coeff != 0.0 {
            for a in theta_pow.atoms() {
                acc.push(Atom {
                    location: a.location,
                    weight: coeff * a.weight,
                });
            }
        }
        if terms.done() {
            break;
        }
        terms.advance()?;
        theta_pow = theta_pow.convolve(theta);
    }
    let span = acc
        .iter()
        .map(|a| a.location.abs())
        .fold(0.0f64, f64::max);
    Ok(SignedAtomicMeasure::from_canonical_atoms(canonicalize(
        acc,
        1e-12 * span.max(1.0),
    )))
}

/// The signed density of `(γ₁ ∗ ν)^{*t}` for `ν = (1+α)⁻¹(δ₀ + αδ₁)`:
///
/// `f_t(x) = (1/(π(1+α)^t)) Σ_l C(t,l) α^l · t/((x-l)² + t²)`
///
/// truncated once the remaining total-variation tail bound times the
/// kernel sup `1/(πt)` falls below `tail_tol`. Exact (finite sum) for
/// integer `t`.
pub fn cauchy_compound_density(alpha: f64, t: f64, x: f64, tail_tol: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail_tol must be > 0, got {tail_tol}"
        )));
    }
    let kernel_sup = 1.0 / (std::f64::consts::PI * t);
    let mut terms = SeriesTerms::new(alpha, t, tail_tol / kernel_sup);
    let mut sum = 0.0;
    loop {
        let (l, coeff) = terms.current();
        let d = x - l as f64;
        sum += coeff * t / ((d * d + t * t) * std::f64::consts::PI);
        if terms.done() {
            break;
        }
        terms.advance()?;
    }
    Ok(sum)
}

/// `expr` recognized as `δ_shift ∗ γ_c ∗ ν` with `ν = (1+α)⁻¹(δ₀ + αθ)`;
/// the decomposition exists exactly when the atomic factor has a
/// dominant atom (located at `shift`). `alpha == 0` encodes a pure point
/// mass (no `θ`).
#[derive(Debug, Clone)]
pub(crate) struct CompoundForm {
    pub shift: f64,
    pub cauchy_scale: f64,
    pub alpha: f64,
    pub theta: Option<SignedAtomicMeasure>,
}

pub(crate) fn compound_form(expr: &DistExpr) -> Option<CompoundForm> {
    let form = expr.flatten_product()?;
    if form.gauss_var != 0.0 {
        return None;
    }
    let dom = form.dominant_atom()?;
    let rest: Vec<Atom> = form
        .atomic
        .atoms()
        .iter()
        .filter(|a| a.location != dom.location)
        .map(|a| Atom {
            location: a.location - dom.location,
            weight: a.weight,
        })
        .collect();
    if rest.is_empty() {
        return Some(CompoundForm {
            shift: dom.location,
            cauchy_scale: form.cauchy_scale,
            alpha: 0.0,
            theta: None,
        });
    }
    let rest_mass: f64 = rest.iter().map(|a| a.weight).sum();
    let alpha = rest_mass / dom.weight;
    let theta = SignedAtomicMeasure::from_canonical_atoms(
        rest.iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight / rest_mass,
            })
            .collect(),
    );
    Some(CompoundForm {
        shift: dom.location,
        cauchy_scale: form.cauchy_scale,
        alpha,
        theta: Some(theta),
    })
}

impl CompoundForm {
    /// The compound atoms of `(ν-part)^{*t}`, shifted by `t·shift`.
    pub fn power_atoms(&self, t: f64, tail_tol: f64) -> Result<SignedAtomicMeasure> {
        let atoms = match &self.theta {
            None => SignedAtomicMeasure::delta(0.0),
            Some(theta) => compound_atoms_impl(self.alpha, t, tail_tol, theta)?,
        };
        Ok(atoms.shifted(t * self.shift))
    }

    /// Signed density of `μ^{*t}` at `x` (requires `cauchy_scale > 0`):
    /// the compound atoms smeared by the Cauchy kernel of scale
    /// `cauchy_scale · t`.
    pub fn density_at(&self, atoms: &SignedAtomicMeasure, t: f64, x: f64) -> f64 {
        let ct = self.cauchy_scale * t;
        debug_assert!(ct > 0.0);
        let mut sum = 0.0;
        for a in atoms.atoms() {
            let d = x - a.location;
            sum += a.weight * ct / ((d * d + ct * ct) * std::f64::consts::PI);
        }
        sum
    }

    /// Measure-level tail tolerance that keeps the *density* truncation
    /// error below `density_tol`.
    pub fn measure_tol_for_density(&self, t: f64, density_tol: f64) -> f64 {
        density_tol * std::f64::consts::PI * self.cauchy_scale * t
    }
}

/// How a fractional power will be computed for a given expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SeriesRoute {
    /// Compound series, purely atomic result.
    CompoundAtoms,
    /// Compound series smeared by a Cauchy factor: closed-form density.
    CompoundDensity,
    /// Lattice-supported atoms without a dominant atom: spectral route.
    LatticeAtoms,
}

/// Picks the series-side route for `expr`, or `None` when only the grid
/// transform applies.
pub(crate) fn series_route(expr: &DistExpr) -> Option<SeriesRoute> {
    if let Some(form) = compound_form(expr) {
        return Some(if form.cauchy_scale > 0.0 {
            SeriesRoute::CompoundDensity
        } else {
            SeriesRoute::CompoundAtoms
        });
    }
    let product = expr.flatten_product()?;
    if product.cauchy_scale == 0.0 && product.gauss_var == 0.0 {
        return Some(SeriesRoute::LatticeAtoms);
    }
    None
}

/// A fractional power: exact signed atoms from the series-side routes,
/// or a sampled signed density from the transform / smeared-series
/// routes.
#[derive(Debug, Clone)]
pub enum FracPowerOutput {
    Atoms(SignedAtomicMeasure),
    Density(GridSignedDensity),
}

impl FracPowerOutput {
    /// `(location, value)` of the most negative weight/sample.
    pub fn min_value(&self) -> (f64, f64) {
        match self {
            FracPowerOutput::Atoms(m) => {
                let a = m.min_weight().expect("non-empty");
                (a.location, a.weight)
            }
            FracPowerOutput::Density(d) => d.min_value(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            FracPowerOutput::Atoms(m) => m.max_abs_weight(),
            FracPowerOutput::Density(d) => d.max_abs(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            FracPowerOutput::Atoms(m) => m.total_mass(),
            FracPowerOutput::Density(d) => d.total_mass(),
        }
    }

    /// Non-negative within `tol` relative to the largest magnitude.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        let (_, min) = self.min_value();
        min >= -tol * self.max_abs()
    }
}

/// True when a series-side route (compound series, smeared compound
/// series, or lattice spectrum) exists for `expr`.
pub fn has_series_route(expr: &DistExpr) -> bool {
    series_route(expr).is_some()
}

/// Computes `μ^{*t}` by the series-side route; errors when none applies
/// (use [`frac_power_grid`] then).
pub fn frac_power_series(expr: &DistExpr, t: f64, tail_tol: f64) -> Result<FracPowerOutput> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail_tol must be > 0, got {tail_tol}"
        )));
    }
    series_power(expr, t, tail_tol)
}

/// Computes `μ^{*t}` by the series-side route chosen by
/// [`series_route`]; errors when none applies.
pub(crate) fn series_power(expr: &DistExpr, t: f64, tail_tol: f64) -> Result<FracPowerOutput> {
    match series_route(expr) {
        Some(SeriesRoute::CompoundAtoms) => {
            let form = compound_form(expr).expect("route implies form");
            Ok(FracPowerOutput::Atoms(form.power_atoms(t, tail_tol)?))
        }
        Some(SeriesRoute::CompoundDensity) => {
            let form = compound_form(expr).expect("route implies form");
            Ok(FracPowerOutput::Density(series_density(
                &form, t, tail_tol,
            )?))
        }
        Some(SeriesRoute::LatticeAtoms) => {
            let product = expr.flatten_product().expect("route implies product");
            Ok(FracPowerOutput::Atoms(lattice_power(&product.atomic, t)?))
        }
        None => Err(Error::InvalidArgument(
            "series route unavailable for this distribution; use the grid route".into(),
        )),
    }
}

/// Samples the smeared-series density on a grid wide enough to cover
/// the support core plus Cauchy-tail padding, fine enough to resolve
/// kernel-width dips.
fn series_density(form: &CompoundForm, t: f64, density_tol: f64) -> Result<GridSignedDensity> {
    let atoms = form.power_atoms(t, form.measure_tol_for_density(t, density_tol))?;
    let ct = form.cauchy_scale * t;
    let lo = atoms.atoms().first().map(|a| a.location).unwrap_or(0.0);
    let hi = atoms.atoms().last().map(|a| a.location).unwrap_or(0.0);
    let pad = 4.0 + 6.0 * ct;
    let (x_lo, x_hi) = (lo - pad, hi + pad);
    let mut dx = (ct / 6.0).min(0.05);
    let max_samples = 400_000;
    if ((x_hi - x_lo) / dx) as usize > max_samples {
        dx = (x_hi - x_lo) / max_samples as f64;
    }
    let n = ((x_hi - x_lo) / dx).ceil() as usize + 1;
    let values: Vec<f64> = (0..n)
        .map(|k| form.density_at(&atoms, t, x_lo + k as f64 * dx))
        .collect();
    GridSignedDensity::new(x_lo, dx, values)
}

/// Frequency-window parameters for the grid route.
#[derive(Debug, Clone, Copy)]
pub struct GridParams {
    pub y_max: f64,
    pub n_freq: usize,
}

impl GridParams {
    /// Chooses a window on which `|e^{tψ}|` has decayed below the edge
    /// tolerance (possible only when a continuous factor is present)
    /// and a sample count giving a comfortable spatial half-span.
    pub fn suggest(expr: &DistExpr, t: f64) -> Self {
        let mut y_max = f64::INFINITY;
        let mut spread = 50.0;
        if let Some(p) = expr.flatten_product() {
            if p.cauchy_scale > 0.0 {
                y_max = y_max.min(40.0 / (t * p.cauchy_scale));
            }
            if p.gauss_var > 0.0 {
                y_max = y_max.min((80.0 / (t * p.gauss_var)).sqrt());
            }
            let span = p
                .atomic
                .atoms()
                .last()
                .map(|a| a.location)
                .unwrap_or(0.0)
                - p.atomic.atoms().first().map(|a| a.location).unwrap_or(0.0);
            spread += 8.0 * t * (p.cauchy_scale + span)
                + 30.0 * (t * p.gauss_var).sqrt()
                + t * p.gauss_mean.abs();
        }
        if !y_max.is_finite() {
            // no continuous factor known; the transform will fail its
            // edge-decay check if the CF truly does not decay
            y_max = 60.0f64.max(60.0 / t);
        }
        y_max = y_max.clamp(8.0, 1e5);
        let dx = std::f64::consts::PI / y_max;
        let half_span = spread.max(220.0);
        let n = ((2.0 * half_span / dx) as usize).next_power_of_two();
        GridParams {
            y_max,
            n_freq: n.clamp(4096, 1 << 18),
        }
    }
}

/// Computes `μ^{*t}` on a uniform spatial grid by sampling `e^{tψ}` on
/// the symmetric frequency window `[-y_max, y_max]` (`ψ` closed-form
/// when available, marched otherwise) and applying the discrete inverse
/// Fourier transform with spatial spacing `dx = π/y_max`.
///
/// Fails with [`Error::AliasingSuspected`] when the transformed samples
/// have not decayed at the window edge or the result's mass defect
/// exceeds [`GRID_MASS_TOL`].
pub fn frac_power_grid(
    expr: &DistExpr,
    t: f64,
    y_max: f64,
    n_freq: usize,
) -> Result<GridSignedDensity> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be > 0, got {t}")));
    }
    if !(y_max > 0.0) || !y_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "y_max must be > 0, got {y_max}"
        )));
    }
    if n_freq < 64 || !n_freq.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "n_freq must be a power of two >= 64, got {n_freq}"
        )));
    }
    let n = n_freq;
    let half = (n / 2) as i64;
    let dy = 2.0 * y_max / n as f64;

    // ψ at y_j = j·dy for j = -n/2 ..= n/2
    let psi: Vec<Complex64> = if has_closed_form_psi(expr) {
        (-half..=half)
            .map(|j| psi_closed_form(expr, j as f64 * dy).expect("closed form available"))
            .collect()
    } else {
        let trace = second_characteristic(expr, y_max, n / 2)?;
        (-half..=half)
            .map(|j| trace.psi_at(j as f64 * dy))
            .collect::<Result<_>>()?
    };
    let g: Vec<Complex64> = psi
        .iter()
        .map(|p| (Complex64::new(t, 0.0) * p).exp())
        .collect();

    let edge = g[0].norm().max(g[n].norm());
    if edge > EDGE_DECAY_TOL {
        return Err(Error::AliasingSuspected {
            edge_magnitude: edge,
            tol: EDGE_DECAY_TOL,
        });
    }

    // trapezoid endpoint folding keeps the sample set conjugate-symmetric
    let mut buf: Vec<Complex64> = Vec::with_capacity(n);
    for j in -half..half {
        let gj = if j == -half {
            0.5 * (g[0] + g[n])
        } else {
            g[(j + half) as usize]
        };
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        buf.push(gj * sign);
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let dx = std::f64::consts::PI / y_max;
    let scale = dy / (2.0 * std::f64::consts::PI);
    let mut values = Vec::with_capacity(n);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for (k, v) in buf.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let val = sign * scale * v;
        max_re = max_re.max(val.re.abs());
        max_im = max_im.max(val.im.abs());
        values.push(val.re);
    }
    if max_im > IMAG_TOL_REL * max_re {
        return Err(Error::InvariantViolation(format!(
            "imaginary residue {max_im:e} exceeds {IMAG_TOL_REL:e} of peak {max_re:e}"
        )));
    }

    let x_origin = -(half as f64) * dx;
    let density = GridSignedDensity::new(x_origin, dx, values)?;
    let mass_defect = (density.total_mass() - 1.0).abs();
    if mass_defect > GRID_MASS_TOL {
        return Err(Error::AliasingSuspected {
            edge_magnitude: mass_defect,
            tol: GRID_MASS_TOL,
        });
    }
    Ok(density)
}

/// Linear (zero-padded FFT) convolution of two grid densities sampled
/// with the same spacing. The result spans the sum of the supports.
pub fn convolve_grids(a: &GridSignedDensity, b: &GridSignedDensity) -> Result<GridSignedDensity> {
    let dx = a.dx();
    if (dx - b.dx()).abs() > 1e-12 * dx {
        return Err(Error::InvalidArgument(format!(
            "grid spacings differ: {} vs {}",
            dx,
            b.dx()
        )));
    }
    let out_len = a.len() + b.len() - 1;
    let m = out_len.next_power_of_two();
    let mut fa: Vec<Complex64> = a
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fa.resize(m, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fb.resize(m, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    planner.plan_fft_inverse(m).process(&mut fa);
    let scale = dx / m as f64;
    let values: Vec<f64> = fa[..out_len].iter().map(|v| v.re * scale).collect();
    GridSignedDensity::new(a.x_origin() + b.x_origin(), dx, values)
}

/// Fractional power of a lattice-supported atomic probability measure
/// by spectral factorization on the unit circle.
///
/// Writes `ĥ(y) = e^{icy}·z(hy)` with `z` a trigonometric polynomial,
/// strips the winding `W` of `z` (so `z = e^{iWφ} g(φ)` with `g`
/// winding-free), and reads the Fourier coefficients of `e^{t·log g}`
/// off a DFT. Atoms land on `t(c + Wh) + kh`, `k ∈ ℤ`.
pub(crate) fn lattice_power(m: &SignedAtomicMeasure, t: f64) -> Result<SignedAtomicMeasure> {
    if !m.is_probability(1e-9) {
        return Err(Error::InvalidArgument(
            "lattice route requires a probability measure".into(),
        ));
    }
    let atoms = m.atoms();
    if atoms.len() == 1 {
        return Ok(SignedAtomicMeasure::delta(t * atoms[0].location));
    }
    let c = atoms[0].location;
    let rel: Vec<f64> = atoms.iter().map(|a| a.location - c).collect();
    let mut h = rel[1];
    for &r in &rel[2..] {
        h = float_gcd(h, r);
    }
    if h < 1e-9 {
        return Err(Error::InvalidArgument(
            "atom spacing too fine for the lattice route".into(),
        ));
    }
    let mut idx: Vec<i64> = Vec::with_capacity(rel.len());
    for &r in &rel {
        let k = (r / h).round();
        if (r - k * h).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::InvalidArgument(
                "atoms are not lattice-supported".into(),
            ));
        }
        idx.push(k as i64);
    }
    let k_max = *idx.last().expect("non-empty") as usize;

    let mut m_pts = (8 * k_max.max(32)).next_power_of_two();
    loop {
        match lattice_spectrum(atoms, &idx, t, m_pts)? {
            Some((winding, coeffs)) => {
                let pos: Vec<Atom> = coeffs
                    .into_iter()
                    .map(|(k, w)| Atom {
                        location: t * c + (t * winding as f64 + k as f64) * h,
                        weight: w,
                    })
                    .collect();
                return Ok(SignedAtomicMeasure::from_canonical_atoms(canonicalize(
                    pos,
                    1e-12 * (k_max as f64 * h).max(1.0),
                )));
            }
            None => {
                m_pts *= 2;
                if m_pts > 1 << 20 {
                    return Err(Error::TailNotConverged { l_max: 1 << 20 });
                }
            }
        }
    }
}

fn float_gcd(mut a: f64, mut b: f64) -> f64 {
    while b > 1e-12 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

fn lattice_cf(atoms: &[Atom], idx: &[i64], phi: f64) -> Complex64 {
    atoms
        .iter()
        .zip(idx)
        .map(|(a, &k)| a.weight * Complex64::new(0.0, phi * k as f64).exp())
        .sum()
}

/// Winding number of `z(φ)` around 0 over one full turn.
fn lattice_winding(atoms: &[Atom], idx: &[i64], m_pts: usize) -> i64 {
    let mut total = 0.0;
    let mut prev = lattice_cf(atoms, idx, 0.0);
    for j in 1..=m_pts {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / m_pts as f64;
        let cur = lattice_cf(atoms, idx, phi);
        total += (cur / prev).arg();
        prev = cur;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// Winding number plus the `(lattice index, weight)` pairs read off the
/// circle spectrum.
type LatticeCoeffs = (i64, Vec<(i64, f64)>);

/// One resolution level of the spectral route: `None` means the grid was
/// too coarse (winding step uncertified or spectrum not decayed). On
/// success returns the winding number and the `(k, weight)` pairs.
fn lattice_spectrum(
    atoms: &[Atom],
    idx: &[i64],
    t: f64,
    m_pts: usize,
) -> Result<Option<LatticeCoeffs>> {
    use std::f64::consts::PI;
    let phis: Vec<f64> = (0..m_pts)
        .map(|j| 2.0 * PI * j as f64 / m_pts as f64)
        .collect();
    let z: Vec<Complex64> = phis.iter().map(|&p| lattice_cf(atoms, idx, p)).collect();
    if let Some(v) = z.iter().find(|v| v.norm() < 1e-10) {
        return Err(Error::NotAdmissible {
            y: 0.0,
            modulus: v.norm(),
        });
    }
    // certify each unwinding step at π/2: the winding strip below adds
    // up to 2πW/M ≤ π/4 per step, so the combined argument stays under π
    for j in 0..m_pts {
        let next = z[(j + 1) % m_pts];
        if (next / z[j]).arg().abs() >= PI / 2.0 {
            return Ok(None);
        }
    }
    let w = lattice_winding(atoms, idx, m_pts);
    // log g by marching, g = z·e^{-iWφ}
    let mut log_g: Vec<Complex64> = Vec::with_capacity(m_pts);
    let g0 = z[0];
    log_g.push(g0.ln());
    for j in 1..m_pts {
        let g_prev = z[j - 1] * Complex64::new(0.0, -(w as f64) * phis[j - 1]).exp();
        let g_cur = z[j] * Complex64::new(0.0, -(w as f64) * phis[j]).exp();
        let prev = log_g[j - 1];
        log_g.push(prev + (g_cur / g_prev).ln());
    }
    let mut buf: Vec<Complex64> = log_g
        .iter()
        .map(|l| (Complex64::new(t, 0.0) * l).exp())
        .collect();
    FftPlanner::new().plan_fft_forward(m_pts).process(&mut buf);
    let coeffs: Vec<Complex64> = buf.into_iter().map(|v| v / m_pts as f64).collect();

    // spectrum must have decayed well inside the window, otherwise alias
    let mid_band_max = (m_pts / 4..3 * m_pts / 4)
        .map(|k| coeffs[k].norm())
        .fold(0.0f64, f64::max);
    if mid_band_max > 1e-13 {
        return Ok(None);
    }
    let max_im = coeffs.iter().map(|v| v.im.abs()).fold(0.0f64, f64::max);
    if max_im > 1e-10 {
        return Err(Error::InvariantViolation(format!(
            "lattice spectrum imaginary residue {max_im:e}"
        )));
    }
    let mut out = Vec::new();
    for (j, v) in coeffs.iter().enumerate() {
        let k = if j < m_pts / 2 {
            j as i64
        } else {
            j as i64 - m_pts as i64
        };
        if v.re.abs() >= 1e-16 {
            out.push((k, v.re));
        }
    }
    Ok(Some((w, out)))
}

/// Computes the real root `μ^{*(1/β)}` by the best available route and
/// reports whether the result is non-negative within `tol` (relative to
/// its largest magnitude) — i.e. whether `1/β ∈ Λ(μ)` numerically.
pub fn real_root(expr: &DistExpr, beta: f64, tol: f64) -> Result<(FracPowerOutput, bool)> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "beta must be > 0, got {beta}"
        )));
    }
    let t = 1.0 / beta;
    let out = if series_route(expr).is_some() {
        series_power(expr, t, DEFAULT_TAIL_TOL)?
    } else {
        let params = GridParams::suggest(expr, t);
        FracPowerOutput::Density(frac_power_grid(expr, t, params.y_max, params.n_freq)?)
    };
    let ok = out.is_nonnegative(tol);
    Ok((out, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nu_theta() -> SignedAtomicMeasure {
        SignedAtomicMeasure::delta(1.0)
    }

    fn nu_expr() -> DistExpr {
        DistExpr::nu_example(0.5).unwrap()
    }

    fn nu_measure() -> SignedAtomicMeasure {
        SignedAtomicMeasure::new([(0.0, 2.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap()
    }

    #[test]
    fn gen_binomial_examples() {
        assert_eq!(gen_binomial(7.3, 0), 1.0);
        assert_eq!(gen_binomial(3.0, 2), 3.0);
        // 1.5·0.5·(−0.5)/6 evaluated directly
        assert!((gen_binomial(1.5, 3) - (-0.0625)).abs() < 1e-16);
        // integer t truncates exactly
        assert_eq!(gen_binomial(2.0, 3), 0.0);
        assert_eq!(gen_binomial(5.0, 9), 0.0);
    }

    #[test]
    fn series_params_validation() {
        assert!(BinomialSeriesParams::new(0.5, 1.0, 1e-10, nu_theta()).is_ok());
        assert!(BinomialSeriesParams::new(1.0, 1.0, 1e-10, nu_theta()).is_err());
        assert!(BinomialSeriesParams::new(0.5, 0.0, 1e-10, nu_theta()).is_err());
        assert!(BinomialSeriesParams::new(0.5, 1.0, 0.0, nu_theta()).is_err());
        let signed = SignedAtomicMeasure::new([(0.0, 1.5), (1.0, -0.5)]).unwrap();
        assert!(BinomialSeriesParams::new(0.5, 1.0, 1e-10, signed).is_err());
    }

    #[test]
    fn compound_t1_is_nu_itself() {
        let p = BinomialSeriesParams::new(0.5, 1.0, 1e-12, nu_theta()).unwrap();
        let atoms = compound_power_atoms(&p).unwrap();
        assert_eq!(atoms.atoms().len(), 2);
        assert!((atoms.atoms()[0].weight - 2.0 / 3.0).abs() < 1e-15);
        assert!((atoms.atoms()[1].weight - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn compound_t2_matches_n_fold() {
        let p = BinomialSeriesParams::new(0.5, 2.0, 1e-12, nu_theta()).unwrap();
        let atoms = compound_power_atoms(&p).unwrap();
        let direct = nu_measure().n_fold_power(2).unwrap();
        assert!(atoms.max_atom_diff(&direct, 1e-9) < 1e-14);
        assert!(atoms.atoms().iter().all(|a| a.weight >= 0.0));
    }

    #[test]
    fn compound_t15_negative_atom_at_three() {
        let p = BinomialSeriesParams::new(0.5, 1.5, 1e-12, nu_theta()).unwrap();
        let atoms = compound_power_atoms(&p).unwrap();
        let w3 = atoms
            .atoms()
            .iter()
            .find(|a| (a.location - 3.0).abs() < 1e-12)
            .expect("atom at 3")
            .weight;
        // oracle: (1+α)^{-t}·C(1.5,3)·α³ with C(1.5,3) = 1.5·0.5·(−0.5)/6
        let oracle = (1.5f64).powf(-1.5) * (1.5 * 0.5 * (-0.5) / 6.0) * 0.125;
        assert!(w3 < 0.0);
        assert!((w3 - oracle).abs() < 1e-15, "{w3} vs {oracle}");
        assert!((w3 - (-4.2526e-3)).abs() < 1e-7);
        // mass within tail tolerance of 1
        assert!((atoms.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compound_mass_is_one_for_fractional_t() {
        for &t in &[0.1, 0.37, 1.5, 2.9, 4.25] {
            let p = BinomialSeriesParams::new(0.5, t, 1e-11, nu_theta()).unwrap();
            let atoms = compound_power_atoms(&p).unwrap();
            assert!(
                (atoms.total_mass() - 1.0).abs() < 1e-10,
                "mass off at t = {t}: {}",
                atoms.total_mass()
            );
        }
    }

    #[test]
    fn cauchy_density_f1_at_zero() {
        // finite sum l ∈ {0, 1}
        let v = cauchy_compound_density(0.5, 1.0, 0.0, 1e-12).unwrap();
        assert!((v - 5.0 / (6.0 * PI)).abs() < 1e-15);
        // cross-oracle: mixture of two Cauchy densities
        let mix = (2.0 / 3.0) * (1.0 / PI) + (1.0 / 3.0) * (1.0 / (2.0 * PI));
        assert!((v - mix).abs() < 1e-15);
    }

    #[test]
    fn cauchy_density_small_t_negative_at_two() {
        let v = cauchy_compound_density(0.5, 0.01, 2.0, 1e-13).unwrap();
        assert!(v < 0.0, "f_0.01(2) = {v} should be negative");
        // independent term-by-term oracle with its own binomial product
        let (alpha, t) = (0.5f64, 0.01f64);
        let mut oracle = 0.0;
        let mut coeff = 1.0; // C(t, l)
        let mut apow = 1.0;
        for l in 0..200u32 {
            let d = 2.0 - l as f64;
            oracle += coeff * apow * t / ((d * d + t * t) * PI);
            coeff *= (t - l as f64) / (l as f64 + 1.0);
            apow *= alpha;
        }
        oracle *= (1.0 + alpha).powf(-t);
        assert!((v - oracle).abs() < 1e-12, "{v} vs oracle {oracle}");
    }

    #[test]
    fn cauchy_density_tail_budget_is_enforced() {
        // α this close to 1 decays too slowly for the term budget
        let err = cauchy_compound_density(0.9999999, 0.5, 0.0, 1e-15).unwrap_err();
        assert!(matches!(err, Error::TailNotConverged { .. }), "{err:?}");
    }

    #[test]
    fn cauchy_density_nonnegative_on_ray() {
        let t = 1.4143; // just above √0.5/0.5
        let mut x = -10.0;
        while x <= 20.0 {
            let v = cauchy_compound_density(0.5, t, x, 1e-10).unwrap();
            assert!(v >= -1e-10, "f_{t}({x}) = {v}");
            x += 0.01;
        }
    }

    #[test]
    #[allow(clippy::approx_constant)] // 1.4142136 is the pinned reference decimal
    fn ray_threshold_value() {
        let thr = ray_threshold(0.5).unwrap();
        assert!((thr - 1.4142136).abs() < 1e-6);
        assert!(ray_threshold(0.0).is_err());
    }

    #[test]
    fn kernel_domination_on_ray() {
        // α^l·t/((x-l)²+t²) ≥ α^{l+1}·t/((x-l-1)²+t²) for t ≥ √α/(1-α)
        let alpha = 0.5;
        let t = ray_threshold(alpha).unwrap() + 1e-4;
        let mut x = -25.0;
        while x <= 45.0 {
            let mut apow = 1.0;
            for l in 0..40 {
                let d0 = x - l as f64;
                let d1 = x - (l + 1) as f64;
                let lhs = apow * t / (d0 * d0 + t * t);
                let rhs = apow * alpha * t / (d1 * d1 + t * t);
                assert!(lhs >= rhs - 1e-15, "domination fails at x={x}, l={l}");
                apow *= alpha;
            }
            x += 0.137;
        }
    }

    #[test]
    fn grid_route_recovers_cauchy_semigroup() {
        let cauchy = DistExpr::cauchy(1.0).unwrap();
        let d = frac_power_grid(&cauchy, 2.0, 60.0, 8192).unwrap();
        let mut worst = 0.0f64;
        for (x, v) in d.iter_points() {
            let exact = 2.0 / (PI * (x * x + 4.0));
            worst = worst.max((v - exact).abs());
        }
        assert!(worst < 1e-4, "sup diff {worst}");
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_route_matches_series_density_at_t1() {
        let mu = DistExpr::mu_example(0.5).unwrap();
        let d = frac_power_grid(&mu, 1.0, 60.0, 32768).unwrap();
        let mut worst = 0.0f64;
        for (x, v) in d.iter_points() {
            if (-10.0..=20.0).contains(&x) {
                let s = cauchy_compound_density(0.5, 1.0, x, 1e-12).unwrap();
                worst = worst.max((v - s).abs());
            }
        }
        assert!(worst < 1e-6, "sup diff {worst}");
    }

    #[test]
    fn grid_route_matches_series_density_at_t15() {
        let mu = DistExpr::mu_example(0.5).unwrap();
        let d = frac_power_grid(&mu, 1.5, 60.0, 16384).unwrap();
        let mut worst = 0.0f64;
        for (x, v) in d.iter_points() {
            if (-10.0..=20.0).contains(&x) {
                let s = cauchy_compound_density(0.5, 1.5, x, 1e-10).unwrap();
                worst = worst.max((v - s).abs());
            }
        }
        assert!(worst < 1e-4, "sup diff {worst}");
    }

    #[test]
    fn grid_route_rejects_undecayed_cf() {
        // a purely atomic distribution has a non-decaying CF
        let err = frac_power_grid(&nu_expr(), 1.5, 60.0, 4096).unwrap_err();
        assert!(matches!(err, Error::AliasingSuspected { .. }), "{err:?}");
    }

    #[test]
    fn grid_route_validates_arguments() {
        let cauchy = DistExpr::cauchy(1.0).unwrap();
        assert!(frac_power_grid(&cauchy, 1.0, 60.0, 100).is_err());
        assert!(frac_power_grid(&cauchy, 1.0, 60.0, 32).is_err());
        assert!(frac_power_grid(&cauchy, 0.0, 60.0, 128).is_err());
    }

    #[test]
    fn series_density_matches_stock_family() {
        let mu = DistExpr::mu_example(0.5).unwrap();
        let form = compound_form(&mu).expect("mu is compound");
        assert_eq!(form.cauchy_scale, 1.0);
        let t = 1.5;
        let atoms = form
            .power_atoms(t, form.measure_tol_for_density(t, 1e-12))
            .unwrap();
        for &x in &[-3.0, 0.0, 0.5, 2.0, 3.25, 7.0] {
            let a = form.density_at(&atoms, t, x);
            let b = cauchy_compound_density(0.5, t, x, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-11, "at {x}: {a} vs {b}");
        }
    }

    #[test]
    fn real_root_of_nu_squared_is_nu() {
        let nu2 = nu_measure().n_fold_power(2).unwrap();
        let expr = DistExpr::AtomicLeaf(nu2);
        expr.validate().unwrap();
        let (out, is_prob) = real_root(&expr, 2.0, 1e-9).unwrap();
        assert!(is_prob);
        match out {
            FracPowerOutput::Atoms(m) => {
                assert!(m.max_atom_diff(&nu_measure(), 1e-9) < 1e-10);
            }
            _ => panic!("expected atoms"),
        }
    }

    #[test]
    fn real_root_identity() {
        let (out, is_prob) = real_root(&nu_expr(), 1.0, 1e-9).unwrap();
        assert!(is_prob);
        match out {
            FracPowerOutput::Atoms(m) => {
                assert!(m.max_atom_diff(&nu_measure(), 1e-12) < 1e-12)
            }
            _ => panic!("expected atoms"),
        }
    }

    #[test]
    fn real_root_beta_two_thirds_is_signed() {
        let (out, is_prob) = real_root(&nu_expr(), 2.0 / 3.0, 1e-7).unwrap();
        assert!(!is_prob);
        match out {
            FracPowerOutput::Atoms(m) => {
                let a = m.min_weight().unwrap();
                assert!((a.location - 3.0).abs() < 1e-12);
                assert!(a.weight < 0.0);
            }
            _ => panic!("expected atoms"),
        }
    }

    #[test]
    fn lattice_route_halves_a_winding_base() {
        // dominant atom away from 0 forces the winding-strip path
        let base = SignedAtomicMeasure::new([(0.0, 0.1), (1.0, 0.9)]).unwrap();
        let half = lattice_power(&base, 0.5).unwrap();
        let squared = half.convolve(&half);
        assert!(
            squared.max_atom_diff(&base, 1e-9) < 1e-9,
            "squared root should reproduce the base"
        );
    }

    #[test]
    fn lattice_route_integer_power_matches_convolution() {
        let base = SignedAtomicMeasure::new([(0.0, 0.3), (1.0, 0.3), (2.0, 0.4)]).unwrap();
        let cubed = lattice_power(&base, 3.0).unwrap();
        let direct = base.n_fold_power(3).unwrap();
        assert!(cubed.max_atom_diff(&direct, 1e-9) < 1e-11);
    }

    #[test]
    fn lattice_route_rejects_non_lattice_support() {
        let base = SignedAtomicMeasure::new([(0.0, 0.4), (1.0, 0.3), (PI, 0.3)]).unwrap();
        assert!(lattice_power(&base, 0.5).is_err());
    }

    #[test]
    fn series_semigroup_convolution() {
        for &(s, t) in &[(1.5, 2.5), (1.3, 1.4), (0.6, 0.9)] {
            let tol = 1e-11;
            let ps = BinomialSeriesParams::new(0.5, s, tol, nu_theta()).unwrap();
            let pt = BinomialSeriesParams::new(0.5, t, tol, nu_theta()).unwrap();
            let pst = BinomialSeriesParams::new(0.5, s + t, tol, nu_theta()).unwrap();
            let conv =
                compound_power_atoms(&ps).unwrap().convolve(&compound_power_atoms(&pt).unwrap());
            let direct = compound_power_atoms(&pst).unwrap();
            let diff = conv.max_atom_diff(&direct, 1e-9);
            assert!(diff < 2.0 * tol, "semigroup defect {diff} at ({s}, {t})");
        }
    }

    #[test]
    fn sign_pattern_of_series_weights() {
        // positive through ⌊t⌋, then alternating starting positive
        let p = BinomialSeriesParams::new(0.5, 2.6, 1e-12, nu_theta()).unwrap();
        let atoms = compound_power_atoms(&p).unwrap();
        for a in atoms.atoms() {
            let l = a.location.round() as i64;
            let expected_positive = l <= 2 || (l - 3) % 2 == 0;
            assert_eq!(
                a.weight > 0.0,
                expected_positive,
                "sign at l = {l}: {}",
                a.weight
            );
        }
    }

    #[test]
    fn convolve_grids_cauchy_scales_add() {
        let cauchy = DistExpr::cauchy(1.0).unwrap();
        let a = frac_power_grid(&cauchy, 0.5, 80.0, 16384).unwrap();
        let b = frac_power_grid(&cauchy, 0.7, 80.0, 16384).unwrap();
        let conv = convolve_grids(&a, &b).unwrap();
        let mut worst = 0.0f64;
        for (x, v) in conv.iter_points() {
            if x.abs() <= 50.0 {
                let exact = 1.2 / (PI * (x * x + 1.44));
                worst = worst.max((v - exact).abs());
            }
        }
        assert!(worst < 1e-4, "sup diff {worst}");
    }
}
