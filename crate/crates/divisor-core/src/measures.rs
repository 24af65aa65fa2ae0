//! Exact and sampled (possibly signed) measures, and the symbolic
//! distribution expression tree.
//!
//! [`SignedAtomicMeasure`] is a finite list of weighted point masses in
//! canonical form (locations strictly increasing, no zero weights).
//! Weights may be negative: fractional convolution powers of
//! non-infinitely-divisible distributions produce genuine signed
//! measures, so negativity is representable, not an error.
//!
//! [`GridSignedDensity`] is a density sampled on a uniform grid, the
//! result type of the transform route.
//!
//! [`DistExpr`] is the user-facing symbolic model of a probability
//! distribution: atomic leaves, Cauchy and Gaussian leaves, convolutions
//! and mixtures. Every leaf is a probability distribution; signed data
//! only ever appears in *results*.
//!
//! All values are immutable after construction and all operations are
//! pure.

use crate::{Error, Result};

/// Weight dropped as numerically zero during canonicalization.
pub const ZERO_WEIGHT_TOL: f64 = 1e-15;

/// Leaf and mixture masses must equal 1 within this tolerance.
pub const MASS_TOL: f64 = 1e-12;

/// Maximum expression tree depth accepted by validation.
pub const MAX_TREE_DEPTH: usize = 64;

/// Maximum expression tree node count accepted by validation.
pub const MAX_TREE_NODES: usize = 4096;

/// One weighted point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// A finite signed atomic measure in canonical form.
///
/// Canonical means: locations strictly increasing, all weights finite
/// and non-zero (|w| ≥ [`ZERO_WEIGHT_TOL`] after merging).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SignedAtomicMeasure {
    atoms: Vec<Atom>,
}

impl SignedAtomicMeasure {
    /// Builds a measure from `(location, weight)` pairs, canonicalizing
    /// with the default merge tolerance.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let atoms: Vec<Atom> = pairs
            .into_iter()
            .map(|(location, weight)| Atom { location, weight })
            .collect();
        for a in &atoms {
            if !a.location.is_finite() || !a.weight.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite atom ({}, {})",
                    a.location, a.weight
                )));
            }
        }
        let tol = default_merge_tol(&atoms);
        Ok(Self {
            atoms: canonicalize(atoms, tol),
        })
    }

    /// The unit point mass δ at `location`.
    pub fn delta(location: f64) -> Self {
        Self {
            atoms: vec![Atom {
                location,
                weight: 1.0,
            }],
        }
    }

    /// Canonical atoms, sorted by location.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Σ weights.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Σ |weights| (total variation).
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    /// The atom with the smallest weight, if any.
    pub fn min_weight(&self) -> Option<Atom> {
        self.atoms
            .iter()
            .copied()
            .min_by(|a, b| a.weight.total_cmp(&b.weight))
    }

    /// max |weight| over all atoms (0 for the empty measure).
    pub fn max_abs_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).fold(0.0, f64::max)
    }

    /// True when every weight is positive and the total mass is 1
    /// within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.atoms.iter().all(|a| a.weight > 0.0) && (self.total_mass() - 1.0).abs() <= tol
    }

    /// Exact convolution: an atom at `x_i + y_j` with weight `w_i·v_j`
    /// for every pair, like locations merged. Total mass is the product
    /// of the input masses.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(Atom {
                    location: a.location + b.location,
                    weight: a.weight * b.weight,
                });
            }
        }
        let tol = default_merge_tol(&atoms);
        Self {
            atoms: canonicalize(atoms, tol),
        }
    }

    /// `n`-fold convolution power by binary exponentiation; `n = 1`
    /// returns a clone.
    pub fn n_fold_power(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "n_fold_power requires n >= 1".into(),
            ));
        }
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    Some(m) => m.convolve(&base),
                    None => base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        Ok(acc.expect("n >= 1"))
    }

    /// Translates every atom by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location + offset,
                    weight: a.weight,
                })
                .collect(),
        }
    }

    /// Multiplies every weight by `factor` (canonicalizes to drop
    /// weights that became numerically zero).
    pub fn scaled(&self, factor: f64) -> Self {
        let atoms: Vec<Atom> = self
            .atoms
            .iter()
            .map(|a| Atom {
                location: a.location,
                weight: a.weight * factor,
            })
            .collect();
        Self {
            atoms: canonicalize(atoms, 0.0),
        }
    }

    /// Re-canonicalizes with an explicit merge tolerance.
    pub fn canonicalized(&self, merge_tol: f64) -> Self {
        Self {
            atoms: canonicalize(self.atoms.clone(), merge_tol),
        }
    }

    pub(crate) fn from_canonical_atoms(atoms: Vec<Atom>) -> Self {
        debug_assert!(atoms.windows(2).all(|w| w[0].location < w[1].location));
        Self { atoms }
    }

    /// Largest |weight difference| against `other`, treating missing
    /// atoms as weight 0. Locations are matched within `loc_tol`.
    pub fn max_atom_diff(&self, other: &Self, loc_tol: f64) -> f64 {
        let mut i = 0;
        let mut j = 0;
        let mut worst: f64 = 0.0;
        while i < self.atoms.len() || j < other.atoms.len() {
            match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(a), Some(b)) if (a.location - b.location).abs() <= loc_tol => {
                    worst = worst.max((a.weight - b.weight).abs());
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.location < b.location => {
                    worst = worst.max(a.weight.abs());
                    i += 1;
                }
                (Some(_), Some(_)) => {
                    worst = worst.max(other.atoms[j].weight.abs());
                    j += 1;
                }
                (Some(a), None) => {
                    worst = worst.max(a.weight.abs());
                    i += 1;
                }
                (None, Some(b)) => {
                    worst = worst.max(b.weight.abs());
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        worst
    }
}

/// Default merge tolerance: `1e-12 · max(1, |location span|)`.
fn default_merge_tol(atoms: &[Atom]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in atoms {
        lo = lo.min(a.location);
        hi = hi.max(a.location);
    }
    let span = if hi > lo { hi - lo } else { 0.0 };
    1e-12 * span.max(1.0)
}

/// Sorts atoms, merges locations within `merge_tol` (weights summed) and
/// drops weights below [`ZERO_WEIGHT_TOL`].
pub fn canonicalize(mut atoms: Vec<Atom>, merge_tol: f64) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (a.location - last.location).abs() <= merge_tol => {
                last.weight += a.weight;
            }
            _ => out.push(a),
        }
    }
    out.retain(|a| a.weight.abs() >= ZERO_WEIGHT_TOL);
    out
}

/// A signed density sampled on a uniform grid: value `k` sits at
/// `x_origin + k·dx` and carries units 1/length.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignedDensity {
    x_origin: f64,
    dx: f64,
    values: Vec<f64>,
}

impl GridSignedDensity {
    pub fn new(x_origin: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidArgument(format!("dx must be > 0, got {dx}")));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty density grid".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite density sample".into()));
        }
        Ok(Self {
            x_origin,
            dx,
            values,
        })
    }

    pub fn x_origin(&self) -> f64 {
        self.x_origin
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Abscissa of sample `k`.
    pub fn x_at(&self, k: usize) -> f64 {
        self.x_origin + k as f64 * self.dx
    }

    /// Riemann-sum mass `dx·Σ values`.
    pub fn total_mass(&self) -> f64 {
        self.dx * self.values.iter().sum::<f64>()
    }

    /// Linearly interpolated value at `x`; `None` outside the grid.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let pos = (x - self.x_origin) / self.dx;
        if pos < -1e-9 || pos > (self.values.len() - 1) as f64 + 1e-9 {
            return None;
        }
        let k = (pos.floor().max(0.0) as usize).min(self.values.len() - 1);
        if k + 1 >= self.values.len() {
            return Some(self.values[k]);
        }
        let s = pos - k as f64;
        Some(self.values[k] * (1.0 - s) + self.values[k + 1] * s)
    }

    /// Smallest sample and its abscissa.
    pub fn min_value(&self) -> (f64, f64) {
        let (k, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty by construction");
        (self.x_at(k), v)
    }

    /// max |value|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn iter_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (self.x_at(k), v))
    }

    /// True when every sample is ≥ `-tol` and the mass is 1 within
    /// `mass_tol`.
    pub fn is_probability(&self, tol: f64, mass_tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol) && (self.total_mass() - 1.0).abs() <= mass_tol
    }
}

/// Symbolic model of a probability distribution on ℝ.
///
/// Every leaf is a probability distribution; `Convolve` and `Mixture`
/// compose them. Use the constructors ([`DistExpr::atomic`] and
/// friends) or [`DistExpr::validate`] after building a tree directly.
#[derive(Debug, Clone, PartialEq)]
pub enum DistExpr {
    /// Finite atomic probability distribution: all weights positive,
    /// total mass 1.
    AtomicLeaf(SignedAtomicMeasure),
    /// Cauchy distribution with density `scale/(π(x² + scale²))`.
    CauchyLeaf { scale: f64 },
    /// Gaussian distribution; `variance = 0` degenerates to a point
    /// mass at `mean`.
    GaussianLeaf { mean: f64, variance: f64 },
    /// Convolution (sum of independent draws) of the children.
    Convolve(Vec<DistExpr>),
    /// Mixture with positive weights summing to 1.
    Mixture(Vec<(f64, DistExpr)>),
}

impl DistExpr {
    /// Atomic probability leaf from `(location, weight)` pairs.
    pub fn atomic(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let m = SignedAtomicMeasure::new(pairs)?;
        let expr = DistExpr::AtomicLeaf(m);
        expr.validate()?;
        Ok(expr)
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        let expr = DistExpr::CauchyLeaf { scale };
        expr.validate()?;
        Ok(expr)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        let expr = DistExpr::GaussianLeaf { mean, variance };
        expr.validate()?;
        Ok(expr)
    }

    pub fn convolve(children: Vec<DistExpr>) -> Result<Self> {
        let expr = DistExpr::Convolve(children);
        expr.validate()?;
        Ok(expr)
    }

    pub fn mixture(pairs: Vec<(f64, DistExpr)>) -> Result<Self> {
        let expr = DistExpr::Mixture(pairs);
        expr.validate()?;
        Ok(expr)
    }

    /// The two-atom distribution `ν = (1+α)⁻¹(δ₀ + α δ₁)` for
    /// `α ∈ (0, 1)` — the built-in minimally divisible example.
    pub fn nu_example(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let c = 1.0 / (1.0 + alpha);
        Self::atomic([(0.0, c), (1.0, alpha * c)])
    }

    /// `μ = γ₁ ∗ ν` — the built-in partly divisible example (Cauchy of
    /// scale 1 convolved with [`DistExpr::nu_example`]).
    pub fn mu_example(alpha: f64) -> Result<Self> {
        Self::convolve(vec![Self::cauchy(1.0)?, Self::nu_example(alpha)?])
    }

    /// Checks all structural invariants of the tree.
    pub fn validate(&self) -> Result<()> {
        let mut nodes = 0usize;
        self.validate_inner(0, &mut nodes)
    }

    fn validate_inner(&self, depth: usize, nodes: &mut usize) -> Result<()> {
        if depth > MAX_TREE_DEPTH {
            return Err(Error::InvalidDistribution(format!(
                "tree depth exceeds {MAX_TREE_DEPTH}"
            )));
        }
        *nodes += 1;
        if *nodes > MAX_TREE_NODES {
            return Err(Error::InvalidDistribution(format!(
                "tree node count exceeds {MAX_TREE_NODES}"
            )));
        }
        match self {
            DistExpr::AtomicLeaf(m) => {
                if m.is_empty() {
                    return Err(Error::InvalidDistribution("empty atomic leaf".into()));
                }
                if let Some(a) = m.atoms().iter().find(|a| a.weight <= 0.0) {
                    return Err(Error::InvalidDistribution(format!(
                        "atomic leaf weight {} at {} is not positive",
                        a.weight, a.location
                    )));
                }
                let mass = m.total_mass();
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "atomic leaf mass {mass} differs from 1 by more than {MASS_TOL:e}"
                    )));
                }
                Ok(())
            }
            DistExpr::CauchyLeaf { scale } => {
                if !(*scale > 0.0) || !scale.is_finite() {
                    return Err(Error::InvalidDistribution(format!(
                        "cauchy scale must be > 0, got {scale}"
                    )));
                }
                Ok(())
            }
            DistExpr::GaussianLeaf { mean, variance } => {
                if !mean.is_finite() || !variance.is_finite() || *variance < 0.0 {
                    return Err(Error::InvalidDistribution(format!(
                        "gaussian (mean {mean}, variance {variance}) invalid"
                    )));
                }
                Ok(())
            }
            DistExpr::Convolve(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidDistribution("empty convolution".into()));
                }
                for c in children {
                    c.validate_inner(depth + 1, nodes)?;
                }
                Ok(())
            }
            DistExpr::Mixture(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::InvalidDistribution("empty mixture".into()));
                }
                let mut mass = 0.0;
                for (w, c) in pairs {
                    if !(*w > 0.0) || !w.is_finite() {
                        return Err(Error::InvalidDistribution(format!(
                            "mixture weight {w} is not positive"
                        )));
                    }
                    mass += w;
                    c.validate_inner(depth + 1, nodes)?;
                }
                if (mass - 1.0).abs() > MASS_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "mixture weights sum to {mass}, expected 1 within {MASS_TOL:e}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Flattens the tree into a product `γ_c ∗ N(m, v) ∗ atomic` when
    /// possible. Mixtures flatten only when all their branches are
    /// purely atomic.
    pub(crate) fn flatten_product(&self) -> Option<ProductForm> {
        match self {
            DistExpr::AtomicLeaf(m) => Some(ProductForm::atomic(m.clone())),
            DistExpr::CauchyLeaf { scale } => Some(ProductForm {
                cauchy_scale: *scale,
                gauss_mean: 0.0,
                gauss_var: 0.0,
                atomic: SignedAtomicMeasure::delta(0.0),
            }),
            DistExpr::GaussianLeaf { mean, variance } => {
                if *variance == 0.0 {
                    // degenerate Gaussian is a point mass
                    Some(ProductForm::atomic(SignedAtomicMeasure::delta(*mean)))
                } else {
                    Some(ProductForm {
                        cauchy_scale: 0.0,
                        gauss_mean: *mean,
                        gauss_var: *variance,
                        atomic: SignedAtomicMeasure::delta(0.0),
                    })
                }
            }
            DistExpr::Convolve(children) => {
                let mut acc = ProductForm::atomic(SignedAtomicMeasure::delta(0.0));
                for c in children {
                    let f = c.flatten_product()?;
                    acc.cauchy_scale += f.cauchy_scale;
                    acc.gauss_mean += f.gauss_mean;
                    acc.gauss_var += f.gauss_var;
                    acc.atomic = acc.atomic.convolve(&f.atomic);
                }
                Some(acc)
            }
            DistExpr::Mixture(pairs) => {
                // w₁·a₁ + w₂·a₂ of atomic measures is again atomic;
                // mixtures involving continuous parts do not factor.
                let mut atoms: Vec<Atom> = Vec::new();
                for (w, c) in pairs {
                    let f = c.flatten_product()?;
                    if f.cauchy_scale != 0.0 || f.gauss_var != 0.0 {
                        return None;
                    }
                    for a in f.atomic.atoms() {
                        atoms.push(Atom {
                            location: a.location,
                            weight: w * a.weight,
                        });
                    }
                }
                let tol = default_merge_tol(&atoms);
                Some(ProductForm::atomic(SignedAtomicMeasure::from_canonical_atoms(
                    canonicalize(atoms, tol),
                )))
            }
        }
    }

    /// Compact one-line rendering for reports.
    pub fn describe(&self) -> String {
        match self {
            DistExpr::AtomicLeaf(m) => {
                let parts: Vec<String> = m
                    .atoms()
                    .iter()
                    .map(|a| format!("({}, {:.6})", a.location, a.weight))
                    .collect();
                format!("atoms[{}]", parts.join(", "))
            }
            DistExpr::CauchyLeaf { scale } => format!("cauchy({scale})"),
            DistExpr::GaussianLeaf { mean, variance } => format!("gaussian({mean}, {variance})"),
            DistExpr::Convolve(children) => {
                let parts: Vec<String> = children.iter().map(|c| c.describe()).collect();
                format!("convolve({})", parts.join(" * "))
            }
            DistExpr::Mixture(pairs) => {
                let parts: Vec<String> = pairs
                    .iter()
                    .map(|(w, c)| format!("{w}: {}", c.describe()))
                    .collect();
                format!("mix({})", parts.join(" + "))
            }
        }
    }
}

/// `expr` factored as `γ_{cauchy_scale} ∗ N(gauss_mean, gauss_var) ∗ atomic`.
#[derive(Debug, Clone)]
pub(crate) struct ProductForm {
    pub cauchy_scale: f64,
    pub gauss_mean: f64,
    pub gauss_var: f64,
    pub atomic: SignedAtomicMeasure,
}

impl ProductForm {
    fn atomic(m: SignedAtomicMeasure) -> Self {
        Self {
            cauchy_scale: 0.0,
            gauss_mean: 0.0,
            gauss_var: 0.0,
            atomic: m,
        }
    }

    /// The dominant atom of the atomic factor: the atom whose weight
    /// exceeds the sum of all other weights, if one exists.
    pub fn dominant_atom(&self) -> Option<Atom> {
        let total: f64 = self.atomic.atoms().iter().map(|a| a.weight).sum();
        self.atomic
            .atoms()
            .iter()
            .copied()
            .find(|a| a.weight > total - a.weight)
    }
}
