//! Max-stable distributions with unit Fréchet margins, described by a
//! spectral (de Haan) vector `Y ≥ 0` with `E[Y_i] = 1` such that
//! `-ln H(x) = E[max_i Y_i / x_i]`, plus the non-max-stable members of
//! their domains of attraction used in domination experiments.
//!
//! A coordinate equal to `f64::INFINITY` means "marginalised out": the
//! closed forms treat `1/∞ = 0`, which is exactly what evaluating `H` with
//! that coordinate sent to `+∞` gives.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Gamma};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::rng::Stream;

/// Which spectral vector a model samples.
///
/// Every family has many spectral vectors generating the same `H`.
/// `Raw` is the textbook construction (Fréchet ratios for the logistic,
/// log-normals for Hüsler–Reiss), which has heavy tails. `SumNormalized`
/// draws `d·Y/ΣY` under the law tilted by `ΣY/d`; it is bounded by `d`,
/// so every Monte Carlo functional of it has finite variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Raw,
    SumNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Product df `H0`.
    Independence,
    /// Upper df `H∞ = min_i Φ(x_i)`.
    Comonotone,
    /// `-ln H(x) = (Σ x_i^{-α})^{1/α}`, `α > 1`.
    Logistic { alpha: f64 },
    HuslerReiss(Arc<HuslerReiss>),
}

/// Hüsler–Reiss parameters. The Gaussian vector behind the spectral vector
/// is anchored at the first coordinate: `G_0 = 0` and
/// `Cov(G_i, G_j) = (Γ_i0 + Γ_j0 - Γ_ij) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HuslerReiss {
    variogram: DMatrix<f64>,
    covariance: DMatrix<f64>,
    /// `factor * factor^T = covariance`.
    factor: DMatrix<f64>,
}

impl HuslerReiss {
    pub fn new(variogram: DMatrix<f64>) -> Result<Self> {
        let d = variogram.nrows();
        if d < 2 || variogram.ncols() != d {
            return Err(Error::invalid("variogram must be a square matrix of size >= 2"));
        }
        for i in 0..d {
            if variogram[(i, i)] != 0.0 {
                return Err(Error::invalid("variogram diagonal must be zero"));
            }
            for j in 0..d {
                let g = variogram[(i, j)];
                if !(g.is_finite() && g >= 0.0) || (g - variogram[(j, i)]).abs() > 1e-12 {
                    return Err(Error::invalid(
                        "variogram entries must be finite, nonnegative and symmetric",
                    ));
                }
            }
        }
        let covariance = DMatrix::from_fn(d, d, |i, j| {
            0.5 * (variogram[(i, 0)] + variogram[(j, 0)] - variogram[(i, j)])
        });
        let factor = psd_factor(&covariance)?;
        Ok(Self {
            variogram,
            covariance,
            factor,
        })
    }

    pub fn variogram(&self) -> &DMatrix<f64> {
        &self.variogram
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

/// Symmetric square root `V·sqrt(Λ)` of a positive-semidefinite matrix.
/// Tolerates exact singularity; rejects clearly negative eigenvalues.
fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let eig = m.clone().symmetric_eigen();
    let mut factor = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -1e-10 * scale {
            return Err(Error::invalid(format!(
                "matrix is not positive semidefinite (eigenvalue {lambda:.3e})"
            )));
        }
        let s = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// A max-stable distribution with unit Fréchet margins, possibly projected
/// onto a subset of its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    family: Family,
    full_dim: usize,
    /// Retained coordinates of the full model, ascending.
    coords: Vec<usize>,
    repr: Representation,
}

pub fn make_h0(d: usize) -> Result<SpectralModel> {
    SpectralModel::new(Family::Independence, d)
}

pub fn make_hinf(d: usize) -> Result<SpectralModel> {
    SpectralModel::new(Family::Comonotone, d)
}

pub fn make_logistic(d: usize, alpha: f64) -> Result<SpectralModel> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "logistic requires alpha > 1 (spectral mean diverges otherwise), got {alpha}"
        )));
    }
    SpectralModel::new(Family::Logistic { alpha }, d)
}

pub fn make_husler_reiss(variogram: DMatrix<f64>) -> Result<SpectralModel> {
    let d = variogram.nrows();
    SpectralModel::new(Family::HuslerReiss(Arc::new(HuslerReiss::new(variogram)?)), d)
}

/// Hüsler–Reiss with every off-diagonal variogram entry equal to `gamma`.
pub fn make_husler_reiss_equi(d: usize, gamma: f64) -> Result<SpectralModel> {
    if d < 2 {
        return Err(Error::invalid("dimension must be at least 2"));
    }
    make_husler_reiss(DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { gamma }))
}

impl SpectralModel {
    fn new(family: Family, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("dimension must be at least 2, got {d}")));
        }
        Ok(Self {
            family,
            full_dim: d,
            coords: (0..d).collect(),
            repr: Representation::SumNormalized,
        })
    }

    pub fn with_representation(mut self, repr: Representation) -> Self {
        self.repr = repr;
        self
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Number of coordinates of this (possibly marginal) model.
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinates of the parent model retained by this one (0-based).
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn is_marginal(&self) -> bool {
        self.coords.len() != self.full_dim
    }

    /// Projection onto the coordinates `subset` (0-based, relative to this model).
    pub fn marginalize(&self, subset: &[usize]) -> Result<SpectralModel> {
        let coords = checked_subset(subset, self.dim())?;
        Ok(SpectralModel {
            coords: coords.iter().map(|&k| self.coords[k]).collect(),
            ..self.clone()
        })
    }

    fn check_point(&self, x: &[f64]) {
        assert_eq!(x.len(), self.dim(), "point dimension does not match model");
    }

    /// Closed-form `-ln H(x)` when the family has one.
    ///
    /// Coordinates may be `+∞` (dropped) or `0` (giving `+∞`).
    pub fn neg_log_h(&self, x: &[f64]) -> Option<f64> {
        self.check_point(x);
        match &self.family {
            Family::Independence => Some(x.iter().map(|v| v.recip()).sum()),
            Family::Comonotone => Some(x.iter().fold(0.0f64, |m, v| m.max(v.recip()))),
            Family::Logistic { alpha } => {
                let s: f64 = x.iter().map(|v| v.powf(-alpha)).sum();
                Some(s.powf(alpha.recip()))
            }
            Family::HuslerReiss(_) => None,
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self.family, Family::HuslerReiss(_))
    }

    /// `H(x)` from the closed form.
    pub fn cdf(&self, x: &[f64]) -> Option<f64> {
        self.neg_log_h(x).map(|v| (-v).exp())
    }

    /// Zero-homogeneous weights with `-ln H(x) = Σ Ψ_i(x)/x_i`.
    pub fn psi(&self, x: &[f64], out: &mut [f64]) -> Option<()> {
        self.check_point(x);
        match &self.family {
            Family::Independence => out.fill(1.0),
            Family::Comonotone => {
                out.fill(0.0);
                let argmin = x
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                out[argmin] = 1.0;
            }
            Family::Logistic { alpha } => {
                let s: f64 = x.iter().map(|v| v.powf(-alpha)).sum();
                let tail = s.powf((1.0 - alpha) / alpha);
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = v.powf(1.0 - alpha) * tail;
                }
            }
            Family::HuslerReiss(_) => return None,
        }
        Some(())
    }

    /// `(V_1, V_2, V_12)`: first and mixed partial derivatives of
    /// `V = -ln H` for bivariate models with a smooth closed form.
    pub fn partials_2d(&self, x1: f64, x2: f64) -> Option<(f64, f64, f64)> {
        if self.dim() != 2 {
            return None;
        }
        match &self.family {
            Family::Independence => Some((-(x1 * x1).recip(), -(x2 * x2).recip(), 0.0)),
            Family::Logistic { alpha } => {
                let a = *alpha;
                let s = x1.powf(-a) + x2.powf(-a);
                let p1 = x1.powf(-a - 1.0);
                let p2 = x2.powf(-a - 1.0);
                let v1 = -p1 * s.powf(1.0 / a - 1.0);
                let v2 = -p2 * s.powf(1.0 / a - 1.0);
                let v12 = -(a - 1.0) * p1 * p2 * s.powf(1.0 / a - 2.0);
                Some((v1, v2, v12))
            }
            Family::Comonotone | Family::HuslerReiss(_) => None,
        }
    }

    /// Extremal coefficient `-ln H(1,…,1)` when available in closed form.
    pub fn theta_closed_form(&self) -> Option<f64> {
        self.neg_log_h(&vec![1.0; self.dim()])
    }

    /// Almost-sure upper bound on `max_i Y_i` for the sampled representation.
    pub fn y_bounded_by(&self) -> Option<f64> {
        match (&self.family, self.repr) {
            (Family::Independence, _) => Some(self.full_dim as f64),
            (Family::Comonotone, _) => Some(1.0),
            (_, Representation::SumNormalized) => Some(self.full_dim as f64),
            (_, Representation::Raw) => None,
        }
    }

    /// The `p`-quantile of `max_i Y_i` (an upper bound on it for
    /// Hüsler–Reiss), used as the truncation level for unbounded vectors.
    pub fn y_max_quantile(&self, p: f64) -> f64 {
        if let Some(b) = self.y_bounded_by() {
            return b;
        }
        let k = self.dim() as f64;
        match &self.family {
            Family::Logistic { alpha } => {
                // max of k iid Fréchet(α) is Fréchet(α) with scale k^{1/α}.
                (k / -p.ln()).powf(alpha.recip()) / gamma(1.0 - alpha.recip())
            }
            Family::HuslerReiss(hr) => {
                // Union bound: each coordinate below its (1 - (1-p)/k)-quantile.
                let z = normal_upper_quantile((1.0 - p) / k);
                self.coords
                    .iter()
                    .map(|&c| {
                        let v = hr.covariance[(c, c)];
                        (v.sqrt() * z - 0.5 * v).exp()
                    })
                    .fold(0.0, f64::max)
            }
            Family::Independence | Family::Comonotone => unreachable!("bounded families"),
        }
    }

    /// Scratch-owning sampler for spectral vectors of this model.
    pub fn sampler(&self) -> SpectralSampler<'_> {
        let gamma_law = match (&self.family, self.repr) {
            (Family::Logistic { alpha }, Representation::SumNormalized) => {
                Some(Gamma::new(1.0 - alpha.recip(), 1.0).expect("alpha > 1"))
            }
            _ => None,
        };
        let logistic_scale = match self.family {
            Family::Logistic { alpha } => gamma(1.0 - alpha.recip()),
            _ => 1.0,
        };
        SpectralSampler {
            model: self,
            full: vec![0.0; self.full_dim],
            normals: vec![0.0; self.full_dim],
            out: vec![0.0; self.dim()],
            gamma_law,
            logistic_scale,
        }
    }
}

fn checked_subset(subset: &[usize], d: usize) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::invalid("marginal index set must be nonempty"));
    }
    let mut v = subset.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != subset.len() || v.iter().any(|&k| k >= d) {
        return Err(Error::invalid(format!(
            "marginal index set {subset:?} must hold distinct indices below {d}"
        )));
    }
    Ok(v)
}

/// Draws spectral vectors of one [`SpectralModel`].
pub struct SpectralSampler<'a> {
    model: &'a SpectralModel,
    full: Vec<f64>,
    normals: Vec<f64>,
    out: Vec<f64>,
    gamma_law: Option<Gamma<f64>>,
    logistic_scale: f64,
}

impl SpectralSampler<'_> {
    pub fn model(&self) -> &SpectralModel {
        self.model
    }

    /// One spectral vector, projected onto the model's coordinates.
    pub fn draw(&mut self, s: &mut Stream) -> &[f64] {
        let d = self.model.full_dim;
        match (&self.model.family, self.model.repr) {
            (Family::Independence, _) => {
                self.full.fill(0.0);
                self.full[s.index(d)] = d as f64;
            }
            (Family::Comonotone, _) => self.full.fill(1.0),
            (Family::Logistic { alpha }, Representation::Raw) => {
                for y in self.full.iter_mut() {
                    *y = s.frechet_shape(*alpha) / self.logistic_scale;
                }
            }
            (Family::Logistic { alpha }, Representation::SumNormalized) => {
                let j = s.index(d);
                let law = self.gamma_law.as_ref().expect("built with the sampler");
                for (i, w) in self.full.iter_mut().enumerate() {
                    *w = if i == j {
                        law.sample(s.rng()).powf(-alpha.recip())
                    } else {
                        s.frechet_shape(*alpha)
                    };
                }
                let total: f64 = self.full.iter().sum();
                for w in self.full.iter_mut() {
                    *w *= d as f64 / total;
                }
            }
            (Family::HuslerReiss(hr), repr) => {
                let tilt = match repr {
                    Representation::Raw => None,
                    Representation::SumNormalized => Some(s.index(d)),
                };
                for z in self.normals.iter_mut() {
                    *z = s.std_normal();
                }
                for i in 0..d {
                    let mut g: f64 = (0..d).map(|k| hr.factor[(i, k)] * self.normals[k]).sum();
                    if let Some(j) = tilt {
                        g += hr.covariance[(i, j)];
                    }
                    self.full[i] = g - 0.5 * hr.covariance[(i, i)];
                }
                match repr {
                    Representation::Raw => self.full.iter_mut().for_each(|v| *v = v.exp()),
                    Representation::SumNormalized => {
                        let m = self.full.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        self.full.iter_mut().for_each(|v| *v = (*v - m).exp());
                        let total: f64 = self.full.iter().sum();
                        self.full.iter_mut().for_each(|v| *v *= d as f64 / total);
                    }
                }
            }
        }
        for (o, &c) in self.out.iter_mut().zip(&self.model.coords) {
            *o = self.full[c];
        }
        &self.out
    }
}

impl fmt::Display for SpectralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.full_dim;
        match &self.family {
            Family::Independence => write!(f, "h0({d})")?,
            Family::Comonotone => write!(f, "hinf({d})")?,
            Family::Logistic { alpha } => write!(f, "logistic({d}, {alpha})")?,
            Family::HuslerReiss(hr) => {
                write!(f, "husler_reiss({d}, gamma=[")?;
                write_upper_triangle(f, &hr.variogram)?;
                write!(f, "])")?;
            }
        }
        if self.is_marginal() {
            let idx: Vec<String> = self.coords.iter().map(|c| (c + 1).to_string()).collect();
            write!(f, "[{}]", idx.join(","))?;
        }
        Ok(())
    }
}

fn write_upper_triangle(f: &mut fmt::Formatter<'_>, m: &DMatrix<f64>) -> fmt::Result {
    let mut first = true;
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{}", m[(i, j)])?;
            first = false;
        }
    }
    Ok(())
}

/// Gaussian copula with unit Fréchet margins.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussCopula {
    correlation: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl GaussCopula {
    pub fn new(correlation: DMatrix<f64>) -> Result<Self> {
        let d = correlation.nrows();
        if d < 2 || correlation.ncols() != d {
            return Err(Error::invalid("correlation must be a square matrix of size >= 2"));
        }
        for i in 0..d {
            if (correlation[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid("correlation diagonal must be one"));
            }
            for j in 0..d {
                let r = correlation[(i, j)];
                if i != j && !(r.abs() < 1.0) {
                    return Err(Error::invalid(format!(
                        "off-diagonal correlations must satisfy |rho| < 1, got {r}"
                    )));
                }
                if (r - correlation[(j, i)]).abs() > 1e-12 {
                    return Err(Error::invalid("correlation must be symmetric"));
                }
            }
        }
        let factor = psd_factor(&correlation)?;
        Ok(Self {
            correlation,
            factor,
        })
    }

    pub fn equicorrelated(d: usize, rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { rho }))
    }

    pub fn dim(&self) -> usize {
        self.correlation.nrows()
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    pub(crate) fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    fn marginal(&self, subset: &[usize]) -> Result<Self> {
        let k = subset.len();
        Self::new(DMatrix::from_fn(k, k, |i, j| self.correlation[(subset[i], subset[j])]))
    }

    /// `1 - G(x)` for the bivariate copula, accurate near `G = 1`.
    fn complement_2d(&self, x1: f64, x2: f64) -> Result<f64> {
        let q1 = frechet_survival(x1);
        let q2 = frechet_survival(x2);
        if q1 >= 1.0 || q2 >= 1.0 {
            return Ok(1.0);
        }
        if q1 <= 0.0 {
            return Ok(q2);
        }
        if q2 <= 0.0 {
            return Ok(q1);
        }
        let a = normal_upper_quantile(q1);
        let b = normal_upper_quantile(q2);
        let joint = bivariate_normal_upper(a, b, self.correlation[(0, 1)])?;
        Ok((q1 + q2 - joint).clamp(0.0, 1.0))
    }
}

/// `1 - Φ(x) = 1 - exp(-1/x)` for unit Fréchet.
pub fn frechet_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        -(-x.recip()).exp_m1()
    }
}

/// `P(N > z)` for standard normal `N`.
pub fn normal_upper(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// `z` with `P(N > z) = q`.
pub fn normal_upper_quantile(q: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::standard();
    if q < 0.5 {
        -n.inverse_cdf(q)
    } else {
        n.inverse_cdf(1.0 - q)
    }
}

/// `P(N_1 > a, N_2 > b)` for a standard bivariate normal with correlation
/// `rho`, by adaptive quadrature of `∫_a^∞ φ(z) P(N > (b - ρz)/√(1-ρ²)) dz`.
pub fn bivariate_normal_upper(a: f64, b: f64, rho: f64) -> Result<f64> {
    let s = (1.0 - rho * rho).sqrt();
    let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // Far enough that φ(z)/φ(a) < 1e-30 beyond the upper limit.
    let lo = a.max(-40.0);
    let hi = lo.max(0.0) + 12.0;
    let spec = QuadratureSpec {
        dim: 1,
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 2_000,
    };
    let r = integrate(|z| phi(z) * normal_upper((b - rho * z) / s), lo, hi, &spec)?;
    Ok(r.value.max(0.0))
}

/// A `d`-variate df with unit Fréchet margins: either max-stable or a member
/// of the max-domain of attraction of one.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    MaxStable(SpectralModel),
    /// Attractor `H0` (asymptotically independent).
    GaussianCopulaFrechet(GaussCopula),
    IndependentFrechet { d: usize },
}

impl DistributionSpec {
    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::MaxStable(m) => m.dim(),
            DistributionSpec::GaussianCopulaFrechet(g) => g.dim(),
            DistributionSpec::IndependentFrechet { d } => *d,
        }
    }

    pub fn as_max_stable(&self) -> Option<&SpectralModel> {
        match self {
            DistributionSpec::MaxStable(m) => Some(m),
            _ => None,
        }
    }

    /// The max-stable `H` with this df in its domain of attraction (norming `a_n = n`).
    pub fn attractor(&self) -> SpectralModel {
        match self {
            DistributionSpec::MaxStable(m) => m.clone(),
            DistributionSpec::GaussianCopulaFrechet(g) => make_h0(g.dim()).expect("d >= 2"),
            DistributionSpec::IndependentFrechet { d } => make_h0(*d).expect("d >= 2"),
        }
    }

    /// Whether [`crate::samplers::ExactSampler`] can draw from this df.
    pub fn is_exactly_samplable(&self) -> bool {
        !matches!(
            self,
            DistributionSpec::MaxStable(SpectralModel {
                family: Family::HuslerReiss(_),
                ..
            })
        )
    }

    pub fn marginal(&self, subset: &[usize]) -> Result<DistributionSpec> {
        let coords = checked_subset(subset, self.dim())?;
        Ok(match self {
            DistributionSpec::MaxStable(m) => DistributionSpec::MaxStable(m.marginalize(&coords)?),
            DistributionSpec::GaussianCopulaFrechet(g) if coords.len() >= 2 => {
                DistributionSpec::GaussianCopulaFrechet(g.marginal(&coords)?)
            }
            DistributionSpec::GaussianCopulaFrechet(_) | DistributionSpec::IndependentFrechet { .. } => {
                DistributionSpec::IndependentFrechet { d: coords.len() }
            }
        })
    }

    /// `1 - F(x)`, computed without cancellation near `F = 1`.
    pub fn cdf_complement(&self, x: &[f64]) -> Result<f64> {
        assert_eq!(x.len(), self.dim(), "point dimension does not match model");
        match self {
            DistributionSpec::MaxStable(m) => m
                .neg_log_h(x)
                .map(|v| -(-v).exp_m1())
                .ok_or_else(|| Error::capability(format!("{m} has no closed-form df"))),
            DistributionSpec::IndependentFrechet { .. } => {
                let s: f64 = x.iter().map(|v| v.recip()).sum();
                Ok(-(-s).exp_m1())
            }
            DistributionSpec::GaussianCopulaFrechet(g) if g.dim() == 2 => g.complement_2d(x[0], x[1]),
            DistributionSpec::GaussianCopulaFrechet(_) => Err(Error::capability(
                "Gaussian copula df is only available for d = 2",
            )),
        }
    }

    pub fn cdf(&self, x: &[f64]) -> Result<f64> {
        match self {
            DistributionSpec::MaxStable(m) => m
                .cdf(x)
                .ok_or_else(|| Error::capability(format!("{m} has no closed-form df"))),
            _ => Ok(1.0 - self.cdf_complement(x)?),
        }
    }

    /// Parses the model grammar, e.g. `logistic(3, 1.5)`.
    pub fn parse(text: &str) -> Result<Self> {
        crate::grammar::parse(text)
    }
}

impl From<SpectralModel> for DistributionSpec {
    fn from(m: SpectralModel) -> Self {
        DistributionSpec::MaxStable(m)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::MaxStable(m) => write!(f, "{m}"),
            DistributionSpec::GaussianCopulaFrechet(g) => {
                write!(f, "gauss_copula({}, rho=[", g.dim())?;
                write_upper_triangle(f, &g.correlation)?;
                write!(f, "])")
            }
            DistributionSpec::IndependentFrechet { d } => write!(f, "indep_frechet({d})"),
        }
    }
}
