//! Estimators of `μ(H,Q) = E[max_i Y_i/Z_i]`, `λ(Q,H) = E[min_i Y_i/Z_i]`,
//! the extremal coefficient and related bivariate quantities, plus the
//! inclusion–exclusion transforms between subset tables of `μ` and `λ`.
//!
//! Throughout `Y` is a spectral vector of `H` and `Z ~ Q` is drawn
//! independently. Monte Carlo results carry the sample standard error.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{DistributionSpec, SpectralModel};
use crate::mc::{sample_moments, Moments};
use crate::oracles::{closed_form_lambda, closed_form_mu};
use crate::rng::StreamKey;
use crate::samplers::ExactSampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Mean of a functional of the spectral vector `Y` and `Z ~ Q`.
    Spectral,
    /// Mean of `-ln H(Z)` over `Z ~ Q`.
    Direct,
    /// Mean of `Σ Ψ_i(Z)/Z_i`.
    Psi,
    /// Mean of `1 / -ln H(Y)` over spectral draws.
    Exponent,
    Quadrature,
    ClosedForm,
    /// Indicator frequencies from simulated sample maxima.
    Simulation,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Spectral => "spectral",
            Method::Direct => "direct",
            Method::Psi => "psi",
            Method::Exponent => "exponent",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
            Method::Simulation => "simulation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: Method,
    pub key: StreamKey,
    /// Draws excluded by a measure-zero guard (see [`estimate_lambda_self`]).
    pub skipped: u64,
}

impl EstimatorResult {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            estimate: value,
            std_error: 0.0,
            n_samples: 0,
            method,
            key: StreamKey::default(),
            skipped: 0,
        }
    }

    pub(crate) fn from_moments(m: &Moments, method: Method, key: StreamKey) -> Result<Self> {
        if !m.mean().is_finite() {
            return Err(Error::numeric(format!(
                "{method} estimator produced a non-finite mean (nonpositive Z draw?)"
            )));
        }
        Ok(Self {
            estimate: m.mean(),
            std_error: m.std_error(),
            n_samples: m.count(),
            method,
            key,
            skipped: 0,
        })
    }
}

/// `sqrt(Σ se²)`: standard error of a sum or difference of independent estimates.
pub fn combined_se(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt()
}

fn check_dims(h: &SpectralModel, q: &DistributionSpec) -> Result<()> {
    if h.dim() != q.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: H = {h} has d = {}, Q = {q} has d = {}",
            h.dim(),
            q.dim()
        )));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    Ok(())
}

fn positive(z: &[f64]) -> bool {
    z.iter().all(|&v| v > 0.0)
}

/// Averages `f(Y, Z)` over independent `Y` (spectral, of `h`) and `Z ~ q`.
/// A nonpositive `Z` turns the result into a numeric error.
fn mean_over_yz<F>(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey, f: F) -> Result<Moments>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    check_dims(h, q)?;
    check_n(n)?;
    ExactSampler::new(q)?;
    let d = q.dim();
    let [m] = sample_moments::<1, _, _, _>(
        n,
        key,
        || (h.sampler(), ExactSampler::new(q).expect("checked above"), vec![0.0; d]),
        |(ys, zs, z), s| {
            zs.draw(s, z);
            let y = ys.draw(s);
            [if positive(z) { f(y, z) } else { f64::NAN }]
        },
    );
    Ok(m)
}

/// Averages `f(Z)` over `Z ~ q`.
fn mean_over_z<S, I, F>(q: &DistributionSpec, n: u64, key: StreamKey, init: I, f: F) -> Result<Moments>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &[f64]) -> f64 + Sync,
{
    check_n(n)?;
    ExactSampler::new(q)?;
    let d = q.dim();
    let [m] = sample_moments::<1, _, _, _>(
        n,
        key,
        || (init(), ExactSampler::new(q).expect("checked above"), vec![0.0; d]),
        |(st, zs, z), s| {
            zs.draw(s, z);
            [if positive(z) { f(st, z) } else { f64::NAN }]
        },
    );
    Ok(m)
}

fn max_ratio(y: &[f64], z: &[f64]) -> f64 {
    y.iter().zip(z).map(|(a, b)| a / b).fold(0.0, f64::max)
}

fn min_ratio(y: &[f64], z: &[f64]) -> f64 {
    y.iter().zip(z).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min)
}

/// `μ(H,Q)` as the mean of `max_i Y_i/Z_i`.
pub fn estimate_mu_spectral(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    let m = mean_over_yz(h, q, n, key, max_ratio)?;
    EstimatorResult::from_moments(&m, Method::Spectral, key)
}

/// `λ(Q,H)` as the mean of `min_i Y_i/Z_i`.
pub fn estimate_lambda_spectral(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    let m = mean_over_yz(h, q, n, key, min_ratio)?;
    EstimatorResult::from_moments(&m, Method::Spectral, key)
}

/// Quantities bounding `μ` and `λ` from one pass over `(Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderBounds {
    /// `E[min_i Y_i]`, an upper bound on `λ(Q,H)`.
    pub min_y: EstimatorResult,
    /// `E[min_i 1/Z_i]`, an upper bound on `λ(Q,H)`.
    pub min_inv_z: EstimatorResult,
    /// `E[max_i 1/Z_i] = θ(H̃)`, a lower bound on `μ(H,Q)`.
    pub max_inv_z: EstimatorResult,
}

pub fn estimate_order_bounds(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<OrderBounds> {
    check_dims(h, q)?;
    check_n(n)?;
    ExactSampler::new(q)?;
    let d = q.dim();
    let [a, b, c] = sample_moments::<3, _, _, _>(
        n,
        key,
        || (h.sampler(), ExactSampler::new(q).expect("checked above"), vec![0.0; d]),
        |(ys, zs, z), s| {
            zs.draw(s, z);
            let y = ys.draw(s);
            if !positive(z) {
                return [f64::NAN; 3];
            }
            let min_y = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_z = z.iter().cloned().fold(0.0, f64::max);
            let min_z = z.iter().cloned().fold(f64::INFINITY, f64::min);
            [min_y, max_z.recip(), min_z.recip()]
        },
    );
    Ok(OrderBounds {
        min_y: EstimatorResult::from_moments(&a, Method::Spectral, key)?,
        min_inv_z: EstimatorResult::from_moments(&b, Method::Spectral, key)?,
        max_inv_z: EstimatorResult::from_moments(&c, Method::Spectral, key)?,
    })
}

fn no_closed_form(h: &SpectralModel) -> Error {
    Error::capability(format!("{h} has no closed-form exponent function"))
}

/// `μ(H,Q)` as the mean of `-ln H(Z)`.
pub fn estimate_mu_direct(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    check_dims(h, q)?;
    if !h.has_closed_form() {
        return Err(no_closed_form(h));
    }
    let m = mean_over_z(q, n, key, || (), |_, z| h.neg_log_h(z).expect("closed form"))?;
    EstimatorResult::from_moments(&m, Method::Direct, key)
}

/// `μ(H,Q)` as the mean of `Σ_i Ψ_i(Z)/Z_i`.
pub fn estimate_mu_psi(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    check_dims(h, q)?;
    if !h.has_closed_form() {
        return Err(no_closed_form(h));
    }
    let d = h.dim();
    let m = mean_over_z(
        q,
        n,
        key,
        || vec![0.0; d],
        |psi, z| {
            h.psi(z, psi).expect("closed form");
            psi.iter().zip(z).map(|(p, v)| p / v).sum()
        },
    )?;
    EstimatorResult::from_moments(&m, Method::Psi, key)
}

/// `λ(H,H)` as the mean of `1 / -ln H(Y)`.
///
/// A zero coordinate of `Y` gives `-ln H(Y) = ∞` and a zero summand. A draw
/// with every coordinate zero is not evaluated: it contributes zero (its
/// `min_i Y_i/Z_i` is zero) and is counted in `skipped`. For full models
/// this is a null event; marginals of `H0` hit it with positive probability.
pub fn estimate_lambda_self(h: &SpectralModel, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    if !h.has_closed_form() {
        return Err(no_closed_form(h));
    }
    check_n(n)?;
    // Slot 0: summand (0 when skipped), slot 1: skip indicator.
    let [vals, skips] = sample_moments::<2, _, _, _>(
        n,
        key,
        || h.sampler(),
        |ys, s| {
            let y = ys.draw(s);
            if y.iter().all(|&v| v == 0.0) {
                return [0.0, 1.0];
            }
            [h.neg_log_h(y).expect("closed form").recip(), 0.0]
        },
    );
    let skipped = (skips.mean() * n as f64).round() as u64;
    let mut r = EstimatorResult::from_moments(&vals, Method::Exponent, key)?;
    r.skipped = skipped;
    Ok(r)
}

/// Extremal coefficient `θ(H) = -ln H(1,…,1) = E[max_i Y_i]`.
///
/// Closed form when available (zero standard error), otherwise the spectral
/// Monte Carlo mean.
pub fn theta(h: &SpectralModel, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    if let Some(t) = h.theta_closed_form() {
        return Ok(EstimatorResult::exact(t, Method::ClosedForm));
    }
    theta_mc(h, n, key)
}

/// Spectral Monte Carlo `θ(H)` regardless of closed-form availability.
pub fn theta_mc(h: &SpectralModel, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    check_n(n)?;
    let [m] = sample_moments::<1, _, _, _>(n, key, || h.sampler(), |ys, s| {
        [ys.draw(s).iter().cloned().fold(0.0, f64::max)]
    });
    EstimatorResult::from_moments(&m, Method::Spectral, key)
}

/// Upper tail dependence coefficient `2 - θ(H)` of a bivariate model.
pub fn upper_tail_coefficient(h: &SpectralModel) -> Result<f64> {
    if h.dim() != 2 {
        return Err(Error::invalid(format!("tail coefficient needs d = 2, {h} has d = {}", h.dim())));
    }
    h.theta_closed_form()
        .map(|t| 2.0 - t)
        .ok_or_else(|| no_closed_form(h))
}

/// Denominators smaller than this are reported as singular.
pub const XI_SINGULAR: f64 = 1e-14;

/// Value of a ratio that may degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Xi {
    Finite { value: f64 },
    Singular { denominator: f64 },
}

impl Xi {
    pub fn value(&self) -> Option<f64> {
        match self {
            Xi::Finite { value } => Some(*value),
            Xi::Singular { .. } => None,
        }
    }

    pub(crate) fn from_ratio(num: f64, den: f64) -> Self {
        if den.abs() < XI_SINGULAR {
            Xi::Singular { denominator: den }
        } else {
            Xi::Finite { value: num / den }
        }
    }
}

/// Finite-difference ξ at step `step`:
///
/// ```text
/// [B - C][B - D] / (A [A' + B - C - D])
/// A = H(x1, x2)        A' = H(x1 - h, x2 - h)    B = H(x1 + h, x2 + h)
/// C = H(x1 + h, x2 - h)                          D = H(x1 - h, x2 + h)
/// ```
///
/// The bracket in the denominator is the `dH` mass of the square
/// `(x - h, x + h]`, so the ratio tends to `H_1 H_2 / (H H_12)`. With the
/// centre value `A` in place of `A'` the bracket is only `O(h)` and the
/// ratio would tend to zero for every smooth `H`.
pub fn xi_finite_difference(h: &SpectralModel, x1: f64, x2: f64, step: f64) -> Result<Xi> {
    if h.dim() != 2 {
        return Err(Error::invalid("ξ is defined for bivariate models"));
    }
    if !(step > 0.0 && x1 > step && x2 > step) {
        return Err(Error::invalid(format!(
            "need x1, x2 > h > 0, got x = ({x1}, {x2}), h = {step}"
        )));
    }
    let cdf = |a: f64, b: f64| h.cdf(&[a, b]).ok_or_else(|| no_closed_form(h));
    let a = cdf(x1, x2)?;
    let a_low = cdf(x1 - step, x2 - step)?;
    let b = cdf(x1 + step, x2 + step)?;
    let c = cdf(x1 + step, x2 - step)?;
    let d = cdf(x1 - step, x2 + step)?;
    // Group as (B - C) + (A' - D) to keep cancellation local.
    let mass = (b - c) + (a_low - d);
    Ok(Xi::from_ratio((b - c) * (b - d), a * mass))
}

/// Which measure a subset table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Mu,
    Lambda,
}

/// Values indexed by nonempty subsets of `{0, …, d-1}` (bitmask order).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTable {
    d: usize,
    values: Vec<Option<f64>>,
}

pub(crate) fn mask_of(subset: &[usize], d: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &i in subset {
        if i >= d {
            return Err(Error::invalid(format!("coordinate {i} out of range for d = {d}")));
        }
        mask |= 1 << i;
    }
    if mask == 0 {
        return Err(Error::invalid("subset must be nonempty"));
    }
    Ok(mask)
}

pub(crate) fn members(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask & (1 << i) != 0).collect()
}

impl SubsetTable {
    pub fn new(d: usize) -> Result<Self> {
        if !(1..=16).contains(&d) {
            return Err(Error::invalid(format!("subset tables support 1 <= d <= 16, got {d}")));
        }
        Ok(Self {
            d,
            values: vec![None; 1 << d],
        })
    }

    /// Fills every nonempty subset with `f(subset)`.
    pub fn from_fn<F: FnMut(&[usize]) -> Result<f64>>(d: usize, mut f: F) -> Result<Self> {
        let mut t = Self::new(d)?;
        for mask in 1..1usize << d {
            t.values[mask] = Some(f(&members(mask))?);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn set(&mut self, subset: &[usize], value: f64) -> Result<()> {
        let m = mask_of(subset, self.d)?;
        self.values[m] = Some(value);
        Ok(())
    }

    pub fn get(&self, subset: &[usize]) -> Option<f64> {
        mask_of(subset, self.d).ok().and_then(|m| self.values[m])
    }

    /// `(subset, value)` for every filled entry, in bitmask order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(m, v)| v.map(|v| (members(m), v)))
    }

    /// `Σ_{K ≠ ∅} (-1)^{|K|+1} t(K)`; missing singletons count as 1.
    pub fn alternating_sum(&self) -> Result<f64> {
        let mut total = 0.0;
        for mask in 1..1usize << self.d {
            let size = mask.count_ones();
            let v = match self.values[mask] {
                Some(v) => v,
                None if size == 1 => 1.0,
                None => {
                    return Err(Error::invalid(format!(
                        "subset table is missing the entry for {:?}",
                        members(mask).iter().map(|i| i + 1).collect::<Vec<_>>()
                    )))
                }
            };
            total += if size % 2 == 1 { v } else { -v };
        }
        Ok(total)
    }

    /// Whether `K ⊆ K'` implies `t(K) ≤ t(K') + slack` (or `≥ … - slack`
    /// when `increasing` is false), over filled entries.
    pub fn is_monotone(&self, increasing: bool, slack: f64) -> bool {
        let n = 1usize << self.d;
        for a in 1..n {
            let Some(va) = self.values[a] else { continue };
            for b in 1..n {
                if a == b || a & b != a {
                    continue;
                }
                let Some(vb) = self.values[b] else { continue };
                let ok = if increasing { va <= vb + slack } else { va >= vb - slack };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

/// `μ(H,Q) = Σ_K (-1)^{|K|+1} λ(Q_K, H_K)`.
pub fn mu_from_lambda_table(lambda: &SubsetTable) -> Result<f64> {
    lambda.alternating_sum()
}

/// `λ(Q,H) = Σ_K (-1)^{|K|+1} μ(H_K, Q_K)`.
pub fn lambda_from_mu_table(mu: &SubsetTable) -> Result<f64> {
    mu.alternating_sum()
}

/// Monte Carlo subset table with per-entry standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEstimates {
    pub measure: Measure,
    pub values: SubsetTable,
    pub std_errors: SubsetTable,
}

impl SubsetEstimates {
    /// Inclusion–exclusion transform and its standard error (entries are
    /// estimated independently).
    pub fn transform(&self) -> Result<(f64, f64)> {
        let v = self.values.alternating_sum()?;
        let ses: Vec<f64> = self.std_errors.entries().map(|(_, s)| s).collect();
        Ok((v, combined_se(&ses)))
    }
}

/// Estimates `measure` for every marginal pair `(H_K, Q_K)` with `|K| ≥ 2`;
/// singletons are exactly 1. Entry `K` reads from `key.child(mask(K))`.
pub fn estimate_subset_table(
    h: &SpectralModel,
    q: &DistributionSpec,
    measure: Measure,
    n: u64,
    key: StreamKey,
) -> Result<SubsetEstimates> {
    check_dims(h, q)?;
    let d = h.dim();
    let mut values = SubsetTable::new(d)?;
    let mut ses = SubsetTable::new(d)?;
    for mask in 1..1usize << d {
        let k = members(mask);
        let (v, se) = if k.len() == 1 {
            (1.0, 0.0)
        } else {
            let hk = h.marginalize(&k)?;
            let qk = q.marginal(&k)?;
            let sub = key.child(mask as u64);
            let r = match measure {
                Measure::Mu => estimate_mu_spectral(&hk, &qk, n, sub)?,
                Measure::Lambda => estimate_lambda_spectral(&hk, &qk, n, sub)?,
            };
            (r.estimate, r.std_error)
        };
        values.set(&k, v)?;
        ses.set(&k, se)?;
    }
    Ok(SubsetEstimates {
        measure,
        values,
        std_errors: ses,
    })
}

/// `λ(Q,H)`: spectral Monte Carlo when `Q` can be sampled exactly,
/// otherwise inclusion–exclusion over exactly known marginal `μ` values.
pub fn estimate_lambda(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    if q.is_exactly_samplable() {
        return estimate_lambda_spectral(h, q, n, key);
    }
    check_dims(h, q)?;
    let qm = q.as_max_stable().expect("only max-stable specs lack a sampler");
    let table = SubsetTable::from_fn(h.dim(), |k| {
        if k.len() == 1 {
            return Ok(1.0);
        }
        let (hk, qk) = (h.marginalize(k)?, qm.marginalize(k)?);
        closed_form_mu(&hk, &qk).ok_or_else(|| {
            Error::capability(format!("μ({hk}, {qk}) is not computable without sampling {qk}"))
        })
    })?;
    Ok(EstimatorResult::exact(lambda_from_mu_table(&table)?, Method::ClosedForm))
}

/// `μ(H,Q)`: spectral Monte Carlo, or the exact value when `Q` cannot be
/// sampled but the pair has a closed form.
pub fn estimate_mu(h: &SpectralModel, q: &DistributionSpec, n: u64, key: StreamKey) -> Result<EstimatorResult> {
    if q.is_exactly_samplable() {
        return estimate_mu_spectral(h, q, n, key);
    }
    check_dims(h, q)?;
    let qm = q.as_max_stable().expect("only max-stable specs lack a sampler");
    closed_form_mu(h, qm)
        .map(|v| EstimatorResult::exact(v, Method::ClosedForm))
        .ok_or_else(|| Error::capability(format!("{q} has no exact sampler")))
}

/// Exact `λ(Q,H)` for max-stable pairs with a known closed form.
pub fn exact_lambda(h: &SpectralModel, q: &SpectralModel) -> Option<f64> {
    closed_form_lambda(q, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_h0, make_hinf, make_husler_reiss_equi, make_logistic};

    const N: u64 = 1_000_000;

    fn key(stream: u64) -> StreamKey {
        StreamKey::new(11, stream, 0)
    }

    fn spec(m: SpectralModel) -> DistributionSpec {
        DistributionSpec::MaxStable(m)
    }

    fn within(r: &EstimatorResult, target: f64) {
        assert!(
            (r.estimate - target).abs() <= 4.0 * r.std_error,
            "estimate {} ± {} vs {target}",
            r.estimate,
            r.std_error
        );
    }

    #[test]
    fn mu_of_independence_is_d() {
        let r = estimate_mu_spectral(&make_h0(3).unwrap(), &spec(make_logistic(3, 2.0).unwrap()), N, key(1)).unwrap();
        within(&r, 3.0);
    }

    #[test]
    fn comonotone_pair_is_one() {
        let h = make_hinf(2).unwrap();
        let q = spec(make_hinf(2).unwrap());
        let mu = estimate_mu_spectral(&h, &q, N, key(1)).unwrap();
        let la = estimate_lambda_spectral(&h, &q, N, key(2)).unwrap();
        within(&mu, 1.0);
        within(&la, 1.0);
        // Y ≡ 1 and Z has equal coordinates: both reduce to the same mean of 1/Z.
        assert_eq!(
            estimate_mu_spectral(&h, &q, N, key(1)).unwrap().estimate,
            estimate_lambda_spectral(&h, &q, N, key(1)).unwrap().estimate
        );
    }

    #[test]
    fn mu_against_comonotone_is_theta() {
        let h = make_logistic(2, 2.0).unwrap();
        let q = spec(make_hinf(2).unwrap());
        within(&estimate_mu_spectral(&h, &q, N, key(1)).unwrap(), 2f64.sqrt());
        within(&estimate_mu_direct(&h, &q, N, key(2)).unwrap(), 2f64.sqrt());
        within(&estimate_mu_psi(&h, &q, N, key(3)).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn direct_h0_is_two() {
        let r = estimate_mu_direct(&make_h0(2).unwrap(), &spec(make_logistic(2, 3.0).unwrap()), N, key(4)).unwrap();
        within(&r, 2.0);
    }

    #[test]
    fn lambda_h0_vs_comonotone_q_is_zero() {
        let r = estimate_lambda_spectral(&make_h0(2).unwrap(), &spec(make_hinf(2).unwrap()), N, key(5)).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn psi_hand_value() {
        let h = make_logistic(2, 2.0).unwrap();
        let mut psi = [0.0; 2];
        h.psi(&[1.0, 1.0], &mut psi).unwrap();
        assert!((psi[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((psi[0] + psi[1] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn self_lambda() {
        let hinf = make_hinf(3).unwrap();
        let r = estimate_lambda_self(&hinf, 1000, key(6)).unwrap();
        assert_eq!(r.estimate, 1.0);
        let h0 = estimate_lambda_self(&make_h0(2).unwrap(), N, key(7)).unwrap();
        assert_eq!(h0.estimate, 0.0);
        let h = make_logistic(2, 2.0).unwrap();
        let a = estimate_lambda_self(&h, N, key(8)).unwrap();
        let b = estimate_lambda_spectral(&h, &spec(h.clone()), N, key(9)).unwrap();
        assert!((a.estimate - b.estimate).abs() <= 4.0 * combined_se(&[a.std_error, b.std_error]));
    }

    #[test]
    fn theta_paths() {
        assert_eq!(theta(&make_h0(5).unwrap(), 1, key(0)).unwrap().estimate, 5.0);
        assert_eq!(theta(&make_hinf(5).unwrap(), 1, key(0)).unwrap().estimate, 1.0);
        let l = make_logistic(4, 2.0).unwrap();
        assert!((theta(&l, 1, key(0)).unwrap().estimate - 2.0).abs() < 1e-12);
        within(&theta_mc(&l, N, key(10)).unwrap(), 2.0);
        let hr = make_husler_reiss_equi(2, 1.0).unwrap();
        let t = theta(&hr, N, key(11)).unwrap();
        assert_eq!(t.method, Method::Spectral);
        // θ = 2Φ(sqrt(γ)/2) for bivariate Hüsler–Reiss.
        let target = 2.0 * (1.0 - crate::families::normal_upper(0.5));
        within(&t, target);
    }

    #[test]
    fn tail_coefficients() {
        assert_eq!(upper_tail_coefficient(&make_h0(2).unwrap()).unwrap(), 0.0);
        assert_eq!(upper_tail_coefficient(&make_hinf(2).unwrap()).unwrap(), 1.0);
        let l = upper_tail_coefficient(&make_logistic(2, 2.0).unwrap()).unwrap();
        assert!((l - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!(upper_tail_coefficient(&make_h0(3).unwrap()).is_err());
    }

    #[test]
    fn xi_independence_tends_to_one() {
        let h0 = make_h0(2).unwrap();
        for step in [1e-2, 1e-3, 1e-4] {
            let v = xi_finite_difference(&h0, 1.0, 1.0, step).unwrap().value().unwrap();
            assert!((v - 1.0).abs() < 10.0 * step, "h = {step}: {v}");
        }
    }

    #[test]
    fn xi_logistic_matches_partials() {
        let h = make_logistic(2, 2.0).unwrap();
        let exact = 2f64.sqrt() / (2f64.sqrt() + 1.0);
        let v = xi_finite_difference(&h, 1.0, 1.0, 1e-4).unwrap().value().unwrap();
        assert!((v - exact).abs() < 1e-3, "{v} vs {exact}");
    }

    #[test]
    fn xi_comonotone() {
        let h = make_hinf(2).unwrap();
        // Off the diagonal the square carries no mass.
        assert!(matches!(
            xi_finite_difference(&h, 1.0, 2.0, 1e-3).unwrap(),
            Xi::Singular { .. }
        ));
        // On the diagonal the ratio vanishes like h.
        let v = xi_finite_difference(&h, 1.0, 1.0, 1e-4).unwrap().value().unwrap();
        assert!(v.abs() < 1e-3);
    }

    #[test]
    fn xi_preconditions() {
        let h = make_h0(2).unwrap();
        assert!(xi_finite_difference(&h, 0.5, 1.0, 0.5).is_err());
        assert!(xi_finite_difference(&h, 1.0, 1.0, 0.0).is_err());
        assert!(xi_finite_difference(&make_h0(3).unwrap(), 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn transforms() {
        let mut t = SubsetTable::new(2).unwrap();
        t.set(&[0, 1], 0.3).unwrap();
        assert!((mu_from_lambda_table(&t).unwrap() - 1.7).abs() < 1e-15);

        let zeros = SubsetTable::from_fn(3, |k| Ok(if k.len() == 1 { 1.0 } else { 0.0 })).unwrap();
        assert_eq!(mu_from_lambda_table(&zeros).unwrap(), 3.0);

        let c = [1.0, 2.0, 3.0];
        let maxes = SubsetTable::from_fn(3, |k| Ok(k.iter().map(|&i| c[i]).fold(0.0, f64::max))).unwrap();
        assert_eq!(lambda_from_mu_table(&maxes).unwrap(), 1.0);

        let missing = SubsetTable::new(3).unwrap();
        assert!(lambda_from_mu_table(&missing).is_err());
    }

    #[test]
    fn monotonicity_check() {
        let t = SubsetTable::from_fn(3, |k| Ok(k.len() as f64)).unwrap();
        assert!(t.is_monotone(true, 0.0));
        assert!(!t.is_monotone(false, 0.0));
    }

    #[test]
    fn capability_errors() {
        let hr = make_husler_reiss_equi(2, 1.0).unwrap();
        let h = make_logistic(2, 2.0).unwrap();
        assert!(matches!(
            estimate_mu_spectral(&h, &spec(hr.clone()), 10, key(0)),
            Err(Error::Capability(_))
        ));
        assert!(matches!(
            estimate_mu_direct(&hr, &spec(h.clone()), 10, key(0)),
            Err(Error::Capability(_))
        ));
        // λ(HR, H0) = 0 needs no sampling of Q.
        let r = estimate_lambda(&make_h0(2).unwrap(), &spec(hr.clone()), 10, key(0)).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert!(matches!(estimate_lambda(&h, &spec(hr), 10, key(0)), Err(Error::Capability(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let r = estimate_mu_spectral(&make_h0(2).unwrap(), &spec(make_h0(3).unwrap()), 10, key(0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }
}
