//! Exact and truncation-controlled sampling of random vectors with unit
//! Fréchet margins.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::families::{DistributionSpec, Family, SpectralModel};
use crate::mc::run_chunks;
use crate::rng::{Stream, StreamKey};

/// Default truncation tolerance for unbounded spectral vectors.
pub const DEFAULT_PPP_TOL: f64 = 1e-3;
/// Default hard cap on Poisson atoms per draw.
pub const DEFAULT_PPP_MAX_POINTS: u64 = 1_000_000;

/// `n_samples × d` positive reals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub d: usize,
    pub rows: Vec<f64>,
    pub source: String,
    pub key: StreamKey,
    /// True when the draws come from a truncated series that is not exact.
    pub approximate: bool,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.rows.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.chunks_exact(self.d)
    }

    /// Empirical `P(X ≤ x)` (componentwise).
    pub fn empirical_cdf(&self, x: &[f64]) -> f64 {
        let hits = self
            .iter_rows()
            .filter(|r| r.iter().zip(x).all(|(a, b)| a <= b))
            .count();
        hits as f64 / self.len() as f64
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }
}

enum Kind {
    Iid,
    Comonotone,
    Logistic { alpha: f64 },
    Gauss { factor: nalgebra::DMatrix<f64>, normals: Vec<f64> },
}

/// Draws iid vectors from an exactly samplable [`DistributionSpec`].
pub struct ExactSampler {
    d: usize,
    kind: Kind,
}

impl ExactSampler {
    pub fn new(spec: &DistributionSpec) -> Result<Self> {
        let d = spec.dim();
        let kind = match spec {
            DistributionSpec::IndependentFrechet { .. } => Kind::Iid,
            DistributionSpec::GaussianCopulaFrechet(g) => Kind::Gauss {
                factor: g.factor().clone(),
                normals: vec![0.0; g.dim()],
            },
            DistributionSpec::MaxStable(m) => match m.family() {
                Family::Independence => Kind::Iid,
                Family::Comonotone => Kind::Comonotone,
                Family::Logistic { alpha } => Kind::Logistic { alpha: *alpha },
                Family::HuslerReiss(_) => {
                    return Err(Error::capability(format!("{m} has no exact sampler")))
                }
            },
        };
        Ok(Self { d, kind })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Writes one draw into `out` (length `d`).
    pub fn draw(&mut self, s: &mut Stream, out: &mut [f64]) {
        match &mut self.kind {
            Kind::Iid => out.iter_mut().for_each(|x| *x = s.frechet()),
            Kind::Comonotone => out.fill(s.frechet()),
            Kind::Logistic { alpha } => {
                // X_i = (S/E_i)^{1/α}: P(X ≤ x | S) = exp(-S Σ x_i^{-α}), and
                // E[exp(-tS)] = exp(-t^{1/α}).
                let inv = alpha.recip();
                let stable = s.positive_stable_unchecked(inv);
                out.iter_mut()
                    .for_each(|x| *x = (stable / s.exp1()).powf(inv));
            }
            Kind::Gauss { factor, normals } => {
                normals.iter_mut().for_each(|z| *z = s.std_normal());
                for (i, x) in out.iter_mut().enumerate() {
                    let z: f64 = (0..normals.len()).map(|k| factor[(i, k)] * normals[k]).sum();
                    *x = -1.0 / ln_normal_cdf(z);
                }
            }
        }
    }
}

/// `ln Φ(z)` without cancellation in either tail.
fn ln_normal_cdf(z: f64) -> f64 {
    let upper = 0.5 * erfc(z / std::f64::consts::SQRT_2);
    if z > 0.0 {
        (-upper).ln_1p()
    } else {
        (0.5 * erfc(-z / std::f64::consts::SQRT_2)).ln()
    }
}

fn collect_batch<S, I, F>(
    n: u64,
    d: usize,
    key: StreamKey,
    source: String,
    approximate: bool,
    init: I,
    body: F,
) -> Result<SampleBatch>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream, &mut [f64]) -> Result<()> + Sync,
{
    let parts = run_chunks(n, key, |s, count| -> Result<Vec<f64>> {
        let mut state = init();
        let mut rows = vec![0.0; count as usize * d];
        for row in rows.chunks_exact_mut(d) {
            body(&mut state, s, row)?;
        }
        Ok(rows)
    });
    let mut rows = Vec::with_capacity(n as usize * d);
    for p in parts {
        rows.extend(p?);
    }
    Ok(SampleBatch {
        d,
        rows,
        source,
        key,
        approximate,
    })
}

/// `n` iid draws from `spec`.
pub fn sample_exact(spec: &DistributionSpec, n: u64, key: StreamKey) -> Result<SampleBatch> {
    ExactSampler::new(spec)?;
    collect_batch(
        n,
        spec.dim(),
        key,
        spec.to_string(),
        false,
        || ExactSampler::new(spec).expect("checked above"),
        |smp, s, row| {
            smp.draw(s, row);
            Ok(())
        },
    )
}

/// `reps` rows, each the componentwise maximum of `n_block` iid draws.
pub fn sample_componentwise_maxima(
    spec: &DistributionSpec,
    n_block: u64,
    reps: u64,
    key: StreamKey,
) -> Result<SampleBatch> {
    if n_block == 0 {
        return Err(Error::invalid("block size must be at least 1"));
    }
    ExactSampler::new(spec)?;
    let d = spec.dim();
    collect_batch(
        reps,
        d,
        key,
        spec.to_string(),
        false,
        || (ExactSampler::new(spec).expect("checked above"), vec![0.0; d]),
        |(smp, tmp), s, row| {
            block_maximum(smp, s, n_block, tmp, row);
            Ok(())
        },
    )
}

/// Componentwise maximum of `n_block` draws; all zeros for an empty block.
pub(crate) fn block_maximum(smp: &mut ExactSampler, s: &mut Stream, n_block: u64, tmp: &mut [f64], out: &mut [f64]) {
    out.fill(0.0);
    for _ in 0..n_block {
        smp.draw(s, tmp);
        for (m, &x) in out.iter_mut().zip(tmp.iter()) {
            *m = m.max(x);
        }
    }
}

/// Truncated Poisson-point-process draws `M_i = max_k Y_i^{(k)}/Γ_k`.
///
/// Atoms are generated in increasing `Γ_k`. Once `b/Γ_k` falls below the
/// smallest coordinate of the running maximum no later atom can change the
/// draw. With a bounded spectral vector `b` is its bound and the draw is
/// exact; otherwise `b` is the `1 - tol²` quantile of `max_i Y_i` and the
/// batch is flagged approximate.
pub fn sample_truncated_ppp(
    model: &SpectralModel,
    n: u64,
    key: StreamKey,
    tol: Option<f64>,
    max_points: u64,
) -> Result<SampleBatch> {
    let (bound, approximate) = match model.y_bounded_by() {
        Some(b) => (b, false),
        None => {
            let tol = tol.ok_or_else(|| {
                Error::invalid("unbounded spectral vector requires a truncation tolerance")
            })?;
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::invalid(format!("tolerance must lie in (0,1), got {tol}")));
            }
            (model.y_max_quantile(1.0 - tol * tol), true)
        }
    };
    let d = model.dim();
    collect_batch(n, d, key, model.to_string(), approximate, || model.sampler(), |smp, s, row| {
        row.fill(0.0);
        let mut arrival = 0.0;
        let mut atoms = 0u64;
        loop {
            arrival += s.exp1();
            let floor = row.iter().cloned().fold(f64::INFINITY, f64::min);
            if bound / arrival < floor {
                return Ok(());
            }
            if atoms >= max_points {
                return Err(Error::numeric(format!(
                    "point-process draw for {model} exceeded {max_points} atoms \
                     (arrival {arrival:.3e}, running minimum {floor:.3e}, bound {bound:.3e})"
                )));
            }
            for (m, &y) in row.iter_mut().zip(smp.draw(s)) {
                *m = m.max(y / arrival);
            }
            atoms += 1;
        }
    })
}

/// Kolmogorov–Smirnov distance between a sample and the unit Fréchet df.
pub fn ks_distance_frechet(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (-x.recip()).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_h0, make_hinf, make_logistic, GaussCopula, Representation};

    fn spec(m: SpectralModel) -> DistributionSpec {
        DistributionSpec::MaxStable(m)
    }

    #[test]
    fn comonotone_rows_are_constant() {
        let b = sample_exact(&spec(make_hinf(3).unwrap()), 1000, StreamKey::from_seed(1)).unwrap();
        for r in b.iter_rows() {
            assert!(r.iter().all(|&x| x == r[0]));
        }
    }

    #[test]
    fn logistic_joint_cdf() {
        let b = sample_exact(&spec(make_logistic(2, 2.0).unwrap()), 1_000_000, StreamKey::from_seed(2)).unwrap();
        let p = b.empirical_cdf(&[1.0, 1.0]);
        assert!((p - (-std::f64::consts::SQRT_2).exp()).abs() < 0.002, "{p}");
    }

    #[test]
    fn h0_joint_cdf() {
        let b = sample_exact(&spec(make_h0(2).unwrap()), 1_000_000, StreamKey::from_seed(3)).unwrap();
        let p = b.empirical_cdf(&[1.0, 1.0]);
        assert!((p - (-2.0f64).exp()).abs() < 0.002, "{p}");
    }

    #[test]
    fn margins_are_unit_frechet() {
        let specs = [
            spec(make_h0(2).unwrap()),
            spec(make_hinf(2).unwrap()),
            spec(make_logistic(3, 1.5).unwrap()),
            DistributionSpec::GaussianCopulaFrechet(GaussCopula::equicorrelated(2, 0.5).unwrap()),
            DistributionSpec::IndependentFrechet { d: 2 },
        ];
        for (k, sp) in specs.iter().enumerate() {
            let b = sample_exact(sp, 100_000, StreamKey::new(4, k as u64, 0)).unwrap();
            assert!(b.rows.iter().all(|x| x.is_finite() && *x > 0.0));
            for j in 0..b.d {
                let ks = ks_distance_frechet(&b.column(j));
                assert!(ks < 0.005, "{sp} margin {j}: KS {ks}");
            }
        }
    }

    #[test]
    fn husler_reiss_has_no_exact_sampler() {
        let hr = crate::families::make_husler_reiss_equi(2, 1.0).unwrap();
        assert!(matches!(
            sample_exact(&spec(hr.clone()), 10, StreamKey::from_seed(1)),
            Err(Error::Capability(_))
        ));
        assert!(matches!(
            sample_componentwise_maxima(&spec(hr), 2, 10, StreamKey::from_seed(1)),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn ppp_comonotone_matches_frechet() {
        let b = sample_truncated_ppp(&make_hinf(2).unwrap(), 100_000, StreamKey::from_seed(5), None, DEFAULT_PPP_MAX_POINTS).unwrap();
        assert!(!b.approximate);
        assert!(ks_distance_frechet(&b.column(0)) < 0.005);
    }

    #[test]
    fn ppp_h0_product_law() {
        let b = sample_truncated_ppp(&make_h0(2).unwrap(), 1_000_000, StreamKey::from_seed(6), None, DEFAULT_PPP_MAX_POINTS).unwrap();
        let p = b.empirical_cdf(&[1.0, 1.0]);
        assert!((p - (-2.0f64).exp()).abs() < 0.002, "{p}");
    }

    #[test]
    fn ppp_unbounded_logistic_close_to_exact() {
        let raw = make_logistic(2, 2.0).unwrap().with_representation(Representation::Raw);
        assert!(sample_truncated_ppp(&raw, 10, StreamKey::from_seed(1), None, 100).is_err());
        let b = sample_truncated_ppp(&raw, 100_000, StreamKey::from_seed(7), Some(DEFAULT_PPP_TOL), DEFAULT_PPP_MAX_POINTS).unwrap();
        assert!(b.approximate);
        let p = b.empirical_cdf(&[1.0, 1.0]);
        assert!((p - (-std::f64::consts::SQRT_2).exp()).abs() < 0.005, "{p}");
    }

    #[test]
    fn ppp_atom_cap_is_reported() {
        let raw = make_logistic(2, 2.0).unwrap().with_representation(Representation::Raw);
        let err = sample_truncated_ppp(&raw, 100, StreamKey::from_seed(1), Some(1e-3), 2).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn block_maxima_rescale_to_original_law() {
        let sp = spec(make_logistic(2, 2.0).unwrap());
        let n_block = 20;
        let b = sample_componentwise_maxima(&sp, n_block, 200_000, StreamKey::from_seed(8)).unwrap();
        let scaled: Vec<f64> = b.rows.iter().map(|x| x / n_block as f64).collect();
        let exact = (-std::f64::consts::SQRT_2).exp();
        let hits = scaled
            .chunks_exact(2)
            .filter(|r| r[0] <= 1.0 && r[1] <= 1.0)
            .count() as f64
            / 200_000.0;
        assert!((hits - exact).abs() < 0.005, "{hits}");
    }

    #[test]
    fn block_maxima_h0_product_form() {
        let sp = spec(make_h0(2).unwrap());
        let b = sample_componentwise_maxima(&sp, 9, 200_000, StreamKey::from_seed(9)).unwrap();
        let p = b.empirical_cdf(&[9.0, 9.0]);
        let exact = (-1.0f64 / 9.0).exp().powi(18);
        assert!((p - exact).abs() < 0.005, "{p} vs {exact}");
    }

    #[test]
    fn unit_block_equals_exact_law() {
        let sp = spec(make_logistic(2, 3.0).unwrap());
        let b = sample_componentwise_maxima(&sp, 1, 200_000, StreamKey::from_seed(10)).unwrap();
        let exact = sp.cdf(&[1.5, 0.8]).unwrap();
        assert!((b.empirical_cdf(&[1.5, 0.8]) - exact).abs() < 0.005);
        assert!(sample_componentwise_maxima(&sp, 0, 1, StreamKey::from_seed(1)).is_err());
    }
}
