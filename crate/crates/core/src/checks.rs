//! Identity and bound suites run by `extremal check`.
//!
//! Every check compares Monte Carlo estimates against an identity, a bound
//! or an exact value with a tolerance of four (combined) standard errors,
//! unless a frozen threshold applies. Check `i` of a suite reads from its
//! own streams, so suites give the same lines whether run alone or in `all`.

use std::fmt;

use serde::Serialize;

use crate::domination::{asymptotic_independence_battery, GAUSS_BATTERY_THRESHOLDS};
use crate::error::{Error, Result};
use crate::families::{make_h0, make_hinf, make_logistic, DistributionSpec, SpectralModel};
use crate::measures::{
    combined_se, estimate_lambda_spectral, estimate_mu_spectral, estimate_order_bounds,
    estimate_subset_table, Measure,
};
use crate::oracles::{tail_probability_check, KLEJE_INDEPENDENCE_THRESHOLD};
use crate::rng::StreamKey;

/// Tolerance multiplier applied to standard errors.
pub const SE_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Bounds,
    Bivariate,
    Subsets,
    Kleje,
    Indep,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Bounds, Suite::Bivariate, Suite::Subsets, Suite::Kleje, Suite::Indep];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bounds => "bounds",
            Suite::Bivariate => "bivariate",
            Suite::Subsets => "subsets",
            Suite::Kleje => "kleje",
            Suite::Indep => "indep",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    fn stream_base(self) -> u64 {
        1_000 * (self as u64 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub suite: &'static str,
    pub name: String,
    /// Signed or absolute deviation, as described by `relation`.
    pub measured: f64,
    pub tolerance: f64,
    pub relation: String,
    pub pass: bool,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}: {} = {:.6e}, tolerance {:.6e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.relation,
            self.measured,
            self.tolerance
        )
    }
}

/// Inputs shared by all suites. `None` fields select the built-in battery.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub seed: u64,
    /// Monte Carlo sample size per estimate.
    pub n: u64,
    /// Replicates for the simulation suites (`kleje`, `indep`).
    pub reps: u64,
    pub h: Option<SpectralModel>,
    pub q: Option<DistributionSpec>,
}

impl CheckOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n: 1_000_000,
            reps: 10_000_000,
            h: None,
            q: None,
        }
    }
}

struct Ctx<'a> {
    suite: Suite,
    opts: &'a CheckOptions,
    lines: Vec<CheckLine>,
}

impl Ctx<'_> {
    /// Stream for estimate `slot` of check `index`.
    fn key(&self, index: usize, slot: u64) -> StreamKey {
        StreamKey::new(self.opts.seed, self.suite.stream_base() + 16 * index as u64 + slot, 0)
    }

    fn push(&mut self, name: String, relation: &str, measured: f64, tolerance: f64, pass: bool) {
        self.lines.push(CheckLine {
            suite: self.suite.name(),
            name,
            measured,
            tolerance,
            relation: relation.to_string(),
            pass,
        });
    }

    /// `|a - b| ≤ tol`.
    fn close(&mut self, name: String, relation: &str, a: f64, b: f64, tol: f64) {
        let dev = (a - b).abs();
        self.push(name, relation, dev, tol, dev <= tol);
    }

    /// `value - bound ≤ tol`.
    fn at_most(&mut self, name: String, relation: &str, value: f64, bound: f64, tol: f64) {
        let dev = value - bound;
        self.push(name, relation, dev, tol, dev <= tol);
    }
}

fn spec(m: SpectralModel) -> DistributionSpec {
    DistributionSpec::MaxStable(m)
}

fn bivariate_family() -> Vec<SpectralModel> {
    vec![
        make_h0(2).expect("valid"),
        make_hinf(2).expect("valid"),
        make_logistic(2, 1.5).expect("valid"),
        make_logistic(2, 3.0).expect("valid"),
    ]
}

/// Pairs for the bounds suite: all ordered pairs of a few families in
/// dimensions 2, 3 and 5.
pub fn bounds_battery() -> Vec<(SpectralModel, DistributionSpec)> {
    let mut pairs = Vec::new();
    for d in [2usize, 3, 5] {
        let fams = if d == 2 {
            bivariate_family()
        } else {
            vec![
                make_h0(d).expect("valid"),
                make_hinf(d).expect("valid"),
                make_logistic(d, 2.0).expect("valid"),
            ]
        };
        for h in &fams {
            for q in &fams {
                pairs.push((h.clone(), spec(q.clone())));
            }
        }
    }
    pairs
}

/// The six `(H, Q)` pairs of the bivariate identity battery.
pub fn bivariate_battery() -> Vec<(SpectralModel, DistributionSpec)> {
    let f = bivariate_family();
    let (h0, hinf, l15, l3) = (&f[0], &f[1], &f[2], &f[3]);
    [(l15, h0), (l3, hinf), (h0, l15), (hinf, l3), (l15, l3), (l3, l15)]
        .into_iter()
        .map(|(h, q)| (h.clone(), spec(q.clone())))
        .collect()
}

fn pairs_or(opts: &CheckOptions, default: fn() -> Vec<(SpectralModel, DistributionSpec)>) -> Vec<(SpectralModel, DistributionSpec)> {
    match (&opts.h, &opts.q) {
        (Some(h), Some(q)) => vec![(h.clone(), q.clone())],
        _ => default(),
    }
}

fn bounds(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.opts.n;
    for (i, (h, q)) in pairs_or(ctx.opts, bounds_battery).iter().enumerate() {
        let tag = format!("H={h} Q={q}");
        let d = h.dim() as f64;
        let mu = estimate_mu_spectral(h, q, n, ctx.key(i, 0))?;
        let la = estimate_lambda_spectral(h, q, n, ctx.key(i, 1))?;
        let ob = estimate_order_bounds(h, q, n, ctx.key(i, 2))?;
        let m = SE_MULTIPLIER;
        ctx.at_most(format!("{tag} mu>=1"), "1 - mu", 1.0, mu.estimate, m * mu.std_error);
        ctx.at_most(format!("{tag} mu<=d"), "mu - d", mu.estimate, d, m * mu.std_error);
        ctx.at_most(format!("{tag} lambda>=0"), "-lambda", 0.0, la.estimate, m * la.std_error);
        ctx.at_most(format!("{tag} lambda<=1"), "lambda - 1", la.estimate, 1.0, m * la.std_error);
        let bound = if ob.min_y.estimate <= ob.min_inv_z.estimate { ob.min_y } else { ob.min_inv_z };
        ctx.at_most(
            format!("{tag} lambda<=min(E min Y, E min 1/Z)"),
            "lambda - bound",
            la.estimate,
            bound.estimate,
            m * combined_se(&[la.std_error, bound.std_error]),
        );
        let theta_h = h.theta_closed_form().ok_or_else(|| {
            Error::capability(format!("bounds suite needs a closed-form extremal coefficient for {h}"))
        })?;
        let (lower, lower_se) = if theta_h >= ob.max_inv_z.estimate {
            (theta_h, 0.0)
        } else {
            (ob.max_inv_z.estimate, ob.max_inv_z.std_error)
        };
        ctx.at_most(
            format!("{tag} mu>=max(theta(H), E max 1/Z)"),
            "bound - mu",
            lower,
            mu.estimate,
            m * combined_se(&[mu.std_error, lower_se]),
        );
    }
    Ok(())
}

fn bivariate(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.opts.n;
    for (i, (h, q)) in pairs_or(ctx.opts, bivariate_battery).iter().enumerate() {
        if h.dim() != 2 {
            return Err(Error::invalid("the bivariate identity needs d = 2"));
        }
        let mu = estimate_mu_spectral(h, q, n, ctx.key(i, 0))?;
        let la = estimate_lambda_spectral(h, q, n, ctx.key(i, 1))?;
        ctx.close(
            format!("H={h} Q={q}"),
            "|mu + lambda - 2|",
            mu.estimate + la.estimate,
            2.0,
            SE_MULTIPLIER * combined_se(&[mu.std_error, la.std_error]),
        );
    }
    Ok(())
}

fn subsets(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.opts.n;
    let h = ctx.opts.h.clone().unwrap_or_else(|| make_logistic(3, 1.5).expect("valid"));
    let q = ctx.opts.q.clone().unwrap_or_else(|| spec(make_h0(3).expect("valid")));
    let tag = format!("H={h} Q={q}");
    let mu = estimate_mu_spectral(&h, &q, n, ctx.key(0, 0))?;
    let la = estimate_lambda_spectral(&h, &q, n, ctx.key(0, 1))?;
    let la_table = estimate_subset_table(&h, &q, Measure::Lambda, n, ctx.key(0, 2))?;
    let mu_table = estimate_subset_table(&h, &q, Measure::Mu, n, ctx.key(0, 3))?;
    let (mu_t, mu_t_se) = la_table.transform()?;
    let (la_t, la_t_se) = mu_table.transform()?;
    let m = SE_MULTIPLIER;
    ctx.close(
        format!("{tag} mu from lambda table"),
        "|mu - transform|",
        mu.estimate,
        mu_t,
        m * combined_se(&[mu.std_error, mu_t_se]),
    );
    ctx.close(
        format!("{tag} lambda from mu table"),
        "|lambda - transform|",
        la.estimate,
        la_t,
        m * combined_se(&[la.std_error, la_t_se]),
    );
    for (table, increasing) in [(&mu_table, true), (&la_table, false)] {
        let what = if increasing { "mu" } else { "lambda" };
        let entries: Vec<_> = table.values.entries().collect();
        for (k, vk) in &entries {
            for (kk, vkk) in &entries {
                if k.len() < 2 || kk.len() <= k.len() || !k.iter().all(|i| kk.contains(i)) {
                    continue;
                }
                let se_k = table.std_errors.get(k).unwrap_or(0.0);
                let se_kk = table.std_errors.get(kk).unwrap_or(0.0);
                let tol = m * combined_se(&[se_k, se_kk]);
                let one_based = |s: &[usize]| s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
                let name = format!("{tag} {what} monotone {{{}}} vs {{{}}}", one_based(k), one_based(kk));
                if increasing {
                    ctx.at_most(name, "mu(K) - mu(K')", *vk, *vkk, tol);
                } else {
                    ctx.at_most(name, "lambda(K') - lambda(K)", *vkk, *vk, tol);
                }
            }
        }
    }
    Ok(())
}

fn kleje(ctx: &mut Ctx) -> Result<()> {
    let reps = ctx.opts.reps;
    let n_list = [10_000u64];
    let models = match &ctx.opts.h {
        Some(h) => vec![h.clone()],
        None => vec![
            make_logistic(2, 2.0).expect("valid"),
            make_hinf(2).expect("valid"),
            make_h0(2).expect("valid"),
        ],
    };
    for (i, h) in models.iter().enumerate() {
        let r = tail_probability_check(h, 1.0, 1.0, &n_list, reps, ctx.key(i, 0))?;
        let row = r.rows[0];
        let name = format!("H={h} u=t=1 n={}", row.n);
        if r.limit == 0.0 {
            ctx.at_most(name, "estimate - threshold", row.estimate, KLEJE_INDEPENDENCE_THRESHOLD, 0.0);
        } else {
            ctx.close(name, "|estimate - limit|", row.estimate, r.limit, SE_MULTIPLIER * row.std_error);
        }
    }
    Ok(())
}

/// Upper bound on item ii for `F = G = H0` at `n = 1000`: the exact value
/// is `n (1 - e^{-1/n})^2 ≈ 1e-3`.
pub const H0_ITEM_II_BOUND: f64 = 0.002;

fn indep(ctx: &mut Ctx) -> Result<()> {
    let reps = ctx.opts.reps;
    let n_list = [1000u64];
    let gauss = DistributionSpec::parse("gauss_copula(2, rho=0.5)")?;
    let r = asymptotic_independence_battery(&gauss, &gauss, &n_list, reps, ctx.key(0, 0))?;
    let row = r.rows[0];
    let thr = GAUSS_BATTERY_THRESHOLDS;
    let tag = format!("F=G={gauss} n={}", row.n);
    ctx.at_most(format!("{tag} item ii"), "estimate - threshold", row.item_ii, thr.item_ii, 0.0);
    ctx.at_most(format!("{tag} item iii"), "estimate - threshold", row.item_iii, thr.item_iii, 0.0);
    ctx.at_most(format!("{tag} item v"), "estimate - threshold", row.item_v, thr.item_v, 0.0);

    let logistic = spec(make_logistic(2, 2.0).expect("valid"));
    let r = asymptotic_independence_battery(&logistic, &logistic, &n_list, reps, ctx.key(1, 0))?;
    let row = r.rows[0];
    ctx.close(
        format!("F=G={logistic} n={} item ii", row.n),
        "|estimate - (2 - theta)|",
        row.item_ii,
        2.0 - 2f64.sqrt(),
        SE_MULTIPLIER * row.se_ii,
    );

    let h0 = spec(make_h0(2).expect("valid"));
    let r = asymptotic_independence_battery(&h0, &h0, &n_list, reps, ctx.key(2, 0))?;
    let row = r.rows[0];
    ctx.at_most(format!("F=G={h0} n={} item ii", row.n), "estimate - bound", row.item_ii, H0_ITEM_II_BOUND, 0.0);
    Ok(())
}

/// Runs one suite and returns its lines.
pub fn run_suite(suite: Suite, opts: &CheckOptions) -> Result<Vec<CheckLine>> {
    let mut ctx = Ctx {
        suite,
        opts,
        lines: Vec::new(),
    };
    match suite {
        Suite::Bounds => bounds(&mut ctx)?,
        Suite::Bivariate => bivariate(&mut ctx)?,
        Suite::Subsets => subsets(&mut ctx)?,
        Suite::Kleje => kleje(&mut ctx)?,
        Suite::Indep => indep(&mut ctx)?,
    }
    Ok(ctx.lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()), Some(s));
        }
        assert_eq!(Suite::parse("everything"), None);
    }

    #[test]
    fn bivariate_single_pair() {
        let mut opts = CheckOptions::new(7);
        opts.n = 200_000;
        opts.h = Some(make_logistic(2, 2.0).unwrap());
        opts.q = Some(spec(make_h0(2).unwrap()));
        let lines = run_suite(Suite::Bivariate, &opts).unwrap();
        assert_eq!(lines.len(), 1);
        assert!(lines[0].pass, "{}", lines[0]);
        assert!(lines[0].to_string().starts_with("PASS [bivariate]"));
    }

    #[test]
    fn battery_sizes() {
        assert_eq!(bivariate_battery().len(), 6);
        assert_eq!(bounds_battery().len(), 16 + 9 + 9);
    }
}
