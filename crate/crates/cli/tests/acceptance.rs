//! Acceptance suite: fourteen criteria, one PASS/FAIL line each.
//!
//! Run with `cargo test -p extremal-cli --test acceptance -- --nocapture`
//! to see the lines. Every tolerance is pinned below; none is tuned per run.

use std::path::PathBuf;
use std::process::{Command, Stdio};

use extremal_core::checks::{bivariate_battery, run_suite, CheckOptions, Suite};
use extremal_core::domination::{
    asymptotic_independence_battery, convergence_sweep_mu, simulate_domination, MaximaMode,
    GAUSS_BATTERY_THRESHOLDS,
};
use extremal_core::families::{make_h0, make_hinf, make_logistic, Family};
use extremal_core::measures::{
    combined_se, estimate_lambda_self, estimate_lambda_spectral, estimate_mu_direct, estimate_mu_psi,
    estimate_mu_spectral, estimate_subset_table, theta_mc, xi_finite_difference, EstimatorResult, Measure,
};
use extremal_core::oracles::{tail_probability_check, exact_domination_h0_hinf, xi_closed_form};
use extremal_core::{DistributionSpec, SpectralModel, StreamKey};

const SEED: u64 = 20_251_015;
/// Standard-error multiplier for every Monte Carlo comparison.
const K_SE: f64 = 4.0;
const N_MC: u64 = 1_000_000;
const THETA_EXACT_TOL: f64 = 1e-12;
const SWEEP_FINAL_TOL: f64 = 0.05;
const XI_TOL: f64 = 1e-3;
const XI_STEP: f64 = 1e-4;
const DOMINATION_REPS: u64 = 1_000_000;
const KLEJE_REPS: u64 = 10_000_000;
const BATTERY_REPS: u64 = 10_000_000;

fn key(criterion: u64, slot: u64) -> StreamKey {
    StreamKey::new(SEED, 100 * criterion + slot, 0)
}

fn ms(m: SpectralModel) -> DistributionSpec {
    DistributionSpec::MaxStable(m)
}

fn within(r: &EstimatorResult, target: f64) -> bool {
    (r.estimate - target).abs() <= K_SE * r.std_error
}

fn agree(a: &EstimatorResult, b: &EstimatorResult) -> bool {
    (a.estimate - b.estimate).abs() <= K_SE * combined_se(&[a.std_error, b.std_error])
}

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn c1_mu_independence_is_d() -> Outcome {
    let mut worst = 0.0f64;
    let mut ok = true;
    for d in [2usize, 3, 5] {
        let h = make_h0(d).unwrap();
        for (j, q) in [make_h0(d), make_hinf(d), make_logistic(d, 2.0)].into_iter().enumerate() {
            let r = estimate_mu_spectral(&h, &ms(q.unwrap()), N_MC, key(1, 10 * d as u64 + j as u64)).unwrap();
            ok &= within(&r, d as f64);
            worst = worst.max((r.estimate - d as f64).abs() / r.std_error.max(f64::MIN_POSITIVE));
        }
    }
    (ok, format!("9 estimates, worst |mu - d| = {worst:.2} SE"))
}

fn c2_comonotone_pair_is_one() -> Outcome {
    let h = make_hinf(2).unwrap();
    let q = ms(h.clone());
    let mu = estimate_mu_spectral(&h, &q, N_MC, key(2, 0)).unwrap();
    let la = estimate_lambda_spectral(&h, &q, N_MC, key(2, 1)).unwrap();
    (
        within(&mu, 1.0) && within(&la, 1.0),
        format!("mu = {:.5} ± {:.1e}, lambda = {:.5} ± {:.1e}", mu.estimate, mu.std_error, la.estimate, la.std_error),
    )
}

fn c3_logistic_theta() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (d, a)) in [(2usize, 2.0f64), (4, 2.0), (3, 1.5)].into_iter().enumerate() {
        let h = make_logistic(d, a).unwrap();
        let exact = (d as f64).powf(1.0 / a);
        let mc = theta_mc(&h, N_MC, key(3, i as u64)).unwrap();
        let cf = h.theta_closed_form().unwrap();
        ok &= within(&mc, exact) && (cf - exact).abs() <= THETA_EXACT_TOL;
        detail.push(format!("({d},{a}): {:.4}/{exact:.4}", mc.estimate));
    }
    (ok, detail.join(", "))
}

fn c4_bivariate_identity() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for (i, (h, q)) in bivariate_battery().iter().enumerate() {
        let mu = estimate_mu_spectral(h, q, N_MC, key(4, 2 * i as u64)).unwrap();
        let la = estimate_lambda_spectral(h, q, N_MC, key(4, 2 * i as u64 + 1)).unwrap();
        let se = combined_se(&[mu.std_error, la.std_error]);
        let dev = (mu.estimate + la.estimate - 2.0).abs();
        ok &= dev <= K_SE * se;
        worst = worst.max(dev / se);
    }
    (ok, format!("6 pairs, worst |mu + lambda - 2| = {worst:.2} SE"))
}

fn c5_subset_transforms() -> Outcome {
    let h = make_logistic(3, 1.5).unwrap();
    let q = ms(make_h0(3).unwrap());
    let mu = estimate_mu_spectral(&h, &q, N_MC, key(5, 0)).unwrap();
    let la = estimate_lambda_spectral(&h, &q, N_MC, key(5, 1)).unwrap();
    let (mu_t, mu_t_se) = estimate_subset_table(&h, &q, Measure::Lambda, N_MC, key(5, 2))
        .unwrap()
        .transform()
        .unwrap();
    let (la_t, la_t_se) = estimate_subset_table(&h, &q, Measure::Mu, N_MC, key(5, 3))
        .unwrap()
        .transform()
        .unwrap();
    let ok_mu = (mu.estimate - mu_t).abs() <= K_SE * combined_se(&[mu.std_error, mu_t_se]);
    let ok_la = (la.estimate - la_t).abs() <= K_SE * combined_se(&[la.std_error, la_t_se]);
    (
        ok_mu && ok_la,
        format!("mu {:.4} vs {mu_t:.4}, lambda {:.4} vs {la_t:.4}", mu.estimate, la.estimate),
    )
}

fn c6_three_estimators() -> Outcome {
    let h = make_logistic(2, 2.0).unwrap();
    let q = ms(make_h0(2).unwrap());
    let a = estimate_mu_spectral(&h, &q, N_MC, key(6, 0)).unwrap();
    let b = estimate_mu_direct(&h, &q, N_MC, key(6, 1)).unwrap();
    let c = estimate_mu_psi(&h, &q, N_MC, key(6, 2)).unwrap();
    (
        agree(&a, &b) && agree(&a, &c) && agree(&b, &c),
        format!("spectral {:.4}, direct {:.4}, psi {:.4}", a.estimate, b.estimate, c.estimate),
    )
}

fn c7_self_lambda() -> Outcome {
    let h = make_logistic(2, 2.0).unwrap();
    let s = estimate_lambda_self(&h, N_MC, key(7, 0)).unwrap();
    let p = estimate_lambda_spectral(&h, &ms(h.clone()), N_MC, key(7, 1)).unwrap();
    let h0 = make_h0(2).unwrap();
    let s0 = estimate_lambda_self(&h0, N_MC, key(7, 2)).unwrap();
    let p0 = estimate_lambda_spectral(&h0, &ms(h0.clone()), N_MC, key(7, 3)).unwrap();
    let near_zero = |r: &EstimatorResult| r.estimate.abs() <= K_SE * r.std_error;
    (
        agree(&s, &p) && near_zero(&s0) && near_zero(&p0),
        format!(
            "logistic {:.4} vs {:.4}; h0 {:.1e} and {:.1e}",
            s.estimate, p.estimate, s0.estimate, p0.estimate
        ),
    )
}

fn c8_domination_limits() -> Outcome {
    let n = 1000u64;
    let nf = n as f64;
    let h0 = ms(make_h0(2).unwrap());
    let hinf = ms(make_hinf(2).unwrap());
    let exact_marginal = nf * (2.0 / (nf + 1.0) - 1.0 / ((nf + 1.0) * (nf + 1.0)));
    let exact_complete = nf / (nf + 1.0);
    // The closed forms agree with the exact-probability oracle.
    let (pi0, _) = exact_domination_h0_hinf(&Family::Independence, 2, n).unwrap();
    let (_, pibar_inf) = exact_domination_h0_hinf(&Family::Comonotone, 2, n).unwrap();
    let oracle_ok = (nf * pi0 - exact_marginal).abs() < 1e-12 && (nf * pibar_inf - exact_complete).abs() < 1e-12;
    let r0 = simulate_domination(&h0, &h0, &[n], DOMINATION_REPS, key(8, 0), MaximaMode::Auto).unwrap().rows[0];
    let ri = simulate_domination(&hinf, &hinf, &[n], DOMINATION_REPS, key(8, 1), MaximaMode::Auto).unwrap().rows[0];
    let ok0 = (r0.n_pi_marginal - exact_marginal).abs() <= K_SE * r0.se_marginal;
    let oki = (ri.n_pi_complete - exact_complete).abs() <= K_SE * ri.se_complete;
    (
        oracle_ok && ok0 && oki,
        format!(
            "h0 n*pi = {:.4} (exact {exact_marginal:.4}), hinf n*pibar = {:.4} (exact {exact_complete:.4})",
            r0.n_pi_marginal, ri.n_pi_complete
        ),
    )
}

fn c9_convergence_sweep() -> Outcome {
    let h = make_h0(2).unwrap();
    let r = convergence_sweep_mu(&h, &ms(h.clone()), &[10, 100, 1000], N_MC, key(9, 0)).unwrap();
    let increasing = r.rows.windows(2).all(|w| {
        w[1].estimate >= w[0].estimate - K_SE * combined_se(&[w[0].std_error, w[1].std_error])
    });
    let last = r.rows.last().unwrap().estimate;
    let vals: Vec<String> = r.rows.iter().map(|x| format!("{:.4}", x.estimate)).collect();
    (
        increasing && (last - 2.0).abs() <= SWEEP_FINAL_TOL,
        format!("mu_n = [{}]", vals.join(", ")),
    )
}

fn c10_tail_probability() -> Outcome {
    let h = make_logistic(2, 2.0).unwrap();
    let r = tail_probability_check(&h, 1.0, 1.0, &[10_000], KLEJE_REPS, key(10, 0)).unwrap();
    let row = r.rows[0];
    let target = 2.0 - 2f64.sqrt();
    (
        (row.estimate - target).abs() <= K_SE * row.std_error && (r.limit - target).abs() < 1e-12,
        format!("{:.4} ± {:.4} vs {target:.4}", row.estimate, row.std_error),
    )
}

fn c11_xi() -> Outcome {
    let grid = [0.5, 1.0, 2.0];
    let h0 = make_h0(2).unwrap();
    let lg = make_logistic(2, 2.0).unwrap();
    let mut worst_h0 = 0.0f64;
    let mut worst_lg = 0.0f64;
    let mut ok = true;
    for &x1 in &grid {
        for &x2 in &grid {
            match xi_finite_difference(&h0, x1, x2, XI_STEP).unwrap().value() {
                Some(v) => worst_h0 = worst_h0.max((v - 1.0).abs()),
                None => ok = false,
            }
            let fd = xi_finite_difference(&lg, x1, x2, XI_STEP).unwrap().value();
            let cf = xi_closed_form(&lg, x1, x2).unwrap().value();
            match (fd, cf) {
                (Some(a), Some(b)) => worst_lg = worst_lg.max((a - b).abs()),
                _ => ok = false,
            }
        }
    }
    (
        ok && worst_h0 < XI_TOL && worst_lg < XI_TOL,
        format!("max |xi - 1| (h0) = {worst_h0:.1e}, max |fd - oracle| (logistic) = {worst_lg:.1e}"),
    )
}

fn c12_independence_battery() -> Outcome {
    let gauss = DistributionSpec::parse("gauss_copula(2, rho=0.5)").unwrap();
    let g = asymptotic_independence_battery(&gauss, &gauss, &[1000], BATTERY_REPS, key(12, 0)).unwrap();
    let lg = ms(make_logistic(2, 2.0).unwrap());
    let l = asymptotic_independence_battery(&lg, &lg, &[1000], BATTERY_REPS, key(12, 1)).unwrap();
    let gr = g.rows[0];
    let lr = l.rows[0];
    let target = 2.0 - 2f64.sqrt();
    (
        g.below(&GAUSS_BATTERY_THRESHOLDS) && (lr.item_ii - target).abs() <= K_SE * lr.se_ii,
        format!(
            "gauss ii/iii/v = {:.4}/{:.4}/{:.4} (< {}), logistic ii = {:.4} vs {target:.4}",
            gr.item_ii, gr.item_iii, gr.item_v, GAUSS_BATTERY_THRESHOLDS.item_ii, lr.item_ii
        ),
    )
}

fn c13_bounds() -> Outcome {
    let mut opts = CheckOptions::new(SEED);
    opts.n = N_MC;
    let lines = run_suite(Suite::Bounds, &opts).unwrap();
    let relevant: Vec<_> = lines
        .iter()
        .filter(|l| l.name.ends_with(" mu>=1") || l.name.ends_with(" mu<=d") || l.name.ends_with(" lambda<=1"))
        .collect();
    let failed: Vec<String> = relevant.iter().filter(|l| !l.pass).map(|l| l.name.clone()).collect();
    (
        relevant.len() == 3 * 34 && failed.is_empty(),
        format!("{} bound checks, {} violations {:?}", relevant.len(), failed.len(), failed),
    )
}

fn run_cli(args: &[&str], threads: usize, out: &PathBuf) -> bool {
    Command::new(env!("CARGO_BIN_EXE_extremal"))
        .args(args)
        .args(["--threads", &threads.to_string(), "--out"])
        .arg(out)
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn c14_thread_invariance() -> Outcome {
    let dir = std::env::temp_dir().join(format!("extremal-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let seed = SEED.to_string();
    let runs: [Vec<&str>; 4] = [
        vec!["measure", "mu", "--H", "logistic(2,2.0)", "--Q", "h0(2)", "--n", "1000000", "--seed", &seed],
        vec!["dominate", "--F", "logistic(2,2.0)", "--G", "h0(2)", "--n-list", "1,10,100", "--reps", "200000", "--seed", &seed],
        vec!["converge", "lambda", "--H", "logistic(2,2.0)", "--Q", "h0(2)", "--n", "200000", "--seed", &seed],
        vec!["check", "bivariate", "--n", "200000", "--format", "csv", "--seed", &seed],
    ];
    let mut identical = 0;
    for (i, args) in runs.iter().enumerate() {
        let a = dir.join(format!("{i}-t1"));
        let b = dir.join(format!("{i}-t4"));
        if run_cli(args, 1, &a) && run_cli(args, 4, &b) {
            let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
            if !x.is_empty() && x == y {
                identical += 1;
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    (identical == runs.len(), format!("{identical}/{} commands byte-identical for 1 vs 4 threads", runs.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 14] = [
        ("mu(H0, Q) = d", c1_mu_independence_is_d),
        ("mu(Hinf, Hinf) = lambda(Hinf, Hinf) = 1", c2_comonotone_pair_is_one),
        ("logistic extremal coefficient", c3_logistic_theta),
        ("bivariate identity mu + lambda = 2", c4_bivariate_identity),
        ("subset inclusion-exclusion transforms", c5_subset_transforms),
        ("three mu estimators agree", c6_three_estimators),
        ("self-lambda formula", c7_self_lambda),
        ("domination limits", c8_domination_limits),
        ("convergence sweep", c9_convergence_sweep),
        ("bivariate tail probability", c10_tail_probability),
        ("xi function", c11_xi),
        ("asymptotic-independence battery", c12_independence_battery),
        ("bounds suite", c13_bounds),
        ("thread-count reproducibility", c14_thread_invariance),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f();
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
        if !pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
