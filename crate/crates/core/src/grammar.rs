//! Text form of model specifications.
//!
//! ```text
//! h0(d) | hinf(d) | indep_frechet(d)
//! logistic(d, alpha)          logistic(d, alpha=2.0)
//! husler_reiss(d, gamma=g)    husler_reiss(d, gamma=[g12, g13, ..., g(d-1)d])
//! gauss_copula(d, rho=r)      gauss_copula(d, rho=[r12, r13, ...])
//! ```
//!
//! A scalar `gamma`/`rho` fills every off-diagonal entry; a list gives the
//! strict upper triangle row by row. Any model may carry a trailing 1-based
//! coordinate list, `logistic(3, 2)[1,3]`, selecting a marginal.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::families::{
    make_h0, make_hinf, make_husler_reiss, make_logistic, DistributionSpec, GaussCopula,
};

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Splits on commas that are not nested inside brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(s[start..].trim());
    parts
}

enum Value {
    Scalar(f64),
    List(Vec<f64>),
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| err(format!("expected a number, found `{s}`")))
}

fn parse_value(s: &str) -> Result<Value> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        inner
            .split(',')
            .map(parse_number)
            .collect::<Result<Vec<_>>>()
            .map(Value::List)
    } else {
        parse_number(s).map(Value::Scalar)
    }
}

fn parse_dim(s: &str) -> Result<usize> {
    let d: usize = s
        .trim()
        .parse()
        .map_err(|_| err(format!("expected a dimension, found `{s}`")))?;
    if d < 2 {
        return Err(err(format!("dimension must be at least 2, found {d}")));
    }
    Ok(d)
}

/// Symmetric matrix with `diag` on the diagonal and `value` off it.
fn off_diagonal(d: usize, diag: f64, value: Value, what: &str) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::from_element(d, d, diag);
    match value {
        Value::Scalar(v) => {
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        m[(i, j)] = v;
                    }
                }
            }
        }
        Value::List(vals) => {
            let need = d * (d - 1) / 2;
            if vals.len() != need {
                return Err(err(format!(
                    "{what} list must have {need} upper-triangle entries for d = {d}, found {}",
                    vals.len()
                )));
            }
            let mut it = vals.into_iter();
            for i in 0..d {
                for j in i + 1..d {
                    let v = it.next().expect("length checked");
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(m)
}

/// Reads argument `idx`, accepting either `value` or `name=value`.
fn arg<'a>(args: &[&'a str], idx: usize, name: &str) -> Result<&'a str> {
    let raw = args
        .get(idx)
        .ok_or_else(|| err(format!("missing argument `{name}`")))?;
    match raw.split_once('=') {
        Some((key, val)) if key.trim() == name => Ok(val.trim()),
        Some((key, _)) => Err(err(format!("unexpected argument `{}`, expected `{name}`", key.trim()))),
        None => Ok(raw),
    }
}

fn expect_arity(name: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(err(format!("`{name}` takes {n} argument(s), found {}", args.len())));
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<DistributionSpec> {
    let text = text.trim();
    let open = text
        .find('(')
        .ok_or_else(|| err(format!("expected `name(args)`, found `{text}`")))?;
    let close = text
        .rfind(')')
        .ok_or_else(|| err(format!("missing `)` in `{text}`")))?;
    if close < open {
        return Err(err(format!("malformed model `{text}`")));
    }
    let name = text[..open].trim();
    let args = split_top_level(&text[open + 1..close]);
    let suffix = text[close + 1..].trim();

    let spec = match name {
        "h0" | "hinf" | "indep_frechet" => {
            expect_arity(name, &args, 1)?;
            let d = parse_dim(arg(&args, 0, "d")?)?;
            match name {
                "h0" => DistributionSpec::MaxStable(make_h0(d)?),
                "hinf" => DistributionSpec::MaxStable(make_hinf(d)?),
                _ => DistributionSpec::IndependentFrechet { d },
            }
        }
        "logistic" => {
            expect_arity(name, &args, 2)?;
            let d = parse_dim(arg(&args, 0, "d")?)?;
            let alpha = parse_number(arg(&args, 1, "alpha")?)?;
            DistributionSpec::MaxStable(make_logistic(d, alpha)?)
        }
        "husler_reiss" => {
            expect_arity(name, &args, 2)?;
            let d = parse_dim(arg(&args, 0, "d")?)?;
            let value = parse_value(arg(&args, 1, "gamma")?)?;
            DistributionSpec::MaxStable(make_husler_reiss(off_diagonal(d, 0.0, value, "gamma")?)?)
        }
        "gauss_copula" => {
            expect_arity(name, &args, 2)?;
            let d = parse_dim(arg(&args, 0, "d")?)?;
            let value = parse_value(arg(&args, 1, "rho")?)?;
            DistributionSpec::GaussianCopulaFrechet(GaussCopula::new(off_diagonal(d, 1.0, value, "rho")?)?)
        }
        other => return Err(err(format!("unknown model family `{other}`"))),
    };

    if suffix.is_empty() {
        return Ok(spec);
    }
    let inner = suffix
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| err(format!("unexpected trailing text `{suffix}`")))?;
    let coords = inner
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .map(|k| k - 1)
                .ok_or_else(|| err(format!("bad coordinate `{c}` (coordinates are 1-based)")))
        })
        .collect::<Result<Vec<_>>>()?;
    spec.marginal(&coords)
}
