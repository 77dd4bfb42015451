//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals,
//! and an iterated variant for rectangles.
//!
//! The 15-point rule never evaluates the interval endpoints, so integrable
//! endpoint singularities (e.g. logarithmic ones after a `u = exp(-1/z)`
//! substitution) are handled by bisection.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Dimension of the integral (1 or 2).
    pub dim: usize,
    pub abs_tol: f64,
    /// Relative tolerance; the run stops once either tolerance is met.
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            abs_tol: 1e-9,
            rel_tol: 0.0,
            max_subdivisions: 5_000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(dim: usize, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(Error::invalid(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid(format!("quadrature dimension must be 1 or 2, got {dim}")));
        }
        Ok(Self {
            dim,
            abs_tol,
            rel_tol: 0.0,
            max_subdivisions,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut pairs = [(0.0, 0.0); 7];
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        pairs[j] = (f(center - dx), f(center + dx));
        let sum = pairs[j].0 + pairs[j].1;
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    // The raw Kronrod-Gauss difference is over-optimistic on kinked
    // integrands; rescale it against the absolute deviation as QUADPACK does.
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((pairs[j].0 - mean).abs() + (pairs[j].1 - mean).abs());
    }
    let resasc = resasc * half.abs();
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    (value, error)
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    let mut subdivisions = 0usize;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value"));
        }
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        // A single rule application can alias a kink onto its nodes, so the
        // interval is always bisected at least once.
        if err <= target && subdivisions > 0 {
            return Ok(Integral {
                value: total,
                error: err,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::numeric(format!(
                "quadrature did not converge in {subdivisions} subdivisions \
                 (error estimate {err:.3e}, target {target:.3e})"
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::numeric("quadrature interval collapsed below machine precision"));
        }
        let (lv, le) = gk15(&f, seg.a, mid);
        let (rv, re) = gk15(&f, mid, seg.b);
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: lv,
            error: le,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: rv,
            error: re,
        });
        subdivisions += 1;
    }
}

/// Iterated integral of `f(x, y)` over `[ax, bx] × [ay, by]`.
///
/// The inner integral runs at a tenth of the outer tolerance per unit length;
/// the first inner failure aborts the whole integration.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / (10.0 * (bx - ax).abs().max(1.0)),
        ..*spec
    };
    let outer_spec = QuadratureSpec {
        abs_tol: 0.9 * spec.abs_tol,
        ..*spec
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0f64);
    let outer = integrate(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match integrate(|y| f(x, y), ay, by, &inner_spec) {
                Ok(r) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(r.error);
                    r.value
                }
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        ax,
        bx,
        &outer_spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Integral {
        value: outer.value,
        error: outer.error + (bx - ax).abs() * inner_err.into_inner(),
        subdivisions: outer.subdivisions,
    })
}
