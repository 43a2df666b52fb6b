use std::f64::consts::TAU;
use std::path::Path;

use serde::Serialize;

use optineq::lp::{duality_cross_check, LpError};
use optineq::sawtooth::{self, VerificationCertificate};
use optineq::scalar::{format_f64, Scalar};
use optineq::sine::{self, GridCertificate};
use optineq::{AtomicMeasure, CoefficientVector, Family, Rational};

use crate::output::{csv, emit};
use crate::{params, Format, Outcome, UsageError};

/// Sine certificate grid when `--grid-size` is not given.
const DEFAULT_GRID_SIZE: usize = 1_000_000;

#[derive(Serialize)]
#[serde(bound = "T: Scalar")]
struct CoeffsPayload<T: Scalar> {
    coefficients: CoefficientVector<T>,
    sum: String,
    closed_form_sum: String,
    bound: String,
}

fn coeffs_payload(family: Family, m: usize) -> Result<Box<dyn ErasedCoeffs>, UsageError> {
    Ok(match family {
        Family::Sawtooth => {
            let b = sawtooth::coefficients(m)?;
            Box::new(CoeffsPayload {
                sum: b.sum().encode(),
                closed_form_sum: sawtooth::coefficient_sum(m)?.encode(),
                bound: sawtooth::bound(m)?.encode(),
                coefficients: b,
            })
        }
        Family::Sine => {
            let a = sine::sine_coefficients(m)?;
            let c = sine::cm(m)?;
            Box::new(CoeffsPayload {
                sum: a.sum().encode(),
                closed_form_sum: c.encode(),
                bound: (1.0 / c).encode(),
                coefficients: a,
            })
        }
    })
}

/// Format-specific views of a [`CoeffsPayload`] for either scalar type.
trait ErasedCoeffs {
    fn json(&self) -> serde_json::Value;
    fn rows(&self) -> Vec<(String, String)>;
    fn summary(&self) -> (&str, &str, &str);
}

impl<T: Scalar> ErasedCoeffs for CoeffsPayload<T> {
    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("payload serialises")
    }
    fn rows(&self) -> Vec<(String, String)> {
        self.coefficients
            .iter()
            .map(|(k, c)| (k.to_string(), c.encode()))
            .collect()
    }
    fn summary(&self) -> (&str, &str, &str) {
        (&self.sum, &self.closed_form_sum, &self.bound)
    }
}

pub fn coeffs(family: Family, m: usize, format: Format) -> Result<Outcome, UsageError> {
    let payload = coeffs_payload(family, m)?;
    match format {
        Format::Json => emit(
            "coeffs",
            params! { "family" => family, "m" => m, "format" => "json" },
            payload.json(),
        ),
        Format::Csv => print!("{}", csv("k,coefficient", payload.rows())),
        Format::Text => {
            let (sum, closed, bound) = payload.summary();
            println!("{family} m = {m}");
            for (k, c) in payload.rows() {
                println!("a_{k} = {c}");
            }
            println!("sum = {sum}");
            println!("closed-form sum = {closed}");
            println!("bound = {bound}");
        }
    }
    Ok(Outcome::Passed)
}

#[derive(Serialize)]
#[serde(untagged)]
enum Certificate {
    Exact(VerificationCertificate),
    Grid(GridCertificate),
}

pub fn verify(
    family: Family,
    m: usize,
    exact: bool,
    grid_size: Option<usize>,
) -> Result<Outcome, UsageError> {
    let (cert, passed, parameters) = match family {
        Family::Sawtooth => {
            if grid_size.is_some() {
                return Err(UsageError("--grid-size applies to the sine family".into()));
            }
            let cert = sawtooth::verify_exact(&sawtooth::coefficients(m)?)?;
            let passed = cert.passed;
            (
                Certificate::Exact(cert),
                passed,
                params! { "family" => family, "m" => m, "exact" => true },
            )
        }
        Family::Sine => {
            if exact {
                return Err(UsageError(
                    "--exact applies to the sawtooth family; use --grid-size".into(),
                ));
            }
            let n = grid_size.unwrap_or(DEFAULT_GRID_SIZE);
            let cert = sine::verify_sine(m, n)?;
            let passed = cert.passed;
            (
                Certificate::Grid(cert),
                passed,
                params! { "family" => family, "m" => m, "grid_size" => n },
            )
        }
    };
    emit("verify", parameters, cert);
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::Failed
    })
}

#[derive(Serialize)]
struct Expectation {
    k: usize,
    value: String,
}

#[derive(Serialize)]
#[serde(bound = "T: Scalar")]
struct MeasurePayload<T: Scalar> {
    measure: AtomicMeasure<T>,
    expectations: Vec<Expectation>,
    min_expectation: String,
    bound: String,
}

fn measure_payload<T: Scalar>(
    measure: AtomicMeasure<T>,
    m: usize,
    expectation: impl Fn(&AtomicMeasure<T>, usize) -> T,
    bound: T,
) -> MeasurePayload<T> {
    let values: Vec<T> = (1..=m).map(|k| expectation(&measure, k)).collect();
    let min = values
        .iter()
        .cloned()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("m >= 1");
    MeasurePayload {
        expectations: values
            .iter()
            .enumerate()
            .map(|(i, v)| Expectation {
                k: i + 1,
                value: v.encode(),
            })
            .collect(),
        min_expectation: min.encode(),
        bound: bound.encode(),
        measure,
    }
}

pub fn measure(family: Family, m: usize) -> Result<Outcome, UsageError> {
    let parameters = params! { "family" => family, "m" => m };
    match family {
        Family::Sawtooth => emit(
            "measure",
            parameters,
            measure_payload(
                sawtooth::extremal_measure(m)?,
                m,
                sawtooth::expectation_exact,
                sawtooth::bound(m)?,
            ),
        ),
        Family::Sine => emit(
            "measure",
            parameters,
            measure_payload(
                sine::sine_extremal_measure(m)?,
                m,
                sine::sine_expectation,
                1.0 / sine::cm(m)?,
            ),
        ),
    }
    Ok(Outcome::Passed)
}

#[derive(Serialize)]
struct CmPayload {
    m: usize,
    cm: String,
    inverse: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<String>,
}

pub fn cm(m: usize, asymptotic: bool) -> Result<Outcome, UsageError> {
    let c = sine::cm(m)?;
    let asym = if asymptotic {
        Some(sine::cm_asymptotic(m)?)
    } else {
        None
    };
    emit(
        "cm",
        params! { "m" => m, "asymptotic" => asymptotic },
        CmPayload {
            m,
            cm: format_f64(c),
            inverse: format_f64(1.0 / c),
            asymptotic: asym.map(format_f64),
            residual: asym.map(|a| format_f64(c - a)),
        },
    );
    Ok(Outcome::Passed)
}

pub fn lp_check(family: Family, m: usize, grid: Option<usize>) -> Result<Outcome, UsageError> {
    if family == Family::Sawtooth && grid.is_some() {
        return Err(UsageError("--grid applies to the sine family".into()));
    }
    let report = match duality_cross_check(family, m, grid) {
        Ok(r) => r,
        Err(e @ LpError::IterationLimit(_)) => {
            eprintln!("error: {e}");
            return Ok(Outcome::Failed);
        }
        Err(e) => return Err(e.into()),
    };
    let mut parameters = params! { "family" => family, "m" => m };
    if family == Family::Sine {
        parameters.insert(
            "grid",
            serde_json::json!(grid.unwrap_or_else(|| optineq::lp::default_sine_grid(m))),
        );
    }
    let passed = report.passed;
    emit("lp-check", parameters, report);
    Ok(if passed {
        Outcome::Passed
    } else {
        Outcome::Failed
    })
}

/// `(x, f)` rows over one period. For the sawtooth each jump adds the value
/// at the jump and then the right-hand limit, both at the jump location.
fn plot_rows(family: Family, m: usize, samples: usize) -> Result<Vec<(f64, f64)>, UsageError> {
    match family {
        Family::Sine => {
            let a = sine::sine_coefficients(m)?;
            Ok((0..samples)
                .map(|i| {
                    let x = TAU * i as f64 / samples as f64;
                    (x, sine::evaluate_trig(&a, x))
                })
                .collect())
        }
        Family::Sawtooth => {
            let b = sawtooth::coefficients(m)?;
            let jumps = sawtooth::breakpoints(m)?;
            let mut rows: Vec<(Rational, Rational)> = (0..samples)
                .map(|i| Rational::frac(i as i64, samples as i64))
                .filter(|x| jumps.binary_search(x).is_err())
                .map(|x| {
                    let v = sawtooth::evaluate_exact(&b, &x);
                    (x, v)
                })
                .collect();
            for x in jumps {
                rows.push((x.clone(), sawtooth::evaluate_exact(&b, &x)));
                rows.push((x.clone(), sawtooth::right_limit_exact(&b, &x)));
            }
            // Stable sort keeps the left value ahead of the right limit.
            rows.sort_by(|p, q| p.0.cmp(&q.0));
            Ok(rows
                .into_iter()
                .map(|(x, v)| (x.to_f64(), v.to_f64()))
                .collect())
        }
    }
}

#[derive(Serialize)]
struct PlotPayload {
    path: String,
    rows: usize,
    max_f: String,
}

pub fn plot(
    family: Family,
    m: usize,
    samples: usize,
    out: Option<&Path>,
    two_pi: bool,
) -> Result<Outcome, UsageError> {
    if samples < 2 {
        return Err(UsageError(format!(
            "--samples must be at least 2, got {samples}"
        )));
    }
    let scale = if two_pi && family == Family::Sawtooth {
        TAU
    } else {
        1.0
    };
    let rows = plot_rows(family, m, samples)?;
    let max_f = rows.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let text = csv(
        "x,f",
        rows.iter()
            .map(|&(x, f)| (format_f64(x * scale), format_f64(f))),
    );
    match out {
        None => print!("{text}"),
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))?;
            emit(
                "plot",
                params! {
                    "family" => family,
                    "m" => m,
                    "samples" => samples,
                    "two_pi" => two_pi,
                },
                PlotPayload {
                    path: path.display().to_string(),
                    rows: rows.len(),
                    max_f: format_f64(max_f),
                },
            );
        }
    }
    Ok(Outcome::Passed)
}
