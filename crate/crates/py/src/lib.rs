//! Python bindings. Structured results come back as JSON strings.

// pyo3 0.22 macros trip this lint on PyResult returns
#![allow(clippy::useless_conversion)]

use circunit_core::certifier::{certify as run_certify, CertifyOptions};
use circunit_core::cyclotomic;
use circunit_core::fields::build_counterexample_field;
use circunit_core::iwasawa::{formal_identity_check, FiniteAbelianGroup, ModulusPoly, RingSpec};
use circunit_core::padic;
use circunit_core::prospector;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: circunit_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Good (p+1)-tuples below `bound`, as lists of primes.
#[pyfunction]
#[pyo3(signature = (p, bound=20000, max_results=1))]
fn prospect(p: u64, bound: u64, max_results: usize) -> PyResult<Vec<Vec<u64>>> {
    Ok(prospector::prospect(p, bound, max_results).map_err(err)?.into_iter().map(|t| t.primes).collect())
}

/// Raises ValueError naming the first failing condition.
#[pyfunction]
fn verify_tuple(primes: Vec<u64>, p: u64) -> PyResult<bool> {
    prospector::verify_tuple(&primes, p).map_err(err)?;
    Ok(true)
}

#[pyfunction]
fn verify_distribution(r: u64, s: u64) -> PyResult<bool> {
    cyclotomic::verify_distribution(r, s).map_err(err)
}

#[pyfunction]
fn frobenius_exponent(l: u64, p: u64, k: u32) -> PyResult<u64> {
    Ok(padic::frobenius_exponent(l, p, k).map_err(err)?.value())
}

#[pyfunction]
fn teichmuller(a: i64, p: u64, k: u32) -> PyResult<u64> {
    Ok(padic::teichmuller(a, p, k).map_err(err)?.value())
}

#[pyfunction]
fn formal_identity(p: u64) -> PyResult<bool> {
    let spec = RingSpec::new(p, 4, ModulusPoly::Truncation(1), FiniteAbelianGroup::elementary_rank2(p)).map_err(err)?;
    formal_identity_check(&spec).map_err(err)
}

/// The (Z/p)^2 field of a tuple, after checking its conditions.
#[pyfunction]
fn build_field(primes: Vec<u64>, p: u64) -> PyResult<String> {
    let field = build_counterexample_field(&primes, p).map_err(err)?;
    field.verify().map_err(err)?;
    Ok(serde_json::to_string(&field).expect("plain data"))
}

/// Certificate or failure report as JSON.
#[pyfunction]
#[pyo3(signature = (primes, p=3, k=8, d=16, levels=0))]
fn certify(py: Python<'_>, primes: Vec<u64>, p: u64, k: u32, d: usize, levels: u32) -> PyResult<String> {
    let opts = CertifyOptions { k, d, levels, ..Default::default() };
    let outcome = py.allow_threads(|| run_certify(&primes, p, &opts)).map_err(err)?;
    Ok(outcome.to_json())
}

#[pymodule]
fn circunit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(prospect, m)?)?;
    m.add_function(wrap_pyfunction!(verify_tuple, m)?)?;
    m.add_function(wrap_pyfunction!(verify_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(frobenius_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(teichmuller, m)?)?;
    m.add_function(wrap_pyfunction!(formal_identity, m)?)?;
    m.add_function(wrap_pyfunction!(build_field, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    Ok(())
}
