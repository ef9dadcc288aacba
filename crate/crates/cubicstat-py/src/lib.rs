//! Python bindings for a small slice of cubicstat: enumeration, maximality,
//! central values, the Fourier matrix and the family constants.

use cubicstat::analytic::{afe_central_value, AfeKernel, KernelG};
use cubicstat::forms::enumerate_orbits as enumerate;
use cubicstat::stats::{family_averages, LocalSpec};
use cubicstat::BinaryCubicForm;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: cubicstat::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn form(c: (i64, i64, i64, i64)) -> BinaryCubicForm {
    BinaryCubicForm::new(c.0, c.1, c.2, c.3)
}

/// `(a, b, c, d, disc, stab, irreducible)`.
type OrbitTuple = (i64, i64, i64, i64, i64, u32, bool);

/// Orbit representatives with 0 < |disc| < max_disc of the given sign.
#[pyfunction]
fn enumerate_orbits(max_disc: u64, sign: i32) -> PyResult<Vec<OrbitTuple>> {
    let orbits = enumerate(max_disc, sign).map_err(py_err)?;
    Ok(orbits
        .into_iter()
        .map(|r| (r.form.a, r.form.b, r.form.c, r.form.d, r.disc, r.stab, r.irreducible))
        .collect())
}

#[pyfunction]
fn discriminant(coeffs: (i64, i64, i64, i64)) -> i128 {
    form(coeffs).disc()
}

#[pyfunction]
fn is_maximal(coeffs: (i64, i64, i64, i64)) -> PyResult<bool> {
    cubicstat::local::is_maximal(&form(coeffs)).map_err(py_err)
}

/// `(L(1/2, rho_K), tail_bound)` for a maximal irreducible form.
#[pyfunction]
#[pyo3(signature = (coeffs, kernel = "one"))]
fn central_value(coeffs: (i64, i64, i64, i64), kernel: &str) -> PyResult<(f64, f64)> {
    let f = form(coeffs);
    let sign = if f.disc() > 0 { 1 } else { -1 };
    let g = KernelG::from_name(kernel).map_err(py_err)?;
    let k = AfeKernel::for_sign(sign, g).map_err(py_err)?;
    let l = afe_central_value(&f, &k).map_err(py_err)?;
    Ok((l.l_half, l.tail_bound))
}

/// The 6x6 transform matrix mod p, entries as exact fractions "n/d".
#[pyfunction]
fn mori_matrix(p: u64) -> PyResult<Vec<Vec<String>>> {
    let m = cubicstat::fourier::mori_matrix(p).map_err(py_err)?;
    Ok(m.m.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect())
}

#[pyfunction]
fn orthogonality_holds(p: u64) -> PyResult<bool> {
    let r = cubicstat::fourier::verify_orthogonality(p).map_err(py_err)?;
    Ok(r.iter().all(|x| x.holds))
}

/// `(C_Sigma, C'_Sigma)` for a family such as `"-1;127:3"`.
#[pyfunction]
#[pyo3(signature = (spec, prime_cut = cubicstat::stats::DEFAULT_PRIME_CUT))]
fn family_constants(spec: &str, prime_cut: u64) -> PyResult<(f64, f64)> {
    let spec = LocalSpec::parse(spec).map_err(py_err)?;
    let fa = family_averages(&spec, prime_cut).map_err(py_err)?;
    Ok((fa.c_sigma, fa.c_prime_sigma))
}

#[pymodule]
fn pycubicstat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(enumerate_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(is_maximal, m)?)?;
    m.add_function(wrap_pyfunction!(central_value, m)?)?;
    m.add_function(wrap_pyfunction!(mori_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonality_holds, m)?)?;
    m.add_function(wrap_pyfunction!(family_constants, m)?)?;
    Ok(())
}
