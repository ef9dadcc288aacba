//! Dirichlet coefficients attached to cubic forms: `lambda_n(f)`,
//! `theta_n(f)`, the Euler factors of `D(s, f)` and `L(s, rho_K)`, the
//! correction factors `E_p(s, f)`, and the coefficients `e_{p,m}`, `e_k` of
//! the unbalanced approximate functional equation.
//!
//! Polynomials are integer coefficient lists in `x = p^-s`, constant first.

use crate::arith::{factor, SpfSieve};
use crate::error::{Error, Result};
use crate::forms::BinaryCubicForm;
use crate::fourier::{q, Q};
use crate::local::{maximalize, splitting_type_fast, SplittingType};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// `lambda_{p^m}` on a splitting type.
pub fn lambda_pm(t: SplittingType, m: u32) -> i64 {
    if m == 0 {
        return 1;
    }
    match t {
        SplittingType::Split111 => m as i64 + 1,
        SplittingType::Partial12 => (m % 2 == 0) as i64,
        SplittingType::Inert3 => match m % 3 {
            0 => 1,
            1 => -1,
            _ => 0,
        },
        SplittingType::Ramified1_21 => 1,
        SplittingType::TotallyRamified1_3 | SplittingType::Zero0 => 0,
    }
}

/// `theta_{p^m}`, the power sum of the local roots: `sum alpha^m`.
pub fn theta_pm(t: SplittingType, m: u32) -> i64 {
    match t {
        SplittingType::Split111 => 2,
        SplittingType::Partial12 => 1 + if m % 2 == 0 { 1 } else { -1 },
        SplittingType::Inert3 => {
            if m % 3 == 0 {
                2
            } else {
                -1
            }
        }
        SplittingType::Ramified1_21 => 1,
        SplittingType::TotallyRamified1_3 | SplittingType::Zero0 => 0,
    }
}

/// Reciprocal of `D_p` (or `L_p`) for a splitting type.
pub fn denominator_poly(t: SplittingType) -> Vec<i64> {
    match t {
        SplittingType::Split111 => vec![1, -2, 1],
        SplittingType::Partial12 => vec![1, 0, -1],
        SplittingType::Inert3 => vec![1, 1, 1],
        SplittingType::Ramified1_21 => vec![1, -1],
        _ => vec![1],
    }
}

/// `lambda_n(f)`.
pub fn lambda(f: &BinaryCubicForm, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let disc = f.discriminant()?;
    Ok(factor(n).iter().map(|&(p, m)| lambda_pm(splitting_type_fast(f, p, disc), m)).product())
}

/// `theta_{p^m}(f)`.
pub fn theta(f: &BinaryCubicForm, p: u64, m: u32) -> Result<i64> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    let disc = f.discriminant()?;
    Ok(theta_pm(splitting_type_fast(f, p, disc), m))
}

/// `theta_{p^m}` from the logarithmic derivative of `1/P(x)`: with
/// `-x P'(x)/P(x) = sum_m theta_m x^m`, via Newton's identities.
pub fn theta_from_poly(den: &[i64], m_max: usize) -> Vec<i64> {
    // P(x) = sum c_j x^j, c_0 = 1. Power sums s_m of the inverse roots obey
    // s_m = -m c_m - sum_{j=1}^{m-1} c_j s_{m-j}.
    let c = |j: usize| den.get(j).copied().unwrap_or(0);
    let mut s = vec![0i64; m_max + 1];
    for m in 1..=m_max {
        let mut v = -(m as i64) * c(m);
        for j in 1..m {
            v -= c(j) * s[m - j];
        }
        s[m] = v;
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EulerKind {
    D,
    L,
    E,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EulerFactorData {
    pub p: u64,
    pub kind: EulerKind,
    /// Coefficients in `p^-s`, constant first.
    pub poly: Vec<i64>,
    /// The factor is `1/poly` rather than `poly`.
    pub inverse: bool,
}

/// The six possible correction factors.
pub const E_POLYS: [&[i64]; 6] = [&[1], &[1, -1], &[1, 1], &[1, -2, 1], &[1, 0, -1], &[1, 1, 1]];

fn trim(mut v: Vec<i64>) -> Vec<i64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

/// Exact division of integer polynomials with constant term 1.
pub fn poly_div_exact(num: &[i64], den: &[i64]) -> Option<Vec<i64>> {
    let num = trim(num.to_vec());
    let den = trim(den.to_vec());
    if den.len() > num.len() {
        return None;
    }
    let mut rem = num.clone();
    let mut quo = vec![0i64; num.len() - den.len() + 1];
    let lead = *den.last().unwrap();
    for i in (0..quo.len()).rev() {
        let coef = rem[i + den.len() - 1];
        if coef % lead != 0 {
            return None;
        }
        let qv = coef / lead;
        quo[i] = qv;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= qv * d;
        }
    }
    if rem.iter().all(|&v| v == 0) {
        Some(trim(quo))
    } else {
        None
    }
}

pub fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// Splitting type of the field of `f` at p (after maximalization).
pub fn field_splitting_type(f: &BinaryCubicForm, p: u64) -> Result<SplittingType> {
    let m = maximalize(f)?;
    Ok(crate::local::splitting_type(&m.maximal_form, p).0)
}

/// Euler factor of the given kind at p.
pub fn euler_factor(f: &BinaryCubicForm, p: u64, kind: EulerKind) -> Result<EulerFactorData> {
    let dpoly = denominator_poly(crate::local::splitting_type(f, p).0);
    match kind {
        EulerKind::D => Ok(EulerFactorData { p, kind, poly: dpoly, inverse: true }),
        EulerKind::L => {
            let lpoly = denominator_poly(field_splitting_type(f, p)?);
            Ok(EulerFactorData { p, kind, poly: lpoly, inverse: true })
        }
        EulerKind::E => {
            let lpoly = denominator_poly(field_splitting_type(f, p)?);
            // E = D/L = L_den / D_den.
            let e = poly_div_exact(&lpoly, &dpoly).ok_or_else(|| {
                Error::Precision(format!("D_p does not divide L_p for {f} at {p}: {dpoly:?} vs {lpoly:?}"))
            })?;
            if !E_POLYS.iter().any(|c| *c == e.as_slice()) {
                return Err(Error::Precision(format!("unexpected E_p {e:?} for {f} at {p}")));
            }
            Ok(EulerFactorData { p, kind, poly: e, inverse: false })
        }
    }
}

/// Correction polynomial `E_p` at each prime dividing the index.
pub fn correction_factors(f: &BinaryCubicForm) -> Result<Vec<EulerFactorData>> {
    let m = maximalize(f)?;
    let mut out = Vec::new();
    for (p, _) in factor(m.index) {
        let dpoly = denominator_poly(crate::local::splitting_type(f, p).0);
        let lpoly = denominator_poly(crate::local::splitting_type(&m.maximal_form, p).0);
        let e = poly_div_exact(&lpoly, &dpoly)
            .ok_or_else(|| Error::Precision(format!("D_p does not divide L_p for {f} at {p}")))?;
        out.push(EulerFactorData { p, kind: EulerKind::E, poly: e, inverse: false });
    }
    Ok(out)
}

/// Coefficients `e_{p,0..=M}` for one prime.
#[derive(Clone, Debug, PartialEq)]
pub struct UnbalancedCoeffs {
    pub p: u64,
    pub values: Vec<Q>,
}

/// `sum_m e_{p,m} u^m = u^2 E(1/u) / E(u/p)` where `E(x)` is the
/// correction polynomial in `x = p^-s`.
pub fn e_coeffs_from_poly(epoly: &[i64], p: u64, m_max: usize) -> UnbalancedCoeffs {
    let pi = p as i64;
    let mut num = vec![Q::zero(); m_max + 1];
    for (j, &c) in epoly.iter().enumerate() {
        let e = 2 - j as i64;
        if e >= 0 && (e as usize) <= m_max {
            num[e as usize] += q(c, 1);
        }
    }
    let den: Vec<Q> = epoly.iter().enumerate().map(|(j, &c)| q(c, pi.pow(j as u32))).collect();
    let mut out = vec![Q::zero(); m_max + 1];
    for m in 0..=m_max {
        let mut v = num[m].clone();
        for j in 1..den.len().min(m + 1) {
            v -= &den[j] * &out[m - j];
        }
        out[m] = v;
    }
    UnbalancedCoeffs { p, values: out }
}

/// `e_{p,m}(f)` for `m <= m_max`; all zero when p does not divide the index.
pub fn e_coeffs(f: &BinaryCubicForm, p: u64, m_max: usize) -> Result<UnbalancedCoeffs> {
    let m = maximalize(f)?;
    if m.index % p != 0 {
        return Ok(UnbalancedCoeffs { p, values: vec![Q::zero(); m_max + 1] });
    }
    let e = euler_factor(f, p, EulerKind::E)?;
    Ok(e_coeffs_from_poly(&e.poly, p, m_max))
}

/// Everything needed to evaluate `e_k(f)` for all k.
#[derive(Clone, Debug)]
pub struct UnbalancedData {
    pub index: u64,
    pub rad_index: u64,
    pub field_discriminant: i64,
    /// Per prime of the index: E polynomial and `e_{p,m}` in floating point.
    pub primes: Vec<(u64, Vec<i64>, Vec<f64>)>,
}

impl UnbalancedData {
    pub fn new(f: &BinaryCubicForm, m_max: usize) -> Result<UnbalancedData> {
        let m = maximalize(f)?;
        let mut primes = Vec::new();
        for e in correction_factors(f)? {
            let c = e_coeffs_from_poly(&e.poly, e.p, m_max);
            primes.push((e.p, e.poly, c.values.iter().map(|v| v.to_f64().unwrap()).collect()));
        }
        let rad = primes.iter().map(|t| t.0).product();
        Ok(UnbalancedData { index: m.index, rad_index: rad, field_discriminant: m.field_discriminant, primes })
    }

    /// `e_k(f) = prod_{p | ind} e_{p, v_p(k)}`; zero if k has another prime.
    pub fn e_k(&self, k: u64) -> f64 {
        let mut rest = k;
        let mut prod = 1.0;
        for (p, _, vals) in &self.primes {
            let mut v = 0usize;
            while rest % p == 0 {
                rest /= p;
                v += 1;
            }
            prod *= vals.get(v).copied().unwrap_or(f64::NAN);
        }
        if rest != 1 {
            0.0
        } else {
            prod
        }
    }

    /// All k up to `k_max` with `e_k != 0`, with their values.
    pub fn support(&self, k_max: u64) -> Vec<(u64, f64)> {
        let ps: Vec<u64> = self.primes.iter().map(|t| t.0).collect();
        let mut out: Vec<(u64, f64)> = crate::arith::smooth_numbers(&ps, k_max)
            .into_iter()
            .map(|k| (k, self.e_k(k)))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        out.sort_by_key(|t| t.0);
        out
    }
}

/// `lambda_n(f)` for `1 <= n <= n_max` (index 0 unused). `sieve` must cover
/// `n_max`.
pub fn lambda_table(f: &BinaryCubicForm, disc: i128, n_max: usize, sieve: &SpfSieve) -> Vec<i32> {
    let mut lam = vec![0i32; n_max + 1];
    if n_max == 0 {
        return lam;
    }
    lam[1] = 1;
    // Splitting type per prime, cached by smallest prime factor.
    let mut ty: Vec<u8> = vec![255; n_max + 1];
    for n in 2..=n_max {
        let p = sieve.spf(n as u64) as usize;
        if ty[p] == 255 {
            ty[p] = splitting_type_fast(f, p as u64, disc).index() as u8;
        }
        let mut m = n;
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        let t = SplittingType::ALL[ty[p] as usize];
        lam[n] = lam[m] * lambda_pm(t, e) as i32;
    }
    lam
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::SplittingType as T;

    #[test]
    fn table_examples() {
        assert_eq!((lambda_pm(T::Split111, 1), lambda_pm(T::Split111, 2)), (2, 3));
        assert_eq!([1, 2, 3].map(|m| lambda_pm(T::Inert3, m)), [-1, 0, 1]);
        assert_eq!(2 * lambda_pm(T::Split111, 2) - lambda_pm(T::Split111, 1).pow(2), 2);
        assert_eq!(2 * lambda_pm(T::Inert3, 2) - lambda_pm(T::Inert3, 1).pow(2), -1);
    }

    #[test]
    fn theta_matches_log_derivative() {
        for t in SplittingType::ALL {
            let th = theta_from_poly(&denominator_poly(t), 12);
            for m in 1..=12u32 {
                assert_eq!(th[m as usize], theta_pm(t, m), "{t} m={m}");
                assert!(theta_pm(t, m).abs() <= 2);
            }
            assert_eq!(theta_pm(t, 1), lambda_pm(t, 1));
            assert_eq!(theta_pm(t, 2), 2 * lambda_pm(t, 2) - lambda_pm(t, 1).pow(2));
        }
    }

    #[test]
    fn e_coefficient_examples() {
        let p = 5u64;
        let a = e_coeffs_from_poly(&[1, -1], p, 6).values;
        assert_eq!(a[0], q(0, 1));
        assert_eq!(a[1], q(-1, 1));
        assert_eq!(a[2], q(4, 5));
        for m in 3..=6u32 {
            assert_eq!(a[m as usize], q(5, 5i64.pow(m - 1)) - q(1, 5i64.pow(m - 1)));
        }
        let b = e_coeffs_from_poly(&[1, -2, 1], p, 3).values;
        assert_eq!((b[0].clone(), b[1].clone(), b[2].clone()), (q(1, 1), q(-8, 5), q(1, 1) - q(4, 5) + q(3, 25)));
        let c = e_coeffs_from_poly(&[1, 1, 1], p, 3).values;
        assert_eq!((c[0].clone(), c[1].clone(), c[2].clone()), (q(1, 1), q(4, 5), q(4, 5)));
    }
}
