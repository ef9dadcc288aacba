//! Central values by the approximate functional equation.

use super::kernel::AfeKernel;
use super::special::KahanSum;
use crate::arith::SpfSieve;
use crate::artin::{correction_factors, lambda_table, UnbalancedData};
use crate::error::{Error, Result};
use crate::forms::BinaryCubicForm;
use crate::local::{is_maximal, maximalize, splitting_type_fast, SplittingType};

/// One central-value evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct LValue {
    pub field_disc: i64,
    pub l_half: f64,
    /// `S(f) = L(1/2)/2` for maximal input.
    pub s_f: f64,
    pub terms: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

fn sign_of(disc: i128) -> i32 {
    if disc > 0 {
        1
    } else {
        -1
    }
}

fn check_kernel(kernel: &AfeKernel, disc: i128) -> Result<()> {
    let want = crate::analytic::GammaFactor::for_sign(sign_of(disc));
    if kernel.gamma != want {
        return Err(Error::InvalidInput(format!("kernel {:?} does not match discriminant {disc}", kernel.gamma)));
    }
    Ok(())
}

/// `sum_n lambda_n n^{-1/2} V(scale * n)` with the compensated sum and the
/// propagated quadrature error.
pub fn weighted_lambda_sum(lam: &[i32], scale: f64, kernel: &AfeKernel) -> (f64, f64, usize) {
    let mut s = KahanSum::default();
    let mut err = 0.0;
    let mut used = 0;
    for (n, &l) in lam.iter().enumerate().skip(1) {
        let y = scale * n as f64;
        if y >= kernel.y_max {
            break;
        }
        used = n;
        if l == 0 {
            continue;
        }
        let w = l as f64 / (n as f64).sqrt();
        s.add(w * kernel.eval(y));
        err += w.abs() * (kernel.error_bound(y) + kernel.table_error);
    }
    (s.value(), err, used)
}

/// Number of coefficients needed at conductor scale `sqrt_d`.
pub fn terms_needed(kernel: &AfeKernel, scale: f64) -> usize {
    (kernel.y_max / scale).ceil() as usize + 1
}

/// `S(f) = sum_n lambda_n(f) n^{-1/2} V(n / sqrt|Delta(f)|)`.
pub fn s_of_f_with(f: &BinaryCubicForm, kernel: &AfeKernel, sieve: &SpfSieve) -> Result<(f64, f64, usize)> {
    let disc = f.disc();
    if disc == 0 {
        return Err(Error::InvalidInput(format!("{f} is degenerate")));
    }
    check_kernel(kernel, disc)?;
    let scale = 1.0 / (disc.unsigned_abs() as f64).sqrt();
    let n = terms_needed(kernel, scale);
    if sieve.limit() < n as u64 {
        return Err(Error::InvalidInput(format!("sieve covers {} < {n}", sieve.limit())));
    }
    let lam = lambda_table(f, disc, n, sieve);
    Ok(weighted_lambda_sum(&lam, scale, kernel))
}

pub fn s_of_f(f: &BinaryCubicForm, kernel: &AfeKernel) -> Result<f64> {
    let scale = 1.0 / (f.disc().unsigned_abs() as f64).sqrt();
    let sieve = SpfSieve::new(terms_needed(kernel, scale) as u64);
    Ok(s_of_f_with(f, kernel, &sieve)?.0)
}

/// L(1/2, rho_K) for the field of a maximal irreducible form.
pub fn afe_central_value_with(f: &BinaryCubicForm, kernel: &AfeKernel, sieve: &SpfSieve) -> Result<LValue> {
    if !is_maximal(f)? {
        return Err(Error::InvalidInput(format!("{f} is not maximal; use S(f)")));
    }
    if !crate::forms::is_irreducible(f)? {
        return Err(Error::InvalidInput(format!("{f} is reducible")));
    }
    let (s, err, terms) = s_of_f_with(f, kernel, sieve)?;
    let tail_bound = 2.0 * err;
    Ok(LValue {
        field_disc: f.disc() as i64,
        l_half: 2.0 * s,
        s_f: s,
        terms,
        tail_bound,
        converged: tail_bound < 1e-9,
    })
}

pub fn afe_central_value(f: &BinaryCubicForm, kernel: &AfeKernel) -> Result<LValue> {
    let scale = 1.0 / (f.disc().unsigned_abs() as f64).sqrt();
    let sieve = SpfSieve::new(terms_needed(kernel, scale) as u64);
    afe_central_value_with(f, kernel, &sieve)
}

/// E(1/2, f) = prod_{p | ind} E_p(p^{-1/2}).
pub fn e_half(f: &BinaryCubicForm) -> Result<f64> {
    let mut prod = 1.0;
    for e in correction_factors(f)? {
        let x = (e.p as f64).powf(-0.5);
        prod *= e.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64);
    }
    Ok(prod)
}

/// D(1/2, f) = L(1/2, rho_{K_f}) E(1/2, f).
pub fn d_half(f: &BinaryCubicForm, kernel: &AfeKernel) -> Result<f64> {
    let m = maximalize(f)?;
    let l = afe_central_value(&m.maximal_form, kernel)?;
    Ok(l.l_half * e_half(f)?)
}

/// Both sides of the unbalanced approximate functional equation.
#[derive(Clone, Debug, PartialEq)]
pub struct UnbalancedReport {
    pub s_f: f64,
    pub d_half: f64,
    pub correction: f64,
    pub residual: f64,
    pub tail_bound: f64,
    pub k_terms: usize,
    /// Number of k in the support whose shifted sum was not negligible.
    pub index: u64,
}

/// `S(f) - D(1/2,f) + sum_k (e_k sqrt k / rad) sum_n lambda_n n^{-1/2}
/// V(ind^2 k n / (rad^2 sqrt|Delta(f)|))`.
pub fn unbalanced_afe_residual(f: &BinaryCubicForm, kernel: &AfeKernel) -> Result<UnbalancedReport> {
    let disc = f.disc();
    check_kernel(kernel, disc)?;
    let sqrt_d = (disc.unsigned_abs() as f64).sqrt();
    let base = 1.0 / sqrt_d;
    let sieve = SpfSieve::new(terms_needed(kernel, base) as u64);
    let (s, s_err, _) = s_of_f_with(f, kernel, &sieve)?;
    let m = maximalize(f)?;
    let field = afe_central_value(&m.maximal_form, kernel)?;
    let e = e_half(f)?;
    let d = field.l_half * e;

    let mut correction = KahanSum::default();
    let mut err = s_err + field.tail_bound * e.abs();
    let mut k_terms = 0;
    if m.index > 1 {
        let ind = m.index as f64;
        let data = UnbalancedData::new(f, 64)?;
        let rad = data.rad_index as f64;
        let beta = ind * ind / (rad * rad * sqrt_d);
        let k_max = (kernel.y_max / beta).floor() as u64;
        let lam = lambda_table(f, disc, terms_needed(kernel, base), &sieve);
        for (k, ek) in data.support(k_max.max(1)) {
            let scale = beta * k as f64;
            if scale >= kernel.y_max {
                continue;
            }
            let (t, t_err, _) = weighted_lambda_sum(&lam, scale, kernel);
            let w = ek * (k as f64).sqrt() / rad;
            correction.add(w * t);
            err += w.abs() * t_err;
            k_terms += 1;
        }
    }
    let corr = correction.value();
    Ok(UnbalancedReport {
        s_f: s,
        d_half: d,
        correction: corr,
        residual: s - d + corr,
        tail_bound: err,
        k_terms,
        index: m.index,
    })
}

/// a_K(p^k) for the Dedekind zeta function by splitting type.
pub fn dedekind_coeff(t: SplittingType, k: u32) -> i64 {
    let k = k as i64;
    match t {
        SplittingType::Split111 => (k + 1) * (k + 2) / 2,
        SplittingType::Partial12 => k / 2 + 1,
        SplittingType::Inert3 => (k % 3 == 0) as i64,
        SplittingType::Ramified1_21 => k + 1,
        SplittingType::TotallyRamified1_3 => 1,
        SplittingType::Zero0 => panic!("no Dedekind coefficient at a zero form"),
    }
}

/// zeta_K(1/2) by a degree-three approximate functional equation, with
/// kernel built from `GammaFactor::dedekind_for_sign` and `KernelG::PoleCancel`.
pub fn dedekind_zeta_half(f: &BinaryCubicForm, kernel: &AfeKernel) -> Result<f64> {
    if !is_maximal(f)? {
        return Err(Error::InvalidInput(format!("{f} is not maximal")));
    }
    let disc = f.disc();
    let want = crate::analytic::GammaFactor::dedekind_for_sign(sign_of(disc));
    if kernel.gamma != want {
        return Err(Error::InvalidInput("kernel is not a Dedekind kernel for this sign".into()));
    }
    let scale = 1.0 / (disc.unsigned_abs() as f64).sqrt();
    let n_max = terms_needed(kernel, scale);
    let sieve = SpfSieve::new(n_max as u64);
    let mut a = vec![0i64; n_max + 1];
    a[1] = 1;
    let mut ty: Vec<Option<SplittingType>> = vec![None; n_max + 1];
    for n in 2..=n_max {
        let p = sieve.spf(n as u64) as usize;
        let t = *ty[p].get_or_insert_with(|| splitting_type_fast(f, p as u64, disc));
        let (mut m, mut e) = (n, 0u32);
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        a[n] = a[m] * dedekind_coeff(t, e);
    }
    let mut s = KahanSum::default();
    for (n, &c) in a.iter().enumerate().skip(1) {
        if c != 0 {
            s.add(c as f64 / (n as f64).sqrt() * kernel.eval(scale * n as f64));
        }
    }
    Ok(2.0 * s.value())
}
