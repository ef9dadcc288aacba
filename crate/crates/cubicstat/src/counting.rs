//! Smoothed orbit sums with congruence weights, the residue predictions
//! they are compared with, the sieve to maximal forms, the cubic
//! Polya-Vinogradov analogue, and suborder counts.
//!
//! Sums run directly over enumerated orbits; predictions are computed
//! separately from local densities.

use crate::analytic::special::{gamma_real, zeta, KahanSum};
use crate::analytic::SmoothWeight;
use crate::arith::{factor, mobius, primes_up_to, SpfSieve};
use crate::error::{Error, Result};
use crate::forms::{cached_orbits, canonical, BinaryCubicForm, OrbitRecord};
use crate::fourier::{maximal_densities, orbit_sizes, InvariantFunction, Q};
use crate::local::{is_maximal_with, maximalize, splitting_type_fast, subring, P1Point, SplittingType};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

/// GL2(Z)-orbit sums weighted by 1/|Stab| are half of what the residue
/// constants below predict: those constants count each orbit with weight
/// 2/|Stab|.
pub const ORBIT_NORMALIZATION: f64 = 0.5;

/// Reported bound for |remainder|/p in the Polya-Vinogradov check.
pub const PV_RATIO_BOUND: f64 = 50.0;

/// Residues of the Shintani zeta functions at 1 and 5/6.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidueConstants {
    pub sign: i32,
    pub alpha: f64,
    pub beta: f64,
    /// Secondary residue; negative since zeta(1/3) < 0.
    pub gamma_s: f64,
}

impl ResidueConstants {
    pub fn new(sign: i32) -> ResidueConstants {
        let pi2 = PI * PI;
        let g = gamma_real(2.0 / 3.0).powi(3);
        let z = zeta(1.0 / 3.0);
        if sign > 0 {
            ResidueConstants { sign, alpha: pi2 / 36.0, beta: pi2 / 12.0, gamma_s: z * 2.0 * pi2 / (9.0 * g) }
        } else {
            ResidueConstants {
                sign,
                alpha: pi2 / 12.0,
                beta: pi2 / 12.0,
                gamma_s: z * 2.0 * 3f64.sqrt() * pi2 / (9.0 * g),
            }
        }
    }
}

fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// b_p by splitting type.
pub fn b_p(t: SplittingType, p: u64) -> Q {
    let pi = p as i64;
    match t {
        SplittingType::Split111 => crate::fourier::q(3, 1),
        SplittingType::Partial12 | SplittingType::Zero0 => Q::one(),
        SplittingType::Inert3 => crate::fourier::q(0, 1),
        SplittingType::Ramified1_21 => crate::fourier::q(pi + 2, pi + 1),
        SplittingType::TotallyRamified1_3 => crate::fourier::q(1, pi + 1),
    }
}

/// The tabulated value (1 - p^-2) c_p.
pub fn c_p_scaled(t: SplittingType, p: u64) -> f64 {
    let p = p as f64;
    let r = p.powf(-1.0 / 3.0);
    match t {
        SplittingType::Split111 => (1.0 - r * r) * (1.0 + r).powi(2),
        SplittingType::Partial12 | SplittingType::TotallyRamified1_3 => 1.0 - r.powi(4),
        SplittingType::Inert3 => (1.0 - r) * (1.0 + 1.0 / p),
        SplittingType::Ramified1_21 => (1.0 + r) * (1.0 - 1.0 / p),
        SplittingType::Zero0 => (1.0 - 1.0 / (p * p)) * p.powf(2.0 / 3.0),
    }
}

pub fn c_p(t: SplittingType, p: u64) -> f64 {
    let pf = p as f64;
    c_p_scaled(t, p) / (1.0 - 1.0 / (pf * pf))
}

/// One row of the density table.
#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub splitting_type: String,
    pub b_p: String,
    pub c_p_scaled: f64,
}

pub fn density_table(p: u64) -> Vec<DensityRow> {
    SplittingType::ALL
        .iter()
        .rev()
        .map(|&t| DensityRow { splitting_type: t.to_string(), b_p: b_p(t, p).to_string(), c_p_scaled: c_p_scaled(t, p) })
        .collect()
}

/// Orbit densities |O_sigma| / p^4 on V(F_p).
pub fn orbit_density(p: u64) -> [Q; 6] {
    if p < 10_000 {
        let p4 = (p as i64).pow(4);
        return orbit_sizes(p).map(|s| crate::fourier::q(s as i64, p4));
    }
    let z = |n: u64| Q::from_integer(n.into());
    let pi = z(p);
    let p4 = &pi * &pi * &pi * &pi;
    let (pm, pp) = (z(p - 1), z(p + 1));
    let big = &pi * &pp * &pm * &pm;
    [Q::one() / &p4, &pp * &pm / &p4, &pi * &pp * &pm / &p4, &big / (z(6) * &p4), &big / (z(2) * &p4), &big / (z(3) * &p4)]
}

/// A_p(phi) = p^-4 sum over V(F_p).
pub fn a_local(phi: &InvariantFunction, p: u64) -> Q {
    orbit_density(p).iter().zip(&phi.coeffs).map(|(d, v)| d * v).sum()
}

pub fn b_local(phi: &InvariantFunction, p: u64) -> Q {
    let d = orbit_density(p);
    SplittingType::ALL.iter().map(|&t| &d[t.index()] * b_p(t, p) * &phi.coeffs[t.index()]).sum()
}

pub fn c_local(phi: &InvariantFunction, p: u64) -> f64 {
    let d = orbit_density(p);
    SplittingType::ALL.iter().map(|&t| qf(&d[t.index()]) * c_p(t, p) * qf(&phi.coeffs[t.index()])).sum()
}

/// Integral of phi over the forms maximal at p.
pub fn a_max_local(phi: &InvariantFunction, p: u64) -> Q {
    maximal_densities(p).mean(phi)
}

/// Secondary-term mass of the forms maximal at p of each type.
///
/// Unramified types are maximal exactly when their reduction is, so these
/// agree with orbit density times c_p. On ramified types maximality is a
/// condition mod p^2 and c_p is not a function of the reduction; there the
/// masses are (1-p^-1)(1-p^-1/3) (1+p^-1/3)^2 / p and
/// (1-p^-1)(1-p^-1/3) (1+p^-1/3) / p^2, which make the total
/// (1-p^-2)(1-p^-5/3).
pub fn c_max_mass(t: SplittingType, p: u64) -> f64 {
    let pf = p as f64;
    let r = pf.powf(-1.0 / 3.0);
    let base = (1.0 - 1.0 / pf) * (1.0 - r);
    match t {
        SplittingType::Zero0 => 0.0,
        SplittingType::Ramified1_21 => base * (1.0 + r).powi(2) / pf,
        SplittingType::TotallyRamified1_3 => base * (1.0 + r) / (pf * pf),
        SplittingType::Split111 => base * (1.0 + r).powi(3) / 6.0,
        SplittingType::Partial12 => base * (1.0 + r) * (1.0 + r * r) / 2.0,
        SplittingType::Inert3 => base * (1.0 + r.powi(3)) / 3.0,
    }
}

pub fn c_max_local(phi: &InvariantFunction, p: u64) -> f64 {
    SplittingType::ALL.iter().map(|&t| c_max_mass(t, p) * qf(&phi.coeffs[t.index()])).sum()
}

/// The lift that integrates the tabulated mod-p value of c_p over the
/// maximal locus; kept for comparison with [`c_max_local`].
pub fn c_max_local_tabulated(phi: &InvariantFunction, p: u64) -> f64 {
    let mu = maximal_densities(p).mu;
    SplittingType::ALL.iter().map(|&t| qf(&mu[t.index()]) * c_p(t, p) * qf(&phi.coeffs[t.index()])).sum()
}

/// Integral over the forms nonmaximal at p.
pub fn a_nonmax_local(phi: &InvariantFunction, p: u64) -> Q {
    a_local(phi, p) - a_max_local(phi, p)
}

pub fn c_nonmax_local(phi: &InvariantFunction, p: u64) -> f64 {
    c_local(phi, p) - c_max_local(phi, p)
}

/// Product of per-prime invariant functions; constant one elsewhere.
#[derive(Clone, Debug, Default)]
pub struct CongruenceWeight {
    factors: Vec<(u64, InvariantFunction, [f64; 6])>,
}

impl CongruenceWeight {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: u64, phi: InvariantFunction) -> Self {
        let vals = phi.coeffs.clone().map(|c| qf(&c));
        self.factors.retain(|f| f.0 != p);
        self.factors.push((p, phi, vals));
        self.factors.sort_by_key(|f| f.0);
        self
    }

    /// Indicator of `sigma_p(f)` in `allowed`.
    pub fn allowed_types(allowed: &[SplittingType]) -> InvariantFunction {
        let mut v = [0i64; 6];
        for t in allowed {
            v[t.index()] = 1;
        }
        InvariantFunction::from_ints(v)
    }

    pub fn primes(&self) -> Vec<u64> {
        self.factors.iter().map(|f| f.0).collect()
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, &InvariantFunction)> {
        self.factors.iter().map(|f| (f.0, &f.1))
    }

    pub fn eval(&self, f: &BinaryCubicForm, disc: i128) -> f64 {
        let mut v = 1.0;
        for (p, _, vals) in &self.factors {
            v *= vals[splitting_type_fast(f, *p, disc).index()];
            if v == 0.0 {
                break;
            }
        }
        v
    }
}

/// Residue functionals of a weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Functionals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub a_max: f64,
    pub c_max: f64,
}

/// Full products. At primes outside the weight, the local maximal factors
/// are (1-p^-2)(1-p^-3) and (1-p^-2)(1-p^-5/3), whose products are
/// 1/(zeta(2) zeta(3)) and 1/(zeta(2) zeta(5/3)).
pub fn functionals(w: &CongruenceWeight) -> Functionals {
    let mut a = 1.0;
    let mut b = 1.0;
    let mut c = 1.0;
    let mut a_max = 1.0 / (zeta(2.0) * zeta(3.0));
    let mut c_max = 1.0 / (zeta(2.0) * zeta(5.0 / 3.0));
    for (p, phi) in w.factors() {
        let pf = p as f64;
        a *= qf(&a_local(phi, p));
        b *= qf(&b_local(phi, p));
        c *= c_local(phi, p);
        a_max *= qf(&a_max_local(phi, p)) / ((1.0 - pf.powi(-2)) * (1.0 - pf.powi(-3)));
        c_max *= c_max_local(phi, p) / ((1.0 - pf.powi(-2)) * (1.0 - pf.powf(-5.0 / 3.0)));
    }
    Functionals { a, b, c, a_max, c_max }
}

/// A^max and C^max by a product truncated at p <= cut, with the tail
/// estimated from the factor shapes 1 - O(p^-2) and 1 - O(p^-5/3).
pub fn max_functionals_truncated(w: &CongruenceWeight, cut: u64) -> (f64, f64, f64) {
    let one = InvariantFunction::from_ints([1; 6]);
    let mut a = 1.0;
    let mut c = 1.0;
    let mut tail = 0.0;
    for p in primes_up_to(cut) {
        let phi = w.factors().find(|f| f.0 == p).map(|f| f.1.clone()).unwrap_or_else(|| one.clone());
        a *= qf(&a_max_local(&phi, p));
        c *= c_max_local(&phi, p);
    }
    // sum_{p > cut} 2 p^{-5/3}
    let cf = cut as f64;
    tail += 2.0 * 1.5 * cf.powf(-2.0 / 3.0) / cf.ln();
    (a, c, tail)
}

/// A predicted count in the normalization of the residue constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub main: f64,
    pub secondary: f64,
}

impl Prediction {
    pub fn total(&self) -> f64 {
        self.main + self.secondary
    }

    /// The same prediction for 1/|Stab|-weighted GL2-orbit sums.
    pub fn gl2(&self) -> Prediction {
        Prediction { main: ORBIT_NORMALIZATION * self.main, secondary: ORBIT_NORMALIZATION * self.secondary }
    }
}

/// (alpha A + beta B) Psi~(1) X and gamma_S C Psi~(5/6) X^{5/6}.
pub fn predicted_count(w: &CongruenceWeight, psi: &SmoothWeight, x: f64, sign: i32) -> Prediction {
    let r = ResidueConstants::new(sign);
    let f = functionals(w);
    Prediction {
        main: (r.alpha * f.a + r.beta * f.b) * psi.mellin_real(1.0) * x,
        secondary: r.gamma_s * f.c * psi.mellin_real(5.0 / 6.0) * x.powf(5.0 / 6.0),
    }
}

/// alpha A^max Psi~(1) X and gamma_S C^max Psi~(5/6) X^{5/6}, for sums over
/// irreducible maximal forms (cubic fields).
pub fn predicted_field_count(w: &CongruenceWeight, psi: &SmoothWeight, x: f64, sign: i32) -> Prediction {
    let r = ResidueConstants::new(sign);
    let f = functionals(w);
    Prediction {
        main: r.alpha * f.a_max * psi.mellin_real(1.0) * x,
        secondary: r.gamma_s * f.c_max * psi.mellin_real(5.0 / 6.0) * x.powf(5.0 / 6.0),
    }
}

/// Enumerated orbits of one sign with per-orbit maximality.
#[derive(Clone, Debug)]
pub struct OrbitSet {
    pub sign: i32,
    /// All orbits with |Delta| < x_max.
    pub x_max: u64,
    pub records: Vec<OrbitRecord>,
    pub maximal: Vec<bool>,
}

impl OrbitSet {
    pub fn new(sign: i32, x_max: u64, records: Vec<OrbitRecord>) -> OrbitSet {
        let sieve = SpfSieve::new(x_max.max(2));
        let maximal = records.iter().map(|r| is_maximal_with(&r.form, &sieve.factor(r.disc.unsigned_abs()))).collect();
        OrbitSet { sign, x_max, records, maximal }
    }

    pub fn load(dir: &Path, sign: i32, x_max: u64) -> Result<OrbitSet> {
        Ok(OrbitSet::new(sign, x_max, cached_orbits(dir, sign, x_max)?))
    }

    fn check_range(&self, psi: &SmoothWeight, x: f64) -> Result<()> {
        if psi.support.1 * x > self.x_max as f64 {
            return Err(Error::PartialData(format!(
                "orbits enumerated to {} but the weight at X = {x} needs {}",
                self.x_max,
                psi.support.1 * x
            )));
        }
        Ok(())
    }

    /// Orbits in the support of Psi(|Delta|/X), with the Psi value.
    fn window<'a>(&'a self, psi: &'a SmoothWeight, x: f64) -> impl Iterator<Item = (usize, &'a OrbitRecord, f64)> + 'a {
        let lo = psi.support.0 * x;
        let hi = psi.support.1 * x;
        self.records.iter().enumerate().filter_map(move |(i, r)| {
            let d = r.disc.unsigned_abs() as f64;
            if d <= lo || d >= hi {
                None
            } else {
                Some((i, r, psi.eval(d / x)))
            }
        })
    }
}

/// sum_f w(f) Psi(|Delta|/X) / |Stab f| over all orbits of the set's sign.
pub fn smoothed_count(set: &OrbitSet, w: &CongruenceWeight, psi: &SmoothWeight, x: f64) -> Result<f64> {
    set.check_range(psi, x)?;
    let mut s = KahanSum::default();
    for (_, r, ps) in set.window(psi, x) {
        let v = w.eval(&r.form, r.disc as i128);
        if v != 0.0 {
            s.add(v * ps / r.stab as f64);
        }
    }
    Ok(s.value())
}

/// The same sum restricted to maximal (and, if asked, irreducible) forms.
pub fn smoothed_max_count(set: &OrbitSet, w: &CongruenceWeight, psi: &SmoothWeight, x: f64, irreducible_only: bool) -> Result<f64> {
    set.check_range(psi, x)?;
    let mut s = KahanSum::default();
    for (i, r, ps) in set.window(psi, x) {
        if !set.maximal[i] || (irreducible_only && !r.irreducible) {
            continue;
        }
        let v = w.eval(&r.form, r.disc as i128);
        if v != 0.0 {
            s.add(v * ps / r.stab as f64);
        }
    }
    Ok(s.value())
}

/// Result of the Polya-Vinogradov check at one prime power.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PvReport {
    pub p: u64,
    pub k: u32,
    pub sign: i32,
    pub x: f64,
    pub lhs: f64,
    pub main: f64,
    pub secondary: f64,
    pub remainder: f64,
    /// |remainder| / p for k = 1, |remainder| / (k p^2) for k >= 2.
    pub ratio: f64,
}

pub fn polya_vinogradov_check(set: &OrbitSet, p: u64, k: u32, psi: &SmoothWeight, x: f64) -> Result<PvReport> {
    let lam = InvariantFunction::lambda(k);
    let w = CongruenceWeight::trivial().with(p, lam);
    let lhs = smoothed_count(set, &w, psi, x)?;
    let pred = predicted_count(&w, psi, x, set.sign).gl2();
    let remainder = lhs - pred.total();
    let pf = p as f64;
    let ratio = if k == 1 { remainder.abs() / pf } else { remainder.abs() / (k as f64 * pf * pf) };
    Ok(PvReport { p, k, sign: set.sign, x, lhs, main: pred.main, secondary: pred.secondary, remainder, ratio })
}

/// One squarefree q of the inclusion-exclusion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveRow {
    pub q: u64,
    pub mu: i64,
    /// |W_q intersect {|Delta| < x_max}| as orbits.
    pub orbits: u64,
    /// Weighted smoothed sum over W_q.
    pub weighted: f64,
    /// 6 * sum over W_q of w/|Stab| with indicator cutoff, for the exact identity.
    pub exact_times6: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveReport {
    pub sign: i32,
    pub x: f64,
    pub rows: Vec<SieveRow>,
    pub inclusion_exclusion: f64,
    pub direct: f64,
    pub exact_inclusion_exclusion: i64,
    pub exact_direct: i64,
    /// max over q > 1 of orbits * q^2 / x_max.
    pub davenport_constant: f64,
}

impl SieveReport {
    pub fn exact(&self) -> bool {
        self.exact_inclusion_exclusion == self.exact_direct
    }
}

/// Primes where `f` is nonmaximal.
fn nonmaximal_primes(form: &BinaryCubicForm, disc: u64, sieve: &SpfSieve) -> Vec<u64> {
    sieve
        .factor(disc)
        .into_iter()
        .filter(|&(p, e)| e >= 2 && !crate::local::is_maximal_at(form, p))
        .map(|(p, _)| p)
        .collect()
}

/// Inclusion-exclusion over squarefree q <= q_cut of sums over W_q, the
/// forms nonmaximal at every p | q. Integer-weighted sums use the indicator
/// cutoff |Delta| < x and require a weight with integer values.
pub fn sieve_to_maximal(set: &OrbitSet, w: &CongruenceWeight, psi: &SmoothWeight, x: f64, q_cut: u64) -> Result<SieveReport> {
    set.check_range(psi, x)?;
    let sieve = SpfSieve::new(set.x_max.max(2));
    let mut rows: BTreeMap<u64, SieveRow> = BTreeMap::new();
    let mut direct = KahanSum::default();
    let mut exact_direct = 0i64;
    for (i, r) in set.records.iter().enumerate() {
        let d = r.disc.unsigned_abs();
        let wv = w.eval(&r.form, r.disc as i128);
        let ps = {
            let t = d as f64 / x;
            if t > psi.support.0 && t < psi.support.1 {
                psi.eval(t)
            } else {
                0.0
            }
        };
        let smooth = wv * ps / r.stab as f64;
        let exact = if (d as f64) < x { (wv.round() as i64) * (6 / r.stab as i64) } else { 0 };
        if set.maximal[i] {
            direct.add(smooth);
            exact_direct += exact;
        }
        let bad = if set.maximal[i] { Vec::new() } else { nonmaximal_primes(&r.form, d, &sieve) };
        // Every squarefree q built from the nonmaximal primes.
        let n = bad.len();
        for mask in 0u32..(1 << n) {
            let q: u64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| bad[j]).product();
            if q > q_cut {
                continue;
            }
            let row = rows.entry(q).or_insert(SieveRow { q, mu: mobius(q), orbits: 0, weighted: 0.0, exact_times6: 0 });
            row.orbits += 1;
            row.weighted += smooth;
            row.exact_times6 += exact;
        }
    }
    let mut ie = KahanSum::default();
    let mut exact_ie = 0i64;
    let mut dav: f64 = 0.0;
    for row in rows.values() {
        ie.add(row.mu as f64 * row.weighted);
        exact_ie += row.mu * row.exact_times6;
        if row.q > 1 {
            dav = dav.max(row.orbits as f64 * (row.q as f64).powi(2) / set.x_max as f64);
        }
    }
    Ok(SieveReport {
        sign: set.sign,
        x,
        rows: rows.into_values().collect(),
        inclusion_exclusion: ie.value(),
        direct: direct.value(),
        exact_inclusion_exclusion: exact_ie,
        exact_direct,
        davenport_constant: dav,
    })
}

/// Both sides of the congruence-weighted switching identity with a sharp
/// cutoff |Delta| < x, as exact rationals scaled by 6.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSwitchingReport {
    pub q: u64,
    /// Primes of (q, n) where the weight is simple and vanishes at (0).
    pub d: u64,
    /// The remaining primes of (q, n).
    pub e: u64,
    pub lhs_times6: Q,
    pub rhs_times6: Q,
}

impl WeightedSwitchingReport {
    pub fn equal(&self) -> bool {
        self.lhs_times6 == self.rhs_times6
    }
}

/// Sum over forms nonmaximal at every p | q of phi(f)/|Stab f|, against
/// the switched sum over forms nonmaximal at every p | e:
/// phi_d(1^2 1) sum_{kl | q/de} mu(l) sum_g omega_d^(1)(g) omega_kl(g) phi_m(g)/|Stab g|
/// with g counted when (q/e)^4 |Delta(g)| < x d^2 k^2. Only the primes of
/// q/e are switched, so e enters through the sum over g and not through
/// the rescaling of the discriminant.
pub fn weighted_switching_check(q: u64, w: &CongruenceWeight, x: u64, orbits: &[OrbitRecord]) -> Result<WeightedSwitchingReport> {
    if mobius(q) == 0 {
        return Err(Error::InvalidInput(format!("q = {q} is not squarefree")));
    }
    let zero_ty = SplittingType::Zero0;
    let mut d = 1u64;
    let mut e = 1u64;
    for (p, phi) in w.factors() {
        if q % p != 0 {
            continue;
        }
        let simple = phi.value(SplittingType::TotallyRamified1_3) == phi.value(zero_ty);
        if simple && phi.value(zero_ty).is_zero() {
            d *= p;
        } else {
            e *= p;
        }
    }
    let weight_at = |f: &BinaryCubicForm, skip: u64| -> Q {
        let mut v = Q::one();
        for (p, phi) in w.factors() {
            if skip % p != 0 {
                v *= phi.value(crate::local::splitting_type(f, p).0).clone();
            }
        }
        v
    };
    let nonmax_all = |f: &BinaryCubicForm, m: u64| factor(m).iter().all(|&(p, _)| !crate::local::is_maximal_at(f, p));
    let stab6 = |stab: u32| Q::from_integer((6 / stab as i64).into());

    let mut lhs = Q::zero();
    for r in orbits {
        if r.disc.unsigned_abs() < x && nonmax_all(&r.form, q) {
            lhs += weight_at(&r.form, 1) * stab6(r.stab);
        }
    }

    let mut phi_d = Q::one();
    for (p, phi) in w.factors() {
        if d % p == 0 {
            phi_d *= phi.value(SplittingType::Ramified1_21).clone();
        }
    }
    let qe4 = ((q / e) as u128).pow(4);
    let rest = q / (d * e);
    let mut rhs = Q::zero();
    for k in crate::arith::divisors(rest) {
        for l in crate::arith::divisors(rest / k) {
            let mu = mobius(l);
            if mu == 0 {
                continue;
            }
            let bound = (x as u128) * (d as u128 * k as u128).pow(2);
            for r in orbits {
                if qe4 * (r.disc.unsigned_abs() as u128) >= bound || !nonmax_all(&r.form, e) {
                    continue;
                }
                let roots = crate::local::omega_simple(&r.form, d) * crate::local::omega(&r.form, k * l);
                if roots == 0 {
                    continue;
                }
                let v = weight_at(&r.form, d) * stab6(r.stab) * Q::from_integer(((mu * roots as i64)).into());
                rhs += v;
            }
        }
    }
    Ok(WeightedSwitchingReport { q, d, e, lhs_times6: lhs, rhs_times6: phi_d * rhs })
}

/// Irreducible orbits of exact index b with |Delta| < x_max, and the
/// ratio count * m1^{5/3} q1^2 / x_max, where b = m1 q1 with m1 powerful
/// and q1 squarefree coprime to m1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexRow {
    pub index: u64,
    pub orbits: u64,
    pub scaled: f64,
}

pub fn index_uniformity(set: &OrbitSet, b_max: u64) -> Result<Vec<IndexRow>> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for (i, r) in set.records.iter().enumerate() {
        if !r.irreducible || set.maximal[i] {
            continue;
        }
        let b = maximalize(&r.form)?.index;
        if b <= b_max {
            *counts.entry(b).or_default() += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(b, n)| {
            let (mut m1, mut q1) = (1u64, 1u64);
            for (p, e) in factor(b) {
                if e == 1 {
                    q1 *= p;
                } else {
                    m1 *= p.pow(e);
                }
            }
            let scaled = n as f64 * (m1 as f64).powf(5.0 / 3.0) * (q1 as f64).powi(2) / set.x_max as f64;
            IndexRow { index: b, orbits: n, scaled }
        })
        .collect())
}

/// Truncated power series product in one variable.
fn series_mul(a: &[i64], b: &[i64], n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n + 1];
    for (i, &x) in a.iter().enumerate().take(n + 1) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// 1/(1 - c u^d) to degree n.
fn geometric(c: i64, d: usize, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n + 1];
    let mut v = 1i64;
    let mut k = 0;
    while k <= n {
        out[k] = v;
        v *= c;
        k += d;
    }
    out
}

/// Local series of zeta_K(s)/zeta_K(2s) zeta(2s) zeta(3s-1) in u = p^-s. The
/// zeta(2s) factor carries the orders Z + p^k O_K; with zeta(3s) in its place
/// the index-p^2 coefficient at an inert prime would vanish.
pub fn suborder_local_series(t: SplittingType, p: u64, n: usize) -> Vec<i64> {
    let zk: Vec<i64> = (0..=n as u32).map(|k| crate::analytic::afe::dedekind_coeff(t, k)).collect();
    // 1/zeta_K,p(2s): the inverse Euler polynomial at u^2.
    let inv: &[i64] = match t {
        SplittingType::Split111 => &[1, -3, 3, -1],
        SplittingType::Partial12 => &[1, -1, -1, 1],
        SplittingType::Inert3 => &[1, 0, 0, -1],
        SplittingType::Ramified1_21 => &[1, -2, 1],
        SplittingType::TotallyRamified1_3 => &[1, -1],
        SplittingType::Zero0 => &[1],
    };
    let mut inv2 = vec![0i64; n + 1];
    for (i, &c) in inv.iter().enumerate() {
        if 2 * i <= n {
            inv2[2 * i] = c;
        }
    }
    let s = series_mul(&zk, &inv2, n);
    let s = series_mul(&s, &geometric(1, 2, n), n);
    series_mul(&s, &geometric(p as i64, 3, n), n)
}

/// Coefficients a(1..=m) of the suborder zeta function of the field of a
/// maximal form (index 0 unused).
pub fn suborder_zeta_coeffs(f: &BinaryCubicForm, m: usize) -> Result<Vec<i64>> {
    let disc = f.discriminant()?;
    let mut a = vec![0i64; m + 1];
    if m == 0 {
        return Ok(a);
    }
    a[1] = 1;
    let sieve = SpfSieve::new(m as u64);
    let mut local: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
    for n in 2..=m {
        let p = sieve.spf(n as u64);
        let (mut r, mut e) = (n as u64, 0usize);
        while r % p == 0 {
            r /= p;
            e += 1;
        }
        let ser = local.entry(p).or_insert_with(|| {
            let t = splitting_type_fast(f, p, disc);
            let deg = (m as f64).log(p as f64).floor() as usize + 1;
            suborder_local_series(t, p, deg)
        });
        a[n] = a[r as usize] * ser[e];
    }
    Ok(a)
}

/// N_K(Z): suborders of index at most Z, including O_K.
pub fn suborder_count(f: &BinaryCubicForm, z: u64) -> Result<i64> {
    Ok(suborder_zeta_coeffs(f, z as usize)?.iter().sum())
}

/// Suborders of index <= z found by walking down from `f`: each order is
/// reached from an overring by an index-p step at a root, or as Z + pR.
/// Forms are deduplicated by GL2 class, so the count equals the number of
/// suborders when K has no automorphisms.
pub fn suborder_tree_count(f: &BinaryCubicForm, z: u64) -> Result<u64> {
    let mut seen: BTreeSet<BinaryCubicForm> = BTreeSet::new();
    let mut frontier = vec![(canonical(f)?, 1u64)];
    seen.insert(frontier[0].0);
    let primes = primes_up_to(z);
    while let Some((g, ind)) = frontier.pop() {
        for &p in &primes {
            if ind * p > z {
                break;
            }
            for al in P1Point::all(p) {
                if let Ok(h) = subring(&g, p, al) {
                    let c = canonical(&h)?;
                    if seen.insert(c) {
                        frontier.push((c, ind * p));
                    }
                }
            }
            if ind * p * p <= z {
                let c = canonical(&g.scale(p as i64)?)?;
                if seen.insert(c) {
                    frontier.push((c, ind * p * p));
                }
            }
        }
    }
    Ok(seen.len() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_signs() {
        for s in [1, -1] {
            let r = ResidueConstants::new(s);
            assert!(r.alpha > 0.0 && r.beta > 0.0 && r.gamma_s < 0.0);
        }
    }

    #[test]
    fn local_functional_values() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let pf = p as f64;
            let one = InvariantFunction::from_ints([1; 6]);
            assert!((c_local(&one, p) - 1.0).abs() < 1e-13);
            assert_eq!(a_local(&one, p), Q::one());
            assert_eq!(b_local(&one, p), Q::one());
            let lam = InvariantFunction::lambda(1);
            let (pi, p3) = (p as i64, (p as i64).pow(3));
            assert_eq!(a_local(&lam, p), crate::fourier::q(pi * pi - 1, p3));
            assert_eq!(b_local(&lam, p), crate::fourier::q(p3 - 1, p3));
            let r = pf.powf(-1.0 / 3.0);
            let want = (1.0 - 1.0 / pf) * (1.0 - r) * ((1.0 + r).powi(3) - (1.0 + 1.0 / pf)) / 3.0
                + (1.0 - 1.0 / pf) * (1.0 + r) / pf;
            assert!((c_local(&lam, p) - want).abs() < 1e-13, "p={p}");
            assert!((c_max_local(&one, p) - (1.0 - pf.powi(-2)) * (1.0 - pf.powf(-5.0 / 3.0))).abs() < 1e-13);
            assert_eq!(a_max_local(&lam, p), maximal_densities(p).u_lambda_p);
        }
    }

    #[test]
    fn maximal_masses_match_table_on_unramified_types() {
        for p in [2u64, 3, 5, 7, 101] {
            for t in [SplittingType::Split111, SplittingType::Partial12, SplittingType::Inert3] {
                let table = qf(&orbit_density(p)[t.index()]) * c_p(t, p);
                assert!((c_max_mass(t, p) - table).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn truncated_products_agree_with_closed_form() {
        let w = CongruenceWeight::trivial().with(5, CongruenceWeight::allowed_types(&[SplittingType::Inert3]));
        let f = functionals(&w);
        let (a, c, tail) = max_functionals_truncated(&w, 200_000);
        assert!((a - f.a_max).abs() < 1e-6);
        assert!((c - f.c_max).abs() < tail);
    }

    #[test]
    fn suborder_series_low_terms() {
        assert_eq!(suborder_local_series(SplittingType::Split111, 5, 3)[1], 3);
        assert_eq!(suborder_local_series(SplittingType::Partial12, 5, 3)[1], 1);
        assert_eq!(suborder_local_series(SplittingType::Inert3, 5, 3)[1], 0);
    }
}
