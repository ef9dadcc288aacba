//! Family statistics over cubic fields with prescribed local behaviour:
//! local averages t_Sigma, the constants C_Sigma and C'_Sigma of the first
//! moment, the smoothed first moment itself, the explicit-formula 1-level
//! density, and non-vanishing reports.
//!
//! Field sums here count each field once. The constants C_Sigma, C'_Sigma
//! carry the residue normalization of [`crate::counting`], so a field sum
//! is compared with `ORBIT_NORMALIZATION` times the prediction.

use crate::analytic::special::{prime_zeta, zeta, KahanSum, EULER_GAMMA};
use crate::analytic::{afe_central_value_with, g_function, h_mellin, AfeKernel, GammaFactor, SmoothWeight};
use crate::arith::{is_prime, primes_up_to, SpfSieve};
use crate::artin::{denominator_poly, lambda_pm, theta_pm};
use crate::counting::{c_max_local, functionals, CongruenceWeight, OrbitSet, ResidueConstants, ORBIT_NORMALIZATION};
use crate::error::{Error, Result};
use crate::forms::BinaryCubicForm;
use crate::fourier::{maximal_densities, InvariantFunction, Q};
use crate::local::{splitting_type_fast, SplittingType};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Splitting types of maximal forms, in the order reported.
pub const MAXIMAL_TYPES: [SplittingType; 5] = [
    SplittingType::Split111,
    SplittingType::Partial12,
    SplittingType::Inert3,
    SplittingType::Ramified1_21,
    SplittingType::TotallyRamified1_3,
];

/// Inert prime of the default family. It lies beyond every prime power the
/// default density test function sees at X <= 10^6, so the condition does
/// not enter the explicit-formula sums directly.
pub const DEFAULT_INERT_PRIME: u64 = 127;

/// Default prime cutoff for the Euler products of C_Sigma.
pub const DEFAULT_PRIME_CUT: u64 = 1_000_000;

/// Largest admissible support radius of a density test function.
pub const MAX_DENSITY_SUPPORT: f64 = 0.4;

/// A finite set of local conditions: the sign at infinity and, at finitely
/// many primes, the allowed splitting types of the field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSpec {
    pub sign: i32,
    pub conditions: BTreeMap<u64, Vec<SplittingType>>,
    /// Operations that need an inert prime reject specs without one.
    pub require_inert: bool,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    sign: i32,
    #[serde(default)]
    primes: Vec<PrimeJson>,
    #[serde(default = "default_true")]
    require_inert: bool,
}

#[derive(Serialize, Deserialize)]
struct PrimeJson {
    p: u64,
    types: Vec<String>,
}

fn default_true() -> bool {
    true
}

fn parse_sign(s: &str) -> Result<i32> {
    match s.trim() {
        "+" | "+1" | "1" => Ok(1),
        "-" | "-1" => Ok(-1),
        other => Err(Error::Config(format!("sign must be +1 or -1, got '{other}'"))),
    }
}

impl LocalSpec {
    pub fn new(sign: i32) -> Result<LocalSpec> {
        if sign != 1 && sign != -1 {
            return Err(Error::Config(format!("sign must be +1 or -1, got {sign}")));
        }
        Ok(LocalSpec { sign, conditions: BTreeMap::new(), require_inert: true })
    }

    /// Complex cubic fields inert at [`DEFAULT_INERT_PRIME`].
    pub fn default_family() -> LocalSpec {
        LocalSpec::new(-1).unwrap().with(DEFAULT_INERT_PRIME, &[SplittingType::Inert3]).unwrap()
    }

    pub fn with(mut self, p: u64, types: &[SplittingType]) -> Result<LocalSpec> {
        if !is_prime(p) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        let mut v: Vec<SplittingType> = Vec::new();
        for &t in types {
            if t == SplittingType::Zero0 {
                return Err(Error::Config(format!("type (0) never occurs for a field at {p}")));
            }
            if !v.contains(&t) {
                v.push(t);
            }
        }
        if v.is_empty() {
            return Err(Error::Config(format!("empty allowed set at {p}")));
        }
        v.sort();
        self.conditions.insert(p, v);
        Ok(self)
    }

    pub fn without_inert_requirement(mut self) -> LocalSpec {
        self.require_inert = false;
        self
    }

    /// Either JSON, `{"sign":-1,"primes":[{"p":2,"types":["3"]}]}`, or the
    /// compact form `-1;2:3;5:111,12`.
    pub fn parse(s: &str) -> Result<LocalSpec> {
        let s = s.trim();
        if s.starts_with('{') {
            let j: SpecJson = serde_json::from_str(s).map_err(|e| Error::Config(format!("bad spec JSON: {e}")))?;
            let mut spec = LocalSpec::new(j.sign)?;
            spec.require_inert = j.require_inert;
            for pj in j.primes {
                let types = pj.types.iter().map(|l| parse_type(l)).collect::<Result<Vec<_>>>()?;
                spec = spec.with(pj.p, &types)?;
            }
            return Ok(spec);
        }
        let mut parts = s.split(';');
        let mut spec = LocalSpec::new(parse_sign(parts.next().unwrap_or(""))?)?;
        for part in parts.filter(|p| !p.trim().is_empty()) {
            let (p, ts) = part
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("expected p:types in '{part}'")))?;
            let p: u64 = p.trim().parse().map_err(|_| Error::Config(format!("bad prime '{p}'")))?;
            let types = ts.split(',').map(parse_type).collect::<Result<Vec<_>>>()?;
            spec = spec.with(p, &types)?;
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let j = SpecJson {
            sign: self.sign,
            primes: self
                .conditions
                .iter()
                .map(|(&p, ts)| PrimeJson { p, types: ts.iter().map(|t| t.label().to_string()).collect() })
                .collect(),
            require_inert: self.require_inert,
        };
        serde_json::to_value(j).unwrap()
    }

    pub fn inert_primes(&self) -> Vec<u64> {
        self.conditions.iter().filter(|(_, v)| v.as_slice() == [SplittingType::Inert3]).map(|(&p, _)| p).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.require_inert && self.inert_primes().is_empty() {
            return Err(Error::Config(format!("{self}: no prime is required to be inert")));
        }
        Ok(())
    }

    /// Allowed types at p; all maximal types at unspecified primes.
    pub fn allowed_at(&self, p: u64) -> &[SplittingType] {
        self.conditions.get(&p).map(|v| v.as_slice()).unwrap_or(&MAXIMAL_TYPES)
    }

    pub fn weight(&self) -> CongruenceWeight {
        self.conditions
            .iter()
            .fold(CongruenceWeight::trivial(), |w, (&p, ts)| w.with(p, CongruenceWeight::allowed_types(ts)))
    }

    /// Whether the field of a maximal form of discriminant `disc` belongs to
    /// the family.
    pub fn contains(&self, f: &BinaryCubicForm, disc: i128) -> bool {
        (disc > 0) == (self.sign > 0)
            && self.conditions.iter().all(|(&p, ts)| ts.contains(&splitting_type_fast(f, p, disc)))
    }
}

fn parse_type(s: &str) -> Result<SplittingType> {
    let l = s.trim().trim_start_matches('(').trim_end_matches(')');
    let l = match l {
        "1^2 1" | "1121" | "1²1" => "1^21",
        "1³" | "13" => "1^3",
        x => x,
    };
    SplittingType::from_label(l).ok_or_else(|| Error::Config(format!("unknown splitting type '{s}'")))
}

impl fmt::Display for LocalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.sign > 0 { "+1" } else { "-1" })?;
        for (p, ts) in &self.conditions {
            let labels: Vec<&str> = ts.iter().map(|t| t.label()).collect();
            write!(f, ";{p}:{}", labels.join(","))?;
        }
        Ok(())
    }
}

fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Maximal local densities `mu(sigma)` restricted to the allowed set and
/// normalized to total one, indexed by splitting type.
pub fn local_weights(spec: &LocalSpec, p: u64) -> [Q; 6] {
    let d = maximal_densities(p);
    let allowed = spec.allowed_at(p);
    let mut w: [Q; 6] = Default::default();
    let mut total = Q::zero();
    for &t in allowed {
        w[t.index()] = d.mu[t.index()].clone();
        total += &d.mu[t.index()];
    }
    for x in w.iter_mut() {
        *x = &*x / &total;
    }
    w
}

/// `t_Sigma(p^k)`: the average of `lambda_{p^k}` over the allowed types at
/// p, weighted by maximal densities.
pub fn t_sigma(spec: &LocalSpec, p: u64, k: u32) -> Q {
    let w = local_weights(spec, p);
    MAXIMAL_TYPES.iter().map(|&t| &w[t.index()] * Q::from_integer(lambda_pm(t, k).into())).sum()
}

/// `t_Sigma(n)` by multiplicativity.
pub fn t_sigma_n(spec: &LocalSpec, n: u64) -> Q {
    crate::arith::factor(n).into_iter().map(|(p, k)| t_sigma(spec, p, k)).product()
}

fn poly_eval(c: &[i64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v as f64)
}

/// `F_p(s) = (1 - p^{-1-2s}) sum_k t_Sigma(p^k) p^{-k(1/2+s)}`, summed in
/// closed form from `sum_k lambda_{p^k}(sigma) x^k = 1/P_sigma(x)`.
pub fn local_factor(spec: &LocalSpec, p: u64, s: f64) -> f64 {
    if !spec.conditions.contains_key(&p) {
        return 1.0 + unspecified_factor_minus_one(p, s);
    }
    let x = (p as f64).powf(-0.5 - s);
    let w = local_weights(spec, p);
    let sum: f64 = MAXIMAL_TYPES.iter().map(|&t| qf(&w[t.index()]) / poly_eval(&denominator_poly(t), x)).sum();
    (1.0 - x * x) * sum
}

/// `F_p(s) - 1` at an unspecified prime without cancellation:
/// `W x^3/(1-x^3) + w_21 x - w_13 x^2` with `W = p^2/(p^2+p+1)`,
/// `w_21 = p/(p^2+p+1)`, `w_13 = 1/(p^2+p+1)`.
fn unspecified_factor_minus_one(p: u64, s: f64) -> f64 {
    let pf = p as f64;
    let x = pf.powf(-0.5 - s);
    let d = pf * pf + pf + 1.0;
    let x3 = x * x * x;
    (pf * pf / d) * x3 / (1.0 - x3) + (pf / d) * x - x * x / d
}

/// Positivity of `F_p(0)`, decided exactly: every `1/P_sigma(x)` is positive
/// on `0 < x < 1`, so the factor is positive once the weights are
/// non-negative with positive total.
pub fn local_factor_positive(spec: &LocalSpec, p: u64) -> bool {
    let w = local_weights(spec, p);
    let nonneg = w.iter().all(|x| *x >= Q::zero());
    let total: Q = w.iter().sum();
    // P_sigma in {1, 1-x, 1-x^2, (1-x)^2, 1+x+x^2}: positive on (0, 1).
    nonneg && total > Q::zero()
}

/// The Euler product data behind C_Sigma and C'_Sigma.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyAverages {
    pub spec: String,
    pub prime_cut: u64,
    /// `A^max(chi_Sigma)`, the density of the family among all forms.
    pub family_density: f64,
    /// `prod_p F_p(0)` including the tail past the cutoff.
    pub euler_product: f64,
    /// Estimated size of the neglected part of the tail.
    pub tail_error: f64,
    /// `H(s) = A^max(chi_Sigma) prod_p F_p(s)`; `s T_Sigma(1/2+s) = s zeta(1+2s) H(s)`.
    pub h0: f64,
    pub h_log_derivative: f64,
    pub residue: f64,
    /// `d/ds [s T_Sigma(1/2+s) gamma(1/2+s)/gamma(1/2)]` at 0.
    pub c_prime_raw: f64,
    pub c_sigma: f64,
    pub c_prime_sigma: f64,
    pub all_factors_positive: bool,
}

struct EulerProduct<'a> {
    spec: &'a LocalSpec,
    primes: Vec<u64>,
    cut: u64,
    log_density: f64,
}

impl<'a> EulerProduct<'a> {
    fn new(spec: &'a LocalSpec, cut: u64) -> Result<EulerProduct<'a>> {
        let largest = spec.conditions.keys().next_back().copied().unwrap_or(0);
        if cut <= largest {
            return Err(Error::Precision(format!("prime cutoff {cut} does not pass the specified prime {largest}")));
        }
        let fam = functionals(&spec.weight()).a_max;
        Ok(EulerProduct { spec, primes: primes_up_to(cut), cut, log_density: fam.ln() })
    }

    /// `sum_{p > cut} p^{-a}` from the prime zeta function.
    fn prime_tail(&self, a: f64) -> f64 {
        let mut head = KahanSum::default();
        for &p in &self.primes {
            head.add((p as f64).powf(-a));
        }
        // For large a the head dominates and the difference loses all digits;
        // there the tail is far below double precision anyway.
        (prime_zeta(a) - head.value()).max(0.0)
    }

    /// `log prod_{p <= cut} F_p(s)` and the first-order tail
    /// `sum_{p > cut} (p^{-a} + p^{-b} - p^{-a-1} - p^{-b-1})`,
    /// `a = 3/2 + s`, `b = 3/2 + 3s`.
    fn log_product(&self, s: f64) -> (f64, f64) {
        let mut acc = KahanSum::default();
        for &p in &self.primes {
            let v = if self.spec.conditions.contains_key(&p) {
                local_factor(self.spec, p, s).ln()
            } else {
                unspecified_factor_minus_one(p, s).ln_1p()
            };
            acc.add(v);
        }
        let a = 1.5 + s;
        let b = 1.5 + 3.0 * s;
        let tail = self.prime_tail(a) + self.prime_tail(b) - self.prime_tail(a + 1.0) - self.prime_tail(b + 1.0);
        (acc.value(), tail)
    }

    fn log_h(&self, s: f64) -> f64 {
        let (head, tail) = self.log_product(s);
        self.log_density + head + tail
    }

    /// Second-order terms dropped from the tail, about `sum_{p > cut} 2 p^-3`.
    fn tail_error(&self) -> f64 {
        let c = self.cut as f64;
        2.0 / (2.0 * c * c * c.ln())
    }
}

/// C_Sigma = alpha Res T_Sigma and C'_Sigma = 2 alpha C' from the Euler
/// product truncated at `prime_cut` with an analytic tail.
pub fn family_averages(spec: &LocalSpec, prime_cut: u64) -> Result<FamilyAverages> {
    spec.validate()?;
    let ep = EulerProduct::new(spec, prime_cut)?;
    let all_factors_positive = ep.primes.iter().all(|&p| local_factor_positive(spec, p));
    let (head, tail) = ep.log_product(0.0);
    let euler_product = (head + tail).exp();
    let h0 = (ep.log_density + head + tail).exp();
    // Five-point central difference of log H.
    let h = 1e-3;
    let d = (-ep.log_h(2.0 * h) + 8.0 * ep.log_h(h) - 8.0 * ep.log_h(-h) + ep.log_h(-2.0 * h)) / (12.0 * h);
    let gamma = GammaFactor::for_sign(spec.sign);
    let residue = 0.5 * h0;
    // s zeta(1+2s) = 1/2 + gamma_E s + O(s^2).
    let c_prime_raw = EULER_GAMMA * h0 + 0.5 * h0 * d + 0.5 * h0 * gamma.log_derivative(0.5);
    let alpha = ResidueConstants::new(spec.sign).alpha;
    let fa = FamilyAverages {
        spec: spec.to_string(),
        prime_cut,
        family_density: ep.log_density.exp(),
        euler_product,
        tail_error: ep.tail_error(),
        h0,
        h_log_derivative: d,
        residue,
        c_prime_raw,
        c_sigma: alpha * residue,
        c_prime_sigma: 2.0 * alpha * c_prime_raw,
        all_factors_positive,
    };
    if !(fa.c_sigma.is_finite() && fa.c_prime_sigma.is_finite()) {
        return Err(Error::Precision(format!("Euler product for {spec} did not converge")));
    }
    Ok(fa)
}

/// `T_Sigma(1/2 + s)` has a further simple pole at `s = -1/6`, from the
/// factor `~ zeta(3/2 + 3s)` in `H(s)`. It contributes
/// `D X^{11/12}` to the normalized first moment, with
/// `D = 2 alpha (1/3) K(-1/6) zeta(2/3) g~(-1/6)`,
/// `K(s) = H(s)/zeta(3/2 + 3s)` and
/// `g~(s) = Psi~(1 + s/2) G(s) gamma(1/2+s)/(gamma(1/2) s)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleTerm {
    pub k_value: f64,
    pub coefficient: f64,
    pub prime_cut: u64,
}

pub fn third_pole_term(spec: &LocalSpec, kernel: &AfeKernel, psi: &SmoothWeight, prime_cut: u64) -> Result<PoleTerm> {
    let ep = EulerProduct::new(spec, prime_cut)?;
    let s0 = -1.0 / 6.0;
    let mut acc = KahanSum::default();
    for &p in &ep.primes {
        acc.add(local_factor(spec, p, s0).ln() + (-1.0 / p as f64).ln_1p());
    }
    // log[F_p(-1/6)(1 - 1/p)] = p^{-4/3} - p^{-2} - 2p^{-7/3} - (3/2)p^{-8/3} + O(p^{-3})
    // at unspecified primes.
    let tail = ep.prime_tail(4.0 / 3.0) - ep.prime_tail(2.0) - 2.0 * ep.prime_tail(7.0 / 3.0) - 1.5 * ep.prime_tail(8.0 / 3.0);
    let k_value = (ep.log_density + acc.value() + tail).exp();
    let u = num_complex::Complex64::new(s0, 0.0);
    let g = psi.mellin_real(1.0 + s0 / 2.0) * kernel.g.eval(u).re * kernel.gamma.ratio(u).re / s0;
    let alpha = ResidueConstants::new(spec.sign).alpha;
    let coefficient = 2.0 * alpha * k_value / 3.0 * zeta(2.0 / 3.0) * g;
    Ok(PoleTerm { k_value, coefficient, prime_cut })
}

/// `(C_Sigma, C'_Sigma)` at the default prime cutoff.
pub fn c_sigma_constants(spec: &LocalSpec) -> Result<(f64, f64)> {
    let fa = family_averages(spec, DEFAULT_PRIME_CUT)?;
    Ok((fa.c_sigma, fa.c_prime_sigma))
}

/// Fitted constants in `|t(p)| <= c1/p` and `|t(p^2) - 1| <= c2/p^2` over
/// unspecified primes up to `p_max`.
pub fn t_sigma_size_constants(spec: &LocalSpec, p_max: u64) -> (f64, f64) {
    let mut c1: f64 = 0.0;
    let mut c2: f64 = 0.0;
    for p in primes_up_to(p_max) {
        if spec.conditions.contains_key(&p) {
            continue;
        }
        let pf = p as f64;
        c1 = c1.max(pf * qf(&t_sigma(spec, p, 1)).abs());
        c2 = c2.max(pf * pf * (qf(&t_sigma(spec, p, 2)) - 1.0).abs());
    }
    (c1, c2)
}

/// One field of a family with its central value.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldL {
    pub disc: i64,
    pub form: BinaryCubicForm,
    pub l_half: f64,
    pub tail_bound: f64,
}

/// All fields of the family with |Delta| < x_max, maximal irreducible
/// orbit representatives in discriminant order.
pub fn family_fields(set: &OrbitSet, spec: &LocalSpec) -> Vec<(BinaryCubicForm, i64)> {
    set.records
        .iter()
        .zip(&set.maximal)
        .filter(|(r, &m)| m && r.irreducible && spec.contains(&r.form, r.disc as i128))
        .map(|(r, _)| (r.form, r.disc))
        .collect()
}

/// Central values for every field of the family in the orbit set.
pub fn compute_family_lvalues(set: &OrbitSet, spec: &LocalSpec, kernel: &AfeKernel) -> Result<Vec<FieldL>> {
    if set.sign != spec.sign {
        return Err(Error::InvalidInput(format!("orbit set has sign {} but spec {spec}", set.sign)));
    }
    let fields = family_fields(set, spec);
    let dmax = fields.iter().map(|f| f.1.unsigned_abs()).max().unwrap_or(1);
    let n = crate::analytic::afe::terms_needed(kernel, 1.0 / (dmax as f64).sqrt());
    let sieve = SpfSieve::new(n as u64 + 1);
    let mut out = Vec::with_capacity(fields.len());
    for (form, disc) in fields {
        let l = afe_central_value_with(&form, kernel, &sieve)?;
        out.push(FieldL { disc, form, l_half: l.l_half, tail_bound: l.tail_bound });
    }
    Ok(out)
}

pub fn lvalue_cache_path(dir: &Path, spec: &LocalSpec, kernel: &AfeKernel, x_max: u64) -> PathBuf {
    use sha2::{Digest, Sha256};
    let tag = Sha256::digest(format!("{spec}|{}|{x_max}", kernel.g.name()).as_bytes());
    let hex: String = tag.iter().take(6).map(|b| format!("{b:02x}")).collect();
    dir.join(format!("lvalues_{}_{x_max}_{hex}.csv", if spec.sign > 0 { "pos" } else { "neg" }))
}

fn write_lvalues(path: &Path, spec: &LocalSpec, x_max: u64, vals: &[FieldL]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        writeln!(w, "# spec={spec} x_max={x_max} count={}", vals.len())?;
        for v in vals {
            let c = v.form.coeffs();
            writeln!(w, "{},{},{},{},{},{:e},{:e}", v.disc, c[0], c[1], c[2], c[3], v.l_half, v.tail_bound)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn read_lvalues(path: &Path, spec: &LocalSpec, x_max: u64) -> Result<Vec<FieldL>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Cache(format!("{} is empty", path.display())))??;
    let want = format!("# spec={spec} x_max={x_max} count=");
    let count: usize = header
        .strip_prefix(&want)
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::Cache(format!("{}: header '{header}' does not match", path.display())))?;
    let bad = |l: &str| Error::Cache(format!("{}: bad line '{l}'", path.display()));
    let mut out = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        let v: Vec<&str> = line.split(',').collect();
        if v.len() != 7 {
            return Err(bad(&line));
        }
        let i = |k: usize| v[k].parse::<i64>().map_err(|_| bad(&line));
        let fl = |k: usize| v[k].parse::<f64>().map_err(|_| bad(&line));
        out.push(FieldL {
            disc: i(0)?,
            form: BinaryCubicForm::new(i(1)?, i(2)?, i(3)?, i(4)?),
            l_half: fl(5)?,
            tail_bound: fl(6)?,
        });
    }
    if out.len() != count {
        return Err(Error::Cache(format!("{}: {} of {count} rows", path.display(), out.len())));
    }
    Ok(out)
}

/// Central values of the family, read from `dir` when cached and computed
/// (then stored) otherwise.
pub fn family_lvalues(dir: &Path, set: &OrbitSet, spec: &LocalSpec, kernel: &AfeKernel) -> Result<Vec<FieldL>> {
    let path = lvalue_cache_path(dir, spec, kernel, set.x_max);
    if path.exists() {
        if let Ok(v) = read_lvalues(&path, spec, set.x_max) {
            return Ok(v);
        }
    }
    let v = compute_family_lvalues(set, spec, kernel)?;
    std::fs::create_dir_all(dir)?;
    write_lvalues(&path, spec, set.x_max, &v)?;
    Ok(v)
}

/// Fields with the cover `x_max` they were drawn from.
#[derive(Clone, Debug)]
pub struct Family {
    pub spec: LocalSpec,
    pub x_max: u64,
    pub fields: Vec<FieldL>,
}

impl Family {
    fn check(&self, hi: f64) -> Result<()> {
        if hi > self.x_max as f64 {
            return Err(Error::PartialData(format!(
                "central values cover |Delta| < {} but {hi} is needed",
                self.x_max
            )));
        }
        Ok(())
    }

    fn weighted<'a>(&'a self, psi: &'a SmoothWeight, x: f64) -> impl Iterator<Item = (&'a FieldL, f64)> + 'a {
        let (lo, hi) = (psi.support.0 * x, psi.support.1 * x);
        self.fields.iter().filter_map(move |f| {
            let d = f.disc.unsigned_abs() as f64;
            (d > lo && d < hi).then(|| (f, psi.eval(d / x)))
        })
    }
}

/// The first moment at one X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub x: f64,
    pub fields: usize,
    /// `sum_K L(1/2, rho_K) Psi(|Delta|/X)`, each field once.
    pub a_sigma: f64,
    /// `a_sigma / ORBIT_NORMALIZATION`, in the normalization of C_Sigma.
    pub a_normalized: f64,
    /// `C_Sigma X (log X + Psi~'(1)) + C'_Sigma X`.
    pub prediction: f64,
    /// The same main term before the Mellin shift,
    /// `2 alpha X sum_n g(n/sqrt X) A^max(lambda_n chi_Sigma)/sqrt n`.
    pub main_sum: f64,
    /// `2 gamma X^{5/6} sum_n H~_{n/sqrt X}(5/6) C^max(lambda_n chi_Sigma)/sqrt n`.
    pub secondary_sum: f64,
    pub smoothed_count: f64,
    pub max_tail_bound: f64,
}

/// Per-prime-power factors of `A^max(lambda_n chi)` and `C^max(lambda_n chi)`
/// relative to `A^max(chi)` and `C^max(chi)`.
struct CoefficientRatios {
    spec: LocalSpec,
    cache: BTreeMap<(u64, u32), (f64, f64)>,
}

impl CoefficientRatios {
    fn local(&mut self, p: u64, k: u32) -> (f64, f64) {
        if let Some(v) = self.cache.get(&(p, k)) {
            return *v;
        }
        let allowed = self.spec.allowed_at(p);
        let mut chi = [0i64; 6];
        let mut lam = [0i64; 6];
        for &t in allowed {
            chi[t.index()] = 1;
            lam[t.index()] = lambda_pm(t, k);
        }
        let (chi, lam) = (InvariantFunction::from_ints(chi), InvariantFunction::from_ints(lam));
        let a = qf(&t_sigma(&self.spec, p, k));
        let c = c_max_local(&lam, p) / c_max_local(&chi, p);
        self.cache.insert((p, k), (a, c));
        (a, c)
    }

    fn at(&mut self, sieve: &SpfSieve, n: u64) -> (f64, f64) {
        sieve.factor(n).into_iter().fold((1.0, 1.0), |acc, (p, k)| {
            let (a, c) = self.local(p, k);
            (acc.0 * a, acc.1 * c)
        })
    }
}

/// The two terms of the finite-X prediction for the normalized first moment.
pub fn moment_prediction_sums(spec: &LocalSpec, kernel: &AfeKernel, psi: &SmoothWeight, x: f64) -> (f64, f64) {
    let r = ResidueConstants::new(spec.sign);
    let f = functionals(&spec.weight());
    let sx = x.sqrt();
    let n_max = (kernel.y_max * sx * psi.support.1.sqrt()).ceil() as u64 + 1;
    let sieve = SpfSieve::new(n_max.max(2));
    let mut ratios = CoefficientRatios { spec: spec.clone(), cache: BTreeMap::new() };
    let (mut main, mut sec) = (KahanSum::default(), KahanSum::default());
    let s56 = num_complex::Complex64::new(5.0 / 6.0, 0.0);
    for n in 1..=n_max {
        let (a, c) = ratios.at(&sieve, n);
        let y = n as f64 / sx;
        let w = 1.0 / (n as f64).sqrt();
        if a != 0.0 {
            main.add(w * a * g_function(kernel, psi, y));
        }
        if c != 0.0 {
            sec.add(w * c * h_mellin(kernel, psi, y, s56).re);
        }
    }
    (2.0 * r.alpha * f.a_max * x * main.value(), 2.0 * r.gamma_s * f.c_max * x.powf(5.0 / 6.0) * sec.value())
}

pub fn first_moment(family: &Family, fa: &FamilyAverages, kernel: &AfeKernel, psi: &SmoothWeight, x: f64) -> Result<MomentRow> {
    family.check(psi.support.1 * x)?;
    let mut a = KahanSum::default();
    let mut cnt = KahanSum::default();
    let mut n = 0;
    let mut tail: f64 = 0.0;
    for (f, w) in family.weighted(psi, x) {
        a.add(f.l_half * w);
        cnt.add(w);
        n += 1;
        tail = tail.max(f.tail_bound);
    }
    let a = a.value();
    let prediction = fa.c_sigma * x * (psi.mellin_real(1.0) * x.ln() + psi.mellin_derivative_at_one()) + fa.c_prime_sigma * x;
    let (main_sum, secondary_sum) = moment_prediction_sums(&family.spec, kernel, psi, x);
    Ok(MomentRow {
        x,
        fields: n,
        a_sigma: a,
        a_normalized: a / ORBIT_NORMALIZATION,
        prediction,
        main_sum,
        secondary_sum,
        smoothed_count: cnt.value(),
        max_tail_bound: tail,
    })
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Regression of `A_Sigma(X)/X` (normalized) on `log X` over a grid, and
/// the same regression after removing the `X^{11/12}` pole term and the
/// `X^{5/6}` secondary sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTrend {
    pub rows: Vec<MomentRow>,
    pub slope: f64,
    pub intercept: f64,
    pub c_sigma: f64,
    pub c_prime_sigma: f64,
    pub relative_slope_error: f64,
    pub pole: PoleTerm,
    pub corrected_slope: f64,
    pub corrected_intercept: f64,
    pub corrected_relative_error: f64,
    /// Largest `|A / (closed form + pole + secondary) - 1|` over the grid.
    pub max_three_term_error: f64,
}

pub fn moment_trend(family: &Family, fa: &FamilyAverages, kernel: &AfeKernel, psi: &SmoothWeight, xs: &[f64]) -> Result<MomentTrend> {
    if xs.len() < 2 {
        return Err(Error::InvalidInput("a trend needs at least two X values".into()));
    }
    let rows = xs.iter().map(|&x| first_moment(family, fa, kernel, psi, x)).collect::<Result<Vec<_>>>()?;
    let pole = third_pole_term(&family.spec, kernel, psi, fa.prime_cut)?;
    let lx: Vec<f64> = rows.iter().map(|r| r.x.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.a_normalized / r.x).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);
    let cy: Vec<f64> = rows
        .iter()
        .map(|r| (r.a_normalized - pole.coefficient * r.x.powf(11.0 / 12.0) - r.secondary_sum) / r.x)
        .collect();
    let (corrected_slope, corrected_intercept) = linear_fit(&lx, &cy);
    let max_three_term_error = rows
        .iter()
        .map(|r| (r.a_normalized / (r.prediction + pole.coefficient * r.x.powf(11.0 / 12.0) + r.secondary_sum) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(MomentTrend {
        rows,
        slope,
        intercept,
        c_sigma: fa.c_sigma,
        c_prime_sigma: fa.c_prime_sigma,
        relative_slope_error: slope / fa.c_sigma - 1.0,
        pole,
        corrected_slope,
        corrected_intercept,
        corrected_relative_error: corrected_slope / fa.c_sigma - 1.0,
        max_three_term_error,
    })
}

/// `MA_Sigma(X)` over `[X, 2X)` and `PA_Sigma(X)` over `[X/2, 3X)`, with
/// the plain sum over `[X/2, 3X)` that closes the inequality
/// `MA <= 2 PA - A_1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaPaRow {
    pub x: f64,
    pub ma: f64,
    pub pa: f64,
    pub a_wide: f64,
    pub holds: bool,
}

pub fn ma_pa(family: &Family, x: f64) -> Result<MaPaRow> {
    family.check(3.0 * x)?;
    let (mut ma, mut pa, mut aw) = (KahanSum::default(), KahanSum::default(), KahanSum::default());
    for f in &family.fields {
        let d = f.disc.unsigned_abs() as f64;
        if d >= x && d < 2.0 * x {
            ma.add(f.l_half.abs());
        }
        if d >= 0.5 * x && d < 3.0 * x {
            aw.add(f.l_half);
            if f.l_half >= 0.0 {
                pa.add(f.l_half);
            }
        }
    }
    let (ma, pa, a_wide) = (ma.value(), pa.value(), aw.value());
    // |x| = 2 max(x, 0) - x summed over the wide window bounds MA; allow
    // rounding in the last place.
    let holds = ma <= 2.0 * pa + a_wide.abs() + 1e-9 * (ma.abs() + pa.abs());
    Ok(MaPaRow { x, ma, pa, a_wide, holds })
}

/// An even test function with compactly supported Fourier transform,
/// `Phi^(xi) = int Phi(x) e^{-2 pi i x xi} dx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DensityTestFunction {
    /// `Phi^(t) = h max(0, 1 - |t|/a)`, `Phi(x) = h a (sin(pi a x)/(pi a x))^2`.
    Fejer { a: f64, height: f64 },
    /// `Phi^(t) = exp(1 - 1/(1 - (t/a)^2))` on `(-a, a)`.
    Bump { a: f64 },
}

impl DensityTestFunction {
    pub fn fejer(a: f64) -> DensityTestFunction {
        DensityTestFunction::Fejer { a, height: 1.0 }
    }

    pub fn zero(a: f64) -> DensityTestFunction {
        DensityTestFunction::Fejer { a, height: 0.0 }
    }

    pub fn support(&self) -> f64 {
        match *self {
            DensityTestFunction::Fejer { a, .. } | DensityTestFunction::Bump { a } => a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.support();
        if !(a > 0.0 && a <= MAX_DENSITY_SUPPORT) {
            return Err(Error::InvalidInput(format!("test function support {a} outside (0, {MAX_DENSITY_SUPPORT}]")));
        }
        // Evenness and support, sampled.
        for i in 0..=64 {
            let t = a * i as f64 / 32.0;
            if self.phi_hat(t) != self.phi_hat(-t) || (t >= a && self.phi_hat(t) != 0.0) {
                return Err(Error::InvalidInput(format!("test function fails evenness or support at {t}")));
            }
        }
        Ok(())
    }

    pub fn phi_hat(&self, t: f64) -> f64 {
        match *self {
            DensityTestFunction::Fejer { a, height } => height * (1.0 - t.abs() / a).max(0.0),
            DensityTestFunction::Bump { a } => {
                let u = t / a;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match *self {
            DensityTestFunction::Fejer { a, height } => {
                let z = std::f64::consts::PI * a * x;
                if z.abs() < 1e-8 {
                    height * a
                } else {
                    height * a * (z.sin() / z).powi(2)
                }
            }
            DensityTestFunction::Bump { a } => {
                let q = crate::analytic::special::Quadrature::composite(-a, a, 32, 16);
                q.integrate(|t| self.phi_hat(t) * (2.0 * std::f64::consts::PI * x * t).cos())
            }
        }
    }

    /// `int_{-1}^{1} Phi^`.
    pub fn integral_phi_hat(&self) -> f64 {
        let a = self.support().min(1.0);
        crate::analytic::special::Quadrature::composite(-a, a, 32, 16).integrate(|t| self.phi_hat(t))
    }

    /// `Phi^(0) - (1/2) int_{-1}^{1} Phi^`.
    pub fn symplectic_prediction(&self) -> f64 {
        self.phi_hat(0.0) - 0.5 * self.integral_phi_hat()
    }
}

/// The 1-level density at one X from the explicit formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub x: f64,
    pub fields: usize,
    /// `S(log|Delta|)/S(1)`.
    pub log_conductor: f64,
    /// Family averages of `Z^(1)` and `Z^(2)`.
    pub z1: f64,
    pub z2: f64,
    pub density: f64,
    pub prediction: f64,
    /// Contribution of each prime power to the average of `Z^(2)`.
    pub prime_terms: Vec<(u64, u32, f64)>,
}

pub fn one_level_density(family: &Family, phi: &DensityTestFunction, psi: &SmoothWeight, x: f64) -> Result<DensityRow> {
    phi.validate()?;
    family.check(psi.support.1 * x)?;
    let fields: Vec<(&FieldL, f64)> = family.weighted(psi, x).collect();
    let mut s1 = KahanSum::default();
    let mut slog = KahanSum::default();
    for (f, w) in &fields {
        s1.add(*w);
        slog.add(*w * (f.disc.unsigned_abs() as f64).ln());
    }
    let s1 = s1.value();
    if s1 == 0.0 {
        return Err(Error::PartialData(format!("no fields of {} near X = {x}", family.spec)));
    }
    let ell = slog.value() / s1;
    // Z^(1)_K = Phi^(0) log|Delta| / L_X, the O(1) dropped.
    let z1 = phi.phi_hat(0.0) * slog.value() / (ell * s1);
    // Prime powers with m log p < a L_X.
    let bound = phi.support() * ell;
    let mut terms = Vec::new();
    let mut z2 = KahanSum::default();
    for p in primes_up_to(bound.exp().ceil() as u64 + 1) {
        let lp = (p as f64).ln();
        let mut m = 1u32;
        while m as f64 * lp < bound {
            let coef = -2.0 / ell * lp / (p as f64).powf(m as f64 / 2.0) * phi.phi_hat(m as f64 * lp / ell);
            let mut avg = KahanSum::default();
            if coef != 0.0 {
                for (f, w) in &fields {
                    let t = splitting_type_fast(&f.form, p, f.disc as i128);
                    avg.add(*w * theta_pm(t, m) as f64);
                }
            }
            let term = coef * avg.value() / s1;
            terms.push((p, m, term));
            z2.add(term);
            m += 1;
        }
    }
    let z2 = z2.value();
    Ok(DensityRow {
        x,
        fields: fields.len(),
        log_conductor: ell,
        z1,
        z2,
        density: z1 + z2,
        prediction: phi.symplectic_prediction(),
        prime_terms: terms,
    })
}

/// `S(theta_K(p^m))/S(1)` at one X.
pub fn theta_average(family: &Family, psi: &SmoothWeight, x: f64, p: u64, m: u32) -> Result<f64> {
    family.check(psi.support.1 * x)?;
    let (mut num, mut den) = (KahanSum::default(), KahanSum::default());
    for (f, w) in family.weighted(psi, x) {
        num.add(w * theta_pm(splitting_type_fast(&f.form, p, f.disc as i128), m) as f64);
        den.add(w);
    }
    if den.value() == 0.0 {
        return Err(Error::PartialData(format!("no fields near X = {x}")));
    }
    Ok(num.value() / den.value())
}

/// `θ` average with the value predicted by the local densities,
/// `sum_sigma w_sigma theta_{p^m}(sigma)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRow {
    pub p: u64,
    pub m: u32,
    pub x: f64,
    pub average: f64,
    pub local_mean: f64,
}

pub fn theta_row(family: &Family, psi: &SmoothWeight, x: f64, p: u64, m: u32) -> Result<ThetaRow> {
    let w = local_weights(&family.spec, p);
    let local_mean = MAXIMAL_TYPES.iter().map(|&t| qf(&w[t.index()]) * theta_pm(t, m) as f64).sum();
    Ok(ThetaRow { p, m, x, average: theta_average(family, psi, x, p, m)?, local_mean })
}

/// Sign counts of central values among fields with |Delta| < X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonvanishingRow {
    pub x: f64,
    pub fields: usize,
    pub positive: usize,
    pub negative: usize,
    /// `|L(1/2)|` within the evaluation error of zero.
    pub undetermined: usize,
    /// `log #{L(1/2) != 0} / log X`.
    pub delta: f64,
    /// `log #{L(1/2) > 0} / log X`.
    pub delta_positive: f64,
    pub proportion_nonzero: f64,
}

pub fn nonvanishing(family: &Family, x: f64) -> Result<NonvanishingRow> {
    family.check(x)?;
    let (mut pos, mut neg, mut und, mut n) = (0, 0, 0, 0);
    for f in family.fields.iter().filter(|f| (f.disc.unsigned_abs() as f64) < x) {
        n += 1;
        if f.l_half.abs() <= f.tail_bound.max(1e-12) {
            und += 1;
        } else if f.l_half > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    let lx = x.ln();
    let ln = |c: usize| if c == 0 { f64::NEG_INFINITY } else { (c as f64).ln() / lx };
    Ok(NonvanishingRow {
        x,
        fields: n,
        positive: pos,
        negative: neg,
        undetermined: und,
        delta: ln(pos + neg),
        delta_positive: ln(pos),
        proportion_nonzero: if n == 0 { 0.0 } else { (pos + neg) as f64 / n as f64 },
    })
}

/// Positive residue with every local factor positive.
pub fn residue_is_positive(fa: &FamilyAverages) -> bool {
    fa.residue > 0.0 && fa.all_factors_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::q;
    use SplittingType as T;

    #[test]
    fn t_sigma_values() {
        let spec = LocalSpec::default_family();
        for p in [2u64, 5, 7, 11] {
            assert_eq!(t_sigma(&spec, p, 0), q(1, 1));
            let d = maximal_densities(p);
            assert_eq!(t_sigma(&spec, p, 1), &d.u_lambda_p / d.total());
        }
        assert_eq!(t_sigma(&spec, DEFAULT_INERT_PRIME, 1), q(-1, 1));
        assert_eq!(t_sigma(&spec, DEFAULT_INERT_PRIME, 3), q(1, 1));
        assert_eq!(t_sigma(&spec, 5, 1), q(5, 31));
        assert_eq!(t_sigma_n(&spec, 10), t_sigma(&spec, 2, 1) * t_sigma(&spec, 5, 1));
    }

    #[test]
    fn local_factor_closed_forms() {
        let spec = LocalSpec::default_family();
        for p in [2u64, 3, 5, 7, 101] {
            for s in [0.0, 0.1, -0.05] {
                let x = (p as f64).powf(-0.5 - s);
                let direct: f64 = (0..200).map(|k| qf(&t_sigma(&spec, p, k)) * x.powi(k as i32)).sum::<f64>() * (1.0 - x * x);
                let fixed = LocalSpec::new(-1).unwrap().with(p, &MAXIMAL_TYPES).unwrap();
                assert!((local_factor(&spec, p, s) - direct).abs() < 1e-13, "{p} {s}");
                assert!((local_factor(&fixed, p, s) - direct).abs() < 1e-13, "{p} {s}");
            }
        }
        // Inert: (1 - x^2)/(1 + x + x^2) = (1-x)(1 - x^2)/(1 - x^3) summed as
        // sum_{3|k} x^k - sum_{k = 1 mod 3} x^k times (1 - x^2).
        let p = DEFAULT_INERT_PRIME;
        let x = (p as f64).powf(-0.5);
        let alt: f64 = (0..60).map(|k| match k % 3 { 0 => x.powi(k), 1 => -x.powi(k), _ => 0.0 }).sum();
        assert!((local_factor(&spec, p, 0.0) - (1.0 - x * x) * alt).abs() < 1e-15);
        assert!(local_factor_positive(&spec, p));
    }

    #[test]
    fn spec_parsing() {
        let a = LocalSpec::parse("-1;2:3").unwrap();
        let b = LocalSpec::parse(r#"{"sign":-1,"primes":[{"p":2,"types":["3"]}]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "-1;2:3");
        assert_eq!(LocalSpec::parse(&a.to_string()).unwrap(), a);
        assert!(LocalSpec::parse("+1;4:3").is_err());
        assert!(LocalSpec::parse("+1;5:0").is_err());
        assert!(LocalSpec::parse("+1").unwrap().validate().is_err());
        let c = LocalSpec::parse("+1;5:111,12,1^21").unwrap();
        assert_eq!(c.allowed_at(5).len(), 3);
        assert_eq!(c.allowed_at(7).len(), 5);
        assert_eq!(LocalSpec::parse(&serde_json::to_string(&c.to_json()).unwrap()).unwrap(), c);
    }

    #[test]
    fn family_constants() {
        let spec = LocalSpec::default_family();
        let a = family_averages(&spec, 200_000).unwrap();
        let b = family_averages(&spec, 400_000).unwrap();
        assert!(a.c_sigma > 0.0 && a.all_factors_positive);
        assert!((a.c_sigma - b.c_sigma).abs() < 1e-6, "{} {}", a.c_sigma, b.c_sigma);
        assert!((a.c_prime_sigma - b.c_prime_sigma).abs() < 1e-6);
        // An extra prime allowing every type changes nothing.
        let extra = spec.clone().with(13, &MAXIMAL_TYPES).unwrap();
        let c = family_averages(&extra, 200_000).unwrap();
        assert!((a.c_sigma - c.c_sigma).abs() < 1e-12 * a.c_sigma);
        assert!((a.c_prime_sigma - c.c_prime_sigma).abs() < 1e-10);
        // Plain truncated product of F_p(0), with the tail sum_{p > P} 2 p^{-3/2}
        // replaced by 2 int_P^inf t^{-3/2} dt / log t.
        let cut = 2_000_000u64;
        let mut prod = 1.0;
        for p in primes_up_to(cut) {
            prod *= local_factor(&spec, p, 0.0);
        }
        let c = cut as f64;
        let q = crate::analytic::special::Quadrature::composite(c.ln(), c.ln() + 100.0, 64, 16);
        let tail = 2.0 * q.integrate(|u| (-0.5 * u).exp() / u);
        assert!((prod * tail.exp() / b.euler_product - 1.0).abs() < 2e-5, "{prod} {} {a:?} {b:?}", b.euler_product);
    }

    #[test]
    fn t_sigma_sizes() {
        let spec = LocalSpec::new(1).unwrap().with(2, &[T::Inert3]).unwrap();
        let (c1, c2) = t_sigma_size_constants(&spec, 1000);
        assert!(c1 <= 1.0 && c1 > 0.9, "{c1}");
        assert!(c2 <= 1.0001 && c2 > 0.9, "{c2}");
    }

    #[test]
    fn test_functions() {
        let phi = DensityTestFunction::fejer(1.0 / 3.0);
        phi.validate().unwrap();
        assert!((phi.integral_phi_hat() - 1.0 / 3.0).abs() < 1e-12);
        assert!((phi.symplectic_prediction() - 5.0 / 6.0).abs() < 1e-12);
        assert!(DensityTestFunction::fejer(0.5).validate().is_err());
        let b = DensityTestFunction::Bump { a: 0.3 };
        b.validate().unwrap();
        // Phi(0) = int Phi^.
        assert!((b.phi(0.0) - b.integral_phi_hat()).abs() < 1e-12);
        assert!((phi.phi(0.0) - phi.integral_phi_hat()).abs() < 1e-12);
        assert_eq!(DensityTestFunction::zero(0.3).symplectic_prediction(), 0.0);
    }
}
