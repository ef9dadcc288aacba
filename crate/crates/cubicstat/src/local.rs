//! Local structure of cubic rings at a prime: splitting types, roots on the
//! projective line, maximality, index-p sub- and overrings, maximalization,
//! and the switching identity between forms and their overrings.

use crate::arith::{divisors, factor, jacobi, modp, mobius};
use crate::error::{Error, Result};
use crate::forms::{act, BinaryCubicForm, Gl2, OrbitRecord};
use serde::{Deserialize, Serialize};

/// Factorization type of a binary cubic form over F_p. The declaration
/// order is `(0), (1^3), (1^21), (111), (12), (3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplittingType {
    Zero0,
    TotallyRamified1_3,
    Ramified1_21,
    Split111,
    Partial12,
    Inert3,
}

impl SplittingType {
    pub const ALL: [SplittingType; 6] = [
        SplittingType::Zero0,
        SplittingType::TotallyRamified1_3,
        SplittingType::Ramified1_21,
        SplittingType::Split111,
        SplittingType::Partial12,
        SplittingType::Inert3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            SplittingType::Zero0 => "0",
            SplittingType::TotallyRamified1_3 => "1^3",
            SplittingType::Ramified1_21 => "1^21",
            SplittingType::Split111 => "111",
            SplittingType::Partial12 => "12",
            SplittingType::Inert3 => "3",
        }
    }

    pub fn from_label(s: &str) -> Option<SplittingType> {
        SplittingType::ALL.into_iter().find(|t| t.label() == s)
    }

    /// Unramified types; forms of these types are maximal at p.
    pub fn is_unramified(self) -> bool {
        matches!(self, SplittingType::Split111 | SplittingType::Partial12 | SplittingType::Inert3)
    }
}

impl std::fmt::Display for SplittingType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.label())
    }
}

/// A point of P^1(F_p), normalized to `[t:1]` or `[1:0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct P1Point {
    pub x: u64,
    pub y: u64,
}

impl P1Point {
    pub const INFINITY: P1Point = P1Point { x: 1, y: 0 };

    pub fn affine(t: u64) -> P1Point {
        P1Point { x: t, y: 1 }
    }

    /// Normalize a nonzero vector mod p.
    pub fn normalize(x: i64, y: i64, p: u64) -> Option<P1Point> {
        let (x, y) = (modp(x, p), modp(y, p));
        if y != 0 {
            let inv = crate::arith::invmod(y, p)?;
            Some(P1Point::affine(crate::arith::mulmod(x, inv, p)))
        } else if x != 0 {
            Some(P1Point::INFINITY)
        } else {
            None
        }
    }

    /// All p + 1 points.
    pub fn all(p: u64) -> impl Iterator<Item = P1Point> {
        (0..p).map(P1Point::affine).chain(std::iter::once(P1Point::INFINITY))
    }
}

/// Roots on P^1(F_p) with multiplicities. For the zero class `roots` is
/// empty and `omega` is `p + 1` (every point is a root).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRootData {
    pub roots: Vec<(P1Point, u32)>,
    pub omega: u64,
    pub omega_simple: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaximalizationResult {
    pub maximal_form: BinaryCubicForm,
    pub index: u64,
    pub field_discriminant: i64,
}

fn eval_mod(c: &[u64; 4], t: u64, p: u64) -> u64 {
    let mut acc = 0u128;
    for &v in c {
        acc = (acc * t as u128 + v as u128) % p as u128;
    }
    acc as u64
}

/// Multiplicity of the affine root t of `a u^3 + b u^2 + c u + d` mod p.
fn affine_multiplicity(c: &[u64; 4], t: u64, p: u64) -> u32 {
    // Coefficients high to low; strip leading zeros.
    let mut poly: Vec<u64> = c.iter().copied().skip_while(|&v| v == 0).collect();
    let mut m = 0;
    while poly.len() > 1 {
        // Synthetic division by (u - t).
        let mut q = Vec::with_capacity(poly.len() - 1);
        let mut acc = 0u64;
        for &v in &poly[..poly.len() - 1] {
            acc = ((acc as u128 * t as u128 + v as u128) % p as u128) as u64;
            q.push(acc);
        }
        let rem = ((acc as u128 * t as u128 + poly[poly.len() - 1] as u128) % p as u128) as u64;
        if rem != 0 {
            break;
        }
        m += 1;
        poly = q;
    }
    m
}

/// Splitting type and roots by a scan of P^1(F_p).
pub fn splitting_type(f: &BinaryCubicForm, p: u64) -> (SplittingType, LocalRootData) {
    let c = f.reduce_mod(p);
    if c == [0; 4] {
        return (SplittingType::Zero0, LocalRootData { roots: vec![], omega: p + 1, omega_simple: 0 });
    }
    let mut roots = Vec::new();
    let inf_mult = c.iter().take_while(|&&v| v == 0).count() as u32;
    for t in 0..p {
        if eval_mod(&c, t, p) == 0 {
            roots.push((P1Point::affine(t), affine_multiplicity(&c, t, p)));
        }
    }
    if inf_mult > 0 {
        roots.push((P1Point::INFINITY, inf_mult));
    }
    let total: u32 = roots.iter().map(|r| r.1).sum();
    let ty = match (total, roots.len()) {
        (0, _) => SplittingType::Inert3,
        (1, _) => SplittingType::Partial12,
        (3, 3) => SplittingType::Split111,
        (3, 2) => SplittingType::Ramified1_21,
        (3, 1) => SplittingType::TotallyRamified1_3,
        _ => unreachable!("cubic over a field has 0, 1 or 3 roots with multiplicity"),
    };
    let omega = roots.len() as u64;
    let omega_simple = roots.iter().filter(|r| r.1 == 1).count() as u64;
    (ty, LocalRootData { roots, omega, omega_simple })
}

/// `t^p mod (t^3 + b t^2 + c t + d)` over F_p, returned as `[c0, c1, c2]`.
fn frobenius_of_t(b: u64, c: u64, d: u64, p: u64) -> [u64; 3] {
    let pm = p as u128;
    let (nb, nc, nd) = ((p - b) % p, (p - c) % p, (p - d) % p);
    let mul = |x: &[u64; 3], y: &[u64; 3]| -> [u64; 3] {
        let mut r = [0u128; 5];
        for i in 0..3 {
            for j in 0..3 {
                r[i + j] += x[i] as u128 * y[j] as u128;
            }
        }
        for v in r.iter_mut() {
            *v %= pm;
        }
        // t^4 = t * t^3, t^3 = -b t^2 - c t - d.
        for k in (3..5).rev() {
            let top = r[k];
            r[k] = 0;
            r[k - 1] = (r[k - 1] + top * nb as u128) % pm;
            r[k - 2] = (r[k - 2] + top * nc as u128) % pm;
            r[k - 3] = (r[k - 3] + top * nd as u128) % pm;
        }
        [r[0] as u64, r[1] as u64, r[2] as u64]
    };
    let mut result = [1u64, 0, 0];
    let mut base = [0u64, 1, 0];
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    result
}

/// Splitting type without listing roots. `disc` must be the discriminant
/// of `f`. Uses quadratic reciprocity and a Frobenius test at unramified
/// odd primes, Hessian vanishing at ramified primes above 3, and a scan
/// otherwise.
pub fn splitting_type_fast(f: &BinaryCubicForm, p: u64, disc: i128) -> SplittingType {
    if p <= 3 {
        return splitting_type(f, p).0;
    }
    let dm = disc.rem_euclid(p as i128) as u64;
    let c = f.reduce_mod(p);
    if c == [0; 4] {
        return SplittingType::Zero0;
    }
    if dm == 0 {
        let (hp, hq, hr) = f.hessian();
        let pi = p as i128;
        if hp % pi == 0 && hq % pi == 0 && hr % pi == 0 {
            return SplittingType::TotallyRamified1_3;
        }
        return SplittingType::Ramified1_21;
    }
    if jacobi(dm as i64, p) == -1 {
        return SplittingType::Partial12;
    }
    if c[0] == 0 {
        return SplittingType::Split111;
    }
    let inv = crate::arith::invmod(c[0], p).expect("p prime");
    let norm = |v: u64| crate::arith::mulmod(v, inv, p);
    let fr = frobenius_of_t(norm(c[1]), norm(c[2]), norm(c[3]), p);
    if fr == [0, 1, 0] {
        SplittingType::Split111
    } else {
        SplittingType::Inert3
    }
}

/// Number of roots of `f` in P^1(Z/mZ) for squarefree m.
pub fn omega(f: &BinaryCubicForm, m: u64) -> u64 {
    factor(m).iter().map(|&(p, _)| splitting_type(f, p).1.omega).product()
}

/// Number of simple roots of `f` in P^1(Z/mZ) for squarefree m.
pub fn omega_simple(f: &BinaryCubicForm, m: u64) -> u64 {
    factor(m).iter().map(|&(p, _)| splitting_type(f, p).1.omega_simple).product()
}

/// Matrix whose first row lifts `alpha`; it moves `alpha` to `[1:0]`.
fn to_infinity(alpha: P1Point) -> Gl2 {
    if alpha.y == 0 {
        Gl2::IDENTITY
    } else {
        Gl2::new(alpha.x as i64, 1, -1, 0)
    }
}

/// Whether `alpha` is a root of `f` mod p with `p^2 | f(alpha')` for every
/// lift, witnessed on the translate with `alpha` at infinity.
fn is_overring_root(f: &BinaryCubicForm, p: u64, alpha: P1Point) -> Result<Option<BinaryCubicForm>> {
    let h = act(&to_infinity(alpha), f)?;
    let pi = p as i64;
    if h.a % (pi * pi) == 0 && h.b % pi == 0 {
        Ok(Some(h))
    } else {
        Ok(None)
    }
}

/// Maximal at p: not a multiple of p and no double root qualifying for an
/// index-p overring.
pub fn is_maximal_at(f: &BinaryCubicForm, p: u64) -> bool {
    let (ty, data) = splitting_type(f, p);
    match ty {
        SplittingType::Zero0 => false,
        t if t.is_unramified() => true,
        _ => data
            .roots
            .iter()
            .filter(|r| r.1 >= 2)
            .all(|r| matches!(is_overring_root(f, p, r.0), Ok(None))),
    }
}

/// Maximal at every prime. `disc` is the discriminant of `f`.
pub fn is_maximal_with(f: &BinaryCubicForm, disc_factors: &[(u64, u32)]) -> bool {
    disc_factors.iter().filter(|&&(_, e)| e >= 2).all(|&(p, _)| is_maximal_at(f, p))
}

pub fn is_maximal(f: &BinaryCubicForm) -> Result<bool> {
    let disc = f.discriminant()?;
    if disc == 0 {
        return Err(Error::InvalidInput("zero discriminant".into()));
    }
    Ok(is_maximal_with(f, &factor(disc.unsigned_abs() as u64)))
}

/// Form of the index-p overring attached to a qualifying double root.
pub fn overring_step(f: &BinaryCubicForm, p: u64, alpha: P1Point) -> Result<BinaryCubicForm> {
    let h = is_overring_root(f, p, alpha)?
        .ok_or_else(|| Error::InvalidRoot(format!("{alpha:?} does not give an index-{p} overring of {f}")))?;
    let pi = p as i64;
    Ok(BinaryCubicForm::new(
        h.a / (pi * pi),
        h.b / pi,
        h.c,
        h.d.checked_mul(pi).ok_or(Error::Overflow("overring_step"))?,
    ))
}

/// Form of the index-p subring of `R_g` attached to the root `alpha`.
pub fn subring(g: &BinaryCubicForm, p: u64, alpha: P1Point) -> Result<BinaryCubicForm> {
    let h = act(&to_infinity(alpha), g)?;
    let pi = p as i64;
    if h.a % pi != 0 {
        return Err(Error::InvalidRoot(format!("{alpha:?} is not a root of {g} mod {p}")));
    }
    let ov = || Error::Overflow("subring");
    Ok(BinaryCubicForm::new(
        h.a / pi,
        h.b,
        h.c.checked_mul(pi).ok_or_else(ov)?,
        h.d.checked_mul(pi * pi).ok_or_else(ov)?,
    ))
}

/// Whether `alpha` is fixed by `s` acting on P^1(F_p) (row vectors).
pub fn fixes_point(s: &Gl2, alpha: P1Point, p: u64) -> bool {
    let (x, y) = (alpha.x as i64, alpha.y as i64);
    P1Point::normalize(x * s.p + y * s.r, x * s.q + y * s.s, p) == Some(alpha)
}

/// Climb to the maximal order through index-p overrings.
pub fn maximalize(f: &BinaryCubicForm) -> Result<MaximalizationResult> {
    if !crate::forms::is_irreducible(f)? {
        return Err(Error::InvalidInput(format!("{f} is reducible")));
    }
    let disc = f.discriminant()?;
    let mut cur = *f;
    let mut index = 1u64;
    for (p, e) in factor(disc.unsigned_abs() as u64) {
        if e < 2 {
            continue;
        }
        loop {
            let (ty, data) = splitting_type(&cur, p);
            if ty == SplittingType::Zero0 {
                let pi = p as i64;
                cur = BinaryCubicForm::new(cur.a / pi, cur.b / pi, cur.c / pi, cur.d / pi);
                index *= p * p;
                continue;
            }
            let mut stepped = false;
            for (alpha, m) in data.roots {
                if m >= 2 {
                    if let Some(_) = is_overring_root(&cur, p, alpha)? {
                        cur = overring_step(&cur, p, alpha)?;
                        index *= p;
                        stepped = true;
                        break;
                    }
                }
            }
            if !stepped {
                break;
            }
        }
    }
    let i2 = (index as i128) * (index as i128);
    debug_assert_eq!(disc % i2, 0);
    let fd = disc / i2;
    Ok(MaximalizationResult { maximal_form: cur, index, field_discriminant: fd as i64 })
}

/// Index `[O_K : R_f]`.
pub fn index(f: &BinaryCubicForm) -> Result<u64> {
    Ok(maximalize(f)?.index)
}

/// Both sides of the switching identity for squarefree `q` with a sharp
/// cutoff `|Delta| < x`, scaled by 6 so they are integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwitchingReport {
    pub q: u64,
    pub x: u64,
    pub sign: i32,
    pub lhs_times6: i64,
    pub rhs_times6: i64,
    pub pairs_checked: u64,
    /// Pairs where `|Stab(f)|` differs from the stabilizer of the pair `(g, alpha)`.
    pub pair_stab_mismatches: u64,
    /// Pairs where `|Stab(f)|` differs from `|Stab(g)|` itself.
    pub literal_stab_mismatches: u64,
}

impl SwitchingReport {
    pub fn equal(&self) -> bool {
        self.lhs_times6 == self.rhs_times6
    }
}

/// Evaluate both sides of the switching identity over a precomputed list
/// of orbit representatives of one sign with `|Delta| < x`.
pub fn switching_check_with(q: u64, x: u64, sign: i32, orbits: &[OrbitRecord]) -> Result<SwitchingReport> {
    if mobius(q) == 0 {
        return Err(Error::InvalidInput(format!("q = {q} is not squarefree")));
    }
    let primes: Vec<u64> = factor(q).iter().map(|&(p, _)| p).collect();
    let weight = |stab: u32| 6 / stab as i64;
    let mut lhs = 0i64;
    for r in orbits {
        if r.disc.unsigned_abs() < x && primes.iter().all(|&p| !is_maximal_at(&r.form, p)) {
            lhs += weight(r.stab);
        }
    }
    let q4 = (q as u128).pow(4);
    let mut rhs = 0i64;
    for k in divisors(q) {
        for l in divisors(q / k) {
            let mu = mobius(l);
            if mu == 0 {
                continue;
            }
            let kl = k * l;
            for r in orbits {
                // q^4 |Delta| / k^2 < x.
                if q4 * (r.disc.unsigned_abs() as u128) < (x as u128) * (k as u128) * (k as u128) {
                    rhs += mu * omega(&r.form, kl) as i64 * weight(r.stab);
                }
            }
        }
    }
    let mut pairs = 0u64;
    let mut pair_bad = 0u64;
    let mut literal_bad = 0u64;
    for &p in &primes {
        for r in orbits {
            if (r.disc.unsigned_abs() as u128) * (p as u128 * p as u128) >= x as u128 {
                continue;
            }
            let stab_g = crate::forms::stabilizer(&r.form)?;
            for alpha in P1Point::all(p) {
                let f = match subring(&r.form, p, alpha) {
                    Ok(f) => f,
                    Err(Error::InvalidRoot(_)) => continue,
                    Err(e) => return Err(e),
                };
                if f.content() % p as i64 == 0 {
                    continue;
                }
                pairs += 1;
                let sf = crate::forms::stabilizer_order(&f)?;
                let pair_stab = stab_g.iter().filter(|s| fixes_point(s, alpha, p)).count() as u32;
                if sf != pair_stab {
                    pair_bad += 1;
                }
                if sf != r.stab {
                    literal_bad += 1;
                }
            }
        }
    }
    Ok(SwitchingReport {
        q,
        x,
        sign,
        lhs_times6: lhs,
        rhs_times6: rhs,
        pairs_checked: pairs,
        pair_stab_mismatches: pair_bad,
        literal_stab_mismatches: literal_bad,
    })
}

/// Switching identity at `x` for one sign, enumerating orbits internally.
pub fn switching_check(q: u64, x: u64, sign: i32) -> Result<SwitchingReport> {
    let orbits = crate::forms::enumerate_orbits(x, sign)?;
    switching_check_with(q, x, sign, &orbits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_examples() {
        let f = BinaryCubicForm::new(1, 0, -1, 0);
        let (t, d) = splitting_type(&f, 5);
        assert_eq!(t, SplittingType::Split111);
        let pts: Vec<P1Point> = d.roots.iter().map(|r| r.0).collect();
        assert_eq!(pts, vec![P1Point::affine(0), P1Point::affine(1), P1Point::affine(4)]);
        let g = BinaryCubicForm::new(1, 0, -1, -1);
        assert_eq!(splitting_type(&g, 23).0, SplittingType::Ramified1_21);
        assert!(is_maximal_at(&g, 23));
        assert_eq!(splitting_type(&g.scale(7).unwrap(), 7).0, SplittingType::Zero0);
        assert!(!is_maximal_at(&BinaryCubicForm::new(4, 2, 1, 1), 2));
        for p in [2, 3, 5] {
            let pp = p as i64;
            assert!(!is_maximal_at(&BinaryCubicForm::new(pp * pp, pp, 1, 1), p));
        }
        let m = maximalize(&BinaryCubicForm::new(4, 2, 1, 1)).unwrap();
        assert_eq!(m.index % 2, 0);
    }

    #[test]
    fn fast_type_matches_scan() {
        for a in -4..=4 {
            for b in -4..=4 {
                for c in -4..=4 {
                    for d in -4..=4 {
                        let f = BinaryCubicForm::new(a, b, c, d);
                        let disc = f.disc();
                        for p in [2u64, 3, 5, 7, 11, 13, 101] {
                            assert_eq!(splitting_type_fast(&f, p, disc), splitting_type(&f, p).0, "{f} at {p}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gdetermine_transitions() {
        // Type (111) at 5, subring at a root gives (1^21).
        let g = BinaryCubicForm::new(1, 0, -1, 0);
        for (alpha, _) in splitting_type(&g, 5).1.roots {
            let f = subring(&g, 5, alpha).unwrap();
            assert_eq!(splitting_type(&f, 5).0, SplittingType::Ramified1_21);
            let back = overring_step(&f, 5, P1Point::affine(0))
                .or_else(|_| {
                    let roots = splitting_type(&f, 5).1.roots;
                    let dbl = roots.iter().find(|r| r.1 == 2).unwrap().0;
                    overring_step(&f, 5, dbl)
                })
                .unwrap();
            assert!(crate::forms::equivalent(&back, &g).unwrap());
        }
    }
}
