//! Integral binary cubic forms, the twisted GL2 action, reduction theory and
//! enumeration of GL2(Z)-orbits of bounded discriminant.
//!
//! A form `(a, b, c, d)` stands for `a x^3 + b x^2 y + c x y^2 + d y^3`. The
//! group acts on the right: `(g.f)(x, y) = det(g)^-1 f((x, y) g)`.
//!
//! Reduction uses a positive definite quadratic covariant. For positive
//! discriminant this is the Hessian, which has integer coefficients. For
//! negative discriminant it is the quadratic factor over the reals (the
//! factor belonging to the complex pair of roots), handled in floating
//! point with a tolerance; orbit identification stays exact because the
//! final tie-break compares integer forms.

use crate::arith::divisors;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::{BufRead, Write};
use std::path::Path;

/// Largest discriminant bound accepted by [`enumerate_orbits`].
pub const MAX_ENUM_DISC: u64 = 100_000_000;

/// Version tag of the orbit enumeration and cache layout.
pub const CACHE_VERSION: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryCubicForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl BinaryCubicForm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        BinaryCubicForm { a, b, c, d }
    }

    pub const ZERO: BinaryCubicForm = BinaryCubicForm::new(0, 0, 0, 0);

    pub fn coeffs(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn from_coeffs(v: [i64; 4]) -> Self {
        BinaryCubicForm::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0 && self.d == 0
    }

    /// `b^2c^2 - 4ac^3 - 4b^3d - 27a^2d^2 + 18abcd`, with overflow detection.
    pub fn discriminant(&self) -> Result<i128> {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        let ov = || Error::Overflow("discriminant");
        let m = |x: i128, y: i128| x.checked_mul(y).ok_or_else(ov);
        let t1 = m(m(b, b)?, m(c, c)?)?;
        let t2 = m(m(4, a)?, m(m(c, c)?, c)?)?;
        let t3 = m(m(4, d)?, m(m(b, b)?, b)?)?;
        let t4 = m(27, m(m(a, a)?, m(d, d)?)?)?;
        let t5 = m(m(18, m(a, b)?)?, m(c, d)?)?;
        t1.checked_sub(t2)
            .and_then(|v| v.checked_sub(t3))
            .and_then(|v| v.checked_sub(t4))
            .and_then(|v| v.checked_add(t5))
            .ok_or_else(ov)
    }

    /// Discriminant for forms whose coefficients are known to be small
    /// (every enumerated representative); panics in debug builds on overflow.
    #[inline]
    pub fn disc(&self) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d
    }

    #[inline]
    pub fn eval(&self, x: i128, y: i128) -> i128 {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        ((a * x + b * y) * x + c * y * y) * x + d * y * y * y
    }

    pub fn neg(&self) -> Self {
        BinaryCubicForm::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn scale(&self, k: i64) -> Result<Self> {
        let m = |x: i64| x.checked_mul(k).ok_or(Error::Overflow("scale"));
        Ok(BinaryCubicForm::new(m(self.a)?, m(self.b)?, m(self.c)?, m(self.d)?))
    }

    /// Content (gcd of the coefficients).
    pub fn content(&self) -> i64 {
        let g = crate::arith::gcd_i64(self.a, self.b);
        let g = crate::arith::gcd_i64(g, self.c);
        crate::arith::gcd_i64(g, self.d)
    }

    /// Hessian covariant `(b^2-3ac) x^2 + (bc-9ad) xy + (c^2-3bd) y^2`.
    pub fn hessian(&self) -> (i128, i128, i128) {
        let (a, b, c, d) = (self.a as i128, self.b as i128, self.c as i128, self.d as i128);
        (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)
    }

    /// First nonzero coefficient is positive.
    pub fn is_sign_normalized(&self) -> bool {
        for v in self.coeffs() {
            if v != 0 {
                return v > 0;
            }
        }
        true
    }

    pub fn sign_normalized(&self) -> Self {
        if self.is_sign_normalized() {
            *self
        } else {
            self.neg()
        }
    }

    /// Reduction modulo `n`, coefficients in `[0, n)`.
    pub fn reduce_mod(&self, n: u64) -> [u64; 4] {
        self.coeffs().map(|v| crate::arith::modp(v, n))
    }
}

impl std::fmt::Display for BinaryCubicForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.a, self.b, self.c, self.d)
    }
}

/// A 2x2 integer matrix `[[p, q], [r, s]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gl2 {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub s: i64,
}

impl Gl2 {
    pub const fn new(p: i64, q: i64, r: i64, s: i64) -> Self {
        Gl2 { p, q, r, s }
    }
    pub const IDENTITY: Gl2 = Gl2::new(1, 0, 0, 1);
    pub const SWAP: Gl2 = Gl2::new(0, 1, 1, 0);
    pub const MINUS_ONE: Gl2 = Gl2::new(-1, 0, 0, -1);

    pub fn det(&self) -> i64 {
        self.p * self.s - self.q * self.r
    }

    pub fn mul(&self, o: &Gl2) -> Gl2 {
        Gl2::new(
            self.p * o.p + self.q * o.r,
            self.p * o.q + self.q * o.s,
            self.r * o.p + self.s * o.r,
            self.r * o.q + self.s * o.s,
        )
    }

    /// Inverse in GL2(Z); requires det = +-1.
    pub fn inverse(&self) -> Result<Gl2> {
        let d = self.det();
        if d != 1 && d != -1 {
            return Err(Error::InvalidElement(format!("determinant {d} is not a unit")));
        }
        Ok(Gl2::new(self.s * d, -self.q * d, -self.r * d, self.p * d))
    }
}

/// Coefficients of `f((x, y) g)` before the determinant twist, as i128.
fn substitute(g: &Gl2, f: &BinaryCubicForm) -> Option<[i128; 4]> {
    let (p, q, r, s) = (g.p as i128, g.q as i128, g.r as i128, g.s as i128);
    let (a, b, c, d) = (f.a as i128, f.b as i128, f.c as i128, f.d as i128);
    // X = p x + r y, Y = q x + s y.
    let x3 = [p * p * p, 3 * p * p * r, 3 * p * r * r, r * r * r];
    let x2y = [p * p * q, p * p * s + 2 * p * r * q, 2 * p * r * s + r * r * q, r * r * s];
    let xy2 = [p * q * q, 2 * p * q * s + r * q * q, p * s * s + 2 * r * q * s, r * s * s];
    let y3 = [q * q * q, 3 * q * q * s, 3 * q * s * s, s * s * s];
    let mut out = [0i128; 4];
    for i in 0..4 {
        out[i] = a
            .checked_mul(x3[i])?
            .checked_add(b.checked_mul(x2y[i])?)?
            .checked_add(c.checked_mul(xy2[i])?)?
            .checked_add(d.checked_mul(y3[i])?)?;
    }
    Some(out)
}

/// Twisted action of GL2(Z).
pub fn act(g: &Gl2, f: &BinaryCubicForm) -> Result<BinaryCubicForm> {
    let det = g.det();
    if det != 1 && det != -1 {
        return Err(Error::InvalidElement(format!("determinant {det} is not +-1")));
    }
    let v = substitute(g, f).ok_or(Error::Overflow("act"))?;
    let conv = |x: i128| i64::try_from(x * det as i128).map_err(|_| Error::Overflow("act"));
    Ok(BinaryCubicForm::new(conv(v[0])?, conv(v[1])?, conv(v[2])?, conv(v[3])?))
}

/// Unchecked action for small matrices and small forms in hot loops.
#[inline]
fn act_small(g: &Gl2, f: &BinaryCubicForm) -> BinaryCubicForm {
    let v = substitute(g, f).expect("small action overflow");
    let det = g.det() as i128;
    BinaryCubicForm::new(
        (v[0] * det) as i64,
        (v[1] * det) as i64,
        (v[2] * det) as i64,
        (v[3] * det) as i64,
    )
}

/// Twisted action on forms modulo `n`; `g` must be invertible mod `n`.
pub fn act_mod(g: &Gl2, f: &[u64; 4], n: u64) -> Result<[u64; 4]> {
    let det = crate::arith::modp(g.det(), n);
    let inv = crate::arith::invmod(det, n)
        .ok_or_else(|| Error::InvalidElement(format!("determinant not a unit mod {n}")))?;
    let gm = Gl2::new(
        crate::arith::modp(g.p, n) as i64,
        crate::arith::modp(g.q, n) as i64,
        crate::arith::modp(g.r, n) as i64,
        crate::arith::modp(g.s, n) as i64,
    );
    let fm = BinaryCubicForm::new(f[0] as i64, f[1] as i64, f[2] as i64, f[3] as i64);
    let v = substitute(&gm, &fm).ok_or(Error::Overflow("act_mod"))?;
    Ok(v.map(|x| crate::arith::mulmod(x.rem_euclid(n as i128) as u64, inv, n)))
}

/// A dual form `f* = (a*, b*, c*, d*)`, identified with the integral form
/// `a* x^3 + 3 b* x^2 y + 3 c* x y^2 + d* y^3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DualForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl DualForm {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        DualForm { a, b, c, d }
    }
}

/// Duality pairing `[f, f*] = d a* - c b* + b c* - a d*` reduced mod `n`.
pub fn dual_pairing(f: &BinaryCubicForm, fs: &DualForm, n: u64) -> u64 {
    let v = f.d as i128 * fs.a as i128 - f.c as i128 * fs.b as i128 + f.b as i128 * fs.c as i128
        - f.a as i128 * fs.d as i128;
    v.rem_euclid(n as i128) as u64
}

/// Action on dual forms modulo `n`, compatible with the pairing:
/// `[g.f, g.f*] = det(g) [f, f*]`.
pub fn act_dual_mod(g: &Gl2, fs: &[u64; 4], n: u64) -> Result<[u64; 4]> {
    let det = crate::arith::modp(g.det(), n);
    let inv = crate::arith::invmod(det, n)
        .ok_or_else(|| Error::InvalidElement(format!("determinant not a unit mod {n}")))?;
    let gm = Gl2::new(
        crate::arith::modp(g.p, n) as i64,
        crate::arith::modp(g.q, n) as i64,
        crate::arith::modp(g.r, n) as i64,
        crate::arith::modp(g.s, n) as i64,
    );
    let lift = BinaryCubicForm::new(fs[0] as i64, 3 * fs[1] as i64, 3 * fs[2] as i64, fs[3] as i64);
    let v = substitute(&gm, &lift).ok_or(Error::Overflow("act_dual_mod"))?;
    debug_assert!(v[1] % 3 == 0 && v[2] % 3 == 0);
    let w = [v[0], v[1] / 3, v[2] / 3, v[3]];
    Ok(w.map(|x| crate::arith::mulmod(x.rem_euclid(n as i128) as u64, inv, n)))
}

// ---------------------------------------------------------------------------
// Real roots

/// Real roots of the monic cubic `t^3 + b t^2 + c t + d`, Newton-polished.
pub fn monic_cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let mut roots = Vec::with_capacity(3);
    if disc > 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let th = arg.acos() / 3.0;
        for k in 0..3 {
            roots.push(m * (th - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift);
        }
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let aa = -q.signum() * (q.abs() / 2.0 + s).cbrt();
        let z = if aa != 0.0 { aa - p / (3.0 * aa) } else { 0.0 };
        roots.push(z + shift);
    }
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = ((*r + b) * *r + c) * *r + d;
            let fp = (3.0 * *r + 2.0 * b) * *r + c;
            if fp == 0.0 {
                break;
            }
            let step = f / fp;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Real roots `t` of `f(t, 1)`; requires `a != 0`.
pub fn real_roots(f: &BinaryCubicForm) -> Vec<f64> {
    let a = f.a as f64;
    monic_cubic_real_roots(f.b as f64 / a, f.c as f64 / a, f.d as f64 / a)
}

// ---------------------------------------------------------------------------
// Irreducibility and reduction

/// Irreducible over Q: no root in P^1(Q).
pub fn is_irreducible(f: &BinaryCubicForm) -> Result<bool> {
    if f.is_zero() {
        return Err(Error::InvalidInput("zero form".into()));
    }
    if f.a == 0 {
        return Ok(false);
    }
    if f.d == 0 {
        return Ok(false);
    }
    let dens = divisors(f.a.unsigned_abs());
    for t in real_roots(f) {
        for &s in &dens {
            let r = (t * s as f64).round();
            if !r.is_finite() || r.abs() > 1e15 {
                continue;
            }
            let r = r as i128;
            for rr in [r - 1, r, r + 1] {
                if f.eval(rr, s as i128) == 0 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Position of a form relative to the reduction domain of its covariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduced {
    No,
    Interior,
    Boundary,
}

const COV_EPS: f64 = 1e-9;

/// Positive definite covariant quadratic `P x^2 + Q xy + R y^2`, scaled so
/// that reduction can be tested; exact when possible.
#[derive(Clone, Copy, Debug)]
enum Covariant {
    Exact(i128, i128, i128),
    Approx(f64, f64, f64),
}

fn covariant(f: &BinaryCubicForm, disc: i128) -> Covariant {
    if disc > 0 {
        let (p, q, r) = f.hessian();
        Covariant::Exact(p, q, r)
    } else if f.a == 0 {
        let sg = if f.b > 0 { 1 } else { -1 };
        Covariant::Exact(sg * f.b as i128, sg * f.c as i128, sg * f.d as i128)
    } else {
        let (bb, cc, dd) = (f.b as f64 / f.a as f64, f.c as f64 / f.a as f64, f.d as f64 / f.a as f64);
        let th = monic_cubic_real_roots(bb, cc, dd)[0];
        let p = bb + th;
        let r = if th.abs() > 1.0 { -dd / th } else { cc + th * p };
        Covariant::Approx(1.0, p, r)
    }
}

fn status_of(cov: Covariant) -> Reduced {
    match cov {
        Covariant::Exact(p, q, r) => {
            if !(q >= 0 && q <= p && p <= r) {
                Reduced::No
            } else if q > 0 && q < p && p < r {
                Reduced::Interior
            } else {
                Reduced::Boundary
            }
        }
        Covariant::Approx(p, q, r) => {
            let (q, r) = (q / p, r / p);
            if q < -COV_EPS || q > 1.0 + COV_EPS || r < 1.0 - COV_EPS {
                Reduced::No
            } else if q > COV_EPS && q < 1.0 - COV_EPS && r > 1.0 + COV_EPS {
                Reduced::Interior
            } else {
                Reduced::Boundary
            }
        }
    }
}

/// Reduction status of a form with nonzero discriminant.
pub fn reduction_status(f: &BinaryCubicForm) -> Result<Reduced> {
    let disc = f.discriminant()?;
    if disc == 0 {
        return Err(Error::InvalidInput("zero discriminant".into()));
    }
    Ok(status_of(covariant(f, disc)))
}

/// GL2(Z) elements with entries in {-1, 0, 1}; contains every transition
/// between reduced forms and every automorphism of a reduced covariant.
pub fn small_matrices() -> &'static [Gl2] {
    use std::sync::OnceLock;
    static S: OnceLock<Vec<Gl2>> = OnceLock::new();
    S.get_or_init(|| {
        let mut v = Vec::new();
        for p in -1..=1 {
            for q in -1..=1 {
                for r in -1..=1 {
                    for s in -1..=1 {
                        let g = Gl2::new(p, q, r, s);
                        if g.det().abs() == 1 {
                            v.push(g);
                        }
                    }
                }
            }
        }
        v
    })
}

/// Canonical representative among reduced neighbours of a reduced `f`:
/// the lexicographically least sign-normalized form.
fn canonical_from_reduced(f: &BinaryCubicForm, disc: i128) -> BinaryCubicForm {
    let mut best: Option<BinaryCubicForm> = None;
    for g in small_matrices() {
        let h = act_small(g, f);
        if !h.is_sign_normalized() {
            continue;
        }
        if status_of(covariant(&h, disc)) == Reduced::No {
            continue;
        }
        if best.map_or(true, |b| h < b) {
            best = Some(h);
        }
    }
    best.expect("reduced form has a reduced sign-normalized neighbour")
}

fn stabilizer_of_reduced(f: &BinaryCubicForm, status: Reduced) -> u32 {
    if status == Reduced::Interior {
        return 1;
    }
    small_matrices().iter().filter(|g| act_small(g, f) == *f).count() as u32
}

/// Reduce `f` into the reduction domain. Returns the reduced form and the
/// matrix `m` with `m.f` equal to it. The action is a left action:
/// `g.(h.f) = (gh).f`.
pub fn reduce(f: &BinaryCubicForm) -> Result<(BinaryCubicForm, Gl2)> {
    let disc = f.discriminant()?;
    if disc == 0 {
        return Err(Error::InvalidInput("zero discriminant".into()));
    }
    let mut cur = *f;
    let mut acc = Gl2::IDENTITY;
    for _ in 0..10_000 {
        let (p, q, r) = match covariant(&cur, disc) {
            Covariant::Exact(p, q, r) => (p as f64, q as f64, r as f64),
            Covariant::Approx(p, q, r) => (p, q, r),
        };
        let step = if q.abs() > p * (1.0 + COV_EPS) {
            let k = (-q / (2.0 * p)).round() as i64;
            Some(Gl2::new(1, 0, k, 1))
        } else if p > r * (1.0 + COV_EPS) {
            Some(Gl2::SWAP)
        } else if q < -COV_EPS * p {
            Some(Gl2::new(1, 0, 0, -1))
        } else {
            None
        };
        match step {
            Some(g) => {
                cur = act(&g, &cur)?;
                acc = g.mul(&acc);
            }
            None => {
                if status_of(covariant(&cur, disc)) == Reduced::No {
                    // Exact covariant on the boundary of the float tolerance.
                    let (p, q, r) = cur.hessian();
                    let g = if q < 0 {
                        Gl2::new(1, 0, 0, -1)
                    } else if q > p {
                        Gl2::new(1, 0, -1, 1)
                    } else if p > r {
                        Gl2::SWAP
                    } else {
                        return Err(Error::Precision(format!("reduction stalled at {cur}")));
                    };
                    cur = act(&g, &cur)?;
                    acc = g.mul(&acc);
                    continue;
                }
                return Ok((cur, acc));
            }
        }
    }
    Err(Error::Precision(format!("reduction did not terminate for {f}")))
}

/// Canonical representative of the GL2(Z)-orbit of `f`.
pub fn canonical(f: &BinaryCubicForm) -> Result<BinaryCubicForm> {
    let (g, _) = reduce(f)?;
    let disc = g.discriminant()?;
    Ok(canonical_from_reduced(&g, disc))
}

/// Whether two forms lie in the same GL2(Z)-orbit.
pub fn equivalent(f: &BinaryCubicForm, g: &BinaryCubicForm) -> Result<bool> {
    Ok(canonical(f)? == canonical(g)?)
}

/// A matrix carrying `f` to its canonical representative.
pub fn to_canonical(f: &BinaryCubicForm) -> Result<(BinaryCubicForm, Gl2)> {
    let (g, m) = reduce(f)?;
    let c = canonical(&g)?;
    for s in small_matrices() {
        if act_small(s, &g) == c {
            return Ok((c, s.mul(&m)));
        }
    }
    Err(Error::Precision(format!("no transition to canonical form for {f}")))
}

/// Order of the stabilizer of `f` in GL2(Z).
pub fn stabilizer_order(f: &BinaryCubicForm) -> Result<u32> {
    if f.is_zero() {
        return Err(Error::InvalidInput("zero form".into()));
    }
    let (g, _) = reduce(f)?;
    let disc = g.discriminant()?;
    Ok(stabilizer_of_reduced(&g, status_of(covariant(&g, disc))))
}

/// Stabilizer elements of `f` in GL2(Z), as matrices acting on `f` itself.
pub fn stabilizer(f: &BinaryCubicForm) -> Result<Vec<Gl2>> {
    let (g, m) = reduce(f)?;
    let minv = m.inverse()?;
    let mut out = Vec::new();
    for s in small_matrices() {
        if act_small(s, &g) == g {
            // m.f = g and s.g = g, so (m^-1 s m).f = f.
            out.push(minv.mul(s).mul(&m));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Enumeration

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub form: BinaryCubicForm,
    pub disc: i64,
    pub stab: u32,
    pub irreducible: bool,
}

fn order_key(r: &OrbitRecord) -> (u64, BinaryCubicForm) {
    (r.disc.unsigned_abs(), r.form)
}

impl PartialOrd for OrbitRecord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrbitRecord {
    fn cmp(&self, other: &Self) -> Ordering {
        order_key(self).cmp(&order_key(other))
    }
}

#[inline]
fn consider(f: BinaryCubicForm, x: i128, sign: i32, out: &mut Vec<OrbitRecord>) {
    let disc = f.disc();
    if disc == 0 || (disc > 0) != (sign > 0) || disc.abs() >= x {
        return;
    }
    let cov = covariant(&f, disc);
    let st = status_of(cov);
    if st == Reduced::No {
        return;
    }
    if st == Reduced::Boundary && canonical_from_reduced(&f, disc) != f {
        return;
    }
    let stab = stabilizer_of_reduced(&f, st);
    let irreducible = is_irreducible(&f).unwrap_or(false);
    out.push(OrbitRecord { form: f, disc: disc as i64, stab, irreducible });
}

fn quad_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let r1 = (-b - s) / (2.0 * a);
    let r2 = (-b + s) / (2.0 * a);
    Some((r1.min(r2), r1.max(r2)))
}

fn enumerate_slice_pos(a: i64, x: i128) -> Vec<OrbitRecord> {
    let xf = x as f64;
    let x4 = xf.powf(0.25);
    let mut out = Vec::new();
    if a == 0 {
        let bmax = x4.floor() as i64 + 1;
        for b in 1..=bmax {
            for c in 0..=b {
                // R >= P and 0 < Delta < X.
                let hi = ((c * c - b * b) as f64 / (3.0 * b as f64)).floor() as i64 + 1;
                let lo = (((c * c * b * b) as f64 - xf) / (4.0 * (b * b * b) as f64)).floor() as i64 - 1;
                for d in lo..=hi {
                    consider(BinaryCubicForm::new(0, b, c, d), x, 1, &mut out);
                }
            }
        }
        return out;
    }
    let sx = xf.sqrt();
    let bspan = (1.5 * a as f64 + x4).ceil() as i64 + 1;
    for b in -bspan..=bspan {
        let b2 = (b * b) as f64;
        let clo = ((b2 - sx) / (3.0 * a as f64)).floor() as i64 - 1;
        let chi = ((b2 - 1.0) / (3.0 * a as f64)).floor() as i64 + 1;
        for c in clo..=chi {
            let p = b * b - 3 * a * c;
            if p < 1 || (p as f64) > sx + 1.0 {
                continue;
            }
            // 0 <= Q = bc - 9ad <= P.
            let bc = b * c;
            let dlo = (bc - p).div_euclid(9 * a) - 1;
            let dhi = bc.div_euclid(9 * a) + 1;
            for d in dlo..=dhi {
                let q = bc - 9 * a * d;
                if q < 0 || q > p {
                    continue;
                }
                if c * c - 3 * b * d < p {
                    continue;
                }
                consider(BinaryCubicForm::new(a, b, c, d), x, 1, &mut out);
            }
        }
    }
    out
}

fn enumerate_slice_neg(a: i64, x: i128) -> Vec<OrbitRecord> {
    let xf = x as f64;
    let x4 = xf.powf(0.25);
    let mut out = Vec::new();
    if a == 0 {
        let bmax = (xf / 3.0).powf(0.25).floor() as i64 + 1;
        for b in 1..=bmax {
            for c in 0..=b {
                let hi = ((xf / (b * b) as f64 + (c * c) as f64) / (4.0 * b as f64)).floor() as i64 + 1;
                for d in b..=hi {
                    consider(BinaryCubicForm::new(0, b, c, d), x, -1, &mut out);
                }
            }
        }
        return out;
    }
    let af = a as f64;
    let y2 = (xf / (4.0 * af.powi(4))).powf(1.0 / 3.0);
    let bspan = (1.5 * af + x4 / 3f64.powf(0.25)).ceil() as i64 + 1;
    for b in -bspan..=bspan {
        let clo = -b.abs() - 1;
        let chi = (af * y2).ceil() as i64 + b.abs() + 1;
        for c in clo..=chi {
            let (bf, cf) = (b as f64, c as f64);
            let qa = -27.0 * af * af;
            let qb = 18.0 * af * bf * cf - 4.0 * bf * bf * bf;
            let qc = bf * bf * cf * cf - 4.0 * af * cf * cf * cf;
            // -X < Delta(d) < 0.
            let outer = match quad_roots(qa, qb, qc + xf) {
                Some(r) => r,
                None => continue,
            };
            let lo = outer.0.floor() as i64 - 1;
            let hi = outer.1.ceil() as i64 + 1;
            match quad_roots(qa, qb, qc) {
                Some((r1, r2)) => {
                    for d in lo..=(r1.ceil() as i64 + 1) {
                        consider(BinaryCubicForm::new(a, b, c, d), x, -1, &mut out);
                    }
                    for d in (r2.floor() as i64 - 1).max(r1.ceil() as i64 + 2)..=hi {
                        consider(BinaryCubicForm::new(a, b, c, d), x, -1, &mut out);
                    }
                }
                None => {
                    for d in lo..=hi {
                        consider(BinaryCubicForm::new(a, b, c, d), x, -1, &mut out);
                    }
                }
            }
        }
    }
    out
}

/// Every GL2(Z)-orbit of forms with `0 < sign * Delta < x`, one canonical
/// representative each, sorted by `|Delta|` and then coefficients.
pub fn enumerate_orbits(x: u64, sign: i32) -> Result<Vec<OrbitRecord>> {
    if x > MAX_ENUM_DISC {
        return Err(Error::Config(format!("discriminant bound {x} exceeds {MAX_ENUM_DISC}")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Config(format!("sign must be +1 or -1, got {sign}")));
    }
    let xi = x as i128;
    let xf = x as f64;
    let amax = if sign > 0 {
        (64.0 * xf / 2916.0).powf(0.25).floor() as i64 + 1
    } else {
        (16.0 * xf / 27.0).powf(0.25).floor() as i64 + 1
    };
    let mut slices: Vec<Vec<OrbitRecord>> = (0..=amax)
        .into_par_iter()
        .map(|a| if sign > 0 { enumerate_slice_pos(a, xi) } else { enumerate_slice_neg(a, xi) })
        .collect();
    let mut all: Vec<OrbitRecord> = slices.drain(..).flatten().collect();
    all.par_sort_unstable();
    all.dedup();
    Ok(all)
}

// ---------------------------------------------------------------------------
// Orbit cache (JSON lines)

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct CacheHeader {
    version: u32,
    sign: i32,
    max_disc: u64,
    count: usize,
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    disc: i64,
    stab: u32,
    irreducible: bool,
}

/// File name of the cache entry for `(sign, x)`.
pub fn cache_file_name(sign: i32, x: u64) -> String {
    let s = if sign > 0 { "pos" } else { "neg" };
    format!("orbits_{s}_{x}_v{CACHE_VERSION}.jsonl")
}

/// Write records as JSON lines: a header object, then one object per orbit.
pub fn write_orbit_cache(path: &Path, sign: i32, x: u64, records: &[OrbitRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    let header = CacheHeader { version: CACHE_VERSION, sign, max_disc: x, count: records.len() };
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::Cache(e.to_string()))?;
    w.write_all(b"\n")?;
    for r in records {
        let line = CacheLine {
            a: r.form.a,
            b: r.form.b,
            c: r.form.c,
            d: r.form.d,
            disc: r.disc,
            stab: r.stab,
            irreducible: r.irreducible,
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::Cache(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a cache file, refusing version or key mismatches.
pub fn read_orbit_cache(path: &Path, sign: i32, x: u64) -> Result<Vec<OrbitRecord>> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let head = lines.next().ok_or_else(|| Error::Cache("empty cache file".into()))??;
    let header: CacheHeader = serde_json::from_str(&head).map_err(|e| Error::Cache(e.to_string()))?;
    if header.version != CACHE_VERSION || header.sign != sign || header.max_disc != x {
        return Err(Error::Cache(format!(
            "cache {} has key (sign {}, X {}, v{}), expected (sign {sign}, X {x}, v{CACHE_VERSION}); \
             delete it or rerun `enumerate`",
            path.display(),
            header.sign,
            header.max_disc,
            header.version
        )));
    }
    let mut out = Vec::with_capacity(header.count);
    for line in lines {
        let line = line?;
        let l: CacheLine = serde_json::from_str(&line).map_err(|e| Error::Cache(e.to_string()))?;
        out.push(OrbitRecord {
            form: BinaryCubicForm::new(l.a, l.b, l.c, l.d),
            disc: l.disc,
            stab: l.stab,
            irreducible: l.irreducible,
        });
    }
    if out.len() != header.count {
        return Err(Error::Cache(format!("truncated cache: {} of {} records", out.len(), header.count)));
    }
    Ok(out)
}

/// Load from `dir` if present, else enumerate and store.
pub fn cached_orbits(dir: &Path, sign: i32, x: u64) -> Result<Vec<OrbitRecord>> {
    let path = dir.join(cache_file_name(sign, x));
    if path.exists() {
        return read_orbit_cache(&path, sign, x);
    }
    let recs = enumerate_orbits(x, sign)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    write_orbit_cache(&tmp, sign, x, &recs)?;
    std::fs::rename(&tmp, &path)?;
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discriminant_examples() {
        assert_eq!(BinaryCubicForm::new(1, 0, -1, 0).discriminant().unwrap(), 4);
        assert_eq!(BinaryCubicForm::new(1, 0, -1, -1).discriminant().unwrap(), -23);
        assert_eq!(BinaryCubicForm::ZERO.discriminant().unwrap(), 0);
        let huge = BinaryCubicForm::new(i64::MAX, i64::MAX, i64::MAX, i64::MAX);
        assert!(matches!(huge.discriminant(), Err(Error::Overflow(_))));
    }

    #[test]
    fn swap_action() {
        let f = BinaryCubicForm::new(2, 3, 5, 7);
        assert_eq!(act(&Gl2::SWAP, &f).unwrap(), BinaryCubicForm::new(-7, -5, -3, -2));
        assert_eq!(act(&Gl2::IDENTITY, &f).unwrap(), f);
        assert_eq!(act(&Gl2::MINUS_ONE, &f).unwrap(), f.neg());
        assert!(act(&Gl2::new(2, 0, 0, 1), &f).is_err());
    }

    #[test]
    fn irreducibility_and_stabilizers() {
        assert!(!is_irreducible(&BinaryCubicForm::new(1, 0, -1, 0)).unwrap());
        assert!(is_irreducible(&BinaryCubicForm::new(1, 0, -1, -1)).unwrap());
        assert!(!is_irreducible(&BinaryCubicForm::new(2, -3, 1, 0)).unwrap());
        assert!(!is_irreducible(&BinaryCubicForm::new(6, 1, -4, 1)).unwrap());
        let cyc = BinaryCubicForm::new(1, 1, -2, -1);
        assert_eq!(cyc.discriminant().unwrap(), 49);
        assert_eq!(stabilizer_order(&cyc).unwrap(), 3);
        assert!(is_irreducible(&BinaryCubicForm::ZERO).is_err());
    }

    #[test]
    fn small_enumerations_contain_examples() {
        let pos = enumerate_orbits(5, 1).unwrap();
        let target = canonical(&BinaryCubicForm::new(1, 0, -1, 0)).unwrap();
        assert!(pos.iter().any(|r| r.form == target && r.disc == 4));
        let neg = enumerate_orbits(24, -1).unwrap();
        let target = canonical(&BinaryCubicForm::new(1, 0, -1, -1)).unwrap();
        assert!(neg.iter().any(|r| r.form == target && r.disc == -23));
    }

    #[test]
    fn cache_round_trip() {
        let recs = enumerate_orbits(300, -1).unwrap();
        let dir = std::env::temp_dir().join(format!("cubicstat-cache-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(cache_file_name(-1, 300));
        write_orbit_cache(&path, -1, 300, &recs).unwrap();
        assert_eq!(read_orbit_cache(&path, -1, 300).unwrap(), recs);
        assert!(read_orbit_cache(&path, 1, 300).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
