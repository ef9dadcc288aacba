//! Special functions in double precision: log-gamma on the complex plane,
//! digamma, the Riemann zeta function on the real line, the prime zeta
//! function, and Gauss-Legendre nodes.

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// B_2, B_4, ..., B_26.
const BERNOULLI: [f64; 13] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
];

const STIRLING_SHIFT: f64 = 16.0;

/// Principal branch of log Gamma(z). Uses upward recurrence to |z| >= 16 and
/// the Stirling series; reflection for Re z < 1/2.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < STIRLING_SHIFT {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pw = inv;
    for (k, b) in BERNOULLI.iter().take(10).enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += pw * (b / (n * (n - 1.0)));
        pw *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

pub fn ln_gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re
}

/// Gamma on the real line (sign included).
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// Digamma psi(x) for real x > 0.
pub fn digamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "digamma needs x > 0");
    let mut acc = 0.0;
    while x < STIRLING_SHIFT {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pw = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI.iter().take(10).enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += b / n * pw;
        pw *= inv2;
    }
    acc + x.ln() - 0.5 / x - series
}

/// Riemann zeta for real s != 1 by Euler-Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s != 1.0, "zeta has a pole at 1");
    if s < 0.0 {
        // Functional equation keeps the tail well-conditioned.
        let t = 1.0 - s;
        return 2.0 * (2.0 * PI).powf(-t) * (PI * t / 2.0).cos() * gamma_real(t) * zeta(t);
    }
    if s > 60.0 {
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    let n = 20usize;
    let nf = n as f64;
    let mut sum = 0.0;
    for k in (1..n).rev() {
        sum += (k as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // sum_k B_2k / (2k)! * s (s+1) ... (s+2k-2) * N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = nf.powf(-s - 1.0);
    for (k, b) in BERNOULLI.iter().enumerate() {
        let term = b / fact * rising * npow;
        sum += term;
        let j = 2.0 * (k as f64 + 1.0);
        rising *= (s + j - 1.0) * (s + j);
        fact *= (j + 1.0) * (j + 2.0);
        npow /= nf * nf;
    }
    sum
}

/// Prime zeta P(s) = sum_p p^{-s} for real s > 1, via
/// P(s) = sum_k mu(k)/k log zeta(k s).
pub fn prime_zeta(s: f64) -> f64 {
    assert!(s > 1.0);
    let mut total = 0.0;
    for k in 1..200u64 {
        let ks = k as f64 * s;
        // terms are about 2^{-ks}/k
        if ks * std::f64::consts::LN_2 > 40.0 {
            break;
        }
        let mu = crate::arith::mobius(k);
        if mu != 0 {
            total += mu as f64 / k as f64 * zeta(ks).ln();
        }
    }
    total
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b].
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Quadrature {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for j in 0..panels {
            let mid = a + h * (j as f64 + 0.5);
            for k in 0..order {
                nodes.push(mid + 0.5 * h * x[k]);
                weights.push(0.5 * h * w[k]);
            }
        }
        Quadrature { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let mut s = KahanSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(*x));
        }
        s.value()
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(*x) * *w;
            re.add(v.re);
            im.add(v.im);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma_real(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma_real(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_real(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
        for t in [0.3, 2.0, 11.0, 40.0] {
            let g = ln_gamma(Complex64::new(0.5, t));
            let want = (PI / (PI * t).cosh()).ln();
            assert!((2.0 * g.re - want).abs() < 1e-12, "t={t}");
        }
        // Recurrence in the complex plane.
        let z = Complex64::new(0.3, 4.7);
        let lhs = ln_gamma(z + 1.0).exp();
        let rhs = z * ln_gamma(z).exp();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-14);
        assert!((zeta(0.0) + 0.5).abs() < 1e-15);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-14);
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-15);
        assert!(zeta(1.0 / 3.0) < 0.0);
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(0.5) + EULER_GAMMA + 2.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn prime_zeta_matches_direct_sum() {
        let direct: f64 = crate::arith::primes_up_to(2_000_000).iter().map(|&p| (p as f64).powi(-3)).sum();
        assert!((prime_zeta(3.0) - direct).abs() < 1e-12);
    }

    #[test]
    fn legendre_exact_for_polynomials() {
        let q = Quadrature::composite(0.0, 2.0, 3, 8);
        assert!((q.integrate(|x| x.powi(9)) - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }
}
