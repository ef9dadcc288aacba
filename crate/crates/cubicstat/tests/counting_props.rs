use cubicstat::analytic::special::zeta;
use cubicstat::analytic::SmoothWeight;
use cubicstat::arith::{primes_up_to, SpfSieve};
use cubicstat::counting::{
    a_local, a_nonmax_local, b_local, c_local, c_nonmax_local, functionals, index_uniformity, sieve_to_maximal,
    smoothed_count, suborder_count, suborder_tree_count, suborder_zeta_coeffs, weighted_switching_check,
    CongruenceWeight, OrbitSet,
};
use cubicstat::forms::enumerate_orbits;
use cubicstat::fourier::{fourier_transform, q, InvariantFunction, Q};
use cubicstat::local::{is_maximal, omega, SplittingType};
use num_traits::{ToPrimitive, Zero};

fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap()
}

fn inert_at_5() -> CongruenceWeight {
    CongruenceWeight::trivial().with(5, CongruenceWeight::allowed_types(&[SplittingType::Inert3]))
}

#[test]
fn sieve_identity_is_exact() {
    let psi = SmoothWeight::bump();
    let x_max = 100_000u64;
    for sign in [1, -1] {
        let set = OrbitSet::new(sign, x_max, enumerate_orbits(x_max, sign).unwrap());
        for w in [CongruenceWeight::trivial(), inert_at_5()] {
            let rep = sieve_to_maximal(&set, &w, &psi, x_max as f64 / 2.0, x_max).unwrap();
            assert!(rep.exact(), "{} vs {}", rep.exact_inclusion_exclusion, rep.exact_direct);
            assert!((rep.inclusion_exclusion - rep.direct).abs() < 1e-9 * rep.direct.abs().max(1.0));
            // W_q is empty once q^2 exceeds the discriminant range.
            assert!(rep.rows.iter().all(|r| r.q * r.q <= x_max));
            println!(
                "sign {sign}: {} squarefree q, maximal sum {}, Davenport constant {:.3}",
                rep.rows.len(),
                rep.exact_direct,
                rep.davenport_constant
            );
            assert!(rep.davenport_constant < 10.0);
        }
    }
}

#[test]
fn index_counts_follow_uniformity_shape() {
    let x_max = 100_000u64;
    let set = OrbitSet::new(-1, x_max, enumerate_orbits(x_max, -1).unwrap());
    let rows = index_uniformity(&set, 50).unwrap();
    let worst = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    println!("worst m1^(5/3) q1^2 |U_b| / X = {worst:.3}");
    assert!(rows.len() > 10 && worst < 2.0);
}

#[test]
fn weighted_switching_battery() {
    let x = 5000u64;
    let ty = |v: [i64; 6]| InvariantFunction::from_ints(v);
    // Coefficients in the order (0), (1^3), (1^2 1), (111), (12), (3).
    let simple = ty([0, 0, 5, 1, 2, 3]);
    let not_simple = ty([1, 2, 0, 1, 1, 3]);
    let battery: Vec<(u64, CongruenceWeight)> = vec![
        (2, CongruenceWeight::trivial().with(2, simple.clone())),
        (3, CongruenceWeight::trivial().with(3, simple.clone())),
        (6, CongruenceWeight::trivial().with(2, simple.clone()).with(5, not_simple.clone())),
        (3, CongruenceWeight::trivial().with(3, not_simple.clone())),
        (6, CongruenceWeight::trivial().with(2, simple.clone()).with(3, not_simple.clone())),
        (10, CongruenceWeight::trivial().with(7, InvariantFunction::lambda(1))),
        (30, CongruenceWeight::trivial().with(2, simple.clone()).with(3, simple.clone()).with(7, not_simple)),
    ];
    let mut kinds = (0, 0);
    for sign in [1, -1] {
        let orbits = enumerate_orbits(x, sign).unwrap();
        for (qq, w) in &battery {
            let rep = weighted_switching_check(*qq, w, x, &orbits).unwrap();
            assert!(rep.equal(), "q={qq} d={} e={}: {} vs {}", rep.d, rep.e, rep.lhs_times6, rep.rhs_times6);
            assert!(!rep.lhs_times6.is_zero() || *qq > 6);
            if rep.d > 1 {
                kinds.0 += 1;
            }
            if rep.e > 1 {
                kinds.1 += 1;
            }
        }
    }
    assert!(kinds.0 > 0 && kinds.1 > 0);
}

/// sum over squarefree q <= cut of mu(q) prod_{p | q} N_p prod_{p not | q} L_p,
/// with N_p, L_p the nonmaximal and full local functionals.
fn inclusion_exclusion(cut: u64, ratio: impl Fn(u64) -> f64) -> f64 {
    let sieve = SpfSieve::new(cut);
    let mut g = vec![0.0f64; cut as usize + 1];
    g[1] = 1.0;
    let mut total = 1.0;
    for n in 2..=cut {
        let p = sieve.spf(n);
        let r = n / p;
        g[n as usize] = if r % p == 0 { 0.0 } else { -ratio(p) * g[r as usize] };
        total += g[n as usize];
    }
    total
}

#[test]
fn maximal_functionals_by_inclusion_exclusion() {
    let one = InvariantFunction::from_ints([1; 6]);
    for p in primes_up_to(50) {
        // Davenport-Heilbronn: nonmaximal forms at p have density p^-2 + p^-3 - p^-5.
        let p5 = (p as i64).pow(5);
        let want = q(p5 / (p * p) as i64 + p5 / (p * p * p) as i64 - 1, p5);
        assert_eq!(a_nonmax_local(&one, p), want);
    }
    let w = inert_at_5().with(7, InvariantFunction::lambda(1));
    let f = functionals(&w);
    let phi_at = |p: u64| w.factors().find(|x| x.0 == p).map(|x| x.1.clone()).unwrap_or_else(|| one.clone());
    let cut = 1_000_000;
    let a = inclusion_exclusion(cut, |p| {
        let phi = phi_at(p);
        qf(&a_nonmax_local(&phi, p)) / qf(&a_local(&phi, p))
    }) * f.a;
    let c = inclusion_exclusion(cut, |p| {
        let phi = phi_at(p);
        c_nonmax_local(&phi, p) / c_local(&phi, p)
    }) * f.c;
    println!("A^max {} vs {}, C^max {} vs {}", a, f.a_max, c, f.c_max);
    assert!((a - f.a_max).abs() < 1e-5);
    // The q-tail is of size q^-2/3.
    assert!((c - f.c_max).abs() < 5e-4);
    assert!((1.0 / (zeta(2.0) * zeta(3.0)) - functionals(&CongruenceWeight::trivial()).a_max).abs() < 1e-15);
}

#[test]
fn simple_weight_densities() {
    for p in [2u64, 3, 5, 7, 11] {
        let pi = p as i64;
        let dirac = InvariantFunction::indicator(SplittingType::Zero0);
        assert_eq!(a_local(&dirac, p), q(1, pi.pow(4)));
        assert_eq!(b_local(&dirac, p), q(1, pi.pow(4)));
        let inert = InvariantFunction::indicator(SplittingType::Inert3);
        assert_eq!(a_local(&inert, p), q(pi * (pi + 1) * (pi - 1) * (pi - 1), 3 * pi.pow(4)));
        // The full-space functional is the transform at zero.
        for phi in [InvariantFunction::lambda(1), InvariantFunction::lambda(2), inert, dirac] {
            assert_eq!(&a_local(&phi, p), fourier_transform(&phi, p).unwrap().value(SplittingType::Zero0));
        }
    }
}

#[test]
fn vanishing_weights_give_zero() {
    let psi = SmoothWeight::bump();
    let x_max = 20_000u64;
    for sign in [1, -1] {
        let set = OrbitSet::new(sign, x_max, enumerate_orbits(x_max, sign).unwrap());
        let none = CongruenceWeight::trivial().with(2, CongruenceWeight::allowed_types(&[]));
        assert_eq!(smoothed_count(&set, &none, &psi, 10_000.0).unwrap(), 0.0);
        let zero = CongruenceWeight::trivial().with(5, InvariantFunction::from_ints([0; 6]));
        assert_eq!(smoothed_count(&set, &zero, &psi, 10_000.0).unwrap(), 0.0);
        assert_eq!(functionals(&zero).a, 0.0);
    }
}

#[test]
fn suborders_match_tree_search() {
    let mut fields = Vec::new();
    for sign in [-1, 1] {
        for r in enumerate_orbits(2000, sign).unwrap() {
            let d = r.disc.unsigned_abs();
            let square = (d as f64).sqrt().round() as u64;
            // Cyclic fields have square discriminant and extra automorphisms.
            if r.irreducible && is_maximal(&r.form).unwrap() && square * square != d && fields.len() < 20 {
                fields.push(r.form);
            }
        }
    }
    assert_eq!(fields.len(), 20);
    for f in &fields {
        let coeffs = suborder_zeta_coeffs(f, 100).unwrap();
        for p in primes_up_to(100) {
            assert_eq!(coeffs[p as usize], omega(f, p) as i64, "{f} at {p}");
        }
        for z in [10u64, 40, 100] {
            assert_eq!(suborder_count(f, z).unwrap(), suborder_tree_count(f, z).unwrap() as i64, "{f} Z={z}");
        }
    }
}
