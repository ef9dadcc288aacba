use cubicstat::fourier::*;
use cubicstat::local::SplittingType;
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn closed_form_matches_brute_force() {
    for p in [2u64, 5, 7] {
        assert_eq!(brute_force_matrix(p).unwrap(), mori_matrix(p).unwrap(), "p = {p}");
    }
}

#[test]
fn orthogonality_identities() {
    for p in [5u64, 7, 11, 13] {
        let r = verify_orthogonality(p).unwrap();
        assert_eq!(r.len(), 21);
        assert!(r.iter().all(|x| x.holds), "p = {p}");
    }
}

#[test]
fn orbit_sizes_by_scan() {
    for p in [2u64, 3, 5, 7] {
        assert_eq!(orbit_sizes(p), orbit_sizes_brute(p));
    }
}

#[test]
fn transforming_twice_reflects() {
    // For invariant functions phi(-f) = phi(f), so the composite is p^-4 I.
    for p in [2u64, 3, 5] {
        let m = transform_matrix(p).unwrap();
        let back = brute_force_dual_matrix(p).unwrap();
        let p4 = q(1, (p as i64).pow(4));
        for i in 0..6 {
            for j in 0..6 {
                let mut s = Q::zero();
                for k in 0..6 {
                    s += &back.m[i][k] * &m.m[k][j];
                }
                let want = if i == j { p4.clone() } else { Q::zero() };
                assert_eq!(s, want, "p = {p} ({i},{j})");
            }
        }
    }
}

#[test]
fn maximal_densities_match_scan_mod_p2() {
    for p in [2u64, 3, 5] {
        let d = maximal_densities(p);
        assert_eq!(maximal_densities_brute(p), d.mu, "p = {p}");
        let pi = p as i64;
        // Total density is (1 - p^-2)(1 - p^-3).
        assert_eq!(d.total(), (q(1, 1) - q(1, pi * pi)) * (q(1, 1) - q(1, pi.pow(3))));
    }
}

#[test]
fn maximal_fourier_values_closed_form() {
    for p in [5u64, 7, 11] {
        let pi = p as i64;
        let d = maximal_densities(p);
        assert_eq!(d.u_lambda_p, q((pi - 1) * (pi * pi - 1), pi.pow(4)));
        assert_eq!(d.u_lambda_p2, q((pi * pi - 1).pow(2), pi.pow(4)));
        assert_eq!(d.u_theta_p2, q((pi * pi - 1).pow(2), pi.pow(4)));
    }
}

#[test]
fn row_bounds() {
    for p in [2u64, 3, 5, 7, 11, 13, 17] {
        assert!(verify_bounds(p).unwrap(), "p = {p}");
    }
}

#[test]
fn dirac_transform_is_constant() {
    for p in [2u64, 3, 5, 7] {
        let t = fourier_transform(&InvariantFunction::indicator(SplittingType::Zero0), p).unwrap();
        assert!(t.coeffs.iter().all(|v| *v == q(1, (p as i64).pow(4))));
    }
}

proptest! {
    #[test]
    fn plancherel(a in prop::array::uniform6(-5i64..5), b in prop::array::uniform6(-5i64..5), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let phi = InvariantFunction::from_ints(a);
        let psi = InvariantFunction::from_ints(b);
        prop_assert!(plancherel_holds(&phi, &psi, p).unwrap());
    }
}
