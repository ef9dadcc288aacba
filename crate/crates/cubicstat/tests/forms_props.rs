use cubicstat::forms::*;
use proptest::prelude::*;
use std::collections::HashSet;

fn small_gl2() -> impl Strategy<Value = Gl2> {
    // Products of generators keep entries small and determinants +-1.
    prop::collection::vec(0usize..4, 0..6).prop_map(|word| {
        let gens = [Gl2::new(1, 0, 1, 1), Gl2::new(1, 0, -1, 1), Gl2::SWAP, Gl2::new(1, 0, 0, -1)];
        word.iter().fold(Gl2::IDENTITY, |acc, &i| acc.mul(&gens[i]))
    })
}

fn form() -> impl Strategy<Value = BinaryCubicForm> {
    (-20i64..=20, -20i64..=20, -20i64..=20, -20i64..=20)
        .prop_map(|(a, b, c, d)| BinaryCubicForm::new(a, b, c, d))
}

proptest! {
    #[test]
    fn action_is_left_action(g in small_gl2(), h in small_gl2(), f in form()) {
        let lhs = act(&g, &act(&h, &f).unwrap()).unwrap();
        let rhs = act(&g.mul(&h), &f).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn discriminant_is_invariant(g in small_gl2(), f in form()) {
        prop_assert_eq!(act(&g, &f).unwrap().discriminant().unwrap(), f.discriminant().unwrap());
    }

    #[test]
    fn hessian_is_covariant(g in small_gl2(), f in form()) {
        let (p, q, r) = f.hessian();
        let (p2, q2, r2) = act(&g, &f).unwrap().hessian();
        // H_{g.f}(x, y) = H_f((x, y) g).
        let (gp, gq, gr, gs) = (g.p as i128, g.q as i128, g.r as i128, g.s as i128);
        prop_assert_eq!(p2, p * gp * gp + q * gp * gq + r * gq * gq);
        prop_assert_eq!(q2, 2 * p * gp * gr + q * (gp * gs + gq * gr) + 2 * r * gq * gs);
        prop_assert_eq!(r2, p * gr * gr + q * gr * gs + r * gs * gs);
        prop_assert_eq!(4 * p * r - q * q, 3 * f.discriminant().unwrap());
    }

    #[test]
    fn pairing_is_equivariant(g in small_gl2(), f in form(), s in (0u64..7, 0u64..7, 0u64..7, 0u64..7)) {
        let n = 7;
        let fs = [s.0, s.1, s.2, s.3];
        let gf = act(&g, &f).unwrap();
        let gfs = act_dual_mod(&g, &fs, n).unwrap();
        let lhs = dual_pairing(&gf, &DualForm::new(gfs[0] as i64, gfs[1] as i64, gfs[2] as i64, gfs[3] as i64), n);
        let base = dual_pairing(&f, &DualForm::new(s.0 as i64, s.1 as i64, s.2 as i64, s.3 as i64), n);
        let det = g.det().rem_euclid(n as i64) as u64;
        prop_assert_eq!(lhs, base * det % n);
    }

    #[test]
    fn mod_action_matches_integer_action(g in small_gl2(), f in form()) {
        let n = 12;
        prop_assert_eq!(act_mod(&g, &f.reduce_mod(n), n).unwrap(), act(&g, &f).unwrap().reduce_mod(n));
    }

    #[test]
    fn canonical_is_orbit_invariant(g in small_gl2(), f in form()) {
        prop_assume!(f.discriminant().unwrap() != 0);
        let c = canonical(&f).unwrap();
        prop_assert_eq!(canonical(&act(&g, &f).unwrap()).unwrap(), c);
        prop_assert_eq!(canonical(&c).unwrap(), c);
        let (c2, m) = to_canonical(&f).unwrap();
        prop_assert_eq!(act(&m, &f).unwrap(), c2);
        let stab = stabilizer(&f).unwrap();
        prop_assert_eq!(stab.len() as u32, stabilizer_order(&f).unwrap());
        for s in stab {
            prop_assert_eq!(act(&s, &f).unwrap(), f);
        }
    }
}

/// Every form in a coefficient box lands on an enumerated representative,
/// and enumerated representatives are canonical and distinct.
#[test]
fn enumeration_is_complete_on_a_box() {
    let x = 3000u64;
    for sign in [1, -1] {
        let recs = enumerate_orbits(x, sign).unwrap();
        let set: HashSet<BinaryCubicForm> = recs.iter().map(|r| r.form).collect();
        assert_eq!(set.len(), recs.len());
        for r in &recs {
            assert_eq!(canonical(&r.form).unwrap(), r.form, "non-canonical {}", r.form);
            assert_eq!(r.disc as i128, r.form.discriminant().unwrap());
        }
        let bound = 10i64;
        let mut hit = 0usize;
        for a in -bound..=bound {
            for b in -bound..=bound {
                for c in -bound..=bound {
                    for d in -bound..=bound {
                        let f = BinaryCubicForm::new(a, b, c, d);
                        let disc = f.disc();
                        if disc == 0 || (disc > 0) != (sign > 0) || disc.unsigned_abs() >= x as u128 {
                            continue;
                        }
                        let c = canonical(&f).unwrap();
                        assert!(set.contains(&c), "missing orbit of {f} (canonical {c})");
                        hit += 1;
                    }
                }
            }
        }
        assert!(hit > 1000);
    }
}

/// Brute-force stabilizer search over matrices with entries up to 3.
#[test]
fn stabilizers_match_brute_force() {
    for sign in [1, -1] {
        for r in enumerate_orbits(2000, sign).unwrap() {
            let mut n = 0;
            for p in -3..=3 {
                for q in -3..=3 {
                    for rr in -3..=3 {
                        for s in -3..=3 {
                            let g = Gl2::new(p, q, rr, s);
                            if g.det().abs() == 1 && act(&g, &r.form).unwrap() == r.form {
                                n += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(n, r.stab, "stabilizer of {}", r.form);
        }
    }
}
