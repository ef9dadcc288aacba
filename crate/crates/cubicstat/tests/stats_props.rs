use cubicstat::analytic::{AfeKernel, KernelG, SmoothWeight};
use cubicstat::counting::OrbitSet;
use cubicstat::forms::enumerate_orbits;
use cubicstat::local::SplittingType;
use cubicstat::stats::{
    compute_family_lvalues, family_averages, family_lvalues, lvalue_cache_path, ma_pa, nonvanishing, one_level_density,
    t_sigma, t_sigma_n, DensityTestFunction, Family, LocalSpec, MAXIMAL_TYPES,
};
use num_traits::One;
use proptest::prelude::*;
use std::path::PathBuf;

const X_MAX: u64 = 60_000;

fn scratch_dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn small_family(spec: &LocalSpec) -> (OrbitSet, AfeKernel) {
    let set = OrbitSet::new(spec.sign, X_MAX, enumerate_orbits(X_MAX, spec.sign).unwrap());
    (set, AfeKernel::for_sign(spec.sign, KernelG::One).unwrap())
}

#[test]
fn lvalue_cache_round_trips_exactly() {
    let spec = LocalSpec::new(-1).unwrap().with(5, &[SplittingType::Inert3]).unwrap();
    let (set, kernel) = small_family(&spec);
    let dir = scratch_dir("lvalue_cache");
    let fresh = compute_family_lvalues(&set, &spec, &kernel).unwrap();
    let first = family_lvalues(&dir, &set, &spec, &kernel).unwrap();
    let path = lvalue_cache_path(&dir, &spec, &kernel, X_MAX);
    assert!(path.exists());
    let bytes = std::fs::read(&path).unwrap();
    let second = family_lvalues(&dir, &set, &spec, &kernel).unwrap();
    assert!(fresh.len() > 500);
    assert_eq!(fresh, first);
    for (a, b) in fresh.iter().zip(&second) {
        assert_eq!(a.l_half.to_bits(), b.l_half.to_bits(), "{}", a.form);
        assert_eq!(a.tail_bound.to_bits(), b.tail_bound.to_bits());
    }
    assert_eq!(fresh, second);
    // Recomputing and storing again gives the same file.
    std::fs::remove_file(&path).unwrap();
    family_lvalues(&dir, &set, &spec, &kernel).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
}

#[test]
fn family_statistics_on_a_small_range() {
    let spec = LocalSpec::new(-1).unwrap().with(5, &[SplittingType::Inert3]).unwrap();
    let (set, kernel) = small_family(&spec);
    let fields = compute_family_lvalues(&set, &spec, &kernel).unwrap();
    let family = Family { spec: spec.clone(), x_max: X_MAX, fields };
    let psi = SmoothWeight::bump();
    let zero = one_level_density(&family, &DensityTestFunction::zero(1.0 / 3.0), &psi, 20_000.0).unwrap();
    assert_eq!(zero.density, 0.0);
    assert_eq!(zero.prediction, 0.0);
    let fejer = one_level_density(&family, &DensityTestFunction::fejer(1.0 / 3.0), &psi, 20_000.0).unwrap();
    assert!(fejer.density.is_finite() && fejer.fields > 100);
    for x in [5000.0, 10_000.0, 20_000.0] {
        assert!(ma_pa(&family, x).unwrap().holds);
    }
    let nv = nonvanishing(&family, 50_000.0).unwrap();
    assert_eq!(nv.positive + nv.negative + nv.undetermined, nv.fields);
    assert!(ma_pa(&family, 30_000.0).is_err());
}

#[test]
fn unrestricting_prime_is_a_no_op() {
    let base = LocalSpec::default_family();
    let wide = base.clone().with(11, &MAXIMAL_TYPES).unwrap();
    let a = family_averages(&base, 200_000).unwrap();
    let b = family_averages(&wide, 200_000).unwrap();
    assert!((a.c_sigma - b.c_sigma).abs() < 1e-12 * a.c_sigma);
    assert!((a.c_prime_sigma - b.c_prime_sigma).abs() < 1e-10 * a.c_prime_sigma.abs());
}

#[test]
fn constants_settle_in_the_cutoff() {
    for spec in [
        LocalSpec::default_family(),
        LocalSpec::new(1).unwrap().with(2, &[SplittingType::Inert3]).unwrap(),
        LocalSpec::new(-1)
            .unwrap()
            .with(3, &[SplittingType::Split111, SplittingType::Partial12])
            .unwrap()
            .without_inert_requirement(),
    ] {
        let a = family_averages(&spec, 200_000).unwrap();
        let b = family_averages(&spec, 400_000).unwrap();
        assert!(a.c_sigma > 0.0 && a.all_factors_positive, "{spec}");
        assert!((a.c_sigma - b.c_sigma).abs() < 1e-6, "{spec}: {} {}", a.c_sigma, b.c_sigma);
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn spec_strategy() -> impl Strategy<Value = LocalSpec> {
    let primes = [2u64, 3, 5, 7, 11, 13];
    prop::collection::vec((0usize..6, 1u32..32), 0..4).prop_map(move |conds| {
        let mut spec = LocalSpec::new(-1).unwrap();
        for (i, mask) in conds {
            let types: Vec<SplittingType> =
                MAXIMAL_TYPES.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, &t)| t).collect();
            spec = spec.with(primes[i], &types).unwrap();
        }
        spec.without_inert_requirement()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn t_sigma_is_multiplicative(spec in spec_strategy(), m in 1u64..200, n in 1u64..200) {
        prop_assume!(gcd(m, n) == 1);
        prop_assert_eq!(t_sigma_n(&spec, m * n), t_sigma_n(&spec, m) * t_sigma_n(&spec, n));
        prop_assert!(t_sigma(&spec, 7, 0).is_one());
    }

    #[test]
    fn residue_is_positive_for_every_spec(spec in spec_strategy()) {
        let fa = family_averages(&spec, 20_000).unwrap();
        prop_assert!(fa.all_factors_positive);
        prop_assert!(fa.residue > 0.0 && fa.c_sigma > 0.0);
    }
}
