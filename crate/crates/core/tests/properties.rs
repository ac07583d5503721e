mod common;

use nalgebra::DVector;
use perimax::json::{framework_to_json, parse_framework};
use perimax::relax::{sublattices_of_index, Sublattice};
use perimax::rigidity::{check_periodic_stress, count_identity_check, periodic_stress_space};
use perimax::{Error, LatticeBasis, PeriodicFramework, Vec2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn framework_from_seed(seed: u64) -> PeriodicFramework {
    common::random_framework(&mut ChaCha8Rng::seed_from_u64(seed), 6, 14)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stress_and_flex_counts_balance(seed in any::<u64>()) {
        let fw = framework_from_seed(seed);
        match count_identity_check(&fw) {
            Ok(c) => {
                prop_assert!(c.stress_flex_identity, "{c:?}");
                prop_assert!(c.reduced_identity, "{c:?}");
            }
            Err(Error::RankInstability { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let fw = framework_from_seed(seed);
        let positions: Vec<Vec2> = fw.positions().iter().map(|p| p * scale).collect();
        let lattice = LatticeBasis::new(fw.lattice().matrix() * scale).unwrap();
        let fw = fw.with_placement(positions, lattice).unwrap();
        let back = parse_framework(&framework_to_json(&fw)).unwrap();
        for (a, b) in fw.positions().iter().zip(back.positions()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        prop_assert_eq!(fw.lattice().matrix(), back.lattice().matrix());
        prop_assert_eq!(fw.edges(), back.edges());
    }

    #[test]
    fn reduce_splits_shifts(a in 1i64..5, d in 1i64..5, b_raw in 0i64..5, v1 in -20i64..20, v2 in -20i64..20) {
        let sub = Sublattice::new(a, b_raw % d, d).unwrap();
        let (r, k) = sub.reduce([v1, v2]);
        prop_assert!((0..a).contains(&r[0]) && (0..d).contains(&r[1]));
        prop_assert_eq!([r[0] + k[0] * a, r[1] + k[0] * sub.b + k[1] * d], [v1, v2]);
    }
}

#[test]
fn periodicity_tests_agree_on_random_stresses() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut periodic = 0;
    while checked < 1000 {
        let fw = common::random_framework(&mut rng, 6, 14);
        let basis = periodic_stress_space(&fw);
        let m = fw.m();
        let s: Vec<f64> = if !basis.is_empty() && rng.gen_bool(0.7) {
            let mut v = DVector::zeros(m);
            for b in &basis {
                v += DVector::from_vec(b.values.clone()) * rng.gen_range(-2.0..2.0);
            }
            v.iter().copied().collect()
        } else {
            (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let c = check_periodic_stress(&fw, &s).unwrap();
        assert_eq!(c.periodic, c.tensor_periodic, "{c:?}");
        periodic += c.periodic as usize;
        checked += 1;
    }
    assert!(periodic > 100, "only {periodic} periodic samples");
}

#[test]
fn sublattice_counts_are_divisor_sums() {
    let sigma1 = |k: usize| (1..=k).filter(|d| k % d == 0).sum::<usize>();
    for k in 1..=8 {
        let subs = sublattices_of_index(k);
        assert_eq!(subs.len(), sigma1(k));
        assert!(subs.iter().all(|s| s.index() == k));
    }
}

#[test]
fn composition_multiplies_indices() {
    for s in (1..=3).flat_map(sublattices_of_index) {
        for t in (1..=3).flat_map(sublattices_of_index) {
            assert_eq!(s.compose(&t).index(), s.index() * t.index());
        }
    }
}
