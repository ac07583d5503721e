use std::f64::consts::PI;

use perimax::fixtures::{self, FixtureSpec};
use perimax::ppt::certify_ppt;
use perimax::relax::*;
use perimax::rigidity::{count_identity_check, flex_space, periodic_stress_space};

fn small_subs() -> Vec<Sublattice> {
    (1..=4).flat_map(sublattices_of_index).collect()
}

#[test]
fn unfolded_edges_satisfy_the_coset_relation() {
    let fw = fixtures::ppt3().unwrap();
    for sub in small_subs() {
        let u = relax(&fw, sub).unwrap();
        let rho = sub.index();
        assert_eq!((u.framework.n(), u.framework.m()), (fw.n() * rho, fw.m() * rho));
        // the unfolded framework is the same point set
        for (k, &(i, r)) in u.vertex_origin.iter().enumerate() {
            assert!((u.framework.position(k) - fw.copy_position(i, r)).norm() < 1e-12);
        }
        for k in 0..u.framework.m() {
            let (beta, _) = u.edge_origin[k];
            let v = u.framework.edge_vector(k).unwrap();
            let orig = fw.edge_vector(beta).unwrap();
            assert!((v - orig).norm() < 1e-9 || (v + orig).norm() < 1e-9, "{sub} edge {k}");
        }
    }
}

#[test]
fn stress_dimension_never_drops() {
    for kind in FixtureSpec::defaults() {
        let fw = fixtures::fixture(&kind).unwrap();
        let sigma = flex_space(&fw).report.sigma;
        for sub in small_subs() {
            let u = relax(&fw, sub).unwrap();
            assert!(flex_space(&u.framework).report.sigma >= sigma, "{} {sub}", kind.name());
            let c = count_identity_check(&u.framework).unwrap();
            assert!(c.stress_flex_identity, "{} {sub}", kind.name());
        }
    }
}

#[test]
fn cubes_stress_persists() {
    let fw = fixtures::cubes().unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    for sub in small_subs() {
        assert!(stress_persists(&fw, &s, sub).unwrap(), "{sub}");
    }
}

#[test]
fn ppt_certificates_survive_relaxation() {
    for fw in [fixtures::ppt3().unwrap(), fixtures::kagome(PI / 2.0).unwrap()] {
        for sub in small_subs() {
            let c = certify_ppt(&relax(&fw, sub).unwrap().framework).unwrap();
            assert!(c.valid, "{sub}: {:?}", c.failures);
            assert_eq!(c.flex_dim, 1);
        }
    }
}

#[test]
fn ppt3_doubled_both_ways() {
    let u = relax(&fixtures::ppt3().unwrap(), Sublattice::new(2, 0, 2).unwrap()).unwrap();
    assert_eq!((u.framework.n(), u.framework.m()), (12, 24));
}

#[test]
fn nested_relaxation_matches_product() {
    let fw = fixtures::ppt3().unwrap();
    for s1 in sublattices_of_index(2) {
        for s2 in sublattices_of_index(2) {
            let nested = relax(&relax(&fw, s1).unwrap().framework, s2).unwrap().framework;
            let direct = relax(&fw, s1.compose(&s2)).unwrap().framework;
            assert_eq!((nested.n(), nested.m()), (direct.n(), direct.m()));
            let (a, b) = (flex_space(&nested).report, flex_space(&direct).report);
            assert_eq!((a.sigma, a.delta), (b.sigma, b.delta));
            let (la, lb) = (length_multiset(&nested), length_multiset(&direct));
            assert!(la.iter().zip(&lb).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
}

#[test]
fn ultrarigid_fixture_probe() {
    let r = ultrarigidity_probe(&fixtures::ultrarigid().unwrap(), 4).unwrap();
    assert!(r.ultrarigid_up_to_max_index);
    assert_eq!(r.entries.len(), 15);
    assert!(r.entries.iter().all(|e| e.phi == 0));
    // canonical order regardless of evaluation order
    let subs: Vec<_> = r.entries.iter().map(|e| e.sublattice).collect();
    assert_eq!(subs, small_subs());
}
