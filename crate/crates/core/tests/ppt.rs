use std::f64::consts::PI;

use perimax::fixtures;
use perimax::ppt::*;
use perimax::rigidity::{flex_space, periodic_stress_space};
use perimax::topology::{corner_count, trace_faces};
use perimax::{Error, PeriodicFramework};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ppt_fixtures() -> Vec<(&'static str, PeriodicFramework)> {
    vec![("ppt3", fixtures::ppt3().unwrap()), ("kagome", fixtures::kagome(PI / 2.0).unwrap())]
}

#[test]
fn ppt3_certificate() {
    let c = certify_ppt(&fixtures::ppt3().unwrap()).unwrap();
    assert!(c.valid, "{:?}", c.failures);
    assert_eq!(c.counts, (3, 6, 3));
    assert_eq!((c.sigma, c.flex_dim), (0, 1));
    assert!(c.pointed.iter().all(|&p| p));
    assert!(c.pseudo_triangular.iter().all(|&p| p));
}

#[test]
fn corner_accounting_on_ppts() {
    for (name, fw) in ppt_fixtures() {
        let fc = trace_faces(&fw).unwrap();
        let r = corner_count(&fw, &fc);
        assert_eq!(r.degree_sum, fw.n() + 3 * fc.n_faces(), "{name}");
        assert_eq!(r.pseudo_triangle_relation, Some(true), "{name}");
        assert_eq!(fc.n_faces(), fw.n());
    }
}

#[test]
fn non_ppts_fail_the_right_clause() {
    let sq = certify_ppt(&fixtures::square_grid().unwrap()).unwrap();
    assert!(!sq.valid);
    assert_eq!(sq.corners, vec![4]);
    let re = certify_ppt(&fixtures::reentrant(PI / 6.0, PI / 6.0).unwrap()).unwrap();
    assert!(!re.valid);
    assert!(re.failures.iter().any(|f| f.contains("m = 3 but 2n = 4")));
}

#[test]
fn kagome_pointedness() {
    let flat = fixtures::kagome(0.0).unwrap();
    assert!((0..3).all(|v| !is_pointed(&flat, v)));
    let twisted = fixtures::kagome(PI / 2.0).unwrap();
    assert!((0..3).all(|v| is_pointed(&twisted, v)));
}

#[test]
fn top_candidate_rigidifies_and_second_adds_a_stress() {
    for (name, fw) in ppt_fixtures() {
        let cands = find_rigidifying_edges(&fw, DEFAULT_CUTOFF).unwrap();
        assert!(!cands.is_empty());
        assert!(cands[0].derivative > 0.0);
        let one = insert_edge_orbit(&fw, &cands[0]).unwrap();
        let r = flex_space(&one).report;
        assert_eq!((r.sigma, r.phi), (0, 0), "{name}");
        let two = cands[1..].iter().find_map(|c| insert_edge_orbit(&one, c).ok()).unwrap();
        let r = flex_space(&two).report;
        assert_eq!((r.sigma, r.phi), (1, 0), "{name}");
    }
}

#[test]
fn rigid_input_is_not_a_ppt() {
    let fw = fixtures::ultrarigid().unwrap();
    assert!(matches!(find_rigidifying_edges(&fw, 2), Err(Error::NotPpt(_))));
}

#[test]
fn duplicate_candidate_is_rejected() {
    let fw = fixtures::ppt3().unwrap();
    let e = fw.edges()[3];
    let err = insert_edge_orbit(&fw, &EdgeCandidate::new(e.head, e.tail, [-e.shift[0], -e.shift[1]])).unwrap_err();
    assert!(matches!(err, Error::DuplicateOrbit { existing: 3 }));
}

#[test]
fn double_insertions_have_opposite_stress_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, fw) in ppt_fixtures() {
        let cands = find_rigidifying_edges(&fw, DEFAULT_CUTOFF).unwrap();
        let mut pairs: Vec<(usize, usize)> =
            (0..cands.len()).flat_map(|i| (i + 1..cands.len()).map(move |j| (i, j))).collect();
        pairs.shuffle(&mut rng);
        let mut tested = 0;
        for (i, j) in pairs {
            let Ok(one) = insert_edge_orbit(&fw, &cands[i]) else { continue };
            let Ok(two) = insert_edge_orbit(&one, &cands[j]) else { continue };
            let s = periodic_stress_space(&two);
            assert_eq!(s.len(), 1, "{name}");
            let (a, b) = (s[0].values[fw.m()], s[0].values[fw.m() + 1]);
            assert!(a * b < 0.0, "{name}: stresses {a} and {b} on the new orbits");
            assert!(cands[i].derivative * cands[j].derivative >= 0.0);
            tested += 1;
        }
        assert!(tested >= 3, "{name}: only {tested} compatible pairs");
    }
}
