use perimax::fixtures::{self, FixtureSpec};
use perimax::lifting::*;
use perimax::ppt::{find_rigidifying_edges, insert_edge_orbit, is_pointed};
use perimax::rigidity::{check_periodic_stress, periodic_stress_space};
use perimax::topology::trace_faces;
use perimax::{Error, PeriodicFramework, TileRange};

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// ppt3 with its two best rigidifying edges: one periodic stress, all vertices pointed.
fn ppt3_plus_two() -> PeriodicFramework {
    let fw = fixtures::ppt3().unwrap();
    let cands = find_rigidifying_edges(&fw, 2).unwrap();
    let one = insert_edge_orbit(&fw, &cands[0]).unwrap();
    cands[1..].iter().find_map(|c| insert_edge_orbit(&one, c).ok()).unwrap()
}

fn stressed_frameworks() -> Vec<(String, PeriodicFramework)> {
    let mut out: Vec<_> = FixtureSpec::defaults()
        .iter()
        .map(|s| (s.name().to_string(), fixtures::fixture(s).unwrap()))
        .filter(|(_, fw)| !periodic_stress_space(fw).is_empty())
        .collect();
    out.push(("ppt3+2".into(), ppt3_plus_two()));
    out
}

#[test]
fn cubes_has_a_stress_and_round_trips() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let basis = periodic_stress_space(&fw);
    assert_eq!(basis.len(), 1);
    let s = &basis[0].values;
    let l = lifting_from_stress(&fw, &fc, s, 0.0).unwrap();
    let back = stress_from_lifting(&fw, &fc, &l).unwrap();
    assert!(back.is_periodic);
    assert!(rel_err(&back.values, s) < 1e-9);
}

#[test]
fn round_trip_on_every_stressed_framework() {
    let list = stressed_frameworks();
    assert!(list.len() >= 2);
    for (name, fw) in list {
        let fc = trace_faces(&fw).unwrap();
        for s in periodic_stress_space(&fw) {
            let l = lifting_from_stress(&fw, &fc, &s.values, 0.0).unwrap();
            let back = stress_from_lifting(&fw, &fc, &l).unwrap();
            assert!(rel_err(&back.values, &s.values) < 1e-9, "{name}");
        }
    }
}

#[test]
fn scaling_lifting_scales_stress() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let l = lifting_from_stress(&fw, &fc, &s, 1.0).unwrap();
    let doubled = stress_from_lifting(&fw, &fc, &l.scaled(2.0)).unwrap();
    let expected: Vec<f64> = s.iter().map(|x| 2.0 * x).collect();
    assert!(rel_err(&doubled.values, &expected) < 1e-9);
}

#[test]
fn base_constant_shifts_every_face() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let a = lifting_from_stress(&fw, &fc, &s, 0.0).unwrap();
    let b = lifting_from_stress(&fw, &fc, &s, 3.25).unwrap();
    for (x, y) in a.normals.iter().zip(&b.normals) {
        assert!((x - y).norm() < 1e-12);
    }
    for (x, y) in a.offsets.iter().zip(&b.offsets) {
        assert!((y - x - 3.25).abs() < 1e-12);
    }
}

#[test]
fn one_dimensional_stresses_fold_both_ways() {
    for (name, fw) in stressed_frameworks() {
        let basis = periodic_stress_space(&fw);
        if basis.len() != 1 {
            continue;
        }
        let folds = classify_folds(&basis[0].values);
        assert!(folds.iter().any(|f| f.class == FoldClass::Mountain), "{name}");
        assert!(folds.iter().any(|f| f.class == FoldClass::Valley), "{name}");
    }
    let single = classify_folds(&[0.5, -1.0, 0.5]);
    assert_eq!(single[1].class, FoldClass::Mountain);
}

#[test]
fn mountain_edges_fold_down_on_both_sides() {
    // Evaluate each face plane just beyond the shared edge: on a mountain edge
    // the neighbouring face's plane lies above the terrain there.
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let l = lifting_from_stress(&fw, &fc, &s, 0.0).unwrap();
    for (t, fold) in fc.tetrads.iter().zip(classify_folds(&s)) {
        let e = &fw.edges()[t.edge];
        let mid = (fw.position(e.tail) + fw.copy_position(e.head, e.shift)) * 0.5;
        let left_side = mid + perimax::framework::perp(fw.edge_vector(t.edge).unwrap()) * 1e-3;
        // point in the left face, evaluated with the right face's plane
        let gap = l.height_on(&fw, t.right, left_side) - l.height_on(&fw, t.left, left_side);
        match fold.class {
            FoldClass::Mountain => assert!(gap > 0.0),
            FoldClass::Valley => assert!(gap < 0.0),
            FoldClass::Flat => {}
        }
    }
}

#[test]
fn same_sign_invariant_stress_is_not_periodic() {
    // Kagome at θ = 0 consists of straight lines, so a unit stress on every
    // edge balances at every vertex but cannot be periodic.
    let fw = fixtures::kagome(0.0).unwrap();
    let fc = trace_faces(&fw).unwrap();
    let ones = vec![1.0; fw.m()];
    let check = check_periodic_stress(&fw, &ones).unwrap();
    assert!(check.equilibrium && !check.periodic);
    match lifting_with_residuals(&fw, &fc, &ones, 0.0) {
        Err(Error::NotPeriodicStress { residual, .. }) => assert!(residual > 0.0),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn incompatible_lifting_is_rejected() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let mut l = lifting_from_stress(&fw, &fc, &s, 0.0).unwrap();
    l.offsets[1] += 0.1;
    assert!(matches!(stress_from_lifting(&fw, &fc, &l), Err(Error::IncompatibleLifting { .. })));
}

/// The index-4 relaxation of ppt3 with two rigidifying edges: most vertices stay pointed.
fn relaxed_ppt3_plus_two() -> PeriodicFramework {
    let sub = perimax::relax::Sublattice::new(2, 0, 2).unwrap();
    let fw = perimax::relax::relax(&fixtures::ppt3().unwrap(), sub).unwrap().framework;
    let cands = find_rigidifying_edges(&fw, 1).unwrap();
    let one = insert_edge_orbit(&fw, &cands[0]).unwrap();
    cands[1..].iter().find_map(|c| insert_edge_orbit(&one, c).ok()).unwrap()
}

#[test]
fn pointed_vertices_are_not_local_extrema() {
    // Near a pointed vertex the face holding its reflex angle spans more than
    // a half-plane of directions, so its plane rises on one side of the vertex
    // and falls on the other, unless it is horizontal.
    let fw = relaxed_ppt3_plus_two();
    let fc = trace_faces(&fw).unwrap();
    let basis = periodic_stress_space(&fw);
    assert_eq!(basis.len(), 1);
    let l = lifting_from_stress(&fw, &fc, &basis[0].values, 0.0).unwrap();
    let nu_scale = l.normals.iter().map(|n| n.norm()).fold(0.0, f64::max);
    assert!(nu_scale > 0.0);
    let pointed: Vec<usize> = (0..fw.n()).filter(|&v| is_pointed(&fw, v)).collect();
    assert!(pointed.len() >= fw.n() / 2);
    for v in pointed {
        let (f, k) = fc
            .faces
            .iter()
            .flat_map(|f| (0..f.len()).map(move |k| (f, k)))
            .find(|(f, k)| f.boundary[*k].vertex == v && f.corner_angles[*k] > std::f64::consts::PI)
            .expect("a pointed vertex has a reflex corner");
        let nu = l.normals[f.id];
        if nu.norm() <= 1e-9 * nu_scale {
            continue;
        }
        let out = perimax::topology::half_edge_vector(&fw, f.boundary[k].half_edge);
        let start = out.y.atan2(out.x);
        let slopes: Vec<f64> = (1..64)
            .map(|j| {
                let phi = start + f.corner_angles[k] * j as f64 / 64.0;
                nu.dot(&perimax::Vec2::new(phi.cos(), phi.sin()))
            })
            .collect();
        assert!(slopes.iter().any(|&x| x > 0.0) && slopes.iter().any(|&x| x < 0.0), "vertex {v} is an extremum");
    }
}

#[test]
fn terrain_is_periodic() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let l = lifting_from_stress(&fw, &fc, &s, 0.0).unwrap();
    let mesh = export_terrain(&fw, &fc, &l, &TileRange::grid(2, 2)).unwrap();
    let patch = fw.realize_patch(&TileRange::grid(2, 2)).unwrap();
    assert_eq!(mesh.vertices.len(), patch.vertices.len());
    // four translated copies of each vertex orbit carry the same height
    for (k, v) in patch.vertices.iter().enumerate() {
        let z0 = mesh.vertices[patch.vertices.iter().position(|w| w.orbit == v.orbit).unwrap()][2];
        assert!((mesh.vertices[k][2] - z0).abs() < 1e-12);
    }
    assert!(!mesh.triangles.is_empty());
    // triangles stay within one face plane: each lies flat under its face's affine height
    for t in &mesh.triangles {
        for &i in t {
            assert!(i < mesh.vertices.len());
        }
    }
    let obj = mesh.to_obj();
    assert!(obj.lines().all(|line| line.starts_with("v ") || line.starts_with("f ")));
}

#[test]
fn lifted_heights_are_not_flat_on_cubes() {
    let fw = fixtures::cubes().unwrap();
    let fc = trace_faces(&fw).unwrap();
    let s = periodic_stress_space(&fw).remove(0).values;
    let l = lifting_from_stress(&fw, &fc, &s, 0.0).unwrap();
    let h = l.vertex_heights(&fw, &fc);
    let spread = h.iter().cloned().fold(f64::MIN, f64::max) - h.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-3);
}
