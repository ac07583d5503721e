#![allow(dead_code)]

use nalgebra::{DVector, Rotation2};
use perimax::fixtures::kagome_geometry;
use perimax::{LatticeBasis, PeriodicFramework, Shift, Vec2};
use rand::Rng;

/// A random connected framework with `n ≤ max_n` vertex orbits and
/// `m ≤ max_m` edge orbits: a random spanning tree plus random extra edges
/// with shifts in `{-1, 0, 1}²`. Placements are generic, not necessarily
/// non-crossing.
pub fn random_framework(rng: &mut impl Rng, max_n: usize, max_m: usize) -> PeriodicFramework {
    loop {
        let n = rng.gen_range(1..=max_n);
        let m = rng.gen_range(n.max(2)..=max_m.max(n.max(2)));
        let l1 = Vec2::new(rng.gen_range(0.8..1.2), rng.gen_range(-0.3..0.3));
        let l2 = Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(0.8..1.2));
        let Ok(lattice) = LatticeBasis::from_generators(l1, l2) else { continue };
        let positions: Vec<Vec2> = (0..n).map(|_| Vec2::new(rng.gen(), rng.gen())).collect();
        let shift = |rng: &mut dyn rand::RngCore| -> Shift { [rng.gen_range(-1..=1), rng.gen_range(-1..=1)] };
        let tree: Vec<(usize, usize, Shift)> = (1..n).map(|v| (rng.gen_range(0..v), v, shift(rng))).collect();
        let Ok(mut fw) = PeriodicFramework::new(lattice, positions, tree) else { continue };
        let mut tries = 0;
        while fw.m() < m && tries < 100 {
            tries += 1;
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), shift(rng));
            if let Ok(next) = fw.with_edge(a, b, c) {
                fw = next;
            }
        }
        return fw;
    }
}

/// d/dθ of the gauged Kagome placement, as a motion vector.
pub fn kagome_analytic_tangent(theta: f64) -> DVector<f64> {
    let (p, l) = kagome_geometry(theta);
    let rot = Rotation2::new(-theta / 2.0);
    let j = |v: Vec2| Vec2::new(-v.y, v.x);
    // only C = A + λ1 and D = B + λ2 move, rotating about O
    let (c, d) = (p[1] + l[0], p[2] + l[1]);
    let raw = [Vec2::zeros(), Vec2::zeros(), Vec2::zeros(), j(c), j(d)];
    let pts = [p[0], p[1], p[2], l[0], l[1]];
    let mut t = DVector::zeros(10);
    for k in 0..5 {
        let g = rot * raw[k] - j(rot * pts[k]) * 0.5;
        t[2 * k] = g.x;
        t[2 * k + 1] = g.y;
    }
    t
}

