//! Parametric example frameworks.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{LatticeBasis, PeriodicFramework, Shift, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FixtureSpec {
    /// One vertex, unit square lattice, horizontal and vertical edges.
    SquareGrid,
    /// Kagome with triangle OAB fixed and OCD rotated by `theta ∈ (−π, π)`.
    Kagome { theta: f64 },
    /// Reentrant honeycomb with arm angles `alpha`, `beta` below the horizontal.
    Reentrant { alpha: f64, beta: f64 },
    /// A pointed pseudo-triangulation with `(n, m, n*) = (3, 6, 3)`.
    Ppt3,
    /// Rhombille ("stacked cubes") tiling, which carries a one-dimensional periodic stress.
    Cubes,
    /// `ppt3` plus a rigidifying edge orbit.
    Ultrarigid,
}

impl FixtureSpec {
    pub const NAMES: [&'static str; 6] = ["square_grid", "kagome", "reentrant", "ppt3", "cubes", "ultrarigid"];

    /// Looks a fixture up by name; `theta` applies to `kagome` only.
    pub fn from_name(name: &str, theta: Option<f64>) -> Result<Self> {
        let kind = match name {
            "square_grid" => Self::SquareGrid,
            "kagome" => Self::Kagome { theta: theta.unwrap_or(PI / 2.0) },
            "reentrant" => Self::Reentrant { alpha: PI / 6.0, beta: PI / 6.0 },
            "ppt3" => Self::Ppt3,
            "cubes" => Self::Cubes,
            "ultrarigid" => Self::Ultrarigid,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown fixture {other:?}; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        };
        if theta.is_some() && !matches!(kind, Self::Kagome { .. }) {
            return Err(Error::InvalidParameter(format!("--theta only applies to kagome, not {name}")));
        }
        Ok(kind)
    }

    /// All fixtures at default parameters.
    pub fn defaults() -> Vec<Self> {
        Self::NAMES.iter().map(|n| Self::from_name(n, None).expect("known name")).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SquareGrid => "square_grid",
            Self::Kagome { .. } => "kagome",
            Self::Reentrant { .. } => "reentrant",
            Self::Ppt3 => "ppt3",
            Self::Cubes => "cubes",
            Self::Ultrarigid => "ultrarigid",
        }
    }
}

pub fn fixture(kind: &FixtureSpec) -> Result<PeriodicFramework> {
    match *kind {
        FixtureSpec::SquareGrid => square_grid(),
        FixtureSpec::Kagome { theta } => kagome(theta),
        FixtureSpec::Reentrant { alpha, beta } => reentrant(alpha, beta),
        FixtureSpec::Ppt3 => ppt3(),
        FixtureSpec::Cubes => cubes(),
        FixtureSpec::Ultrarigid => ultrarigid(),
    }
}

fn build(l1: Vec2, l2: Vec2, positions: Vec<Vec2>, edges: &[(usize, usize, Shift)]) -> Result<PeriodicFramework> {
    PeriodicFramework::new(LatticeBasis::from_generators(l1, l2)?, positions, edges.iter().copied())
}

pub fn square_grid() -> Result<PeriodicFramework> {
    build(Vec2::x(), Vec2::y(), vec![Vec2::zeros()], &[(0, 0, [1, 0]), (0, 0, [0, 1])])
}

/// Kagome edges: triangle OAB, and triangle OCD with `C = A + λ1`, `D = B + λ2`.
const KAGOME_EDGES: [(usize, usize, Shift); 6] =
    [(0, 1, [0, 0]), (0, 2, [0, 0]), (1, 2, [0, 0]), (0, 1, [1, 0]), (0, 2, [0, 1]), (1, 2, [-1, 1])];

fn rotate(theta: f64, v: Vec2) -> Vec2 {
    nalgebra::Rotation2::new(theta) * v
}

/// Vertex positions `O, A, B` and generators of the Kagome framework at angle `theta`.
pub fn kagome_geometry(theta: f64) -> ([Vec2; 3], [Vec2; 2]) {
    let h = 3f64.sqrt() / 2.0;
    let (o, a, b) = (Vec2::zeros(), Vec2::new(-1.0, 0.0), Vec2::new(-0.5, -h));
    let c = rotate(theta, Vec2::new(1.0, 0.0));
    let d = rotate(theta, Vec2::new(0.5, h));
    ([o, a, b], [c - a, d - b])
}

pub fn kagome(theta: f64) -> Result<PeriodicFramework> {
    if !(theta > -PI && theta < PI) {
        return Err(Error::InvalidParameter(format!("kagome angle must lie in (-pi, pi), got {theta}")));
    }
    let (p, l) = kagome_geometry(theta);
    build(l[0], l[1], p.to_vec(), &KAGOME_EDGES)
}

/// Rotation angle of the Kagome triangle OCD recovered from a placement.
pub fn kagome_angle(positions: &[Vec2], l1: Vec2) -> f64 {
    let oa = positions[1] - positions[0];
    let oc = positions[1] + l1 - positions[0];
    let back = -oa;
    back.perp(&oc).atan2(back.dot(&oc))
}

/// Reentrant honeycomb: A at the origin, B above it; each carries two arms of
/// length 1 reaching the other orbit's translates.
pub fn reentrant(alpha: f64, beta: f64) -> Result<PeriodicFramework> {
    let ok = |x: f64| x > 0.0 && x < PI / 2.0;
    if !ok(alpha) || !ok(beta) {
        return Err(Error::InvalidParameter(format!("reentrant angles must lie in (0, pi/2), got {alpha}, {beta}")));
    }
    let h = 2.0;
    let v1 = Vec2::new(alpha.cos(), -alpha.sin());
    let v2 = Vec2::new(-beta.cos(), -beta.sin());
    let up = Vec2::new(0.0, h);
    build(up + v1, up + v2, vec![Vec2::zeros(), up], &[(0, 1, [0, 0]), (0, 1, [-1, 0]), (0, 1, [0, -1])])
}

/// Regular rhombille tiling: degree-6 vertex C and degree-3 vertices P, Q.
pub fn cubes() -> Result<PeriodicFramework> {
    let s = 3f64.sqrt();
    build(
        Vec2::new(1.0, 0.0),
        Vec2::new(0.5, s / 2.0),
        vec![Vec2::zeros(), Vec2::new(0.5, s / 6.0), Vec2::new(1.0, s / 3.0)],
        &[(0, 1, [0, 0]), (0, 1, [-1, 0]), (0, 1, [0, -1]), (0, 2, [-1, -1]), (0, 2, [-1, 0]), (0, 2, [0, -1])],
    )
}

/// Irregular Kagome-type pseudo-triangulation. Coordinates were chosen once
/// (an irregular triangle pair, the second rotated by 2.05 rad) and frozen;
/// the placement sits near one end of its pseudo-triangulation range so the
/// expansive flex has room for a long path.
const PPT3_POSITIONS: [[f64; 2]; 3] = [[0.0, 0.0], [-2.2, 0.1], [-0.9, -1.8]];
const PPT3_LATTICE: [[f64; 2]; 2] =
    [[1.3737253270902434, 1.8372326047503624], [-1.026959750327785, 2.0383822992939726]];

pub fn ppt3() -> Result<PeriodicFramework> {
    let p = PPT3_POSITIONS.iter().map(|q| Vec2::new(q[0], q[1])).collect();
    build(Vec2::from(PPT3_LATTICE[0]), Vec2::from(PPT3_LATTICE[1]), p, &KAGOME_EDGES)
}

/// Top-ranked rigidifying edge orbit of `ppt3`.
pub const ULTRARIGID_EDGE: (usize, usize, Shift) = (0, 1, [1, -1]);

pub fn ultrarigid() -> Result<PeriodicFramework> {
    let (t, h, c) = ULTRARIGID_EDGE;
    ppt3()?.with_edge(t, h, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kagome_gram() {
        for theta in [0.0, 0.4, PI / 2.0, -2.0] {
            let fw = kagome(theta).unwrap();
            let g = fw.lattice().gram();
            let k = 1.0 + f64::cos(theta);
            let expected = nalgebra::Matrix2::new(2.0, 1.0, 1.0, 2.0) * k;
            assert!((g - expected).amax() < 1e-12, "theta {theta}");
            assert!((kagome_angle(&fw.positions(), fw.lattice().generator(0)) - theta).abs() < 1e-12);
        }
        assert!((kagome(0.0).unwrap().lattice().gram() - nalgebra::Matrix2::new(4.0, 2.0, 2.0, 4.0)).amax() < 1e-15);
        assert!(kagome(PI).is_err());
    }

    #[test]
    fn basic_counts() {
        let sq = square_grid().unwrap();
        assert_eq!((sq.n(), sq.m()), (1, 2));
        assert_eq!(*sq.lattice().matrix(), nalgebra::Matrix2::identity());
        let re = reentrant(PI / 6.0, PI / 6.0).unwrap();
        assert_eq!((re.n(), re.m()), (2, 3));
        assert_eq!(kagome(1.0).unwrap().m(), 6);
    }

    #[test]
    fn names_round_trip() {
        for kind in FixtureSpec::defaults() {
            assert_eq!(FixtureSpec::from_name(kind.name(), None).unwrap().name(), kind.name());
        }
        assert!(FixtureSpec::from_name("hexagons", None).is_err());
        assert!(FixtureSpec::from_name("cubes", Some(1.0)).is_err());
    }
}
