//! Canonical JSON document for periodic frameworks.
//!
//! Reals are carried as decimal strings so that a write/read cycle is
//! bit-exact. The lattice is stored column by column.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{LatticeBasis, PeriodicFramework, Shift, Vec2};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameworkDoc {
    dimension: u32,
    lattice: [[String; 2]; 2],
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    pos: [String; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    tail: usize,
    head: usize,
    shift: Shift,
}

fn real(s: &str, what: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("{what}: '{s}' is not a decimal number")))?;
    if !x.is_finite() {
        return Err(Error::Schema(format!("{what}: '{s}' is not finite")));
    }
    Ok(x)
}

/// Parses and validates a framework document.
pub fn parse_framework(text: &str) -> Result<PeriodicFramework> {
    let doc: FrameworkDoc =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if doc.dimension != 2 {
        return Err(Error::Schema(format!("dimension must be 2, found {}", doc.dimension)));
    }
    let mut cols = [Vec2::zeros(); 2];
    for (j, col) in doc.lattice.iter().enumerate() {
        cols[j] = Vec2::new(real(&col[0], "lattice")?, real(&col[1], "lattice")?);
    }
    let lattice = LatticeBasis::new(Matrix2::from_columns(&cols))?;
    let mut positions = Vec::with_capacity(doc.vertices.len());
    for (k, v) in doc.vertices.iter().enumerate() {
        if v.id != k {
            return Err(Error::VertexId { expected: k, found: v.id });
        }
        let what = format!("vertex {k}");
        positions.push(Vec2::new(real(&v.pos[0], &what)?, real(&v.pos[1], &what)?));
    }
    PeriodicFramework::new(lattice, positions, doc.edges.iter().map(|e| (e.tail, e.head, e.shift)))
}

fn dec(x: f64) -> String {
    // `Display` for f64 prints the shortest string that parses back to the same bits.
    format!("{x}")
}

pub fn framework_to_json(fw: &PeriodicFramework) -> String {
    let l = fw.lattice();
    let doc = FrameworkDoc {
        dimension: 2,
        lattice: [0, 1].map(|j| {
            let g = l.generator(j);
            [dec(g.x), dec(g.y)]
        }),
        vertices: fw
            .vertices()
            .iter()
            .map(|v| VertexDoc { id: v.id, pos: [dec(v.position.x), dec(v.position.y)] })
            .collect(),
        edges: fw
            .edges()
            .iter()
            .map(|e| EdgeDoc { tail: e.tail, head: e.head, shift: e.shift })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("framework document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{"dimension": 2, "lattice": [["1","0"],["0","1"]],
        "vertices": [{"id": 0, "pos": ["0","0"]}],
        "edges": [{"tail": 0, "head": 0, "shift": [1, 0]}, {"tail": 0, "head": 0, "shift": [0, 1]}]}"#;

    #[test]
    fn parses_square_grid() {
        let fw = parse_framework(SQUARE).unwrap();
        assert_eq!((fw.n(), fw.m()), (1, 2));
    }

    #[test]
    fn singular_lattice_document() {
        let text = SQUARE.replace(r#"[["1","0"],["0","1"]]"#, r#"[["1","2"],["1","2"]]"#);
        assert!(matches!(parse_framework(&text), Err(Error::SingularLattice { .. })));
    }

    #[test]
    fn schema_violations() {
        let bad = [
            SQUARE.replace(r#""dimension": 2"#, r#""dimension": 3"#),
            SQUARE.replace(r#"["0","0"]"#, r#"[0, 0]"#),
            SQUARE.replace(r#""id": 0"#, r#""id": 1"#),
            SQUARE.replace(r#""tail": 0, "head": 0, "shift": [1, 0]"#, r#""tail": 0, "head": 0"#),
            SQUARE.replace(r#""1","0"]"#, r#""one","0"]"#),
            "not json".to_string(),
        ];
        for text in &bad {
            let err = parse_framework(text).unwrap_err();
            assert!(
                matches!(err, Error::Schema(_) | Error::VertexId { .. }),
                "{text}: {err}"
            );
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let fw = PeriodicFramework::new(
            LatticeBasis::from_generators(Vec2::new(1.0 / 3.0, 0.1), Vec2::new(-0.2, 2.0f64.sqrt())).unwrap(),
            vec![Vec2::new(0.0, 0.0), Vec2::new(std::f64::consts::PI / 10.0, 1e-7)],
            [(0, 1, [0, 0]), (1, 0, [1, 0]), (0, 0, [0, 1])],
        )
        .unwrap();
        let back = parse_framework(&framework_to_json(&fw)).unwrap();
        assert_eq!(fw, back);
    }
}
