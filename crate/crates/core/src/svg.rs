//! SVG drawing of a finite patch: filled faces, edges and vertices.

use std::fmt::Write as _;

use crate::error::Result;
use crate::framework::{add_shift, PeriodicFramework, TileRange, Vec2};
use crate::topology::FaceComplex;

const PALETTE: [&str; 8] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"];

/// Fill colour of a face orbit; stable across runs.
pub fn face_color(face: usize) -> &'static str {
    PALETTE[face % PALETTE.len()]
}

pub fn export_svg(fw: &PeriodicFramework, fc: Option<&FaceComplex>, tiles: &TileRange) -> Result<String> {
    let patch = fw.realize_patch(tiles)?;
    let pts: Vec<Vec2> = patch.vertices.iter().map(|v| v.position).collect();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let pad = 0.05 * (hi - lo).max().max(1e-9);
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    // flip y so the drawing has the usual orientation
    let map = |p: Vec2| (p.x - lo.x + pad, hi.y - p.y + pad);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}">"#);
    if let Some(fc) = fc {
        let _ = writeln!(out, r#"<g id="faces" stroke="none" fill-opacity="0.6">"#);
        for f in &fc.faces {
            for a in tiles.shifts() {
                if !f.boundary.iter().all(|s| tiles.contains(add_shift(s.shift, a))) {
                    continue;
                }
                let poly: Vec<String> = f
                    .polygon(fw, a)
                    .into_iter()
                    .map(|p| {
                        let (x, y) = map(p);
                        format!("{x},{y}")
                    })
                    .collect();
                let _ = writeln!(out, r#"<polygon fill="{}" points="{}"/>"#, face_color(f.id), poly.join(" "));
            }
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, r#"<g id="edges" stroke="black" stroke-width="{stroke}">"#);
    for e in &patch.edges {
        let (x1, y1) = map(pts[e.tail]);
        let (x2, y2) = map(pts[e.head]);
        let _ = writeln!(out, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r#"<g id="vertices" fill="black">"#);
    for p in &pts {
        let (x, y) = map(*p);
        let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="{}"/>"#, 2.0 * stroke);
    }
    let _ = writeln!(out, "</g>\n</svg>");
    Ok(out)
}
