//! Plain-text mesh format.
//!
//! ```text
//! kind torus-with-hole
//! lattice <re> <im>
//! hole <cx> <cy> <eps>
//! v <x> <y>
//! t <i> <j> <k>
//! p <a0> <a1> <b0> <b1>      glued edges, a0~b0 and a1~b1
//! b <i> <phi>                boundary loop, in order
//! c a|b <i>                  cycle paths, in order
//! r <i>                      outer rim, in order
//! x a|b <a0> <a1> <b0> <b1>  cut graph edges
//! ```
//! `lattice` and `hole` are omitted when absent. Blank lines and `#`
//! comments are ignored.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use super::mesh::{BoundaryVertex, CutGraph, EdgePair, SurfaceKind, SurfaceModel};
use crate::error::{Error, Result};
use crate::textio::{fmt_f64, parse_f64};

fn kind_str(k: SurfaceKind) -> &'static str {
    match k {
        SurfaceKind::TorusWithHole => "torus-with-hole",
        SurfaceKind::ClosedTorus => "closed-torus",
        SurfaceKind::Disk => "disk",
    }
}

pub fn mesh_to_text(m: &SurfaceModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", kind_str(m.kind()));
    if let Some(t) = m.lattice() {
        let _ = writeln!(out, "lattice {} {}", fmt_f64(t.re), fmt_f64(t.im));
    }
    if let Some((c, eps)) = m.hole() {
        let _ = writeln!(out, "hole {} {} {}", fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(eps));
    }
    for p in m.vertices() {
        let _ = writeln!(out, "v {} {}", fmt_f64(p[0]), fmt_f64(p[1]));
    }
    for t in m.triangles() {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    let pair = |e: &EdgePair| format!("{} {} {} {}", e.first[0], e.first[1], e.second[0], e.second[1]);
    for e in m.identifications() {
        let _ = writeln!(out, "p {}", pair(e));
    }
    for b in m.boundary() {
        let _ = writeln!(out, "b {} {}", b.vertex, fmt_f64(b.phi));
    }
    for (tag, path) in [("a", m.cycle(super::Cycle::A)), ("b", m.cycle(super::Cycle::B))] {
        for v in path {
            let _ = writeln!(out, "c {tag} {v}");
        }
    }
    for v in m.rim() {
        let _ = writeln!(out, "r {v}");
    }
    let cut = m.cut_graph();
    for (tag, edges) in [("a", &cut.dual_a), ("b", &cut.dual_b)] {
        for e in edges {
            let _ = writeln!(out, "x {tag} {}", pair(e));
        }
    }
    out
}

pub fn mesh_from_text(text: &str) -> Result<SurfaceModel> {
    let mut kind = None;
    let mut lattice = None;
    let mut hole = None;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut pairs = Vec::new();
    let mut boundary = Vec::new();
    let (mut cycle_a, mut cycle_b) = (Vec::new(), Vec::new());
    let mut rim = Vec::new();
    let mut cut = CutGraph::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("mesh line {}: {what}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let idx = |i: usize| -> Result<usize> {
            fields
                .get(i)
                .ok_or_else(|| bad("missing field"))?
                .parse::<usize>()
                .map_err(|_| bad("bad index"))
        };
        let real = |i: usize| -> Result<f64> { parse_f64(fields.get(i).ok_or_else(|| bad("missing field"))?) };
        let edge_pair = |o: usize| -> Result<EdgePair> {
            Ok(EdgePair {
                first: [idx(o)?, idx(o + 1)?],
                second: [idx(o + 2)?, idx(o + 3)?],
            })
        };
        match fields[0] {
            "kind" => {
                kind = Some(match fields.get(1).copied() {
                    Some("torus-with-hole") => SurfaceKind::TorusWithHole,
                    Some("closed-torus") => SurfaceKind::ClosedTorus,
                    Some("disk") => SurfaceKind::Disk,
                    _ => return Err(bad("unknown kind")),
                })
            }
            "lattice" => lattice = Some(Complex64::new(real(1)?, real(2)?)),
            "hole" => hole = Some(([real(1)?, real(2)?], real(3)?)),
            "v" => vertices.push([real(1)?, real(2)?]),
            "t" => triangles.push([idx(1)?, idx(2)?, idx(3)?]),
            "p" => pairs.push(edge_pair(1)?),
            "b" => boundary.push(BoundaryVertex {
                vertex: idx(1)?,
                phi: real(2)?,
            }),
            "c" => match fields.get(1).copied() {
                Some("a") => cycle_a.push(idx(2)?),
                Some("b") => cycle_b.push(idx(2)?),
                _ => return Err(bad("cycle tag must be a or b")),
            },
            "r" => rim.push(idx(1)?),
            "x" => match fields.get(1).copied() {
                Some("a") => cut.dual_a.push(edge_pair(2)?),
                Some("b") => cut.dual_b.push(edge_pair(2)?),
                _ => return Err(bad("cut tag must be a or b")),
            },
            _ => return Err(bad("unknown record")),
        }
    }
    let nv = vertices.len();
    let in_range = triangles.iter().flatten().all(|&v| v < nv)
        && pairs.iter().chain(&cut.dual_a).chain(&cut.dual_b).all(|p| {
            p.first.iter().chain(&p.second).all(|&v| v < nv)
        })
        && boundary.iter().all(|b| b.vertex < nv)
        && cycle_a.iter().chain(&cycle_b).chain(&rim).all(|&v| v < nv);
    if !in_range {
        return Err(Error::Parse("vertex index out of range".into()));
    }
    let kind = kind.ok_or_else(|| Error::Parse("missing kind record".into()))?;
    SurfaceModel::from_parts(
        kind,
        lattice,
        hole,
        vertices,
        triangles,
        pairs,
        boundary,
        rim,
        (cycle_a, cycle_b),
        cut,
    )
}

pub fn save_mesh(m: &SurfaceModel, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_text(m))?;
    Ok(())
}

pub fn load_mesh(path: &Path) -> Result<SurfaceModel> {
    mesh_from_text(&std::fs::read_to_string(path)?)
}
