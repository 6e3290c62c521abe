//! Triangulations of the flat torus with a round hole, of the closed torus and
//! of the unit disk.
//!
//! Vertices are stored *unmerged*: the torus mesh covers the closed
//! fundamental parallelogram `{s + t tau : s, t in [0,1]}` and vertices on
//! opposite sides are distinct entries glued by [`EdgePair`]s. Every triangle is
//! therefore an honest planar triangle, and the lattice coordinates `s`, `t` are
//! linear on it; the gluing only shows up in the degree-of-freedom map.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Two glued edges, `first[0] ~ second[0]` and `first[1] ~ second[1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgePair {
    pub first: [usize; 2],
    pub second: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    /// Flat torus `C/(Z + tau Z)` minus a round disk.
    TorusWithHole,
    /// Flat torus without a hole.
    ClosedTorus,
    /// Unit disk, no identifications.
    Disk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cycle {
    A,
    B,
}

impl Cycle {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cycle::A => "a",
            Cycle::B => "b",
        }
    }
}

/// Vertex on the boundary loop with its angle parameter in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryVertex {
    pub vertex: usize,
    pub phi: f64,
}

/// Glued edge sets: crossing `dual_a` advances `s` by one (the `a`-cycle
/// crosses it), crossing `dual_b` advances `t` by one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutGraph {
    pub dual_a: Vec<EdgePair>,
    pub dual_b: Vec<EdgePair>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceModel {
    kind: SurfaceKind,
    lattice: Option<Complex64>,
    hole: Option<(Point, f64)>,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    identifications: Vec<EdgePair>,
    dof: Vec<usize>,
    n_dof: usize,
    boundary: Vec<BoundaryVertex>,
    /// Outer rim of the unmerged mesh (the cut parallelogram), counterclockwise.
    rim: Vec<usize>,
    cycle_a: Vec<usize>,
    cycle_b: Vec<usize>,
    cut: CutGraph,
}

/// Knobs for [`build_mesh_with`].
#[derive(Clone, Copy, Debug)]
pub struct MeshOptions {
    /// Lower bound on the number of boundary segments.
    pub min_boundary_segments: usize,
    /// Multiplies the angular and radial resolution (refinement studies).
    pub refinement: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            min_boundary_segments: 64,
            refinement: 1,
        }
    }
}

/// Largest admissible hole radius for lattice `tau`: 0.8 times the distance
/// from the parallelogram centre to its nearest side.
pub fn max_hole_radius(tau: Complex64) -> f64 {
    let side = 0.5 * tau.im.min(tau.im / tau.norm());
    0.8 * side
}

pub fn lattice_coords(tau: Complex64, p: Point) -> (f64, f64) {
    let t = p[1] / tau.im;
    (p[0] - t * tau.re, t)
}

/// Torus-with-hole mesh with default options.
pub fn build_mesh(tau: Complex64, eps: f64, h_target: f64) -> Result<SurfaceModel> {
    build_mesh_with(tau, eps, h_target, MeshOptions::default())
}

pub fn build_mesh_with(
    tau: Complex64,
    eps: f64,
    h_target: f64,
    opts: MeshOptions,
) -> Result<SurfaceModel> {
    if !(tau.im > 0.0) {
        return Err(Error::Geometry(format!("lattice modulus must have Im > 0, got {tau}")));
    }
    if !(h_target > 0.0) {
        return Err(Error::Geometry(format!("h_target must be positive, got {h_target}")));
    }
    let eps_max = max_hole_radius(tau);
    if !(eps > 0.0 && eps < eps_max) {
        return Err(Error::Geometry(format!(
            "hole radius {eps} does not embed (admissible range (0, {eps_max:.4}))"
        )));
    }
    let refine = opts.refinement.max(1);
    // the rim gets about h_target spacing, the hole at least 8 pi eps / h_target segments
    let resolved = (8.0 * PI * eps / h_target).ceil() as usize;
    let rim_resolved = (2.0 * (1.0 + tau.norm()) / h_target).ceil() as usize;
    let m = round_up(
        opts.min_boundary_segments
            .max(64)
            .max(resolved)
            .max(rim_resolved)
            * refine,
        4,
    );

    let center = [0.5 * (1.0 + tau.re), 0.5 * tau.im];
    let rim = rim_points(tau, center, m);
    let thetas: Vec<f64> = rim
        .iter()
        .map(|p| (p.z[1] - center[1]).atan2(p.z[0] - center[0]))
        .collect();

    let r_far = rim
        .iter()
        .map(|p| dist(p.z, center))
        .fold(0.0, f64::max);
    let layers = (((r_far / eps).ln() * m as f64 / (2.0 * PI)).ceil() as usize).max(4);

    // straight rays from the hole to the rim, geometric spacing along each ray
    let mut vertices = Vec::with_capacity((layers + 1) * m);
    for l in 0..=layers {
        let rho = l as f64 / layers as f64;
        for j in 0..m {
            let outer = rim[j].z;
            let p = if l == layers {
                outer
            } else {
                let r = eps * (dist(outer, center) / eps).powf(rho);
                [center[0] + r * thetas[j].cos(), center[1] + r * thetas[j].sin()]
            };
            vertices.push(p);
        }
    }
    let idx = |l: usize, j: usize| l * m + (j % m);
    let mut triangles = Vec::with_capacity(2 * layers * m);
    for l in 0..layers {
        for j in 0..m {
            let (p00, p01, p10, p11) = (idx(l, j), idx(l, j + 1), idx(l + 1, j), idx(l + 1, j + 1));
            triangles.extend(split_quad(&vertices, p00, p10, p11, p01));
        }
    }

    // boundary loop: phi = -arg(z - c), i.e. the orientation induced by M
    let mut boundary: Vec<BoundaryVertex> = (0..m)
        .map(|j| BoundaryVertex {
            vertex: idx(0, j),
            phi: (-thetas[j]).rem_euclid(2.0 * PI),
        })
        .collect();
    boundary.sort_by(|a, b| a.phi.total_cmp(&b.phi));

    let rim_vertices: Vec<usize> = (0..m).map(|j| idx(layers, j)).collect();
    let keys: Vec<RimKey> = rim.iter().map(|p| p.key).collect();
    let glue = glue_rim(&rim_vertices, &keys);

    let (cycle_a, cycle_b) = rim_cycles(&rim_vertices, &rim);

    let mut model = SurfaceModel {
        kind: SurfaceKind::TorusWithHole,
        lattice: Some(tau),
        hole: Some((center, eps)),
        vertices,
        triangles,
        identifications: glue.all,
        dof: Vec::new(),
        n_dof: 0,
        boundary,
        rim: rim_vertices,
        cycle_a,
        cycle_b,
        cut: CutGraph {
            dual_a: glue.vertical,
            dual_b: glue.horizontal,
        },
    };
    model.rebuild_dofs();
    model.validate()?;
    Ok(model)
}

/// Structured mesh of the closed torus with `n` cells per side.
pub fn build_closed_torus(tau: Complex64, n: usize) -> Result<SurfaceModel> {
    if !(tau.im > 0.0) {
        return Err(Error::Geometry(format!("lattice modulus must have Im > 0, got {tau}")));
    }
    let n = n.max(2);
    let point = |i: usize, j: usize| {
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        [s + t * tau.re, t * tau.im]
    };
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(point(i, j));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.extend(split_quad(
                &vertices,
                id(i, j),
                id(i + 1, j),
                id(i + 1, j + 1),
                id(i, j + 1),
            ));
        }
    }
    let mut rim = Vec::with_capacity(4 * n);
    let mut keys = Vec::with_capacity(4 * n);
    for i in 0..n {
        rim.push(id(i, 0));
        keys.push(if i == 0 { RimKey::Corner } else { RimKey::Horizontal(i) });
    }
    for j in 0..n {
        rim.push(id(n, j));
        keys.push(if j == 0 { RimKey::Corner } else { RimKey::Vertical(j) });
    }
    for i in (1..=n).rev() {
        rim.push(id(i, n));
        keys.push(if i == n { RimKey::Corner } else { RimKey::Horizontal(i) });
    }
    for j in (1..=n).rev() {
        rim.push(id(0, j));
        keys.push(if j == n { RimKey::Corner } else { RimKey::Vertical(j) });
    }
    let glue = glue_rim(&rim, &keys);
    let cycle_a = (0..=n).map(|i| id(i, 0)).collect();
    let cycle_b = (0..=n).map(|j| id(0, j)).collect();
    let mut model = SurfaceModel {
        kind: SurfaceKind::ClosedTorus,
        lattice: Some(tau),
        hole: None,
        vertices,
        triangles,
        identifications: glue.all,
        dof: Vec::new(),
        n_dof: 0,
        boundary: Vec::new(),
        rim,
        cycle_a,
        cycle_b,
        cut: CutGraph {
            dual_a: glue.vertical,
            dual_b: glue.horizontal,
        },
    };
    model.rebuild_dofs();
    model.validate()?;
    Ok(model)
}

/// Unit disk triangulated by concentric rings, boundary at `|z| = 1` with
/// `phi = arg z`. Rings are spaced by `h` and carry about `2 pi r / h` vertices.
pub fn build_disk(h: f64) -> Result<SurfaceModel> {
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::Geometry(format!("disk mesh size must lie in (0, 0.5), got {h}")));
    }
    let rings = (1.0 / h).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize];
    let mut ring_len = vec![1usize];
    for i in 1..=rings {
        let r = i as f64 / rings as f64;
        let count = ((2.0 * PI * r / h).round() as usize).max(6);
        ring_start.push(vertices.len());
        ring_len.push(count);
        for j in 0..count {
            let a = 2.0 * PI * j as f64 / count as f64;
            vertices.push([r * a.cos(), r * a.sin()]);
        }
    }
    let mut triangles = Vec::new();
    // centre fan
    for j in 0..ring_len[1] {
        let a = ring_start[1] + j;
        let b = ring_start[1] + (j + 1) % ring_len[1];
        triangles.push([0, a, b]);
    }
    for i in 1..rings {
        triangles.extend(stitch_rings(
            ring_start[i],
            ring_len[i],
            ring_start[i + 1],
            ring_len[i + 1],
        ));
    }
    let outer_start = ring_start[rings];
    let outer_len = ring_len[rings];
    let mut boundary: Vec<BoundaryVertex> = (0..outer_len)
        .map(|j| {
            let v = outer_start + j;
            let p = vertices[v];
            BoundaryVertex {
                vertex: v,
                phi: p[1].atan2(p[0]).rem_euclid(2.0 * PI),
            }
        })
        .collect();
    boundary.sort_by(|a, b| a.phi.total_cmp(&b.phi));
    let mut model = SurfaceModel {
        kind: SurfaceKind::Disk,
        lattice: None,
        hole: None,
        vertices,
        triangles,
        identifications: Vec::new(),
        dof: Vec::new(),
        n_dof: 0,
        boundary,
        rim: Vec::new(),
        cycle_a: Vec::new(),
        cycle_b: Vec::new(),
        cut: CutGraph::default(),
    };
    model.rebuild_dofs();
    model.validate()?;
    Ok(model)
}

/// Triangulates the band between two closed rings whose first vertices sit
/// at angle 0, advancing along whichever ring has the nearer next vertex.
fn stitch_rings(
    inner_start: usize,
    inner_len: usize,
    outer_start: usize,
    outer_len: usize,
) -> Vec<[usize; 3]> {
    let mut tris = Vec::with_capacity(inner_len + outer_len);
    let (mut i, mut o) = (0usize, 0usize);
    while i < inner_len || o < outer_len {
        let next_inner = (i + 1) as f64 / inner_len as f64;
        let next_outer = (o + 1) as f64 / outer_len as f64;
        let take_outer = i >= inner_len || (o < outer_len && next_outer <= next_inner);
        let vi = inner_start + i % inner_len;
        let vo = outer_start + o % outer_len;
        if take_outer {
            tris.push([vi, vo, outer_start + (o + 1) % outer_len]);
            o += 1;
        } else {
            tris.push([vi, vo, inner_start + (i + 1) % inner_len]);
            i += 1;
        }
    }
    tris
}

fn round_up(x: usize, m: usize) -> usize {
    x.div_ceil(m) * m
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

pub(crate) fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Splits the counterclockwise quad `a b c d` along its shorter diagonal.
fn split_quad(v: &[Point], a: usize, b: usize, c: usize, d: usize) -> [[usize; 3]; 2] {
    if dist(v[a], v[c]) <= dist(v[b], v[d]) {
        [[a, b, c], [a, c, d]]
    } else {
        [[a, b, d], [b, c, d]]
    }
}

/// Position of a rim vertex modulo the lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum RimKey {
    Corner,
    /// On the side `t = 0 ~ 1`, `s = i / K1`.
    Horizontal(usize),
    /// On the side `s = 0 ~ 1`, `t = j / K2`.
    Vertical(usize),
}

#[derive(Clone, Copy, Debug)]
struct RimPoint {
    z: Point,
    key: RimKey,
    /// 0 bottom, 1 right, 2 top, 3 left
    side: u8,
}

/// `m` points on the parallelogram boundary, counterclockwise from `0`.
///
/// Positions along each side are equiangular as seen from `center`, then
/// symmetrized under `s -> 1-s` (resp. `t -> 1-t`): the top side is the point
/// reflection of the bottom side through the centre, so opposite sides share
/// their lattice positions and stay glueable.
fn rim_points(tau: Complex64, center: Point, m: usize) -> Vec<RimPoint> {
    let at = |s: f64, t: f64| [s + t * tau.re, t * tau.im];
    let angle = |p: Point| (p[1] - center[1]).atan2(p[0] - center[0]);
    let (c00, c10, c01) = (at(0.0, 0.0), at(1.0, 0.0), at(0.0, 1.0));
    let bottom_extent = (angle(c10) - angle(c00)).rem_euclid(2.0 * PI);
    let half = m / 2;
    let k1 = ((half as f64 * bottom_extent / PI).round() as usize).clamp(2, half - 2);
    let k2 = half - k1;

    let positions = |from: Point, to: Point, k: usize| -> Vec<f64> {
        let (a0, a1) = (angle(from), angle(from) + (angle(to) - angle(from)).rem_euclid(2.0 * PI));
        let dir = [to[0] - from[0], to[1] - from[1]];
        let raw: Vec<f64> = (0..=k)
            .map(|i| {
                let a = a0 + (a1 - a0) * i as f64 / k as f64;
                let d = [a.cos(), a.sin()];
                // from + u dir = center + r d
                let det = dir[0] * (-d[1]) - dir[1] * (-d[0]);
                let rhs = [center[0] - from[0], center[1] - from[1]];
                (rhs[0] * (-d[1]) - rhs[1] * (-d[0])) / det
            })
            .collect();
        let mut sym: Vec<f64> = (0..=k).map(|i| 0.5 * (raw[i] + 1.0 - raw[k - i])).collect();
        sym[0] = 0.0;
        sym[k] = 1.0;
        sym
    };
    let s_pos = positions(c00, c10, k1);
    // the left side runs from tau down to 0 counterclockwise
    let t_down = positions(c01, c00, k2);
    let t_pos: Vec<f64> = t_down.iter().rev().map(|u| 1.0 - u).collect();

    let mut pts = Vec::with_capacity(m);
    for i in 0..k1 {
        let key = if i == 0 { RimKey::Corner } else { RimKey::Horizontal(i) };
        pts.push(RimPoint { z: at(s_pos[i], 0.0), key, side: 0 });
    }
    for j in 0..k2 {
        let key = if j == 0 { RimKey::Corner } else { RimKey::Vertical(j) };
        pts.push(RimPoint { z: at(1.0, t_pos[j]), key, side: 1 });
    }
    for i in (1..=k1).rev() {
        let key = if i == k1 { RimKey::Corner } else { RimKey::Horizontal(i) };
        pts.push(RimPoint { z: at(s_pos[i], 1.0), key, side: 2 });
    }
    for j in (1..=k2).rev() {
        let key = if j == k2 { RimKey::Corner } else { RimKey::Vertical(j) };
        pts.push(RimPoint { z: at(0.0, t_pos[j]), key, side: 3 });
    }
    pts
}

struct RimGlue {
    all: Vec<EdgePair>,
    /// Pairs of edges on the sides `s = 0` and `s = 1`.
    vertical: Vec<EdgePair>,
    /// Pairs of edges on the sides `t = 0` and `t = 1`.
    horizontal: Vec<EdgePair>,
}

fn glue_rim(rim: &[usize], keys: &[RimKey]) -> RimGlue {
    let m = rim.len();
    let mut by_keys: HashMap<(RimKey, RimKey), Vec<[usize; 2]>> = HashMap::new();
    for j in 0..m {
        let (u, v) = (j, (j + 1) % m);
        let (ku, kv) = (keys[u], keys[v]);
        let key = if ordered(ku, kv) { (ku, kv) } else { (kv, ku) };
        let edge = if ordered(ku, kv) { [rim[u], rim[v]] } else { [rim[v], rim[u]] };
        by_keys.entry(key).or_default().push(edge);
    }
    let mut entries: Vec<_> = by_keys.into_iter().collect();
    entries.sort_by_key(|(_, edges)| edges[0]);
    let mut out = RimGlue {
        all: Vec::new(),
        vertical: Vec::new(),
        horizontal: Vec::new(),
    };
    for ((ka, kb), edges) in entries {
        if edges.len() != 2 {
            continue;
        }
        let pair = EdgePair { first: edges[0], second: edges[1] };
        out.all.push(pair);
        let is_vertical = matches!(ka, RimKey::Vertical(_)) || matches!(kb, RimKey::Vertical(_));
        if is_vertical {
            out.vertical.push(pair);
        } else {
            out.horizontal.push(pair);
        }
    }
    out
}

fn ordered(a: RimKey, b: RimKey) -> bool {
    let rank = |k: RimKey| match k {
        RimKey::Corner => (0, 0),
        RimKey::Horizontal(i) => (1, i),
        RimKey::Vertical(j) => (2, j),
    };
    let (ra, rb) = (rank(a), rank(b));
    if ra.0 != rb.0 {
        return ra.0 < rb.0;
    }
    ra.1 <= rb.1
}

/// `a` runs along the bottom side (increasing `s`), `b` along the left side
/// (increasing `t`), both from the corner `0`.
fn rim_cycles(rim: &[usize], pts: &[RimPoint]) -> (Vec<usize>, Vec<usize>) {
    let m = rim.len();
    let start = (0..m)
        .find(|&j| pts[j].side == 0 && pts[j].key == RimKey::Corner)
        .expect("rim has a corner");
    let mut a = vec![rim[start]];
    let mut j = start;
    loop {
        j = (j + 1) % m;
        a.push(rim[j]);
        if pts[j].key == RimKey::Corner {
            break;
        }
    }
    // left side is traversed top-down in the rim; walk backwards from start
    let mut b = vec![rim[start]];
    let mut j = start;
    loop {
        j = (j + m - 1) % m;
        b.push(rim[j]);
        if pts[j].key == RimKey::Corner {
            break;
        }
    }
    (a, b)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

impl SurfaceModel {
    pub(crate) fn from_parts(
        kind: SurfaceKind,
        lattice: Option<Complex64>,
        hole: Option<(Point, f64)>,
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        identifications: Vec<EdgePair>,
        boundary: Vec<BoundaryVertex>,
        rim: Vec<usize>,
        cycles: (Vec<usize>, Vec<usize>),
        cut: CutGraph,
    ) -> Result<Self> {
        let mut model = SurfaceModel {
            kind,
            lattice,
            hole,
            vertices,
            triangles,
            identifications,
            dof: Vec::new(),
            n_dof: 0,
            boundary,
            rim,
            cycle_a: cycles.0,
            cycle_b: cycles.1,
            cut,
        };
        model.rebuild_dofs();
        model.validate()?;
        Ok(model)
    }

    fn rebuild_dofs(&mut self) {
        let mut uf = UnionFind((0..self.vertices.len()).collect());
        for pair in &self.identifications {
            uf.union(pair.first[0], pair.second[0]);
            uf.union(pair.first[1], pair.second[1]);
        }
        let mut label = HashMap::new();
        self.dof = (0..self.vertices.len())
            .map(|v| {
                let root = uf.find(v);
                let next = label.len();
                *label.entry(root).or_insert(next)
            })
            .collect();
        self.n_dof = label.len();
    }

    /// Checks orientation, edge incidence after gluing and loop structure.
    pub fn validate(&self) -> Result<()> {
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            if signed_area(a, b, c) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} is degenerate or inverted")));
            }
        }
        let mut incidence: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (u, v) = (self.dof[tri[e]], self.dof[tri[(e + 1) % 3]]);
                if u == v {
                    return Err(Error::Mesh("edge collapses under identification".into()));
                }
                *incidence.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        let boundary_dofs: std::collections::HashSet<usize> =
            self.boundary.iter().map(|b| self.dof[b.vertex]).collect();
        for (&(u, v), &count) in &incidence {
            let on_boundary = boundary_dofs.contains(&u) && boundary_dofs.contains(&v);
            match (count, on_boundary) {
                (2, _) => {}
                (1, true) => {}
                _ => {
                    return Err(Error::Mesh(format!(
                        "edge ({u},{v}) has {count} incident triangles after gluing"
                    )))
                }
            }
        }
        if self.boundary.windows(2).any(|w| w[1].phi <= w[0].phi)
            || self.boundary.iter().any(|b| !(0.0..2.0 * PI).contains(&b.phi))
        {
            return Err(Error::Mesh("boundary angles must increase strictly in [0, 2pi)".into()));
        }
        for path in [&self.cycle_a, &self.cycle_b] {
            if path.len() >= 2 && self.dof[path[0]] != self.dof[*path.last().unwrap()] {
                return Err(Error::Mesh("cycle path is not closed after gluing".into()));
            }
            if path.iter().any(|v| boundary_dofs.contains(&self.dof[*v])) {
                return Err(Error::Mesh("cycle path touches the hole".into()));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn lattice(&self) -> Option<Complex64> {
        self.lattice
    }

    /// Centre and radius of the hole.
    pub fn hole(&self) -> Option<(Point, f64)> {
        self.hole
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn identifications(&self) -> &[EdgePair] {
        &self.identifications
    }

    /// Degree of freedom of each vertex after gluing.
    pub fn dof(&self) -> &[usize] {
        &self.dof
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn boundary(&self) -> &[BoundaryVertex] {
        &self.boundary
    }

    pub fn rim(&self) -> &[usize] {
        &self.rim
    }

    pub fn cycle(&self, c: Cycle) -> &[usize] {
        match c {
            Cycle::A => &self.cycle_a,
            Cycle::B => &self.cycle_b,
        }
    }

    pub fn cut_graph(&self) -> &CutGraph {
        &self.cut
    }

    /// `V - E + F` of the glued complex.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (u, v) = (self.dof[tri[e]], self.dof[tri[(e + 1) % 3]]);
                edges.insert((u.min(v), u.max(v)));
            }
        }
        self.n_dof as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Longest edge length.
    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |e| (t[e], t[(e + 1) % 3])))
            .map(|(u, v)| dist(self.vertices[u], self.vertices[v]))
            .fold(0.0, f64::max)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        signed_area(a, b, c)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = PI;
        for tri in &self.triangles {
            for e in 0..3 {
                let p = self.vertices[tri[e]];
                let q = self.vertices[tri[(e + 1) % 3]];
                let r = self.vertices[tri[(e + 2) % 3]];
                let (u, v) = ([q[0] - p[0], q[1] - p[1]], [r[0] - p[0], r[1] - p[1]]);
                let cos = (u[0] * v[0] + u[1] * v[1]) / (dist(p, q) * dist(p, r));
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau_i() -> Complex64 {
        Complex64::new(0.0, 1.0)
    }

    #[test]
    fn square_torus_with_hole_topology() {
        let s = build_mesh(tau_i(), 0.1, 0.05).unwrap();
        assert_eq!(s.kind(), SurfaceKind::TorusWithHole);
        assert_eq!(s.euler_characteristic(), -1);
        assert!(s.boundary().len() >= 64);
        // closing the hole with a cone adds one vertex, M edges and M faces
        assert_eq!(s.euler_characteristic() + 1, 0);
        assert!(s.min_angle() > 0.3);
    }

    #[test]
    fn hole_too_large_is_rejected() {
        assert!(matches!(build_mesh(tau_i(), 0.55, 0.05), Err(Error::Geometry(_))));
        assert!(matches!(build_mesh(tau_i(), 0.0, 0.05), Err(Error::Geometry(_))));
        assert!(matches!(
            build_mesh(Complex64::new(0.0, -1.0), 0.1, 0.05),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn skewed_lattice_mesh_is_valid() {
        let tau = Complex64::new(0.3, 1.1);
        let s = build_mesh(tau, 0.05, 0.05).unwrap();
        assert_eq!(s.euler_characteristic(), -1);
        for c in [Cycle::A, Cycle::B] {
            let path = s.cycle(c);
            assert_eq!(s.dof()[path[0]], s.dof()[*path.last().unwrap()]);
        }
        let a = s.cycle(Cycle::A);
        let end = s.vertices()[*a.last().unwrap()];
        assert!((end[0] - 1.0).abs() < 1e-12 && end[1].abs() < 1e-12);
        let b = s.cycle(Cycle::B);
        let end = s.vertices()[*b.last().unwrap()];
        assert!((end[0] - tau.re).abs() < 1e-12 && (end[1] - tau.im).abs() < 1e-12);
    }

    #[test]
    fn resolution_follows_h_target() {
        let s = build_mesh(tau_i(), 0.2, 0.005).unwrap();
        assert!(s.boundary().len() as f64 >= 8.0 * PI * 0.2 / 0.005);
        let opts = MeshOptions { min_boundary_segments: 256, ..Default::default() };
        let s = build_mesh_with(tau_i(), 0.2, 0.05, opts).unwrap();
        assert_eq!(s.boundary().len(), 256);
        assert!(s.max_edge() < 0.1);
    }

    #[test]
    fn boundary_orientation_is_induced() {
        // walking along increasing phi keeps M on the left: clockwise around the hole
        let s = build_mesh(tau_i(), 0.1, 0.05).unwrap();
        let (c, _) = s.hole().unwrap();
        let b = s.boundary();
        let p0 = s.vertices()[b[0].vertex];
        let p1 = s.vertices()[b[1].vertex];
        let cross = (p0[0] - c[0]) * (p1[1] - c[1]) - (p0[1] - c[1]) * (p1[0] - c[0]);
        assert!(cross < 0.0);
        assert_eq!(b[0].phi, 0.0);
    }

    #[test]
    fn closed_torus_and_disk_topology() {
        let t = build_closed_torus(tau_i(), 8).unwrap();
        assert_eq!(t.euler_characteristic(), 0);
        assert_eq!(t.n_dof(), 64);
        let d = build_disk(0.1).unwrap();
        assert_eq!(d.euler_characteristic(), 1);
        assert!(d.boundary().len() >= 60);
    }

    #[test]
    fn cut_graph_pairs_opposite_sides() {
        let s = build_mesh(tau_i(), 0.1, 0.05).unwrap();
        let m = s.boundary().len();
        let cut = s.cut_graph();
        assert_eq!(cut.dual_a.len() + cut.dual_b.len(), m / 2);
        let tau = tau_i();
        for pair in &cut.dual_a {
            let (s0, _) = lattice_coords(tau, s.vertices()[pair.first[0]]);
            let (s1, _) = lattice_coords(tau, s.vertices()[pair.second[0]]);
            assert!(((s0 - s1).abs() - 1.0).abs() < 1e-12);
        }
        for pair in &cut.dual_b {
            let (_, t0) = lattice_coords(tau, s.vertices()[pair.first[1]]);
            let (_, t1) = lattice_coords(tau, s.vertices()[pair.second[1]]);
            assert!(((t0 - t1).abs() - 1.0).abs() < 1e-12);
        }
    }
}
