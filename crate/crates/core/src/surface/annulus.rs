//! Conformal modulus of planar annuli by a capacity solve.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::fem::DirichletSolver;
use super::mesh::{signed_area, Point, SurfaceKind, SurfaceModel};
use crate::error::{Error, Result};

/// Triangulated annulus with its two boundary contours.
#[derive(Clone, Debug)]
pub struct PlanarAnnulus {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
}

/// `r_in < |z| < r_out` on a polar grid with square-ish cells: `m` angular
/// segments and geometric radii.
pub fn round_annulus(r_in: f64, r_out: f64, m: usize) -> Result<PlanarAnnulus> {
    if !(r_in > 0.0 && r_out > r_in) || m < 3 {
        return Err(Error::Geometry(format!(
            "invalid annulus {r_in} < |z| < {r_out} with {m} segments"
        )));
    }
    let layers = (((r_out / r_in).ln() * m as f64 / (2.0 * PI)).ceil() as usize).max(1);
    let mut vertices = Vec::with_capacity((layers + 1) * m);
    for j in 0..=layers {
        let r = r_in * (r_out / r_in).powf(j as f64 / layers as f64);
        for i in 0..m {
            let th = 2.0 * PI * i as f64 / m as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let id = |j: usize, i: usize| j * m + i % m;
    let mut triangles = Vec::with_capacity(2 * layers * m);
    for j in 0..layers {
        for i in 0..m {
            let (a, b, c, d) = (id(j, i), id(j, i + 1), id(j + 1, i + 1), id(j + 1, i));
            triangles.push([a, c, b]);
            triangles.push([a, d, c]);
        }
    }
    Ok(PlanarAnnulus {
        vertices,
        triangles,
        inner: (0..m).collect(),
        outer: (layers * m..(layers + 1) * m).collect(),
    })
}

/// The fundamental parallelogram minus the hole, cut open along the glued
/// sides: an annulus between the hole and the parallelogram rim.
pub fn collar_annulus(model: &SurfaceModel) -> Result<PlanarAnnulus> {
    if model.kind() != SurfaceKind::TorusWithHole {
        return Err(Error::Geometry("collar annulus needs a torus with a hole".into()));
    }
    Ok(PlanarAnnulus {
        vertices: model.vertices().to_vec(),
        triangles: model.triangles().to_vec(),
        inner: model.boundary().iter().map(|b| b.vertex).collect(),
        outer: model.rim().to_vec(),
    })
}

/// `1 / cap`, where `cap = int |grad u|^2` for `u = 0` on the inner and
/// `u = 1` on the outer contour.
pub fn annulus_modulus(a: &PlanarAnnulus) -> Result<f64> {
    for tri in &a.triangles {
        if signed_area(a.vertices[tri[0]], a.vertices[tri[1]], a.vertices[tri[2]]) <= 0.0 {
            return Err(Error::Mesh("annulus has a degenerate triangle".into()));
        }
    }
    let dof: Vec<usize> = (0..a.vertices.len()).collect();
    let constrained: Vec<usize> = a.inner.iter().chain(&a.outer).copied().collect();
    let solver = DirichletSolver::new(&a.vertices, &a.triangles, &dof, dof.len(), constrained)?;
    let data = DMatrix::from_fn(a.inner.len() + a.outer.len(), 1, |i, _| {
        if i < a.inner.len() {
            0.0
        } else {
            1.0
        }
    });
    let u = solver.solve(&data)?;
    let cap = solver.energy_matrix(&u)[(0, 0)];
    if !(cap > 0.0) {
        return Err(Error::Solver(format!("nonpositive capacity {cap:e}")));
    }
    Ok(1.0 / cap)
}

/// Modulus of the annulus around the boundary curve in the double: the
/// collar annulus and its mirror image in series.
pub fn doubled_collar_modulus(model: &SurfaceModel) -> Result<f64> {
    Ok(2.0 * annulus_modulus(&collar_annulus(model)?)?)
}
