//! P1 finite elements: stiffness assembly, Dirichlet solves and the weak DN matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use num_complex::Complex64;

use super::mesh::{signed_area, Point, SurfaceModel};
use crate::circle::{BoundaryOperator, OperatorKind};
use crate::error::{Error, Result};

const RESIDUAL_TOL: f64 = 1e-10;

/// Gradients of the three barycentric coordinates and the area.
pub(crate) fn element_gradients(p: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let area = signed_area(p[0], p[1], p[2]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        // gradient of lambda_i is the inward normal of the opposite edge / (2 area)
        g[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
    }
    (g, area)
}

/// Approximate minimum degree ordering of a symmetric pattern; returns the
/// elimination order and its inverse.
fn fill_reducing_order(a: &CscMatrix<f64>) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let (p, pinv, _) = amd::order(n, a.col_offsets(), a.row_indices(), &amd::Control::default())
        .map_err(|s| Error::Solver(format!("ordering failed: {s:?}")))?;
    Ok((p, pinv))
}

/// Dirichlet problem for the Laplacian on a glued P1 mesh with a fixed set of
/// constrained degrees of freedom. The interior block is factored once;
/// [`solve`](Self::solve) takes `&self` and may be called from several threads.
pub struct DirichletSolver {
    n_dof: usize,
    constrained: Vec<usize>,
    interior: Vec<usize>,
    stiffness: CscMatrix<f64>,
    k_ib: CscMatrix<f64>,
    k_ii: CscMatrix<f64>,
    /// `order[k]` is the interior unknown eliminated k-th
    order: Vec<usize>,
    factor: CscCholesky<f64>,
}

impl DirichletSolver {
    /// `constrained` lists the dofs carrying Dirichlet data, in the order
    /// the data will be supplied.
    pub fn new(
        vertices: &[Point],
        triangles: &[[usize; 3]],
        dof: &[usize],
        n_dof: usize,
        constrained: Vec<usize>,
    ) -> Result<Self> {
        if constrained.is_empty() {
            return Err(Error::Solver("no constrained degrees of freedom".into()));
        }
        let mut constrained_index = vec![None; n_dof];
        for (i, &d) in constrained.iter().enumerate() {
            if constrained_index[d].is_some() {
                return Err(Error::Solver(format!("dof {d} constrained twice")));
            }
            constrained_index[d] = Some(i);
        }
        let interior: Vec<usize> = (0..n_dof).filter(|&d| constrained_index[d].is_none()).collect();
        let mut interior_index = vec![None; n_dof];
        for (i, &d) in interior.iter().enumerate() {
            interior_index[d] = Some(i);
        }
        let (ni, nb) = (interior.len(), constrained.len());
        let mut full = CooMatrix::new(n_dof, n_dof);
        let mut k_ii = CooMatrix::new(ni, ni);
        let mut k_ib = CooMatrix::new(ni, nb);
        for tri in triangles {
            let (g, area) = element_gradients(tri.map(|v| vertices[v]));
            for a in 0..3 {
                for b in 0..3 {
                    let k = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    let (da, db) = (dof[tri[a]], dof[tri[b]]);
                    full.push(da, db, k);
                    if let Some(ia) = interior_index[da] {
                        match (interior_index[db], constrained_index[db]) {
                            (Some(ib), _) => k_ii.push(ia, ib, k),
                            (None, Some(cb)) => k_ib.push(ia, cb, k),
                            (None, None) => unreachable!(),
                        }
                    }
                }
            }
        }
        let k_ii = CscMatrix::from(&k_ii);
        let (order, position) = fill_reducing_order(&k_ii)?;
        let mut permuted = CooMatrix::new(ni, ni);
        for (r, c, &v) in k_ii.triplet_iter() {
            permuted.push(position[r], position[c], v);
        }
        let factor = CscCholesky::factor(&CscMatrix::from(&permuted))
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e}")))?;
        Ok(Self {
            n_dof,
            constrained,
            interior,
            stiffness: CscMatrix::from(&full),
            k_ib: CscMatrix::from(&k_ib),
            k_ii,
            order,
            factor,
        })
    }

    /// Solver with the boundary loop constrained (or a single pinned dof for
    /// surfaces without boundary).
    pub fn for_surface(model: &SurfaceModel) -> Result<Self> {
        let constrained = if model.boundary().is_empty() {
            vec![0]
        } else {
            model.boundary().iter().map(|b| model.dof()[b.vertex]).collect()
        };
        Self::new(
            model.vertices(),
            model.triangles(),
            model.dof(),
            model.n_dof(),
            constrained,
        )
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn stiffness(&self) -> &CscMatrix<f64> {
        &self.stiffness
    }

    /// Solves `K_II u_I = rhs_I - K_IB g` for each column, returning full dof
    /// vectors. `rhs` (interior load, one row per dof) may be omitted.
    pub fn solve_with_load(
        &self,
        data: &DMatrix<f64>,
        load: Option<&DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        if data.nrows() != self.constrained.len() {
            return Err(Error::Solver(format!(
                "expected {} boundary values per column, got {}",
                self.constrained.len(),
                data.nrows()
            )));
        }
        let mut rhs = -(&self.k_ib * data);
        if let Some(load) = load {
            for (i, &d) in self.interior.iter().enumerate() {
                for c in 0..rhs.ncols() {
                    rhs[(i, c)] += load[(d, c)];
                }
            }
        }
        let permuted = DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |k, c| rhs[(self.order[k], c)]);
        let x = self.factor.solve(&permuted);
        let mut u_i = DMatrix::zeros(rhs.nrows(), rhs.ncols());
        for (k, &i) in self.order.iter().enumerate() {
            u_i.row_mut(i).copy_from(&x.row(k));
        }
        let residual = &self.k_ii * &u_i - &rhs;
        for c in 0..rhs.ncols() {
            let scale = rhs.column(c).norm().max(f64::MIN_POSITIVE);
            let rel = residual.column(c).norm() / scale;
            if rel > RESIDUAL_TOL && rhs.column(c).norm() > 0.0 {
                return Err(Error::Solver(format!("relative residual {rel:e} in column {c}")));
            }
        }
        let mut u = DMatrix::zeros(self.n_dof, data.ncols());
        for (i, &d) in self.constrained.iter().enumerate() {
            u.row_mut(d).copy_from(&data.row(i));
        }
        for (i, &d) in self.interior.iter().enumerate() {
            u.row_mut(d).copy_from(&u_i.row(i));
        }
        Ok(u)
    }

    pub fn solve(&self, data: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.solve_with_load(data, None)
    }

    /// `u^T K u` per column pair.
    pub fn energy_matrix(&self, u: &DMatrix<f64>) -> DMatrix<f64> {
        u.transpose() * (&self.stiffness * u)
    }
}

/// Discrete harmonic extension of boundary values `g` (one per boundary-loop
/// vertex, in loop order); returns one value per dof.
pub fn solve_dirichlet(model: &SurfaceModel, g: &[f64]) -> Result<DVector<f64>> {
    let solver = DirichletSolver::for_surface(model)?;
    let data = DMatrix::from_column_slice(g.len(), 1, g);
    let u = solver.solve(&data)?;
    Ok(u.column(0).into_owned())
}

/// Dirichlet energy `int |grad u|^2` of a dof vector.
pub fn dirichlet_energy(model: &SurfaceModel, u: &DVector<f64>) -> f64 {
    let mut e = 0.0;
    for tri in model.triangles() {
        let (g, area) = element_gradients(tri.map(|v| model.vertices()[v]));
        let mut grad = [0.0; 2];
        for a in 0..3 {
            let val = u[model.dof()[tri[a]]];
            grad[0] += val * g[a][0];
            grad[1] += val * g[a][1];
        }
        e += area * (grad[0] * grad[0] + grad[1] * grad[1]);
    }
    e
}

/// Real boundary data `[1, cos phi, sin phi, ..., cos N phi, sin N phi]` on the
/// boundary loop, one column each.
fn real_mode_data(model: &SurfaceModel, n: usize) -> DMatrix<f64> {
    let b = model.boundary();
    DMatrix::from_fn(b.len(), 2 * n + 1, |i, c| {
        let phi = b[i].phi;
        match c {
            0 => 1.0,
            _ => {
                let k = c.div_ceil(2) as f64;
                if c % 2 == 1 {
                    (k * phi).cos()
                } else {
                    (k * phi).sin()
                }
            }
        }
    })
}

/// Complex combination turning real columns into `e^{ik phi}`, `k = -N..N`.
fn mode_combination(n: usize) -> DMatrix<Complex64> {
    let mut t = DMatrix::zeros(2 * n + 1, 2 * n + 1);
    for (col, k) in (-(n as i64)..=n as i64).enumerate() {
        if k == 0 {
            t[(0, col)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let m = k.unsigned_abs() as usize;
        t[(2 * m - 1, col)] = Complex64::new(1.0, 0.0);
        t[(2 * m, col)] = Complex64::new(0.0, k.signum() as f64);
    }
    t
}

/// Minimum number of boundary vertices for truncation `n`.
pub fn required_boundary_vertices(n: usize) -> usize {
    8 * n
}

/// DN matrix in the Fourier basis, `Lambda_{jk} = (1/2pi) int grad u_k . grad conj(u_j)`
/// over discrete harmonic extensions of the interpolated modes.
pub fn assemble_dn(model: &SurfaceModel, n: usize) -> Result<BoundaryOperator> {
    let solver = DirichletSolver::for_surface(model)?;
    assemble_dn_with(model, &solver, n)
}

pub fn assemble_dn_with(
    model: &SurfaceModel,
    solver: &DirichletSolver,
    n: usize,
) -> Result<BoundaryOperator> {
    Ok(assemble_dn_raw(model, solver, n)?.hermitized())
}

/// The DN matrix before Hermitian averaging.
pub fn assemble_dn_raw(
    model: &SurfaceModel,
    solver: &DirichletSolver,
    n: usize,
) -> Result<BoundaryOperator> {
    let required = required_boundary_vertices(n);
    if model.boundary().len() < required {
        return Err(Error::Resolution {
            vertices: model.boundary().len(),
            n,
            required,
        });
    }
    let u = solver.solve(&real_mode_data(model, n))?;
    let energy = solver.energy_matrix(&u).map(|x| Complex64::new(x, 0.0));
    let t = mode_combination(n);
    let lam = t.adjoint() * energy * t / Complex64::new(2.0 * PI, 0.0);
    BoundaryOperator::new(n, lam, OperatorKind::Dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::dn_disk;
    use crate::surface::mesh::{build_disk, build_mesh};

    #[test]
    fn constants_are_harmonic() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.2, 0.05).unwrap();
        let g = vec![1.0; s.boundary().len()];
        let u = solve_dirichlet(&s, &g).unwrap();
        assert!(u.iter().all(|x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn disk_solution_matches_r_cubed() {
        let h = 0.05;
        let d = build_disk(h).unwrap();
        let g: Vec<f64> = d.boundary().iter().map(|b| (3.0 * b.phi).cos()).collect();
        let u = solve_dirichlet(&d, &g).unwrap();
        let mut err: f64 = 0.0;
        for (v, p) in d.vertices().iter().enumerate() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let exact = r.powi(3) * (3.0 * p[1].atan2(p[0])).cos();
            err = err.max((u[d.dof()[v]] - exact).abs());
        }
        assert!(err < 10.0 * h * h, "max error {err}");
    }

    #[test]
    fn mode_combination_reproduces_complex_modes() {
        let d = build_disk(0.2).unwrap();
        let real = real_mode_data(&d, 3).map(|x| Complex64::new(x, 0.0));
        let modes = real * mode_combination(3);
        for (i, b) in d.boundary().iter().enumerate() {
            for (col, k) in (-3i64..=3).enumerate() {
                let z = Complex64::from_polar(1.0, k as f64 * b.phi);
                assert!((modes[(i, col)] - z).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn disk_dn_close_to_exact() {
        let d = build_disk(0.05).unwrap();
        let dn = assemble_dn(&d, 4).unwrap();
        let exact = dn_disk(4).unwrap();
        let rel = (dn.matrix() - exact.matrix()).norm() / exact.matrix().norm();
        assert!(rel < 2e-2, "relative error {rel}");
    }

    #[test]
    fn raw_dn_is_hermitian_and_kills_constants() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.1, 0.05).unwrap();
        let solver = DirichletSolver::for_surface(&s).unwrap();
        let raw = assemble_dn_raw(&s, &solver, 8).unwrap();
        let m = raw.matrix();
        assert!((m - m.adjoint()).norm() <= 1e-8 * m.norm());
        let diag = raw.hermitized().dn_diagnostics();
        assert!(diag.is_valid(), "{diag:?}");
    }

    #[test]
    fn resolution_is_checked() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.1, 0.05).unwrap();
        let n = s.boundary().len() / 8 + 1;
        assert!(matches!(assemble_dn(&s, n), Err(Error::Resolution { .. })));
    }
}
