//! Harmonic 1-forms normal to the boundary, their periods and boundary traces.
//!
//! A form is stored as one constant vector per triangle (the gradient of a
//! piecewise-linear potential on the unmerged mesh). Exact forms on the glued
//! surface have single-valued potentials; the cohomology generators use the
//! lattice coordinates `s`, `t`, which jump by one across the glued sides.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::fem::{element_gradients, DirichletSolver};
use super::mesh::{lattice_coords, Cycle, SurfaceKind, SurfaceModel};
use crate::circle::{hilbert_from_dn, BoundaryFunction, BoundaryOperator};
use crate::error::{Error, Result};
use crate::spectral::SpectralData;

const CONDITION_LIMIT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForm {
    gradients: Vec<[f64; 2]>,
    /// Values on unmerged vertices, when the form is `dV` of a known potential.
    potential: Option<Vec<f64>>,
}

impl DiscreteForm {
    pub fn from_potential(model: &SurfaceModel, potential: Vec<f64>) -> Self {
        let gradients = model
            .triangles()
            .iter()
            .map(|tri| {
                let (g, _) = element_gradients(tri.map(|v| model.vertices()[v]));
                let mut out = [0.0; 2];
                for a in 0..3 {
                    out[0] += potential[tri[a]] * g[a][0];
                    out[1] += potential[tri[a]] * g[a][1];
                }
                out
            })
            .collect();
        Self {
            gradients,
            potential: Some(potential),
        }
    }

    pub fn gradients(&self) -> &[[f64; 2]] {
        &self.gradients
    }

    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    /// `*(p dx + q dy) = -q dx + p dy`.
    pub fn star(&self) -> Self {
        Self {
            gradients: self.gradients.iter().map(|&[p, q]| [-q, p]).collect(),
            potential: None,
        }
    }

    /// `x * self + y * other`.
    pub fn combine(&self, x: f64, other: &Self, y: f64) -> Self {
        let gradients = self
            .gradients
            .iter()
            .zip(&other.gradients)
            .map(|(a, b)| [x * a[0] + y * b[0], x * a[1] + y * b[1]])
            .collect();
        let potential = match (&self.potential, &other.potential) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(u, v)| x * u + y * v).collect()),
            _ => None,
        };
        Self {
            gradients,
            potential,
        }
    }

    /// Largest mismatch of the tangential component across an edge, glued
    /// edges included. Zero for closed forms.
    pub fn closedness_defect(&self, model: &SurfaceModel) -> f64 {
        let adj = EdgeAdjacency::new(model);
        let mut worst: f64 = 0.0;
        for (&(u, v), tris) in &adj.by_edge {
            let mut values: Vec<f64> = tris.iter().map(|&t| self.along(model, t, u, v)).collect();
            if let Some((pu, pv, t)) = adj.partner(u, v) {
                values.push(self.along(model, t, pu, pv));
            }
            for w in values.windows(2) {
                worst = worst.max((w[0] - w[1]).abs());
            }
        }
        worst
    }

    fn along(&self, model: &SurfaceModel, t: usize, u: usize, v: usize) -> f64 {
        let (pu, pv) = (model.vertices()[u], model.vertices()[v]);
        let g = self.gradients[t];
        g[0] * (pv[0] - pu[0]) + g[1] * (pv[1] - pu[1])
    }
}

/// Triangles incident to each unmerged edge, and the glued partner of rim edges.
struct EdgeAdjacency {
    by_edge: HashMap<(usize, usize), Vec<usize>>,
    glued: HashMap<(usize, usize), (usize, usize)>,
}

impl EdgeAdjacency {
    fn new(model: &SurfaceModel) -> Self {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in model.triangles().iter().enumerate() {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                by_edge.entry((u.min(v), u.max(v))).or_default().push(t);
            }
        }
        let mut glued = HashMap::new();
        for p in model.identifications() {
            glued.insert((p.first[0], p.first[1]), (p.second[0], p.second[1]));
            glued.insert((p.first[1], p.first[0]), (p.second[1], p.second[0]));
            glued.insert((p.second[0], p.second[1]), (p.first[0], p.first[1]));
            glued.insert((p.second[1], p.second[0]), (p.first[1], p.first[0]));
        }
        Self { by_edge, glued }
    }

    fn triangles(&self, u: usize, v: usize) -> &[usize] {
        self.by_edge
            .get(&(u.min(v), u.max(v)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Partner edge (oriented like `u -> v`) and the triangle on its far side.
    fn partner(&self, u: usize, v: usize) -> Option<(usize, usize, usize)> {
        let &(pu, pv) = self.glued.get(&(u, v))?;
        let &t = self.triangles(pu, pv).first()?;
        Some((pu, pv, t))
    }
}

/// Line integral of `omega` (or `*omega`) along a cycle. Each edge uses the
/// average of the values from the triangles on its two sides.
pub fn period_integral(model: &SurfaceModel, omega: &DiscreteForm, cycle: Cycle, starred: bool) -> f64 {
    let adj = EdgeAdjacency::new(model);
    path_integral(model, &adj, omega, model.cycle(cycle), starred)
}

fn path_integral(
    model: &SurfaceModel,
    adj: &EdgeAdjacency,
    omega: &DiscreteForm,
    path: &[usize],
    starred: bool,
) -> f64 {
    let form = if starred { omega.star() } else { omega.clone() };
    if !starred {
        if let Some(pot) = form.potential() {
            // exact for piecewise-linear potentials
            return pot[*path.last().unwrap()] - pot[path[0]];
        }
    }
    path.windows(2)
        .map(|w| {
            let (u, v) = (w[0], w[1]);
            let mut sum = 0.0;
            let mut count = 0.0;
            for &t in adj.triangles(u, v) {
                sum += form.along(model, t, u, v);
                count += 1.0;
            }
            if let Some((pu, pv, t)) = adj.partner(u, v) {
                sum += form.along(model, t, pu, pv);
                count += 1.0;
            }
            sum / count
        })
        .sum()
}

/// `int_M <zeta, omega>`.
pub fn inner_product(model: &SurfaceModel, zeta: &DiscreteForm, omega: &DiscreteForm) -> f64 {
    (0..model.triangles().len())
        .map(|t| {
            let (a, b) = (zeta.gradients[t], omega.gradients[t]);
            model.triangle_area(t) * (a[0] * b[0] + a[1] * b[1])
        })
        .sum()
}

/// `int_M zeta ^ omega`.
pub fn wedge_integral(model: &SurfaceModel, zeta: &DiscreteForm, omega: &DiscreteForm) -> f64 {
    (0..model.triangles().len())
        .map(|t| {
            let (a, b) = (zeta.gradients[t], omega.gradients[t]);
            model.triangle_area(t) * (a[0] * b[1] - a[1] * b[0])
        })
        .sum()
}

/// Harmonic forms normal to the boundary, dual to the `a`, `b` cycles.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    pub upsilon_a: DiscreteForm,
    pub upsilon_b: DiscreteForm,
    /// `raw_periods[(q, e)] = int_q` of the raw minimizer built from coordinate `e`.
    pub raw_periods: Matrix2<f64>,
    pub condition: f64,
}

impl HarmonicBasis {
    pub fn form(&self, c: Cycle) -> &DiscreteForm {
        match c {
            Cycle::A => &self.upsilon_a,
            Cycle::B => &self.upsilon_b,
        }
    }
}

/// For `theta` in `{ds, dt}` minimizes `||theta + dU||` with `U` single-valued
/// and `s + U` (resp. `t + U`) constant on the boundary, then recombines so that
/// `int_q upsilon_e = delta_qe`.
pub fn harmonic_form_basis(model: &SurfaceModel) -> Result<HarmonicBasis> {
    let solver = DirichletSolver::for_surface(model)?;
    harmonic_form_basis_with(model, &solver)
}

pub fn harmonic_form_basis_with(model: &SurfaceModel, solver: &DirichletSolver) -> Result<HarmonicBasis> {
    let tau = match model.kind() {
        SurfaceKind::Disk => {
            return Err(Error::DegenerateBasis(f64::INFINITY));
        }
        _ => model.lattice().expect("torus models carry a lattice"),
    };
    let coords: Vec<(f64, f64)> = model
        .vertices()
        .iter()
        .map(|&p| lattice_coords(tau, p))
        .collect();
    let nv = model.vertices().len();
    let n_dof = model.n_dof();
    let mut load = DMatrix::zeros(n_dof, 2);
    for tri in model.triangles() {
        let (g, area) = element_gradients(tri.map(|v| model.vertices()[v]));
        for col in 0..2 {
            let value = |v: usize| if col == 0 { coords[v].0 } else { coords[v].1 };
            let mut grad = [0.0; 2];
            for a in 0..3 {
                grad[0] += value(tri[a]) * g[a][0];
                grad[1] += value(tri[a]) * g[a][1];
            }
            for a in 0..3 {
                load[(model.dof()[tri[a]], col)] -= area * (grad[0] * g[a][0] + grad[1] * g[a][1]);
            }
        }
    }
    let constrained = solver.constrained();
    let boundary_vertex: HashMap<usize, usize> = model
        .boundary()
        .iter()
        .map(|b| (model.dof()[b.vertex], b.vertex))
        .collect();
    let data = DMatrix::from_fn(constrained.len(), 2, |i, col| {
        match boundary_vertex.get(&constrained[i]) {
            Some(&v) => -if col == 0 { coords[v].0 } else { coords[v].1 },
            None => 0.0,
        }
    });
    let u = solver.solve_with_load(&data, Some(&load))?;
    let raw: Vec<DiscreteForm> = (0..2)
        .map(|col| {
            let pot = (0..nv)
                .map(|v| {
                    let base = if col == 0 { coords[v].0 } else { coords[v].1 };
                    base + u[(model.dof()[v], col)]
                })
                .collect();
            DiscreteForm::from_potential(model, pot)
        })
        .collect();
    let adj = EdgeAdjacency::new(model);
    let mut periods = Matrix2::zeros();
    for (q, cycle) in [Cycle::A, Cycle::B].into_iter().enumerate() {
        for e in 0..2 {
            periods[(q, e)] = path_integral(model, &adj, &raw[e], model.cycle(cycle), false);
        }
    }
    let sv = periods.singular_values();
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::DegenerateBasis(condition));
    }
    let inv = periods.try_inverse().ok_or(Error::DegenerateBasis(f64::INFINITY))?;
    let dual = |e: usize| raw[0].combine(inv[(0, e)], &raw[1], inv[(1, e)]);
    Ok(HarmonicBasis {
        upsilon_a: dual(0),
        upsilon_b: dual(1),
        raw_periods: periods,
        condition,
    })
}

/// L2 norm of the tangential component along the boundary loop, relative to
/// the L2 norm of the form on the surface.
pub fn tangential_trace(model: &SurfaceModel, omega: &DiscreteForm) -> f64 {
    let adj = EdgeAdjacency::new(model);
    let b = model.boundary();
    let mut sum = 0.0;
    for i in 0..b.len() {
        let (u, v) = (b[i].vertex, b[(i + 1) % b.len()].vertex);
        let (pu, pv) = (model.vertices()[u], model.vertices()[v]);
        let len = ((pv[0] - pu[0]).powi(2) + (pv[1] - pu[1]).powi(2)).sqrt();
        for &t in adj.triangles(u, v) {
            let d = omega.along(model, t, u, v) / len;
            sum += d * d * len;
        }
    }
    sum.sqrt() / inner_product(model, omega, omega).sqrt()
}

/// Fourier coefficients `k = -n..n` of the normal trace `omega(nu)` in the
/// boundary parameter, computed weakly from the stiffness residuals at the
/// boundary vertices. Only meaningful for co-closed forms.
pub fn normal_trace(model: &SurfaceModel, omega: &DiscreteForm, n: usize) -> Result<BoundaryFunction> {
    let mut residual = vec![0.0; model.n_dof()];
    for (t, tri) in model.triangles().iter().enumerate() {
        let (g, area) = element_gradients(tri.map(|v| model.vertices()[v]));
        let w = omega.gradients[t];
        for a in 0..3 {
            residual[model.dof()[tri[a]]] += area * (w[0] * g[a][0] + w[1] * g[a][1]);
        }
    }
    let coeffs = DVector::from_fn(2 * n + 1, |i, _| {
        let k = i as f64 - n as f64;
        model
            .boundary()
            .iter()
            .map(|b| residual[model.dof()[b.vertex]] * Complex64::from_polar(1.0, -k * b.phi))
            .sum::<Complex64>()
            / (2.0 * PI)
    });
    BoundaryFunction::from_coefficients(n, coeffs)
}

/// Boundary side of the Hodge decomposition of `*du^f`.
#[derive(Clone, Debug)]
pub struct HodgeParts {
    /// `h = Hf`
    pub h: BoundaryFunction,
    /// `upsilon(nu) = -Lambda (H^2 + I) f`
    pub trace: BoundaryFunction,
    /// Relative distance of `trace` from `span{Lambda eta, Lambda conj(eta)}`;
    /// with no eigenfunction the span is `{0}`.
    pub span_residual: f64,
}

pub fn hodge_decompose(
    dn: &BoundaryOperator,
    f: &BoundaryFunction,
    spectral: Option<&SpectralData>,
) -> Result<HodgeParts> {
    if !f.is_mean_zero() {
        return Err(Error::NotMeanZero(f[0].norm()));
    }
    let hil = hilbert_from_dn(dn)?;
    let h = hil.apply(f)?;
    let hh = hil.apply(&h)?;
    let trace = dn.apply(&hh.add(f)?)?.scale(Complex64::new(-1.0, 0.0));
    let scale = dn.apply(f)?.l2_norm().max(f64::MIN_POSITIVE);
    let eta = spectral.and_then(|s| s.eta.as_ref());
    let span_residual = match eta {
        None => trace.l2_norm() / scale,
        Some(eta) => {
            let basis = [dn.apply(eta)?, dn.apply(&eta.conj())?];
            let m = DMatrix::from_fn(trace.coefficients().len(), 2, |i, j| basis[j].coefficients()[i]);
            let svd = m.clone().svd(true, true);
            let x = svd
                .solve(trace.coefficients(), 1e-14)
                .map_err(|e| Error::Solver(e.to_string()))?;
            (&m * x - trace.coefficients()).norm() / scale
        }
    };
    Ok(HodgeParts {
        h,
        trace,
        span_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::mesh::{build_closed_torus, build_mesh};
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_square_torus_has_dx_dy() {
        let s = build_closed_torus(Complex64::new(0.0, 1.0), 8).unwrap();
        let basis = harmonic_form_basis(&s).unwrap();
        for g in basis.upsilon_a.gradients() {
            assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-10);
        }
        let a = &basis.upsilon_a;
        assert_abs_diff_eq!(period_integral(&s, a, Cycle::A, false), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(period_integral(&s, a, Cycle::B, false), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(period_integral(&s, a, Cycle::A, true), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(period_integral(&s, a, Cycle::B, true), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn holed_torus_basis_is_dual_and_normal() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.05, 0.05).unwrap();
        let basis = harmonic_form_basis(&s).unwrap();
        let (a, b) = (&basis.upsilon_a, &basis.upsilon_b);
        assert_abs_diff_eq!(period_integral(&s, a, Cycle::A, false), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(period_integral(&s, b, Cycle::A, false), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(period_integral(&s, b, Cycle::B, false), 1.0, epsilon = 1e-10);
        assert!(tangential_trace(&s, a) <= 1e-3);
        assert!(a.closedness_defect(&s) < 1e-10);
    }

    #[test]
    fn star_periods_match_energies() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.1, 0.05).unwrap();
        let basis = harmonic_form_basis(&s).unwrap();
        let (a, b) = (&basis.upsilon_a, &basis.upsilon_b);
        let b_ba = period_integral(&s, a, Cycle::B, true);
        let b_ab = period_integral(&s, b, Cycle::A, true);
        let b_aa = period_integral(&s, a, Cycle::A, true);
        let b_bb = period_integral(&s, b, Cycle::B, true);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        assert!(rel(b_ba, inner_product(&s, a, a)) < 0.02);
        assert!(rel(b_ab, -inner_product(&s, b, b)) < 0.02);
        assert!((b_bb + b_aa).abs() < 0.02 * b_ba.abs());
    }

    #[test]
    fn riemann_bilinear_relations() {
        let s = build_mesh(Complex64::new(0.3, 1.1), 0.1, 0.05).unwrap();
        let basis = harmonic_form_basis(&s).unwrap();
        let forms = [
            basis.upsilon_a.clone(),
            basis.upsilon_b.clone(),
            basis.upsilon_a.star(),
            basis.upsilon_b.star(),
        ];
        let periods = |f: &DiscreteForm| {
            (
                period_integral(&s, f, Cycle::A, false),
                period_integral(&s, f, Cycle::B, false),
            )
        };
        for (i, z) in forms.iter().enumerate() {
            for (j, w) in forms.iter().enumerate() {
                if i >= 2 && j >= 2 {
                    continue;
                }
                let lhs = wedge_integral(&s, z, w);
                let (za, zb) = periods(z);
                let (wa, wb) = periods(w);
                let rhs = za * wb - zb * wa;
                let scale = inner_product(&s, z, z).sqrt() * inner_product(&s, w, w).sqrt();
                assert!((lhs - rhs).abs() <= 0.02 * scale, "{i}{j}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn normal_trace_of_exact_harmonic_matches_dn() {
        let s = build_mesh(Complex64::new(0.0, 1.0), 0.1, 0.05).unwrap();
        let solver = DirichletSolver::for_surface(&s).unwrap();
        let n = 6;
        let dn = crate::surface::fem::assemble_dn_with(&s, &solver, n).unwrap();
        let g: Vec<f64> = s.boundary().iter().map(|b| (2.0 * b.phi).cos()).collect();
        let u = solver.solve(&DMatrix::from_column_slice(g.len(), 1, &g)).unwrap();
        let pot = (0..s.vertices().len()).map(|v| u[(s.dof()[v], 0)]).collect();
        let form = DiscreteForm::from_potential(&s, pot);
        let trace = normal_trace(&s, &form, n).unwrap();
        let mut f = BoundaryFunction::zeros(n);
        f = f.add(&BoundaryFunction::mode(n, 2).scale(Complex64::new(0.5, 0.0))).unwrap();
        f = f.add(&BoundaryFunction::mode(n, -2).scale(Complex64::new(0.5, 0.0))).unwrap();
        let expected = dn.apply(&f).unwrap();
        let diff = trace.add(&expected.scale(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(diff.l2_norm() < 1e-2 * expected.l2_norm(), "{}", diff.l2_norm());
    }

    #[test]
    fn hodge_decomposition_on_fixtures() {
        use crate::circle::dn_disk;
        use crate::spectral::{extract_mu, make_synthetic_dn, DEFAULT_BAND};
        let n = 8;
        let f = BoundaryFunction::mode(n, 2).add(&BoundaryFunction::mode(n, -3)).unwrap();
        let disk = hodge_decompose(&dn_disk(n).unwrap(), &f, None).unwrap();
        assert!(disk.trace.l2_norm() < 1e-12 && disk.span_residual < 1e-12);

        let mu = 0.6;
        let dn = make_synthetic_dn(mu, n).unwrap();
        let sp = extract_mu(&dn, DEFAULT_BAND).unwrap();
        let eta = sp.eta.clone().unwrap();
        let parts = hodge_decompose(&dn, &eta, Some(&sp)).unwrap();
        let expected = dn.apply(&eta).unwrap().scale(Complex64::new(-(1.0 - mu * mu), 0.0));
        let diff = parts.trace.add(&expected.scale(Complex64::new(-1.0, 0.0))).unwrap();
        assert!(diff.l2_norm() < 1e-10 * expected.l2_norm());
        assert!(parts.span_residual < 1e-10);

        let constant = BoundaryFunction::constant(n, Complex64::new(1.0, 0.0));
        assert!(matches!(hodge_decompose(&dn, &constant, Some(&sp)), Err(Error::NotMeanZero(_))));
    }
}
