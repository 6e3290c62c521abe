use dnlab_core::circle::{dn_disk, operator_distance};
use dnlab_core::spectral::{extract_mu, smoothing_defect, DEFAULT_BAND};
use dnlab_core::surface::fem::{assemble_dn, dirichlet_energy, solve_dirichlet};
use dnlab_core::surface::forms::{harmonic_form_basis, period_integral, tangential_trace};
use dnlab_core::surface::{build_disk, build_mesh_with, Cycle, MeshOptions};
use num_complex::Complex64;

fn tau_i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn opts(segments: usize, refinement: usize) -> MeshOptions {
    MeshOptions {
        min_boundary_segments: segments,
        refinement,
    }
}

fn disk_error(h: f64) -> f64 {
    let dn = assemble_dn(&build_disk(h).unwrap(), 8).unwrap();
    let exact = dn_disk(8).unwrap();
    (dn.matrix() - exact.matrix()).norm() / exact.matrix().norm()
}

#[test]
fn disk_dn_converges_at_second_order() {
    let coarse = disk_error(0.04);
    let fine = disk_error(0.02);
    let order = (coarse / fine).log2();
    assert!(fine <= 2e-2, "error {fine}");
    assert!(order >= 1.5, "order {order} ({coarse} -> {fine})");
}

#[test]
fn dirichlet_energy_is_stable_under_refinement() {
    let energy = |r| {
        let s = build_mesh_with(tau_i(), 0.2, 0.05, opts(64, r)).unwrap();
        let g: Vec<f64> = s.boundary().iter().map(|b| b.phi.cos()).collect();
        dirichlet_energy(&s, &solve_dirichlet(&s, &g).unwrap())
    };
    let (e1, e2) = (energy(1), energy(2));
    assert!((e1 - e2).abs() <= 0.01 * e2, "{e1} vs {e2}");
}

#[test]
fn dn_kills_constants_at_n16() {
    let s = build_mesh_with(tau_i(), 0.1, 0.05, opts(512, 1)).unwrap();
    let dn = assemble_dn(&s, 16).unwrap();
    let m = dn.matrix();
    let c = m.ncols() / 2;
    let row = m.row(c).norm();
    let col = m.column(c).norm();
    assert!(row <= 1e-8 && col <= 1e-8, "{row} {col}");
}

#[test]
fn smoothing_defect_decreases_under_refinement() {
    let defect = |segments| {
        let s = build_mesh_with(tau_i(), 0.1, 0.05, opts(segments, 1)).unwrap();
        smoothing_defect(&assemble_dn(&s, 16).unwrap()).unwrap()
    };
    let (d1, d2) = (defect(512), defect(768));
    assert!(d2 < d1, "{d1} -> {d2}");
}

#[test]
fn harmonic_basis_is_normal_and_dual_on_small_hole() {
    let s = build_mesh_with(tau_i(), 0.05, 0.05, opts(64, 1)).unwrap();
    let b = harmonic_form_basis(&s).unwrap();
    for form in [&b.upsilon_a, &b.upsilon_b] {
        assert!(tangential_trace(&s, form) <= 1e-3);
    }
    assert!(period_integral(&s, &b.upsilon_b, Cycle::A, false).abs() <= 1e-6);
    assert!((period_integral(&s, &b.upsilon_a, Cycle::A, false) - 1.0).abs() <= 1e-6);
}

#[test]
fn mu_is_stable_under_refinement() {
    let mu = |r| {
        let s = build_mesh_with(tau_i(), 0.2, 0.05, opts(256, r)).unwrap();
        extract_mu(&assemble_dn(&s, 8).unwrap(), DEFAULT_BAND).unwrap().mu.unwrap()
    };
    let (m1, m2) = (mu(1), mu(2));
    assert!((m1 - m2).abs() <= 0.02 * m2, "{m1} vs {m2}");
}

#[test]
fn distance_to_disk_shrinks_with_the_hole() {
    let dist = |eps| {
        let s = build_mesh_with(tau_i(), eps, 0.05, opts(256, 1)).unwrap();
        operator_distance(&assemble_dn(&s, 8).unwrap(), &dn_disk(8).unwrap()).unwrap()
    };
    let (d2, d1) = (dist(0.2), dist(0.1));
    assert!(d1 < d2, "{d2} -> {d1}");
}
