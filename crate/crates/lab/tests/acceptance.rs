//! One pass/fail line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use dnlab::config::{ExperimentConfig, Family};
use dnlab::pipeline::fem_stage;
use dnlab::sweep::run_sweep;
use dnlab_core::circle::{dn_disk, hilbert_from_dn, BoundaryFunction, DEFAULT_TRUNCATION};
use dnlab_core::collar::{collar_halfwidth, collar_halfwidth_derivative, collar_log_radius};
use dnlab_core::error::Characteristic;
use dnlab_core::periods::{
    assemble_siegel, bcal_from_boundary, extract_c, normalize_symmetric, Siegel,
};
use dnlab_core::spectral::{extract_mu, make_synthetic_dn, DEFAULT_BAND};
use dnlab_core::surface::build_disk;
use dnlab_core::surface::fem::assemble_dn;
use dnlab_core::theta::{
    classify_degeneration, theta_constant, theta_constant_at_radius, DegenerationCase,
};
use nalgebra::Matrix2;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn disk_error(h: f64) -> f64 {
    let dn = assemble_dn(&build_disk(h).unwrap(), 8).unwrap();
    let exact = dn_disk(8).unwrap();
    (dn.matrix() - exact.matrix()).norm() / exact.matrix().norm()
}

fn c1_disk_oracle() -> Outcome {
    let start = Instant::now();
    let coarse = disk_error(0.04);
    let fine = disk_error(0.02);
    let order = (coarse / fine).log2();
    let elapsed = start.elapsed();
    outcome(
        fine <= 2e-2 && order >= 1.5 && elapsed <= Duration::from_secs(60),
        format!("error(h=0.02) = {fine:.3e}, order = {order:.2}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn c2_hilbert_algebra() -> Outcome {
    let n = DEFAULT_TRUNCATION;
    let h0 = hilbert_from_dn(&dn_disk(n).unwrap()).unwrap();
    let sq = h0.matrix() * h0.matrix();
    let mut defect: f64 = 0.0;
    for i in 0..2 * n + 1 {
        for j in 0..2 * n + 1 {
            let target = if i == j && i != n { -1.0 } else { 0.0 };
            defect = defect.max((sq[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    let fem = assemble_dn(&build_disk(0.02).unwrap(), 8).unwrap();
    let spectrum = extract_mu(&fem, DEFAULT_BAND).unwrap();
    let worst = spectrum
        .eigenvalues
        .iter()
        .map(|v| (v.abs() - 1.0).abs())
        .fold(0.0, f64::max);
    let h = hilbert_from_dn(&fem).unwrap();
    let kernel = h.apply(&BoundaryFunction::constant(8, Complex64::new(1.0, 0.0))).unwrap().l2_norm();
    outcome(
        defect <= 1e-10 && worst <= 1e-2 && kernel <= 1e-2 && spectrum.mu.is_none(),
        format!("|H0^2 + I| = {defect:.1e}, FEM disk iH spectrum within {worst:.2e} of +-1, |H 1| = {kernel:.1e}"),
    )
}

fn c3_synthetic() -> Outcome {
    let mut worst: f64 = 0.0;
    for mu in [0.3, 0.6, 0.9] {
        let got = extract_mu(&make_synthetic_dn(mu, DEFAULT_TRUNCATION).unwrap(), DEFAULT_BAND)
            .ok()
            .and_then(|s| s.mu)
            .unwrap_or(f64::NAN);
        worst = worst.max((got - mu).abs());
    }
    outcome(worst <= 1e-10, format!("max |mu - mu_true| = {worst:.1e}"))
}

fn tau_i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn c4_oracle_equivalence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for eps in [0.2, 0.1] {
        let fem = fem_stage(tau_i(), eps, 0.05, 8).unwrap();
        let spectral = extract_mu(&fem.dn, DEFAULT_BAND).unwrap();
        let mu = spectral.mu.unwrap();
        let ca = extract_c(&fem.dn, &spectral, &fem.trace_a).unwrap();
        let cb = extract_c(&fem.dn, &spectral, &fem.trace_b).unwrap();
        let (boundary, _) = bcal_from_boundary(mu, ca.c, cb.c, None).unwrap();
        let interior = fem.bcal_interior;
        let scale = interior.abs().max();
        let gap = (boundary - interior).abs().max() / scale;
        let target = 1.0 / (mu * mu);
        let det_b = (boundary.determinant() - target).abs() / target;
        let det_i = (interior.determinant() - target).abs() / target;
        pass &= gap <= 0.05 && det_b <= 0.02 && det_i <= 0.02;
        parts.push(format!(
            "eps={eps}: entry gap {:.2}%, det err boundary {:.2}% interior {:.2}%",
            100.0 * gap,
            100.0 * det_b,
            100.0 * det_i
        ));
    }
    outcome(pass, parts.join("; "))
}

fn c5_siegel() -> Outcome {
    let mut identity: f64 = 0.0;
    let mut definite = true;
    for mu in [0.3, 0.55, 0.8, 0.95, 0.999] {
        for (ab, bb) in [(-1.0, 0.5), (-0.3, -2.0), (-4.0, 0.0), (-1.7, 1e-3)] {
            let bcal = Matrix2::new(-bb, ab, -(1.0 / (mu * mu) + bb * bb) / ab, bb);
            let s = assemble_siegel(mu, &bcal).unwrap();
            let rhs = 1.0 / (mu * mu * ab * ab);
            identity = identity.max(((s.delta * s.delta - s.beta * s.beta) - rhs).abs() / rhs);
            definite &= s.imaginary_part().symmetric_eigen().eigenvalues.min() > 0.0;
        }
    }
    let mut gamma_ok = true;
    for i in 0..=4000 {
        let gamma = -50.0 + 0.025 * i as f64 + 1e-3 * (i % 7) as f64;
        for beta in [-0.7, 0.0, 0.4] {
            let g = normalize_symmetric(&Siegel::new(gamma, 1.5, beta)).siegel.gamma;
            gamma_ok &= (0.0..=0.5).contains(&g);
        }
    }
    outcome(
        identity <= 1e-12 && definite && gamma_ok,
        format!("max relative identity defect {identity:.1e}, Im B definite: {definite}, gamma in [0,1/2]: {gamma_ok}"),
    )
}

fn genus_one(tau: Complex64, a: u8, b: u8) -> Complex64 {
    let (a, b) = (0.5 * a as f64, 0.5 * b as f64);
    (-60i64..=60)
        .map(|n| {
            let x = n as f64 + a;
            (Complex64::i() * PI * (tau * x * x + 2.0 * x * b)).exp()
        })
        .sum()
}

fn c6_theta() -> Outcome {
    let b = Siegel::new(0.25, 1.5, 0.5).matrix();
    let mut radius: f64 = 0.0;
    for ch in Characteristic::even() {
        let t = theta_constant(&b, ch).unwrap();
        let r = theta_constant_at_radius(&b, ch, t.radius).unwrap().value;
        let r4 = theta_constant_at_radius(&b, ch, t.radius + 4).unwrap().value;
        radius = radius.max((r - r4).norm() / r4.norm());
    }
    let (t1, t2) = (Complex64::new(0.2, 1.3), Complex64::new(-0.4, 0.9));
    let diag = Matrix2::new(t1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), t2);
    let mut factor: f64 = 0.0;
    for m in 0u8..16 {
        let ch = Characteristic::new(m >> 3, (m >> 2) & 1, (m >> 1) & 1, m & 1);
        let [a1, a2, b1, b2] = ch.0;
        let expected = genus_one(t1, a1, b1) * genus_one(t2, a2, b2);
        let got = theta_constant(&diag, ch).unwrap().value;
        factor = factor.max((got - expected).norm() / expected.norm().max(1.0));
    }
    let ii = Matrix2::new(
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    let e1111 = theta_constant(&ii, Characteristic::new(1, 1, 1, 1)).unwrap().value.norm();
    let e0000 = theta_constant(&ii, Characteristic::new(0, 0, 0, 0)).unwrap().value;
    // brute-force one-dimensional sum, squared
    let one_d: f64 = (-40i64..=40).map(|n| (-PI * (n * n) as f64).exp()).sum();
    let pass = radius <= 1e-12
        && factor <= 1e-12
        && e1111 <= 1e-12
        && (e0000.re - 1.1803406).abs() <= 1e-6
        && (e0000.re - one_d * one_d).abs() <= 1e-12;
    outcome(
        pass,
        format!(
            "R vs R+4 {radius:.1e}, factorization {factor:.1e}, |e1111(iI)| = {e1111:.1e}, e0000(iI) = {:.7}",
            e0000.re
        ),
    )
}

fn sweep_config(out: &std::path::Path, cache: bool) -> ExperimentConfig {
    ExperimentConfig {
        family: Family::TorusHole,
        tau_lat: tau_i(),
        eps: vec![0.3, 0.2, 0.1, 0.05],
        out_dir: out.to_path_buf(),
        cache,
        workers: 4,
        ..Default::default()
    }
}

fn c7_c8_c10() -> [Outcome; 3] {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), true);
    let start = Instant::now();
    let first = run_sweep(&cfg).unwrap();
    let elapsed = start.elapsed();
    let report = first.report.as_ref().unwrap();
    let pts: Vec<_> = report.points().collect();
    let t = report.trends;
    let c7 = outcome(
        pts.len() == 4 && t.all_pass() && pts.last().unwrap().mu < 1.0 && elapsed <= Duration::from_secs(600),
        format!(
            "mu {:?}, dn distance {:?}, modulus {:?}, bound {:?}; {}; {:.1} s",
            pts.iter().map(|p| format!("{:.4}", p.mu)).collect::<Vec<_>>(),
            pts.iter().map(|p| format!("{:.4}", p.dn_distance)).collect::<Vec<_>>(),
            pts.iter().map(|p| format!("{:.4}", p.modulus)).collect::<Vec<_>>(),
            pts.iter().map(|p| format!("{:.3}", p.geo_bound)).collect::<Vec<_>>(),
            t.to_flag_string(),
            elapsed.as_secs_f64()
        ),
    );

    let path = |f: &dyn Fn(f64) -> Siegel| -> Vec<(Matrix2<Complex64>, f64)> {
        (1..=5)
            .map(|r| (f(r as f64).matrix(), 1.0 - 1.0 / (r as f64 + 1.0)))
            .collect()
    };
    let syn_i = classify_degeneration(&path(&|r| Siegel::new(0.2, 1.5, 1.0 / r))).unwrap().case;
    let syn_ii = classify_degeneration(&path(&|r| Siegel::new(0.2, r, 0.1))).unwrap().case;
    let c8 = match &report.classification {
        Some(c) => {
            let diag: Vec<String> = c
                .points
                .iter()
                .map(|p| format!("(|B| {:.3}, |ImB^-1| {:.3}, |beta| {:.3})", p.norm_b, p.norm_im_inv, p.off_diagonal))
                .collect();
            outcome(
                c.case != DegenerationCase::Undecided
                    && syn_i == DegenerationCase::TrivialPinch
                    && syn_ii == DegenerationCase::NontrivialPinch,
                format!("sweep: {}; {}; synthetic paths: {:?}, {:?}", c.case.label(), diag.join(" "), syn_i, syn_ii),
            )
        }
        None => outcome(false, "sweep was not classified".into()),
    };

    let second = run_sweep(&cfg).unwrap();
    let c10 = outcome(
        second.fem_solves == 0 && second.csv == first.csv && std::fs::read_to_string(&second.csv_path).unwrap() == first.csv,
        format!(
            "rerun: {} FEM solves, CSV identical: {}",
            second.fem_solves,
            second.csv == first.csv
        ),
    );
    [c7, c8, c10]
}

fn c9_collar() -> Outcome {
    // 30-digit evaluation of asinh(1/sinh(1))
    let l2 = collar_halfwidth(2.0).unwrap();
    let l2_ok = (l2 - 0.771_936_832_905_304_7).abs() <= 1e-12;
    let r = collar_log_radius(PI * PI).unwrap();
    let r_ok = r.r == 1.0 && (r.hole_radius() - (-1f64).exp()).abs() <= 1e-16;
    let tiny = collar_log_radius(0.1).unwrap();
    let log_ok = tiny.ln_hole_radius == -PI * PI / 0.1 && (tiny.hole_radius() / 1.370_416_883_188_897e-43 - 1.0).abs() <= 1e-12;
    let mut fd: f64 = 0.0;
    for l in [0.5, 1.0, 2.0] {
        let h = 1e-5;
        let central = (collar_halfwidth(l + h).unwrap() - collar_halfwidth(l - h).unwrap()) / (2.0 * h);
        fd = fd.max((central - collar_halfwidth_derivative(l).unwrap()).abs());
    }
    outcome(
        l2_ok && r_ok && log_ok && fd <= 1e-6,
        format!(
            "L(2) = {l2:.9}, r(pi^2) = {}, ln e^-r(0.1) = {:.4}, max derivative gap {fd:.1e}",
            r.r, tiny.ln_hole_radius
        ),
    )
}

fn main() {
    use std::io::Write;
    let names = [
        "disk oracle",
        "Hilbert-transform algebra",
        "synthetic spectral fixture",
        "oracle equivalence",
        "Siegel identities",
        "theta engine",
        "degeneration trends",
        "degeneration classification",
        "collar formulas",
        "determinism",
    ];
    let [c7, c8, c10] = c7_c8_c10();
    let results = [
        c1_disk_oracle(),
        c2_hilbert_algebra(),
        c3_synthetic(),
        c4_oracle_equivalence(),
        c5_siegel(),
        c6_theta(),
        c7,
        c8,
        c9_collar(),
        c10,
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for (i, (name, r)) in names.iter().zip(&results).enumerate() {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!r.pass);
        let _ = writeln!(out, "criterion {:>2} {tag} {name}: {}", i + 1, r.detail);
    }
    let _ = writeln!(out, "{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
