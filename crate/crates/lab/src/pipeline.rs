//! Per-point stages: FEM artifacts, spectrum, periods, theta and the report row.

use dnlab_core::circle::{dn_disk, operator_distance, BoundaryFunction, BoundaryOperator, OperatorKind};
use dnlab_core::periods::{
    assemble_siegel, bcal_from_boundary, extract_c, normalize_symmetric, Normalized, TraceCoefficient,
};
use dnlab_core::report::{build_report, failed_row, PointInputs, ReportRow, RosenhainEntry};
use dnlab_core::spectral::{extract_mu, make_synthetic_dn, SpectralData};
use dnlab_core::surface::annulus::doubled_collar_modulus;
use dnlab_core::surface::fem::{assemble_dn, assemble_dn_with, DirichletSolver};
use dnlab_core::surface::forms::{harmonic_form_basis, harmonic_form_basis_with, normal_trace};
use dnlab_core::surface::{build_disk, build_mesh_with, MeshOptions};
use dnlab_core::periods::bcal_from_interior;
use dnlab_core::textio::{fmt_f64, parse_f64, parse_key_values};
use dnlab_core::theta::{rosenhain, RosenhainTriple};
use dnlab_core::{Error, Result};
use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::config::ExperimentConfig;

/// Boundary segments per retained Fourier mode.
pub const SEGMENTS_PER_MODE: usize = 32;

/// Everything that needs a finite element solve, for one hole radius.
#[derive(Clone, Debug, PartialEq)]
pub struct FemArtifacts {
    pub dn: BoundaryOperator,
    /// mean-free normal traces of the harmonic basis
    pub trace_a: BoundaryFunction,
    pub trace_b: BoundaryFunction,
    /// `B` from interior line integrals
    pub bcal_interior: Matrix2<f64>,
    pub modulus: f64,
    pub vertices: usize,
    pub triangles: usize,
}

pub fn mesh_options(n: usize) -> MeshOptions {
    MeshOptions {
        min_boundary_segments: SEGMENTS_PER_MODE * n,
        refinement: 1,
    }
}

pub fn fem_stage(tau: Complex64, eps: f64, h_target: f64, n: usize) -> Result<FemArtifacts> {
    let model = build_mesh_with(tau, eps, h_target, mesh_options(n))?;
    let solver = DirichletSolver::for_surface(&model)?;
    let dn = assemble_dn_with(&model, &solver, n)?;
    let basis = harmonic_form_basis_with(&model, &solver)?;
    Ok(FemArtifacts {
        dn,
        trace_a: normal_trace(&model, &basis.upsilon_a, n)?.without_mean(),
        trace_b: normal_trace(&model, &basis.upsilon_b, n)?.without_mean(),
        bcal_interior: bcal_from_interior(&model, &basis),
        modulus: doubled_collar_modulus(&model)?,
        vertices: model.vertices().len(),
        triangles: model.triangles().len(),
    })
}

const SECTIONS: [&str; 3] = ["[dn]\n", "[trace_a]\n", "[trace_b]\n"];

impl FemArtifacts {
    pub fn to_text(&self) -> String {
        let b = &self.bcal_interior;
        let mut out = format!(
            "modulus={}\nbcal_interior={},{},{},{}\nvertices={}\ntriangles={}\n",
            fmt_f64(self.modulus),
            fmt_f64(b[(0, 0)]),
            fmt_f64(b[(0, 1)]),
            fmt_f64(b[(1, 0)]),
            fmt_f64(b[(1, 1)]),
            self.vertices,
            self.triangles
        );
        for (tag, body) in SECTIONS.iter().zip([
            self.dn.to_text(),
            self.trace_a.to_text(),
            self.trace_b.to_text(),
        ]) {
            out += tag;
            out += &body;
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut rest = text;
        let mut parts = Vec::new();
        for tag in SECTIONS {
            let (head, tail) = rest
                .split_once(tag)
                .ok_or_else(|| Error::Parse(format!("artifact lacks section {}", tag.trim())))?;
            parts.push(head);
            rest = tail;
        }
        parts.push(rest);
        let map = parse_key_values(parts[0])?;
        let get = |k: &str| -> Result<&str> {
            map.get(k)
                .and_then(|v| v.last())
                .map(String::as_str)
                .ok_or_else(|| Error::Parse(format!("artifact lacks {k}")))
        };
        let count = |k: &str| -> Result<usize> {
            get(k)?.parse().map_err(|_| Error::Parse(format!("bad {k}")))
        };
        let b: Vec<f64> = get("bcal_interior")?
            .split(',')
            .map(parse_f64)
            .collect::<Result<_>>()?;
        if b.len() != 4 {
            return Err(Error::Parse("bcal_interior needs four entries".into()));
        }
        Ok(Self {
            dn: BoundaryOperator::from_text(parts[1], OperatorKind::Dn)?,
            trace_a: BoundaryFunction::from_text(parts[2])?,
            trace_b: BoundaryFunction::from_text(parts[3])?,
            bcal_interior: Matrix2::new(b[0], b[1], b[2], b[3]),
            modulus: parse_f64(get("modulus")?)?,
            vertices: count("vertices")?,
            triangles: count("triangles")?,
        })
    }
}

/// Spectrum and trace coefficients of one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodStage {
    pub spectral: SpectralData,
    pub mu: f64,
    pub c_a: TraceCoefficient,
    pub c_b: TraceCoefficient,
    pub bcal: Matrix2<f64>,
    pub normalization_defect: f64,
    pub normalized: Normalized,
}

pub fn period_stage(
    dn: &BoundaryOperator,
    trace_a: &BoundaryFunction,
    trace_b: &BoundaryFunction,
    cfg: &ExperimentConfig,
) -> Result<PeriodStage> {
    let spectral = extract_mu(dn, cfg.band())?;
    let mu = spectral.mu()?;
    let c_a = extract_c(dn, &spectral, trace_a)?;
    let c_b = extract_c(dn, &spectral, trace_b)?;
    let (bcal, defect) = bcal_from_boundary(mu, c_a.c, c_b.c, Some(cfg.tolerance("normalization")))?;
    let siegel = assemble_siegel(mu, &bcal)?;
    Ok(PeriodStage {
        spectral,
        mu,
        c_a,
        c_b,
        bcal,
        normalization_defect: defect,
        normalized: normalize_symmetric(&siegel),
    })
}

pub fn rosenhain_entry(p: &PeriodStage) -> Result<RosenhainEntry> {
    match rosenhain(&p.normalized.siegel.matrix()) {
        Ok(t) => Ok(RosenhainEntry::Triple(t)),
        Err(Error::NearDegenerate { which, modulus }) => Ok(RosenhainEntry::NearDegenerate { which, modulus }),
        Err(e) => Err(e),
    }
}

pub fn point_inputs(eps: f64, fem: &FemArtifacts, cfg: &ExperimentConfig) -> Result<PointInputs> {
    let p = period_stage(&fem.dn, &fem.trace_a, &fem.trace_b, cfg)?;
    Ok(PointInputs {
        eps,
        mu: p.mu,
        dn_distance: operator_distance(&fem.dn, &dn_disk(fem.dn.truncation())?)?,
        bcal: p.bcal,
        siegel: p.normalized.siegel,
        rosenhain: rosenhain_entry(&p)?,
        modulus: fem.modulus,
    })
}

pub fn report_row(eps: f64, fem: &Result<FemArtifacts>, cfg: &ExperimentConfig) -> ReportRow {
    let inputs = match fem {
        Ok(f) => point_inputs(eps, f, cfg),
        Err(e) => return failed_row(eps, &e.to_string()),
    };
    match inputs {
        Ok(p) => build_report(&p),
        Err(e) => failed_row(eps, &e.to_string()),
    }
}

/// `-(1 - mu^2) Lambda (c eta + conj(c eta))`.
pub fn synthetic_trace(dn: &BoundaryOperator, spectral: &SpectralData, c: Complex64) -> Result<BoundaryFunction> {
    let mu = spectral.mu()?;
    let eta = spectral.eta()?;
    let f = eta.scale(c).add(&eta.scale(c).conj())?;
    Ok(dn.apply(&f)?.scale(Complex64::new(-(1.0 - mu * mu), 0.0)))
}

/// Coefficients with `2 mu (mu^2 - 1) Im(c_a conj c_b) = 1`.
pub fn synthetic_coefficients(mu: f64) -> (Complex64, Complex64) {
    let s = 1.0 / (2.0 * mu * (1.0 - mu * mu));
    (Complex64::new(1.0, 0.0), Complex64::new(0.5, s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRow {
    pub mu: f64,
    pub stage: PeriodStage,
    pub rosenhain: RosenhainEntry,
}

pub const SYNTHETIC_HEADER: &str = "mu,mu_extracted,Bcal_aa,Bcal_ab,Bcal_ba,Bcal_bb,gamma,delta,beta,\
lam1_re,lam1_im,abs_lam2,abs_lam3,flags";

/// Spectral and Siegel stages on a synthetic DN map, without FEM.
pub fn synthetic_point(mu: f64, cfg: &ExperimentConfig) -> Result<SyntheticRow> {
    let dn = make_synthetic_dn(mu, cfg.n)?;
    let spectral = extract_mu(&dn, cfg.band())?;
    let (ca, cb) = synthetic_coefficients(mu);
    let ta = synthetic_trace(&dn, &spectral, ca)?;
    let tb = synthetic_trace(&dn, &spectral, cb)?;
    let stage = period_stage(&dn, &ta, &tb, cfg)?;
    let rosenhain = rosenhain_entry(&stage)?;
    Ok(SyntheticRow { mu, stage, rosenhain })
}

pub fn synthetic_csv_line(mu: f64, row: &Result<SyntheticRow>) -> String {
    match row {
        Ok(r) => {
            let b = &r.stage.bcal;
            let s = &r.stage.normalized.siegel;
            let (lam, flag) = match r.rosenhain {
                RosenhainEntry::Triple(RosenhainTriple { l1, l2, l3 }) => (
                    format!("{},{},{},{}", fmt_f64(l1.re), fmt_f64(l1.im), fmt_f64(l2.norm()), fmt_f64(l3.norm())),
                    "ok".to_string(),
                ),
                RosenhainEntry::NearDegenerate { which, modulus } => {
                    (",,,".to_string(), format!("near_degenerate={which}:{}", fmt_f64(modulus)))
                }
            };
            format!(
                "{},{},{},{},{},{},{},{},{},{lam},{flag}",
                fmt_f64(mu),
                fmt_f64(r.stage.mu),
                fmt_f64(b[(0, 0)]),
                fmt_f64(b[(0, 1)]),
                fmt_f64(b[(1, 0)]),
                fmt_f64(b[(1, 1)]),
                fmt_f64(s.gamma),
                fmt_f64(s.delta),
                fmt_f64(s.beta)
            )
        }
        Err(e) => format!("{}{}error={}", fmt_f64(mu), ",".repeat(13), e.to_string().replace([',', '\n'], " ")),
    }
}

/// Unit disk check: the DN error against `|d/dphi|`, no discrete eigenvalue
/// and no harmonic forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskSanity {
    pub h_target: f64,
    pub n: usize,
    pub dn_rel_error: f64,
    pub mu: Option<f64>,
    pub harmonic_forms: usize,
}

pub const DISK_HEADER: &str = "h_target,N,dn_rel_error,mu,harmonic_forms";

pub fn disk_sanity(cfg: &ExperimentConfig) -> Result<DiskSanity> {
    let model = build_disk(cfg.h_target)?;
    let dn = assemble_dn(&model, cfg.n)?;
    let exact = dn_disk(cfg.n)?;
    let dn_rel_error = (dn.matrix() - exact.matrix()).norm() / exact.matrix().norm();
    let mu = extract_mu(&dn, cfg.band())?.mu;
    let harmonic_forms = match harmonic_form_basis(&model) {
        Ok(_) => 2,
        Err(Error::DegenerateBasis(_)) => 0,
        Err(e) => return Err(e),
    };
    Ok(DiskSanity {
        h_target: cfg.h_target,
        n: cfg.n,
        dn_rel_error,
        mu,
        harmonic_forms,
    })
}

impl DiskSanity {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            fmt_f64(self.h_target),
            self.n,
            fmt_f64(self.dn_rel_error),
            self.mu.map(fmt_f64).unwrap_or_default(),
            self.harmonic_forms
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_points_recover_mu_and_normalization() {
        let cfg = ExperimentConfig {
            family: crate::config::Family::Synthetic,
            mu: vec![0.5, 0.9],
            ..Default::default()
        };
        for mu in [0.5, 0.9, 0.99] {
            let r = synthetic_point(mu, &cfg).unwrap();
            assert!((r.stage.mu - mu).abs() < 1e-10);
            assert!(r.stage.normalization_defect < 1e-10);
            let (ca, cb) = synthetic_coefficients(mu);
            assert!((r.stage.c_a.c - ca).norm() < 1e-10 && (r.stage.c_b.c - cb).norm() < 1e-10);
            let s = r.stage.normalized.siegel;
            assert!((0.0..=0.5).contains(&s.gamma));
        }
    }

    #[test]
    fn artifacts_round_trip() {
        let fem = fem_stage(Complex64::new(0.0, 1.0), 0.3, 0.1, 4).unwrap();
        let back = FemArtifacts::from_text(&fem.to_text()).unwrap();
        assert_eq!(back, fem);
        assert!(FemArtifacts::from_text("modulus=1\n").is_err());
    }
}
