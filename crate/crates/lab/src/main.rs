use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use dnlab_core::periods::PeriodData;
use dnlab_core::report::sweep_from_text;
use dnlab_core::textio::{fmt_complex, fmt_f64};
use dnlab_core::theta::{even_theta_constants, rosenhain, theta_report_csv};
use dnlab::config::{ExperimentConfig, Family};
use dnlab::pipeline::{period_stage, FemArtifacts};
use dnlab::sweep::{fem_artifacts, run_sweep, write_report, RunStatus};

#[derive(Parser)]
#[command(name = "dnlab", version, about = "Boundary spectral data and degeneration sweeps for tori with a hole")]
struct Cli {
    /// key=value experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory (overrides `out=`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble DN maps and normal traces for every eps
    Forward,
    /// Discrete eigenvalue of iH for every eps
    Spectrum,
    /// Period matrices for every eps
    Periods,
    /// Even theta constants and Rosenhain points for every eps
    Theta,
    /// Full sweep: report CSV and plots
    Sweep,
    /// Re-render CSV and plots from a saved report.txt
    Report,
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::parse(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if cli.no_cache {
        cfg.cache = false;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn eps_tag(eps: f64) -> String {
    format!("eps{}", fmt_f64(eps))
}

/// Runs `f` on every successful FEM point and reports failures on stderr.
fn per_point<F>(cfg: &ExperimentConfig, sub: &str, mut f: F) -> anyhow::Result<RunStatus>
where
    F: FnMut(f64, &FemArtifacts, &Path) -> anyhow::Result<()>,
{
    if cfg.family != Family::TorusHole {
        bail!("`{sub}` needs family=torus-hole; use `sweep` for {}", cfg.family);
    }
    let dir = cfg.out_dir.join(sub);
    fs::create_dir_all(&dir)?;
    let (fems, solves) = fem_artifacts(cfg);
    eprintln!("{solves} FEM solve(s)");
    let (mut ok, mut failed) = (0, 0);
    for (eps, fem) in cfg.eps.iter().zip(fems) {
        match fem.map_err(anyhow::Error::from).and_then(|fem| f(*eps, &fem, &dir)) {
            Ok(()) => ok += 1,
            Err(e) => {
                failed += 1;
                eprintln!("eps={eps}: {e:#}");
            }
        }
    }
    Ok(RunStatus::from_counts(ok, failed))
}

fn run(cli: &Cli) -> anyhow::Result<RunStatus> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Forward => per_point(&cfg, "forward", |eps, fem, dir| {
            let path = dir.join(format!("dn_{}.txt", eps_tag(eps)));
            fem.dn.save(
                &path,
                &[
                    ("eps", fmt_f64(eps)),
                    ("vertices", fem.vertices.to_string()),
                    ("triangles", fem.triangles.to_string()),
                    ("modulus", fmt_f64(fem.modulus)),
                ],
            )?;
            fs::write(dir.join(format!("trace_a_{}.txt", eps_tag(eps))), fem.trace_a.to_text())?;
            fs::write(dir.join(format!("trace_b_{}.txt", eps_tag(eps))), fem.trace_b.to_text())?;
            let d = fem.dn.dn_diagnostics();
            println!(
                "eps={eps} vertices={} hermitian_defect={:e} constant_defect={:e} min_rayleigh={:e}",
                fem.vertices, d.hermitian_defect, d.constant_defect, d.min_rayleigh
            );
            Ok(())
        }),
        Command::Spectrum => per_point(&cfg, "spectrum", |eps, fem, dir| {
            let s = dnlab_core::spectral::extract_mu(&fem.dn, cfg.band())?;
            fs::write(dir.join(format!("{}.txt", eps_tag(eps))), s.to_key_values())?;
            match s.mu {
                Some(mu) => println!("eps={eps} mu={}", fmt_f64(mu)),
                None => println!("eps={eps} no discrete eigenvalue in band"),
            }
            Ok(())
        }),
        Command::Periods => per_point(&cfg, "periods", |eps, fem, dir| {
            let p = period_stage(&fem.dn, &fem.trace_a, &fem.trace_b, &cfg)?;
            let data = PeriodData::from_boundary(p.mu, p.c_a.c, p.c_b.c, Some(cfg.tolerance("normalization")))?;
            let bi = &fem.bcal_interior;
            let text = format!(
                "{}Bcal_interior={},{},{},{}\nnormalization_defect={}\n",
                data.to_key_values(),
                fmt_f64(bi[(0, 0)]),
                fmt_f64(bi[(0, 1)]),
                fmt_f64(bi[(1, 0)]),
                fmt_f64(bi[(1, 1)]),
                fmt_f64(p.normalization_defect)
            );
            fs::write(dir.join(format!("{}.txt", eps_tag(eps))), text)?;
            let s = p.normalized.siegel;
            println!(
                "eps={eps} mu={} gamma={} delta={} beta={} det_B={}",
                fmt_f64(p.mu),
                fmt_f64(s.gamma),
                fmt_f64(s.delta),
                fmt_f64(s.beta),
                fmt_f64(p.bcal.determinant())
            );
            Ok(())
        }),
        Command::Theta => per_point(&cfg, "theta", |eps, fem, dir| {
            let p = period_stage(&fem.dn, &fem.trace_a, &fem.trace_b, &cfg)?;
            let b = p.normalized.siegel.matrix();
            fs::write(dir.join(format!("{}.csv", eps_tag(eps))), theta_report_csv(&even_theta_constants(&b)?))?;
            match rosenhain(&b) {
                Ok(r) => println!(
                    "eps={eps} lambda1={} lambda2={} lambda3={}",
                    fmt_complex(r.l1),
                    fmt_complex(r.l2),
                    fmt_complex(r.l3)
                ),
                Err(e) => println!("eps={eps} {e}"),
            }
            Ok(())
        }),
        Command::Sweep => {
            let outcome = run_sweep(&cfg)?;
            print!("{}", outcome.csv);
            eprintln!("{} FEM solve(s); wrote {}", outcome.fem_solves, outcome.csv_path.display());
            if let Some(c) = outcome.report.as_ref().and_then(|r| r.classification.as_ref()) {
                eprintln!("classification: {}", c.case.label());
            }
            Ok(outcome.status)
        }
        Command::Report => {
            let path = cfg.out_dir.join("report.txt");
            let report = sweep_from_text(
                &fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
            )?;
            let (csv, _, plots) = write_report(&report, &cfg.out_dir)?;
            print!("{csv}");
            if let Some(c) = &report.classification {
                for (r, p) in report.points().zip(&c.points) {
                    eprintln!(
                        "eps={} |B|={:e} |(Im B)^-1|={:e} |beta|={:e}",
                        r.eps, p.norm_b, p.norm_im_inv, p.off_diagonal
                    );
                }
                eprintln!("classification: {}", c.case.label());
            }
            eprintln!("trends: {}", report.trends.to_flag_string());
            eprintln!("{} plot(s) written", plots.len());
            let failed = report.failures();
            Ok(RunStatus::from_counts(report.rows.len() - failed, failed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
