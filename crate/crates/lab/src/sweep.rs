//! Family sweeps: parallel FEM stage with caching, then serialized assembly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use dnlab_core::report::{build_sweep, sweep_to_text, to_csv, SweepReport};
use dnlab_core::textio::fmt_f64;

use crate::cache::{Cache, CacheFragment};
use crate::config::{ExperimentConfig, Family};
use crate::pipeline::{
    disk_sanity, fem_stage, report_row, synthetic_csv_line, synthetic_point, FemArtifacts, DISK_HEADER,
    SYNTHETIC_HEADER,
};
use crate::plot::line_plot;
use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Partial,
    Failed,
}

impl RunStatus {
    pub fn from_counts(ok: usize, failed: usize) -> Self {
        match (ok, failed) {
            (_, 0) => RunStatus::Success,
            (0, _) => RunStatus::Failed,
            _ => RunStatus::Partial,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Partial => 2,
            RunStatus::Failed => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub csv: String,
    pub csv_path: PathBuf,
    pub plots: Vec<PathBuf>,
    pub report: Option<SweepReport>,
    pub fem_solves: usize,
    pub status: RunStatus,
}

/// `f(0..n)` on up to `workers` threads, results in index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let v = f(i);
                slots.lock().unwrap()[i] = Some(v);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|v| v.expect("every job ran"))
        .collect()
}

pub fn cache_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir.join("cache")
}

/// FEM artifacts per `eps`, from the cache when enabled. Returns the number
/// of solves actually performed.
pub fn fem_artifacts(cfg: &ExperimentConfig) -> (Vec<dnlab_core::Result<FemArtifacts>>, usize) {
    let cache = Cache::new(cache_dir(cfg));
    let solves = AtomicUsize::new(0);
    let results = parallel_map(cfg.eps.len(), cfg.workers, |i| {
        let eps = cfg.eps[i];
        let fragment = CacheFragment {
            family: cfg.family,
            tau_lat: cfg.tau_lat,
            eps,
            h_target: cfg.h_target,
            n: cfg.n,
        };
        if cfg.cache {
            match cache.load(&fragment) {
                Ok(Some(fem)) => return Ok(fem),
                Ok(None) => {}
                Err(e) => eprintln!("warning: ignoring cache entry for eps={eps}: {e}"),
            }
        }
        solves.fetch_add(1, Ordering::Relaxed);
        let fem = fem_stage(cfg.tau_lat, eps, cfg.h_target, cfg.n)?;
        if cfg.cache {
            if let Err(e) = cache.store(&fragment, &fem) {
                eprintln!("warning: could not cache eps={eps}: {e}");
            }
        }
        Ok(fem)
    });
    (results, solves.into_inner())
}

pub const PLOT_NAMES: [&str; 4] = ["mu", "dn_distance", "geo_bound", "beta"];

pub fn write_plots(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(dir)?;
    let series = |f: fn(&dnlab_core::report::DegenerationReport) -> f64| -> Vec<(f64, f64)> {
        report.points().map(|r| (r.eps, f(r))).collect()
    };
    let plots = [
        ("mu", "discrete eigenvalue mu", series(|r| r.mu)),
        ("dn_distance", "distance to |d/dphi|", series(|r| r.dn_distance)),
        ("geo_bound", "geodesic length bound pi/m", series(|r| r.geo_bound)),
        ("beta", "|beta|", series(|r| r.siegel.beta.abs())),
    ];
    let mut paths = Vec::new();
    for (name, label, pts) in plots {
        let path = dir.join(format!("{name}.svg"));
        fs::write(&path, line_plot(&format!("{label} vs eps"), "eps", label, &pts, true))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes `report.csv`, `report.txt` and the plots for a finished report.
pub fn write_report(report: &SweepReport, out: &Path) -> Result<(String, PathBuf, Vec<PathBuf>), LabError> {
    fs::create_dir_all(out)?;
    let csv = to_csv(report);
    let csv_path = out.join("report.csv");
    fs::write(&csv_path, &csv)?;
    fs::write(out.join("report.txt"), sweep_to_text(report))?;
    let plots = write_plots(report, &out.join("plots"))?;
    Ok((csv, csv_path, plots))
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome, LabError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    match cfg.family {
        Family::TorusHole => {
            let (fems, fem_solves) = fem_artifacts(cfg);
            let rows = parallel_map(fems.len(), cfg.workers, |i| {
                report_row(cfg.eps[i], &fems[i], cfg)
            });
            let report = build_sweep(rows);
            let (csv, csv_path, plots) = write_report(&report, &cfg.out_dir)?;
            let failed = report.failures();
            Ok(SweepOutcome {
                csv,
                csv_path,
                plots,
                status: RunStatus::from_counts(report.rows.len() - failed, failed),
                report: Some(report),
                fem_solves,
            })
        }
        Family::Synthetic => {
            let rows = parallel_map(cfg.mu.len(), cfg.workers, |i| synthetic_point(cfg.mu[i], cfg));
            let mut csv = format!("{SYNTHETIC_HEADER}\n");
            for (mu, row) in cfg.mu.iter().zip(&rows) {
                csv += &synthetic_csv_line(*mu, row);
                csv.push('\n');
            }
            let csv_path = cfg.out_dir.join("synthetic.csv");
            fs::write(&csv_path, &csv)?;
            let failed = rows.iter().filter(|r| r.is_err()).count();
            Ok(SweepOutcome {
                csv,
                csv_path,
                plots: Vec::new(),
                report: None,
                fem_solves: 0,
                status: RunStatus::from_counts(rows.len() - failed, failed),
            })
        }
        Family::DiskSanity => {
            let result = disk_sanity(cfg);
            let line = match &result {
                Ok(d) => d.csv_line(),
                Err(e) => format!("{},{},,,error={}", fmt_f64(cfg.h_target), cfg.n, e.to_string().replace(',', " ")),
            };
            let csv = format!("{DISK_HEADER}\n{line}\n");
            let csv_path = cfg.out_dir.join("disk_sanity.csv");
            fs::write(&csv_path, &csv)?;
            Ok(SweepOutcome {
                csv,
                csv_path,
                plots: Vec::new(),
                report: None,
                fem_solves: 1,
                status: if result.is_ok() { RunStatus::Success } else { RunStatus::Failed },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let v = parallel_map(17, 4, |i| i * i);
        assert_eq!(v, (0..17).map(|i| i * i).collect::<Vec<_>>());
        assert!(parallel_map(0, 3, |i| i).is_empty());
    }

    #[test]
    fn status_codes() {
        assert_eq!(RunStatus::from_counts(3, 0).exit_code(), 0);
        assert_eq!(RunStatus::from_counts(2, 1).exit_code(), 2);
        assert_eq!(RunStatus::from_counts(0, 2).exit_code(), 1);
    }
}
