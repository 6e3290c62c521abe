//! Per-point degeneration records, sequence trend checks and their text forms.

use std::fmt::Write as _;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::collar::{collar_halfwidth, geodesic_upper_bound};
use crate::error::{Characteristic, Error, Result};
use crate::periods::Siegel;
use crate::textio::{fmt_complex, fmt_f64, parse_complex, parse_f64, parse_key_values};
use crate::theta::{classify_degeneration, parse_characteristic, Classification, RosenhainTriple};

pub const CSV_HEADER: &str = "eps,mu,dn_distance,Bcal_aa,Bcal_ab,Bcal_ba,Bcal_bb,gamma,delta,beta,\
lam1_re,lam1_im,abs_lam2,abs_lam3,modulus,geo_bound,collar_L,case_label,flags";

pub const LABEL_INSUFFICIENT: &str = "insufficient-data";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RosenhainEntry {
    Triple(RosenhainTriple),
    NearDegenerate { which: Characteristic, modulus: f64 },
}

/// Stage outputs for one family point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointInputs {
    pub eps: f64,
    pub mu: f64,
    pub dn_distance: f64,
    pub bcal: Matrix2<f64>,
    /// normalized
    pub siegel: Siegel,
    pub rosenhain: RosenhainEntry,
    /// doubled-collar modulus
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegenerationReport {
    pub eps: f64,
    pub mu: f64,
    pub dn_distance: f64,
    pub bcal: Matrix2<f64>,
    pub siegel: Siegel,
    pub rosenhain: RosenhainEntry,
    pub modulus: f64,
    /// bound on the length of the geodesic in the boundary class
    pub geo_bound: f64,
    /// collar half-width at `geo_bound`
    pub collar_l: f64,
    pub case_label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportRow {
    Point(DegenerationReport),
    Failed { eps: f64, error: String },
}

impl ReportRow {
    pub fn eps(&self) -> f64 {
        match self {
            ReportRow::Point(r) => r.eps,
            ReportRow::Failed { eps, .. } => *eps,
        }
    }

    pub fn point(&self) -> Option<&DegenerationReport> {
        match self {
            ReportRow::Point(r) => Some(r),
            ReportRow::Failed { .. } => None,
        }
    }
}

/// Commas, newlines and `;` are reserved by the CSV and flag formats.
fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| if matches!(c, ',' | '\n' | '\r' | ';') { ' ' } else { c })
        .collect()
}

pub fn failed_row(eps: f64, error: &str) -> ReportRow {
    ReportRow::Failed {
        eps,
        error: sanitize(error),
    }
}

/// Adds the modulus bound and collar half-width. The case label is filled in
/// by [`build_sweep`].
pub fn build_report(p: &PointInputs) -> ReportRow {
    let derived = geodesic_upper_bound(p.modulus).and_then(|g| Ok((g, collar_halfwidth(g)?)));
    match derived {
        Ok((geo_bound, collar_l)) => ReportRow::Point(DegenerationReport {
            eps: p.eps,
            mu: p.mu,
            dn_distance: p.dn_distance,
            bcal: p.bcal,
            siegel: p.siegel,
            rosenhain: p.rosenhain,
            modulus: p.modulus,
            geo_bound,
            collar_l,
            case_label: LABEL_INSUFFICIENT.into(),
        }),
        Err(e) => failed_row(p.eps, &e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Pass,
    Fail,
    NotApplicable,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Pass => "pass",
            Trend::Fail => "fail",
            Trend::NotApplicable => "n/a",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "pass" => Ok(Trend::Pass),
            "fail" => Ok(Trend::Fail),
            "n/a" => Ok(Trend::NotApplicable),
            _ => Err(Error::Parse(format!("bad trend flag {s:?}"))),
        }
    }

    fn of(xs: &[f64], increasing: bool) -> Self {
        if xs.len() < 2 {
            Trend::NotApplicable
        } else if xs
            .windows(2)
            .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
        {
            Trend::Pass
        } else {
            Trend::Fail
        }
    }
}

/// Monotone trends along the successful points, in sweep order (`eps`
/// decreasing).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrendFlags {
    pub mu_up: Trend,
    pub distance_down: Trend,
    pub modulus_up: Trend,
    pub bound_down: Trend,
}

impl TrendFlags {
    pub fn all_pass(&self) -> bool {
        [self.mu_up, self.distance_down, self.modulus_up, self.bound_down]
            .iter()
            .all(|t| *t == Trend::Pass)
    }

    fn entries(&self) -> [(&'static str, Trend); 4] {
        [
            ("mu_up", self.mu_up),
            ("dist_down", self.distance_down),
            ("modulus_up", self.modulus_up),
            ("bound_down", self.bound_down),
        ]
    }

    pub fn to_flag_string(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, t)| format!("{k}={}", t.as_str()))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub trends: TrendFlags,
    pub classification: Option<Classification>,
}

impl SweepReport {
    pub fn points(&self) -> impl Iterator<Item = &DegenerationReport> {
        self.rows.iter().filter_map(ReportRow::point)
    }

    pub fn failures(&self) -> usize {
        self.rows.len() - self.points().count()
    }
}

/// Trend flags and the degeneration label over the successful rows.
pub fn build_sweep(mut rows: Vec<ReportRow>) -> SweepReport {
    let pts: Vec<&DegenerationReport> = rows.iter().filter_map(ReportRow::point).collect();
    let col = |f: fn(&DegenerationReport) -> f64| pts.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let trends = TrendFlags {
        mu_up: Trend::of(&col(|r| r.mu), true),
        distance_down: Trend::of(&col(|r| r.dn_distance), false),
        modulus_up: Trend::of(&col(|r| r.modulus), true),
        bound_down: Trend::of(&col(|r| r.geo_bound), false),
    };
    let seq: Vec<(Matrix2<Complex64>, f64)> = pts.iter().map(|r| (r.siegel.matrix(), r.mu)).collect();
    let classification = classify_degeneration(&seq).ok();
    let label = classification
        .as_ref()
        .map_or(LABEL_INSUFFICIENT, |c| c.case.label())
        .to_string();
    for row in &mut rows {
        if let ReportRow::Point(r) = row {
            r.case_label = label.clone();
        }
    }
    SweepReport {
        rows,
        trends,
        classification,
    }
}

/// One row per family point, columns as in [`CSV_HEADER`].
pub fn to_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let trend = report.trends.to_flag_string();
    for row in &report.rows {
        let fields: Vec<String> = match row {
            ReportRow::Point(r) => {
                let (lam, marker) = match r.rosenhain {
                    RosenhainEntry::Triple(t) => (
                        [
                            fmt_f64(t.l1.re),
                            fmt_f64(t.l1.im),
                            fmt_f64(t.l2.norm()),
                            fmt_f64(t.l3.norm()),
                        ],
                        String::new(),
                    ),
                    RosenhainEntry::NearDegenerate { which, modulus } => (
                        Default::default(),
                        format!(";near_degenerate={which}:{}", fmt_f64(modulus)),
                    ),
                };
                let mut f = vec![
                    fmt_f64(r.eps),
                    fmt_f64(r.mu),
                    fmt_f64(r.dn_distance),
                    fmt_f64(r.bcal[(0, 0)]),
                    fmt_f64(r.bcal[(0, 1)]),
                    fmt_f64(r.bcal[(1, 0)]),
                    fmt_f64(r.bcal[(1, 1)]),
                    fmt_f64(r.siegel.gamma),
                    fmt_f64(r.siegel.delta),
                    fmt_f64(r.siegel.beta),
                ];
                f.extend(lam);
                f.extend([
                    fmt_f64(r.modulus),
                    fmt_f64(r.geo_bound),
                    fmt_f64(r.collar_l),
                    r.case_label.clone(),
                    format!("{trend}{marker}"),
                ]);
                f
            }
            ReportRow::Failed { eps, error } => {
                let mut f = vec![fmt_f64(*eps)];
                f.extend(std::iter::repeat_n(String::new(), 17));
                f.push(format!("{trend};error={error}"));
                f
            }
        };
        out += &fields.join(",");
        out.push('\n');
    }
    out
}

fn row_to_text(row: &ReportRow) -> String {
    let mut out = String::new();
    match row {
        ReportRow::Failed { eps, error } => {
            let _ = writeln!(out, "eps={}\nerror={error}", fmt_f64(*eps));
        }
        ReportRow::Point(r) => {
            let b = &r.bcal;
            let s = &r.siegel;
            for (k, v) in [
                ("eps", r.eps),
                ("mu", r.mu),
                ("dn_distance", r.dn_distance),
                ("Bcal_aa", b[(0, 0)]),
                ("Bcal_ab", b[(0, 1)]),
                ("Bcal_ba", b[(1, 0)]),
                ("Bcal_bb", b[(1, 1)]),
                ("gamma", s.gamma),
                ("delta", s.delta),
                ("beta", s.beta),
                ("modulus", r.modulus),
                ("geo_bound", r.geo_bound),
                ("collar_L", r.collar_l),
            ] {
                let _ = writeln!(out, "{k}={}", fmt_f64(v));
            }
            match r.rosenhain {
                RosenhainEntry::Triple(t) => {
                    for (k, z) in [("lam1", t.l1), ("lam2", t.l2), ("lam3", t.l3)] {
                        let _ = writeln!(out, "{k}={}", fmt_complex(z));
                    }
                }
                RosenhainEntry::NearDegenerate { which, modulus } => {
                    let _ = writeln!(out, "near_degenerate={which}\nnear_degenerate_modulus={}", fmt_f64(modulus));
                }
            }
            let _ = writeln!(out, "case_label={}", r.case_label);
        }
    }
    out
}

fn row_from_text(text: &str) -> Result<ReportRow> {
    let map = parse_key_values(text)?;
    let get = |k: &str| -> Result<&str> {
        map.get(k)
            .and_then(|v| v.last())
            .map(String::as_str)
            .ok_or_else(|| Error::Parse(format!("report row lacks {k}")))
    };
    let real = |k: &str| get(k).and_then(parse_f64);
    let eps = real("eps")?;
    if let Ok(error) = get("error") {
        return Ok(ReportRow::Failed {
            eps,
            error: error.to_string(),
        });
    }
    let rosenhain = if let Ok(which) = get("near_degenerate") {
        RosenhainEntry::NearDegenerate {
            which: parse_characteristic(which)?,
            modulus: real("near_degenerate_modulus")?,
        }
    } else {
        let c = |k: &str| get(k).and_then(parse_complex);
        RosenhainEntry::Triple(RosenhainTriple {
            l1: c("lam1")?,
            l2: c("lam2")?,
            l3: c("lam3")?,
        })
    };
    Ok(ReportRow::Point(DegenerationReport {
        eps,
        mu: real("mu")?,
        dn_distance: real("dn_distance")?,
        bcal: Matrix2::new(real("Bcal_aa")?, real("Bcal_ab")?, real("Bcal_ba")?, real("Bcal_bb")?),
        siegel: Siegel::new(real("gamma")?, real("delta")?, real("beta")?),
        rosenhain,
        modulus: real("modulus")?,
        geo_bound: real("geo_bound")?,
        collar_l: real("collar_L")?,
        case_label: get("case_label")?.to_string(),
    }))
}

const ROW_SEPARATOR: &str = "---\n";

/// Full-precision text form: `key=value` blocks separated by `---` lines,
/// followed by a `trends=` block.
pub fn sweep_to_text(report: &SweepReport) -> String {
    let mut out = String::new();
    for row in &report.rows {
        out += &row_to_text(row);
        out += ROW_SEPARATOR;
    }
    let _ = writeln!(out, "trends={}", report.trends.to_flag_string());
    out
}

/// Inverse of [`sweep_to_text`]. The classification is recomputed from the
/// rows.
pub fn sweep_from_text(text: &str) -> Result<SweepReport> {
    let blocks: Vec<&str> = text.split(ROW_SEPARATOR).collect();
    let (last, rows) = blocks.split_last().ok_or_else(|| Error::Parse("empty report".into()))?;
    let rows = rows.iter().map(|b| row_from_text(b)).collect::<Result<Vec<_>>>()?;
    let map = parse_key_values(last)?;
    let flags = map
        .get("trends")
        .and_then(|v| v.last())
        .ok_or_else(|| Error::Parse("report lacks trends".into()))?;
    let mut t = [Trend::NotApplicable; 4];
    let parts: Vec<&str> = flags.split(';').collect();
    if parts.len() != 4 {
        return Err(Error::Parse(format!("bad trends {flags:?}")));
    }
    for (slot, part) in t.iter_mut().zip(parts) {
        let (_, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad trend {part:?}")))?;
        *slot = Trend::parse(v)?;
    }
    let rebuilt = build_sweep(rows.clone());
    Ok(SweepReport {
        rows,
        trends: TrendFlags {
            mu_up: t[0],
            distance_down: t[1],
            modulus_up: t[2],
            bound_down: t[3],
        },
        classification: rebuilt.classification,
    })
}
