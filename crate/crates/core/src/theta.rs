//! Genus-2 theta constants with half-integer characteristics, Rosenhain
//! branch points and the degeneration classifier.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Characteristic, Error, Result};
use crate::periods::check_siegel;
use crate::textio::fmt_f64;

/// Relative tail tolerance for the lattice sum.
pub const TAIL_TOL: f64 = 1e-14;
pub const MAX_RADIUS: usize = 200;
/// Below this modulus a theta constant counts as vanishing.
pub const VANISHING: f64 = 1e-12;
/// Denominators of the Rosenhain ratios must exceed this modulus.
pub const DEGENERATE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaConstant {
    pub characteristic: Characteristic,
    pub value: Complex64,
    pub radius: usize,
    pub tail_bound: f64,
}

impl ThetaConstant {
    pub fn is_vanishing(&self) -> bool {
        self.value.norm() <= VANISHING
    }
}

fn min_imaginary_eigenvalue(b: &Matrix2<Complex64>) -> f64 {
    SymmetricEigen::new(b.map(|z| z.im)).eigenvalues.min()
}

/// Bound on `sum_{||n||_inf > r} |term|`: the shell `||n||_inf = t` has `8t`
/// points, each with `|n + a| >= t - 1/2`.
fn tail_bound(lambda_min: f64, r: usize) -> f64 {
    let mut sum = 0.0;
    let mut t = r + 1;
    loop {
        let x = t as f64 - 0.5;
        let term = 8.0 * t as f64 * (-PI * lambda_min * x * x).exp();
        sum += term;
        if term <= sum * 1e-17 || term == 0.0 {
            return sum;
        }
        t += 1;
    }
}

fn term(b: &Matrix2<Complex64>, ch: Characteristic, n: [i64; 2]) -> Complex64 {
    let [a1, a2] = ch.a();
    let [b1, b2] = ch.b();
    let x = [n[0] as f64 + a1, n[1] as f64 + a2];
    let quad = b[(0, 0)] * x[0] * x[0] + b[(0, 1)] * 2.0 * x[0] * x[1] + b[(1, 1)] * x[1] * x[1];
    let lin = x[0] * b1 + x[1] * b2;
    (Complex64::i() * PI * (quad + 2.0 * lin)).exp()
}

/// Sum over the shell `||n||_inf = s`, in lexicographic order.
fn shell_sum(b: &Matrix2<Complex64>, ch: Characteristic, s: i64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in -s..=s {
        for n2 in -s..=s {
            if n1.abs().max(n2.abs()) == s {
                acc += term(b, ch, [n1, n2]);
            }
        }
    }
    acc
}

/// Lattice sum over `||n||_inf <= radius`, without a convergence check.
pub fn theta_constant_at_radius(
    b: &Matrix2<Complex64>,
    ch: Characteristic,
    radius: usize,
) -> Result<ThetaConstant> {
    check_siegel(b)?;
    let value = (0..=radius as i64).map(|s| shell_sum(b, ch, s)).sum();
    Ok(ThetaConstant {
        characteristic: ch,
        value,
        radius,
        tail_bound: tail_bound(min_imaginary_eigenvalue(b), radius),
    })
}

/// `sum_n exp(pi i (n+a)^T B (n+a) + 2 pi i (n+a)^T b)`, summed shell by
/// shell until the tail bound drops below `TAIL_TOL` times the partial sum.
pub fn theta_constant(b: &Matrix2<Complex64>, ch: Characteristic) -> Result<ThetaConstant> {
    check_siegel(b)?;
    let lambda = min_imaginary_eigenvalue(b);
    let mut value = Complex64::new(0.0, 0.0);
    for r in 0..=MAX_RADIUS {
        value += shell_sum(b, ch, r as i64);
        let tail = tail_bound(lambda, r);
        if tail <= TAIL_TOL * (value.norm() + 1e-300) {
            return Ok(ThetaConstant {
                characteristic: ch,
                value,
                radius: r,
                tail_bound: tail,
            });
        }
    }
    Err(Error::SlowConvergence(MAX_RADIUS))
}

/// All ten even theta constants.
pub fn even_theta_constants(b: &Matrix2<Complex64>) -> Result<Vec<ThetaConstant>> {
    Characteristic::even()
        .into_iter()
        .map(|ch| theta_constant(b, ch))
        .collect()
}

/// CSV rows `characteristic,re,im,radius,tail_bound`.
pub fn theta_report_csv(values: &[ThetaConstant]) -> String {
    let mut out = String::from("characteristic,re,im,radius,tail_bound\n");
    for t in values {
        out += &format!(
            "{},{},{},{},{}\n",
            t.characteristic,
            fmt_f64(t.value.re),
            fmt_f64(t.value.im),
            t.radius,
            fmt_f64(t.tail_bound)
        );
    }
    out
}

pub fn parse_characteristic(s: &str) -> Result<Characteristic> {
    let bits: Vec<u8> = s
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse(format!("bad characteristic {s:?}"))),
        })
        .collect::<Result<_>>()?;
    match bits[..] {
        [a1, a2, b1, b2] => Ok(Characteristic::new(a1, a2, b1, b2)),
        _ => Err(Error::Parse(format!("characteristic {s:?} needs four flags"))),
    }
}

/// Branch points `(lambda_1, lambda_2, lambda_3)` of the Rosenhain model
/// `y^2 = x (x - 1)(x - lambda_1)(x - lambda_2)(x - lambda_3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RosenhainTriple {
    pub l1: Complex64,
    pub l2: Complex64,
    pub l3: Complex64,
}

impl RosenhainTriple {
    pub fn as_array(&self) -> [Complex64; 3] {
        [self.l1, self.l2, self.l3]
    }

    /// Smallest distance among the five finite branch points `0, 1, l1, l2, l3`.
    pub fn min_separation(&self) -> f64 {
        let pts = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            self.l1,
            self.l2,
            self.l3,
        ];
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.min((pts[i] - pts[j]).norm());
            }
        }
        best
    }
}

fn rosenhain_from<F>(mut e: F) -> Result<RosenhainTriple>
where
    F: FnMut(Characteristic) -> Result<Complex64>,
{
    let e0000 = e(Characteristic::new(0, 0, 0, 0))?;
    let e0010 = e(Characteristic::new(0, 0, 1, 0))?;
    let e1100 = e(Characteristic::new(1, 1, 0, 0))?;
    let mut denominators = Vec::new();
    for ch in [
        Characteristic::new(0, 0, 1, 1),
        Characteristic::new(0, 0, 0, 1),
        Characteristic::new(1, 1, 1, 1),
    ] {
        let v = e(ch)?;
        if v.norm() <= DEGENERATE {
            return Err(Error::NearDegenerate {
                which: ch,
                modulus: v.norm(),
            });
        }
        denominators.push(v);
    }
    let (e0011, e0001, e1111) = (denominators[0], denominators[1], denominators[2]);
    let sq = |z: Complex64| z * z;
    Ok(RosenhainTriple {
        l1: sq(e0000 * e0010 / (e0011 * e0001)),
        l2: sq(e0010 * e1100 / (e0001 * e1111)),
        l3: sq(e0000 * e1100 / (e0011 * e1111)),
    })
}

pub fn rosenhain(b: &Matrix2<Complex64>) -> Result<RosenhainTriple> {
    rosenhain_from(|ch| theta_constant(b, ch).map(|t| t.value))
}

/// Rosenhain triple from lattice sums truncated at a fixed radius.
pub fn rosenhain_at_radius(b: &Matrix2<Complex64>, radius: usize) -> Result<RosenhainTriple> {
    rosenhain_from(|ch| theta_constant_at_radius(b, ch, radius).map(|t| t.value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegenerationCase {
    /// `B` stays bounded and becomes diagonal.
    TrivialPinch,
    /// `(Im B)^{-1} -> 0`.
    NontrivialPinch,
    Undecided,
}

impl DegenerationCase {
    pub fn label(&self) -> &'static str {
        match self {
            DegenerationCase::TrivialPinch => "case-i (homologically trivial pinch)",
            DegenerationCase::NontrivialPinch => "case-ii (homologically nontrivial pinch)",
            DegenerationCase::Undecided => "mixed/undecided",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointDiagnostics {
    /// `||B||_inf` (maximum absolute row sum)
    pub norm_b: f64,
    /// `||(Im B)^{-1}||_inf`
    pub norm_im_inv: f64,
    /// `|B_12|`
    pub off_diagonal: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub points: Vec<PointDiagnostics>,
    pub case: DegenerationCase,
}

/// Growth factor of `||B||` along the sequence still counted as bounded.
pub const BOUNDED_RATIO: f64 = 2.0;

fn inf_norm<T: Copy>(m: &Matrix2<T>, abs: impl Fn(T) -> f64) -> f64 {
    (0..2)
        .map(|r| abs(m[(r, 0)]) + abs(m[(r, 1)]))
        .fold(0.0, f64::max)
}

pub fn diagnostics(b: &Matrix2<Complex64>) -> Result<PointDiagnostics> {
    let im = b.map(|z| z.im);
    let inv = im
        .try_inverse()
        .ok_or_else(|| Error::NotSiegel("singular imaginary part".into()))?;
    Ok(PointDiagnostics {
        norm_b: inf_norm(b, |z| z.norm()),
        norm_im_inv: inf_norm(&inv, f64::abs),
        off_diagonal: b[(0, 1)].norm(),
    })
}

/// Strictly decreasing with the last value at most half the first.
fn decreasing_toward_zero(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0]) && xs[xs.len() - 1] <= 0.5 * xs[0]
}

/// Labels a sequence `(B_r, mu_r)` with `mu_r` increasing. Since
/// `(Im B)^{-1} -> 0` forces `B` to be unbounded, the two cases are told apart
/// by the growth of `||B||` first.
pub fn classify_degeneration(seq: &[(Matrix2<Complex64>, f64)]) -> Result<Classification> {
    if seq.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            seq.len()
        )));
    }
    if seq.windows(2).any(|w| !(w[1].1 > w[0].1)) {
        return Err(Error::InvalidInput("mu must increase along the sequence".into()));
    }
    let points = seq
        .iter()
        .map(|(b, _)| diagnostics(b))
        .collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = points.iter().map(|p| p.norm_b).collect();
    let bounded = norms[norms.len() - 1] / norms[0] <= BOUNDED_RATIO;
    let offdiag: Vec<f64> = points.iter().map(|p| p.off_diagonal).collect();
    let inv: Vec<f64> = points.iter().map(|p| p.norm_im_inv).collect();
    let case = if bounded && decreasing_toward_zero(&offdiag) {
        DegenerationCase::TrivialPinch
    } else if !bounded && decreasing_toward_zero(&inv) {
        DegenerationCase::NontrivialPinch
    } else {
        DegenerationCase::Undecided
    };
    Ok(Classification { points, case })
}
