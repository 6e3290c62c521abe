//! Functions and operators on the unit circle in the truncated Fourier basis.
//!
//! A truncation `N` keeps the modes `k = -N..=N`; mode `k` lives at storage
//! index `k + N`. Operator matrices follow the convention
//! `A[j][k] = (A e^{ik phi}, e^{ij phi})_{L2(T)} / 2pi`, so that applying the
//! matrix to a coefficient vector applies the operator to the function.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::textio;

pub const DEFAULT_TRUNCATION: usize = 32;

const HERMITIAN_TOL: f64 = 1e-10;
const KERNEL_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-8;
const MEAN_ZERO_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-12;

/// Truncated Fourier series of a complex function on the circle.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    n: usize,
    coeffs: DVector<Complex64>,
}

impl BoundaryFunction {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: DVector::zeros(2 * n + 1),
        }
    }

    pub fn from_coefficients(n: usize, coeffs: DVector<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for truncation {n}, got {}",
                2 * n + 1,
                coeffs.len()
            )));
        }
        Ok(Self { n, coeffs })
    }

    /// `e^{ik phi}`.
    pub fn mode(n: usize, k: i64) -> Self {
        let mut f = Self::zeros(n);
        f[k] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        let mut f = Self::zeros(n);
        f[0] = value;
        f
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &DVector<Complex64> {
        &self.coeffs
    }

    pub fn into_coefficients(self) -> DVector<Complex64> {
        self.coeffs
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - n, *c))
    }

    pub fn is_mean_zero(&self) -> bool {
        self[0].norm() <= MEAN_ZERO_TOL
    }

    /// The function `phi -> conj(f(phi))`: `c_k -> conj(c_{-k})`.
    pub fn conj(&self) -> Self {
        let len = self.coeffs.len();
        let coeffs = DVector::from_fn(len, |i, _| self.coeffs[len - 1 - i].conj());
        Self { n: self.n, coeffs }
    }

    /// Drops the `k = 0` coefficient.
    pub fn without_mean(&self) -> Self {
        let mut f = self.clone();
        f[0] = Complex64::new(0.0, 0.0);
        f
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            coeffs: &self.coeffs * s,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_truncation(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            coeffs: &self.coeffs + &other.coeffs,
        })
    }

    /// L2(T) norm with the measure `d phi`.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI).sqrt() * self.coeffs.norm()
    }

    pub fn evaluate(&self, phi: f64) -> Complex64 {
        self.modes()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * phi))
            .sum()
    }

    /// Writes the coefficients, one `k,a+bi` line per mode.
    pub fn to_text(&self) -> String {
        let mut out = format!("N={}\n", self.n);
        for (k, c) in self.modes() {
            out.push_str(&format!("{k},{}\n", textio::fmt_complex(c)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n = parse_header(lines.next())?;
        let mut f = Self::zeros(n);
        let mut seen = 0usize;
        for line in lines {
            let (k, c) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad coefficient line {line:?}")))?;
            let k: i64 = k
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad mode index {k:?}")))?;
            if k.unsigned_abs() as usize > n {
                return Err(Error::Parse(format!("mode {k} outside truncation {n}")));
            }
            f[k] = textio::parse_complex(c)?;
            seen += 1;
        }
        if seen != 2 * n + 1 {
            return Err(Error::Parse(format!("expected {} modes, got {seen}", 2 * n + 1)));
        }
        Ok(f)
    }
}

impl std::ops::Index<i64> for BoundaryFunction {
    type Output = Complex64;
    fn index(&self, k: i64) -> &Complex64 {
        &self.coeffs[(k + self.n as i64) as usize]
    }
}

impl std::ops::IndexMut<i64> for BoundaryFunction {
    fn index_mut(&mut self, k: i64) -> &mut Complex64 {
        &mut self.coeffs[(k + self.n as i64) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Dn,
    Hilbert,
    Derivative,
    ModulusDerivative,
    Generic,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Dn => "dn",
            OperatorKind::Hilbert => "hilbert",
            OperatorKind::Derivative => "derivative",
            OperatorKind::ModulusDerivative => "modulus-derivative",
            OperatorKind::Generic => "generic",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "dn" => OperatorKind::Dn,
            "hilbert" => OperatorKind::Hilbert,
            "derivative" => OperatorKind::Derivative,
            "modulus-derivative" => OperatorKind::ModulusDerivative,
            "generic" => OperatorKind::Generic,
            other => return Err(Error::Parse(format!("unknown operator kind {other:?}"))),
        })
    }
}

/// Dense operator on truncated Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryOperator {
    n: usize,
    matrix: DMatrix<Complex64>,
    kind: OperatorKind,
}

/// Numerical checks of the DN-map invariants.
#[derive(Clone, Copy, Debug)]
pub struct DnDiagnostics {
    /// `||A - A*||_F / ||A||_F`.
    pub hermitian_defect: f64,
    /// `max(||A 1||, ||1^* A||)`.
    pub constant_defect: f64,
    /// Smallest eigenvalue on mean-zero functions.
    pub min_rayleigh: f64,
}

impl DnDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.hermitian_defect <= HERMITIAN_TOL
            && self.constant_defect <= KERNEL_TOL
            && self.min_rayleigh >= -PSD_TOL
    }
}

impl BoundaryOperator {
    pub fn new(n: usize, matrix: DMatrix<Complex64>, kind: OperatorKind) -> Result<Self> {
        let dim = 2 * n + 1;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidInput(format!(
                "operator matrix must be {dim}x{dim} for truncation {n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { n, matrix, kind })
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entry(&self, j: i64, k: i64) -> Complex64 {
        let n = self.n as i64;
        self.matrix[((j + n) as usize, (k + n) as usize)]
    }

    pub fn apply(&self, f: &BoundaryFunction) -> Result<BoundaryFunction> {
        check_truncation(self.n, f.truncation())?;
        BoundaryFunction::from_coefficients(self.n, &self.matrix * f.coefficients())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_truncation(self.n, other.n)?;
        Self::new(self.n, &self.matrix * &other.matrix, OperatorKind::Generic)
    }

    /// Averages with the conjugate transpose.
    pub fn hermitized(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            n: self.n,
            matrix: m,
            kind: self.kind,
        }
    }

    pub fn dn_diagnostics(&self) -> DnDiagnostics {
        let fro = self.matrix.norm().max(f64::MIN_POSITIVE);
        let hermitian_defect = (&self.matrix - self.matrix.adjoint()).norm() / fro;
        let c = self.n;
        let constant_defect = self.matrix.column(c).norm().max(self.matrix.row(c).norm());
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let block = mean_zero_block(&herm, self.n);
        let min_rayleigh = block
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        DnDiagnostics {
            hermitian_defect,
            constant_defect,
            min_rayleigh,
        }
    }

    /// Writes the matrix file and a `<path>.meta` key=value sidecar.
    pub fn save(&self, path: &Path, metadata: &[(&str, String)]) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        let mut meta = format!("N={}\nkind={}\n", self.n, self.kind);
        for (k, v) in metadata {
            meta.push_str(&format!("{k}={v}\n"));
        }
        std::fs::write(sidecar_path(path), meta)?;
        Ok(())
    }

    /// Loads a matrix file; the kind is read from the sidecar when present.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let kind = match std::fs::read_to_string(sidecar_path(path)) {
            Ok(meta) => textio::parse_key_values(&meta)?
                .get("kind")
                .and_then(|v| v.first())
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(OperatorKind::Generic),
            Err(_) => OperatorKind::Generic,
        };
        Self::from_text(&text, kind)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("N={}\n", self.n);
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|z| textio::fmt_complex(*z)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, kind: OperatorKind) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n = parse_header(lines.next())?;
        let dim = 2 * n + 1;
        let mut matrix = DMatrix::zeros(dim, dim);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            if i >= dim {
                return Err(Error::Parse(format!("more than {dim} rows")));
            }
            let entries: Vec<&str> = line.split(',').collect();
            if entries.len() != dim {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {dim}",
                    entries.len()
                )));
            }
            for (j, e) in entries.iter().enumerate() {
                matrix[(i, j)] = textio::parse_complex(e)?;
            }
            rows += 1;
        }
        if rows != dim {
            return Err(Error::Parse(format!("expected {dim} rows, got {rows}")));
        }
        Self::new(n, matrix, kind)
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    s.into()
}

fn parse_header(line: Option<&str>) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse("empty input".into()))?;
    line.trim()
        .strip_prefix("N=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected header N=<int>, got {line:?}")))
}

pub(crate) fn check_truncation(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::TruncationMismatch(a, b));
    }
    Ok(())
}

pub(crate) fn require_dn(op: &BoundaryOperator) -> Result<()> {
    if op.kind() != OperatorKind::Dn {
        return Err(Error::WrongKind {
            expected: "dn",
            found: op.kind().to_string(),
        });
    }
    Ok(())
}

/// Mode indices `k != 0`, in storage order.
pub(crate) fn mean_zero_modes(n: usize) -> Vec<i64> {
    let n = n as i64;
    (-n..=n).filter(|&k| k != 0).collect()
}

/// Restriction of a full operator matrix to the mean-zero modes.
pub(crate) fn mean_zero_block(m: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let idx: Vec<usize> = (0..2 * n + 1).filter(|&i| i != n).collect();
    m.select_rows(&idx).select_columns(&idx)
}

/// Embeds a mean-zero block back into the full space, zero on constants.
pub(crate) fn embed_mean_zero(block: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let dim = 2 * n + 1;
    let full_index = |i: usize| if i < n { i } else { i + 1 };
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..2 * n {
        for j in 0..2 * n {
            m[(full_index(i), full_index(j))] = block[(i, j)];
        }
    }
    m
}

/// DN map of the unit disk, `|d/dphi|`.
pub fn dn_disk(n: usize) -> Result<BoundaryOperator> {
    if n == 0 {
        return Err(Error::InvalidInput("truncation must be at least 1".into()));
    }
    let n_i = n as i64;
    let diag = DVector::from_fn(2 * n + 1, |i, _| {
        Complex64::new((i as i64 - n_i).unsigned_abs() as f64, 0.0)
    });
    BoundaryOperator::new(n, DMatrix::from_diagonal(&diag), OperatorKind::Dn)
}

/// `d/dphi`: multiplication of mode `k` by `ik`.
pub fn derivative(n: usize) -> BoundaryOperator {
    let n_i = n as i64;
    let diag = DVector::from_fn(2 * n + 1, |i, _| Complex64::new(0.0, (i as i64 - n_i) as f64));
    BoundaryOperator {
        n,
        matrix: DMatrix::from_diagonal(&diag),
        kind: OperatorKind::Derivative,
    }
}

/// Inverse of the DN map on the mean-zero subspace, zero on constants.
pub(crate) fn dn_pseudo_inverse(dn: &BoundaryOperator) -> Result<DMatrix<Complex64>> {
    require_dn(dn)?;
    let block = mean_zero_block(dn.matrix(), dn.n);
    let sv = block.clone().singular_values();
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= SINGULAR_TOL {
        return Err(Error::SingularDn(smallest));
    }
    let inv = block
        .try_inverse()
        .ok_or(Error::SingularDn(smallest))?;
    Ok(embed_mean_zero(&inv, dn.n))
}

/// Hilbert transform `H = -Lambda^{-1} d/dphi`, with the inverse taken on
/// mean-zero functions.
pub fn hilbert_from_dn(dn: &BoundaryOperator) -> Result<BoundaryOperator> {
    let inv = dn_pseudo_inverse(dn)?;
    let d = derivative(dn.n);
    let h = -(inv * d.matrix());
    BoundaryOperator::new(dn.n, h, OperatorKind::Hilbert)
}

/// `(Lambda f, g)_{L2(T)}` for mean-zero `f`, `g`.
pub fn lambda_inner(
    dn: &BoundaryOperator,
    f: &BoundaryFunction,
    g: &BoundaryFunction,
) -> Result<Complex64> {
    require_dn(dn)?;
    check_truncation(dn.n, f.truncation())?;
    check_truncation(dn.n, g.truncation())?;
    for h in [f, g] {
        if !h.is_mean_zero() {
            return Err(Error::NotMeanZero(h[0].norm()));
        }
    }
    Ok(lambda_pairing(dn, f.coefficients(), g.coefficients()))
}

/// The same pairing without the mean-zero check, on raw coefficient vectors.
pub(crate) fn lambda_pairing(
    dn: &BoundaryOperator,
    f: &DVector<Complex64>,
    g: &DVector<Complex64>,
) -> Complex64 {
    let lf = dn.matrix() * f;
    g.dotc(&lf) * (2.0 * PI)
}

/// H^1 -> L2 operator norm of the difference, with Sobolev weight `sqrt(1+k^2)`.
pub fn operator_distance(a: &BoundaryOperator, b: &BoundaryOperator) -> Result<f64> {
    check_truncation(a.n, b.n)?;
    let n = a.n as i64;
    let mut diff = a.matrix() - b.matrix();
    for (col, mut c) in diff.column_iter_mut().enumerate() {
        let k = col as i64 - n;
        c /= Complex64::new((1.0 + (k * k) as f64).sqrt(), 0.0);
    }
    Ok(diff
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max))
}
