//! Auxiliary period matrix, Siegel b-period matrix and its symmetric form.
//!
//! Matrices indexed by cycles use `0 = a`, `1 = b`, so `bcal[(0, 1)]` is
//! `B_ab = int_{a+} *upsilon_b`.

use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::circle::{dn_pseudo_inverse, lambda_inner, BoundaryFunction, BoundaryOperator};
use crate::error::{Error, Result};
use crate::spectral::SpectralData;
use crate::surface::forms::{period_integral, HarmonicBasis};
use crate::surface::{Cycle, SurfaceModel};
use crate::textio::{fmt_complex, fmt_f64, parse_complex, parse_f64, parse_key_values};

/// Largest relative residual accepted by [`extract_c`].
pub const C_RESIDUAL_LIMIT: f64 = 0.05;
/// Default threshold on the normalization defect in strict mode.
pub const NORMALIZATION_LIMIT: f64 = 0.05;
/// Tolerance for `delta > |beta|` in [`assemble_siegel`].
pub const SIEGEL_TOL: f64 = 1e-12;

/// Coefficient `c` of a normal trace `upsilon(nu) = -(1-mu^2) Lambda (c eta + conj(c eta))`.
/// `residual` is the relative distance of the trace from
/// `span{Lambda eta, Lambda conj(eta)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCoefficient {
    pub c: Complex64,
    pub residual: f64,
}

pub fn extract_c(
    dn: &BoundaryOperator,
    spectral: &SpectralData,
    trace: &BoundaryFunction,
) -> Result<TraceCoefficient> {
    let mu = spectral.mu()?;
    let eta = spectral.eta()?;
    if !trace.is_mean_zero() {
        return Err(Error::NotMeanZero(trace[0].norm()));
    }
    let n = dn.truncation();
    let inv = dn_pseudo_inverse(dn)?;
    let scale = Complex64::new(-1.0 / (1.0 - mu * mu), 0.0);
    let f = BoundaryFunction::from_coefficients(n, inv * trace.coefficients() * scale)?;
    // eta and conj(eta) are Lambda-orthonormal, so both coefficients are projections
    let c = lambda_inner(dn, &f, eta)?;
    let c_bar = lambda_inner(dn, &f, &eta.conj())?;
    let model = eta.scale(c).add(&eta.conj().scale(c_bar))?;
    let predicted = dn.apply(&model)?.scale(Complex64::new(-(1.0 - mu * mu), 0.0));
    let norm = trace.l2_norm();
    let residual = if norm > 0.0 {
        predicted.add(&trace.scale(Complex64::new(-1.0, 0.0)))?.l2_norm() / norm
    } else {
        0.0
    };
    if residual > C_RESIDUAL_LIMIT {
        return Err(Error::LargeResidual(residual));
    }
    Ok(TraceCoefficient { c, residual })
}

/// `B` from the boundary coefficients, and the normalization defect
/// `|2 mu (mu^2 - 1) Im(c_a conj c_b) - 1|`. With `strict = Some(limit)` a
/// defect above `limit` is an error.
pub fn bcal_from_boundary(
    mu: f64,
    c_a: Complex64,
    c_b: Complex64,
    strict: Option<f64>,
) -> Result<(Matrix2<f64>, f64)> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidInput(format!("mu must lie in (0,1), got {mu}")));
    }
    let k = 2.0 * (1.0 - mu * mu);
    let cross = c_a * c_b.conj();
    let bb = k * cross.re;
    let bcal = Matrix2::new(-bb, -k * c_b.norm_sqr(), k * c_a.norm_sqr(), bb);
    let defect = (2.0 * mu * (mu * mu - 1.0) * cross.im - 1.0).abs();
    if let Some(limit) = strict {
        if defect > limit {
            return Err(Error::NormalizationViolated(defect));
        }
    }
    Ok((bcal, defect))
}

/// `B_qe = int_{q+} *upsilon_e` by line integrals.
pub fn bcal_from_interior(model: &SurfaceModel, basis: &HarmonicBasis) -> Matrix2<f64> {
    let mut m = Matrix2::zeros();
    for (q, cq) in [Cycle::A, Cycle::B].into_iter().enumerate() {
        for (e, ce) in [Cycle::A, Cycle::B].into_iter().enumerate() {
            m[(q, e)] = period_integral(model, basis.form(ce), cq, true);
        }
    }
    m
}

/// Coefficients of the dual Abelian differentials,
/// `e_a = 1/(2i)`, `e_b = (i B_aa - 1) / (2 B_ab)`.
pub fn dual_abelian_coeffs(bcal: &Matrix2<f64>) -> Result<(Complex64, Complex64)> {
    let b_ab = bcal[(0, 1)];
    if b_ab == 0.0 {
        return Err(Error::DivisionByZero("B_ab"));
    }
    let e_a = Complex64::new(0.0, -0.5);
    let e_b = Complex64::new(-1.0, bcal[(0, 0)]) / (2.0 * b_ab);
    Ok((e_a, e_b))
}

/// Symmetric form `[[gamma + i delta, i beta], [i beta, -gamma + i delta]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Siegel {
    pub gamma: f64,
    pub delta: f64,
    pub beta: f64,
}

impl Siegel {
    pub fn new(gamma: f64, delta: f64, beta: f64) -> Self {
        Self { gamma, delta, beta }
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let off = Complex64::new(0.0, self.beta);
        Matrix2::new(
            Complex64::new(self.gamma, self.delta),
            off,
            off,
            Complex64::new(-self.gamma, self.delta),
        )
    }

    pub fn imaginary_part(&self) -> Matrix2<f64> {
        self.matrix().map(|z| z.im)
    }

    pub fn min_imaginary_eigenvalue(&self) -> f64 {
        self.delta - self.beta.abs()
    }
}

pub fn assemble_siegel(mu: f64, bcal: &Matrix2<f64>) -> Result<Siegel> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidInput(format!("mu must lie in (0,1), got {mu}")));
    }
    let (b_ab, b_bb) = (bcal[(0, 1)], bcal[(1, 1)]);
    if b_ab == 0.0 {
        return Err(Error::DivisionByZero("B_ab"));
    }
    let m2 = mu * mu;
    let s = Siegel {
        gamma: b_bb / (m2 * b_ab),
        delta: -(m2 + 1.0) / (2.0 * m2 * b_ab),
        beta: -(m2 - 1.0) / (2.0 * m2 * b_ab),
    };
    check_siegel(&s.matrix())?;
    Ok(s)
}

/// Symmetric with positive-definite imaginary part.
pub fn check_siegel(m: &Matrix2<Complex64>) -> Result<()> {
    if (m[(0, 1)] - m[(1, 0)]).norm() > SIEGEL_TOL * m.norm() {
        return Err(Error::NotSiegel("matrix is not symmetric".into()));
    }
    let im = m.map(|z| z.im);
    let lam = SymmetricEigen::new(im).eigenvalues.min();
    if !(lam > SIEGEL_TOL * im.norm().max(1.0)) {
        return Err(Error::NotSiegel(format!(
            "imaginary part has eigenvalue {lam:e}"
        )));
    }
    Ok(())
}

/// Slack of each inequality of the fundamental-domain description; an
/// inequality holds iff its slack is nonnegative (strictly positive for
/// `strict`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainReport {
    /// `gamma >= 0`
    pub gamma_low: f64,
    /// `gamma <= 1/2`
    pub gamma_high: f64,
    /// `delta^2 - (1 - gamma^2 + beta^2) >= 0`
    pub main: f64,
    /// `delta^2 - beta^2 > 0`
    pub strict: f64,
}

impl DomainReport {
    pub fn inside(&self) -> bool {
        self.gamma_low >= 0.0 && self.gamma_high >= 0.0 && self.main >= 0.0 && self.strict > 0.0
    }
}

pub fn in_fundamental_domain(s: &Siegel) -> DomainReport {
    let (g, d, b) = (s.gamma, s.delta, s.beta);
    DomainReport {
        gamma_low: g,
        gamma_high: 0.5 - g,
        main: d * d - (1.0 - g * g + b * b),
        strict: d * d - b * b,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// `gamma -> gamma + n`
    Shift(i64),
    NegateGamma,
    NegateBeta,
}

impl Move {
    pub fn apply(&self, s: Siegel) -> Siegel {
        match *self {
            Move::Shift(n) => Siegel { gamma: s.gamma + n as f64, ..s },
            Move::NegateGamma => Siegel { gamma: -s.gamma, ..s },
            Move::NegateBeta => Siegel { beta: -s.beta, ..s },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub siegel: Siegel,
    pub moves: Vec<Move>,
    pub report: DomainReport,
    pub reduction_incomplete: bool,
}

/// Brings `gamma` into `[0, 1/2]` and `beta` to `beta >= 0` with the
/// elementary moves; `delta` is never changed.
pub fn normalize_symmetric(s: &Siegel) -> Normalized {
    let mut moves = Vec::new();
    if !(0.0..=0.5).contains(&s.gamma) {
        let n = -s.gamma.round() as i64;
        if n != 0 {
            moves.push(Move::Shift(n));
        }
        if s.gamma + (n as f64) < 0.0 {
            moves.push(Move::NegateGamma);
        }
    }
    if s.beta < 0.0 {
        moves.push(Move::NegateBeta);
    }
    let siegel = moves.iter().fold(*s, |acc, m| m.apply(acc));
    let report = in_fundamental_domain(&siegel);
    Normalized {
        siegel,
        moves,
        report,
        reduction_incomplete: !report.inside(),
    }
}

/// Everything the period stage produces for one surface.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodData {
    pub mu: f64,
    pub c_a: Complex64,
    pub c_b: Complex64,
    pub bcal: Matrix2<f64>,
    pub siegel: Siegel,
    pub e_a: Complex64,
    pub e_b: Complex64,
}

impl PeriodData {
    pub fn from_boundary(mu: f64, c_a: Complex64, c_b: Complex64, strict: Option<f64>) -> Result<Self> {
        let (bcal, _) = bcal_from_boundary(mu, c_a, c_b, strict)?;
        let siegel = assemble_siegel(mu, &bcal)?;
        let (e_a, e_b) = dual_abelian_coeffs(&bcal)?;
        Ok(Self { mu, c_a, c_b, bcal, siegel, e_a, e_b })
    }

    pub fn siegel_matrix(&self) -> Matrix2<Complex64> {
        self.siegel.matrix()
    }

    pub fn to_key_values(&self) -> String {
        let b = &self.bcal;
        let s = &self.siegel;
        let rows = [
            ("mu", fmt_f64(self.mu)),
            ("c_a", fmt_complex(self.c_a)),
            ("c_b", fmt_complex(self.c_b)),
            ("Bcal_aa", fmt_f64(b[(0, 0)])),
            ("Bcal_ab", fmt_f64(b[(0, 1)])),
            ("Bcal_ba", fmt_f64(b[(1, 0)])),
            ("Bcal_bb", fmt_f64(b[(1, 1)])),
            ("gamma", fmt_f64(s.gamma)),
            ("delta", fmt_f64(s.delta)),
            ("beta", fmt_f64(s.beta)),
            ("e_a", fmt_complex(self.e_a)),
            ("e_b", fmt_complex(self.e_b)),
        ];
        rows.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn from_key_values(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        let get = |k: &str| -> Result<&str> {
            map.get(k)
                .and_then(|v| v.last())
                .map(String::as_str)
                .ok_or_else(|| Error::Parse(format!("missing key {k}")))
        };
        let real = |k: &str| get(k).and_then(parse_f64);
        let cplx = |k: &str| get(k).and_then(parse_complex);
        Ok(Self {
            mu: real("mu")?,
            c_a: cplx("c_a")?,
            c_b: cplx("c_b")?,
            bcal: Matrix2::new(
                real("Bcal_aa")?,
                real("Bcal_ab")?,
                real("Bcal_ba")?,
                real("Bcal_bb")?,
            ),
            siegel: Siegel::new(real("gamma")?, real("delta")?, real("beta")?),
            e_a: cplx("e_a")?,
            e_b: cplx("e_b")?,
        })
    }
}

/// Two lines of two comma-separated complex entries.
pub fn matrix_to_text(m: &Matrix2<Complex64>) -> String {
    (0..2)
        .map(|r| format!("{},{}\n", fmt_complex(m[(r, 0)]), fmt_complex(m[(r, 1)])))
        .collect()
}

pub fn matrix_from_text(text: &str) -> Result<Matrix2<Complex64>> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(parse_complex).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(Error::Parse("expected a 2x2 complex matrix".into()));
    }
    Ok(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{extract_mu, make_synthetic_dn, DEFAULT_BAND};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn boundary_formula_example() {
        let (b, defect) = bcal_from_boundary(
            0.8,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0 / 0.576),
            Some(NORMALIZATION_LIMIT),
        )
        .unwrap();
        assert!(defect < 1e-12);
        assert_relative_eq!(b[(0, 0)], 0.0);
        assert_relative_eq!(b[(1, 1)], 0.0);
        assert_relative_eq!(b[(0, 1)], -2.17014, epsilon = 1e-5);
        assert_relative_eq!(b[(1, 0)], 0.72, epsilon = 1e-12);
        assert_relative_eq!(b.determinant(), 1.5625, epsilon = 1e-12);
    }

    #[test]
    fn normalization_violation() {
        let one = Complex64::new(1.0, 0.0);
        let err = bcal_from_boundary(0.8, one, one, Some(NORMALIZATION_LIMIT)).unwrap_err();
        assert!(matches!(err, Error::NormalizationViolated(d) if (d - 1.0).abs() < 1e-15));
        let (_, d) = bcal_from_boundary(0.8, one, one, None).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn extract_c_examples() {
        let dn = make_synthetic_dn(0.6, 8).unwrap();
        let sp = extract_mu(&dn, DEFAULT_BAND).unwrap();
        let eta = sp.eta.clone().unwrap();
        let k = Complex64::new(-(1.0 - 0.36), 0.0);
        let trace = dn.apply(&eta).unwrap().scale(k);
        let c = extract_c(&dn, &sp, &trace).unwrap();
        assert!((c.c - 1.0).norm() < 1e-10 && c.residual < 1e-10);
        let i = Complex64::i();
        let f = eta.scale(i).add(&eta.conj().scale(-i)).unwrap();
        let trace = dn.apply(&f).unwrap().scale(k);
        let c = extract_c(&dn, &sp, &trace).unwrap();
        assert!((c.c - i).norm() < 1e-10);
    }

    #[test]
    fn extract_c_rejects_traces_outside_range() {
        let dn = make_synthetic_dn(0.6, 8).unwrap();
        let sp = extract_mu(&dn, DEFAULT_BAND).unwrap();
        let trace = BoundaryFunction::mode(8, 3);
        assert!(matches!(extract_c(&dn, &sp, &trace), Err(Error::LargeResidual(_))));
    }

    #[test]
    fn dual_coefficients() {
        let (ea, eb) = dual_abelian_coeffs(&Matrix2::new(0.0, -2.17014, 0.72, 0.0)).unwrap();
        assert_eq!(ea, Complex64::new(0.0, -0.5));
        assert_relative_eq!(eb.re, 0.230400, epsilon = 1e-6);
        let (_, eb) = dual_abelian_coeffs(&Matrix2::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(eb, Complex64::new(-0.5, 0.5));
        assert!(matches!(
            dual_abelian_coeffs(&Matrix2::new(1.0, 0.0, 1.0, 0.0)),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn siegel_example() {
        let s = assemble_siegel(0.8, &Matrix2::new(-0.5, -1.0, 1.0, 0.5)).unwrap();
        assert_relative_eq!(s.gamma, -0.78125, epsilon = 1e-15);
        assert_relative_eq!(s.delta, 1.28125, epsilon = 1e-15);
        assert_relative_eq!(s.beta, -0.28125, epsilon = 1e-15);
        let m = s.matrix();
        assert_eq!(m[(0, 1)], m[(1, 0)]);
        assert_relative_eq!(s.delta.powi(2) - s.beta.powi(2), 1.5625, epsilon = 1e-12);
    }

    #[test]
    fn siegel_rejects_positive_bab() {
        assert!(matches!(
            assemble_siegel(0.8, &Matrix2::new(0.0, 1.0, 1.0, 0.0)),
            Err(Error::NotSiegel(_))
        ));
    }

    #[test]
    fn siegel_tends_to_diagonal() {
        let b = Matrix2::new(0.1, -1.0, 1.0, -0.1);
        let betas: Vec<f64> = [0.9, 0.99, 0.999]
            .iter()
            .map(|&mu| assemble_siegel(mu, &b).unwrap().beta.abs())
            .collect();
        assert!(betas[0] > betas[1] && betas[1] > betas[2] && betas[2] < 1e-2);
    }

    #[test]
    fn domain_examples() {
        assert!(in_fundamental_domain(&Siegel::new(0.25, 1.5, 0.5)).inside());
        assert!(!in_fundamental_domain(&Siegel::new(0.6, 2.0, 0.0)).inside());
        assert!(!in_fundamental_domain(&Siegel::new(0.0, 0.8, 0.0)).inside());
    }

    #[test]
    fn normalize_examples() {
        let n = normalize_symmetric(&Siegel::new(-0.78125, 1.28125, -0.28125));
        assert_eq!(n.siegel, Siegel::new(0.21875, 1.28125, 0.28125));
        assert_eq!(n.moves, vec![Move::Shift(1), Move::NegateBeta]);
        assert!(!n.reduction_incomplete);

        let n = normalize_symmetric(&Siegel::new(0.5, 2.0, 0.0));
        assert!(n.moves.is_empty() && n.report.inside());

        let n = normalize_symmetric(&Siegel::new(0.3, 0.6, 0.5));
        assert!(n.moves.is_empty() && n.reduction_incomplete);
    }

    #[test]
    fn key_value_round_trip() {
        let p = PeriodData::from_boundary(
            0.8,
            Complex64::new(1.0, 0.1),
            Complex64::new(0.2, 1.7),
            None,
        )
        .unwrap();
        let back = PeriodData::from_key_values(&p.to_key_values()).unwrap();
        assert_eq!(p, back);
        let m = matrix_from_text(&matrix_to_text(&p.siegel_matrix())).unwrap();
        assert_eq!(m, p.siegel_matrix());
    }

    proptest! {
        #[test]
        fn common_phase_leaves_bcal_unchanged(theta in 0.0..6.28f64, ar in -2.0..2.0f64, ai in -2.0..2.0f64,
                                               br in -2.0..2.0f64, bi in -2.0..2.0f64) {
            let (ca, cb) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let rot = Complex64::from_polar(1.0, theta);
            let (b1, _) = bcal_from_boundary(0.7, ca, cb, None).unwrap();
            let (b2, _) = bcal_from_boundary(0.7, ca * rot, cb * rot, None).unwrap();
            prop_assert!((b1 - b2).norm() <= 1e-12 * (1.0 + b1.norm()));
        }

        #[test]
        fn siegel_identity_is_exact(mu in 0.05..0.999f64, bab in -5.0..-0.05f64, bbb in -3.0..3.0f64) {
            let s = assemble_siegel(mu, &Matrix2::new(-bbb, bab, 1.0, bbb)).unwrap();
            let lhs = s.delta * s.delta - s.beta * s.beta;
            let rhs = 1.0 / (mu * mu * bab * bab);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn normalization_lands_in_gamma_range(g in -50.0..50.0f64, d in 0.1..5.0f64, b in -0.09..0.09f64) {
            let n = normalize_symmetric(&Siegel::new(g, d, b));
            prop_assert!((0.0..=0.5).contains(&n.siegel.gamma));
            prop_assert!(n.siegel.beta >= 0.0);
            prop_assert_eq!(n.siegel.delta, d);
            let again = normalize_symmetric(&n.siegel);
            prop_assert!(again.moves.is_empty());
            prop_assert_eq!(again.siegel, n.siegel);
            let replay = n.moves.iter().fold(Siegel::new(g, d, b), |acc, m| m.apply(acc));
            prop_assert_eq!(replay, n.siegel);
        }
    }
}
