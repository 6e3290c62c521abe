//! Discrete spectrum of the Hilbert transform of a DN operator.
//!
//! `iH x = lambda x` is solved as the generalized Hermitian problem
//! `(-i d/dphi) x = lambda Lambda x` on mean-zero modes. For a genus-1 surface
//! the spectrum is `{0}`, the two clusters at `+-1` (truncated infinite
//! multiplicity) and one discrete pair `+-mu`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circle::{
    self, lambda_pairing, mean_zero_block, BoundaryFunction, BoundaryOperator,
    OperatorKind,
};
use crate::error::{Error, Result};
use crate::textio;

pub const DEFAULT_BAND: (f64, f64) = (0.01, 0.999);

/// Discrete eigenvalue `mu` and the `Lambda`-normalized eigenfunction `eta`
/// with `iH eta = mu eta` (so `H eta = -i mu eta` and `iH conj(eta) = -mu conj(eta)`).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub mu: Option<f64>,
    pub eta: Option<BoundaryFunction>,
    /// All eigenvalues of `iH` on mean-zero modes, ascending.
    pub eigenvalues: Vec<f64>,
    /// Distance from `mu` to the `+1` cluster and from `-mu` to the `-1` cluster.
    pub cluster_gaps: Option<(f64, f64)>,
}

impl SpectralData {
    pub fn mu(&self) -> Result<f64> {
        self.mu
            .ok_or_else(|| Error::InvalidInput("no discrete eigenvalue in band".into()))
    }

    pub fn eta(&self) -> Result<&BoundaryFunction> {
        self.eta
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no discrete eigenfunction in band".into()))
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        match self.mu {
            Some(mu) => out.push_str(&format!("mu={}\n", textio::fmt_f64(mu))),
            None => out.push_str("mu=absent\n"),
        }
        if let Some((p, m)) = self.cluster_gaps {
            out.push_str(&format!("gap_plus={}\n", textio::fmt_f64(p)));
            out.push_str(&format!("gap_minus={}\n", textio::fmt_f64(m)));
        }
        let eig: Vec<String> = self.eigenvalues.iter().map(|x| textio::fmt_f64(*x)).collect();
        out.push_str(&format!("eigenvalues={}\n", eig.join(",")));
        out
    }

    /// Inverse of [`to_key_values`](Self::to_key_values) plus the `eta`
    /// coefficient file.
    pub fn from_key_values(text: &str, eta: Option<&str>) -> Result<Self> {
        let kv = textio::parse_key_values(text)?;
        let get = |k: &str| kv.get(k).and_then(|v| v.first()).map(String::as_str);
        let mu = match get("mu") {
            None | Some("absent") => None,
            Some(s) => Some(textio::parse_f64(s)?),
        };
        let cluster_gaps = match (get("gap_plus"), get("gap_minus")) {
            (Some(p), Some(m)) => Some((textio::parse_f64(p)?, textio::parse_f64(m)?)),
            _ => None,
        };
        let eigenvalues = match get("eigenvalues") {
            Some("") | None => Vec::new(),
            Some(s) => s.split(',').map(textio::parse_f64).collect::<Result<_>>()?,
        };
        let eta = eta.map(BoundaryFunction::from_text).transpose()?;
        Ok(Self {
            mu,
            eta,
            eigenvalues,
            cluster_gaps,
        })
    }
}

/// Eigen-decomposition of `(-i d/dphi) x = lambda Lambda x` on mean-zero modes.
/// Eigenvectors are returned `Lambda`-orthonormal in the matrix sense
/// (`x^* Lambda x = 1`), as columns over the mean-zero modes.
pub(crate) fn generalized_eigen(dn: &BoundaryOperator) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    circle::require_dn(dn)?;
    let n = dn.truncation();
    let herm = dn.hermitized();
    let lam = mean_zero_block(herm.matrix(), n);
    let smallest = lam.clone().singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    if smallest <= 1e-12 {
        return Err(Error::SingularDn(smallest));
    }
    let chol = lam.cholesky().ok_or(Error::SingularDn(smallest))?;
    let l = chol.l();
    let modes = circle::mean_zero_modes(n);
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        modes.len(),
        modes.iter().map(|&k| Complex64::new(k as f64, 0.0)),
    ));
    // C = L^{-1} D L^{-*}
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::SingularDn(smallest))?;
    let c = &l_inv * d * l_inv.adjoint();
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = l_inv.adjoint() * eig.eigenvectors.select_columns(&order);
    Ok((values, vectors))
}

/// Ratio between a separating gap and the median gap inside the cluster.
const CLUSTER_GAP_RATIO: f64 = 4.0;

/// Lowest member of the cluster at 1, for values sorted descending. The
/// cluster grows from the top while each gap stays within
/// `CLUSTER_GAP_RATIO` times the median gap seen so far; the first gap is
/// accepted if it is at most `1 - hi`. Discretization spreads the truncated
/// eigenvalue 1 into such a run, with gaps growing slowly away from 1.
fn cluster_edge(desc: impl Iterator<Item = f64>, hi: f64) -> f64 {
    let values: Vec<f64> = desc.collect();
    let Some(&top) = values.first() else {
        return 1.0;
    };
    if top < hi - (1.0 - hi) {
        return 1.0;
    }
    let seed = 1.0 - hi;
    let mut gaps = Vec::new();
    let mut floor = top;
    for w in values.windows(2) {
        let gap = w[0] - w[1];
        let limit = if gaps.is_empty() {
            seed
        } else {
            (CLUSTER_GAP_RATIO * median(gaps.clone())).max(1e-9)
        };
        if gap > limit {
            break;
        }
        gaps.push(gap);
        floor = w[1];
    }
    floor
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Finds the unique discrete eigenvalue `mu` of `iH` in `band`.
pub fn extract_mu(dn: &BoundaryOperator, band: (f64, f64)) -> Result<SpectralData> {
    let n = dn.truncation();
    let (values, vectors) = generalized_eigen(dn)?;
    let (lo, hi) = band;

    let cluster_floor = cluster_edge(values.iter().rev().copied().filter(|&v| v > 0.0), hi);
    let candidates: Vec<(usize, f64)> = values
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, v)| v > lo && v < hi && v < cluster_floor)
        .collect();
    if candidates.len() > 1 {
        return Err(Error::MultipleCandidates {
            count: candidates.len(),
            values: candidates.iter().map(|c| c.1).collect(),
        });
    }
    let Some(&(plus_idx, mu)) = candidates.first() else {
        return Ok(SpectralData {
            mu: None,
            eta: None,
            eigenvalues: values,
            cluster_gaps: None,
        });
    };

    let eta = embed_vector(&vectors.column(plus_idx).into_owned(), n);
    let mut eta = BoundaryFunction::from_coefficients(n, eta)?;
    let norm2 = lambda_pairing(dn, eta.coefficients(), eta.coefficients()).re;
    eta = eta.scale(Complex64::new(1.0 / norm2.sqrt(), 0.0));
    eta = fix_phase(&eta);

    let neg_cluster_ceiling = -cluster_edge(values.iter().map(|v| -v).filter(|&v| v > 0.0), hi);
    let minus_mu = values
        .iter()
        .copied()
        .min_by(|a, b| (a + mu).abs().total_cmp(&(b + mu).abs()))
        .unwrap_or(-mu);
    Ok(SpectralData {
        mu: Some(mu),
        eta: Some(eta),
        eigenvalues: values,
        cluster_gaps: Some((cluster_floor - mu, minus_mu - neg_cluster_ceiling)),
    })
}

fn embed_vector(v: &DVector<Complex64>, n: usize) -> DVector<Complex64> {
    let mut out = DVector::zeros(2 * n + 1);
    for (i, z) in v.iter().enumerate() {
        out[if i < n { i } else { i + 1 }] = *z;
    }
    out
}

/// Rotates so that the largest-modulus coefficient is real positive.
fn fix_phase(f: &BoundaryFunction) -> BoundaryFunction {
    let (_, lead) = f
        .modes()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty");
    if lead.norm() == 0.0 {
        return f.clone();
    }
    f.scale(lead.conj() / lead.norm())
}

/// Generalized-eigenproblem residual `||(-i d/dphi) eta + mu Lambda eta|| / ||Lambda eta||`.
pub fn eigen_residual(dn: &BoundaryOperator, data: &SpectralData) -> Result<f64> {
    let mu = data.mu()?;
    let eta = data.eta()?;
    let lam_eta = dn.apply(eta)?;
    let n = dn.truncation() as i64;
    let mut r = lam_eta.scale(Complex64::new(-mu, 0.0));
    for k in -n..=n {
        r[k] += eta[k] * k as f64;
    }
    Ok(r.coefficients().norm() / lam_eta.coefficients().norm())
}

/// Block parameters `(a, b)` of the synthetic DN on modes `+-1`.
pub fn synthetic_block(mu: f64) -> (f64, f64) {
    let target = 1.0 / (mu * mu);
    if target < 4.0 {
        (2.0, (4.0 - target).sqrt())
    } else {
        ((target + 1.0).sqrt(), 1.0)
    }
}

/// Disk DN map with the `{+1, -1}` block replaced by `[[a, b], [b, a]]`,
/// `a^2 - b^2 = 1/mu^2`, so that `iH` has eigenvalues `+-mu` on that block.
pub fn make_synthetic_dn(mu: f64, n: usize) -> Result<BoundaryOperator> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidInput(format!("mu must lie in (0,1), got {mu}")));
    }
    let dn = circle::dn_disk(n)?;
    let mut m = dn.matrix().clone();
    let (a, b) = synthetic_block(mu);
    let (minus, plus) = (n - 1, n + 1);
    m[(minus, minus)] = Complex64::new(a, 0.0);
    m[(plus, plus)] = Complex64::new(a, 0.0);
    m[(minus, plus)] = Complex64::new(b, 0.0);
    m[(plus, minus)] = Complex64::new(b, 0.0);
    BoundaryOperator::new(n, m, OperatorKind::Dn)
}

/// Sum of the singular values of `H^2 + I` on mean-zero modes beyond the
/// largest two, relative to the largest.
pub fn smoothing_defect(dn: &BoundaryOperator) -> Result<f64> {
    let h = circle::hilbert_from_dn(dn)?;
    let n = dn.truncation();
    let h2 = mean_zero_block(h.matrix(), n);
    let h2 = &h2 * &h2 + DMatrix::<Complex64>::identity(2 * n, 2 * n);
    let mut sv: Vec<f64> = h2.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    if sv[0] == 0.0 {
        return Ok(0.0);
    }
    Ok(sv.iter().skip(2).sum::<f64>() / sv[0])
}
