//! Metric geometry: positivity of `η₊`, its square root `ρ`, the physical
//! inner product `⟨⟨φ, ψ⟩⟩ = ⟨φ|η₊ψ⟩ = ⟨ρφ|ρψ⟩`, `η`-adjoints and
//! Gram–Schmidt in that inner product.
//!
//! Diagonal metrics, which is what the grid builders produce, are handled
//! in closed form; everything else goes through a full Hermitian
//! eigendecomposition.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numcore::{check_floor, hermitian_eigen, ComplexMatrix, ComplexVector};

/// Relative floor under which an eigenvalue of `η₊` counts as non-positive.
pub const EIGENVALUE_FLOOR: f64 = 1e-13;

/// Allowed relative anti-Hermitian part of `η₊`.
pub const METRIC_HERMITICITY_TOL: f64 = 1e-10;

/// Relative η-norm under which a Gram–Schmidt remainder counts as zero.
pub const DEPENDENCE_TOL: f64 = 1e-10;

/// A certified positive-definite metric with its square root and inverse root.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOperator {
    eta: ComplexMatrix,
    rho: ComplexMatrix,
    rho_inv: ComplexMatrix,
    /// Present when `η₊` is exactly diagonal; the fast paths key on it.
    diagonal: Option<Vec<f64>>,
    min_eigenvalue: f64,
    condition: f64,
}

pub fn make_metric(eta: &ComplexMatrix) -> Result<MetricOperator> {
    let n = eta.require_square()?;
    let residual = eta.hermiticity_residual()?;
    if residual > METRIC_HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            residual,
            tol: METRIC_HERMITICITY_TOL,
        });
    }

    if let Some(d) = eta.real_diagonal() {
        let max = d.iter().cloned().fold(f64::MIN, f64::max);
        let min = d.iter().cloned().fold(f64::MAX, f64::min);
        require_positive(min, max)?;
        let root: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
        let inv: Vec<f64> = root.iter().map(|v| 1.0 / v).collect();
        return Ok(MetricOperator {
            eta: eta.clone(),
            rho: ComplexMatrix::from_real_diagonal(&root),
            rho_inv: ComplexMatrix::from_real_diagonal(&inv),
            diagonal: Some(d),
            min_eigenvalue: if n == 0 { 1.0 } else { min },
            condition: if n == 0 { 1.0 } else { max / min },
        });
    }

    let eig = hermitian_eigen(eta)?;
    let min = eig.values.first().copied().unwrap_or(1.0);
    let max = eig.values.last().copied().unwrap_or(1.0);
    require_positive(min, max)?;
    check_floor(&eig, EIGENVALUE_FLOOR * max)?;
    Ok(MetricOperator {
        eta: eta.clone(),
        rho: eig.map(|l| Complex64::new(l.sqrt(), 0.0)),
        rho_inv: eig.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)),
        diagonal: None,
        min_eigenvalue: min,
        condition: max / min,
    })
}

fn require_positive(min: f64, max: f64) -> Result<()> {
    if !(max > 0.0) {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: min,
            floor: 0.0,
        });
    }
    let floor = EIGENVALUE_FLOOR * max;
    if !(min > floor) {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: min,
            floor,
        });
    }
    Ok(())
}

impl MetricOperator {
    /// The reference inner product, `η₊ = I`.
    pub fn identity(n: usize) -> Self {
        make_metric(&ComplexMatrix::identity(n)).expect("identity is a metric")
    }

    pub fn dim(&self) -> usize {
        self.eta.rows()
    }

    pub fn eta(&self) -> &ComplexMatrix {
        &self.eta
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn rho_inv(&self) -> &ComplexMatrix {
        &self.rho_inv
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn apply_eta(&self, v: &ComplexVector) -> ComplexVector {
        match &self.diagonal {
            Some(d) => v.scale_entries(d),
            None => self.eta.apply(v),
        }
    }

    pub fn apply_rho(&self, v: &ComplexVector) -> ComplexVector {
        match &self.diagonal {
            Some(_) => {
                let r: Vec<f64> = (0..self.dim()).map(|i| self.rho[(i, i)].re).collect();
                v.scale_entries(&r)
            }
            None => self.rho.apply(v),
        }
    }

    pub fn apply_rho_inv(&self, v: &ComplexVector) -> ComplexVector {
        match &self.diagonal {
            Some(_) => {
                let r: Vec<f64> = (0..self.dim()).map(|i| self.rho_inv[(i, i)].re).collect();
                v.scale_entries(&r)
            }
            None => self.rho_inv.apply(v),
        }
    }

    /// `ρ · A`
    pub fn rho_times(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        match &self.diagonal {
            Some(d) if a.rows() == d.len() => Ok(a.scale_rows(&d.iter().map(|v| v.sqrt()).collect::<Vec<_>>())),
            _ => self.rho.checked_mul(a),
        }
    }

    /// `η₊ · A`
    pub fn eta_times(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        match &self.diagonal {
            Some(d) if a.rows() == d.len() => Ok(a.scale_rows(d)),
            _ => self.eta.checked_mul(a),
        }
    }

    /// `ρ A ρ⁻¹`
    pub fn conjugate(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_square(a, "similarity transform")?;
        match &self.diagonal {
            Some(d) => {
                let r: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
                let ri: Vec<f64> = r.iter().map(|v| 1.0 / v).collect();
                Ok(a.scale_rows(&r).scale_cols(&ri))
            }
            None => self.rho.checked_mul(a)?.checked_mul(&self.rho_inv),
        }
    }

    /// `‖ρρ − η₊‖_F / ‖η₊‖_F`
    pub fn sqrt_residual(&self) -> f64 {
        let sq = &self.rho * &self.rho;
        (&sq - &self.eta).frobenius_norm() / self.eta.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    /// `‖ρρ⁻¹ − I‖_F`
    pub fn inverse_residual(&self) -> f64 {
        (&(&self.rho * &self.rho_inv) - &ComplexMatrix::identity(self.dim())).frobenius_norm()
    }

    /// `⟨⟨v, v⟩⟩^{1/2}`
    pub fn norm(&self, v: &ComplexVector) -> f64 {
        self.apply_eta(v).dot(v).re.max(0.0).sqrt()
    }

    fn check_dim(&self, v: &ComplexVector, context: &'static str) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    fn check_square(&self, a: &ComplexMatrix, context: &'static str) -> Result<()> {
        a.require_square()?;
        if a.rows() != self.dim() {
            return Err(Error::ShapeMismatch {
                context,
                expected: self.dim(),
                found: a.rows(),
            });
        }
        Ok(())
    }
}

/// `‖H†η − ηH‖_F / (‖H‖_F ‖η‖_F)`; zero exactly when `H` is η-pseudo-Hermitian.
pub fn pseudo_hermiticity_residual(h: &ComplexMatrix, m: &MetricOperator) -> Result<f64> {
    m.check_square(h, "pseudo-Hermiticity residual")?;
    let n = m.dim();
    let num = match m.diagonal() {
        Some(d) => {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += (h[(j, i)].conj() * d[j] - d[i] * h[(i, j)]).norm_sqr();
                }
            }
            acc.sqrt()
        }
        None => {
            let lhs = h.adjoint().checked_mul(m.eta())?;
            let rhs = m.eta().checked_mul(h)?;
            (&lhs - &rhs).frobenius_norm()
        }
    };
    let den = h.frobenius_norm() * m.eta().frobenius_norm();
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

fn sqrt_weights(weights: Option<&[f64]>, dim: usize) -> Result<Option<Vec<f64>>> {
    match weights {
        None => Ok(None),
        Some(w) if w.len() != dim => Err(Error::ShapeMismatch {
            context: "quadrature weights",
            expected: dim,
            found: w.len(),
        }),
        Some(w) => {
            if let Some((index, &value)) = w.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
                return Err(Error::NotPositive { index, value });
            }
            Ok(Some(w.iter().map(|v| v.sqrt()).collect()))
        }
    }
}

/// `⟨φ|η₊ψ⟩`, conjugate-linear in `φ`. With quadrature weights `w` the
/// measure is folded in symmetrically: `⟨W^{1/2}φ|η₊W^{1/2}ψ⟩`.
pub fn eta_inner(
    phi: &ComplexVector,
    psi: &ComplexVector,
    m: &MetricOperator,
    weights: Option<&[f64]>,
) -> Result<Complex64> {
    m.check_dim(phi, "inner product (left)")?;
    m.check_dim(psi, "inner product (right)")?;
    Ok(match sqrt_weights(weights, m.dim())? {
        None => phi.dot(&m.apply_eta(psi)),
        Some(s) => phi.scale_entries(&s).dot(&m.apply_eta(&psi.scale_entries(&s))),
    })
}

/// `⟨ρφ|ρψ⟩`, the second route to [`eta_inner`].
pub fn eta_inner_via_rho(
    phi: &ComplexVector,
    psi: &ComplexVector,
    m: &MetricOperator,
    weights: Option<&[f64]>,
) -> Result<Complex64> {
    m.check_dim(phi, "inner product (left)")?;
    m.check_dim(psi, "inner product (right)")?;
    Ok(match sqrt_weights(weights, m.dim())? {
        None => m.apply_rho(phi).dot(&m.apply_rho(psi)),
        Some(s) => m
            .apply_rho(&phi.scale_entries(&s))
            .dot(&m.apply_rho(&psi.scale_entries(&s))),
    })
}

/// `A^♯ = η⁻¹ A† η`
pub fn eta_adjoint(a: &ComplexMatrix, m: &MetricOperator) -> Result<ComplexMatrix> {
    m.check_square(a, "eta adjoint")?;
    match m.diagonal() {
        Some(d) => Ok(ComplexMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(j, i)].conj() * (d[j] / d[i]))),
        None => {
            let eta_inv = m.rho_inv().checked_mul(m.rho_inv())?;
            eta_inv.checked_mul(&a.adjoint())?.checked_mul(m.eta())
        }
    }
}

/// Whether `‖A^♯ − A‖_F ≤ tol·‖A‖_F`, with the relative residual.
pub fn is_eta_self_adjoint(a: &ComplexMatrix, m: &MetricOperator, tol: f64) -> Result<(bool, f64)> {
    let sharp = eta_adjoint(a, m)?;
    let scale = a.frobenius_norm();
    let diff = (&sharp - a).frobenius_norm();
    let residual = if scale == 0.0 { diff } else { diff / scale };
    Ok((residual <= tol, residual))
}

pub fn eta_gram_schmidt(vectors: &[ComplexVector], m: &MetricOperator) -> Result<Vec<ComplexVector>> {
    eta_gram_schmidt_with(vectors, m, DEPENDENCE_TOL)
}

/// Classical Gram–Schmidt in the η-inner product, in input order, with
/// one re-orthogonalization pass.
///
/// A vector whose remainder has η-norm at most `dep_tol` times its own
/// η-norm is reported as [`Error::LinearlyDependent`].
pub fn eta_gram_schmidt_with(
    vectors: &[ComplexVector],
    m: &MetricOperator,
    dep_tol: f64,
) -> Result<Vec<ComplexVector>> {
    let mut out: Vec<ComplexVector> = Vec::with_capacity(vectors.len());
    // η·q for each accepted q, so projections cost one dot product each.
    let mut eta_out: Vec<ComplexVector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        m.check_dim(v, "Gram-Schmidt input")?;
        let original = m.norm(v);
        let mut w = v.clone();
        for _pass in 0..2 {
            let coeffs: Vec<Complex64> = eta_out.iter().map(|eq| eq.dot(&w)).collect();
            for (c, q) in coeffs.iter().zip(&out) {
                w.axpy(-c, q);
            }
        }
        let norm = m.norm(&w);
        if !(norm > dep_tol * original) || norm == 0.0 {
            return Err(Error::LinearlyDependent { index });
        }
        let q = w.scale(Complex64::new(1.0 / norm, 0.0));
        eta_out.push(m.apply_eta(&q));
        out.push(q);
    }
    Ok(out)
}

/// Gram matrix `G_ij = ⟨⟨v_i, v_j⟩⟩`.
pub fn eta_gram(vectors: &[ComplexVector], m: &MetricOperator, weights: Option<&[f64]>) -> Result<ComplexMatrix> {
    let k = vectors.len();
    let mut g = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = eta_inner(&vectors[i], &vectors[j], m, weights)?;
        }
    }
    Ok(g)
}

/// Largest entry of `|G − I|`.
pub fn gram_deviation(gram: &ComplexMatrix) -> f64 {
    (gram - &ComplexMatrix::identity(gram.rows())).max_abs()
}
