//! Exact spectral time evolution in the physical and in the reference
//! representation, and the check that `ρ` intertwines the two.

use num_complex::Complex64;

use crate::construction::PhysicalBasis;
use crate::error::{Error, Result};
use crate::metric::MetricOperator;
use crate::numcore::{hermitian_eigen_with, ComplexMatrix, ComplexVector, EigenTolerances, HermitianEigen};

/// Default bound on the η-projection residual of an initial state.
pub const PROJECTION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// `‖ψ(t)‖_η` in the physical geometry (or `‖φ(t)‖` for Hermitian runs).
    pub eta_norms: Vec<f64>,
    /// `‖ψ(t)‖` in the reference geometry.
    pub ref_norms: Vec<f64>,
    pub states: Option<Vec<ComplexVector>>,
    /// η-projection residual of the initial state.
    pub projection_residual: f64,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max |n(t) − n(0)| / n(0)`
    pub fn max_relative_drift(norms: &[f64]) -> f64 {
        match norms.first() {
            Some(&n0) if n0 > 0.0 => norms.iter().map(|n| (n - n0).abs() / n0).fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// `(max − min) / max` over the sequence.
    pub fn relative_variation(norms: &[f64]) -> f64 {
        let max = norms.iter().cloned().fold(f64::MIN, f64::max);
        let min = norms.iter().cloned().fold(f64::MAX, f64::min);
        if norms.is_empty() || max <= 0.0 {
            0.0
        } else {
            (max - min) / max
        }
    }

    pub fn eta_drift(&self) -> f64 {
        Self::max_relative_drift(&self.eta_norms)
    }

    pub fn ref_variation(&self) -> f64 {
        Self::relative_variation(&self.ref_norms)
    }
}

fn phases(energies: &[f64], a: &[Complex64], t: f64) -> Vec<Complex64> {
    energies
        .iter()
        .zip(a)
        .map(|(&e, &c)| c * Complex64::from_polar(1.0, -e * t))
        .collect()
}

/// Evolve `ψ₀` by `Ĥ`: `ψ(t) = Σ e^{−iE_n t} ⟨⟨ψ_n, ψ₀⟩⟩ ψ_n`.
pub fn propagate_pseudo(
    basis: &PhysicalBasis<'_>,
    psi0: &ComplexVector,
    times: &[f64],
    keep_states: bool,
) -> Result<TrajectoryRecord> {
    propagate_pseudo_with(basis, psi0, times, keep_states, PROJECTION_TOL)
}

pub fn propagate_pseudo_with(
    basis: &PhysicalBasis<'_>,
    psi0: &ComplexVector,
    times: &[f64],
    keep_states: bool,
    projection_tol: f64,
) -> Result<TrajectoryRecord> {
    let residual = basis.projection_residual(psi0)?;
    if !(residual <= projection_tol) {
        return Err(Error::NotInSpan {
            residual,
            tol: projection_tol,
        });
    }
    let a = basis.coefficients(psi0)?;
    let m = basis.metric();
    let mut record = TrajectoryRecord {
        projection_residual: residual,
        states: keep_states.then(Vec::new),
        ..Default::default()
    };
    for &t in times {
        let psi = basis.synthesize(&phases(basis.energies(), &a, t))?;
        record.times.push(t);
        record.eta_norms.push(m.norm(&psi));
        record.ref_norms.push(psi.norm());
        if let Some(s) = record.states.as_mut() {
            s.push(psi);
        }
    }
    Ok(record)
}

/// Spectral propagator for a Hermitian `h`, factored once and reused.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    eig: HermitianEigen,
}

impl HermitianPropagator {
    /// `h` must be Hermitian within `hermiticity_tol` (relative); it is
    /// symmetrized before factoring.
    pub fn new(h: &ComplexMatrix, hermiticity_tol: f64) -> Result<Self> {
        let tol = EigenTolerances {
            hermiticity: hermiticity_tol,
            ..Default::default()
        };
        Ok(Self {
            eig: hermitian_eigen_with(h, &tol)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    /// `e^{−iht} φ`
    pub fn apply(&self, phi: &ComplexVector, t: f64) -> Result<ComplexVector> {
        if phi.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                context: "propagated state",
                expected: self.dim(),
                found: phi.dim(),
            });
        }
        let v = &self.eig.vectors;
        let coeffs = v.adjoint().apply(phi);
        let rotated = phases(&self.eig.values, &coeffs, t);
        Ok(v.apply(&rotated.into()))
    }
}

/// Evolve `φ₀` by `e^{−iht}`.
pub fn propagate_hermitian(
    h: &ComplexMatrix,
    phi0: &ComplexVector,
    times: &[f64],
    keep_states: bool,
) -> Result<TrajectoryRecord> {
    propagate_hermitian_with(h, phi0, times, keep_states, EigenTolerances::default().hermiticity)
}

pub fn propagate_hermitian_with(
    h: &ComplexMatrix,
    phi0: &ComplexVector,
    times: &[f64],
    keep_states: bool,
    hermiticity_tol: f64,
) -> Result<TrajectoryRecord> {
    let prop = HermitianPropagator::new(h, hermiticity_tol)?;
    let mut record = TrajectoryRecord {
        states: keep_states.then(Vec::new),
        ..Default::default()
    };
    for &t in times {
        let phi = prop.apply(phi0, t)?;
        let n = phi.norm();
        record.times.push(t);
        record.eta_norms.push(n);
        record.ref_norms.push(n);
        if let Some(s) = record.states.as_mut() {
            s.push(phi);
        }
    }
    Ok(record)
}

/// `max_t ‖ρψ(t) − e^{−iht}ρψ₀‖ / ‖ρψ₀‖`, with `ψ(t)` from the physical
/// basis and the right-hand side from the spectral propagator of `h`.
pub fn equivalence_check(
    basis: &PhysicalBasis<'_>,
    m: &MetricOperator,
    h: &ComplexMatrix,
    psi0: &ComplexVector,
    times: &[f64],
) -> Result<f64> {
    equivalence_check_with(basis, m, h, psi0, times, EigenTolerances::default().hermiticity)
}

pub fn equivalence_check_with(
    basis: &PhysicalBasis<'_>,
    m: &MetricOperator,
    h: &ComplexMatrix,
    psi0: &ComplexVector,
    times: &[f64],
    hermiticity_tol: f64,
) -> Result<f64> {
    let devs = equivalence_deviations(basis, m, h, psi0, times, hermiticity_tol)?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// `‖ρψ(t) − e^{−iht}ρψ₀‖ / ‖ρψ₀‖` at each time.
pub fn equivalence_deviations(
    basis: &PhysicalBasis<'_>,
    m: &MetricOperator,
    h: &ComplexMatrix,
    psi0: &ComplexVector,
    times: &[f64],
    hermiticity_tol: f64,
) -> Result<Vec<f64>> {
    if m.dim() != basis.ambient_dim() || h.rows() != m.dim() {
        return Err(Error::ShapeMismatch {
            context: "equivalence check",
            expected: basis.ambient_dim(),
            found: if m.dim() != basis.ambient_dim() { m.dim() } else { h.rows() },
        });
    }
    let prop = HermitianPropagator::new(h, hermiticity_tol)?;
    let a = basis.coefficients(psi0)?;
    let phi0 = m.apply_rho(psi0);
    let scale = phi0.norm();
    times
        .iter()
        .map(|&t| {
            let physical = m.apply_rho(&basis.synthesize(&phases(basis.energies(), &a, t))?);
            let reference = prop.apply(&phi0, t)?;
            let dev = (&physical - &reference).norm();
            Ok(if scale > 0.0 { dev / scale } else { dev })
        })
        .collect()
}

/// `steps` equally spaced times from `0` to `t_max` inclusive; a single
/// step gives only `t_max`, which is `0` for a static run.
pub fn time_grid(t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![t_max],
        _ => (0..steps).map(|k| t_max * k as f64 / (steps - 1) as f64).collect(),
    }
}
