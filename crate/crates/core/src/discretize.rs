//! Matrix representations of `x`, `p`, `V`, `H` and `η₊` on a uniform grid
//! with Dirichlet walls, plus the algebraic constructions `H = ρ⁻¹hρ`,
//! `η = ρ²` that are pseudo-Hermitian to machine precision.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numcore::{condition_number_diag, ComplexMatrix};

/// Default cap on the condition number of a discretized metric.
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Smallest grid the run configuration accepts.
pub const MIN_CONFIG_POINTS: usize = 8;

/// Finite-difference scheme for `d/dx` and `d²/dx²`.
///
/// Both derivatives use the same order so that the kinetic part and the
/// drift part of `H` carry errors of the same size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// 3-point central differences, O(Δ²).
    Second,
    /// 5-point central differences, O(Δ⁴).
    #[default]
    Fourth,
}

impl Stencil {
    /// Offsets and weights (in units of `1/Δ`) of the antisymmetric first derivative.
    fn first_derivative(self) -> &'static [(usize, f64)] {
        match self {
            Stencil::Second => &[(1, 0.5)],
            Stencil::Fourth => &[(1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    /// Diagonal and off-diagonal weights (in units of `1/Δ²`) of `−d²/dx²`.
    fn negative_laplacian(self) -> (f64, &'static [(usize, f64)]) {
        match self {
            Stencil::Second => (2.0, &[(1, -1.0)]),
            Stencil::Fourth => (30.0 / 12.0, &[(1, -16.0 / 12.0), (2, 1.0 / 12.0)]),
        }
    }
}

/// Uniform interior grid on `(xmin, xmax)`: `n` points with spacing
/// `Δ = (xmax − xmin)/(n + 1)` and Dirichlet walls at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    xmin: f64,
    xmax: f64,
    n: usize,
    stencil: Stencil,
}

impl Grid {
    pub fn new(xmin: f64, xmax: f64, n: usize) -> Result<Self> {
        if !(xmin.is_finite() && xmax.is_finite()) || !(xmax > xmin) {
            return Err(Error::InvalidGrid(format!(
                "need finite xmin < xmax, got [{xmin}, {xmax}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(Self {
            xmin,
            xmax,
            n,
            stencil: Stencil::default(),
        })
    }

    /// `[−10, 10]` with 801 points.
    pub fn default_oscillator() -> Self {
        Self::new(-10.0, 10.0, 801).expect("default grid is valid")
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn spacing(&self) -> f64 {
        (self.xmax - self.xmin) / (self.n + 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.xmin + (j + 1) as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Same interval with the spacing halved: `n → 2n + 1`.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n + 1,
            ..*self
        }
    }

    /// Closed-form bound `e^{2|α|(xmax − xmin)}` on the condition number of
    /// `e^{2αx}` over the interval.
    pub fn metric_condition_bound(&self, alpha: f64) -> f64 {
        (2.0 * alpha.abs() * (self.xmax - self.xmin)).exp()
    }
}

/// Potential term of the model Hamiltonian.
#[derive(Clone)]
pub enum Potential {
    /// `ω²x²/2`
    Harmonic,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Harmonic => f.write_str("Harmonic"),
            Potential::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Parameters of `H = ½(p − iα)² + V(x)`.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub alpha: f64,
    pub omega: f64,
    pub potential: Potential,
}

impl ModelParams {
    pub fn harmonic(alpha: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self {
            alpha,
            omega,
            potential: Potential::Harmonic,
        })
    }

    pub fn custom(alpha: f64, potential: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            alpha,
            omega: 1.0,
            potential: Potential::Custom(Arc::new(potential)),
        }
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        match &self.potential {
            Potential::Harmonic => 0.5 * self.omega * self.omega * x * x,
            Potential::Custom(v) => v(x),
        }
    }
}

pub fn build_position(grid: &Grid) -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&grid.points())
}

/// `p = −i·D` with `D` the antisymmetric central difference of the grid's
/// stencil; Hermitian with zero residual.
pub fn build_momentum(grid: &Grid) -> ComplexMatrix {
    let n = grid.len();
    let inv = 1.0 / grid.spacing();
    let mut p = ComplexMatrix::zeros(n, n);
    for &(k, w) in grid.stencil().first_derivative() {
        for j in 0..n.saturating_sub(k) {
            // D[j, j+k] = w/Δ, D[j+k, j] = −w/Δ
            p[(j, j + k)] = Complex64::new(0.0, -w * inv);
            p[(j + k, j)] = Complex64::new(0.0, w * inv);
        }
    }
    p
}

/// `p²` as the symmetric positive stencil for `−d²/dx²`.
///
/// This is a separate stencil rather than the square of [`build_momentum`]:
/// squaring a central difference couples only sites of equal parity and
/// doubles every low-lying level.
pub fn build_momentum_squared(grid: &Grid) -> ComplexMatrix {
    let n = grid.len();
    let inv2 = 1.0 / (grid.spacing() * grid.spacing());
    let (diag, off) = grid.stencil().negative_laplacian();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        l[(j, j)] = Complex64::new(diag * inv2, 0.0);
    }
    for &(k, w) in off {
        for j in 0..n.saturating_sub(k) {
            l[(j, j + k)] = Complex64::new(w * inv2, 0.0);
            l[(j + k, j)] = Complex64::new(w * inv2, 0.0);
        }
    }
    l
}

pub fn build_potential(grid: &Grid, params: &ModelParams) -> ComplexMatrix {
    let v: Vec<f64> = grid.points().iter().map(|&x| params.potential_at(x)).collect();
    ComplexMatrix::from_real_diagonal(&v)
}

/// `H = ½p² − iαp − ½α² + V`, the expanded form of `½(p − iα)² + V`.
pub fn build_hamiltonian(grid: &Grid, params: &ModelParams) -> ComplexMatrix {
    let p = build_momentum(grid);
    let p2 = build_momentum_squared(grid);
    let v = build_potential(grid, params);
    let alpha = params.alpha;
    let shift = Complex64::new(-0.5 * alpha * alpha, 0.0);
    ComplexMatrix::from_fn(grid.len(), grid.len(), |i, j| {
        let mut h = 0.5 * p2[(i, j)] + Complex64::new(0.0, -alpha) * p[(i, j)] + v[(i, j)];
        if i == j {
            h += shift;
        }
        h
    })
}

/// Samples of `e^{2αx}` on the grid.
pub fn metric_diagonal(grid: &Grid, alpha: f64) -> Vec<f64> {
    grid.points().iter().map(|&x| (2.0 * alpha * x).exp()).collect()
}

/// `η₊ = diag(e^{2αx_j})`, refused when the closed-form condition number
/// over the interval exceeds `cond_cap`.
pub fn build_metric(grid: &Grid, alpha: f64, cond_cap: f64) -> Result<ComplexMatrix> {
    let condition = grid.metric_condition_bound(alpha);
    if !(condition <= cond_cap) {
        return Err(Error::ConditionCapExceeded {
            condition,
            cap: cond_cap,
        });
    }
    let d = metric_diagonal(grid, alpha);
    condition_number_diag(&d)?;
    Ok(ComplexMatrix::from_real_diagonal(&d))
}

/// Rectangle-rule weights `w_j = Δ` on the interior points.
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    vec![grid.spacing(); grid.len()]
}

/// `(H, η) = (ρ⁻¹ h ρ, ρ²)` for Hermitian `h_ref` and diagonal `ρ > 0`.
pub fn algebraic_model(h_ref: &ComplexMatrix, rho_diag: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix)> {
    h_ref.require_square()?;
    let residual = h_ref.hermiticity_residual()?;
    let tol = 1e-10;
    if residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    similarity_from_seed(h_ref, rho_diag)
}

/// The same conjugation as [`algebraic_model`] without requiring the seed
/// to be Hermitian. A non-Hermitian seed gives an `H` that no positive
/// metric can make pseudo-Hermitian if its spectrum is complex.
pub fn similarity_from_seed(seed: &ComplexMatrix, rho_diag: &[f64]) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = seed.require_square()?;
    if rho_diag.len() != n {
        return Err(Error::ShapeMismatch {
            context: "algebraic model rho",
            expected: n,
            found: rho_diag.len(),
        });
    }
    if let Some((index, &value)) = rho_diag
        .iter()
        .enumerate()
        .find(|(_, r)| !(**r > 0.0) || !r.is_finite())
    {
        return Err(Error::NotPositive { index, value });
    }
    let inv: Vec<f64> = rho_diag.iter().map(|r| 1.0 / r).collect();
    let h = seed.scale_rows(&inv).scale_cols(rho_diag);
    let eta: Vec<f64> = rho_diag.iter().map(|r| r * r).collect();
    Ok((h, ComplexMatrix::from_real_diagonal(&eta)))
}

/// Random Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Diagonal entries log-uniform in `[lo, hi]`.
pub fn random_log_uniform(dim: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "log-uniform range needs 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..dim)
        .map(|_| if a == b { lo } else { rng.random_range(a..b).exp() })
        .collect())
}

/// A random Hermitian seed whose leading 2×2 block is replaced by
/// `[[c, g], [−g, c]]`, which has the conjugate pair `c ± ig`.
pub fn pt_broken_seed(dim: usize, gap: f64, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if dim < 2 {
        return Err(Error::InvalidParameter("a broken seed needs dim >= 2".into()));
    }
    let mut h = random_hermitian(dim, rng);
    for i in 0..2 {
        for j in 2..dim {
            h[(i, j)] = Complex64::new(0.0, 0.0);
            h[(j, i)] = Complex64::new(0.0, 0.0);
        }
    }
    let c = h[(0, 0)];
    h[(1, 1)] = c;
    h[(0, 1)] = Complex64::new(gap, 0.0);
    h[(1, 0)] = Complex64::new(-gap, 0.0);
    Ok(h)
}
