//! The shifted harmonic oscillator `H = ½(p − iα)² + ½ω²x²`.
//!
//! Its eigenfunctions are `ψ_n(x) = N_n H_n(√ω x) e^{−ωx²/2 − αx}` with
//! energies `ω(n + ½)`, η-orthonormal for `η = e^{2αx}`. Multiplying by
//! `ρ = e^{αx}` removes every trace of `α` and leaves the Hermite
//! functions of the ordinary oscillator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::discretize::Grid;
use crate::error::{Error, Result};
use crate::numcore::ComplexVector;

/// Physicists' Hermite polynomial `H_n(y)` by three-term recurrence.
pub fn hermite(n: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * y);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * y * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorModel {
    alpha: f64,
    omega: f64,
}

impl OscillatorModel {
    pub fn new(alpha: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "oscillator needs finite alpha and omega > 0, got alpha = {alpha}, omega = {omega}"
            )));
        }
        Ok(Self { alpha, omega })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ln N_n`
    pub fn ln_normalization(&self, n: usize) -> f64 {
        0.25 * (self.omega / PI).ln() - 0.5 * (n as f64 * 2f64.ln() + ln_factorial(n))
    }

    /// `N_n = (ω/π)^{1/4} / √(2ⁿ n!)`
    pub fn normalization(&self, n: usize) -> f64 {
        self.ln_normalization(n).exp()
    }

    /// `ω(n + ½)`; independent of `α`.
    pub fn energy(&self, n: usize) -> f64 {
        self.omega * (n as f64 + 0.5)
    }

    /// `ρψ_n`, the Hermite function. The Gaussian is folded into the
    /// logarithm of the normalization so large `n` does not overflow.
    fn hermite_function(&self, n: usize, x: f64) -> f64 {
        let y = self.omega.sqrt() * x;
        let h = hermite(n, y);
        if h == 0.0 {
            return 0.0;
        }
        h.signum() * (self.ln_normalization(n) + h.abs().ln() - 0.5 * y * y).exp()
    }

    pub fn psi(&self, n: usize) -> AnalyticEigenstate {
        AnalyticEigenstate {
            n,
            energy: self.energy(n),
            model: *self,
            weight: -1.0,
        }
    }

    /// `η ψ_n = e^{2αx} ψ_n`
    pub fn eta_psi(&self, n: usize) -> impl Fn(f64) -> Complex64 + Send + Sync + 'static {
        let state = AnalyticEigenstate { weight: 1.0, ..self.psi(n) };
        move |x| state.eval(x)
    }

    /// `ρ ψ_n = e^{αx} ψ_n`
    pub fn rho_psi(&self, n: usize) -> impl Fn(f64) -> Complex64 + Send + Sync + 'static {
        let state = AnalyticEigenstate { weight: 0.0, ..self.psi(n) };
        move |x| state.eval(x)
    }
}

/// Exact energy `ω(n + ½)`.
pub fn analytic_energy(n: usize, model: &OscillatorModel) -> f64 {
    model.energy(n)
}

/// A closed-form eigenfunction together with its quantum number and energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEigenstate {
    n: usize,
    energy: f64,
    model: OscillatorModel,
    /// Exponent `k` in `e^{kαx}` relative to the Hermite function.
    weight: f64,
}

impl AnalyticEigenstate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let rho_psi = self.model.hermite_function(self.n, x);
        Complex64::new(rho_psi * (self.weight * self.model.alpha * x).exp(), 0.0)
    }

    pub fn evaluator(&self) -> impl Fn(f64) -> Complex64 + Send + Sync + 'static {
        let s = *self;
        move |x| s.eval(x)
    }
}

/// `(f(x_0), …, f(x_{n−1}))` on the grid points.
pub fn sample_on_grid(f: impl Fn(f64) -> Complex64, grid: &Grid) -> ComplexVector {
    grid.points().into_iter().map(f).collect::<Vec<_>>().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_hamiltonian, metric_diagonal, quadrature_weights, ModelParams};

    fn model(alpha: f64) -> OscillatorModel {
        OscillatorModel::new(alpha, 1.0).unwrap()
    }

    /// Explicit polynomials, written out independently of the recurrence.
    fn hermite_closed(n: usize, y: f64) -> f64 {
        match n {
            0 => 1.0,
            1 => 2.0 * y,
            2 => 4.0 * y * y - 2.0,
            3 => 8.0 * y.powi(3) - 12.0 * y,
            4 => 16.0 * y.powi(4) - 48.0 * y * y + 12.0,
            5 => 32.0 * y.powi(5) - 160.0 * y.powi(3) + 120.0 * y,
            _ => unreachable!(),
        }
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.7), 1.0);
        assert_eq!(hermite(2, 1.0), 2.0);
        assert_eq!(hermite(5, 1.0), -8.0);
        for n in 0..=5 {
            for &y in &[-2.3, -0.4, 0.0, 0.9, 1.7] {
                let (a, b) = (hermite(n, y), hermite_closed(n, y));
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "n={n} y={y}");
            }
        }
    }

    #[test]
    fn normalization_values() {
        let m = model(0.3);
        assert!((m.normalization(0) - PI.powf(-0.25)).abs() < 1e-15);
        assert!((m.normalization(0) - 0.7511).abs() < 1e-4);
        assert!((m.normalization(1) - PI.powf(-0.25) / 2f64.sqrt()).abs() < 1e-15);
        // n! overflows f64 at n = 171; the log form stays finite
        let big = m.normalization(200);
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn quadrature_normalization() {
        let m = model(0.3);
        let grid = Grid::default_oscillator();
        let w = quadrature_weights(&grid);
        let eta = metric_diagonal(&grid, 0.3);
        for n in 0..=7 {
            let psi = sample_on_grid(m.psi(n).evaluator(), &grid);
            let s: f64 = (0..grid.len()).map(|j| w[j] * eta[j] * psi[j].norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-8, "n={n}: {s}");
        }
    }

    #[test]
    fn eta_orthonormality_on_grid() {
        let m = model(0.3);
        let grid = Grid::default_oscillator();
        let w = quadrature_weights(&grid);
        let eta = metric_diagonal(&grid, 0.3);
        let states: Vec<_> = (0..8).map(|n| sample_on_grid(m.psi(n).evaluator(), &grid)).collect();
        for a in 0..8 {
            for b in 0..8 {
                let g: Complex64 = (0..grid.len())
                    .map(|j| states[a][j].conj() * states[b][j] * (w[j] * eta[j]))
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((g - target).norm() < 1e-6, "({a},{b}) = {g}");
            }
        }
    }

    #[test]
    fn rho_images_are_orthonormal() {
        let m = model(0.3);
        let grid = Grid::default_oscillator();
        let w = grid.spacing();
        let states: Vec<_> = (0..8).map(|n| sample_on_grid(m.rho_psi(n), &grid)).collect();
        for a in 0..8 {
            for b in 0..8 {
                let g = states[a].dot(&states[b]) * w;
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((g - target).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn pointwise_identities() {
        let m = model(0.3);
        let psi = m.psi(1);
        let eta = m.eta_psi(1);
        let rho = m.rho_psi(1);
        let ratio = eta(1.0) / psi.eval(1.0);
        assert!((ratio.re - 0.6f64.exp()).abs() < 1e-14);
        for &x in &[-3.0, -0.5, 0.2, 2.5] {
            assert!((eta(x) - psi.eval(x) * (0.6 * x).exp()).norm() < 1e-14 * eta(x).norm().max(1e-300));
            assert!((rho(x) - psi.eval(x) * (0.3 * x).exp()).norm() < 1e-14 * rho(x).norm().max(1e-300));
        }
    }

    #[test]
    fn rho_psi_is_alpha_independent() {
        for &alpha in &[-0.7, 0.0, 0.3, 1.1] {
            let f = model(alpha).rho_psi(0);
            for &x in &[-2.0f64, 0.0, 1.3] {
                let expect = PI.powf(-0.25) * (-x * x / 2.0).exp();
                assert!((f(x).re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_alpha_collapses_representations() {
        let m = model(0.0);
        for &x in &[-1.5, 0.4, 2.0] {
            assert_eq!(m.psi(3).eval(x), m.eta_psi(3)(x));
            assert_eq!(m.psi(3).eval(x), m.rho_psi(3)(x));
        }
    }

    #[test]
    fn energies() {
        assert_eq!(analytic_energy(0, &model(0.0)), 0.5);
        assert_eq!(analytic_energy(3, &OscillatorModel::new(0.9, 2.0).unwrap()), 7.0);
        assert_eq!(model(0.3).energy(4), model(-1.2).energy(4));
        assert_eq!(model(0.3).psi(4).energy(), 4.5);
        assert!(OscillatorModel::new(0.3, 0.0).is_err());
    }

    #[test]
    fn sample_trivial_functions() {
        let grid = Grid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(sample_on_grid(|_| Complex64::new(0.0, 0.0), &grid), ComplexVector::zeros(5));
        let ones = sample_on_grid(|_| Complex64::new(1.0, 0.0), &grid);
        assert!(ones.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        let g = Grid::default_oscillator();
        let v = sample_on_grid(model(0.3).rho_psi(0), &g);
        assert!((v.norm().powi(2) * g.spacing() - 1.0).abs() < 1e-8);
    }

    /// Interior residual of `Hψ_n − E_nψ_n` for the second-order scheme.
    fn residual(n_points: usize, n: usize) -> f64 {
        let grid = Grid::new(-10.0, 10.0, n_points)
            .unwrap()
            .with_stencil(crate::discretize::Stencil::Second);
        let params = ModelParams::harmonic(0.3, 1.0).unwrap();
        let h = build_hamiltonian(&grid, &params);
        let m = model(0.3);
        let psi = sample_on_grid(m.psi(n).evaluator(), &grid);
        let mut r = h.apply(&psi);
        r.axpy(Complex64::new(-m.energy(n), 0.0), &psi);
        // interior points: |x| < 5
        let pts = grid.points();
        let num: f64 = (0..grid.len()).filter(|&j| pts[j].abs() < 5.0).map(|j| r[j].norm_sqr()).sum();
        let den: f64 = (0..grid.len()).filter(|&j| pts[j].abs() < 5.0).map(|j| psi[j].norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn eigen_relation_converges_at_second_order() {
        for n in 0..=5 {
            let r = [residual(201, n), residual(403, n), residual(807, n)];
            for w in r.windows(2) {
                let ratio = w[1] / w[0];
                assert!((0.2..0.3).contains(&ratio), "n={n}: ratio {ratio}");
            }
        }
    }

    #[test]
    fn fourth_order_eigen_relation_is_smaller() {
        let grid = Grid::default_oscillator();
        let params = ModelParams::harmonic(0.3, 1.0).unwrap();
        let h = build_hamiltonian(&grid, &params);
        let m = model(0.3);
        for n in 0..=5 {
            let psi = sample_on_grid(m.psi(n).evaluator(), &grid);
            let mut r = h.apply(&psi);
            r.axpy(Complex64::new(-m.energy(n), 0.0), &psi);
            assert!(r.norm() / psi.norm() < 1e-4, "n={n}");
        }
    }
}
