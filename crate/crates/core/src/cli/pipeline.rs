//! The four commands, from a validated [`RunConfig`] to files on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CliError, Command, Outcome};
use crate::construction::{
    build_equivalence_map, diagonalize_pseudo, equivalent_hermitian, DiagonalizeOptions, EquivalentHamiltonian,
    PhysicalBasis,
};
use crate::discretize::{
    algebraic_model, build_hamiltonian, build_metric, build_momentum_squared, build_potential, pt_broken_seed,
    random_hermitian, random_log_uniform, similarity_from_seed, Grid, ModelParams, MIN_CONFIG_POINTS,
};
use crate::error::Error;
use crate::evolve::{equivalence_deviations, propagate_pseudo_with, time_grid, TrajectoryRecord};
use crate::io::config::{InitialState, Mode, ResolvedTolerances, RunConfig, SeedKind};
use crate::io::matrix_file::{format_matrix, parse_matrix};
use crate::io::report::{
    self, to_json, write_spectrum_csv, write_trajectory_csv, ConvergenceNote, Metadata, Report, SpectrumRow,
    TrajectoryRow,
};
use crate::metric::{make_metric, pseudo_hermiticity_residual, MetricOperator};
use crate::models::OscillatorModel;
use crate::numcore::{ComplexMatrix, ComplexVector};

/// Where `H` and `η` came from, with what each source can be compared to.
#[derive(Debug, Clone)]
pub enum Source {
    Oscillator { grid: Grid, model: OscillatorModel },
    Algebraic { h_ref: ComplexMatrix },
    Files,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub h: ComplexMatrix,
    pub metric: MetricOperator,
    pub source: Source,
    pub tolerances: ResolvedTolerances,
}

fn oscillator_operators(grid: &Grid, cfg: &RunConfig, cap: f64) -> Result<(ComplexMatrix, MetricOperator), Error> {
    let params = ModelParams::harmonic(cfg.alpha, cfg.omega)?;
    let eta = build_metric(grid, cfg.alpha, cap)?;
    Ok((build_hamiltonian(grid, &params), make_metric(&eta)?))
}

fn grid_of(cfg: &RunConfig, n: usize) -> Result<Grid, Error> {
    Ok(Grid::new(cfg.grid.xmin, cfg.grid.xmax, n)?.with_stencil(cfg.grid.stencil))
}

fn read_matrix(cfg: &RunConfig, path: &Path) -> Result<ComplexMatrix, CliError> {
    let full = cfg.resolve_path(path);
    let text = std::fs::read_to_string(&full).map_err(|e| {
        CliError::Config(crate::io::ConfigError::Read {
            path: full.display().to_string(),
            message: e.to_string(),
        })
    })?;
    parse_matrix(&text).map_err(|source| CliError::MatrixFile {
        path: full.display().to_string(),
        source,
    })
}

fn check_cap(m: &MetricOperator, cap: f64) -> Result<(), Error> {
    if !(m.condition() <= cap) {
        return Err(Error::ConditionCapExceeded {
            condition: m.condition(),
            cap,
        });
    }
    Ok(())
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let tolerances = cfg.resolved_tolerances();
    let cap = tolerances.condition_cap;
    let (h, metric, source) = match cfg.mode {
        Mode::FdOscillator => {
            let grid = grid_of(cfg, cfg.grid.n)?;
            let model = OscillatorModel::new(cfg.alpha, cfg.omega)?;
            let (h, m) = oscillator_operators(&grid, cfg, cap)?;
            (h, m, Source::Oscillator { grid, model })
        }
        Mode::Algebraic => {
            let a = &cfg.algebraic;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let (h_ref, h, eta) = match a.seed_kind {
                SeedKind::Hermitian => {
                    let h_ref = random_hermitian(a.dim, &mut rng);
                    let rho = random_log_uniform(a.dim, a.rho_min, a.rho_max, &mut rng)?;
                    let (h, eta) = algebraic_model(&h_ref, &rho)?;
                    (h_ref, h, eta)
                }
                SeedKind::PtBroken => {
                    let seed = pt_broken_seed(a.dim, a.gap, &mut rng)?;
                    let rho = random_log_uniform(a.dim, a.rho_min, a.rho_max, &mut rng)?;
                    let (h, eta) = similarity_from_seed(&seed, &rho)?;
                    (seed, h, eta)
                }
            };
            let m = make_metric(&eta)?;
            check_cap(&m, cap)?;
            (h, m, Source::Algebraic { h_ref })
        }
        Mode::MatrixFiles => {
            let files = cfg.matrix_files.as_ref().expect("validated config has matrix_files");
            let h = read_matrix(cfg, &files.hamiltonian)?;
            let n = h.require_square().map_err(CliError::Numerical)?;
            let eta = match &files.metric {
                Some(p) => read_matrix(cfg, p)?,
                None => ComplexMatrix::identity(n),
            };
            let m = make_metric(&eta)?;
            if m.dim() != n {
                return Err(Error::ShapeMismatch {
                    context: "metric file",
                    expected: n,
                    found: m.dim(),
                }
                .into());
            }
            check_cap(&m, cap)?;
            (h, m, Source::Files)
        }
    };
    Ok(Problem {
        h,
        metric,
        source,
        tolerances,
    })
}

pub fn diagonalize_options(cfg: &RunConfig, tol: &ResolvedTolerances) -> DiagonalizeOptions {
    let base = match cfg.mode {
        Mode::FdOscillator => DiagonalizeOptions::finite_difference(cfg.retained_states().unwrap_or(usize::MAX)),
        _ => DiagonalizeOptions::algebraic(),
    };
    DiagonalizeOptions {
        admissibility_tol: tol.admissibility,
        real_tol: tol.real,
        cluster_tol: tol.cluster,
        gram_tol: tol.gram,
        retain: cfg.retained_states(),
        ..base
    }
}

pub fn spectrum_rows(basis: &PhysicalBasis<'_>, source: &Source) -> Vec<SpectrumRow> {
    basis
        .energies()
        .iter()
        .enumerate()
        .map(|(n, &e)| {
            let analytic = match source {
                Source::Oscillator { model, .. } => Some(model.energy(n)),
                _ => None,
            };
            SpectrumRow {
                n,
                e_numeric: e,
                e_analytic: analytic,
                abs_error: analytic.map(|a| (e - a).abs()),
            }
        })
        .collect()
}

pub fn initial_state(cfg: &RunConfig, basis: &PhysicalBasis<'_>) -> Result<ComplexVector, Error> {
    match cfg.evolve.initial {
        InitialState::Ground => basis
            .states()
            .first()
            .cloned()
            .ok_or(Error::IndexOutOfRange { index: 0, len: 0 }),
        InitialState::Superposition => {
            if basis.len() < 2 {
                return Err(Error::IndexOutOfRange {
                    index: 1,
                    len: basis.len(),
                });
            }
            let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut v = basis.states()[0].scale(s);
            v.axpy(s, &basis.states()[1]);
            Ok(v)
        }
        InitialState::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05ee_d0f5_7a7e);
            Ok((0..basis.ambient_dim())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect::<Vec<_>>()
                .into())
        }
    }
}

/// `‖h − h_ref‖_F / ‖h_ref‖_F` over the central half of the grid, with
/// `h_ref = ½p² + V` the Hermitian oscillator on the same stencil.
pub fn interior_block_error(h: &ComplexMatrix, grid: &Grid, omega: f64) -> Result<f64, Error> {
    let params = ModelParams::harmonic(0.0, omega)?;
    let p2 = build_momentum_squared(grid);
    let v = build_potential(grid, &params);
    let n = grid.len();
    let (lo, hi) = (n / 4, n - n / 4);
    let (mut num, mut den) = (0.0, 0.0);
    for i in lo..hi {
        for j in lo..hi {
            let r = 0.5 * p2[(i, j)] + v[(i, j)];
            num += (h[(i, j)] - r).norm_sqr();
            den += r.norm_sqr();
        }
    }
    Ok(if den == 0.0 { 0.0 } else { (num / den).sqrt() })
}

/// Relative round-trip error of `h` against the algebraic seed.
pub fn round_trip_error(h: &ComplexMatrix, h_ref: &ComplexMatrix) -> Result<f64, Error> {
    Ok(h.checked_sub(h_ref)?.frobenius_norm() / h_ref.frobenius_norm().max(f64::MIN_POSITIVE))
}

fn note(quantity: &str, fine_points: usize, coarse_points: usize, fine: f64, coarse: f64) -> ConvergenceNote {
    ConvergenceNote {
        quantity: quantity.to_string(),
        fine_points,
        coarse_points,
        fine,
        coarse,
        ratio: fine / coarse,
        observed_order: (coarse / fine).log2(),
    }
}

/// Residuals on the configured grid and on the grid with `Δ` doubled (or
/// halved when the point count does not allow doubling).
pub fn convergence_notes(cfg: &RunConfig, grid: &Grid) -> Result<Vec<ConvergenceNote>, Error> {
    let n = grid.len();
    let (fine, coarse) = if n % 2 == 1 && (n - 1) / 2 >= MIN_CONFIG_POINTS {
        (*grid, grid_of(cfg, (n - 1) / 2)?)
    } else {
        (grid.refined(), *grid)
    };
    let cap = f64::INFINITY;
    let residual = |g: &Grid| -> Result<(f64, f64), Error> {
        let (h, m) = oscillator_operators(g, cfg, cap)?;
        let ph = pseudo_hermiticity_residual(&h, &m)?;
        let ib = interior_block_error(&m.conjugate(&h)?, g, cfg.omega)?;
        Ok((ph, ib))
    };
    let (ph_f, ib_f) = residual(&fine)?;
    let (ph_c, ib_c) = residual(&coarse)?;
    Ok(vec![
        note("pseudo_hermiticity", fine.len(), coarse.len(), ph_f, ph_c),
        note("interior_block", fine.len(), coarse.len(), ib_f, ib_c),
    ])
}

fn metadata(cmd: Command, cfg: &RunConfig, problem: &Problem, range_dim: Option<usize>) -> Metadata {
    Metadata {
        command: cmd.as_str().to_string(),
        mode: cfg.mode.as_str().to_string(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        metric_condition: problem.metric.condition(),
        range_dim,
        ambient_dim: problem.metric.dim(),
        versions: report::versions(),
        timestamp: report::timestamp(),
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.files.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::Output {
            path: self.dir.join(name).display().to_string(),
            message: e.to_string(),
        })?;
        self.write(name, &buf)
    }
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    spectrum: &'a [SpectrumRow],
    diagnostics: BTreeMap<String, f64>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct EquivalentFile {
    dim: usize,
    hermiticity_residual: f64,
    comparison: BTreeMap<String, f64>,
    metadata: Metadata,
}

fn basis_diagnostics(basis: &PhysicalBasis<'_>) -> BTreeMap<String, f64> {
    let d = basis.diagnostics();
    BTreeMap::from([
        ("pseudo_hermiticity".into(), d.pseudo_hermiticity),
        ("max_imaginary".into(), d.max_imaginary),
        ("cross_group_overlap".into(), d.cross_group_overlap),
        ("gram_deviation".into(), d.gram_deviation),
        ("eigen_residual".into(), d.eigen_residual),
        ("independence".into(), d.independence),
    ])
}

fn comparison(problem: &Problem, cfg: &RunConfig, eq: &EquivalentHamiltonian) -> Result<BTreeMap<String, f64>, Error> {
    let mut out = BTreeMap::new();
    match &problem.source {
        Source::Oscillator { grid, .. } => {
            out.insert("interior_block".into(), interior_block_error(&eq.matrix, grid, cfg.omega)?);
        }
        Source::Algebraic { h_ref } => {
            out.insert("round_trip".into(), round_trip_error(&eq.matrix, h_ref)?);
        }
        Source::Files => {}
    }
    Ok(out)
}

pub fn execute(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let problem = build_problem(cfg)?;
    match cmd {
        Command::Spectrum => spectrum(cfg, &problem, out),
        Command::Verify => verify(cfg, &problem, out),
        Command::Evolve => evolve(cfg, &problem, out),
        Command::Equivalent => equivalent(cfg, &problem, out),
    }
}

fn spectrum(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<Outcome, CliError> {
    let basis = diagonalize_pseudo(&problem.h, &problem.metric, &diagonalize_options(cfg, &problem.tolerances))?;
    let rows = spectrum_rows(&basis, &problem.source);
    let mut w = Writer::new(out)?;
    w.csv("spectrum.csv", |buf| write_spectrum_csv(buf, &rows))?;
    let file = SpectrumFile {
        spectrum: &rows,
        diagnostics: basis_diagnostics(&basis),
        metadata: metadata(Command::Spectrum, cfg, problem, None),
    };
    w.write("spectrum.json", to_json(&file).as_bytes())?;
    let max_err = rows.iter().filter_map(|r| r.abs_error).fold(None, |a: Option<f64>, e| Some(a.map_or(e, |a| a.max(e))));
    let summary = match max_err {
        Some(e) => format!("{} eigenvalues, max |E_numeric - E_analytic| = {e:.3e}", rows.len()),
        None => format!("{} eigenvalues", rows.len()),
    };
    Ok(Outcome {
        files: w.files,
        summary,
        passed: true,
    })
}

fn verify(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<Outcome, CliError> {
    let tol = &problem.tolerances;
    let m = &problem.metric;
    let basis = diagonalize_pseudo(&problem.h, m, &diagonalize_options(cfg, tol))?;
    let map = build_equivalence_map(&basis, m)?;
    let eq = equivalent_hermitian(&problem.h, m)?;
    let psi0 = initial_state(cfg, &basis)?;
    let times = time_grid(cfg.times.t_max, cfg.times.steps);
    let traj = propagate_pseudo_with(&basis, &psi0, &times, false, tol.projection)?;
    let devs = equivalence_deviations(&basis, m, &eq.matrix, &psi0, &times, tol.h_hermiticity)?;

    let mut residuals = BTreeMap::from([
        ("pseudo_hermiticity".to_string(), basis.diagnostics().pseudo_hermiticity),
        ("gram".to_string(), basis.diagnostics().gram_deviation),
        ("h_hermiticity".to_string(), eq.hermiticity_residual),
        ("isometry".to_string(), map.isometry),
        ("unitarity".to_string(), map.co_isometry.unwrap_or(map.column_orthonormality)),
        ("equivalence".to_string(), devs.iter().cloned().fold(0.0, f64::max)),
        ("norm_drift".to_string(), traj.eta_drift()),
    ]);
    residuals.extend(comparison(problem, cfg, &eq)?);

    let mut diagnostics = basis_diagnostics(&basis);
    diagnostics.insert("column_orthonormality".into(), map.column_orthonormality);
    diagnostics.insert("projection_residual".into(), traj.projection_residual);
    diagnostics.insert("ref_norm_variation".into(), traj.ref_variation());
    diagnostics.insert("metric_sqrt_residual".into(), m.sqrt_residual());
    let rows = spectrum_rows(&basis, &problem.source);
    if let Some(e) = rows.iter().filter_map(|r| r.abs_error).reduce(f64::max) {
        diagnostics.insert("max_abs_error".into(), e);
    }

    let convergence = match &problem.source {
        Source::Oscillator { grid, .. } => convergence_notes(cfg, grid)?,
        _ => Vec::new(),
    };

    let mut report = Report {
        residuals,
        thresholds: cfg
            .resolved_thresholds()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        failed: Vec::new(),
        passed: false,
        diagnostics,
        convergence,
        spectrum: rows,
        metadata: metadata(Command::Verify, cfg, problem, Some(map.range_dim)),
    };
    report.grade();

    let mut w = Writer::new(out)?;
    w.write("report.json", to_json(&report).as_bytes())?;
    let summary = if report.passed {
        format!("all {} residuals under threshold", report.thresholds.len())
    } else {
        let detail: Vec<String> = report
            .failed
            .iter()
            .map(|k| format!("{k} = {:.3e} > {:.3e}", report.residuals[k], report.thresholds[k]))
            .collect();
        format!("threshold exceeded: {}", detail.join(", "))
    };
    Ok(Outcome {
        files: w.files,
        summary,
        passed: report.passed,
    })
}

fn evolve(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<Outcome, CliError> {
    let tol = &problem.tolerances;
    let m = &problem.metric;
    let basis = diagonalize_pseudo(&problem.h, m, &diagonalize_options(cfg, tol))?;
    let eq = equivalent_hermitian(&problem.h, m)?;
    let psi0 = initial_state(cfg, &basis)?;
    let times = time_grid(cfg.times.t_max, cfg.times.steps);
    let traj = propagate_pseudo_with(&basis, &psi0, &times, false, tol.projection)?;
    let devs = equivalence_deviations(&basis, m, &eq.matrix, &psi0, &times, tol.h_hermiticity)?;
    let rows: Vec<TrajectoryRow> = (0..traj.len())
        .map(|k| TrajectoryRow {
            t: traj.times[k],
            eta_norm: traj.eta_norms[k],
            ref_norm: traj.ref_norms[k],
            equiv_dev: devs[k],
        })
        .collect();
    let mut w = Writer::new(out)?;
    w.csv("trajectory.csv", |buf| write_trajectory_csv(buf, &rows))?;
    let summary = format!(
        "eta_norm drift {:.3e}, ref_norm variation {:.3e}, max equiv_dev {:.3e}",
        traj.eta_drift(),
        TrajectoryRecord::relative_variation(&traj.ref_norms),
        devs.iter().cloned().fold(0.0, f64::max)
    );
    Ok(Outcome {
        files: w.files,
        summary,
        passed: true,
    })
}

fn equivalent(cfg: &RunConfig, problem: &Problem, out: &Path) -> Result<Outcome, CliError> {
    let eq = equivalent_hermitian(&problem.h, &problem.metric)?;
    let comparison = comparison(problem, cfg, &eq)?;
    let mut w = Writer::new(out)?;
    w.write("h.txt", format_matrix(&eq.matrix).as_bytes())?;
    let mut summary = format!("h hermiticity residual {:.3e}", eq.hermiticity_residual);
    for (k, v) in &comparison {
        summary.push_str(&format!(", {k} {v:.3e}"));
    }
    let file = EquivalentFile {
        dim: eq.matrix.rows(),
        hermiticity_residual: eq.hermiticity_residual,
        comparison,
        metadata: metadata(Command::Equivalent, cfg, problem, None),
    };
    w.write("equivalent.json", to_json(&file).as_bytes())?;
    Ok(Outcome {
        files: w.files,
        summary,
        passed: true,
    })
}
