//! The numerical experiments: single runs, eps sweeps, grid-convergence
//! studies, long-time amplitudes and the Dirac/kernel comparison.

use std::time::{Duration, Instant};

use kinetic_hj::baseline_kinetic::{hopf_cole_of_f, init_kinetic, KineticState, UpwindScheme};
use kinetic_hj::initial_data::{dirac, equilibrium, two_well_data_scaled, two_dirac};
use kinetic_hj::representation_oracle::continuous_kernel;
use kinetic_hj::{ApScheme, ApState, GridSpec, LimitScheme, LimitState, PhaseField, SpatialField};

use crate::config::{ExperimentConfig, InitPreset, SchemeKind, StudyMode};
use crate::error::{HarnessError, Result};
use crate::metric::{error_metric, restrict, ErrorTable};

/// The named initial data on a given grid (the Dirac presets snap to nodes).
pub fn initial_data(cfg: &ExperimentConfig, grid: &GridSpec) -> Box<dyn Fn(f64, f64) -> f64> {
    let (xs, vs) = (grid.x_star(), grid.v_star());
    match cfg.init {
        InitPreset::TwoWell => Box::new(move |x, v| two_well_data_scaled(x, v, xs, vs)),
        InitPreset::Equilibrium => Box::new(equilibrium),
        InitPreset::Dirac => Box::new(dirac(grid, 0.0, cfg.dirac_half_width)),
        InitPreset::TwoDirac => Box::new(two_dirac(grid, cfg.dirac_centers.0, cfg.dirac_centers.1)),
    }
}

/// One of the three schemes together with its current state.
pub enum Solver<'g> {
    Ap(ApScheme<'g>, ApState),
    Limit(LimitScheme<'g>, LimitState),
    Naive(UpwindScheme<'g>, KineticState),
}

impl<'g> Solver<'g> {
    pub fn new(
        kind: SchemeKind,
        eps: f64,
        grid: &'g GridSpec,
        phi_in: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        Ok(match kind {
            SchemeKind::Ap => {
                let s = ApScheme::new(grid, eps)?;
                let state = s.init(phi_in)?;
                Solver::Ap(s, state)
            }
            SchemeKind::Limit => {
                let s = LimitScheme::new(grid);
                let state = s.init(phi_in)?;
                Solver::Limit(s, state)
            }
            SchemeKind::Naive => {
                let s = UpwindScheme::new(grid, eps)?;
                let state = init_kinetic(phi_in, grid, eps)?;
                Solver::Naive(s, state)
            }
        })
    }

    pub fn n(&self) -> usize {
        match self {
            Solver::Ap(_, s) => s.n,
            Solver::Limit(_, s) => s.n,
            Solver::Naive(_, s) => s.n,
        }
    }

    pub fn advance(&mut self) {
        match self {
            Solver::Ap(scheme, s) => *s = scheme.step(s),
            Solver::Limit(scheme, s) => *s = scheme.step(s),
            Solver::Naive(scheme, s) => *s = scheme.step(s),
        }
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n() < n {
            self.advance();
        }
    }

    /// `phi` for the HJ schemes, the Hopf-Cole read-back for the naive one.
    pub fn phi(&self) -> PhaseField {
        match self {
            Solver::Ap(_, s) => s.phi.clone(),
            Solver::Limit(_, s) => s.phi.clone(),
            Solver::Naive(_, s) => hopf_cole_of_f(s),
        }
    }

    pub fn mu(&self) -> Option<SpatialField> {
        match self {
            Solver::Ap(_, s) => Some(s.mu.clone()),
            Solver::Limit(_, s) => Some(s.mu.clone()),
            Solver::Naive(..) => None,
        }
    }

    /// Velocity slice `j` of [`Solver::phi`].
    pub fn slice(&self, j: usize) -> Vec<f64> {
        match self {
            Solver::Ap(_, s) => s.phi.row(j).to_vec(),
            Solver::Limit(_, s) => s.phi.row(j).to_vec(),
            Solver::Naive(_, s) => s
                .f
                .row(j)
                .iter()
                .map(|&f| -s.eps * f.max(f64::MIN_POSITIVE).ln())
                .collect(),
        }
    }
}

/// Step index whose time is `t`, if the time grid passes through it.
pub fn step_for_time(grid: &GridSpec, t: f64) -> Option<usize> {
    if t >= grid.t_final() * (1.0 - 1e-12) {
        return Some(grid.n_t());
    }
    let n = ((t / grid.dt()).round() as usize).min(grid.n_t());
    ((grid.time_at(n) - t).abs() <= 1e-9 * t.max(1.0)).then_some(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub t: f64,
    pub phi: PhaseField,
    pub mu: Option<SpatialField>,
}

fn snapshot(solver: &Solver, t: f64) -> Snapshot {
    Snapshot {
        n: solver.n(),
        t,
        phi: solver.phi(),
        mu: solver.mu(),
    }
}

/// Runs one scheme and records the solution at the given times, sorted.
///
/// Times between grid levels are reached exactly by a separate run whose last
/// step is shortened, exactly as the final step to `T` is.
pub fn run_snapshots(
    kind: SchemeKind,
    eps: f64,
    grid: &GridSpec,
    phi_in: impl Fn(f64, f64) -> f64,
    times: &[f64],
) -> Result<Vec<Snapshot>> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut solver = Solver::new(kind, eps, grid, &phi_in)?;
    let mut out = Vec::with_capacity(times.len());
    for t in times {
        match step_for_time(grid, t) {
            Some(n) => {
                solver.advance_to(n);
                out.push(snapshot(&solver, grid.time_at(n)));
            }
            None => {
                log::debug!("output time {t} is between time levels; shortening the last step");
                let sub = GridSpec::new(grid.x_star(), grid.v_star(), grid.n_x(), grid.n_v(), grid.dt(), t)?;
                let mut partial = Solver::new(kind, eps, &sub, &phi_in)?;
                partial.advance_to(sub.n_t());
                out.push(snapshot(&partial, t));
            }
        }
    }
    Ok(out)
}

/// `E(eps)` between the limit scheme and the AP scheme on one grid, one table
/// per output time.
pub fn eps_sweep_at(cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<ErrorTable>> {
    let grid = cfg.grid()?;
    let phi_in = initial_data(cfg, &grid);
    let limit = run_snapshots(SchemeKind::Limit, 1.0, &grid, &phi_in, times)?;
    let mut errors = vec![Vec::new(); limit.len()];
    for &eps in &cfg.eps {
        let ap = run_snapshots(SchemeKind::Ap, eps, &grid, &phi_in, times)?;
        for (k, (l, a)) in limit.iter().zip(&ap).enumerate() {
            errors[k].push((eps, error_metric(&l.phi, &a.phi)?));
        }
        log::info!("eps = {eps}: {:?}", errors.iter().map(|e| e.last().unwrap().1).collect::<Vec<_>>());
    }
    limit
        .iter()
        .zip(errors)
        .map(|(snap, pairs)| {
            Ok(ErrorTable::from_pairs("eps", &pairs)?
                .with_metadata("t", snap.t)
                .with_metadata("n_x", grid.n_x())
                .with_metadata("n_v", grid.n_v())
                .with_metadata("dt", grid.dt()))
        })
        .collect()
}

/// [`eps_sweep_at`] at the final time.
pub fn eps_sweep(cfg: &ExperimentConfig) -> Result<ErrorTable> {
    Ok(eps_sweep_at(cfg, &[cfg.t_final])?.remove(0))
}

/// Fixed parameters, candidate levels and reference level of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergencePlan {
    pub mode: StudyMode,
    pub levels: Vec<usize>,
    pub reference: usize,
    pub t_final: f64,
    /// Fixed `N_v` for the dx and dt studies, fixed `N_x` for the dv study.
    pub fixed_n: usize,
    /// Fixed time step (dx and dv studies).
    pub dt: f64,
}

impl ConvergencePlan {
    pub fn new(cfg: &ExperimentConfig, mode: StudyMode) -> Result<Self> {
        let full = cfg.full_scale;
        let (levels, reference, t_final, fixed_n, dt): (Vec<usize>, usize, f64, usize, f64) = match mode {
            StudyMode::ConvDx => (
                (5..=if full { 12 } else { 10 }).map(|k| 1 << k).collect(),
                if full { 1 << 15 } else { 1 << 12 },
                0.01,
                201,
                2.5e-5,
            ),
            StudyMode::ConvDv => (
                (2..=if full { 8 } else { 6 }).map(|k| 3usize.pow(k)).collect(),
                3usize.pow(if full { 10 } else { 7 }),
                0.01,
                256,
                2.5e-5,
            ),
            StudyMode::ConvDt => (
                (5..=if full { 10 } else { 8 }).map(|k| 1 << k).collect(),
                if full { 1 << 11 } else { 1 << 9 },
                0.5,
                101,
                f64::NAN,
            ),
            other => {
                return Err(HarnessError::Config(format!("'{other}' is not a convergence study")))
            }
        };
        let plan = Self {
            mode,
            levels: if cfg.levels.is_empty() { levels } else { cfg.levels.clone() },
            reference: cfg.reference.unwrap_or(reference),
            t_final,
            fixed_n,
            dt,
        };
        if plan.levels.iter().any(|&l| l >= plan.reference) {
            return Err(HarnessError::Config(format!(
                "candidate levels {:?} must be coarser than the reference {}",
                plan.levels, plan.reference
            )));
        }
        Ok(plan)
    }

    /// Grid of a given level; the dt study ties `dx = dt dv`.
    pub fn grid(&self, cfg: &ExperimentConfig, level: usize) -> Result<GridSpec> {
        let (xs, vs) = (cfg.x_star, cfg.v_star);
        Ok(match self.mode {
            StudyMode::ConvDx => GridSpec::new(xs, vs, level, self.fixed_n, self.dt, self.t_final)?,
            StudyMode::ConvDv => GridSpec::new(xs, vs, self.fixed_n, level, self.dt, self.t_final)?,
            _ => {
                let dt = self.t_final / level as f64;
                let dv = 2.0 * vs / self.fixed_n as f64;
                // the ratio is an integer in exact arithmetic; keep round-off from dropping a cell
                let n_x = (2.0 * xs / (dt * dv) * (1.0 + 1e-12)).floor() as usize;
                GridSpec::new(xs, vs, n_x, self.fixed_n, dt, self.t_final)?
            }
        })
    }

    /// The varied step of a grid.
    pub fn param(&self, grid: &GridSpec) -> f64 {
        match self.mode {
            StudyMode::ConvDx => grid.dx(),
            StudyMode::ConvDv => grid.dv(),
            _ => grid.dt(),
        }
    }

    pub fn param_name(&self) -> &'static str {
        match self.mode {
            StudyMode::ConvDx => "dx",
            StudyMode::ConvDv => "dv",
            _ => "dt",
        }
    }
}

/// Errors at the final time of each candidate against the reference, for the
/// configured scheme and its first eps.
pub fn convergence_study(cfg: &ExperimentConfig, mode: StudyMode) -> Result<ErrorTable> {
    let plan = ConvergencePlan::new(cfg, mode)?;
    let fine = plan.grid(cfg, plan.reference)?;
    let cells = fine.n_x() * fine.n_v();
    if cells > cfg.max_cells {
        return Err(HarnessError::TooLarge { cells, cap: cfg.max_cells });
    }
    let eps = cfg.primary_eps();
    let solve = |grid: &GridSpec| -> Result<PhaseField> {
        let phi_in = initial_data(cfg, grid);
        let snap = run_snapshots(cfg.scheme, eps, grid, phi_in, &[grid.t_final()])?;
        Ok(snap.into_iter().next().unwrap().phi)
    };
    let reference = solve(&fine)?;
    let mut pairs = Vec::new();
    for &level in &plan.levels {
        let grid = plan.grid(cfg, level)?;
        let candidate = solve(&grid)?;
        let restricted = restrict(&reference, &fine, &grid)?;
        let e = error_metric(&restricted, &candidate)?;
        log::info!("{} level {level}: error {e}", plan.param_name());
        pairs.push((plan.param(&grid), e));
    }
    Ok(ErrorTable::from_pairs(plan.param_name(), &pairs)?
        .with_metadata("scheme", cfg.scheme)
        .with_metadata("eps", eps)
        .with_metadata("reference_level", plan.reference)
        .with_metadata("reference_n_x", fine.n_x())
        .with_metadata("reference_n_v", fine.n_v())
        .with_metadata("reference_dt", fine.dt())
        .with_metadata("T", plan.t_final))
}

/// `max_i u - min_i u` of a slice.
pub fn amplitude(slice: &[f64]) -> f64 {
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Spatial amplitude of the `v = 0` slice (nearest node) at every step,
/// including `t = 0`.
pub fn amplitude_series(cfg: &ExperimentConfig) -> Result<Vec<(f64, f64)>> {
    let grid = cfg.grid()?;
    let phi_in = initial_data(cfg, &grid);
    let mut solver = Solver::new(cfg.scheme, cfg.primary_eps(), &grid, phi_in)?;
    let j0 = grid.nearest_v_index(0.0);
    let mut out = vec![(0.0, amplitude(&solver.slice(j0)))];
    while solver.n() < grid.n_t() {
        solver.advance();
        out.push((grid.time_at(solver.n()), amplitude(&solver.slice(j0))));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub x: f64,
    /// Periodic offset from the reference node.
    pub offset: f64,
    /// `min_v phi(T, x) - min_v phi(T, x_0)`.
    pub profile: f64,
    pub cusp: f64,
    pub kernel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracReport {
    pub t: f64,
    /// `min_v phi` at the final time.
    pub profile: SpatialField,
    /// Node used as `x = 0` and its coordinate.
    pub center_index: usize,
    pub center_x: f64,
    /// Window radius `r T^{3/2}`.
    pub radius: f64,
    /// Sup over the window of `|profile - 3/2 |x|^{2/3}|`.
    pub deviation: f64,
    pub rows: Vec<KernelRow>,
    /// For two Diracs: how far the profile dips below the lower envelope of the
    /// two shifted cusps (0 when it never does).
    pub superposition_deficit: Option<f64>,
}

fn periodic_offset(x: f64, center: f64, period: f64) -> f64 {
    (x - center + 0.5 * period).rem_euclid(period) - 0.5 * period
}

/// Runs the limit scheme from a Dirac surrogate and compares `min_v phi` with
/// the long-time cusp around the (first) source node.
pub fn dirac_experiment(cfg: &ExperimentConfig) -> Result<DiracReport> {
    let grid = cfg.grid()?;
    let centers = match cfg.init {
        InitPreset::Dirac => vec![0.0],
        InitPreset::TwoDirac => vec![cfg.dirac_centers.0, cfg.dirac_centers.1],
        other => {
            return Err(HarnessError::Config(format!(
                "the kernel study needs a Dirac preset, got '{other}'"
            )))
        }
    };
    let phi_in = initial_data(cfg, &grid);
    let scheme = LimitScheme::new(&grid);
    let end = scheme.run_to_end(scheme.init(phi_in)?);
    let profile = end.phi.min_over_v();
    let t = grid.time_at(end.n);
    let period = 2.0 * grid.x_star();
    let center_index = grid.nearest_x_index(centers[0]);
    let center_x = grid.x()[center_index];
    let base = profile[center_index];
    let radius = cfg.kernel_radius * t.powf(1.5);

    let mut deviation = 0.0f64;
    let rows = grid
        .x()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let offset = periodic_offset(x, center_x, period);
            let row = KernelRow {
                x,
                offset,
                profile: profile[i] - base,
                cusp: 1.5 * offset.abs().powf(2.0 / 3.0),
                kernel: continuous_kernel(t, offset),
            };
            if offset.abs() <= radius {
                deviation = deviation.max((row.profile - row.cusp).abs());
            }
            row
        })
        .collect::<Vec<_>>();

    let superposition_deficit = (centers.len() == 2).then(|| {
        let nodes = centers.iter().map(|&c| grid.x()[grid.nearest_x_index(c)]).collect::<Vec<_>>();
        let floor = nodes.iter().map(|&c| profile[grid.nearest_x_index(c)]).fold(f64::INFINITY, f64::min);
        grid.x()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let envelope = nodes
                    .iter()
                    .map(|&c| 1.5 * periodic_offset(x, c, period).abs().powf(2.0 / 3.0))
                    .fold(f64::INFINITY, f64::min);
                envelope - (profile[i] - floor)
            })
            .fold(0.0f64, f64::max)
    });

    Ok(DiracReport {
        t,
        profile,
        center_index,
        center_x,
        radius,
        deviation,
        rows,
        superposition_deficit,
    })
}

/// Median wall time per AP step over `repeats` runs of `n_steps` steps each.
pub fn time_ap_steps(
    grid: &GridSpec,
    eps: f64,
    phi_in: impl Fn(f64, f64) -> f64,
    n_steps: usize,
    repeats: usize,
) -> Result<Duration> {
    let scheme = ApScheme::new(grid, eps)?;
    let start_state = scheme.init(phi_in)?;
    let mut samples = (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            let end = scheme.run(start_state.clone(), n_steps);
            let elapsed = start.elapsed();
            std::hint::black_box(&end);
            elapsed / n_steps.max(1) as u32
        })
        .collect::<Vec<_>>();
    samples.sort_unstable();
    Ok(samples[samples.len() / 2])
}
