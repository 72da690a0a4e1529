//! The `eps = 0` limit scheme for the nonlocal Hamilton-Jacobi system:
//!
//! ```text
//! mu^{n+1}_i    = min_j phi-bar^n_{ij}
//! phi^{n+1}_ij  = min{ phi-bar^n_ij + dt, v_j^2/2 + mu^{n+1}_i }
//! ```
//!
//! Kept separate from [`crate::ap_scheme`] so that the asymptotic limit is
//! checked across two independent code paths.

use crate::ap_scheme::{check_field, sample_initial};
use crate::discretization::{transport_all, GridSpec, PhaseField, SpatialField, TransportStencil};
use crate::error::{Error, Result};

/// Tolerance of the `mu = min_j phi` identity.
pub const MIN_LINK_TOL: f64 = 1e-12;
/// Slack allowed in the monotone decay of `mu`.
pub const MU_DECAY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitState {
    pub n: usize,
    pub mu: SpatialField,
    pub phi: PhaseField,
}

#[derive(Debug, Clone)]
pub struct LimitScheme<'g> {
    grid: &'g GridSpec,
    stencil: TransportStencil,
    last_stencil: TransportStencil,
}

impl<'g> LimitScheme<'g> {
    pub fn new(grid: &'g GridSpec) -> Self {
        if !grid.satisfies_jump_condition() {
            log::warn!(
                "dt = {} exceeds dv^2/2 = {}; mu decay and the representation formula are not guaranteed",
                grid.dt(),
                0.5 * grid.dv() * grid.dv()
            );
        }
        Self {
            grid,
            stencil: TransportStencil::with_dt(grid, grid.dt()),
            last_stencil: TransportStencil::with_dt(grid, grid.step_dt(grid.n_t() - 1)),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    /// Whether the structural diagnostics (mu decay, oracle equality) apply.
    pub fn diagnostics_enabled(&self) -> bool {
        self.grid.satisfies_jump_condition()
    }

    fn stencil_for_step(&self, n: usize) -> &TransportStencil {
        if n + 1 == self.grid.n_t() {
            &self.last_stencil
        } else {
            &self.stencil
        }
    }

    pub fn init(&self, phi_in: impl FnMut(f64, f64) -> f64) -> Result<LimitState> {
        let phi = sample_initial(self.grid, phi_in)?;
        self.init_from_field(phi)
    }

    pub fn init_from_field(&self, phi: PhaseField) -> Result<LimitState> {
        check_field(self.grid, &phi)?;
        let mu = transport_all(&phi, self.stencil_for_step(0)).min_over_v();
        Ok(LimitState { n: 0, mu, phi })
    }

    pub fn transported(&self, state: &LimitState) -> PhaseField {
        transport_all(&state.phi, self.stencil_for_step(state.n))
    }

    pub fn step(&self, state: &LimitState) -> LimitState {
        let dt = self.grid.step_dt(state.n);
        let mut phi = self.transported(state);
        let mu = phi.min_over_v();
        for (j, &h) in self.grid.half_v2().iter().enumerate() {
            for (p, &m) in phi.row_mut(j).iter_mut().zip(mu.values()) {
                *p = (*p + dt).min(h + m);
            }
        }
        LimitState {
            n: state.n + 1,
            mu,
            phi,
        }
    }

    pub fn run(&self, state: LimitState, n_steps: usize) -> LimitState {
        (0..n_steps).fold(state, |s, _| self.step(&s))
    }

    pub fn run_to_end(&self, state: LimitState) -> LimitState {
        let remaining = self.grid.n_t().saturating_sub(state.n);
        self.run(state, remaining)
    }

    pub fn trajectory(&self, state: LimitState, n_steps: usize) -> Vec<LimitState> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(state);
        for _ in 0..n_steps {
            let next = self.step(out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// `max{(phi^{n+1} - phi-bar^n)/dt - 1, phi^{n+1} - v^2/2 - mu^{n+1}}`
    /// entrywise; vanishes for consecutive states of the scheme.
    pub fn variational_residual(&self, prev: &LimitState, next: &LimitState) -> PhaseField {
        let dt = self.grid.step_dt(prev.n);
        let shifted = self.transported(prev);
        let mut out = next.phi.clone();
        for (j, &h) in self.grid.half_v2().iter().enumerate() {
            let bar = shifted.row(j);
            for (i, r) in out.row_mut(j).iter_mut().enumerate() {
                let p = next.phi.get(i, j);
                *r = ((p - bar[i]) / dt - 1.0).max(p - h - next.mu[i]);
            }
        }
        out
    }
}

pub fn init_limit(phi_in: impl FnMut(f64, f64) -> f64, grid: &GridSpec) -> Result<LimitState> {
    LimitScheme::new(grid).init(phi_in)
}

pub fn step_limit(state: &LimitState, grid: &GridSpec) -> LimitState {
    LimitScheme::new(grid).step(state)
}

pub fn run_limit(state: LimitState, grid: &GridSpec, n_steps: usize) -> LimitState {
    LimitScheme::new(grid).run(state, n_steps)
}

pub fn variational_residual(prev: &LimitState, next: &LimitState, grid: &GridSpec) -> PhaseField {
    LimitScheme::new(grid).variational_residual(prev, next)
}

/// Result of [`check_min_link`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinLinkCheck {
    pub holds: bool,
    pub max_deviation: f64,
}

/// `max_i |mu_i - min_j phi_ij| <= 1e-12`. Only meaningful after one step.
pub fn check_min_link(state: &LimitState) -> Result<MinLinkCheck> {
    if state.n == 0 {
        return Err(Error::Precondition(
            "the min link only holds for n >= 1".into(),
        ));
    }
    let max_deviation = state.phi.min_over_v().max_abs_diff(&state.mu);
    Ok(MinLinkCheck {
        holds: max_deviation <= MIN_LINK_TOL,
        max_deviation,
    })
}

/// `mu^{n+1}_i <= mu^n_i + 1e-12` for all consecutive pairs after the first
/// entry, which is the `n = 1` state.
pub fn check_mu_decay(trajectory: &[SpatialField]) -> bool {
    trajectory.windows(2).all(|w| {
        w[1].values()
            .iter()
            .zip(w[0].values())
            .all(|(next, prev)| *next <= *prev + MU_DECAY_TOL)
    })
}
