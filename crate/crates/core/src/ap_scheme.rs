//! Asymptotic-preserving scheme for `(mu^eps, phi^eps)`.
//!
//! One step transports `phi` along characteristics with linear interpolation,
//! updates `mu` from the discrete mass (a stabilized log-sum-exp over
//! velocities) and then relaxes `phi` towards `v^2/2 + mu` through a soft
//! minimum. Every exponential is taken of a nonpositive argument, so the cost
//! and the stability of a step do not depend on `eps`.

use crate::discretization::{
    gaussian_norm_const, transport_all, GridSpec, PhaseField, SpatialField, TransportStencil,
};
use crate::error::{Error, Result};

/// Solution of the scheme at time index `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApState {
    pub eps: f64,
    pub n: usize,
    pub mu: SpatialField,
    pub phi: PhaseField,
}

/// Intermediate minima of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxMinima {
    pub little_m: SpatialField,
    pub big_m: PhaseField,
}

/// Scheme parameters tied to one grid and one `eps`.
#[derive(Debug, Clone)]
pub struct ApScheme<'g> {
    grid: &'g GridSpec,
    eps: f64,
    norm_const: f64,
    ln_norm_const: f64,
    stencil: TransportStencil,
    last_stencil: TransportStencil,
}

impl<'g> ApScheme<'g> {
    /// `eps` must lie in `(0, 1]`; the `eps = 0` limit is
    /// [`crate::limit_scheme::LimitScheme`].
    pub fn new(grid: &'g GridSpec, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 1], got {eps}"
            )));
        }
        let norm_const = gaussian_norm_const(eps, grid);
        Ok(Self {
            grid,
            eps,
            norm_const,
            ln_norm_const: norm_const.ln(),
            stencil: TransportStencil::with_dt(grid, grid.dt()),
            last_stencil: TransportStencil::with_dt(grid, grid.step_dt(grid.n_t() - 1)),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `c^eps_dv`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Value of `mu` at equilibrium, `-eps ln c^eps_dv`.
    pub fn equilibrium_mu(&self) -> f64 {
        -self.eps * self.ln_norm_const
    }

    fn stencil_for_step(&self, n: usize) -> &TransportStencil {
        if n + 1 == self.grid.n_t() {
            &self.last_stencil
        } else {
            &self.stencil
        }
    }

    /// Samples `phi_in` on the grid and sets `mu^0_i = min_j` of the
    /// transported initial data.
    pub fn init(&self, phi_in: impl FnMut(f64, f64) -> f64) -> Result<ApState> {
        let phi = sample_initial(self.grid, phi_in)?;
        let shifted = transport_all(&phi, self.stencil_for_step(0));
        Ok(ApState {
            eps: self.eps,
            n: 0,
            mu: compute_little_m(&shifted),
            phi,
        })
    }

    /// Starts from an already sampled field.
    pub fn init_from_field(&self, phi: PhaseField) -> Result<ApState> {
        check_field(self.grid, &phi)?;
        let shifted = transport_all(&phi, self.stencil_for_step(0));
        Ok(ApState {
            eps: self.eps,
            n: 0,
            mu: compute_little_m(&shifted),
            phi,
        })
    }

    /// Transported field `phi-bar` used by step `state.n`.
    pub fn transported(&self, state: &ApState) -> PhaseField {
        transport_all(&state.phi, self.stencil_for_step(state.n))
    }

    /// Advances one time step: `mu^{n+1}` first, then `phi^{n+1}`.
    pub fn step(&self, state: &ApState) -> ApState {
        self.advance(state).0
    }

    /// Like [`Self::step`], also returning `m^n` and `M^n`.
    pub fn step_with_minima(&self, state: &ApState) -> (ApState, AuxMinima) {
        let (next, shifted, little_m) = self.advance(state);
        let big_m = compute_big_m(&shifted, &next.mu, self.grid, self.grid.step_dt(state.n));
        (next, AuxMinima { little_m, big_m })
    }

    fn advance(&self, state: &ApState) -> (ApState, PhaseField, SpatialField) {
        let dt = self.grid.step_dt(state.n);
        let shifted = self.transported(state);
        let little_m = compute_little_m(&shifted);
        let mu = update_mu(&shifted, &little_m, self.eps, self.grid);
        let phi = self.relax(&shifted, &mu, dt);
        let next = ApState {
            eps: self.eps,
            n: state.n + 1,
            mu,
            phi,
        };
        (next, shifted, little_m)
    }

    /// Second line of the scheme. Written for the deviation `u = phi - v^2/2`
    /// and `mu + eps ln c`, where the normalization constant cancels:
    ///
    /// `u^{n+1} = -eps ln( e^{-dt/eps} e^{-u-bar/eps} + (1 - e^{-dt/eps}) e^{-(mu + eps ln c)/eps} )`
    ///
    /// which is algebraically the usual update. In this form `u-bar = 0`,
    /// `mu = -eps ln c` maps to `0` in floating point as well.
    fn relax(&self, shifted: &PhaseField, mu: &SpatialField, dt: f64) -> PhaseField {
        let eps = self.eps;
        let n_x = self.grid.n_x();
        let keep = (-dt / eps).exp();
        let jump = 1.0 - keep;
        let mu_dev = mu
            .values()
            .iter()
            .map(|&m| m + eps * self.ln_norm_const)
            .collect::<Vec<_>>();
        let mut out = PhaseField::filled(n_x, self.grid.n_v(), 0.0);
        for (j, &h) in self.grid.half_v2().iter().enumerate() {
            let src = shifted.row(j);
            let dst = out.row_mut(j);
            for i in 0..n_x {
                let transported = src[i] - h + dt;
                let relaxed = mu_dev[i];
                let floor = transported.min(relaxed);
                let sum = (-(transported - floor) / eps).exp()
                    + jump * (-(relaxed - floor) / eps).exp();
                let u = if sum > 0.0 {
                    floor - eps * sum.ln()
                } else {
                    transported
                };
                dst[i] = h + u;
            }
        }
        out
    }

    /// Applies `n_steps` steps.
    pub fn run(&self, state: ApState, n_steps: usize) -> ApState {
        (0..n_steps).fold(state, |s, _| self.step(&s))
    }

    /// Runs to the grid's final time from the state index onward.
    pub fn run_to_end(&self, state: ApState) -> ApState {
        let remaining = self.grid.n_t().saturating_sub(state.n);
        self.run(state, remaining)
    }

    /// Runs and records every state, including the initial one.
    pub fn trajectory(&self, state: ApState, n_steps: usize) -> Vec<ApState> {
        let mut out = Vec::with_capacity(n_steps + 1);
        out.push(state);
        for _ in 0..n_steps {
            let next = self.step(out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// Velocity indices that can hold `argmin_j phi-bar` for data with
    /// `|phi - v^2/2| <= m_bound` and spatial Lipschitz constant `lipschitz`.
    pub fn argmin_window(&self, m_bound: f64, lipschitz: f64) -> std::ops::RangeInclusive<usize> {
        argmin_window(self.grid, m_bound, lipschitz)
    }
}

/// Velocity window outside of which `v_j^2/2 - L dt |v_j| - M > M`, so that no
/// index there can realize the minimum over velocities.
pub fn argmin_window(
    grid: &GridSpec,
    m_bound: f64,
    lipschitz: f64,
) -> std::ops::RangeInclusive<usize> {
    let inside = |j: usize| {
        let v = grid.v()[j];
        grid.half_v2()[j] - lipschitz * grid.dt() * v.abs() <= 2.0 * m_bound
    };
    let lo = (0..grid.n_v()).find(|&j| inside(j)).unwrap_or(0);
    let hi = (0..grid.n_v()).rev().find(|&j| inside(j)).unwrap_or(grid.n_v() - 1);
    lo..=hi
}

pub(crate) fn sample_initial(
    grid: &GridSpec,
    mut phi_in: impl FnMut(f64, f64) -> f64,
) -> Result<PhaseField> {
    let mut bad = None;
    let phi = PhaseField::from_fn(grid, |x, v| {
        let value = phi_in(x, v);
        if !value.is_finite() && bad.is_none() {
            bad = Some((x, v));
        }
        value
    });
    match bad {
        Some((x, v)) => Err(Error::NonFiniteInitialValue { x, v }),
        None => Ok(phi),
    }
}

pub(crate) fn check_field(grid: &GridSpec, phi: &PhaseField) -> Result<()> {
    if phi.n_x() != grid.n_x() || phi.n_v() != grid.n_v() {
        return Err(Error::ShapeMismatch(format!(
            "field is {}x{}, grid is {}x{}",
            phi.n_x(),
            phi.n_v(),
            grid.n_x(),
            grid.n_v()
        )));
    }
    for j in 0..grid.n_v() {
        for i in 0..grid.n_x() {
            if !phi.get(i, j).is_finite() {
                return Err(Error::NonFiniteInitialValue {
                    x: grid.x()[i],
                    v: grid.v()[j],
                });
            }
        }
    }
    Ok(())
}

/// `m_i = min_j phi-bar_{ij}`.
pub fn compute_little_m(shifted: &PhaseField) -> SpatialField {
    shifted.min_over_v()
}

/// `mu_i = m_i - eps ln < exp(-(phi-bar_{i.} - m_i)/eps) >_dv`.
///
/// The term realizing `m_i` equals one, so the sum is at least `dv` and the
/// logarithm is finite for every `eps`.
pub fn update_mu(
    shifted: &PhaseField,
    little_m: &SpatialField,
    eps: f64,
    grid: &GridSpec,
) -> SpatialField {
    let n_x = shifted.n_x();
    let m = little_m.values();
    let mut sums = vec![0.0; n_x];
    // Summation order over j matches gaussian_norm_const.
    for j in 0..shifted.n_v() {
        for ((s, &p), &mi) in sums.iter_mut().zip(shifted.row(j)).zip(m) {
            *s += (-(p - mi) / eps).exp();
        }
    }
    let dv = grid.dv();
    SpatialField::new(
        sums.iter()
            .zip(m)
            .map(|(&s, &mi)| mi - eps * (s * dv).ln())
            .collect(),
    )
}

/// `M_ij = min{phi-bar_ij + dt, v_j^2/2 + mu^{n+1}_i}`.
pub fn compute_big_m(
    shifted: &PhaseField,
    mu_next: &SpatialField,
    grid: &GridSpec,
    dt: f64,
) -> PhaseField {
    let mut out = shifted.clone();
    for (j, &h) in grid.half_v2().iter().enumerate() {
        for (o, &mu) in out.row_mut(j).iter_mut().zip(mu_next.values()) {
            *o = (*o + dt).min(h + mu);
        }
    }
    out
}

/// Builds the initial state, see [`ApScheme::init`].
pub fn init_ap(
    phi_in: impl FnMut(f64, f64) -> f64,
    grid: &GridSpec,
    eps: f64,
) -> Result<ApState> {
    ApScheme::new(grid, eps)?.init(phi_in)
}

pub fn step_ap(state: &ApState, grid: &GridSpec) -> Result<ApState> {
    Ok(ApScheme::new(grid, state.eps)?.step(state))
}

pub fn run_ap(state: ApState, grid: &GridSpec, n_steps: usize) -> Result<ApState> {
    Ok(ApScheme::new(grid, state.eps)?.run(state, n_steps))
}
