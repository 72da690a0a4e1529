//! Explicit upwind / explicit relaxation scheme for the scaled kinetic
//! equation `eps d_t f + v d_x f = (rho M^eps - f) / eps`, written on `f`
//! itself. It is the non-AP baseline: its time step scales with `eps` and the
//! Hopf-Cole read-back loses the tails once they fall below machine range.

use crate::discretization::{velocity_quadrature, GridSpec, PhaseField};
use crate::error::{Error, Result};

/// CFL safety factor.
pub const CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub eps: f64,
    pub n: usize,
    pub f: PhaseField,
}

/// `f_ij = exp(-phi_in(x_i, v_j) / eps)`; underflow to zero is allowed.
pub fn init_kinetic(
    mut phi_in: impl FnMut(f64, f64) -> f64,
    grid: &GridSpec,
    eps: f64,
) -> Result<KineticState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let f = PhaseField::from_fn(grid, |x, v| (-phi_in(x, v) / eps).exp());
    Ok(KineticState { eps, n: 0, f })
}

/// `0.9 min(dx / max|v|, eps)`.
pub fn cfl_max_dt(grid: &GridSpec, eps: f64) -> f64 {
    let v_max = grid.v_max();
    let transport = if v_max > 0.0 {
        grid.dx() / v_max
    } else {
        f64::INFINITY
    };
    CFL_SAFETY * transport.min(eps)
}

/// Normalized discrete Maxwellian `M_j = exp(-v_j^2 / (2 eps)) / <exp(-v^2/(2 eps))>_dv`.
pub fn discrete_maxwellian(grid: &GridSpec, eps: f64) -> Vec<f64> {
    let raw = grid
        .half_v2()
        .iter()
        .map(|&h| (-h / eps).exp())
        .collect::<Vec<_>>();
    let c = 1.0 / velocity_quadrature(&raw, grid.dv());
    raw.into_iter().map(|m| c * m).collect()
}

/// `sum_ij f_ij dx dv`.
pub fn total_mass(f: &PhaseField, grid: &GridSpec) -> f64 {
    f.values().iter().sum::<f64>() * grid.dx() * grid.dv()
}

/// Density `rho_i = <f_i.>_dv`.
pub fn density(f: &PhaseField, grid: &GridSpec) -> Vec<f64> {
    let mut rho = vec![0.0; f.n_x()];
    for j in 0..f.n_v() {
        for (r, &v) in rho.iter_mut().zip(f.row(j)) {
            *r += v;
        }
    }
    rho.iter_mut().for_each(|r| *r *= grid.dv());
    rho
}

/// Upwind scheme with one explicit step of length `dt`.
#[derive(Debug, Clone)]
pub struct UpwindScheme<'g> {
    grid: &'g GridSpec,
    eps: f64,
    maxwellian: Vec<f64>,
}

impl<'g> UpwindScheme<'g> {
    /// Fails if the grid's nominal `dt` exceeds [`cfl_max_dt`].
    pub fn new(grid: &'g GridSpec, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        let max_dt = cfl_max_dt(grid, eps);
        if grid.dt() > max_dt * (1.0 + 1e-12) {
            return Err(Error::CflViolation {
                dt: grid.dt(),
                max_dt,
            });
        }
        Ok(Self {
            grid,
            eps,
            maxwellian: discrete_maxwellian(grid, eps),
        })
    }

    pub fn maxwellian(&self) -> &[f64] {
        &self.maxwellian
    }

    pub fn step(&self, state: &KineticState) -> KineticState {
        let grid = self.grid;
        let dt = grid.step_dt(state.n);
        let n_x = grid.n_x();
        let rho = density(&state.f, grid);
        let courant = dt / grid.dx();
        let relax = dt / self.eps;
        let mut out = state.f.clone();
        for (j, &v) in grid.v().iter().enumerate() {
            let src = state.f.row(j);
            let dst = out.row_mut(j);
            let m = self.maxwellian[j];
            for i in 0..n_x {
                let here = src[i];
                let flux = if v > 0.0 {
                    v * (here - src[(i + n_x - 1) % n_x])
                } else {
                    v * (src[(i + 1) % n_x] - here)
                };
                dst[i] = here - courant * flux + relax * (rho[i] * m - here);
            }
        }
        KineticState {
            eps: self.eps,
            n: state.n + 1,
            f: out,
        }
    }

    pub fn run(&self, state: KineticState, n_steps: usize) -> KineticState {
        (0..n_steps).fold(state, |s, _| self.step(&s))
    }

    pub fn run_to_end(&self, state: KineticState) -> KineticState {
        let remaining = self.grid.n_t().saturating_sub(state.n);
        self.run(state, remaining)
    }
}

/// One step; errors when the grid step violates the CFL bound.
pub fn step_upwind(state: &KineticState, grid: &GridSpec) -> Result<KineticState> {
    Ok(UpwindScheme::new(grid, state.eps)?.step(state))
}

/// `psi_ij = -eps ln(max(f_ij, f64::MIN_POSITIVE))`.
pub fn hopf_cole_of_f(state: &KineticState) -> PhaseField {
    let eps = state.eps;
    state.f.map(|f| -eps * f.max(f64::MIN_POSITIVE).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;
    use crate::initial_data::two_well_data;
    use approx::assert_relative_eq;

    #[test]
    fn init_examples() {
        let grid = build_grid(2.0, 2.5, 8, 5, 0.01, 0.1).unwrap();
        let s = init_kinetic(|_, _| 0.0, &grid, 0.3).unwrap();
        assert!(s.f.values().iter().all(|&f| f == 1.0));
        let g = init_kinetic(|_, v| 0.5 * v * v, &grid, 1.0).unwrap();
        for (j, &v) in grid.v().iter().enumerate() {
            assert_relative_eq!(g.f.get(3, j), (-0.5 * v * v).exp());
        }
        let big = GridSpec::default_with_final_time(0.1).unwrap();
        let p = init_kinetic(two_well_data, &big, 0.01).unwrap();
        assert!(p.f.values().iter().all(|f| f.is_finite() && *f >= 0.0));
        assert!(hopf_cole_of_f(&p).is_finite());
    }

    #[test]
    fn cfl_examples() {
        let grid = GridSpec::default_with_final_time(1.0).unwrap();
        let expected = 0.9 * grid.dx() / grid.v_max();
        assert_relative_eq!(cfl_max_dt(&grid, 1.0), expected, max_relative = 1e-15);
        assert_relative_eq!(cfl_max_dt(&grid, 1e-6), 0.9e-6, max_relative = 1e-15);
        let single = build_grid(1.0, 0.5, 4, 1, 0.1, 0.1).unwrap();
        assert_relative_eq!(cfl_max_dt(&single, 0.2), 0.18);
    }

    #[test]
    fn rejects_cfl_violation() {
        let grid = GridSpec::default_with_final_time(1.0).unwrap();
        let s = init_kinetic(two_well_data, &grid, 1e-3).unwrap();
        assert!(matches!(step_upwind(&s, &grid), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn maxwellian_fixed_point() {
        let grid = build_grid(2.0, 2.5, 8, 5, 0.05, 0.5).unwrap();
        let eps = 0.8;
        let scheme = UpwindScheme::new(&grid, eps).unwrap();
        let m = scheme.maxwellian().to_vec();
        let f = PhaseField::from_fn(&grid, |_, v| {
            let j = grid.nearest_v_index(v);
            2.0 * m[j]
        });
        let s = KineticState { eps, n: 0, f: f.clone() };
        let next = scheme.step(&s);
        assert!(next.f.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn one_step_from_uniform_three_velocities() {
        // v in {-1, 0, 1}, dv = 1, f = 1 everywhere: rho = 3, transport vanishes.
        let grid = build_grid(2.0, 1.5, 4, 3, 0.1, 0.1).unwrap();
        let eps = 0.5;
        let s = KineticState {
            eps,
            n: 0,
            f: PhaseField::filled(4, 3, 1.0),
        };
        let next = step_upwind(&s, &grid).unwrap();
        let e = (-1.0f64).exp(); // exp(-1/(2*0.5))
        let c = 1.0 / (1.0 + 2.0 * e);
        let expected = [c * e, c, c * e].map(|m| 1.0 + 0.1 / eps * (3.0 * m - 1.0));
        for i in 0..4 {
            for j in 0..3 {
                assert_relative_eq!(next.f.get(i, j), expected[j], max_relative = 1e-14);
            }
        }
        // the v = 0 population grows, the others shrink
        assert!(expected[1] > 1.0 && expected[0] < 1.0);
    }

    #[test]
    fn mass_is_conserved() {
        let grid = GridSpec::default_with_final_time(1.0).unwrap();
        let eps = 1.0;
        let dt = cfl_max_dt(&grid, eps);
        let grid = build_grid(10.0, 10.0, 64, 61, dt, 1.0).unwrap();
        let scheme = UpwindScheme::new(&grid, eps).unwrap();
        let mut s = init_kinetic(|x, v| 0.5 * v * v + (0.4 * x).sin(), &grid, eps).unwrap();
        for _ in 0..20 {
            let before = total_mass(&s.f, &grid);
            s = scheme.step(&s);
            let after = total_mass(&s.f, &grid);
            assert!(((after - before) / before).abs() < 1e-10);
            assert!(s.f.values().iter().all(|&f| f >= 0.0));
        }
    }

    #[test]
    fn hopf_cole_examples() {
        let grid = build_grid(2.0, 2.5, 8, 5, 0.01, 0.1).unwrap();
        let eps = 0.25;
        let one = KineticState { eps, n: 0, f: PhaseField::filled(8, 5, 1.0) };
        assert!(hopf_cole_of_f(&one).values().iter().all(|&p| p == 0.0));
        let five = KineticState {
            eps,
            n: 0,
            f: PhaseField::filled(8, 5, (-5.0f64 / eps).exp()),
        };
        assert!(hopf_cole_of_f(&five).values().iter().all(|&p| (p - 5.0).abs() < 1e-12));

        let phi_in = |x: f64, v: f64| 0.5 * v * v + x.cos();
        let s = init_kinetic(phi_in, &grid, eps).unwrap();
        let back = hopf_cole_of_f(&s);
        let direct = PhaseField::from_fn(&grid, phi_in);
        assert!(back.max_abs_diff(&direct) < 1e-12);

        let zero = KineticState { eps: 1.0, n: 0, f: PhaseField::filled(2, 1, 0.0) };
        let psi = hopf_cole_of_f(&zero);
        assert!((psi.get(0, 0) - 708.3964185322641).abs() < 1e-9);
    }
}
