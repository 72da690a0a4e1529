//! Path-space evaluators for the limit problem: jump costs and actions of
//! piecewise-constant velocity paths, the one-step min-plus recursion over
//! grid velocities, a brute-force minimization over reduced (at most
//! three-segment) paths and the closed-form long-time kernel.
//!
//! Nothing here calls into the schemes; these are the independent side of the
//! cross-checks.

use crate::discretization::{GridSpec, PhaseField};
use crate::error::{Error, Result};

/// Cost of one time interval that ends at velocity `v` after starting at `w`:
/// `dt` of free transport when the velocity is kept (and nonzero), `v^2/2`
/// when it jumps.
pub fn jump_cost(w: f64, v: f64, dt: f64) -> f64 {
    if v == w {
        if v != 0.0 {
            dt
        } else {
            0.0
        }
    } else {
        0.5 * v * v
    }
}

/// Discrete action of a velocity sequence `w^0, ..., w^{N_t}` on the time grid.
pub fn discrete_action(velocities: &[f64], dt: f64) -> f64 {
    velocities
        .windows(2)
        .map(|w| jump_cost(w[0], w[1], dt))
        .sum()
}

/// Continuous action of a path with instantaneous jumps at `jump_times`
/// (strictly increasing, in `(0, T]`) to `velocities[1..]`, starting at
/// velocity `velocities[0]`.
pub fn continuous_action(jump_times: &[f64], velocities: &[f64], t_final: f64) -> Result<f64> {
    if velocities.len() != jump_times.len() + 1 {
        return Err(Error::ShapeMismatch(format!(
            "{} jump times need {} velocities, got {}",
            jump_times.len(),
            jump_times.len() + 1,
            velocities.len()
        )));
    }
    let mut previous = 0.0;
    for &s in jump_times {
        if !(s > previous || (s == previous && previous == 0.0 && s > 0.0)) || s > t_final {
            return Err(Error::InvalidParameter(format!(
                "jump times must be strictly increasing in (0, T], got {jump_times:?}"
            )));
        }
        previous = s;
    }
    let jumps: f64 = velocities[1..].iter().map(|w| 0.5 * w * w).sum();
    let mut running = 0.0;
    for (k, &w) in velocities.iter().enumerate() {
        let start = if k == 0 { 0.0 } else { jump_times[k - 1] };
        let end = jump_times.get(k).copied().unwrap_or(t_final);
        if w != 0.0 {
            running += end - start;
        }
    }
    Ok(jumps + running)
}

/// Both actions of one grid path and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionGap {
    pub continuous: f64,
    pub discrete: f64,
    pub jumps: usize,
}

impl ActionGap {
    pub fn gap(&self) -> f64 {
        (self.continuous - self.discrete).abs()
    }
}

/// Evaluates a grid path (velocity `w^k` held on `[k dt, (k+1) dt)`, `w^{N_t}`
/// reached at `T`) under both actions.
pub fn action_gap(velocities: &[f64], dt: f64) -> Result<ActionGap> {
    if velocities.is_empty() {
        return Err(Error::InvalidParameter("empty velocity sequence".into()));
    }
    let n_t = velocities.len() - 1;
    let mut jump_times = Vec::new();
    let mut states = vec![velocities[0]];
    for k in 1..=n_t {
        if velocities[k] != velocities[k - 1] {
            jump_times.push(k as f64 * dt);
            states.push(velocities[k]);
        }
    }
    let t_final = n_t as f64 * dt;
    Ok(ActionGap {
        continuous: continuous_action(&jump_times, &states, t_final)?,
        discrete: discrete_action(velocities, dt),
        jumps: jump_times.len(),
    })
}

/// Integer cell shift `w dt / dx`, or an error when the foot of the
/// characteristic falls between nodes.
fn exact_shift(w: f64, dt: f64, dx: f64) -> Result<isize> {
    let cfl = w * dt / dx;
    let shift = cfl.round();
    if (cfl - shift).abs() > 1e-9 * shift.abs().max(1.0) {
        return Err(Error::InexactTransport);
    }
    Ok(shift as isize)
}

/// `n_steps` of the min-plus recursion
/// `phi^{k+1}_j(x) = min_w [ phi^k_{j(w)}(x - dt w) + jump_cost(w, v_j, dt) ]`
/// by explicit enumeration of the source velocity. Requires `v_j dt / dx` to be
/// an integer for every velocity and every step length used.
pub fn dp_solve(phi0: &PhaseField, grid: &GridSpec, n_steps: usize) -> Result<PhaseField> {
    if phi0.n_x() != grid.n_x() || phi0.n_v() != grid.n_v() {
        return Err(Error::ShapeMismatch("initial field does not match grid".into()));
    }
    let n_x = grid.n_x() as isize;
    let mut phi = phi0.clone();
    for step in 0..n_steps {
        let dt = grid.step_dt(step);
        let shifts = grid
            .v()
            .iter()
            .map(|&w| exact_shift(w, dt, grid.dx()))
            .collect::<Result<Vec<_>>>()?;
        let mut next = phi.clone();
        for (j, &v) in grid.v().iter().enumerate() {
            for i in 0..grid.n_x() {
                let mut best = f64::INFINITY;
                for (k, &w) in grid.v().iter().enumerate() {
                    let src = (i as isize - shifts[k]).rem_euclid(n_x) as usize;
                    let candidate = phi.get(src, k) + jump_cost(w, v, dt);
                    if candidate < best {
                        best = candidate;
                    }
                }
                next.set(i, j, best);
            }
        }
        phi = next;
    }
    Ok(phi)
}

/// A path with an initial segment, one intermediate velocity and a final
/// velocity; the remaining `T - s0 - s1 - s2` is spent at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPath {
    pub y: f64,
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
}

impl ReducedPath {
    pub fn end_position(&self) -> f64 {
        self.y + self.s0 * self.w0 + self.s1 * self.w1 + self.s2 * self.w2
    }

    pub fn total_duration(&self) -> f64 {
        self.s0 + self.s1 + self.s2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    /// Initial cost plus action of the best path found.
    pub value: f64,
    pub path: Option<ReducedPath>,
    /// Velocity and duration spacing of the search lattice.
    pub velocity_resolution: f64,
    pub duration_resolution: f64,
}

/// Search lattice for [`reduced_action_min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchLattice {
    pub velocity_step: f64,
    pub velocity_max: f64,
    pub duration_step: f64,
}

impl SearchLattice {
    /// Velocities at a quarter of the grid spacing, durations at `dt`.
    pub fn from_grid(grid: &GridSpec) -> Self {
        Self {
            velocity_step: grid.dv() / 4.0,
            velocity_max: grid.v_star(),
            duration_step: grid.dt(),
        }
    }

    fn velocities(&self) -> Vec<f64> {
        let n = (self.velocity_max / self.velocity_step + 1e-9).floor() as i64;
        (-n..=n).map(|k| k as f64 * self.velocity_step).collect()
    }

    fn durations(&self, t_final: f64) -> Vec<f64> {
        let n = (t_final / self.duration_step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.duration_step).collect()
    }
}

/// Brute-force minimum of `phi_in(y, w0) + action` over the free-transport
/// path ending at `(x, v)` and over all lattice paths
/// `(w0, s0) -> (w1, s1) -> (v, s2)` with a rest segment filling up to `T`.
pub fn reduced_action_min(
    x: f64,
    v: f64,
    t_final: f64,
    phi_in: impl Fn(f64, f64) -> f64,
    lattice: SearchLattice,
) -> Result<ActionValue> {
    if !(t_final > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be positive, got {t_final}")));
    }
    let running = |w: f64, s: f64| if w != 0.0 { s } else { 0.0 };

    let free = ReducedPath {
        y: x - v * t_final,
        w0: v,
        w1: v,
        w2: v,
        s0: t_final,
        s1: 0.0,
        s2: 0.0,
    };
    let mut best_value = phi_in(free.y, v) + running(v, t_final);
    let mut best_path = free;

    let velocities = lattice.velocities();
    let durations = lattice.durations(t_final);
    let final_jump = 0.5 * v * v;
    for &s2 in &durations {
        let after_final = final_jump + running(v, s2);
        let rest2 = t_final - s2;
        for &w1 in &velocities {
            let jump1 = 0.5 * w1 * w1;
            for &s1 in durations.iter().take_while(|&&s| s <= rest2 + 1e-12) {
                // a zero-length or resting middle segment is only useful with w1 = 0
                if (s1 == 0.0 || w1 == 0.0) && !(s1 == 0.0 && w1 == 0.0) {
                    continue;
                }
                let partial = after_final + if s1 > 0.0 { jump1 + running(w1, s1) } else { 0.0 };
                if partial >= best_value {
                    continue;
                }
                let z = x - s2 * v - s1 * w1;
                let rest1 = rest2 - s1;
                for &w0 in &velocities {
                    for &s0 in durations.iter().take_while(|&&s| s <= rest1 + 1e-12) {
                        if w0 == 0.0 && s0 > 0.0 {
                            break;
                        }
                        let y = z - s0 * w0;
                        let value = partial + running(w0, s0) + phi_in(y, w0);
                        if value < best_value {
                            best_value = value;
                            best_path = ReducedPath { y, w0, w1, w2: v, s0, s1, s2 };
                        }
                    }
                }
            }
        }
    }

    Ok(ActionValue {
        value: best_value,
        path: Some(best_path),
        velocity_resolution: lattice.velocity_step,
        duration_resolution: lattice.duration_step,
    })
}

/// Minimal action from the origin to `x` in time `t`:
/// `3/2 |x|^{2/3}` inside the light cone `|x| <= t^{3/2}`, `x^2/(2t^2) + t` outside.
pub fn continuous_kernel(t: f64, x: f64) -> f64 {
    let ax = x.abs();
    if ax <= t.powf(1.5) {
        1.5 * ax.powf(2.0 / 3.0)
    } else {
        ax * ax / (2.0 * t * t) + t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_grid;

    #[test]
    fn jump_cost_examples() {
        assert_eq!(jump_cost(0.0, 0.0, 0.4), 0.0);
        assert_eq!(jump_cost(1.0, 1.0, 0.4), 0.4);
        assert_eq!(jump_cost(0.0, 2.0, 0.4), 2.0);
        assert_eq!(jump_cost(3.0, 0.0, 0.4), 0.0);
    }

    #[test]
    fn discrete_action_examples() {
        assert_eq!(discrete_action(&[0.0; 6], 0.1), 0.0);
        assert!((discrete_action(&[1.5; 6], 0.1) - 0.5).abs() < 1e-15);
        assert_eq!(discrete_action(&[0.0, 0.0, 2.0, 2.0], 0.5), 2.5);
    }

    #[test]
    fn continuous_action_examples() {
        assert_eq!(continuous_action(&[], &[0.0], 2.0).unwrap(), 0.0);
        assert_eq!(continuous_action(&[], &[1.3], 2.0).unwrap(), 2.0);
        // jump at s from w0 to w1, held to T
        let (s, t) = (0.7, 2.0);
        let w1: f64 = 1.2;
        let expected = 0.5 * w1 * w1 + (t - s);
        assert!((continuous_action(&[s], &[0.0, w1], t).unwrap() - expected).abs() < 1e-15);
        let expected = 0.5 * w1 * w1 + (t - s) + s;
        assert!((continuous_action(&[s], &[-0.4, w1], t).unwrap() - expected).abs() < 1e-15);
        assert!(continuous_action(&[0.5, 0.5], &[0.0, 1.0, 2.0], 1.0).is_err());
        assert!(continuous_action(&[0.5], &[0.0], 1.0).is_err());
    }

    #[test]
    fn action_gap_examples() {
        let zero = action_gap(&[0.0; 5], 0.25).unwrap();
        assert_eq!(zero.gap(), 0.0);
        let one = action_gap(&[0.0, 0.0, 1.0, 1.0, 1.0], 0.25).unwrap();
        assert_eq!(one.jumps, 1);
        assert!(one.gap() <= 0.25 + 1e-15);
        let two = action_gap(&[1.0, 1.0, -2.0, -2.0, 0.0], 0.25).unwrap();
        assert_eq!(two.jumps, 2);
        assert!(two.gap() <= 0.5 + 1e-15);
    }

    #[test]
    fn dp_rejects_inexact_transport() {
        let grid = build_grid(2.0, 2.5, 8, 5, 0.3, 0.3).unwrap();
        let phi = PhaseField::filled(8, 5, 0.0);
        assert_eq!(dp_solve(&phi, &grid, 1), Err(Error::InexactTransport));
    }

    #[test]
    fn dp_hand_case_and_equilibrium() {
        let grid = build_grid(1.0, 1.5, 4, 3, 0.4, 0.4).unwrap();
        // dx = 0.5, so v dt / dx = 0.8 v is not integral; widen the cells
        assert!(!grid.has_exact_transport());
        let grid = build_grid(0.8, 1.5, 4, 3, 0.4, 0.4).unwrap();
        assert!(grid.has_exact_transport());
        let phi0 = PhaseField::from_fn(&grid, |_, v| if v < -0.5 { 2.0 } else if v < 0.5 { 1.0 } else { 3.0 });
        let phi1 = dp_solve(&phi0, &grid, 1).unwrap();
        for i in 0..4 {
            assert_eq!(phi1.column(i), vec![1.5, 1.0, 1.5]);
        }
        let eq = PhaseField::equilibrium(&grid);
        assert_eq!(dp_solve(&eq, &grid, 3).unwrap(), eq);
    }

    #[test]
    fn kernel_examples_and_continuity() {
        assert_eq!(continuous_kernel(1.0, 0.0), 0.0);
        assert!((continuous_kernel(1.0, 1.0) - 1.5).abs() < 1e-15);
        assert!((continuous_kernel(1.0, 2.0) - 3.0).abs() < 1e-15);
        for t in [0.3f64, 1.0, 2.0, 3.0, 7.5] {
            let edge = t.powf(1.5);
            let inner = 1.5 * edge.powf(2.0 / 3.0);
            let outer = edge * edge / (2.0 * t * t) + t;
            assert!((inner - 1.5 * t).abs() < 1e-12);
            assert!((outer - 1.5 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_action_trivial_cases() {
        let lattice = SearchLattice {
            velocity_step: 0.25,
            velocity_max: 2.0,
            duration_step: 0.25,
        };
        let r = reduced_action_min(0.0, 0.0, 1.0, |_, _| 0.0, lattice).unwrap();
        assert_eq!(r.value, 0.0);

        // free transport is optimal when the data favors w0 = v
        let v = 1.5;
        let t = 1.0;
        let phi_in = |y: f64, w: f64| 4.0 * (w - v).abs() + 2.0 * y.abs();
        let r = reduced_action_min(v * t, v, t, phi_in, lattice).unwrap();
        assert!((r.value - (phi_in(0.0, v) + t)).abs() < 1e-12);
        let path = r.path.unwrap();
        assert!((path.end_position() - v * t).abs() < 1e-10);
        assert!(reduced_action_min(0.0, 0.0, 0.0, |_, _| 0.0, lattice).is_err());
    }
}
