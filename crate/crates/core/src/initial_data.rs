//! Named initial data used by the experiments.

use crate::discretization::GridSpec;

/// Value assigned away from the support of the Dirac surrogates.
pub const DIRAC_PLATEAU: f64 = 100.0;

/// `min{3(v-3)^2 + 5, 5(v+7)^2 + 2} + 0.9 cos(4 pi x v / (x_star v_star))`.
pub fn two_well_data_scaled(x: f64, v: f64, x_star: f64, v_star: f64) -> f64 {
    let wells = (3.0 * (v - 3.0).powi(2) + 5.0).min(5.0 * (v + 7.0).powi(2) + 2.0);
    wells + 0.9 * (4.0 * std::f64::consts::PI * x * v / (x_star * v_star)).cos()
}

/// [`two_well_data_scaled`] on the default domain `x_star = v_star = 10`.
pub fn two_well_data(x: f64, v: f64) -> f64 {
    two_well_data_scaled(x, v, 10.0, 10.0)
}

pub fn equilibrium(_x: f64, v: f64) -> f64 {
    0.5 * v * v
}

/// Zero on the `2 * half_width + 1` cells around the node nearest to `center`
/// (all velocities), [`DIRAC_PLATEAU`] elsewhere.
pub fn dirac(grid: &GridSpec, center: f64, half_width: usize) -> impl Fn(f64, f64) -> f64 {
    let c = grid.nearest_x_index(center);
    let n = grid.n_x() as isize;
    let support = (-(half_width as isize)..=half_width as isize)
        .map(|k| grid.x()[(c as isize + k).rem_euclid(n) as usize])
        .collect::<Vec<_>>();
    let tol = 0.25 * grid.dx();
    move |x, _v| {
        if support.iter().any(|&s| (x - s).abs() < tol) {
            0.0
        } else {
            DIRAC_PLATEAU
        }
    }
}

/// Two single-cell surrogates at the nodes nearest to `a` and `b`.
pub fn two_dirac(grid: &GridSpec, a: f64, b: f64) -> impl Fn(f64, f64) -> f64 {
    let first = dirac(grid, a, 0);
    let second = dirac(grid, b, 0);
    move |x, v| first(x, v).min(second(x, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_well_values() {
        // at v = 0 the cosine is 1 and the first well gives 32
        assert!((two_well_data(3.7, 0.0) - 32.9).abs() < 1e-12);
        // v = -7: second well vanishes
        let expected = 2.0 + 0.9 * (4.0 * std::f64::consts::PI * 1.0 * -7.0 / 100.0).cos();
        assert!((two_well_data(1.0, -7.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn dirac_support() {
        let grid = GridSpec::default_with_final_time(1.0).unwrap();
        let f = dirac(&grid, 0.0, 0);
        let c = grid.nearest_x_index(0.0);
        let zeros = grid.x().iter().filter(|&&x| f(x, 0.0) == 0.0).count();
        assert_eq!(zeros, 1);
        assert_eq!(f(grid.x()[c], 3.0), 0.0);
        assert_eq!(f(grid.x()[c + 1], 0.0), DIRAC_PLATEAU);
        let g = two_dirac(&grid, -4.0, 4.0);
        assert_eq!(grid.x().iter().filter(|&&x| g(x, 1.0) == 0.0).count(), 2);
    }
}
