use kinetic_hj::discretization::{interpolate_shift, transport_all, TransportStencil};
use kinetic_hj::{build_grid, GridSpec, PhaseField};
use proptest::prelude::*;

fn grid_and_field() -> impl Strategy<Value = (GridSpec, PhaseField)> {
    (4usize..24, 1usize..6, 0.01f64..0.5)
        .prop_flat_map(|(n_x, half_v, dt)| {
            let n_v = 2 * half_v + 1;
            let grid = build_grid(3.0, 2.0, n_x, n_v, dt, dt).unwrap();
            let values = prop::collection::vec(-10.0f64..10.0, n_x * n_v);
            (Just(grid), values)
        })
        .prop_map(|(grid, values)| {
            let field = PhaseField::from_values(grid.n_x(), grid.n_v(), values).unwrap();
            (grid, field)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_between_its_two_sources((grid, phi) in grid_and_field()) {
        let stencil = TransportStencil::with_dt(&grid, grid.dt());
        let n = grid.n_x() as i64;
        for j in 0..grid.n_v() {
            let e = stencil.entry(j);
            let row = phi.row(j);
            let out = interpolate_shift(&phi, &stencil, j);
            for i in 0..grid.n_x() {
                let a = row[(i as i64 - e.beta).rem_euclid(n) as usize];
                let b = row[(i as i64 - e.beta - 1).rem_euclid(n) as usize];
                prop_assert!(out[i] >= a.min(b) && out[i] <= a.max(b));
            }
            let sup_in = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let sup_out = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            prop_assert!(sup_out <= sup_in);
        }
    }

    #[test]
    fn commutes_with_constants_and_translations((grid, phi) in grid_and_field(), k in -50.0f64..50.0) {
        let stencil = TransportStencil::with_dt(&grid, grid.dt());
        let base = transport_all(&phi, &stencil);
        let lifted = transport_all(&phi.shifted_by(k), &stencil);
        prop_assert!(lifted.max_abs_diff(&base.shifted_by(k)) <= 1e-12 * (1.0 + k.abs()));
        let moved = transport_all(&phi.translated(1), &stencil);
        prop_assert_eq!(moved, base.translated(1));
    }

    #[test]
    fn monotone((grid, phi) in grid_and_field(), bump in prop::collection::vec(0.0f64..3.0, 1..200)) {
        let stencil = TransportStencil::with_dt(&grid, grid.dt());
        let mut psi = phi.clone();
        for (k, p) in psi.values_mut().iter_mut().enumerate() {
            *p += bump[k % bump.len()];
        }
        let a = transport_all(&phi, &stencil);
        let b = transport_all(&psi, &stencil);
        prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| x <= y));
    }

    #[test]
    fn exact_grids_shift_indices(n_x in 4usize..32, shift in 1usize..4, half_v in 1usize..4, seed in prop::collection::vec(-5.0f64..5.0, 1..64)) {
        // dv = 1, dt = shift * dx: v_j dt / dx = shift * v_j
        let n_v = 2 * half_v + 1;
        let dx = 0.25;
        let grid = build_grid(0.5 * dx * n_x as f64, 0.5 * n_v as f64, n_x, n_v, shift as f64 * dx, 1.0).unwrap();
        prop_assert!(grid.has_exact_transport());
        let phi = PhaseField::from_fn(&grid, |x, v| seed[((x / dx).floor() as i64 + 3 * v as i64).rem_euclid(seed.len() as i64) as usize]);
        let out = transport_all(&phi, &TransportStencil::with_dt(&grid, grid.dt()));
        for (j, &v) in grid.v().iter().enumerate() {
            let cells = (v * shift as f64).round() as isize;
            let expected = phi.translated(cells);
            prop_assert_eq!(out.row(j), expected.row(j));
        }
    }
}
