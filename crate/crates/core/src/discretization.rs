//! Phase-space grids, velocity quadrature and the linear transport stencil.
//!
//! Positions are cell centers of a periodic domain `[-x_star, x_star]`,
//! velocities are cell centers of `[-v_star, v_star]` with an odd number of
//! points so that `v = 0` is a grid node. Fields are stored velocity-major:
//! row `j` holds the `n_x` spatial values at velocity `v_j`.

use crate::error::{Error, Result};

/// Relative tolerance used to decide that a CFL number is an integer.
const INTEGER_SHIFT_TOL: f64 = 1e-9;

/// Full discretization of the truncated periodic phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    x_star: f64,
    v_star: f64,
    n_x: usize,
    n_v: usize,
    dt: f64,
    t_final: f64,
    dx: f64,
    dv: f64,
    n_t: usize,
    last_dt: f64,
    x: Vec<f64>,
    v: Vec<f64>,
    half_v2: Vec<f64>,
}

impl GridSpec {
    pub fn new(
        x_star: f64,
        v_star: f64,
        n_x: usize,
        n_v: usize,
        dt: f64,
        t_final: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("x_star", x_star),
            ("v_star", v_star),
            ("dt", dt),
            ("T", t_final),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if n_x == 0 {
            return Err(Error::InvalidParameter("N_x must be positive".into()));
        }
        if n_v == 0 || n_v % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "N_v must be a positive odd integer, got {n_v}"
            )));
        }

        let dx = 2.0 * x_star / n_x as f64;
        let dv = 2.0 * v_star / n_v as f64;
        let x = (0..n_x)
            .map(|i| -x_star + (i as f64 + 0.5) * dx)
            .collect::<Vec<_>>();
        // Centered indexing keeps v = 0 bitwise exact.
        let center = (n_v / 2) as i64;
        let v = (0..n_v)
            .map(|j| (j as i64 - center) as f64 * dv)
            .collect::<Vec<_>>();
        let half_v2 = v.iter().map(|&v| 0.5 * v * v).collect();

        let ratio = t_final / dt;
        let nearest = ratio.round();
        let (n_t, last_dt) = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) && nearest >= 1.0
        {
            (nearest as usize, dt)
        } else {
            let full = ratio.floor();
            (full as usize + 1, t_final - full * dt)
        };

        Ok(Self {
            x_star,
            v_star,
            n_x,
            n_v,
            dt,
            t_final,
            dx,
            dv,
            n_t,
            last_dt,
            x,
            v,
            half_v2,
        })
    }

    /// The default desk grid: 64 cells in `[-10, 10]`, 61 velocities in
    /// `[-10, 10]`, `dt = 0.9 dv^2 / 2`.
    pub fn default_with_final_time(t_final: f64) -> Result<Self> {
        let dv = 20.0 / 61.0;
        Self::new(10.0, 10.0, 64, 61, 0.9 * dv * dv / 2.0, t_final)
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }
    pub fn v_star(&self) -> f64 {
        self.v_star
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_v(&self) -> usize {
        self.n_v
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn t_final(&self) -> f64 {
        self.t_final
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dv(&self) -> f64 {
        self.dv
    }
    /// Number of time steps needed to reach `t_final`.
    pub fn n_t(&self) -> usize {
        self.n_t
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    /// `v_j^2 / 2` for every velocity node.
    pub fn half_v2(&self) -> &[f64] {
        &self.half_v2
    }
    /// Index of the `v = 0` node.
    pub fn zero_velocity_index(&self) -> usize {
        self.n_v / 2
    }
    pub fn v_max(&self) -> f64 {
        self.v.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Length of step `n` (0-based). The last step is shortened when `T` is not
    /// a multiple of `dt`; steps past the final time use the nominal `dt`.
    pub fn step_dt(&self, n: usize) -> f64 {
        if n + 1 == self.n_t {
            self.last_dt
        } else {
            self.dt
        }
    }

    /// Time reached after `n` steps.
    pub fn time_at(&self, n: usize) -> f64 {
        if n >= self.n_t {
            self.t_final + (n - self.n_t) as f64 * self.dt
        } else {
            n as f64 * self.dt
        }
    }

    /// Index of the cell center nearest to `x` (lowest index on ties).
    pub fn nearest_x_index(&self, x: f64) -> usize {
        nearest_index(&self.x, x)
    }

    pub fn nearest_v_index(&self, v: f64) -> usize {
        nearest_index(&self.v, v)
    }

    /// Whether `v_j dt / dx` is an integer for every velocity, i.e. transport
    /// is a pure index shift.
    pub fn has_exact_transport(&self) -> bool {
        TransportStencil::with_dt(self, self.dt)
            .entries()
            .iter()
            .all(|e| e.alpha == 0.0)
    }

    /// Whether `dt <= dv^2 / 2`.
    pub fn satisfies_jump_condition(&self) -> bool {
        self.dt <= 0.5 * self.dv * self.dv * (1.0 + 1e-12)
    }
}

fn nearest_index(nodes: &[f64], target: f64) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (k, &node) in nodes.iter().enumerate() {
        let d = (node - target).abs();
        if d < best_dist {
            best = k;
            best_dist = d;
        }
    }
    best
}

/// Validating constructor, see [`GridSpec::new`].
pub fn build_grid(
    x_star: f64,
    v_star: f64,
    n_x: usize,
    n_v: usize,
    dt: f64,
    t_final: f64,
) -> Result<GridSpec> {
    GridSpec::new(x_star, v_star, n_x, n_v, dt, t_final)
}

/// Real values on the `(x_i, v_j)` nodes, stored velocity-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    n_x: usize,
    n_v: usize,
    values: Vec<f64>,
}

impl PhaseField {
    pub fn from_values(n_x: usize, n_v: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_x * n_v {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for a {n_x}x{n_v} field, got {}",
                n_x * n_v,
                values.len()
            )));
        }
        Ok(Self { n_x, n_v, values })
    }

    pub fn filled(n_x: usize, n_v: usize, value: f64) -> Self {
        Self {
            n_x,
            n_v,
            values: vec![value; n_x * n_v],
        }
    }

    /// Evaluates `f(x_i, v_j)` on every node.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_x * grid.n_v);
        for &v in grid.v() {
            for &x in grid.x() {
                values.push(f(x, v));
            }
        }
        Self {
            n_x: grid.n_x,
            n_v: grid.n_v,
            values,
        }
    }

    /// The equilibrium `v^2 / 2`.
    pub fn equilibrium(grid: &GridSpec) -> Self {
        let mut values = Vec::with_capacity(grid.n_x * grid.n_v);
        for &h in grid.half_v2() {
            values.extend(std::iter::repeat(h).take(grid.n_x));
        }
        Self {
            n_x: grid.n_x,
            n_v: grid.n_v,
            values,
        }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_v(&self) -> usize {
        self.n_v
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n_x + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[j * self.n_x + i] = value;
    }

    /// Spatial row at velocity index `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_x..(j + 1) * self.n_x]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.n_x..(j + 1) * self.n_x]
    }

    /// Values at spatial index `i` across all velocities.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.n_v).map(|j| self.get(i, j)).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_x == other.n_x && self.n_v == other.n_v
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n_x: self.n_x,
            n_v: self.n_v,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Adds `k` to every entry.
    pub fn shifted_by(&self, k: f64) -> Self {
        self.map(|v| v + k)
    }

    /// Periodic translation by `cells` spatial cells: `out(i) = self(i - cells)`.
    pub fn translated(&self, cells: isize) -> Self {
        let n = self.n_x as isize;
        let mut out = self.clone();
        for j in 0..self.n_v {
            let src = self.row(j);
            let dst = out.row_mut(j);
            for (i, d) in dst.iter_mut().enumerate() {
                *d = src[(i as isize - cells).rem_euclid(n) as usize];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm distance; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "field shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Minimum over velocities at each position.
    pub fn min_over_v(&self) -> SpatialField {
        let mut out = self.row(0).to_vec();
        for j in 1..self.n_v {
            for (o, &v) in out.iter_mut().zip(self.row(j)) {
                if v < *o {
                    *o = v;
                }
            }
        }
        SpatialField::new(out)
    }

    /// Largest adjacent difference `|phi(i+1, j) - phi(i, j)|` (periodic),
    /// divided by `dx`.
    pub fn spatial_lipschitz(&self, dx: f64) -> f64 {
        let mut best = 0.0_f64;
        for j in 0..self.n_v {
            let row = self.row(j);
            for i in 0..self.n_x {
                let next = row[(i + 1) % self.n_x];
                best = best.max((next - row[i]).abs());
            }
        }
        best / dx
    }
}

/// Real values on the spatial nodes `x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn filled(n_x: usize, value: f64) -> Self {
        Self {
            values: vec![value; n_x],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for SpatialField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Left-rectangle velocity quadrature `sum_j row_j * dv`.
pub fn velocity_quadrature(row: &[f64], dv: f64) -> f64 {
    row.iter().sum::<f64>() * dv
}

/// Discrete Gaussian mass `sum_j exp(-v_j^2 / (2 eps)) dv` over the truncated grid.
pub fn gaussian_norm_const(eps: f64, grid: &GridSpec) -> f64 {
    let terms = grid
        .half_v2()
        .iter()
        .map(|&h| (-h / eps).exp())
        .collect::<Vec<_>>();
    velocity_quadrature(&terms, grid.dv())
}

/// Shift data for one velocity: the foot `x_i - dt v_j` lies between
/// `x_{i - beta}` and `x_{i - beta - 1}`, at fraction `alpha` towards the latter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEntry {
    pub beta: i64,
    pub alpha: f64,
}

/// Per-velocity interpolation data for the transport step.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportStencil {
    dt: f64,
    entries: Vec<StencilEntry>,
}

impl TransportStencil {
    pub fn with_dt(grid: &GridSpec, dt: f64) -> Self {
        let entries = grid
            .v()
            .iter()
            .map(|&v| stencil_entry(v * dt / grid.dx()))
            .collect();
        Self { dt, entries }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn entries(&self) -> &[StencilEntry] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> StencilEntry {
        self.entries[j]
    }
}

/// Splits a CFL number into integer shift and fractional weight. Values within
/// a relative `1e-9` of an integer are snapped so that exact-transport grids
/// interpolate without rounding noise.
pub fn stencil_entry(cfl: f64) -> StencilEntry {
    let nearest = cfl.round();
    if (cfl - nearest).abs() <= INTEGER_SHIFT_TOL * nearest.abs().max(1.0) {
        return StencilEntry {
            beta: nearest as i64,
            alpha: 0.0,
        };
    }
    let beta = cfl.floor();
    StencilEntry {
        beta: beta as i64,
        alpha: cfl - beta,
    }
}

/// Stencil for the grid's nominal time step.
pub fn transport_stencil(grid: &GridSpec) -> TransportStencil {
    TransportStencil::with_dt(grid, grid.dt())
}

/// Writes the linear interpolation of `src` at the points `x_i - dt v` into
/// `out`, with periodic wrap. Each output lies between its two source values.
pub fn interpolate_row_into(src: &[f64], entry: StencilEntry, out: &mut [f64]) {
    let n = src.len();
    debug_assert_eq!(out.len(), n);
    if n == 0 {
        return;
    }
    let offset = entry.beta.rem_euclid(n as i64) as usize;
    // k0 = i - beta, k1 = i - beta - 1 (mod n)
    let mut k0 = (n - offset) % n;
    if entry.alpha == 0.0 {
        for o in out.iter_mut() {
            *o = src[k0];
            k0 += 1;
            if k0 == n {
                k0 = 0;
            }
        }
        return;
    }
    let alpha = entry.alpha;
    let mut k1 = (k0 + n - 1) % n;
    for o in out.iter_mut() {
        let a = src[k0];
        let b = src[k1];
        let value = a + alpha * (b - a);
        *o = if a <= b {
            value.clamp(a, b)
        } else {
            value.clamp(b, a)
        };
        k1 = k0;
        k0 += 1;
        if k0 == n {
            k0 = 0;
        }
    }
}

/// Transported row `j` of `field`: `out_i = interp(field_{., j})(x_i - dt v_j)`.
pub fn interpolate_shift(field: &PhaseField, stencil: &TransportStencil, j: usize) -> Vec<f64> {
    let mut out = vec![0.0; field.n_x()];
    interpolate_row_into(field.row(j), stencil.entry(j), &mut out);
    out
}

/// Applies [`interpolate_shift`] to every velocity row.
pub fn transport_all(field: &PhaseField, stencil: &TransportStencil) -> PhaseField {
    let mut out = PhaseField::filled(field.n_x(), field.n_v(), 0.0);
    for j in 0..field.n_v() {
        let entry = stencil.entry(j);
        let (src, dst) = (field.row(j), &mut out.values[j * field.n_x..(j + 1) * field.n_x]);
        interpolate_row_into(src, entry, dst);
    }
    out
}
