//! Finite-difference solver on the truncated rectangle `[0, a] × [-b/2, b/2]`.
//!
//! Tensor-product grid, five-point Laplacian in finite-volume form,
//! Crank–Nicolson in time with a backward-Euler
//! startup. Boundary conditions:
//!
//! * `x = 0, y > 0`: temperature `T0 f0(t)`;
//! * `x = 0, y < 0`: `∂T/∂x = T0' g0(t)`, i.e. an inward heat flux `-T0' g0`;
//! * the three artificial edges: zero flux.
//!
//! Backward Euler with step `dt/2` and Crank–Nicolson with step `dt` share
//! the matrix `M + (dt/2) K`, which is factored once (banded Cholesky).

use std::io::Write;

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::field::{linspace, temperature_at, EvalConfig};
use crate::model::ProblemSpec;
use crate::time_kernels::ForcingProfile;

/// Geometry and resolution.
///
/// Nodes are vertex-centred in `x` (the surface `x = 0` carries nodes) and
/// cell-centred in `y`, so the junction `y = 0` falls on a cell face
/// between a temperature node and a flux node. With `grading > 1` the
/// spacing shrinks towards `x = 0` and `y = 0` like `s = L ξ^grading`; `h`
/// is then the spacing of the uniform parameter grid `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdGrid {
    /// Depth in `x`.
    pub a: f64,
    /// Width in `y`; the domain is `y ∈ [-b/2, b/2]`.
    pub b: f64,
    pub h: f64,
    pub dt: f64,
    pub grading: f64,
}

impl Default for FdGrid {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 2.0,
            h: 0.01,
            dt: 1e-4,
            grading: 2.0,
        }
    }
}

impl FdGrid {
    pub fn with_resolution(h: f64, dt: f64) -> Self {
        Self {
            h,
            dt,
            ..Self::default()
        }
    }

    pub fn with_grading(mut self, grading: f64) -> Self {
        self.grading = grading;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("h", self.h), ("dt", self.dt)] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.grading >= 1.0 && self.grading <= 4.0) {
            return Err(Error::InvalidInput(format!(
                "grading must lie in [1, 4], got {}",
                self.grading
            )));
        }
        for (name, len) in [("a", self.a), ("b / 2", 0.5 * self.b)] {
            let cells = len / self.h;
            if (cells - cells.round()).abs() > 1e-6 * cells.max(1.0) || cells.round() < 2.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} = {len} must be a multiple of h = {} (at least two cells)",
                    self.h
                )));
            }
        }
        Ok(())
    }

    /// Number of nodes along `x`.
    pub fn nx(&self) -> usize {
        (self.a / self.h).round() as usize + 1
    }

    /// Number of nodes along `y`.
    pub fn ny(&self) -> usize {
        2 * (0.5 * self.b / self.h).round() as usize
    }

    fn graded(&self, len: f64, k: usize, cells: usize) -> f64 {
        if k == cells {
            len
        } else {
            len * (k as f64 / cells as f64).powf(self.grading)
        }
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        let cells = self.nx() - 1;
        (0..=cells).map(|i| self.graded(self.a, i, cells)).collect()
    }

    /// Cell faces along `y`, from `-b/2` to `b/2`; the middle one is `y = 0`.
    pub fn y_faces(&self) -> Vec<f64> {
        let half = self.ny() / 2;
        let len = 0.5 * self.b;
        (0..=2 * half)
            .map(|k| {
                if k < half {
                    -self.graded(len, half - k, half)
                } else {
                    self.graded(len, k - half, half)
                }
            })
            .collect()
    }

    pub fn y_nodes(&self) -> Vec<f64> {
        self.y_faces().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Knobs of the time stepping and linear solves.
#[derive(Debug, Clone, PartialEq)]
pub struct FdOptions {
    /// Backward-Euler half steps taken before switching to Crank–Nicolson.
    pub startup_half_steps: usize,
    /// Times at which to keep a copy of the field.
    pub snapshot_times: Vec<f64>,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            startup_half_steps: 2,
            snapshot_times: Vec::new(),
        }
    }
}

/// The field at one instant. Values are stored row-major with rows along
/// `y`: `values[j * nx + i]` is the node `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdState {
    pub time: f64,
    pub grid: FdGrid,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

/// Cell index and fraction of `v` among the sorted `nodes`, clamped to the
/// end cells.
fn locate(nodes: &[f64], v: f64) -> (usize, f64) {
    let n = nodes.len();
    let k = nodes.partition_point(|&p| p <= v).clamp(1, n - 1) - 1;
    let s = ((v - nodes[k]) / (nodes[k + 1] - nodes[k])).clamp(0.0, 1.0);
    (k, s)
}

impl FdState {
    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    /// Bilinear interpolation. Between the outermost `y` nodes and the wall
    /// the value is held constant, consistent with the zero-flux condition.
    pub fn sample(&self, x: f64, y: f64) -> Result<f64> {
        let g = &self.grid;
        let eps = 1e-9;
        if !(x >= -eps && x <= g.a + eps && y.abs() <= 0.5 * g.b + eps) {
            return Err(Error::InvalidInput(format!(
                "point ({x}, {y}) lies outside the finite-difference domain"
            )));
        }
        let (i, sx) = locate(&self.xs, x);
        let (j, sy) = locate(&self.ys, y);
        let v00 = self.node(i, j);
        let v10 = self.node(i + 1, j);
        let v01 = self.node(i, j + 1);
        let v11 = self.node(i + 1, j + 1);
        Ok((1.0 - sy) * ((1.0 - sx) * v00 + sx * v10) + sy * ((1.0 - sx) * v01 + sx * v11))
    }

    /// Largest `|T|` on the far edge `x = a`.
    pub fn far_boundary_max(&self) -> f64 {
        let nx = self.xs.len();
        (0..self.ys.len())
            .map(|j| self.node(nx - 1, j).abs())
            .fold(0.0, f64::max)
    }

    /// CSV dump with header `x,y,temperature`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y,temperature")?;
        for (j, y) in self.ys.iter().enumerate() {
            for (i, x) in self.xs.iter().enumerate() {
                writeln!(w, "{x:.11e},{y:.11e},{:.11e}", self.node(i, j))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FdSolution {
    pub state: FdState,
    pub snapshots: Vec<FdState>,
    pub steps: usize,
}

fn profile_value(profile: &ForcingProfile, t: f64, which: &str) -> Result<f64> {
    profile.value(t).ok_or_else(|| {
        Error::InvalidInput(format!(
            "{which} has no time-domain values; the finite-difference solver needs them"
        ))
    })
}

/// Discrete operator: lumped mass, edge conductances and the boundary masks.
struct Operator {
    xs: Vec<f64>,
    ys: Vec<f64>,
    nx: usize,
    ny: usize,
    mass: Vec<f64>,
    /// Conductance of the edge `(i, j)–(i+1, j)`.
    cx: Vec<f64>,
    /// Conductance of the edge `(i, j)–(i, j+1)`.
    cy: Vec<f64>,
    dirichlet: Vec<bool>,
    /// Weight of the prescribed flux per node (zero off the flux boundary).
    flux_weight: Vec<f64>,
}

impl Operator {
    fn new(grid: &FdGrid) -> Self {
        let xs = grid.x_nodes();
        let faces = grid.y_faces();
        let ys = grid.y_nodes();
        let (nx, ny) = (xs.len(), ys.len());
        // Width of the dual cell around each x node, and height of each y cell.
        let wx: Vec<f64> = (0..nx)
            .map(|i| 0.5 * (xs[(i + 1).min(nx - 1)] - xs[i.saturating_sub(1)]))
            .collect();
        let wy: Vec<f64> = faces.windows(2).map(|w| w[1] - w[0]).collect();
        let n = nx * ny;
        let mut mass = vec![0.0; n];
        let mut cx = vec![0.0; n];
        let mut cy = vec![0.0; n];
        let mut dirichlet = vec![false; n];
        let mut flux_weight = vec![0.0; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                mass[k] = wx[i] * wy[j];
                if i + 1 < nx {
                    cx[k] = wy[j] / (xs[i + 1] - xs[i]);
                }
                if j + 1 < ny {
                    cy[k] = wx[i] / (ys[j + 1] - ys[j]);
                }
                if i == 0 {
                    if ys[j] > 0.0 {
                        dirichlet[k] = true;
                    } else {
                        flux_weight[k] = wy[j];
                    }
                }
            }
        }
        Self {
            xs,
            ys,
            nx,
            ny,
            mass,
            cx,
            cy,
            dirichlet,
            flux_weight,
        }
    }

    /// `out = K u` over all nodes (the graph Laplacian, positive semi-definite).
    fn stiffness(&self, u: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.ny {
            for i in 0..nx {
                let k = j * nx + i;
                if i + 1 < nx {
                    let f = self.cx[k] * (u[k] - u[k + 1]);
                    out[k] += f;
                    out[k + 1] -= f;
                }
                if j + 1 < self.ny {
                    let f = self.cy[k] * (u[k] - u[k + nx]);
                    out[k] += f;
                    out[k + nx] -= f;
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let nx = self.nx;
        let mut d = vec![0.0; self.mass.len()];
        for j in 0..self.ny {
            for i in 0..nx {
                let k = j * nx + i;
                if i + 1 < nx {
                    d[k] += self.cx[k];
                    d[k + 1] += self.cx[k];
                }
                if j + 1 < self.ny {
                    d[k] += self.cy[k];
                    d[k + nx] += self.cy[k];
                }
            }
        }
        d
    }
}

/// Boundary data at one time: Dirichlet level and prescribed `∂T/∂x`.
#[derive(Debug, Clone, Copy)]
struct BoundaryData {
    level: f64,
    gradient: f64,
}

impl BoundaryData {
    fn at(spec: &ProblemSpec, t: f64) -> Result<Self> {
        Ok(Self {
            level: spec.t0 * profile_value(&spec.f0, t, "f0")?,
            gradient: spec.t0_prime * profile_value(&spec.g0, t, "g0")?,
        })
    }
}

/// Banded Cholesky factor `L` of `M + tau K`, with Dirichlet rows and
/// columns replaced by the identity. Row `k` stores `L[k][k-m..=k]`.
struct BandedCholesky {
    n: usize,
    m: usize,
    rows: Vec<f64>,
}

impl BandedCholesky {
    fn factor(op: &Operator, tau: f64) -> Result<Self> {
        let (n, m) = (op.mass.len(), op.nx);
        let w = m + 1;
        let mut rows = vec![0.0; n * w];
        let diag = op.diagonal();
        for k in 0..n {
            if op.dirichlet[k] {
                rows[k * w + m] = 1.0;
                continue;
            }
            rows[k * w + m] = op.mass[k] + tau * diag[k];
            if k % op.nx != 0 && !op.dirichlet[k - 1] {
                rows[k * w + m - 1] = -tau * op.cx[k - 1];
            }
            if k >= op.nx && !op.dirichlet[k - op.nx] {
                rows[k * w] = -tau * op.cy[k - op.nx];
            }
        }
        for k in 0..n {
            let lo = k.saturating_sub(m);
            for j in lo..=k {
                // Columns shared by rows k and j, both within the band.
                let start = lo.max(j.saturating_sub(m));
                let rk = &rows[k * w + (start + m - k)..k * w + (j + m - k)];
                let rj = &rows[j * w + (start + m - j)..j * w + m];
                let dot: f64 = rk.iter().zip(rj).map(|(a, b)| a * b).sum();
                let a = rows[k * w + (j + m - k)] - dot;
                if j == k {
                    if a <= 0.0 || !a.is_finite() {
                        return Err(Error::FdDiverged {
                            time: 0.0,
                            reason: format!("system matrix is not positive definite at row {k}"),
                        });
                    }
                    rows[k * w + m] = a.sqrt();
                } else {
                    rows[k * w + (j + m - k)] = a / rows[j * w + m];
                }
            }
        }
        Ok(Self { n, m, rows })
    }

    /// Overwrite `b` with the solution of `L Lᵀ x = b`.
    fn solve(&self, b: &mut [f64]) {
        let (n, m, w) = (self.n, self.m, self.m + 1);
        for k in 0..n {
            let lo = k.saturating_sub(m);
            let row = &self.rows[k * w + (lo + m - k)..k * w + m];
            let dot: f64 = row.iter().zip(&b[lo..k]).map(|(a, x)| a * x).sum();
            b[k] = (b[k] - dot) / self.rows[k * w + m];
        }
        for k in (0..n).rev() {
            b[k] /= self.rows[k * w + m];
            let lo = k.saturating_sub(m);
            let xk = b[k];
            let row = &self.rows[k * w + (lo + m - k)..k * w + m];
            for (x, a) in b[lo..k].iter_mut().zip(row) {
                *x -= a * xk;
            }
        }
    }
}

/// Solves `(M + tau K) u = rhs` for the free nodes, holding the Dirichlet
/// entries of `u` at their prescribed values.
struct Stepper<'a> {
    op: &'a Operator,
    factor: BandedCholesky,
    lifted: Vec<f64>,
    ku: Vec<f64>,
    tau: f64,
}

impl<'a> Stepper<'a> {
    fn new(op: &'a Operator, tau: f64) -> Result<Self> {
        let n = op.mass.len();
        Ok(Self {
            op,
            factor: BandedCholesky::factor(op, tau)?,
            lifted: vec![0.0; n],
            ku: vec![0.0; n],
            tau,
        })
    }

    fn solve(&mut self, u: &mut [f64], rhs: &[f64]) {
        let op = self.op;
        for ((l, &v), &fixed) in self.lifted.iter_mut().zip(u.iter()).zip(&op.dirichlet) {
            *l = if fixed { v } else { 0.0 };
        }
        op.stiffness(&self.lifted, &mut self.ku);
        for k in 0..u.len() {
            if !op.dirichlet[k] {
                u[k] = rhs[k] - self.tau * self.ku[k];
            }
        }
        self.factor.solve(u);
    }
}

/// March from the zero initial state to `t_end`. The step is shrunk if
/// needed so that `t_end` is hit exactly.
pub fn solve(spec: &ProblemSpec, grid: &FdGrid, t_end: f64) -> Result<FdSolution> {
    solve_with(spec, grid, t_end, &FdOptions::default())
}

pub fn solve_with(spec: &ProblemSpec, grid: &FdGrid, t_end: f64, opts: &FdOptions) -> Result<FdSolution> {
    grid.validate()?;
    ensure_finite("t_end", t_end)?;
    if t_end <= 0.0 {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    let op = Operator::new(grid);
    let n = op.mass.len();
    let steps = ((t_end / grid.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut u = vec![0.0; n];
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = opts.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();

    let mut stepper = Stepper::new(&op, 0.5 * dt)?;
    let mut rhs = vec![0.0; n];
    let mut ku = vec![0.0; n];

    let set_dirichlet = |u: &mut [f64], level: f64| {
        for (v, &fixed) in u.iter_mut().zip(&op.dirichlet) {
            if fixed {
                *v = level;
            }
        }
    };
    let source = |data: &BoundaryData, k: usize| -> f64 { -data.gradient * op.flux_weight[k] };

    let mut t = 0.0;
    let mut half_steps_left = opts.startup_half_steps;
    let mut step = 0;
    while step < steps {
        if half_steps_left > 0 {
            // (M + dt/2 K) u^{+} = M u + dt/2 s(t + dt/2), twice.
            for _ in 0..2 {
                let t_new = t + 0.5 * dt;
                let data = BoundaryData::at(spec, t_new)?;
                for k in 0..n {
                    rhs[k] = op.mass[k] * u[k] + 0.5 * dt * source(&data, k);
                }
                set_dirichlet(&mut u, data.level);
                stepper.solve(&mut u, &rhs);
                t = t_new;
                half_steps_left = half_steps_left.saturating_sub(1);
            }
        } else {
            let t_new = t + dt;
            let old = BoundaryData::at(spec, t)?;
            let new = BoundaryData::at(spec, t_new)?;
            op.stiffness(&u, &mut ku);
            for k in 0..n {
                rhs[k] = op.mass[k] * u[k] - 0.5 * dt * ku[k] + 0.5 * dt * (source(&old, k) + source(&new, k));
            }
            set_dirichlet(&mut u, new.level);
            stepper.solve(&mut u, &rhs);
            t = t_new;
        }
        step += 1;
        if step == steps {
            t = t_end;
        }
        if let Some(bad) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::FdDiverged {
                time: t,
                reason: format!("non-finite value at node {bad}"),
            });
        }
        while let Some(&ts) = pending.peek() {
            if ts <= t + 1e-12 * t.max(1.0) {
                snapshots.push(FdState {
                    time: t,
                    grid: *grid,
                    xs: op.xs.clone(),
                    ys: op.ys.clone(),
                    values: u.clone(),
                });
                pending.next();
            } else {
                break;
            }
        }
    }
    Ok(FdSolution {
        state: FdState {
            time: t,
            grid: *grid,
            xs: op.xs.clone(),
            ys: op.ys.clone(),
            values: u,
        },
        snapshots,
        steps,
    })
}

/// One compared point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointComparison {
    pub x: f64,
    pub y: f64,
    pub reference: f64,
    pub candidate: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub points: Vec<PointComparison>,
    pub max_diff: f64,
    pub mean_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare two fields point by point. `reference` is typically an
/// [`FdState`] sampler, `candidate` the semi-analytical field.
pub fn compare<R, C>(reference: R, candidate: C, points: &[(f64, f64)], tolerance: f64) -> Result<ComparisonReport>
where
    R: Fn(f64, f64) -> Result<f64>,
    C: Fn(f64, f64) -> Result<f64>,
{
    if points.is_empty() {
        return Err(Error::InvalidInput("no comparison points".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    for &(x, y) in points {
        let r = reference(x, y)?;
        let c = candidate(x, y)?;
        out.push(PointComparison {
            x,
            y,
            reference: r,
            candidate: c,
            abs_diff: (r - c).abs(),
        });
    }
    let max_diff = out.iter().map(|p| p.abs_diff).fold(0.0, f64::max);
    let mean_diff = out.iter().map(|p| p.abs_diff).sum::<f64>() / out.len() as f64;
    Ok(ComparisonReport {
        points: out,
        max_diff,
        mean_diff,
        tolerance,
        passed: max_diff <= tolerance,
    })
}

/// Sample layout and tolerance for checking the semi-analytical field
/// against the solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationPlan {
    pub t: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub tolerance: f64,
}

impl Default for ValidationPlan {
    /// Two slices `x = 0.05, 0.2` over 41 points of `y ∈ [-1, 1]` at `t = 0.02`.
    fn default() -> Self {
        Self {
            t: 0.02,
            xs: vec![0.05, 0.2],
            ys: linspace(-1.0, 1.0, 41),
            tolerance: 0.02,
        }
    }
}

impl ValidationPlan {
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .flat_map(|&x| self.ys.iter().map(move |&y| (x, y)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub grid: FdGrid,
    pub steps: usize,
    pub far_boundary_max: f64,
    pub comparison: ComparisonReport,
}

/// Solve the finite-difference problem up to `plan.t` and compare it with
/// the semi-analytical field at every plan point.
pub fn validate_field(
    spec: &ProblemSpec,
    grid: &FdGrid,
    plan: &ValidationPlan,
    cfg: &EvalConfig,
) -> Result<ValidationReport> {
    let points = plan.points();
    if points.is_empty() {
        return Err(Error::InvalidInput("validation needs at least one point".into()));
    }
    let sol = solve(spec, grid, plan.t)?;
    let far = sol.state.far_boundary_max();
    if far > 1e-5 {
        log::warn!(
            "far-boundary temperature {far:.2e} suggests the domain is too small for t = {}",
            plan.t
        );
    }
    let comparison = compare(
        |x, y| sol.state.sample(x, y),
        |x, y| temperature_at(x, y, plan.t, spec, cfg).map(|f| f.value),
        &points,
        plan.tolerance,
    )?;
    log::info!(
        "validation at t = {}: max diff {:.3e} over {} points",
        plan.t,
        comparison.max_diff,
        points.len()
    );
    Ok(ValidationReport {
        grid: *grid,
        steps: sol.steps,
        far_boundary_max: far,
        comparison,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::erfc;
    use std::f64::consts::PI;

    fn coarse() -> FdGrid {
        FdGrid::with_resolution(0.02, 2e-4)
    }

    #[test]
    fn grid_shape() {
        let g = FdGrid::default().with_grading(1.0);
        assert_eq!((g.nx(), g.ny()), (101, 200));
        let ys = g.y_nodes();
        assert!((ys[0] + 0.995).abs() < 1e-12);
        assert!((ys[100] - 0.005).abs() < 1e-12);
        assert_eq!(g.y_faces()[100], 0.0);
        assert_eq!(g.x_nodes()[100], 1.0);
        let graded = FdGrid::default().y_faces();
        assert_eq!(graded[100], 0.0);
        assert!((graded[101] - 1e-4).abs() < 1e-16);
        assert_eq!(graded[200], 1.0);
        assert!(FdGrid::default().with_grading(0.5).validate().is_err());
        assert!(FdGrid::with_resolution(0.03, 1e-4).validate().is_err());
        assert!(FdGrid::with_resolution(-0.01, 1e-4).validate().is_err());
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let sol = solve(&ProblemSpec::step(0.0, 0.0), &coarse(), 0.01).unwrap();
        assert!(sol.state.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn far_from_the_junction_the_dirichlet_half_is_one_dimensional() {
        let t = 0.02;
        let sol = solve(&ProblemSpec::step_insulator(1.0), &coarse(), t).unwrap();
        for x in [0.04, 0.1, 0.2] {
            let got = sol.state.sample(x, 0.5).unwrap();
            let want = erfc(x / (2.0 * f64::sqrt(t)));
            assert!((got - want).abs() < 5e-3, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn far_from_the_junction_the_flux_half_is_one_dimensional() {
        let t = 0.02;
        let sol = solve(&ProblemSpec::step(0.0, 1.0), &coarse(), t).unwrap();
        for x in [0.0, 0.04, 0.1] {
            let got = sol.state.sample(x, -0.5).unwrap();
            let z: f64 = x / (2.0 * f64::sqrt(t));
            let want = -(2.0 * (t / PI).sqrt() * (-z * z).exp() - x * erfc(z));
            assert!((got - want).abs() < 5e-3, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn snapshots_and_sampler() {
        let opts = FdOptions {
            snapshot_times: vec![0.004, 0.002],
            ..FdOptions::default()
        };
        let sol = solve_with(&ProblemSpec::step_insulator(1.0), &coarse(), 0.004, &opts).unwrap();
        assert_eq!(sol.snapshots.len(), 2);
        assert!((sol.snapshots[0].time - 0.002).abs() < 1e-12);
        assert_eq!(sol.state.sample(0.0, 0.5).unwrap(), 1.0);
        assert!(sol.state.sample(1.5, 0.0).is_err());
        let mut buf = Vec::new();
        sol.snapshots[1].write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,temperature\n"));
        assert_eq!(text.lines().count(), 1 + 100 * 51);
    }

    #[test]
    fn self_comparison_is_exact() {
        let sol = solve(&ProblemSpec::step(1.0, 1.0), &coarse(), 0.004).unwrap();
        let pts: Vec<_> = (0..5).map(|k| (0.05, -0.4 + 0.2 * k as f64)).collect();
        let s = |x, y| sol.state.sample(x, y);
        let rep = compare(s, s, &pts, 0.0).unwrap();
        assert_eq!(rep.max_diff, 0.0);
        assert!(rep.passed);
    }

    #[test]
    fn custom_profile_without_time_values_is_rejected() {
        let custom = ForcingProfile::Custom(crate::time_kernels::CustomProfile::new("c", |s| 1.0 / s));
        let spec = ProblemSpec::new(1.0, 0.0, custom, ForcingProfile::UnitStep).unwrap();
        assert!(solve(&spec, &coarse(), 0.001).is_err());
    }
}
