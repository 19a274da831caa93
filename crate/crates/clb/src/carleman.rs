//! Carleman linearization of quadratic ODE systems.
//!
//! A system x' = F1 x + F2 (x ⊗ x) is lifted to the tensor-power variables
//! x_k = x^⊗k, whose exact dynamics form an infinite upper block-bidiagonal
//! hierarchy. Truncating at order `k_max` (forcing x_{k_max+1} = 0) yields a
//! finite linear system whose first block approximates the nonlinear solution.
//! The scalar logistic equation x' = -a x + b x² is provided as a closed-form
//! reference for quantifying the truncation error.

use crate::error::{Error, Result};
use crate::ode;
use crate::sparse::Coo;
use crate::table::{Cell, Table};

/// Default cap on the lifted dimension Σ n^k; guards the exponential growth
/// of the tensor-power hierarchy.
pub const DEFAULT_DIMENSION_CAP: usize = 1_000_000;

/// Default integrator step in units of 1/a (or absolute when no rate scale
/// applies).
pub const DEFAULT_DT: f64 = 1e-3;

/// Quadratic ODE system x' = F1 x + F2 (x ⊗ x), with F2 acting on the
/// row-major tensor square of the state.
#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    n: usize,
    f1: Coo,
    f2: Coo,
}

impl PolynomialSystem {
    pub fn new(f1: Coo, f2: Coo) -> Result<Self> {
        let n = f1.nrows();
        if n == 0 {
            return Err(Error::Dimension("system dimension must be >= 1".into()));
        }
        if !f1.is_square() {
            return Err(Error::Dimension(format!(
                "linear part must be square, got {}x{}",
                f1.nrows(),
                f1.ncols()
            )));
        }
        if f2.nrows() != n || f2.ncols() != n * n {
            return Err(Error::Dimension(format!(
                "quadratic part must be {}x{}, got {}x{}",
                n,
                n * n,
                f2.nrows(),
                f2.ncols()
            )));
        }
        for &(_, _, v) in f1.entries().iter().chain(f2.entries()) {
            if !v.is_finite() {
                return Err(Error::Domain("coefficient map has non-finite entry".into()));
            }
        }
        Ok(PolynomialSystem { n, f1, f2 })
    }

    /// Purely linear system (quadratic part identically zero).
    pub fn linear(f1: Coo) -> Result<Self> {
        let n = f1.nrows();
        let f2 = Coo::new(n, n * n);
        PolynomialSystem::new(f1, f2)
    }

    /// Scalar logistic system x' = -a x + b x².
    pub fn logistic(a: f64, b: f64) -> Self {
        let f1 = Coo::from_triplets(1, 1, vec![(0, 0, -a)]).expect("1x1 triplet");
        let f2 = Coo::from_triplets(1, 1, vec![(0, 0, b)]).expect("1x1 triplet");
        PolynomialSystem { n: 1, f1, f2 }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn linear_part(&self) -> &Coo {
        &self.f1
    }

    pub fn quadratic_part(&self) -> &Coo {
        &self.f2
    }
}

/// Parameters of the logistic equation x' = -a x + b x², stated through the
/// nonlinearity ratio R = b/a. The product r = R·x0 separates stable decay
/// (r < 1) from finite-time blow-up (r > 1).
#[derive(Debug, Clone, Copy)]
pub struct LogisticParams {
    pub x0: f64,
    pub a: f64,
    pub ratio: f64,
}

impl LogisticParams {
    pub fn new(x0: f64, a: f64, ratio: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("rate a must be positive, got {a}")));
        }
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::Domain(format!(
                "ratio R must be positive, got {ratio}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::Domain("x0 must be finite".into()));
        }
        Ok(LogisticParams { x0, a, ratio })
    }

    pub fn b(&self) -> f64 {
        self.a * self.ratio
    }

    /// r = R·x0, the stability discriminant.
    pub fn r(&self) -> f64 {
        self.ratio * self.x0
    }

    pub fn system(&self) -> PolynomialSystem {
        PolynomialSystem::logistic(self.a, self.b())
    }

    /// Closed-form solution x(t) = x0·e^{-at} / (1 - r + r·e^{-at}).
    pub fn exact(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
        }
        let r = self.r();
        let decay = (-self.a * t).exp();
        let denom = 1.0 - r + r * decay;
        if denom <= 0.0 {
            return Err(Error::Domain(format!(
                "closed form evaluated at or past the singularity (r = {r}, t = {t})"
            )));
        }
        Ok(self.x0 * decay / denom)
    }

    /// Blow-up time t* = a⁻¹·ln(r/(r-1)); defined only for r > 1.
    pub fn singularity_time(&self) -> Result<f64> {
        let r = self.r();
        if r <= 1.0 {
            return Err(Error::Domain(format!(
                "no finite-time singularity: r = {r} <= 1"
            )));
        }
        Ok((r / (r - 1.0)).ln() / self.a)
    }
}

/// Truncated Carleman generator over the stacked tensor powers x^⊗1 … x^⊗k_max.
#[derive(Debug, Clone)]
pub struct CarlemanMatrix {
    pub k_max: usize,
    pub n: usize,
    /// Dimension n^k of each block, k = 1..=k_max.
    pub block_dims: Vec<usize>,
    pub total_dim: usize,
    pub matrix: Coo,
}

impl CarlemanMatrix {
    /// Offset of block `k` (1-based) in the stacked state vector.
    pub fn block_offset(&self, k: usize) -> usize {
        self.block_dims[..k - 1].iter().sum()
    }

    /// Wrap an externally assembled block matrix, validating its dimensions
    /// against the tensor-power layout.
    pub fn from_parts(n: usize, k_max: usize, matrix: Coo) -> Result<Self> {
        let block_dims = tensor_block_dims(n, k_max, usize::MAX)?;
        let total_dim: usize = block_dims.iter().sum();
        if matrix.nrows() != total_dim || matrix.ncols() != total_dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, tensor-power layout needs {total_dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(CarlemanMatrix {
            k_max,
            n,
            block_dims,
            total_dim,
            matrix,
        })
    }
}

fn tensor_block_dims(n: usize, k_max: usize, cap: usize) -> Result<Vec<usize>> {
    if k_max == 0 {
        return Err(Error::Domain("truncation order must be >= 1".into()));
    }
    let mut dims = Vec::with_capacity(k_max);
    let mut dim = 1usize;
    let mut total = 0usize;
    for _ in 0..k_max {
        dim = dim.checked_mul(n).ok_or_else(|| {
            Error::ResourceCap(format!("tensor-power dimension overflows usize (n = {n})"))
        })?;
        total = total.checked_add(dim).ok_or_else(|| {
            Error::ResourceCap(format!("lifted dimension overflows usize (n = {n})"))
        })?;
        if total > cap {
            return Err(Error::ResourceCap(format!(
                "lifted dimension {total} exceeds cap {cap} (n = {n}, k_max = {k_max})"
            )));
        }
        dims.push(dim);
    }
    Ok(dims)
}

/// Sum over j = 1..=k of I^{⊗(j-1)} ⊗ op ⊗ I^{⊗(k-j)}, the k-fold Leibniz
/// lift of a one-slot operator onto the tensor power.
fn leibniz_lift(op: &Coo, n: usize, k: usize) -> Coo {
    let mut triplets = Vec::new();
    let mut nrows = 0;
    let mut ncols = 0;
    for j in 0..k {
        let left = n.pow(j as u32);
        let right = n.pow((k - 1 - j) as u32);
        let term = Coo::identity(left).kron(&op.kron(&Coo::identity(right)));
        nrows = term.nrows();
        ncols = term.ncols();
        triplets.extend_from_slice(term.entries());
    }
    Coo::from_triplets(nrows, ncols, triplets).expect("lift triplets in bounds")
}

/// Build the order-`k_max` truncated Carleman generator. Block (k,k) is the
/// Leibniz lift of F1, block (k,k+1) the lift of F2; the final superdiagonal
/// block is dropped (x_{k_max+1} forced to zero).
pub fn build_carleman(sys: &PolynomialSystem, k_max: usize, cap: usize) -> Result<CarlemanMatrix> {
    let n = sys.n;
    let block_dims = tensor_block_dims(n, k_max, cap)?;
    let total_dim: usize = block_dims.iter().sum();
    let offsets: Vec<usize> = block_dims
        .iter()
        .scan(0usize, |acc, d| {
            let off = *acc;
            *acc += d;
            Some(off)
        })
        .collect();

    let mut triplets = Vec::new();
    for k in 1..=k_max {
        let row_off = offsets[k - 1];
        let diag = leibniz_lift(&sys.f1, n, k);
        for &(r, c, v) in diag.entries() {
            triplets.push((row_off + r, row_off + c, v));
        }
        if k < k_max && sys.f2.nnz() > 0 {
            let upper = leibniz_lift(&sys.f2, n, k);
            let col_off = offsets[k];
            for &(r, c, v) in upper.entries() {
                triplets.push((row_off + r, col_off + c, v));
            }
        }
    }

    let matrix = Coo::from_triplets(total_dim, total_dim, triplets)?;
    Ok(CarlemanMatrix {
        k_max,
        n,
        block_dims,
        total_dim,
        matrix,
    })
}

/// Stack the tensor powers x0^⊗1 … x0^⊗k_max into one lifted vector.
pub fn lift_initial(x0: &[f64], k_max: usize) -> Vec<f64> {
    let mut lifted = Vec::new();
    let mut power = x0.to_vec();
    lifted.extend_from_slice(&power);
    for _ in 1..k_max {
        let mut next = Vec::with_capacity(power.len() * x0.len());
        for &p in &power {
            for &x in x0 {
                next.push(p * x);
            }
        }
        lifted.extend_from_slice(&next);
        power = next;
    }
    lifted
}

/// First-block trajectory of a Carleman integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// One first-block state (length n) per sample time.
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds initial sample")
    }

    /// Scalar view for one-dimensional systems.
    pub fn scalar_samples(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| (t, s[0]))
            .collect()
    }
}

/// Integrate y' = C y from the lifted initial condition and return the sampled
/// first-block trajectory. The step count is chosen so the final sample lands
/// exactly on `t_end`.
pub fn integrate_carleman(
    cm: &CarlemanMatrix,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if x0.len() != cm.n {
        return Err(Error::Dimension(format!(
            "initial state has length {}, system dimension is {}",
            x0.len(),
            cm.n
        )));
    }
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let steps = ((t_end / dt).round() as usize).max(1);
    let h = t_end / steps as f64;
    let y0 = lift_initial(x0, cm.k_max);
    let n = cm.n;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    ode::rk4_linear(&cm.matrix, &y0, h, steps, |_, t, y| {
        times.push(t);
        states.push(y[..n].to_vec());
    })?;
    Ok(Trajectory { times, states })
}

/// Truncation error ε_k(t) = |x(t) - x_k(t)| of the order-`k_max` logistic
/// hierarchy against the closed form, using the default integrator step.
pub fn truncation_error(p: &LogisticParams, k_max: usize, t: f64) -> Result<f64> {
    if p.r() >= 1.0 {
        return Err(Error::Domain(format!(
            "truncation error is defined in the stable regime, r = {} >= 1",
            p.r()
        )));
    }
    let exact = p.exact(t)?;
    let cm = build_carleman(&p.system(), k_max, DEFAULT_DIMENSION_CAP)?;
    let traj = integrate_carleman(&cm, &[p.x0], t, DEFAULT_DT / p.a)?;
    Ok((exact - traj.final_state()[0]).abs())
}

/// ε_k(t) for k = 1..=k_cap, stopping early once the error falls to `floor`
/// (pass 0.0 to disable early stopping).
pub fn truncation_profile(
    p: &LogisticParams,
    k_cap: usize,
    t: f64,
    floor: f64,
) -> Result<Vec<f64>> {
    let mut profile = Vec::with_capacity(k_cap);
    for k in 1..=k_cap {
        let eps = truncation_error(p, k, t)?;
        profile.push(eps);
        if eps <= floor {
            break;
        }
    }
    Ok(profile)
}

/// Smallest truncation order whose error at time `t` is ≤ `eps`, searching
/// k = 1..=k_cap; `None` if no order within the cap reaches the tolerance.
pub fn min_truncation_order(
    p: &LogisticParams,
    eps: f64,
    t: f64,
    k_cap: usize,
) -> Result<Option<usize>> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {eps}"
        )));
    }
    for k in 1..=k_cap {
        if truncation_error(p, k, t)? <= eps {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Evenly spaced interior points of the open interval (0, hi):
/// hi·j/(count+1) for j = 1..=count.
pub fn open_grid(hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|j| hi * j as f64 / (count + 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// Figure-data emitters
// ---------------------------------------------------------------------------

/// Stable/unstable logistic trajectory table.
#[derive(Debug, Clone)]
pub struct Fig1Params {
    pub x0_stable: f64,
    pub x0_unstable: f64,
    pub a: f64,
    pub ratio: f64,
    pub t_end: f64,
    pub points: usize,
    /// Internal integrator step; samples are taken on the plot grid.
    pub dt: f64,
}

impl Default for Fig1Params {
    fn default() -> Self {
        Fig1Params {
            x0_stable: 0.5,
            x0_unstable: 2.0,
            a: 1.0,
            ratio: 1.5,
            t_end: 2.0,
            points: 400,
            dt: 1e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fig1Data {
    pub table: Table,
    /// Detected blow-up time of the unstable branch, if it diverged.
    pub blowup_time: Option<f64>,
}

/// Integrate both logistic branches numerically; the unstable branch is
/// masked from its detected blow-up onward.
pub fn fig1_data(p: &Fig1Params) -> Result<Fig1Data> {
    if p.points == 0 || !(p.t_end > 0.0) || !(p.dt > 0.0) {
        return Err(Error::Config(
            "fig1 needs points >= 1, t_end > 0, dt > 0".into(),
        ));
    }
    let stable = LogisticParams::new(p.x0_stable, p.a, p.ratio)?;
    let unstable = LogisticParams::new(p.x0_unstable, p.a, p.ratio)?;

    let plot_dt = p.t_end / p.points as f64;
    let every = (plot_dt / p.dt).round().max(1.0) as usize;
    let dt = plot_dt / every as f64;
    let steps = every * p.points;

    let rhs = |params: LogisticParams| {
        let (a, b) = (params.a, params.b());
        move |x: f64| -a * x + b * x * x
    };
    let run_s = ode::rk4_scalar_with_blowup(rhs(stable), stable.x0, dt, steps, every)?;
    let run_u = ode::rk4_scalar_with_blowup(rhs(unstable), unstable.x0, dt, steps, every)?;

    let mut table = Table::new(vec!["t", "x_stable", "x_unstable"]);
    for (i, &(t, xs)) in run_s.samples.iter().enumerate() {
        let xu = run_u.samples.get(i).map(|&(_, x)| x);
        table.push_row(vec![Cell::Float(t), Cell::Float(xs), Cell::from(xu)]);
    }
    Ok(Fig1Data {
        table,
        blowup_time: run_u.blowup_time,
    })
}

/// Exact logistic solution alongside truncated-hierarchy approximants.
#[derive(Debug, Clone)]
pub struct Fig2Params {
    pub x0: f64,
    pub a: f64,
    pub ratio: f64,
    pub orders: Vec<usize>,
    pub t_end: f64,
    pub points: usize,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Fig2Params {
            x0: 0.5,
            a: 1.0,
            ratio: 1.5,
            orders: vec![1, 2, 3, 4],
            t_end: 2.0,
            points: 200,
        }
    }
}

pub fn fig2_data(p: &Fig2Params) -> Result<Table> {
    if p.orders.is_empty() || p.points == 0 || !(p.t_end > 0.0) {
        return Err(Error::Config(
            "fig2 needs at least one order, points >= 1, t_end > 0".into(),
        ));
    }
    let params = LogisticParams::new(p.x0, p.a, p.ratio)?;
    let mut columns = vec!["t".to_string(), "exact".to_string()];
    for &k in &p.orders {
        columns.push(format!("x_k{k}"));
    }
    let mut table = Table::new(columns);

    // One integration per order, each sampled on the shared plot grid.
    let mut series: Vec<Vec<f64>> = Vec::with_capacity(p.orders.len());
    for &k in &p.orders {
        if k == 0 {
            return Err(Error::Config("truncation orders must be >= 1".into()));
        }
        let cm = build_carleman(&params.system(), k, DEFAULT_DIMENSION_CAP)?;
        let steps_per_point =
            ((p.t_end / p.points as f64) / (DEFAULT_DT / p.a)).round().max(1.0) as usize;
        let dt = p.t_end / (p.points * steps_per_point) as f64;
        let traj = integrate_carleman(&cm, &[params.x0], p.t_end, dt)?;
        let sampled: Vec<f64> = traj
            .states
            .iter()
            .step_by(steps_per_point)
            .map(|s| s[0])
            .collect();
        series.push(sampled);
    }

    for i in 0..=p.points {
        let t = p.t_end * i as f64 / p.points as f64;
        let mut row = vec![Cell::Float(t), Cell::Float(params.exact(t)?)];
        for s in &series {
            row.push(Cell::Float(s[i]));
        }
        table.push_row(row);
    }
    Ok(table)
}

/// Truncation error at fixed time as a function of the nonlinearity ratio.
#[derive(Debug, Clone)]
pub struct Fig3Params {
    pub x0: f64,
    pub a: f64,
    pub t: f64,
    pub orders: Vec<usize>,
    pub ratio_points: usize,
    pub ratio_max: f64,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Fig3Params {
            x0: 0.5,
            a: 1.0,
            t: 2.0,
            orders: vec![1, 2, 3],
            ratio_points: 99,
            ratio_max: 2.0,
        }
    }
}

pub fn fig3_data(p: &Fig3Params) -> Result<Table> {
    if p.orders.is_empty() || p.ratio_points == 0 {
        return Err(Error::Config(
            "fig3 needs at least one order and one ratio point".into(),
        ));
    }
    let mut columns = vec!["R".to_string()];
    for &k in &p.orders {
        columns.push(format!("eps_k{k}"));
    }
    let mut table = Table::new(columns);
    for ratio in open_grid(p.ratio_max, p.ratio_points) {
        let params = LogisticParams::new(p.x0, p.a, ratio)?;
        if params.r() >= 1.0 {
            break;
        }
        let mut row = vec![Cell::Float(ratio)];
        for &k in &p.orders {
            row.push(Cell::Float(truncation_error(&params, k, p.t)?));
        }
        table.push_row(row);
    }
    Ok(table)
}

/// Minimal truncation order over a (ratio, tolerance) grid.
#[derive(Debug, Clone)]
pub struct Fig4Params {
    pub x0: f64,
    pub a: f64,
    pub t: f64,
    pub ratio_points: usize,
    pub ratio_max: f64,
    pub eps_points: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub k_cap: usize,
}

impl Default for Fig4Params {
    fn default() -> Self {
        Fig4Params {
            x0: 0.5,
            a: 1.0,
            t: 2.0,
            ratio_points: 100,
            ratio_max: 2.0,
            eps_points: 50,
            eps_min: 1e-6,
            eps_max: 1e-1,
            k_cap: 100,
        }
    }
}

/// Long-format table (R, log10_eps, k_min); the order cell is masked where no
/// order within `k_cap` reaches the tolerance.
pub fn fig4_data(p: &Fig4Params) -> Result<Table> {
    if p.ratio_points == 0 || p.eps_points == 0 || p.k_cap == 0 {
        return Err(Error::Config("fig4 grid must be nonempty".into()));
    }
    if !(p.eps_min > 0.0) || p.eps_min > p.eps_max {
        return Err(Error::Config(format!(
            "fig4 needs 0 < eps_min <= eps_max, got [{}, {}]",
            p.eps_min, p.eps_max
        )));
    }
    let log_lo = p.eps_min.log10();
    let log_hi = p.eps_max.log10();
    let eps_grid: Vec<f64> = (0..p.eps_points)
        .map(|i| {
            if p.eps_points == 1 {
                log_lo
            } else {
                log_lo + (log_hi - log_lo) * i as f64 / (p.eps_points - 1) as f64
            }
        })
        .collect();

    let mut table = Table::new(vec!["R", "log10_eps", "k_min"]);
    for ratio in open_grid(p.ratio_max, p.ratio_points) {
        let params = LogisticParams::new(p.x0, p.a, ratio)?;
        if params.r() >= 1.0 {
            break;
        }
        // ε_k decreases with k, so one profile serves every tolerance level.
        let profile = truncation_profile(&params, p.k_cap, p.t, p.eps_min)?;
        for &le in &eps_grid {
            let eps = 10f64.powf(le);
            let k_min = profile.iter().position(|&e| e <= eps).map(|i| i + 1);
            table.push_row(vec![
                Cell::Float(ratio),
                Cell::Float(le),
                match k_min {
                    Some(k) => Cell::from(k),
                    None => Cell::Masked,
                },
            ]);
        }
    }
    Ok(table)
}
