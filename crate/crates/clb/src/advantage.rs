//! Resource calculus for quantum versus classical fluid marching: scenario
//! scaling laws, qubit and flop budgets, minimum-success-probability curves,
//! ancilla ceilings, and strategy cost comparisons.

use std::f64::consts::LN_2;

use crate::block_encoding::ancilla_bound;
use crate::error::{Error, Result};
use crate::table::{Cell, Table};

pub const AVOGADRO: f64 = 6e23;

/// Logarithm convention used inside the success-probability formula. The two
/// choices differ measurably at short marches and agree to well under 1e-6
/// once the step count reaches ~1e6, so the choice is an explicit parameter
/// everywhere rather than a silent default buried in a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Two => "log2",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim().to_ascii_lowercase().as_str() {
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "2" | "two" | "log2" => Ok(LogBase::Two),
            other => Err(Error::Config(format!(
                "unknown log base `{other}`; valid values: natural, e, ln, 2, two, log2"
            ))),
        }
    }
}

/// Dimensional flow parameters behind a Reynolds number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Characteristic speed (m/s).
    pub speed: f64,
    /// Macroscopic length scale (m).
    pub length: f64,
    /// Kinematic viscosity (m²/s).
    pub viscosity: f64,
}

impl FlowParams {
    pub fn reynolds(&self) -> f64 {
        self.speed * self.length / self.viscosity
    }
}

/// A named turbulent-flow scenario. Only the Reynolds number is stored;
/// grid demand, step count, degree-of-freedom count, and flop budget are
/// always recomputed from it so the derived quantities cannot drift apart.
#[derive(Debug, Clone)]
pub struct FlowScenario {
    pub name: String,
    pub reynolds: f64,
    pub flow: Option<FlowParams>,
}

impl FlowScenario {
    pub fn from_reynolds(name: impl Into<String>, reynolds: f64) -> Result<Self> {
        if !reynolds.is_finite() || reynolds < 1.0 {
            return Err(Error::Config(format!(
                "Reynolds number must be finite and at least 1, got {reynolds}"
            )));
        }
        Ok(Self {
            name: name.into(),
            reynolds,
            flow: None,
        })
    }

    pub fn from_flow(name: impl Into<String>, speed: f64, length: f64, viscosity: f64) -> Result<Self> {
        for (label, v) in [("speed", speed), ("length", length), ("viscosity", viscosity)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!(
                    "flow {label} must be finite and positive, got {v}"
                )));
            }
        }
        let flow = FlowParams {
            speed,
            length,
            viscosity,
        };
        let mut scenario = Self::from_reynolds(name, flow.reynolds())?;
        scenario.flow = Some(flow);
        Ok(scenario)
    }

    /// Attach dimensional parameters to an explicit Reynolds number, rejecting
    /// inconsistent combinations.
    pub fn with_flow_checked(name: impl Into<String>, reynolds: f64, flow: FlowParams) -> Result<Self> {
        let implied = flow.reynolds();
        if (implied - reynolds).abs() > 1e-9 * reynolds.abs().max(1.0) {
            return Err(Error::Config(format!(
                "Reynolds number {reynolds} disagrees with speed*length/viscosity = {implied}"
            )));
        }
        let mut scenario = Self::from_reynolds(name, reynolds)?;
        scenario.flow = Some(flow);
        Ok(scenario)
    }

    /// Grid points needed to resolve the dissipative range: Re^(9/4).
    pub fn grid_points(&self) -> f64 {
        self.reynolds.powf(2.25)
    }

    pub fn log10_grid_points(&self) -> f64 {
        2.25 * self.reynolds.log10()
    }

    /// Classical time-marching step count: G^(1/3) = Re^(3/4).
    pub fn classical_steps(&self) -> f64 {
        self.reynolds.powf(0.75)
    }

    /// Active dynamical degrees of freedom ("eddies"): Re³.
    pub fn dof(&self) -> f64 {
        self.reynolds.powi(3)
    }

    /// Flop budget for one classical eddy-turnover simulation: 1e3 · Re³.
    pub fn classical_flops(&self) -> f64 {
        1e3 * self.dof()
    }
}

/// The three stock scenarios: a kitchen faucet, a full airliner, and global
/// weather. Additional scenarios come in through configuration.
pub fn builtin_scenarios() -> Vec<FlowScenario> {
    vec![
        FlowScenario::from_flow("faucet", 1.0, 0.01, 1e-6).expect("faucet parameters are valid"),
        FlowScenario::from_reynolds("airliner", 10f64.powf(20.0 / 3.0))
            .expect("airliner parameters are valid"),
        FlowScenario::from_reynolds("weather", 1e12).expect("weather parameters are valid"),
    ]
}

pub fn builtin_scenario(name: &str) -> Result<FlowScenario> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown scenario `{name}`; valid scenarios: faucet, airliner, weather"
            ))
        })
}

/// Qubits needed to amplitude-encode a k-th order lifted state over G grid
/// points: ceil(k·log2 G).
pub fn qubit_count(grid_points: f64, order: u32) -> Result<u64> {
    if !grid_points.is_finite() || grid_points < 1.0 {
        return Err(Error::Domain(format!(
            "grid count must be finite and at least 1, got {grid_points}"
        )));
    }
    if order == 0 {
        return Err(Error::Domain("lift order must be at least 1".into()));
    }
    Ok((order as f64 * grid_points.log2()).ceil() as u64)
}

/// ln(k·log G) − ln G, the negative log-ratio at the heart of the success
/// probability. Errors when the ratio leaves (0, 1).
fn log_ratio(grid_points: f64, order: u32, base: LogBase) -> Result<f64> {
    if !grid_points.is_finite() || grid_points <= 1.0 {
        return Err(Error::Domain(format!(
            "grid count must exceed 1, got {grid_points}"
        )));
    }
    if order == 0 {
        return Err(Error::Domain("lift order must be at least 1".into()));
    }
    let klogg = order as f64 * base.apply(grid_points);
    if klogg >= grid_points {
        return Err(Error::Domain(format!(
            "k·log G = {klogg} must stay below G = {grid_points} for the probability bound"
        )));
    }
    Ok(klogg.ln() - grid_points.ln())
}

/// Minimum per-step success probability for a lifted quantum march over T
/// steps to beat the classical grid solver: (k·log G / G)^(1/T), evaluated in
/// log space. Strictly increasing in T, strictly decreasing in G; tends to 1
/// as T grows.
pub fn min_success_probability(
    grid_points: f64,
    steps: u64,
    order: u32,
    base: LogBase,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    let ratio_ln = log_ratio(grid_points, order, base)?;
    Ok((ratio_ln / steps as f64).exp())
}

/// 1 − min_success_probability, computed stably for the regime where the
/// probability sits within a hair of one.
pub fn min_success_failure(grid_points: f64, steps: u64, order: u32, base: LogBase) -> Result<f64> {
    if steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    let ratio_ln = log_ratio(grid_points, order, base)?;
    Ok(-(ratio_ln / steps as f64).exp_m1())
}

/// Step budget permitted by an ancilla register: either a concrete largest
/// admissible T or no constraint at all (zero ancillas put the ceiling at 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepBudget {
    Bounded(u64),
    Unbounded,
}

impl StepBudget {
    pub fn bounded(self) -> Option<u64> {
        match self {
            StepBudget::Bounded(t) => Some(t),
            StepBudget::Unbounded => None,
        }
    }
}

/// Largest T with min_success_probability(G,T,k) ≤ 2^(−2·q_a): solved in
/// closed form as floor((ln G − ln(k·log G)) / (2·q_a·ln 2)), then nudged
/// until the defining inequality is verified at T and T+1. Bounded(0) means
/// even a single step already demands more than the ancilla register allows.
pub fn max_steps(grid_points: f64, order: u32, ancillas: u32, base: LogBase) -> Result<StepBudget> {
    if ancillas == 0 {
        return Ok(StepBudget::Unbounded);
    }
    let bound = ancilla_bound(ancillas);
    let ratio_ln = log_ratio(grid_points, order, base)?;
    let exact = -ratio_ln / (2.0 * ancillas as f64 * LN_2);
    let mut t = if exact.is_finite() && exact > 0.0 {
        exact.floor() as u64
    } else {
        0
    };
    while t >= 1 && min_success_probability(grid_points, t, order, base)? > bound {
        t -= 1;
    }
    while min_success_probability(grid_points, t + 1, order, base)? <= bound {
        t += 1;
    }
    Ok(StepBudget::Bounded(t))
}

/// log10 of the per-step probability above which the lifted march beats the
/// exhaustive N-body ensemble: G^((k−N)/T). Kept in log space because the
/// direct value underflows long before N reaches molecular counts.
pub fn ensemble_win_threshold_log10(
    grid_points: f64,
    order: u32,
    bodies: f64,
    steps: u64,
) -> Result<f64> {
    if !grid_points.is_finite() || grid_points <= 1.0 {
        return Err(Error::Domain(format!(
            "grid count must exceed 1, got {grid_points}"
        )));
    }
    // bodies == order is admitted: the exponent vanishes and the threshold
    // degenerates to exactly 1 for every step count.
    if !(bodies >= order as f64) {
        return Err(Error::Domain(format!(
            "body count {bodies} must be at least the lift order {order}"
        )));
    }
    if steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    Ok((order as f64 - bodies) / steps as f64 * grid_points.log10())
}

/// Direct-space version of the ensemble win threshold; underflows to zero
/// when the log10 value drops below roughly −308.
pub fn ensemble_win_threshold(grid_points: f64, order: u32, bodies: f64, steps: u64) -> Result<f64> {
    Ok(10f64.powf(ensemble_win_threshold_log10(grid_points, order, bodies, steps)?))
}

/// Steps sustainable at fixed per-step probability p before the ensemble
/// encoding catches up: T = (N−k)·log G / (−log p).
pub fn steps_at_win_probability(
    grid_points: f64,
    order: u32,
    bodies: f64,
    probability: f64,
) -> Result<f64> {
    if !(probability > 0.0 && probability < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie strictly between 0 and 1, got {probability}"
        )));
    }
    if !(bodies > order as f64) {
        return Err(Error::Domain(format!(
            "body count {bodies} must exceed lift order {order}"
        )));
    }
    if !grid_points.is_finite() || grid_points <= 1.0 {
        return Err(Error::Domain(format!(
            "grid count must exceed 1, got {grid_points}"
        )));
    }
    Ok((bodies - order as f64) * grid_points.log10() / -probability.log10())
}

/// The three marching strategies whose costs get compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarchStrategy {
    /// Exhaustive N-body ensemble evolution: T·G^N amplitudes.
    Ensemble,
    /// Lifted quantum march with post-selection: T·G^k·p^(−T).
    Carleman,
    /// Classical grid solver: T·G operations.
    Classical,
}

impl MarchStrategy {
    pub fn label(self) -> &'static str {
        match self {
            MarchStrategy::Ensemble => "ensemble",
            MarchStrategy::Carleman => "carleman",
            MarchStrategy::Classical => "classical",
        }
    }
}

/// Cost triple in log10 space plus the winner under two accountings: raw
/// operation count, and the qubit-count metric where the lifted march wins
/// whenever p clears the base-2 probability threshold.
#[derive(Debug, Clone)]
pub struct CostComparison {
    pub log10_ensemble: f64,
    pub log10_carleman: f64,
    pub log10_classical: f64,
    pub raw_winner: MarchStrategy,
    pub qubit_threshold: f64,
    pub carleman_wins_qubit_metric: bool,
}

pub fn compare_strategies(
    grid_points: f64,
    order: u32,
    bodies: f64,
    steps: u64,
    probability: f64,
) -> Result<CostComparison> {
    if steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    if !(probability > 0.0 && probability <= 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1], got {probability}"
        )));
    }
    if !(bodies >= 1.0) {
        return Err(Error::Domain(format!(
            "body count must be at least 1, got {bodies}"
        )));
    }
    if !grid_points.is_finite() || grid_points <= 1.0 {
        return Err(Error::Domain(format!(
            "grid count must exceed 1, got {grid_points}"
        )));
    }
    if order == 0 {
        return Err(Error::Domain("lift order must be at least 1".into()));
    }
    let log10_t = (steps as f64).log10();
    let log10_g = grid_points.log10();
    let log10_ensemble = log10_t + bodies * log10_g;
    let log10_carleman = log10_t + order as f64 * log10_g - steps as f64 * probability.log10();
    let log10_classical = log10_t + log10_g;

    let mut raw_winner = MarchStrategy::Classical;
    let mut best = log10_classical;
    for (cost, strategy) in [
        (log10_carleman, MarchStrategy::Carleman),
        (log10_ensemble, MarchStrategy::Ensemble),
    ] {
        if cost < best {
            best = cost;
            raw_winner = strategy;
        }
    }

    let qubit_threshold = min_success_probability(grid_points, steps, order, LogBase::Two)?;
    Ok(CostComparison {
        log10_ensemble,
        log10_carleman,
        log10_classical,
        raw_winner,
        qubit_threshold,
        carleman_wins_qubit_metric: probability >= qubit_threshold,
    })
}

/// The two published single-step probability estimates, which disagree with
/// each other by construction: a qubits-over-gridpoints heuristic and the
/// T=1 value of the probability bound. Both are reported side by side with
/// no attempt to reconcile them.
#[derive(Debug, Clone, Copy)]
pub struct OneStepEstimates {
    pub heuristic: f64,
    pub bound: f64,
}

pub fn one_step_estimates(grid_points: f64, order: u32) -> Result<OneStepEstimates> {
    let heuristic = qubit_count(grid_points, order)? as f64 / grid_points;
    let bound = min_success_probability(grid_points, 1, order, LogBase::Natural)?;
    Ok(OneStepEstimates { heuristic, bound })
}

fn grid_label(grid_points: f64) -> String {
    let l = grid_points.log10();
    let r = l.round();
    if (l - r).abs() < 1e-6 && (0.0..=308.0).contains(&r) {
        format!("1e{}", r as i64)
    } else {
        format!("{grid_points:.3e}")
    }
}

#[derive(Debug, Clone)]
pub struct Fig6Params {
    pub t_max: u64,
    pub order: u32,
    pub ancilla_list: Vec<u32>,
    pub base: LogBase,
    pub scenarios: Vec<FlowScenario>,
}

impl Default for Fig6Params {
    fn default() -> Self {
        Self {
            t_max: 100,
            order: 2,
            ancilla_list: vec![1, 7],
            base: LogBase::Natural,
            scenarios: builtin_scenarios(),
        }
    }
}

/// Success-probability curves p_min(T) for each scenario, one row per step
/// count, alongside the constant ancilla ceilings 2^(−2·q_a).
pub fn fig6_data(params: &Fig6Params) -> Result<Table> {
    if params.t_max == 0 {
        return Err(Error::Config("t_max must be at least 1".into()));
    }
    if params.scenarios.is_empty() {
        return Err(Error::Config("at least one scenario is required".into()));
    }
    for &qa in &params.ancilla_list {
        if qa == 0 {
            return Err(Error::Config(
                "ancilla counts in the bound list must be at least 1".into(),
            ));
        }
    }
    let mut columns = vec!["T".to_string()];
    for s in &params.scenarios {
        columns.push(format!("p_min_G{}", grid_label(s.grid_points())));
    }
    for &qa in &params.ancilla_list {
        columns.push(format!("bound_qa{qa}"));
    }
    let mut table = Table::new(columns);
    for t in 1..=params.t_max {
        let mut row: Vec<Cell> = vec![(t as i64).into()];
        for s in &params.scenarios {
            row.push(min_success_probability(s.grid_points(), t, params.order, params.base)?.into());
        }
        for &qa in &params.ancilla_list {
            row.push(ancilla_bound(qa).into());
        }
        table.push_row(row);
    }
    Ok(table)
}

/// One scenario of a resource report, with optional per-scenario overrides
/// of the lift order and ancilla budget.
#[derive(Debug, Clone)]
pub struct ScenarioQuery {
    pub scenario: FlowScenario,
    pub order: Option<u32>,
    pub ancillas: Option<u32>,
}

impl From<FlowScenario> for ScenarioQuery {
    fn from(scenario: FlowScenario) -> Self {
        Self {
            scenario,
            order: None,
            ancillas: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportParams {
    pub order: u32,
    pub ancillas: u32,
    pub base: LogBase,
    pub scenarios: Vec<ScenarioQuery>,
}

impl Default for ReportParams {
    fn default() -> Self {
        Self {
            order: 2,
            ancillas: 1,
            base: LogBase::Natural,
            scenarios: builtin_scenarios().into_iter().map(Into::into).collect(),
        }
    }
}

/// Per-scenario resource table: classical demands, qubit budget, both
/// single-step probability estimates, and the ancilla-limited step ceiling.
pub fn advantage_report(params: &ReportParams) -> Result<Table> {
    if params.scenarios.is_empty() {
        return Err(Error::Config("at least one scenario is required".into()));
    }
    let mut table = Table::new(vec![
        "name",
        "reynolds",
        "grid_points",
        "classical_steps",
        "dof",
        "classical_flops",
        "order",
        "ancillas",
        "qubits",
        "one_step_bound",
        "one_step_heuristic",
        "max_steps",
    ]);
    for query in &params.scenarios {
        let s = &query.scenario;
        let order = query.order.unwrap_or(params.order);
        let ancillas = query.ancillas.unwrap_or(params.ancillas);
        let g = s.grid_points();
        let estimates = one_step_estimates(g, order)?;
        let budget = match max_steps(g, order, ancillas, params.base)? {
            StepBudget::Bounded(t) => Cell::Int(t as i64),
            StepBudget::Unbounded => Cell::Text("unbounded".to_string()),
        };
        table.push_row(vec![
            Cell::Text(s.name.clone()),
            s.reynolds.into(),
            g.into(),
            s.classical_steps().into(),
            s.dof().into(),
            s.classical_flops().into(),
            (order as i64).into(),
            (ancillas as i64).into(),
            (qubit_count(g, order)? as i64).into(),
            estimates.bound.into(),
            estimates.heuristic.into(),
            budget,
        ]);
    }
    Ok(table)
}
