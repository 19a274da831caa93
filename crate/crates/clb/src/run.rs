//! Command dispatch behind the CLI.
//!
//! Each command has a fixed key schema; values are resolved with precedence
//! flag > config-file section > built-in default, echoed back (fully
//! resolved and sorted) in a `#`-prefixed provenance header, and the result
//! is emitted as CSV to a file or stdout. Identical configuration and seed
//! produce byte-identical output.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::advantage::{
    builtin_scenarios, fig6_data, advantage_report, Fig6Params, LogBase, ReportParams,
    ScenarioQuery,
};
use crate::block_encoding::{
    dilate, multi_step_success, normalized_padded, sparse_scale, SparseMatrixDesc,
};
use crate::carleman::{
    fig1_data, fig2_data, fig3_data, fig4_data, lift_initial, Fig1Params, Fig2Params, Fig3Params,
    Fig4Params,
};
use crate::config::{parse_config, scenario_from_block, ConfigFile};
use crate::error::{Error, Result};
use crate::lbm::clb2::{build_clb2, lbm_error_run, LbmErrorParams, DEFAULT_CLB2_CAP};
use crate::lbm::{FlowState, LatticeModel};
use crate::multiscale::{multiscale_run, MultiscaleParams, ReconstructMethod};
use crate::table::Table;

/// Every recognised command, in help order.
pub const COMMANDS: &[&str] = &[
    "fig1",
    "fig2",
    "fig3",
    "fig4",
    "fig6",
    "lbm-error",
    "block-encode",
    "advantage-report",
    "multiscale",
];

/// Largest dilated-unitary dimension the block-encode command will build;
/// beyond this the dense matrix stops being a desk-scale object.
pub const MAX_DILATED_DIM: usize = 4096;

/// A fully specified invocation: command name, flag overrides, optional
/// config file, output destination, and seed.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub overrides: BTreeMap<String, String>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            overrides: BTreeMap::new(),
            config: None,
            out: None,
            seed: 42,
        }
    }
}

/// Run a command and return the full CSV artifact as a string.
pub fn run_to_string(rc: &RunConfig) -> Result<String> {
    let file = match &rc.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            parse_config(&text)?
        }
        None => ConfigFile::default(),
    };
    run_with_config(rc, &file)
}

/// Run a command against an already-parsed configuration.
pub fn run_with_config(rc: &RunConfig, file: &ConfigFile) -> Result<String> {
    if !COMMANDS.contains(&rc.command.as_str()) {
        return Err(Error::Config(format!(
            "unknown command `{}`; valid commands: {}",
            rc.command,
            COMMANDS.join(", ")
        )));
    }
    for section in file.sections.keys() {
        if !COMMANDS.contains(&section.as_str()) {
            return Err(Error::Config(format!(
                "unknown config section `[{section}]`; valid sections: {} (plus repeated \
                 `[scenario]` blocks)",
                COMMANDS.join(", ")
            )));
        }
    }

    let mut params = file
        .sections
        .get(&rc.command)
        .cloned()
        .unwrap_or_default();
    for (key, value) in &rc.overrides {
        params.insert(key.clone(), value.clone());
    }
    let scenarios: Vec<ScenarioQuery> = file
        .scenarios
        .iter()
        .map(scenario_from_block)
        .collect::<Result<_>>()?;

    let (table, mut echo) = dispatch(&rc.command, &params, &scenarios)?;
    echo.insert("seed".to_string(), rc.seed.to_string());
    let parameters = echo
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    let provenance = vec![
        format!("command: {}", rc.command),
        format!("parameters: {parameters}"),
        format!("version: {}", env!("CARGO_PKG_VERSION")),
    ];
    Ok(table.to_csv(&provenance))
}

/// Run a command and deliver the artifact to `rc.out` (or stdout).
pub fn execute(rc: &RunConfig) -> Result<()> {
    let csv = run_to_string(rc)?;
    match &rc.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn dispatch(
    command: &str,
    params: &BTreeMap<String, String>,
    scenarios: &[ScenarioQuery],
) -> Result<(Table, BTreeMap<String, String>)> {
    match command {
        "fig1" => cmd_fig1(params),
        "fig2" => cmd_fig2(params),
        "fig3" => cmd_fig3(params),
        "fig4" => cmd_fig4(params),
        "fig6" => cmd_fig6(params, scenarios),
        "lbm-error" => cmd_lbm_error(params),
        "block-encode" => cmd_block_encode(params),
        "advantage-report" => cmd_advantage_report(params, scenarios),
        "multiscale" => cmd_multiscale(params),
        _ => unreachable!("command validated by caller"),
    }
}

// ---------------------------------------------------------------------------
// Typed parameter lookup over a string map
// ---------------------------------------------------------------------------

struct ParamSet<'a> {
    command: &'a str,
    map: &'a BTreeMap<String, String>,
    valid: &'a [&'a str],
}

impl<'a> ParamSet<'a> {
    /// Rejects any key outside the command's schema up front.
    fn new(
        command: &'a str,
        map: &'a BTreeMap<String, String>,
        valid: &'a [&'a str],
    ) -> Result<Self> {
        for key in map.keys() {
            if !valid.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key `{key}` for command `{command}`; valid keys: {}",
                    valid.join(", ")
                )));
            }
        }
        Ok(ParamSet {
            command,
            map,
            valid,
        })
    }

    fn typed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        debug_assert!(self.valid.contains(&key));
        match self.map.get(key) {
            None => Ok(None),
            Some(text) => text.trim().parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!(
                    "command `{}`, key `{key}`: cannot parse `{text}` as {what}",
                    self.command
                ))
            }),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.typed::<f64>(key, "a number")?.unwrap_or(default))
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self
            .typed::<usize>(key, "a non-negative integer")?
            .unwrap_or(default))
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self
            .typed::<u64>(key, "a non-negative integer")?
            .unwrap_or(default))
    }

    fn u32(&self, key: &str, default: u32) -> Result<u32> {
        Ok(self
            .typed::<u32>(key, "a non-negative integer")?
            .unwrap_or(default))
    }

    fn opt_u32(&self, key: &str) -> Result<Option<u32>> {
        self.typed::<u32>(key, "a non-negative integer")
    }

    fn list<T: std::str::FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(text) => text
                .split(',')
                .map(|part| {
                    part.trim().parse::<T>().map_err(|_| {
                        Error::Config(format!(
                            "command `{}`, key `{key}`: cannot parse `{part}` in `{text}` as an \
                             integer list",
                            self.command
                        ))
                    })
                })
                .collect(),
        }
    }

    fn log_base(&self, key: &str, default: LogBase) -> Result<LogBase> {
        match self.map.get(key) {
            None => Ok(default),
            Some(text) => LogBase::parse(text),
        }
    }

    fn method(&self, key: &str, default: ReconstructMethod) -> Result<ReconstructMethod> {
        match self.map.get(key) {
            None => Ok(default),
            Some(text) => ReconstructMethod::parse(text),
        }
    }
}

fn fmt_list<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn echo_map<const N: usize>(entries: [(&str, String); N]) -> BTreeMap<String, String> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

fn cmd_fig1(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "fig1",
        map,
        &["a", "dt", "points", "ratio", "t_end", "x0_stable", "x0_unstable"],
    )?;
    let d = Fig1Params::default();
    let params = Fig1Params {
        x0_stable: p.f64("x0_stable", d.x0_stable)?,
        x0_unstable: p.f64("x0_unstable", d.x0_unstable)?,
        a: p.f64("a", d.a)?,
        ratio: p.f64("ratio", d.ratio)?,
        t_end: p.f64("t_end", d.t_end)?,
        points: p.usize("points", d.points)?,
        dt: p.f64("dt", d.dt)?,
    };
    let echo = echo_map([
        ("a", params.a.to_string()),
        ("dt", params.dt.to_string()),
        ("points", params.points.to_string()),
        ("ratio", params.ratio.to_string()),
        ("t_end", params.t_end.to_string()),
        ("x0_stable", params.x0_stable.to_string()),
        ("x0_unstable", params.x0_unstable.to_string()),
    ]);
    Ok((fig1_data(&params)?.table, echo))
}

fn cmd_fig2(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new("fig2", map, &["a", "orders", "points", "ratio", "t_end", "x0"])?;
    let d = Fig2Params::default();
    let params = Fig2Params {
        x0: p.f64("x0", d.x0)?,
        a: p.f64("a", d.a)?,
        ratio: p.f64("ratio", d.ratio)?,
        orders: p.list("orders", &d.orders)?,
        t_end: p.f64("t_end", d.t_end)?,
        points: p.usize("points", d.points)?,
    };
    let echo = echo_map([
        ("a", params.a.to_string()),
        ("orders", fmt_list(&params.orders)),
        ("points", params.points.to_string()),
        ("ratio", params.ratio.to_string()),
        ("t_end", params.t_end.to_string()),
        ("x0", params.x0.to_string()),
    ]);
    Ok((fig2_data(&params)?, echo))
}

fn cmd_fig3(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "fig3",
        map,
        &["a", "orders", "ratio_max", "ratio_points", "t", "x0"],
    )?;
    let d = Fig3Params::default();
    let params = Fig3Params {
        x0: p.f64("x0", d.x0)?,
        a: p.f64("a", d.a)?,
        t: p.f64("t", d.t)?,
        orders: p.list("orders", &d.orders)?,
        ratio_points: p.usize("ratio_points", d.ratio_points)?,
        ratio_max: p.f64("ratio_max", d.ratio_max)?,
    };
    let echo = echo_map([
        ("a", params.a.to_string()),
        ("orders", fmt_list(&params.orders)),
        ("ratio_max", params.ratio_max.to_string()),
        ("ratio_points", params.ratio_points.to_string()),
        ("t", params.t.to_string()),
        ("x0", params.x0.to_string()),
    ]);
    Ok((fig3_data(&params)?, echo))
}

fn cmd_fig4(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "fig4",
        map,
        &[
            "a",
            "eps_max",
            "eps_min",
            "eps_points",
            "k_cap",
            "ratio_max",
            "ratio_points",
            "t",
            "x0",
        ],
    )?;
    let d = Fig4Params::default();
    let params = Fig4Params {
        x0: p.f64("x0", d.x0)?,
        a: p.f64("a", d.a)?,
        t: p.f64("t", d.t)?,
        ratio_points: p.usize("ratio_points", d.ratio_points)?,
        ratio_max: p.f64("ratio_max", d.ratio_max)?,
        eps_points: p.usize("eps_points", d.eps_points)?,
        eps_min: p.f64("eps_min", d.eps_min)?,
        eps_max: p.f64("eps_max", d.eps_max)?,
        k_cap: p.usize("k_cap", d.k_cap)?,
    };
    let echo = echo_map([
        ("a", params.a.to_string()),
        ("eps_max", params.eps_max.to_string()),
        ("eps_min", params.eps_min.to_string()),
        ("eps_points", params.eps_points.to_string()),
        ("k_cap", params.k_cap.to_string()),
        ("ratio_max", params.ratio_max.to_string()),
        ("ratio_points", params.ratio_points.to_string()),
        ("t", params.t.to_string()),
        ("x0", params.x0.to_string()),
    ]);
    Ok((fig4_data(&params)?, echo))
}

fn cmd_fig6(
    map: &BTreeMap<String, String>,
    scenarios: &[ScenarioQuery],
) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new("fig6", map, &["k", "log_base", "qa_list", "t_max"])?;
    let d = Fig6Params::default();
    let params = Fig6Params {
        t_max: p.u64("t_max", d.t_max)?,
        order: p.u32("k", d.order)?,
        ancilla_list: p.list("qa_list", &d.ancilla_list)?,
        base: p.log_base("log_base", d.base)?,
        scenarios: if scenarios.is_empty() {
            builtin_scenarios()
        } else {
            scenarios.iter().map(|q| q.scenario.clone()).collect()
        },
    };
    let echo = echo_map([
        ("k", params.order.to_string()),
        ("log_base", params.base.label().to_string()),
        ("qa_list", fmt_list(&params.ancilla_list)),
        (
            "scenarios",
            fmt_list(
                &params
                    .scenarios
                    .iter()
                    .map(|s| s.name.clone())
                    .collect::<Vec<_>>(),
            ),
        ),
        ("t_max", params.t_max.to_string()),
    ]);
    Ok((fig6_data(&params)?, echo))
}

fn cmd_lbm_error(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "lbm-error",
        map,
        &["density_amp", "g", "mach", "omega", "steps"],
    )?;
    let d = LbmErrorParams::default();
    let params = LbmErrorParams {
        g: p.usize("g", d.g)?,
        omega: p.f64("omega", d.omega)?,
        mach: p.f64("mach", d.mach)?,
        density_amp: p.f64("density_amp", d.density_amp)?,
        steps: p.usize("steps", d.steps)?,
    };
    let echo = echo_map([
        ("density_amp", params.density_amp.to_string()),
        ("g", params.g.to_string()),
        ("mach", params.mach.to_string()),
        ("omega", params.omega.to_string()),
        ("steps", params.steps.to_string()),
    ]);
    Ok((lbm_error_run(&params)?.table(), echo))
}

fn cmd_block_encode(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "block-encode",
        map,
        &["density_amp", "g", "mach", "omega", "q_a", "steps"],
    )?;
    let g = p.usize("g", 2)?;
    let omega = p.f64("omega", 1.0)?;
    let mach = p.f64("mach", 0.05)?;
    let density_amp = p.f64("density_amp", 1e-2)?;
    let steps = p.usize("steps", 10)?;
    let explicit_qa = p.opt_u32("q_a")?;

    let model = LatticeModel::d1q3();
    let system = build_clb2(&model, g, omega, DEFAULT_CLB2_CAP)?;
    let desc = SparseMatrixDesc::from_matrix(system.step_map.matrix.clone());
    let (alpha, auto_qa) = sparse_scale(&desc);
    let q_a = explicit_qa.unwrap_or(auto_qa);

    let padded = desc.matrix.nrows().next_power_of_two();
    match padded.checked_shl(q_a) {
        Some(dim) if dim <= MAX_DILATED_DIM => {}
        _ => {
            return Err(Error::ResourceCap(format!(
                "dilated unitary dimension {padded}·2^{q_a} exceeds the cap {MAX_DILATED_DIM}; \
                 lower g or q_a"
            )));
        }
    }

    let be = dilate(&system.step_map.matrix, alpha, q_a)?;
    let initial = FlowState::sine_wave(&model, g, density_amp, mach)?;
    let lifted = lift_initial(&initial.f, 2);
    let psi0 = normalized_padded(&lifted, be.system_dim())?;
    let run = multi_step_success(&be, &psi0, steps)?;

    let echo = echo_map([
        ("density_amp", density_amp.to_string()),
        ("g", g.to_string()),
        ("mach", mach.to_string()),
        ("omega", omega.to_string()),
        ("q_a", q_a.to_string()),
        ("steps", steps.to_string()),
    ]);
    Ok((run.table(), echo))
}

fn cmd_advantage_report(
    map: &BTreeMap<String, String>,
    scenarios: &[ScenarioQuery],
) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new("advantage-report", map, &["k", "log_base", "q_a"])?;
    let d = ReportParams::default();
    let params = ReportParams {
        order: p.u32("k", d.order)?,
        ancillas: p.u32("q_a", d.ancillas)?,
        base: p.log_base("log_base", d.base)?,
        scenarios: if scenarios.is_empty() {
            d.scenarios
        } else {
            scenarios.to_vec()
        },
    };
    let echo = echo_map([
        ("k", params.order.to_string()),
        ("log_base", params.base.label().to_string()),
        ("q_a", params.ancillas.to_string()),
        (
            "scenarios",
            fmt_list(
                &params
                    .scenarios
                    .iter()
                    .map(|q| q.scenario.name.clone())
                    .collect::<Vec<_>>(),
            ),
        ),
    ]);
    Ok((advantage_report(&params)?, echo))
}

fn cmd_multiscale(map: &BTreeMap<String, String>) -> Result<(Table, BTreeMap<String, String>)> {
    let p = ParamSet::new(
        "multiscale",
        map,
        &[
            "block",
            "coarse_stretch",
            "cycles",
            "density_amp",
            "fine_sites",
            "fine_stretch",
            "mach",
            "method",
            "omega",
        ],
    )?;
    let d = MultiscaleParams::default();
    let params = MultiscaleParams {
        fine_sites: p.usize("fine_sites", d.fine_sites)?,
        block: p.usize("block", d.block)?,
        omega: p.f64("omega", d.omega)?,
        density_amp: p.f64("density_amp", d.density_amp)?,
        mach: p.f64("mach", d.mach)?,
        method: p.method("method", d.method)?,
        coarse_stretch: p.usize("coarse_stretch", d.coarse_stretch)?,
        fine_stretch: p.usize("fine_stretch", d.fine_stretch)?,
        cycles: p.usize("cycles", d.cycles)?,
    };
    let echo = echo_map([
        ("block", params.block.to_string()),
        ("coarse_stretch", params.coarse_stretch.to_string()),
        ("cycles", params.cycles.to_string()),
        ("density_amp", params.density_amp.to_string()),
        ("fine_sites", params.fine_sites.to_string()),
        ("fine_stretch", params.fine_stretch.to_string()),
        ("mach", params.mach.to_string()),
        ("method", params.method.label().to_string()),
        ("omega", params.omega.to_string()),
    ]);
    Ok((multiscale_run(&params)?.table, echo))
}
