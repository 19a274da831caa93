use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use clb::run::{execute, RunConfig, COMMANDS};

/// Desk-scale laboratory for lifted lattice-fluid marching: truncation
/// studies, a second-order lattice embedding, block-encoded post-selected
/// stepping, resource reports, and fine/coarse hybrid runs, all emitted as
/// provenance-stamped CSV.
#[derive(Parser)]
#[command(name = "clb", version, disable_help_subcommand = true)]
struct Cli {
    /// INI config file: one [command] section per command plus repeated
    /// [scenario] blocks. Flags override config values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the CSV artifact here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed recorded in the provenance header.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stable and blow-up trajectories of the quadratic test flow.
    Fig1(Fig1Args),
    /// Truncated-hierarchy trajectories against the closed form.
    Fig2(Fig2Args),
    /// Truncation error versus the nonlinearity ratio at fixed time.
    Fig3(Fig3Args),
    /// Minimum truncation order over the ratio/tolerance plane.
    Fig4(Fig4Args),
    /// Per-step success-probability floors and ancilla ceilings.
    Fig6(Fig6Args),
    /// Lifted lattice march error against the classical solver.
    LbmError(LbmErrorArgs),
    /// Block-encoded post-selected marching probabilities.
    BlockEncode(BlockEncodeArgs),
    /// Resource report over the configured flow scenarios.
    AdvantageReport(AdvantageReportArgs),
    /// Hybrid fine/coarse marching error table.
    Multiscale(MultiscaleArgs),
}

/// Collects only the flags the user actually set, as config-key strings.
struct Overrides(BTreeMap<String, String>);

impl Overrides {
    fn new() -> Self {
        Overrides(BTreeMap::new())
    }

    fn put<T: std::fmt::Display>(&mut self, key: &str, value: &Option<T>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.to_string());
        }
    }
}

#[derive(Args)]
struct Fig1Args {
    #[arg(long)]
    x0_stable: Option<f64>,
    #[arg(long)]
    x0_unstable: Option<f64>,
    /// Linear decay rate of the test flow.
    #[arg(long)]
    a: Option<f64>,
    /// Nonlinearity ratio R = b/a fixing the quadratic coefficient.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Number of sample times in the table.
    #[arg(long)]
    points: Option<usize>,
    /// Internal integrator step.
    #[arg(long)]
    dt: Option<f64>,
}

impl Fig1Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("x0_stable", &self.x0_stable);
        o.put("x0_unstable", &self.x0_unstable);
        o.put("a", &self.a);
        o.put("ratio", &self.ratio);
        o.put("t_end", &self.t_end);
        o.put("points", &self.points);
        o.put("dt", &self.dt);
        o.0
    }
}

#[derive(Args)]
struct Fig2Args {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    /// Comma-separated truncation orders, e.g. 1,2,3,4.
    #[arg(long)]
    orders: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

impl Fig2Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("x0", &self.x0);
        o.put("a", &self.a);
        o.put("ratio", &self.ratio);
        o.put("orders", &self.orders);
        o.put("t_end", &self.t_end);
        o.put("points", &self.points);
        o.0
    }
}

#[derive(Args)]
struct Fig3Args {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Evaluation time for the error profile.
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated truncation orders.
    #[arg(long)]
    orders: Option<String>,
    #[arg(long)]
    ratio_points: Option<usize>,
    #[arg(long)]
    ratio_max: Option<f64>,
}

impl Fig3Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("x0", &self.x0);
        o.put("a", &self.a);
        o.put("t", &self.t);
        o.put("orders", &self.orders);
        o.put("ratio_points", &self.ratio_points);
        o.put("ratio_max", &self.ratio_max);
        o.0
    }
}

#[derive(Args)]
struct Fig4Args {
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    ratio_points: Option<usize>,
    #[arg(long)]
    ratio_max: Option<f64>,
    #[arg(long)]
    eps_points: Option<usize>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    /// Highest truncation order searched before reporting no-fit.
    #[arg(long)]
    k_cap: Option<usize>,
}

impl Fig4Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("x0", &self.x0);
        o.put("a", &self.a);
        o.put("t", &self.t);
        o.put("ratio_points", &self.ratio_points);
        o.put("ratio_max", &self.ratio_max);
        o.put("eps_points", &self.eps_points);
        o.put("eps_min", &self.eps_min);
        o.put("eps_max", &self.eps_max);
        o.put("k_cap", &self.k_cap);
        o.0
    }
}

#[derive(Args)]
struct Fig6Args {
    /// Longest march length T in the table.
    #[arg(long)]
    t_max: Option<u64>,
    /// Truncation order entering the qubit count.
    #[arg(long)]
    k: Option<u32>,
    /// Comma-separated ancilla widths for the ceiling columns, e.g. 1,7.
    #[arg(long)]
    qa_list: Option<String>,
    /// Logarithm base for the qubit count: natural or log2.
    #[arg(long)]
    log_base: Option<String>,
}

impl Fig6Args {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("t_max", &self.t_max);
        o.put("k", &self.k);
        o.put("qa_list", &self.qa_list);
        o.put("log_base", &self.log_base);
        o.0
    }
}

#[derive(Args)]
struct LbmErrorArgs {
    /// Number of lattice sites.
    #[arg(long)]
    g: Option<usize>,
    /// BGK relaxation rate in [0, 2).
    #[arg(long)]
    omega: Option<f64>,
    /// Velocity amplitude of the initial sine wave.
    #[arg(long)]
    mach: Option<f64>,
    /// Density amplitude of the initial sine wave.
    #[arg(long)]
    density_amp: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

impl LbmErrorArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("g", &self.g);
        o.put("omega", &self.omega);
        o.put("mach", &self.mach);
        o.put("density_amp", &self.density_amp);
        o.put("steps", &self.steps);
        o.0
    }
}

#[derive(Args)]
struct BlockEncodeArgs {
    /// Number of lattice sites (kept small: the dilated unitary is dense).
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    mach: Option<f64>,
    #[arg(long)]
    density_amp: Option<f64>,
    /// Post-selected steps to march.
    #[arg(long)]
    steps: Option<usize>,
    /// Ancilla width of the dilation; defaults to the sparse-scaling width.
    #[arg(long)]
    q_a: Option<u32>,
}

impl BlockEncodeArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("g", &self.g);
        o.put("omega", &self.omega);
        o.put("mach", &self.mach);
        o.put("density_amp", &self.density_amp);
        o.put("steps", &self.steps);
        o.put("q_a", &self.q_a);
        o.0
    }
}

#[derive(Args)]
struct AdvantageReportArgs {
    /// Truncation order entering qubit and step budgets.
    #[arg(long)]
    k: Option<u32>,
    /// Ancilla width entering the step budget.
    #[arg(long)]
    q_a: Option<u32>,
    /// Logarithm base for the qubit count: natural or log2.
    #[arg(long)]
    log_base: Option<String>,
}

impl AdvantageReportArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("k", &self.k);
        o.put("q_a", &self.q_a);
        o.put("log_base", &self.log_base);
        o.0
    }
}

#[derive(Args)]
struct MultiscaleArgs {
    #[arg(long)]
    fine_sites: Option<usize>,
    /// Coarse-graining block size.
    #[arg(long)]
    block: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    density_amp: Option<f64>,
    #[arg(long)]
    mach: Option<f64>,
    /// Reconstruction: inject, linear, or least-squares.
    #[arg(long)]
    method: Option<String>,
    /// Coarse-segment length per cycle, in fine steps.
    #[arg(long)]
    coarse_stretch: Option<usize>,
    /// Fine-segment length per cycle, in fine steps.
    #[arg(long)]
    fine_stretch: Option<usize>,
    /// Number of coarse+fine cycles in the schedule.
    #[arg(long)]
    cycles: Option<usize>,
}

impl MultiscaleArgs {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut o = Overrides::new();
        o.put("fine_sites", &self.fine_sites);
        o.put("block", &self.block);
        o.put("omega", &self.omega);
        o.put("density_amp", &self.density_amp);
        o.put("mach", &self.mach);
        o.put("method", &self.method);
        o.put("coarse_stretch", &self.coarse_stretch);
        o.put("fine_stretch", &self.fine_stretch);
        o.put("cycles", &self.cycles);
        o.0
    }
}

impl Command {
    fn into_parts(self) -> (&'static str, BTreeMap<String, String>) {
        match self {
            Command::Fig1(a) => ("fig1", a.overrides()),
            Command::Fig2(a) => ("fig2", a.overrides()),
            Command::Fig3(a) => ("fig3", a.overrides()),
            Command::Fig4(a) => ("fig4", a.overrides()),
            Command::Fig6(a) => ("fig6", a.overrides()),
            Command::LbmError(a) => ("lbm-error", a.overrides()),
            Command::BlockEncode(a) => ("block-encode", a.overrides()),
            Command::AdvantageReport(a) => ("advantage-report", a.overrides()),
            Command::Multiscale(a) => ("multiscale", a.overrides()),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => e.exit(),
            ErrorKind::InvalidSubcommand | ErrorKind::UnknownArgument => {
                eprint!("{e}");
                eprintln!("valid commands: {}", COMMANDS.join(", "));
                exit(2);
            }
            _ => {
                eprint!("{e}");
                exit(2);
            }
        },
    };

    let (command, overrides) = cli.command.into_parts();
    let rc = RunConfig {
        command: command.to_string(),
        overrides,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
    };
    if let Err(err) = execute(&rc) {
        eprintln!("error: {err}");
        exit(err.exit_status());
    }
}
