//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::baseline::{auto_point, Transit};
use crate::error::{ModelError, Result};
use crate::optimize::{lin_space, log_space};
use crate::output::{emit, Format, Record, RecordKind};
use crate::pareto::{default_m_range, mode_niches, pareto_frontier, ModeInput, DEFAULT_SAMPLES};
use crate::policy::Policy;
use crate::sim::{self, SimConfig};
use crate::steady::{
    critical_fleet, default_grid, mode_label, performance_curve, point_at_fleet, PerformanceCurve, DEFAULT_N_MAX,
    DEFAULT_N_MIN, DEFAULT_POINTS,
};
use crate::svg::{Plot, Series, Style};
use crate::units::{Scenario, DEFAULT_K};

#[derive(Debug, Parser)]
#[command(name = "ridemodel", version, about = "Fleet size versus travel time for door-to-door transit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace the travel-time ratio against fleet size.
    Curve(CurveArgs),
    /// Critical (smallest steady-state) fleet size.
    Mc(ScenarioArgs),
    /// Pareto frontier across modes, followed by each mode's niche.
    Pareto(ParetoArgs),
    /// Agent-based simulation at one fleet size.
    Simulate(SimulateArgs),
    /// Smallest fleet: analytic, or simulated with --sim.
    Minfleet(MinfleetArgs),
    /// Simulated against analytic travel times at several fleet sizes.
    Compare(CompareArgs),
    /// Data behind one of the standard figures.
    Figure(FigureArgs),
}

#[derive(Debug, Clone, Args)]
struct ScenarioArgs {
    #[arg(long)]
    policy: Policy,
    #[arg(long)]
    pi: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    /// Vehicle capacity; defaults to 1 for taxi and 2 otherwise.
    #[arg(long)]
    c: Option<usize>,
}

impl ScenarioArgs {
    fn capacity(&self) -> usize {
        self.c.unwrap_or_else(|| self.policy.default_capacity())
    }

    fn scenario(&self) -> Result<Scenario> {
        Scenario::new(self.policy, self.pi, self.k, self.capacity())
    }
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = DEFAULT_N_MIN)]
    n_min: f64,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long)]
    pi: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    /// Comma-separated modes: taxi, shared_a, shared_b, dar_cN, transit, auto.
    #[arg(long, value_delimiter = ',', default_value = "taxi,shared_a,shared_b,dar_c2,dar_c3,dar_c5,transit")]
    modes: Vec<ModeSpec>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long)]
    m_min: Option<f64>,
    #[arg(long)]
    m_max: Option<f64>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = sim::DEFAULT_WARMUP)]
    warmup: usize,
    #[arg(long, default_value_t = sim::DEFAULT_SAMPLE)]
    sample: usize,
}

impl SimArgs {
    fn config(&self, s: &ScenarioArgs, m: usize, default_reps: usize) -> SimConfig {
        SimConfig {
            k: s.k,
            ..SimConfig::new(s.policy, m, s.pi)
                .with_capacity(s.capacity())
                .with_seed(self.seed)
                .with_sample(self.warmup, self.sample)
                .with_replications(self.reps.unwrap_or(default_reps))
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    m: usize,
    #[command(flatten)]
    sim: SimArgs,
    /// Write every passenger of the first replication to this CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct MinfleetArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    sim: bool,
    #[command(flatten)]
    sim_args: SimArgs,
    /// Largest fleet tried by the simulated search.
    #[arg(long, default_value_t = 100_000)]
    limit: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    m_list: Vec<usize>,
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FigureName {
    Fig7,
    Fig8a,
    Fig8b,
}

impl FigureName {
    fn pi(self) -> f64 {
        match self {
            FigureName::Fig7 => 100.0,
            FigureName::Fig8a => 1000.0,
            FigureName::Fig8b => 10000.0,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FigureName::Fig7 => "fig7",
            FigureName::Fig8a => "fig8a",
            FigureName::Fig8b => "fig8b",
        }
    }
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, value_enum)]
    name: FigureName,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: f64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

/// One entry of a `--modes` list.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ModeSpec {
    Flexible(Policy, usize),
    Transit,
    Auto,
}

impl std::str::FromStr for ModeSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "transit" => return Ok(ModeSpec::Transit),
            "auto" => return Ok(ModeSpec::Auto),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("dar") {
            let digits = rest.trim_start_matches(['_', '-', 'c']);
            if digits.is_empty() {
                return Ok(ModeSpec::Flexible(Policy::Dar, Policy::Dar.default_capacity()));
            }
            let c = digits.parse().map_err(|_| ModelError::Config(format!("bad dial-a-ride mode '{s}'")))?;
            return Ok(ModeSpec::Flexible(Policy::Dar, c));
        }
        let policy: Policy = s.parse()?;
        Ok(ModeSpec::Flexible(policy, policy.default_capacity()))
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status: 0 on success, 1 on a model error, 2 on a usage error.
pub fn run_command(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Curve(a) => curve(a, out),
        Command::Mc(a) => mc(a, out),
        Command::Pareto(a) => pareto(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Minfleet(a) => minfleet(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Figure(a) => figure(a, out),
    }
}

fn io_err(e: std::io::Error) -> ModelError {
    ModelError::Output(e.to_string())
}

/// Blank line between two tables of one CSV stream.
fn separator(format: Format, out: &mut dyn Write) -> Result<()> {
    if format == Format::Csv {
        out.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

fn curve(a: CurveArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.n_min > 0.0 && a.n_max > a.n_min) || a.points < 2 {
        return Err(ModelError::Domain("need 0 < n-min < n-max and at least two points".into()));
    }
    let curve = performance_curve(&a.scenario.scenario()?, &log_space(a.n_min, a.n_max, a.points))?;
    let records: Vec<Record> = curve.points.iter().map(|p| Record::curve(&curve, p)).collect();
    emit(RecordKind::Curve, &records, a.format, out)
}

fn mc_line(scenario: &Scenario) -> Result<String> {
    let cf = critical_fleet(scenario)?;
    Ok(if cf.attained {
        format!("{:.2}", cf.m_c)
    } else {
        format!("{:.2} (infimum, not attained)", cf.m_c)
    })
}

fn mc(a: ScenarioArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "{}", mc_line(&a.scenario()?)?).map_err(io_err)
}

fn mode_inputs(modes: &[ModeSpec], pi: f64, k: f64) -> Result<Vec<ModeInput>> {
    modes
        .iter()
        .map(|mode| {
            Ok(match *mode {
                ModeSpec::Flexible(policy, c) => {
                    ModeInput::Curve(performance_curve(&Scenario::new(policy, pi, k, c)?, &default_grid())?)
                }
                ModeSpec::Transit => ModeInput::Transit(Transit::default()),
                ModeSpec::Auto => ModeInput::Auto { pi },
            })
        })
        .collect()
}

fn pareto(a: ParetoArgs, out: &mut dyn Write) -> Result<()> {
    let (lo, hi) = default_m_range(a.pi);
    let range = (a.m_min.unwrap_or(lo), a.m_max.unwrap_or(hi));
    let inputs = mode_inputs(&a.modes, a.pi, a.k)?;
    let frontier = pareto_frontier(&inputs, range, a.samples)?;
    let points: Vec<Record> = frontier.iter().map(Record::frontier).collect();
    emit(RecordKind::Frontier, &points, a.format, out)?;
    separator(a.format, out)?;
    let niches: Vec<Record> = mode_niches(&frontier).iter().map(Record::niche).collect();
    emit(RecordKind::Niche, &niches, a.format, out)
}

fn analytic_at(scenario: &Scenario, m: usize) -> Option<f64> {
    point_at_fleet(scenario, m as f64).ok().map(|p| p.f_t)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = a.scenario.scenario()?;
    let cfg = a.sim.config(&a.scenario, a.m, 1);
    let results = sim::simulate_replications(&cfg)?;
    if let Some(path) = &a.trace {
        let (_, passengers) = sim::simulate_traced(&cfg)?;
        let rows: Vec<Record> = passengers.iter().map(Record::trace).collect();
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        emit(RecordKind::Trace, &rows, Format::Csv, &mut file)?;
        file.flush().map_err(io_err)?;
    }
    let analytic = analytic_at(&scenario, a.m);
    let records: Vec<Record> = results.iter().map(|r| Record::sim(r, a.scenario.pi, analytic)).collect();
    emit(RecordKind::Sim, &records, a.format, out)
}

fn minfleet(a: MinfleetArgs, out: &mut dyn Write) -> Result<()> {
    let scenario = a.scenario.scenario()?;
    if !a.sim {
        return writeln!(out, "{}", mc_line(&scenario)?).map_err(io_err);
    }
    let cfg = a.sim_args.config(&a.scenario, 1, 5);
    let search = sim::min_feasible_fleet(&cfg, a.limit)?;
    writeln!(out, "{}", search.m).map_err(io_err)
}

fn compare(a: CompareArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.sim.config(&a.scenario, 1, sim::DEFAULT_REPLICATIONS);
    let cmp = sim::compare(&cfg, &a.m_list)?;
    let label = mode_label(cfg.policy, cfg.c);
    let rows: Vec<Record> = cmp.rows.iter().map(|r| Record::compare(r, &label, cfg.c, cfg.pi)).collect();
    emit(RecordKind::Compare, &rows, a.format, out)?;
    separator(a.format, out)?;
    emit(RecordKind::Shift, &[Record::shift(&label, cfg.c, cfg.pi, cmp.shift)], a.format, out)
}

const FIGURE_MODES: [(Policy, usize); 6] = [
    (Policy::Taxi, 1),
    (Policy::SharedA, 2),
    (Policy::SharedB, 2),
    (Policy::Dar, 2),
    (Policy::Dar, 3),
    (Policy::Dar, 5),
];

/// Every curve of a figure, one per flexible mode.
pub fn figure_curves(pi: f64, k: f64) -> Result<Vec<PerformanceCurve>> {
    FIGURE_MODES
        .iter()
        .map(|&(policy, c)| performance_curve(&Scenario::new(policy, pi, k, c)?, &default_grid()))
        .collect()
}

fn figure(a: FigureArgs, out: &mut dyn Write) -> Result<()> {
    let name = a.name.name();
    let pi = a.name.pi();
    let curves = figure_curves(pi, a.k)?;
    let (m_lo, m_hi) = default_m_range(pi);
    let transit = Transit::default();
    let transit_pts: Vec<(f64, f64)> =
        lin_space(m_lo, m_hi, 400).into_iter().map(|m| Ok((m, transit.time_ratio(m)?))).collect::<Result<_>>()?;
    let auto = auto_point(pi)?;

    let mut records = Vec::new();
    for curve in &curves {
        let label = curve.label();
        records.extend(curve.points.iter().map(|p| Record::series(name, &label, p.m, p.f_t)));
    }
    records.extend(transit_pts.iter().map(|&(m, f)| Record::series(name, "transit", m, f)));
    records.push(Record::baseline(name, &auto));
    emit(RecordKind::Series, &records, a.format, out)?;

    if let Some(path) = &a.svg {
        let mut series: Vec<Series> = curves
            .iter()
            .map(|c| Series { label: c.label(), points: c.points.iter().map(|p| (p.m, p.f_t)).collect(), style: Style::Line })
            .collect();
        series.push(Series { label: "transit".into(), points: transit_pts, style: Style::Line });
        series.push(Series { label: "auto".into(), points: vec![(auto.m, auto.f)], style: Style::Markers });
        let plot = Plot {
            title: format!("Travel time ratio against fleet size, pi = {pi}"),
            x_label: "fleet size m".into(),
            y_label: "f_t".into(),
            x_range: (0.0, m_hi),
            y_range: (0.0, 6.0),
            series,
        };
        std::fs::write(path, plot.render()).map_err(io_err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("ridemodel").chain(args.iter().copied()).map(String::from).collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(&argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn mode_specs() {
        assert_eq!("taxi".parse::<ModeSpec>().unwrap(), ModeSpec::Flexible(Policy::Taxi, 1));
        assert_eq!("dar_c5".parse::<ModeSpec>().unwrap(), ModeSpec::Flexible(Policy::Dar, 5));
        assert_eq!("dar3".parse::<ModeSpec>().unwrap(), ModeSpec::Flexible(Policy::Dar, 3));
        assert_eq!("dar".parse::<ModeSpec>().unwrap(), ModeSpec::Flexible(Policy::Dar, 2));
        assert_eq!("Shared-B".parse::<ModeSpec>().unwrap(), ModeSpec::Flexible(Policy::SharedB, 2));
        assert_eq!("auto".parse::<ModeSpec>().unwrap(), ModeSpec::Auto);
        assert!("bus".parse::<ModeSpec>().is_err());
        assert!("dar_cx".parse::<ModeSpec>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["mc", "--policy", "taxi", "--pi", "100"]).0, 0);
        assert_eq!(run(&["mc", "--policy", "taxi", "--pi", "100", "--bogus"]).0, 2);
        assert_eq!(run(&["mc", "--policy", "bus", "--pi", "100"]).0, 2);
        assert_eq!(run(&[]).0, 2);
        let (code, _, err) = run(&["mc", "--policy", "taxi", "--pi=-5"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
        assert_eq!(run(&["mc", "--policy", "taxi", "--pi", "100", "--c", "2"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn mc_output() {
        assert_eq!(run(&["mc", "--policy", "taxi", "--pi", "100", "--k", "0.63"]).1, "92.92\n");
        assert_eq!(run(&["mc", "--policy", "dar", "--pi", "100", "--c", "2"]).1, "44.55 (infimum, not attained)\n");
        assert_eq!(run(&["minfleet", "--policy", "shared-b", "--pi", "100"]).1, "81.54\n");
    }
}
