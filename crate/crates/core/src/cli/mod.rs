//! `isac-bounds` command line.
//!
//! Exit codes: 0 success, 1 validation tolerance failure, 2 usage or invalid
//! input, 3 I/O, 4 computation infeasible.

pub mod emit;
pub mod validate;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{link_label, Network};
use crate::engine::{
    evaluate_metric, heatmap, load_scenario, select_nodes, select_tx, sweep, with_workers, GridSpec,
    McConfig, Metric, Selection, SelectionProblem, SweepParam,
};
use crate::error::Error;
use crate::link::{link_snr, scalar_crlbs, LinkBudget, LinkGeometry, LinkKind};
use crate::model::{Scenario, TargetState};

pub use emit::{emit_table, format_num, Cell, Format, Table};

pub const THREADS_ENV: &str = "ISAC_BOUNDS_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "isac-bounds", version, about = "Error bounds for OFDM MIMO sensing networks")]
pub struct Command {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Per-link SNR and scalar CRLBs at a target.
    Link(PointArgs),
    /// Network position error bound at a target.
    Peb(PointArgs),
    /// Network velocity error bounds at a target.
    Veb(VelocityArgs),
    /// Metric over a rectangular grid of target positions.
    Heatmap(HeatmapArgs),
    /// Metric at a target as one radio parameter varies.
    Sweep(SweepArgs),
    /// Best subset of `--choose` nodes for a metric.
    SelectBs(SelectArgs),
    /// Best single transmitter, all other nodes receiving.
    SelectTx(SelectTxArgs),
    /// Compare closed forms against the numerical oracles.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Monte-Carlo heading draws.
    #[arg(long = "mc", default_value_t = 1000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target speed for random headings (m/s).
    #[arg(long, default_value_t = 22.0)]
    pub speed: f64,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig {
            draws: self.draws,
            seed: self.seed,
            speed: self.speed,
        }
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Target position `x,y` (m).
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub target: [f64; 2],
    /// Target radar cross-section (m²).
    #[arg(long, default_value_t = 1.0)]
    pub rcs: f64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct VelocityArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Target velocity `vx,vy` (m/s). Without it, bounds are averaged over
    /// random headings.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub velocity: Option<[f64; 2]>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// `x_min:x_max:step,y_min:y_max:step` (m); both steps must agree.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, default_value = "peb", value_parser = parse_metric)]
    pub metric: Metric,
    #[command(flatten)]
    pub mc: McArgs,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// frac_subcarriers, frac_symbols or n_rx_ant.
    #[arg(long, value_parser = parse_sweep_param)]
    pub param: SweepParam,
    /// Comma-separated list or `start:stop:step`.
    #[arg(long, value_parser = parse_values, allow_hyphen_values = true)]
    pub values: Values,
    #[arg(long, default_value = "peb", value_parser = parse_metric)]
    pub metric: Metric,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub velocity: Option<[f64; 2]>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Subset size.
    #[arg(long)]
    pub choose: usize,
    #[arg(long, default_value = "peb", value_parser = parse_metric)]
    pub metric: Metric,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct SelectTxArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value = "peb", value_parser = parse_metric)]
    pub metric: Metric,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Random FIM cases; Jacobians use half as many.
    #[arg(long, default_value_t = 200)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
        .and_then(|v| if v.is_finite() { Ok(v) } else { Err(format!("`{s}` is not finite")) })
}

pub fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    match s.split(',').collect::<Vec<_>>()[..] {
        [a, b] => Ok([parse_num(a)?, parse_num(b)?]),
        _ => Err(format!("expected `x,y`, got `{s}`")),
    }
}

fn parse_range(s: &str) -> Result<[f64; 3], String> {
    match s.split(':').collect::<Vec<_>>()[..] {
        [a, b, c] => Ok([parse_num(a)?, parse_num(b)?, parse_num(c)?]),
        _ => Err(format!("expected `min:max:step`, got `{s}`")),
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let (xs, ys) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x0:x1:step,y0:y1:step`, got `{s}`"))?;
    let [x_min, x_max, sx] = parse_range(xs)?;
    let [y_min, y_max, sy] = parse_range(ys)?;
    if sx != sy {
        return Err("x and y steps must be equal".into());
    }
    let g = GridSpec {
        x_min,
        x_max,
        y_min,
        y_max,
        step: sx,
    };
    g.validate().map_err(|e| e.to_string())?;
    Ok(g)
}

pub fn parse_values(s: &str) -> Result<Values, String> {
    if s.contains(':') {
        let [a, b, step] = parse_range(s)?;
        if !(step > 0.0 && b >= a) {
            return Err("range needs step > 0 and stop >= start".into());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok(Values((0..=n).map(|i| a + i as f64 * step).collect()));
    }
    s.split(',').map(parse_num).collect::<Result<_, _>>().map(Values)
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of one command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::DegenerateConstellation { .. }
            | Error::InsufficientResources { .. }
            | Error::Scenario(_) => EXIT_USAGE,
            _ => EXIT_INFEASIBLE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn read_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    load_scenario(&text).map_err(|e| Failure {
        code: match e {
            Error::NoInformation => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        },
        message: format!("{}: {e}", path.display()),
    })
}

fn target(p: &PointArgs, velocity: Option<[f64; 2]>) -> Result<TargetState, Failure> {
    let t = TargetState::new(p.target, velocity.unwrap_or([0.0, 0.0])).with_rcs(p.rcs);
    t.validate()?;
    Ok(t)
}

fn write_out(t: &Table, out: &Output, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &out.output {
        Some(path) => {
            let mut f = fs::File::create(path).map_err(|e| Failure::io(path, e))?;
            emit_table(t, out.format, &mut f).map_err(|e| Failure::io(path, e))
        }
        None => emit_table(t, out.format, stdout).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("stdout: {e}"),
        }),
    }
}

fn link_table(a: &PointArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.scenario)?;
    let t = target(a, None)?;
    let lam = s.params.wavelength();
    let mut table = Table::new(vec![
        "link",
        "kind",
        "snr_db",
        "crlb_alpha",
        "crlb_phi",
        "crlb_fd",
        "crlb_tau",
        "crlb_theta",
        "crlb_range",
        "flag",
    ]);
    for link in s.links() {
        let label = link_label(&link);
        let budget = LinkBudget::with_power(t.rcs, s.sensing_power(link.tx));
        let r = LinkGeometry::observe(&link, &t, lam).and_then(|(g, _)| {
            let snr = link_snr(&s.params, &g, &budget)?;
            Ok((g, snr, scalar_crlbs(&s.params, &g, &budget)?))
        });
        let row = match r {
            Ok((g, snr, c)) => {
                let (kind, range) = match g.kind {
                    LinkKind::Monostatic => ("monostatic", c.range),
                    LinkKind::Bistatic => ("bistatic", c.bistatic_range),
                };
                vec![
                    label.into(),
                    kind.into(),
                    (10.0 * snr.snr.log10()).into(),
                    c.alpha.into(),
                    c.phi.into(),
                    c.fd.into(),
                    c.tau.into(),
                    c.theta.into(),
                    range.into(),
                    "".into(),
                ]
            }
            Err(e) => {
                let flag = match e {
                    Error::OutOfField { .. } => format!("out_of_field:{label}"),
                    Error::SingularGeometry(_) => format!("coincident:{label}"),
                    other => return Err(other.into()),
                };
                let kind = if link.is_monostatic() { "monostatic" } else { "bistatic" };
                let mut row = vec![label.into(), kind.into(), f64::NAN.into()];
                row.extend((0..6).map(|_| Cell::Num(f64::INFINITY)));
                row.push(flag.into());
                row
            }
        };
        table.push(row);
    }
    Ok(table)
}

fn peb_table(a: &PointArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.scenario)?;
    let t = target(a, None)?;
    let b = Network::build(&s, &t)?.peb();
    let mut table = Table::new(vec!["x", "y", "peb", "flag"]);
    table.push(vec![
        t.position.x.into(),
        t.position.y.into(),
        b.value.into(),
        join(b.flags.iter().map(|f| f.to_string())).into(),
    ]);
    Ok(table)
}

fn join(it: impl Iterator<Item = String>) -> String {
    let mut v: Vec<String> = Vec::new();
    for s in it {
        if !v.contains(&s) {
            v.push(s);
        }
    }
    v.join(";")
}

fn veb_table(a: &VelocityArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.point.scenario)?;
    let t = target(&a.point, a.velocity)?;
    let (x, y) = (t.position.x, t.position.y);
    if a.velocity.is_some() {
        let net = Network::build(&s, &t)?;
        let approx = net.velocity_bounds(&t.velocity)?;
        let exact = net.velocity_bounds_exact(&t.velocity)?;
        let mut table = Table::new(vec![
            "x",
            "y",
            "vx",
            "vy",
            "veb",
            "veb_exact",
            "crlb_speed",
            "crlb_heading",
            "flag",
        ]);
        table.push(vec![
            x.into(),
            y.into(),
            t.velocity.x.into(),
            t.velocity.y.into(),
            approx.veb.into(),
            exact.veb.into(),
            approx.crlb_speed.into(),
            approx.crlb_heading.into(),
            join(approx.flags.iter().chain(&exact.flags).map(|f| f.to_string())).into(),
        ]);
        return Ok(table);
    }
    let mc = a.mc.config();
    mc.validate()?;
    let mut table = Table::new(vec!["x", "y", "metric", "value", "flag"]);
    for m in [Metric::Veb, Metric::VebExact, Metric::CrlbHeading] {
        let mut rng = mc.stream(0);
        let v = evaluate_metric(&s, &t, m, Some((&mc, &mut rng)))?;
        table.push(vec![x.into(), y.into(), m.name().into(), v.value.into(), v.flag.into()]);
    }
    Ok(table)
}

fn heatmap_table(a: &HeatmapArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.scenario)?;
    let cells = heatmap(&s, &a.grid, a.metric, &a.mc.config())?;
    let mut table = Table::new(vec!["x", "y", "metric", "value", "flag"]);
    for c in cells {
        table.push(vec![c.x.into(), c.y.into(), c.metric.name().into(), c.value.into(), c.flag.into()]);
    }
    Ok(table)
}

fn sweep_table(a: &SweepArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.point.scenario)?;
    let t = target(&a.point, a.velocity)?;
    let mc = a.mc.config();
    let use_mc = a.metric.needs_velocity() && a.velocity.is_none();
    if use_mc {
        mc.validate()?;
    }
    let pts = sweep(&s, &t, a.param, &a.values.0, a.metric, use_mc.then_some(&mc));
    let mut table = Table::new(vec!["parameter", "parameter_value", "metric", "value", "flag", "error"]);
    for p in pts {
        table.push(vec![
            a.param.name().into(),
            p.parameter.into(),
            a.metric.name().into(),
            p.value.into(),
            p.flag.into(),
            p.error.unwrap_or_default().into(),
        ]);
    }
    Ok(table)
}

fn selection_table(sel: Selection, id_col: &'static str, metric: Metric) -> Table {
    let mut table = Table::new(vec!["rank", id_col, "metric", "value", "flag"]);
    for (i, r) in sel.ranking.into_iter().enumerate() {
        table.push(vec![
            (i + 1).into(),
            r.ids.join("+").into(),
            metric.name().into(),
            r.value.into(),
            r.flag.into(),
        ]);
    }
    table
}

fn select_bs_table(a: &SelectArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.point.scenario)?;
    let t = target(&a.point, None)?;
    let mc = a.mc.config();
    let sel = select_nodes(&SelectionProblem {
        params: s.params.clone(),
        candidates: s.nodes.clone(),
        choose: a.choose,
        metric: a.metric,
        target: t,
        mc,
        policy: s.power_policy,
    })?;
    Ok(selection_table(sel, "nodes", a.metric))
}

fn select_tx_table(a: &SelectTxArgs) -> Result<Table, Failure> {
    let s = read_scenario(&a.point.scenario)?;
    let t = target(&a.point, None)?;
    let sel = select_tx(&s, &t, a.metric, &a.mc.config())?;
    Ok(selection_table(sel, "tx", a.metric))
}

fn validate_table(a: &ValidateArgs) -> Result<(Table, bool), Failure> {
    if a.draws == 0 {
        return Err(Error::invalid("draws", "must be at least 1").into());
    }
    let checks = validate::run_suite(a.seed, a.draws);
    let ok = checks.iter().all(|c| c.passed());
    let mut table = Table::new(vec!["check", "cases", "worst", "tolerance", "failures", "status"]);
    for c in checks {
        let status = if c.passed() { "pass" } else { "fail" };
        table.push(vec![
            c.name.into(),
            c.cases.into(),
            c.worst.into(),
            c.tolerance.into(),
            c.failures.into(),
            status.into(),
        ]);
    }
    Ok((table, ok))
}

/// Worker count from [`THREADS_ENV`]; unset means automatic.
pub fn worker_count() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure {
            code: EXIT_USAGE,
            message: format!("{THREADS_ENV}=`{v}` is not a non-negative integer"),
        }),
        Err(_) => Ok(0),
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let (table, out, code) = match &cmd.verb {
        Verb::Link(a) => (link_table(a)?, &a.out, EXIT_OK),
        Verb::Peb(a) => (peb_table(a)?, &a.out, EXIT_OK),
        Verb::Veb(a) => (veb_table(a)?, &a.point.out, EXIT_OK),
        Verb::Heatmap(a) => (heatmap_table(a)?, &a.out, EXIT_OK),
        Verb::Sweep(a) => (sweep_table(a)?, &a.point.out, EXIT_OK),
        Verb::SelectBs(a) => (select_bs_table(a)?, &a.point.out, EXIT_OK),
        Verb::SelectTx(a) => (select_tx_table(a)?, &a.point.out, EXIT_OK),
        Verb::Validate(a) => {
            let (t, ok) = validate_table(a)?;
            (t, &a.out, if ok { EXIT_OK } else { EXIT_VALIDATION })
        }
    };
    write_out(&table, out, stdout)?;
    Ok(code)
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cmd = match Command::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = if e.use_stderr() { e.render().to_string() } else { e.to_string() };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    match worker_count().and_then(|n| run_in_pool(n, &cmd, stdout)) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn run_in_pool(workers: usize, cmd: &Command, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut buf = Vec::new();
    let code = with_workers(workers, || dispatch(cmd, &mut buf))??;
    stdout.write_all(&buf).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("stdout: {e}"),
    })?;
    Ok(code)
}
