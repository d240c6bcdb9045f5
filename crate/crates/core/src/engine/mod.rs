//! Scenario ingestion, power normalization, heatmaps, sweeps and subset
//! selection.

mod document;
mod select;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{Flag, Network};
use crate::error::{Error, Result};
use crate::model::{PowerPolicy, Scenario, TargetState};

pub use document::{
    load_scenario, scenario_to_json, ConstellationDoc, NodeDoc, ParamsDoc, PolicyDoc, RoleDoc,
    ScenarioDoc,
};
pub use select::{select_nodes, select_tx, Ranked, Selection, SelectionProblem};

/// Quantity reported per target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// m
    Peb,
    /// m/s, summed per-link velocity EFIMs.
    Veb,
    /// m/s, network-level Schur complement of the state EFIM.
    VebExact,
    /// rad²
    CrlbHeading,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Peb => "peb",
            Metric::Veb => "veb",
            Metric::VebExact => "veb_exact",
            Metric::CrlbHeading => "crlb_heading",
        }
    }

    pub fn needs_velocity(&self) -> bool {
        !matches!(self, Metric::Peb)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "peb" => Ok(Metric::Peb),
            "veb" => Ok(Metric::Veb),
            "veb_exact" => Ok(Metric::VebExact),
            "crlb_heading" | "heading" => Ok(Metric::CrlbHeading),
            _ => Err(Error::invalid("metric", format!("unknown metric `{s}`"))),
        }
    }
}

/// Monte-Carlo heading averaging: `draws` headings uniform on [0, 2π) at a
/// fixed speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub draws: usize,
    pub seed: u64,
    /// m/s
    pub speed: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            draws: 1000,
            seed: 0,
            speed: 22.0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws < 1 {
            return Err(Error::invalid("draws", "must be at least 1"));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(Error::invalid("speed", format!("{} is not positive", self.speed)));
        }
        Ok(())
    }

    /// Random stream for task `index`. Streams depend only on the seed and the
    /// index, never on scheduling.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// m
    pub step: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::invalid("grid", "step must be positive"));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::invalid("grid", "max must exceed min"));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
        let n = ((max - min) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| min + i as f64 * step).collect()
    }

    /// Grid points, x varying fastest.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let xs = Self::axis(self.x_min, self.x_max, self.step);
        let ys = Self::axis(self.y_min, self.y_max, self.step);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| [x, y]))
            .collect()
    }
}

/// One evaluated metric with the degeneracies behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub value: f64,
    /// `;`-separated flag list, empty when clean.
    pub flag: String,
}

impl MetricValue {
    fn infinite(flag: impl Into<String>) -> Self {
        Self {
            value: f64::INFINITY,
            flag: flag.into(),
        }
    }
}

fn join_flags(flags: &[Flag]) -> String {
    let mut seen: Vec<String> = Vec::new();
    for f in flags {
        let s = f.to_string();
        if !seen.contains(&s) {
            seen.push(s);
        }
    }
    seen.join(";")
}

fn velocity_value(net: &Network, metric: Metric, v: &Vector2<f64>) -> Result<(f64, Vec<Flag>)> {
    let b = match metric {
        Metric::VebExact => net.velocity_bounds_exact(v)?,
        _ => net.velocity_bounds(v)?,
    };
    let value = match metric {
        Metric::CrlbHeading => b.crlb_heading,
        _ => b.veb,
    };
    Ok((value, b.flags))
}

/// Evaluates `metric` at `t`. Velocity metrics use the target's own velocity
/// when `mc` is `None`, otherwise the mean over `mc.draws` random headings
/// drawn from `rng`. Any infinite draw makes the mean infinite.
pub fn evaluate_metric(
    s: &Scenario,
    t: &TargetState,
    metric: Metric,
    mc: Option<(&McConfig, &mut ChaCha8Rng)>,
) -> Result<MetricValue> {
    let net = match Network::build(s, t) {
        Ok(n) => n,
        Err(Error::NoInformation) => return Ok(MetricValue::infinite("no_information")),
        Err(e) => return Err(e),
    };
    if metric == Metric::Peb {
        let b = net.peb();
        return Ok(MetricValue {
            value: b.value,
            flag: join_flags(&b.flags),
        });
    }
    let Some((cfg, rng)) = mc else {
        let (value, flags) = velocity_value(&net, metric, &t.velocity)?;
        return Ok(MetricValue {
            value,
            flag: join_flags(&flags),
        });
    };
    cfg.validate()?;
    let mut sum = 0.0;
    let mut singular = 0usize;
    let mut flags = Vec::new();
    for _ in 0..cfg.draws {
        let h = rng.random_range(0.0..2.0 * PI);
        let v = Vector2::new(cfg.speed * h.cos(), cfg.speed * h.sin());
        let (value, f) = velocity_value(&net, metric, &v)?;
        if value.is_finite() {
            sum += value;
        } else {
            singular += 1;
        }
        for x in f {
            if !flags.contains(&x) {
                flags.push(x);
            }
        }
    }
    let mut flag = join_flags(&flags);
    if singular > 0 {
        if !flag.is_empty() {
            flag.push(';');
        }
        flag.push_str(&format!("singular_fraction={}", singular as f64 / cfg.draws as f64));
        return Ok(MetricValue { value: f64::INFINITY, flag });
    }
    Ok(MetricValue {
        value: sum / cfg.draws as f64,
        flag,
    })
}

/// Returns `s` with every transmitter's share of the sensing budget made
/// explicit. Under the normalized policy each of the `N_Tx` transmitters
/// (monostatic and tx nodes) gets `ρ_f·P_T/N_Tx`; the fixed policy is
/// returned unchanged.
pub fn normalize_power(s: &Scenario) -> Result<Scenario> {
    let mut out = s.clone();
    if s.power_policy != PowerPolicy::NormalizedTotal {
        return Ok(out);
    }
    let n = s.transmitter_count();
    if n == 0 {
        return Err(Error::NoInformation);
    }
    let share = s.params.sensing_power() / n as f64;
    for node in out.nodes.iter_mut() {
        node.sensing_power = node.role.transmits().then_some(share);
    }
    Ok(out)
}

/// Runs `f` on a pool of `workers` threads; 0 picks the rayon default.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub metric: Metric,
    pub value: f64,
    pub flag: String,
}

/// Evaluates `metric` over the grid. Cell `i` (x fastest) draws its headings
/// from stream `i` of `mc.seed`, so the output does not depend on the number
/// of workers.
pub fn heatmap(s: &Scenario, g: &GridSpec, metric: Metric, mc: &McConfig) -> Result<Vec<Cell>> {
    g.validate()?;
    s.validate()?;
    if metric.needs_velocity() {
        mc.validate()?;
    }
    g.points()
        .into_par_iter()
        .enumerate()
        .map(|(i, [x, y])| {
            let t = TargetState::at([x, y]);
            let mut rng = mc.stream(i as u64);
            let v = evaluate_metric(s, &t, metric, metric.needs_velocity().then_some((mc, &mut rng)))?;
            Ok(Cell {
                x,
                y,
                metric,
                value: v.value,
                flag: v.flag,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    FracSubcarriers,
    FracSymbols,
    NRxAnt,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::FracSubcarriers => "frac_subcarriers",
            SweepParam::FracSymbols => "frac_symbols",
            SweepParam::NRxAnt => "n_rx_ant",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "frac_subcarriers" | "rho_f" => Ok(SweepParam::FracSubcarriers),
            "frac_symbols" | "rho_t" => Ok(SweepParam::FracSymbols),
            "n_rx_ant" | "nr" => Ok(SweepParam::NRxAnt),
            _ => Err(Error::invalid("parameter", format!("unknown sweep parameter `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
    pub flag: String,
    /// Set when this parameter value is invalid; `value` is then NaN.
    pub error: Option<String>,
}

fn with_parameter(s: &Scenario, p: SweepParam, value: f64) -> Result<Scenario> {
    let mut out = s.clone();
    match p {
        SweepParam::FracSubcarriers => out.params.frac_subcarriers = value,
        SweepParam::FracSymbols => out.params.frac_symbols = value,
        SweepParam::NRxAnt => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(Error::invalid("n_rx_ant", format!("{value} is not a count")));
            }
            out.params.n_rx_ant = value as usize;
        }
    }
    crate::model::derive_frame(&out.params)?;
    out.validate()?;
    Ok(out)
}

/// One metric value per parameter value. Each point is an independent
/// evaluation; velocity metrics under `mc` reuse stream 0 of the seed at
/// every point so curves are not perturbed by sampling noise.
pub fn sweep(
    s: &Scenario,
    t: &TargetState,
    parameter: SweepParam,
    values: &[f64],
    metric: Metric,
    mc: Option<&McConfig>,
) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&x| {
            let r = with_parameter(s, parameter, x).and_then(|sc| {
                let mut rng = mc.map(|m| m.stream(0));
                let pair = mc.zip(rng.as_mut());
                evaluate_metric(&sc, t, metric, pair)
            });
            match r {
                Ok(v) => SweepPoint {
                    parameter: x,
                    value: v.value,
                    flag: v.flag,
                    error: None,
                },
                Err(e) => SweepPoint {
                    parameter: x,
                    value: f64::NAN,
                    flag: String::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
