//! Configuration and state types: radio parameters, constellations, base
//! stations, targets and scenarios.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::wrap_angle;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Guard added before flooring `ρ·N` so that products such as `0.1 * 1120`
/// that land a few ulps below an integer do not lose a resource.
const FLOOR_GUARD: f64 = 1e-9;

/// A modulation alphabet with equiprobable symbols and unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    points: Vec<Complex64>,
}

impl ConstellationSpec {
    /// Builds a constellation from explicit points. The points must already
    /// have unit average power (within 1e-12).
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("constellation", "no points"));
        }
        let power = points.iter().map(|x| x.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (power - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "constellation",
                format!("average power {power} is not unit"),
            ));
        }
        Ok(Self { points })
    }

    /// Rescales arbitrary points to unit average power.
    pub fn normalized(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("constellation", "no points"));
        }
        let power = points.iter().map(|x| x.norm_sqr()).sum::<f64>() / points.len() as f64;
        if !(power > 0.0) {
            return Err(Error::invalid("constellation", "zero average power"));
        }
        let scale = power.sqrt().recip();
        Self::new(points.into_iter().map(|x| x * scale).collect())
    }

    pub fn qpsk() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            points: vec![
                Complex64::new(s, s),
                Complex64::new(-s, s),
                Complex64::new(-s, -s),
                Complex64::new(s, -s),
            ],
        }
    }

    /// Square M-QAM on the odd-integer grid, normalized to unit power.
    pub fn square_qam(order: usize) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if side < 2 || side * side != order {
            return Err(Error::invalid(
                "constellation",
                format!("{order}-QAM is not a square constellation"),
            ));
        }
        let levels: Vec<f64> = (0..side)
            .map(|i| (2 * i) as f64 - (side - 1) as f64)
            .collect();
        let points = levels
            .iter()
            .flat_map(|&re| levels.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        Self::normalized(points)
    }

    /// Parses a name such as `qpsk`, `16qam`, `64-qam`.
    pub fn from_name(name: &str) -> Result<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        if key == "qpsk" || key == "4qam" {
            return Ok(Self::qpsk());
        }
        if let Some(order) = key.strip_suffix("qam") {
            let order: usize = order
                .parse()
                .map_err(|_| Error::invalid("constellation", format!("unknown name `{name}`")))?;
            return Self::square_qam(order);
        }
        Err(Error::invalid(
            "constellation",
            format!("unknown name `{name}`"),
        ))
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn penalty(&self) -> Result<f64> {
        constellation_penalty(self)
    }
}

/// SNR penalty η = mean(1/|x_i|²) incurred by dividing out the transmitted
/// symbols. Equals one for constant-envelope alphabets.
pub fn constellation_penalty(c: &ConstellationSpec) -> Result<f64> {
    let mut acc = 0.0;
    for (index, x) in c.points.iter().enumerate() {
        let p = x.norm_sqr();
        if p == 0.0 {
            return Err(Error::DegenerateConstellation { index });
        }
        acc += p.recip();
    }
    Ok(acc / c.points.len() as f64)
}

/// Radio and frame constants shared by every base station.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_tx_ant: usize,
    pub n_rx_ant: usize,
    pub symbols_per_frame: usize,
    pub active_subcarriers: usize,
    /// Hz
    pub carrier_freq: f64,
    /// Hz
    pub subcarrier_spacing: f64,
    /// s, cyclic prefix included
    pub symbol_duration: f64,
    pub frac_subcarriers: f64,
    pub frac_symbols: f64,
    /// Total OFDM signal power per transmitter (W).
    pub total_power: f64,
    /// One-sided noise PSD (W/Hz).
    pub noise_psd: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub constellation: ConstellationSpec,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::table_one()
    }
}

impl SystemParams {
    /// 5G NR FR2 reference parameters: 16×16 ULAs, 28 GHz, 120 kHz spacing,
    /// 3168 active subcarriers, 1120 symbols, 20 dBm, QPSK.
    pub fn table_one() -> Self {
        Self {
            n_tx_ant: 16,
            n_rx_ant: 16,
            symbols_per_frame: 1120,
            active_subcarriers: 3168,
            carrier_freq: 28e9,
            subcarrier_spacing: 120e3,
            symbol_duration: 8.92e-6,
            frac_subcarriers: 0.2,
            frac_symbols: 0.1,
            total_power: dbm_to_watt(20.0),
            noise_psd: 4e-20,
            tx_gain: 1.0,
            rx_gain: 1.0,
            constellation: ConstellationSpec::qpsk(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Sensing power of one transmitter when it is the only one active:
    /// `ρ_f · P_T`.
    pub fn sensing_power(&self) -> f64 {
        self.frac_subcarriers * self.total_power
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_tx_ant", self.n_tx_ant),
            ("n_rx_ant", self.n_rx_ant),
            ("symbols_per_frame", self.symbols_per_frame),
            ("active_subcarriers", self.active_subcarriers),
        ];
        for (name, value) in counts {
            if value < 1 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("symbol_duration", self.symbol_duration),
            ("total_power", self.total_power),
            ("noise_psd", self.noise_psd),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("{value} is not positive")));
            }
        }
        for (name, value) in [
            ("frac_subcarriers", self.frac_subcarriers),
            ("frac_symbols", self.frac_symbols),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::invalid(name, format!("{value} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Quantities derived from [`SystemParams`] that every link computation uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDerived {
    /// Sensing subcarriers K.
    pub k: usize,
    /// Sensing symbols M.
    pub m: usize,
    /// Per-subcarrier power of a transmitter radiating `ρ_f·P_T` (W).
    pub p_avg: f64,
    /// σ_N² = N_0·Δf
    pub noise_var: f64,
    /// σ̃_N² = η·σ_N²
    pub noise_var_postdiv: f64,
    pub eta: f64,
    pub wavelength: f64,
}

pub fn derive_frame(p: &SystemParams) -> Result<FrameDerived> {
    p.validate()?;
    let k = (p.frac_subcarriers * p.active_subcarriers as f64 + FLOOR_GUARD).floor() as usize;
    let m = (p.frac_symbols * p.symbols_per_frame as f64 + FLOOR_GUARD).floor() as usize;
    if k < 2 {
        return Err(Error::InsufficientResources {
            what: "sensing subcarriers K",
            value: k,
        });
    }
    if m < 2 {
        return Err(Error::InsufficientResources {
            what: "sensing symbols M",
            value: m,
        });
    }
    let eta = p.constellation.penalty()?;
    let noise_var = p.noise_psd * p.subcarrier_spacing;
    Ok(FrameDerived {
        k,
        m,
        p_avg: p.sensing_power() / k as f64,
        noise_var,
        noise_var_postdiv: eta * noise_var,
        eta,
        wavelength: p.wavelength(),
    })
}

/// What a base station does in the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Role {
    /// Co-located transmitter and receiver.
    Monostatic,
    /// Transmitter of one or more bistatic pairs.
    Tx,
    /// Receiver paired with the transmitter of the given id.
    Rx { tx: String },
}

impl Role {
    pub fn transmits(&self) -> bool {
        matches!(self, Role::Monostatic | Role::Tx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Global position (m).
    pub position: Vector2<f64>,
    /// Array boresight measured from the global x-axis, in (−π, π].
    pub orientation: f64,
    pub role: Role,
    /// Explicit sensing power (W). `None` defers to the scenario policy.
    pub sensing_power: Option<f64>,
}

impl Node {
    pub fn new(id: impl Into<String>, position: [f64; 2], orientation: f64, role: Role) -> Self {
        Self {
            id: id.into(),
            position: Vector2::new(position[0], position[1]),
            orientation: wrap_angle(orientation),
            role,
            sensing_power: None,
        }
    }

    /// Node whose boresight points at `toward`.
    pub fn facing(id: impl Into<String>, position: [f64; 2], toward: [f64; 2], role: Role) -> Self {
        let orientation = (toward[1] - position[1]).atan2(toward[0] - position[0]);
        Self::new(id, position, orientation, role)
    }

    pub fn monostatic(id: impl Into<String>, position: [f64; 2], toward: [f64; 2]) -> Self {
        Self::facing(id, position, toward, Role::Monostatic)
    }

    pub fn with_sensing_power(mut self, watts: f64) -> Self {
        self.sensing_power = Some(watts);
        self
    }
}

/// Point target with its kinematic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
    /// m²
    pub rcs: f64,
    /// Nuisance phase φ (rad). The bounds do not depend on it.
    pub phase: f64,
}

impl TargetState {
    pub fn new(position: [f64; 2], velocity: [f64; 2]) -> Self {
        Self {
            position: Vector2::new(position[0], position[1]),
            velocity: Vector2::new(velocity[0], velocity[1]),
            rcs: 1.0,
            phase: 0.0,
        }
    }

    pub fn at(position: [f64; 2]) -> Self {
        Self::new(position, [0.0, 0.0])
    }

    /// Target moving at `speed` m/s with heading `heading` rad.
    pub fn moving(position: [f64; 2], speed: f64, heading: f64) -> Self {
        Self::new(position, [speed * heading.cos(), speed * heading.sin()])
    }

    pub fn with_rcs(mut self, rcs: f64) -> Self {
        self.rcs = rcs;
        self
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn heading(&self) -> f64 {
        self.velocity.y.atan2(self.velocity.x)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rcs.is_finite() && self.rcs > 0.0) {
            return Err(Error::invalid("rcs", format!("{} is not positive", self.rcs)));
        }
        if !(self.position.iter().all(|v| v.is_finite()) && self.velocity.iter().all(|v| v.is_finite())) {
            return Err(Error::invalid("target", "non-finite state"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerPolicy {
    /// Every transmitter radiates `ρ_f·P_T` unless it carries an explicit power.
    #[default]
    FixedPerNode,
    /// The network shares a single `ρ_f·P_T` budget evenly among transmitters.
    NormalizedTotal,
}

/// Monostatic sensor or bistatic Tx→Rx pair.
#[derive(Debug, Clone, Copy)]
pub struct SensingLink<'a> {
    pub tx: &'a Node,
    pub rx: &'a Node,
}

impl SensingLink<'_> {
    pub fn is_monostatic(&self) -> bool {
        std::ptr::eq(self.tx, self.rx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub nodes: Vec<Node>,
    pub power_policy: PowerPolicy,
}

impl Scenario {
    pub fn new(params: SystemParams, nodes: Vec<Node>, power_policy: PowerPolicy) -> Result<Self> {
        let s = Self {
            params,
            nodes,
            power_policy,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(Error::Scenario(format!("duplicate node id `{}`", n.id)));
            }
            if !(n.position.iter().all(|v| v.is_finite()) && n.orientation.is_finite()) {
                return Err(Error::Scenario(format!("node `{}` has non-finite pose", n.id)));
            }
            if let Some(p) = n.sensing_power {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Scenario(format!(
                        "node `{}` has non-positive sensing power",
                        n.id
                    )));
                }
            }
            if n.orientation <= -PI || n.orientation > PI {
                return Err(Error::Scenario(format!(
                    "node `{}` orientation not normalized",
                    n.id
                )));
            }
        }
        for n in &self.nodes {
            if let Role::Rx { tx } = &n.role {
                match self.node(tx) {
                    Some(t) if t.role == Role::Tx => {}
                    Some(_) => {
                        return Err(Error::Scenario(format!(
                            "rx `{}` references `{tx}`, which is not a tx",
                            n.id
                        )))
                    }
                    None => {
                        return Err(Error::Scenario(format!(
                            "rx `{}` references unknown tx `{tx}`",
                            n.id
                        )))
                    }
                }
            }
        }
        if self.links().is_empty() {
            return Err(Error::NoInformation);
        }
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn transmitter_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.role.transmits()).count()
    }

    /// Every sensing link, in node order: one per monostatic node and one per
    /// receiver.
    pub fn links(&self) -> Vec<SensingLink<'_>> {
        self.nodes
            .iter()
            .filter_map(|n| match &n.role {
                Role::Monostatic => Some(SensingLink { tx: n, rx: n }),
                Role::Rx { tx } => self.node(tx).map(|t| SensingLink { tx: t, rx: n }),
                Role::Tx => None,
            })
            .collect()
    }

    /// Sensing power radiated by `tx` under this scenario's policy.
    pub fn sensing_power(&self, tx: &Node) -> f64 {
        if let Some(p) = tx.sensing_power {
            return p;
        }
        match self.power_policy {
            PowerPolicy::FixedPerNode => self.params.sensing_power(),
            PowerPolicy::NormalizedTotal => {
                self.params.sensing_power() / self.transmitter_count().max(1) as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qpsk_has_no_penalty() {
        assert!((constellation_penalty(&ConstellationSpec::qpsk()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qam_penalties_match_reference_values() {
        for (order, eta, db) in [(16, 1.89, 2.76), (64, 2.69, 4.29), (256, 3.44, 5.36)] {
            let c = ConstellationSpec::square_qam(order).unwrap();
            let e = c.penalty().unwrap();
            assert!((e - eta).abs() <= 0.01, "{order}-QAM η = {e}");
            assert!((10.0 * e.log10() - db).abs() <= 0.05);
        }
    }

    #[test]
    fn zero_point_is_degenerate() {
        let pts = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(2f64.sqrt(), 0.0),
        ];
        let c = ConstellationSpec::new(pts).unwrap();
        assert_eq!(
            constellation_penalty(&c),
            Err(Error::DegenerateConstellation { index: 0 })
        );
    }

    #[test]
    fn non_unit_power_rejected() {
        assert!(ConstellationSpec::new(vec![Complex64::new(2.0, 0.0)]).is_err());
        assert!(ConstellationSpec::from_name("16-QAM").is_ok());
        assert!(ConstellationSpec::from_name("8psk").is_err());
    }

    #[test]
    fn reference_frame() {
        let f = derive_frame(&SystemParams::table_one()).unwrap();
        assert_eq!((f.k, f.m), (633, 112));
        assert!((f.noise_var_postdiv / f.noise_var - 1.0).abs() < 1e-15);
        // −15 dBm per subcarrier: ρ_f·P_T/K = P_T/K_a up to flooring
        assert!((watt_to_dbm(f.p_avg) - (-15.0)).abs() < 0.01);
    }

    #[test]
    fn full_allocation() {
        let p = SystemParams {
            frac_subcarriers: 1.0,
            active_subcarriers: 64,
            ..SystemParams::table_one()
        };
        assert_eq!(derive_frame(&p).unwrap().k, 64);
    }

    #[test]
    fn too_few_resources() {
        let p = SystemParams {
            frac_symbols: 1.0 / 1120.0,
            ..SystemParams::table_one()
        };
        assert!(matches!(
            derive_frame(&p),
            Err(Error::InsufficientResources { value: 1, .. })
        ));
    }

    #[test]
    fn qam_raises_post_division_noise() {
        let p = SystemParams {
            constellation: ConstellationSpec::square_qam(16).unwrap(),
            ..SystemParams::table_one()
        };
        let f = derive_frame(&p).unwrap();
        assert!((f.noise_var_postdiv / f.noise_var - f.eta).abs() < 1e-15);
    }

    #[test]
    fn orientation_is_wrapped() {
        let n = Node::new("a", [0.0, 0.0], 3.0 * PI, Role::Monostatic);
        assert!((n.orientation - PI).abs() < 1e-12);
        let n = Node::new("a", [0.0, 0.0], -PI, Role::Monostatic);
        assert!((n.orientation - PI).abs() < 1e-12);
    }

    #[test]
    fn rx_must_reference_tx() {
        let p = SystemParams::table_one();
        let nodes = vec![Node::new("r", [0.0, 0.0], 0.0, Role::Rx { tx: "t".into() })];
        assert!(Scenario::new(p.clone(), nodes, PowerPolicy::FixedPerNode).is_err());
        let nodes = vec![
            Node::new("t", [1.0, 0.0], 0.0, Role::Tx),
            Node::new("r", [0.0, 0.0], 0.0, Role::Rx { tx: "t".into() }),
        ];
        let s = Scenario::new(p, nodes, PowerPolicy::NormalizedTotal).unwrap();
        assert_eq!(s.links().len(), 1);
        assert_eq!(s.transmitter_count(), 1);
    }

    #[test]
    fn lone_tx_has_no_link() {
        let nodes = vec![Node::new("t", [1.0, 0.0], 0.0, Role::Tx)];
        assert_eq!(
            Scenario::new(SystemParams::table_one(), nodes, PowerPolicy::FixedPerNode),
            Err(Error::NoInformation)
        );
    }
}
