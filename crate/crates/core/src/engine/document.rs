//! JSON scenario documents.
//!
//! Radio parameters left out of a document take their reference values
//! ([`SystemParams::table_one`]). Angles may be given in radians or, with a
//! `_deg` key suffix, in degrees. Unknown keys are rejected.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dbm_to_watt, ConstellationSpec, Node, PowerPolicy, Role, Scenario, SystemParams};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "ParamsDoc::is_empty")]
    pub params: ParamsDoc,
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub power_policy: PolicyDoc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyDoc {
    #[default]
    FixedPerNode,
    NormalizedTotal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tx_ant: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rx_ant: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols_per_frame: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_subcarriers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier_freq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcarrier_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frac_subcarriers: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frac_symbols: Option<f64>,
    /// W
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_psd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constellation: Option<ConstellationDoc>,
}

impl ParamsDoc {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstellationDoc {
    /// `qpsk`, `16qam`, ...
    Name(String),
    /// Points as `[re, im]` pairs, rescaled to unit average power.
    Points { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleDoc {
    Monostatic,
    Tx,
    Rx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub position: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_deg: Option<f64>,
    /// Point the array boresight at this global position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facing: Option<[f64; 2]>,
    pub role: RoleDoc,
    /// Transmitter id, required for `rx` nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx: Option<String>,
    /// W
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing_power: Option<f64>,
}

fn at(path: &str, e: Error) -> Error {
    let msg = match e {
        Error::Scenario(m) => m,
        other => other.to_string(),
    };
    Error::Scenario(format!("{path}: {msg}"))
}

fn constellation(doc: &ConstellationDoc) -> Result<ConstellationSpec> {
    match doc {
        ConstellationDoc::Name(n) => ConstellationSpec::from_name(n),
        ConstellationDoc::Points { points } => {
            let pts: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
            ConstellationSpec::new(pts.clone()).or_else(|_| ConstellationSpec::normalized(pts))
        }
    }
}

impl ParamsDoc {
    pub fn to_params(&self) -> Result<SystemParams> {
        let mut p = SystemParams::table_one();
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        take!(
            n_tx_ant, n_rx_ant, symbols_per_frame, active_subcarriers, carrier_freq,
            subcarrier_spacing, symbol_duration, frac_subcarriers, frac_symbols, total_power,
            noise_psd, tx_gain, rx_gain
        );
        match (self.total_power, self.total_power_dbm) {
            (Some(_), Some(_)) => {
                return Err(Error::Scenario(
                    "params: give either total_power or total_power_dbm".into(),
                ))
            }
            (None, Some(dbm)) => p.total_power = dbm_to_watt(dbm),
            _ => {}
        }
        if let Some(c) = &self.constellation {
            p.constellation = constellation(c).map_err(|e| at("params.constellation", e))?;
        }
        p.validate().map_err(|e| at("params", e))?;
        Ok(p)
    }

    fn from_params(p: &SystemParams) -> Self {
        let d = SystemParams::table_one();
        macro_rules! diff {
            ($($f:ident),*) => { ParamsDoc { $( $f: (p.$f != d.$f).then_some(p.$f), )* ..Default::default() } };
        }
        let mut doc = diff!(
            n_tx_ant, n_rx_ant, symbols_per_frame, active_subcarriers, carrier_freq,
            subcarrier_spacing, symbol_duration, frac_subcarriers, frac_symbols, total_power,
            noise_psd, tx_gain, rx_gain
        );
        if p.constellation != d.constellation {
            let n = p.constellation.points().len();
            doc.constellation = Some(match ConstellationSpec::square_qam(n) {
                Ok(q) if q == p.constellation => ConstellationDoc::Name(format!("{n}qam")),
                _ => ConstellationDoc::Points {
                    points: p.constellation.points().iter().map(|x| [x.re, x.im]).collect(),
                },
            });
        }
        doc
    }
}

impl NodeDoc {
    pub fn to_node(&self) -> Result<Node> {
        let orientation = match (self.orientation, self.orientation_deg, self.facing) {
            (Some(r), None, None) => r,
            (None, Some(d), None) => d * PI / 180.0,
            (None, None, Some(f)) => (f[1] - self.position[1]).atan2(f[0] - self.position[0]),
            (None, None, None) => {
                return Err(Error::Scenario(
                    "one of orientation, orientation_deg or facing is required".into(),
                ))
            }
            _ => {
                return Err(Error::Scenario(
                    "orientation, orientation_deg and facing are mutually exclusive".into(),
                ))
            }
        };
        if !orientation.is_finite() {
            return Err(Error::Scenario("orientation is not finite".into()));
        }
        let role = match (self.role, &self.tx) {
            (RoleDoc::Monostatic, None) => Role::Monostatic,
            (RoleDoc::Tx, None) => Role::Tx,
            (RoleDoc::Rx, Some(tx)) => Role::Rx { tx: tx.clone() },
            (RoleDoc::Rx, None) => return Err(Error::Scenario("rx node needs a `tx` id".into())),
            (_, Some(_)) => return Err(Error::Scenario("`tx` is only valid for rx nodes".into())),
        };
        let mut n = Node::new(self.id.clone(), self.position, orientation, role);
        n.sensing_power = self.sensing_power;
        Ok(n)
    }

    fn from_node(n: &Node) -> Self {
        let (role, tx) = match &n.role {
            Role::Monostatic => (RoleDoc::Monostatic, None),
            Role::Tx => (RoleDoc::Tx, None),
            Role::Rx { tx } => (RoleDoc::Rx, Some(tx.clone())),
        };
        Self {
            id: n.id.clone(),
            position: [n.position.x, n.position.y],
            orientation: Some(n.orientation),
            orientation_deg: None,
            facing: None,
            role,
            tx,
            sensing_power: n.sensing_power,
        }
    }
}

impl ScenarioDoc {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let params = self.params.to_params()?;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            nodes.push(n.to_node().map_err(|e| at(&format!("nodes[{i}] (`{}`)", n.id), e))?);
        }
        let policy = match self.power_policy {
            PolicyDoc::FixedPerNode => PowerPolicy::FixedPerNode,
            PolicyDoc::NormalizedTotal => PowerPolicy::NormalizedTotal,
        };
        Scenario::new(params, nodes, policy).map_err(|e| at("scenario", e))
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            params: ParamsDoc::from_params(&s.params),
            nodes: s.nodes.iter().map(NodeDoc::from_node).collect(),
            power_policy: match s.power_policy {
                PowerPolicy::FixedPerNode => PolicyDoc::FixedPerNode,
                PowerPolicy::NormalizedTotal => PolicyDoc::NormalizedTotal,
            },
        }
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| {
        Error::Scenario(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    doc.to_scenario()
}

pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(&ScenarioDoc::from_scenario(s)).expect("scenario documents always serialize")
}
