//! Fisher-information accuracy bounds for targets sensed by networks of
//! OFDM MIMO base stations.

pub mod bounds;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fisher;
pub mod geom;
pub mod link;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use fisher::{schur_complement, FisherMatrix, Param};
pub use model::{
    constellation_penalty, derive_frame, ConstellationSpec, FrameDerived, Node, PowerPolicy, Role,
    Scenario, SystemParams, TargetState,
};
