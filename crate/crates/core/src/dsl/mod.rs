//! Reaction-model files: parsing, validation and compilation into one
//! superposed mass-action ODE per species.

mod compile;
mod error;
mod parse;
mod topology;
mod types;

pub use compile::{compile_network, CompiledNetwork, CompiledReaction, Direction, Factor, Term};
pub use error::ModelError;
pub use parse::{parse_formula, parse_model, MAX_CORRECTION};
pub(crate) use parse::tokenize;
pub use topology::{export_topology, write_edge_list, Edge, EdgeDirection};
pub use types::{Formula, ModelDefinition, Participant, Phase, RateSpec, Reaction, Species};
