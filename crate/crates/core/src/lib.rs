//! Mass-action ODE network simulator for hydroponic nutrient solutions.
//!
//! A model file declares species and reactions; [`dsl::compile_network`]
//! merges every reaction's rate terms into one ODE per species, and
//! [`engine::simulate`] integrates the system with synchronous explicit
//! Euler. [`inverse`] works backwards from a target ion profile to the salt
//! doses that produce it.
//!
//! ```
//! use nutrinet::{assets, dsl, engine};
//!
//! let model = assets::load_reference_model().unwrap();
//! let network = dsl::compile_network(&model);
//! let scenario = engine::Scenario::default()
//!     .with_initial("KNO3", 1e-3)
//!     .fixed_steps(1000);
//! let result = engine::simulate(&network, &scenario).unwrap();
//! let k = network.index_of("K+").unwrap();
//! assert!(result.final_state.conc[k] > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assets;
pub mod cli;
pub mod dsl;
pub mod engine;
pub mod inverse;
pub mod kinetics;
pub mod observables;
