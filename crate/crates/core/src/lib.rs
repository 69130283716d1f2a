//! Probabilistic Hattrick match engine.
//!
//! A match is sampled in stages: midfield possession allocates normal chances,
//! tactics redistribute them over sectors, ratings decide which attacks score,
//! and missed chances feed counterattacks and powerful-forward extra attacks.
//! Special events are drawn on top. [`sim::simulate`] repeats this for many
//! seeded trials and reports goal statistics and the home/draw/away split.

pub mod attack;
pub mod calibrate;
pub mod chance;
pub mod error;
pub mod events;
pub mod forecast;
pub mod model;
pub mod params;
pub mod presets;
pub mod rng;
pub mod sim;
pub mod sweep;

pub use error::EngineError;
pub use forecast::{ForecastTriple, Outcome};
pub use model::{Rating, RatingField, TacticKind, TacticSpec, TeamProfile};
pub use params::{load_params, EngineParams, Variant};
pub use sim::{simulate, MatchOutcome, SimulationReport};
pub use sweep::{run_sweep, SweepResult, SweepSpec};
