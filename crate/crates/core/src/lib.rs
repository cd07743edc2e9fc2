//! Prospect-theory and regret choice models, synthetic agents, behavior
//! metrics and least-squares parameter estimation for two-option risky
//! choice experiments.

pub mod agents;
pub mod error;
pub mod fitting;
pub mod metrics;
pub mod models;
pub mod optim;
pub mod par;
pub mod prospects;
pub mod reports;
pub mod rng;

pub use agents::{
    simulate_choices, Agent, ByRepresentation, Choice, ChoiceDataset, Economicus, PtAgent,
    RegretAgent, ResponseEntry, ResponseTable, Trial,
};
pub use error::{Error, Result};
pub use fitting::{bootstrap_ci, fit, goodness_of_fit, FitDataset, FitResult, FitSpec, Variant};
pub use models::{PtParams, RegretParams};
pub use par::Exec;
pub use prospects::{
    enumerate_contexts, Context, ExplanationMode, Frame, GridConfig, OrderVariant, Prospect,
    Representation,
};
