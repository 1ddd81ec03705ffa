//! Continuous-time SIRS dynamics on multigraphs and lazy trees, with root
//! round bookkeeping and Monte Carlo probes.

mod engine;
mod heap;
mod network;
mod probes;
mod rounds;

pub use engine::{Censoring, Engine, Event, EventKind, InitialState, StopRule, SurvivalRecord};
pub use heap::AlarmHeap;
pub use network::{Arc, Network};
pub use probes::{
    edge_persistence_scale, estimate_phi, path_infection_bound, probe_edge_persistence, probe_path_infection,
    probe_window_prob, star_survival_scaling, track_marked_set, track_rounds, Estimate, PhiEstimate, StarRow,
    WindowProbe, PATH_GAMMA,
};
pub use rounds::{Round, RoundLog};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Compartment {
    S = 0,
    I = 1,
    R = 2,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DynamicsError {
    #[error("infection rate must be positive, got {0}")]
    BadLambda(f64),
    #[error("deimmunization rate must be positive or infinite, got {0}")]
    BadAlpha(f64),
    #[error("vertex {vertex} is not in a network of {n} vertices")]
    UnknownVertex { vertex: usize, n: usize },
    #[error("vertex {0} cannot start recovered in SIS mode")]
    RecoveredInSis(usize),
    #[error("the root must start infected")]
    RootNotInfected,
}

/// Infection rate per arc and deimmunization rate; recovery has rate 1.
/// `alpha = ∞` is SIS mode, where recovery returns straight to S.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirsParams {
    pub lambda: f64,
    pub alpha: f64,
}

impl SirsParams {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self, DynamicsError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(DynamicsError::BadLambda(lambda));
        }
        if !(alpha > 0.0) {
            return Err(DynamicsError::BadAlpha(alpha));
        }
        Ok(Self { lambda, alpha })
    }

    pub fn sis(lambda: f64) -> Result<Self, DynamicsError> {
        Self::new(lambda, f64::INFINITY)
    }

    pub fn is_sis(&self) -> bool {
        self.alpha.is_infinite()
    }
}
