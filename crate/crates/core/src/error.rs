use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("degenerate droop: d_p = 0 requires omega_set = omega_g (got omega_set = {omega_set}, omega_g = {omega_g})")]
    DegenerateDroop { omega_set: f64, omega_g: f64 },

    #[error("plant is not controllable (rank {rank} < 3)")]
    Uncontrollable { rank: usize },

    #[error("pole placement failed after {attempts} parameter matrices (best condition number {best_condition:e})")]
    PlacementSingular { attempts: usize, best_condition: f64 },

    #[error("numerical blow-up at t = {time} s")]
    NumericalBlowup { time: f64 },

    #[error("signal not settled within the {band} band at the end of the trajectory")]
    NotSettled { band: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
