use thiserror::Error;

use crate::graph::GraphError;
use crate::io::IoError;
use crate::network::NetworkError;
use crate::reduction::ReductionError;
use crate::simulation::SimulationError;

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ExitCode {
    Ok = 0,
    Validation = 1,
    NotReducible = 2,
    Io = 3,
    Numeric = 4,
}

impl ExitCode {
    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Any failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

impl Error {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Io(IoError::Invalid(_)) => ExitCode::Validation,
            Error::Io(_) => ExitCode::Io,
            Error::Graph(_) => ExitCode::Validation,
            Error::Network(e) => network_code(e),
            Error::Reduction(e) => reduction_code(e),
            Error::Simulation(e) => simulation_code(e),
        }
    }
}

fn network_code(e: &NetworkError) -> ExitCode {
    match e {
        NetworkError::Invalid(_) => ExitCode::Validation,
        NetworkError::NotReducible { .. } => ExitCode::NotReducible,
    }
}

fn reduction_code(e: &ReductionError) -> ExitCode {
    match e {
        ReductionError::Network(n) => network_code(n),
        ReductionError::Graph(_) | ReductionError::NoInternalVertices => ExitCode::Validation,
        ReductionError::SingularInternalBlock { .. }
        | ReductionError::NotLaplacian(_)
        | ReductionError::DisconnectedReduction => ExitCode::Numeric,
    }
}

fn simulation_code(e: &SimulationError) -> ExitCode {
    use SimulationError as S;
    match e {
        S::Reduction(r) => reduction_code(r),
        S::ZeroCoefficients | S::Pole { .. } | S::SingularAdmittance { .. } => ExitCode::Numeric,
        S::InitialState { .. }
        | S::InvalidGrid(_)
        | S::InvalidSkip(_)
        | S::GridMismatch(_)
        | S::ChannelMismatch(_)
        | S::MissingExcitation(_)
        | S::UnexpectedExcitation { .. }
        | S::InjectionDimension { .. }
        | S::NotSeriesChain(_) => ExitCode::Validation,
    }
}
