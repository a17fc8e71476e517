//! Invariant families of the gauge, Ω and extended-Higgs sectors, their
//! identities, and relation discovery.

pub mod families;
pub mod fields;
pub mod oracle;
pub mod report;
pub mod suite;

pub use families::*;
pub use fields::*;
pub use report::*;
pub use suite::*;

use thiserror::Error;

use crate::tensor::TensorError;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("family {family}: {source}")]
    Family { family: String, source: TensorError },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("family {family} is not defined for {statistics} fields")]
    Unsupported { family: &'static str, statistics: &'static str },
    #[error("unknown family '{0}'")]
    UnknownFamily(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error(transparent)]
    Spinor(#[from] crate::spinor::SpinorError),
    #[error(transparent)]
    Ew(#[from] crate::ew::EwError),
}

impl InvariantError {
    pub(crate) fn in_family(self, family: &str) -> InvariantError {
        match self {
            InvariantError::Tensor(source) => InvariantError::Family {
                family: family.to_string(),
                source,
            },
            e => e,
        }
    }
}
