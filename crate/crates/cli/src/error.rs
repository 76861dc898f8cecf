use std::fmt;

use darboux::backlund::ChainError;
use darboux::darboux::DarbouxError;
use darboux::elliptic::golden::GoldenError;
use darboux::elliptic::EllipticError;
use darboux::potential::SampleError;
use darboux::spectral::SpectralError;

#[derive(Debug)]
pub enum CliError {
    /// exit 1
    Usage(String),
    /// exit 2
    Numerical(String),
    /// exit 3
    Verification(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Numerical(_) => 2,
            Self::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

macro_rules! numerical {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::Numerical(e.to_string())
            }
        }
    )*};
}

numerical!(
    ChainError,
    DarbouxError,
    EllipticError,
    SampleError,
    SpectralError,
    GoldenError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Usage(e.to_string())
    }
}
