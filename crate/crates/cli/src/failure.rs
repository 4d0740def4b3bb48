use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

/// How a command that ran to the end finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Clean,
    /// Outputs were written but some articles were skipped.
    PartialSkip {
        skipped: usize,
    },
}

impl Completion {
    pub fn from_skips(skipped: usize) -> Self {
        if skipped == 0 {
            Completion::Clean
        } else {
            Completion::PartialSkip { skipped }
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Completion::Clean => EXIT_OK,
            Completion::PartialSkip { .. } => EXIT_PARTIAL,
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Data(_) => EXIT_DATA,
            Failure::Other(_) => EXIT_OTHER,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Data(e) | Failure::Other(e) => e,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Failure::Config(_) => "configuration error",
            Failure::Data(_) => "data error",
            Failure::Other(_) => "error",
        };
        write!(f, "{kind}: {:#}", self.error())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

pub trait Classify<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn data_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn data_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}
