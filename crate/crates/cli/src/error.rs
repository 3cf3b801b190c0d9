use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for anything the user can fix in the config or environment, 2 for
    /// solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<spwt_core::Error> for CliError {
    fn from(e: spwt_core::Error) -> Self {
        use spwt_core::Error as E;
        match e {
            E::InvalidConfig(_)
            | E::IndexOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::EmptyGrid => CliError::Config(e.to_string()),
            E::FlatDirection
            | E::Conditioning { .. }
            | E::DegenerateChannel(_)
            | E::SingularMatrix => CliError::Numerical(e.to_string()),
        }
    }
}
