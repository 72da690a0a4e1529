use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] kinetic_hj::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("malformed data: {0}")]
    Data(String),
    #[error("refusing a {cells}-cell grid, the cap is {cap} (raise max_cells)")]
    TooLarge { cells: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, HarnessError>;
