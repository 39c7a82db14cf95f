//! Reference generators used to calibrate the metrics.
//!
//! Randomness is drawn in blocks of output rows, each block from its own
//! ChaCha stream, so results do not depend on the number of worker threads.
//! Source-row selection and cell-level decisions use separate streams; the
//! identity copier therefore reproduces exactly the rows `perturb` starts from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Table;

pub const DEFAULT_SYNTHETIC_ROWS: usize = 50_000;

const BLOCK_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Probability of replacing each cell with a donor value.
    pub noise: f64,
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_rows() -> usize {
    DEFAULT_SYNTHETIC_ROWS
}

impl PerturbationConfig {
    pub fn new(noise: f64, rows: usize, seed: u64) -> Self {
        PerturbationConfig { noise, rows, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::InvalidParameter(format!(
                "noise probability {} is outside [0, 1]",
                self.noise
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Stream {
    SourceRows = 0,
    Cells = 1,
    Independent = 2,
}

fn block_rng(seed: u64, block: usize, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((block as u64) * 3 + stream as u64);
    rng
}

fn blocks(rows: usize) -> impl IndexedParallelIterator<Item = (usize, std::ops::Range<usize>)> {
    (0..rows.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(move |b| (b, b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(rows)))
}

fn source_rows(n_train: usize, rows: usize, seed: u64) -> Vec<usize> {
    blocks(rows)
        .flat_map_iter(|(b, range)| {
            let mut rng = block_rng(seed, b, Stream::SourceRows);
            range.map(move |_| rng.random_range(0..n_train))
        })
        .collect()
}

fn require_rows(train: &Table) -> Result<()> {
    if train.is_empty() {
        Err(Error::EmptyTable("train"))
    } else {
        Ok(())
    }
}

/// Bootstrap `cfg.rows` training rows, then replace each cell independently
/// with probability `cfg.noise` by the same column's value from a uniformly
/// drawn different training row.
pub fn perturb(train: &Table, cfg: &PerturbationConfig) -> Result<Table> {
    cfg.validate()?;
    require_rows(train)?;
    let n = train.row_count();
    let m = train.column_count();
    let sources = source_rows(n, cfg.rows, cfg.seed);

    // Row-major donor index per output cell.
    let picks: Vec<usize> = blocks(cfg.rows)
        .flat_map_iter(|(b, range)| {
            let mut rng = block_rng(cfg.seed, b, Stream::Cells);
            let sources = &sources;
            range.flat_map(move |i| {
                let source = sources[i];
                (0..m)
                    .map(|_| {
                        if n > 1 && rng.random_bool(cfg.noise) {
                            let donor = rng.random_range(0..n - 1);
                            if donor >= source {
                                donor + 1
                            } else {
                                donor
                            }
                        } else {
                            source
                        }
                    })
                    .collect::<Vec<_>>()
            })
        })
        .collect();

    let per_column: Vec<Vec<usize>> = (0..m)
        .map(|j| (0..cfg.rows).map(|i| picks[i * m + j]).collect())
        .collect();
    Ok(train.gather_columns(&per_column))
}

/// `n` rows drawn with replacement, unmodified. Identical to `perturb` with
/// zero noise under the same seed.
pub fn copy_identity(train: &Table, n: usize, seed: u64) -> Result<Table> {
    require_rows(train)?;
    Ok(train.take_rows(&source_rows(train.row_count(), n, seed)))
}

/// Each column sampled independently from its own training values: exact
/// univariate marginals in expectation, no dependence between columns.
pub fn sample_independent(train: &Table, n: usize, seed: u64) -> Result<Table> {
    require_rows(train)?;
    let rows = train.row_count();
    let m = train.column_count();
    let picks: Vec<usize> = blocks(n)
        .flat_map_iter(|(b, range)| {
            let mut rng = block_rng(seed, b, Stream::Independent);
            range.flat_map(move |_| (0..m).map(|_| rng.random_range(0..rows)).collect::<Vec<_>>())
        })
        .collect();
    let per_column: Vec<Vec<usize>> = (0..m).map(|j| (0..n).map(|i| picks[i * m + j]).collect()).collect();
    Ok(train.gather_columns(&per_column))
}
