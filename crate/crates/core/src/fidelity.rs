//! Averaged total variation distance over discretized k-way marginals.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{
    apply_discretizer, fit_discretizer, DiscretizationConfig, DiscretizationModel, DiscretizedTable,
};
use crate::error::{Error, Result};
use crate::ingest::Table;
use crate::REPORT_SCHEMA_VERSION;

/// Product spaces up to this many cells are counted in a dense array.
const DENSE_CELL_LIMIT: u128 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarginalSpec {
    columns: Vec<usize>,
}

impl MarginalSpec {
    pub fn new(columns: Vec<usize>, column_count: usize) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidParameter("a marginal needs at least one column".into()));
        }
        if !columns.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(format!(
                "marginal columns {columns:?} must be strictly increasing"
            )));
        }
        if let Some(&last) = columns.last() {
            if last >= column_count {
                return Err(Error::InvalidParameter(format!(
                    "column index {last} out of range for {column_count} columns"
                )));
            }
        }
        Ok(MarginalSpec { columns })
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn depth(&self) -> usize {
        self.columns.len()
    }
}

pub fn n_choose_k(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `C(m, k)` column combinations in lexicographic order.
pub fn enumerate_combinations(m: usize, k: usize) -> Result<Vec<MarginalSpec>> {
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!(
            "interaction depth {k} must lie in 1..={m}"
        )));
    }
    Ok((0..m).combinations(k).map(|columns| MarginalSpec { columns }).collect())
}

#[derive(Debug, Clone, PartialEq)]
enum CellCounts {
    Dense(Vec<u64>),
    Sparse(HashMap<u128, u64>),
}

/// Empirical joint distribution of the codes in a set of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution {
    spec: MarginalSpec,
    radices: Vec<u32>,
    rows: usize,
    counts: CellCounts,
}

impl MarginalDistribution {
    pub fn spec(&self) -> &MarginalSpec {
        &self.spec
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    fn decode(&self, mut key: u128) -> Vec<u32> {
        let mut cell = vec![0u32; self.radices.len()];
        for (slot, &radix) in cell.iter_mut().zip(&self.radices).rev() {
            *slot = (key % u128::from(radix)) as u32;
            key /= u128::from(radix);
        }
        cell
    }

    fn encode(&self, cell: &[u32]) -> Option<u128> {
        if cell.len() != self.radices.len() || cell.iter().zip(&self.radices).any(|(c, r)| c >= r) {
            return None;
        }
        Some(
            cell.iter()
                .zip(&self.radices)
                .fold(0u128, |acc, (&c, &r)| acc * u128::from(r) + u128::from(c)),
        )
    }

    /// Relative frequency of one code tuple; zero for unobserved cells.
    pub fn frequency(&self, cell: &[u32]) -> f64 {
        let count = match (self.encode(cell), &self.counts) {
            (None, _) => 0,
            (Some(key), CellCounts::Dense(v)) => v[key as usize],
            (Some(key), CellCounts::Sparse(m)) => m.get(&key).copied().unwrap_or(0),
        };
        count as f64 / self.rows as f64
    }

    /// Observed cells with their relative frequencies, in key order.
    pub fn cells(&self) -> Vec<(Vec<u32>, f64)> {
        let n = self.rows as f64;
        let mut keyed: Vec<(u128, u64)> = match &self.counts {
            CellCounts::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (k as u128, c))
                .collect(),
            CellCounts::Sparse(m) => m.iter().map(|(&k, &c)| (k, c)).collect(),
        };
        keyed.sort_unstable();
        keyed.into_iter().map(|(k, c)| (self.decode(k), c as f64 / n)).collect()
    }
}

pub fn marginal(dt: &DiscretizedTable, spec: &MarginalSpec) -> Result<MarginalDistribution> {
    if dt.is_empty() {
        return Err(Error::EmptyTable("discretized"));
    }
    if spec.columns.last().map_or(true, |&c| c >= dt.column_count()) {
        return Err(Error::InvalidParameter(format!(
            "spec {:?} does not fit a table with {} columns",
            spec.columns,
            dt.column_count()
        )));
    }
    let radices: Vec<u32> = spec.columns.iter().map(|&c| dt.cardinalities()[c]).collect();
    let space = radices
        .iter()
        .try_fold(1u128, |acc, &r| acc.checked_mul(u128::from(r)))
        .ok_or_else(|| Error::InvalidParameter("marginal product space overflows".into()))?;
    let columns: Vec<&[u32]> = spec.columns.iter().map(|&c| dt.column(c)).collect();
    let key = |row: usize| {
        columns
            .iter()
            .zip(&radices)
            .fold(0u128, |acc, (col, &r)| acc * u128::from(r) + u128::from(col[row]))
    };
    let counts = if space <= DENSE_CELL_LIMIT {
        let mut dense = vec![0u64; space as usize];
        for row in 0..dt.row_count() {
            dense[key(row) as usize] += 1;
        }
        CellCounts::Dense(dense)
    } else {
        let mut sparse = HashMap::new();
        for row in 0..dt.row_count() {
            *sparse.entry(key(row)).or_insert(0) += 1;
        }
        CellCounts::Sparse(sparse)
    };
    Ok(MarginalDistribution {
        spec: spec.clone(),
        radices,
        rows: dt.row_count(),
        counts,
    })
}

/// Half the L1 distance between two marginals over the union of their cells.
pub fn tvd(p: &MarginalDistribution, q: &MarginalDistribution) -> Result<f64> {
    if p.spec != q.spec || p.radices != q.radices {
        return Err(Error::SpecMismatch(format!(
            "{:?} (radices {:?}) vs {:?} (radices {:?})",
            p.spec.columns, p.radices, q.spec.columns, q.radices
        )));
    }
    let (np, nq) = (p.rows as f64, q.rows as f64);
    let l1 = match (&p.counts, &q.counts) {
        (CellCounts::Dense(a), CellCounts::Dense(b)) => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| (x as f64 / np - y as f64 / nq).abs())
            .sum::<f64>(),
        (CellCounts::Sparse(a), CellCounts::Sparse(b)) => {
            let shared: f64 = a
                .iter()
                .map(|(k, &x)| (x as f64 / np - b.get(k).copied().unwrap_or(0) as f64 / nq).abs())
                .sum();
            let only_q: f64 = b
                .iter()
                .filter(|(k, _)| !a.contains_key(k))
                .map(|(_, &y)| y as f64 / nq)
                .sum();
            shared + only_q
        }
        _ => unreachable!("equal radices imply the same count layout"),
    };
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTvd {
    pub columns: Vec<String>,
    /// TVD between training and synthetic marginals.
    pub tvd_synthetic: f64,
    /// TVD between training and holdout marginals.
    pub tvd_holdout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthFidelity {
    pub k: usize,
    pub c: usize,
    pub interaction_count: usize,
    /// Mean TVD of synthetic vs training over all interactions.
    pub f_ts: f64,
    /// Mean TVD of holdout vs training over all interactions.
    pub f_th: f64,
    /// `f_ts / f_th`; absent when `f_th` is zero.
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Fingerprint of the discretization model used at this depth.
    pub model: String,
    pub interactions: Vec<InteractionTvd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub schema_version: u32,
    pub report: String,
    pub columns: Vec<String>,
    pub n_train: usize,
    pub n_holdout: usize,
    pub n_synthetic: usize,
    pub config: DiscretizationConfig,
    pub seed: Option<u64>,
    pub depths: Vec<DepthFidelity>,
}

impl FidelityReport {
    pub fn depth(&self, k: usize) -> Option<&DepthFidelity> {
        self.depths.iter().find(|d| d.k == k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: FidelityReport = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION || report.report != "fidelity" {
            return Err(Error::Report(format!(
                "expected fidelity report v{REPORT_SCHEMA_VERSION}, found {} v{}",
                report.report, report.schema_version
            )));
        }
        Ok(report)
    }

    /// One row per interaction: `k,columns,tvd_synthetic,tvd_holdout`, with
    /// column names joined by `|`.
    pub fn write_interactions_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["k", "columns", "tvd_synthetic", "tvd_holdout"])?;
        for depth in &self.depths {
            for it in &depth.interactions {
                wtr.write_record([
                    depth.k.to_string(),
                    it.columns.join("|"),
                    it.tvd_synthetic.to_string(),
                    it.tvd_holdout.to_string(),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

struct DepthReference {
    k: usize,
    c: usize,
    model: DiscretizationModel,
    specs: Vec<MarginalSpec>,
    train_marginals: Vec<MarginalDistribution>,
    holdout_tvds: Vec<f64>,
}

/// Training-side state for fidelity evaluation: fitted models, training
/// marginals and holdout distances per depth. Build once, then evaluate any
/// number of synthetic tables against it.
pub struct FidelityReference {
    columns: Vec<String>,
    train: Table,
    n_train: usize,
    n_holdout: usize,
    config: DiscretizationConfig,
    depths: Vec<DepthReference>,
}

impl FidelityReference {
    pub fn new(train: &Table, holdout: &Table, cfg: &DiscretizationConfig, depths: &[usize]) -> Result<Self> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyTable("train"));
        }
        if holdout.is_empty() {
            return Err(Error::EmptyTable("holdout"));
        }
        train.check_same_schema(holdout)?;
        let depths: BTreeSet<usize> = depths.iter().copied().collect();
        if depths.is_empty() {
            return Err(Error::InvalidParameter("no interaction depths requested".into()));
        }
        let m = train.column_count();
        let depths = depths
            .into_iter()
            .map(|k| {
                let specs = enumerate_combinations(m, k)?;
                let c = cfg.for_depth(k);
                let model = fit_discretizer(train, c)?;
                let dt_train = apply_discretizer(&model, train)?;
                let dt_holdout = apply_discretizer(&model, holdout)?;
                let (train_marginals, holdout_tvds): (Vec<_>, Vec<_>) = specs
                    .par_iter()
                    .map(|spec| {
                        let mt = marginal(&dt_train, spec)?;
                        let mh = marginal(&dt_holdout, spec)?;
                        let d = tvd(&mt, &mh)?;
                        Ok((mt, d))
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .unzip();
                Ok(DepthReference {
                    k,
                    c,
                    model,
                    specs,
                    train_marginals,
                    holdout_tvds,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FidelityReference {
            columns: train.column_names().map(str::to_string).collect(),
            train: train.take_rows(&[]),
            n_train: train.row_count(),
            n_holdout: holdout.row_count(),
            config: *cfg,
            depths,
        })
    }

    /// Fitted model per depth.
    pub fn models(&self) -> impl Iterator<Item = (usize, &DiscretizationModel)> {
        self.depths.iter().map(|d| (d.k, &d.model))
    }

    pub fn evaluate(&self, synth: &Table) -> Result<FidelityReport> {
        if synth.is_empty() {
            return Err(Error::EmptyTable("synthetic"));
        }
        self.train.check_same_schema(synth)?;
        let depths = self
            .depths
            .iter()
            .map(|depth| {
                let dt_synth = apply_discretizer(&depth.model, synth)?;
                let synth_tvds = depth
                    .specs
                    .par_iter()
                    .zip(&depth.train_marginals)
                    .map(|(spec, mt)| tvd(mt, &marginal(&dt_synth, spec)?))
                    .collect::<Result<Vec<f64>>>()?;
                let count = depth.specs.len();
                let f_ts = synth_tvds.iter().sum::<f64>() / count as f64;
                let f_th = depth.holdout_tvds.iter().sum::<f64>() / count as f64;
                let (ratio, note) = if f_th > 0.0 {
                    (Some(f_ts / f_th), None)
                } else {
                    (None, Some("holdout distance is zero; ratio omitted".to_string()))
                };
                let interactions = depth
                    .specs
                    .iter()
                    .zip(synth_tvds)
                    .zip(&depth.holdout_tvds)
                    .map(|((spec, ts), &th)| InteractionTvd {
                        columns: spec.columns.iter().map(|&c| self.columns[c].clone()).collect(),
                        tvd_synthetic: ts,
                        tvd_holdout: th,
                    })
                    .collect();
                Ok(DepthFidelity {
                    k: depth.k,
                    c: depth.c,
                    interaction_count: count,
                    f_ts,
                    f_th,
                    ratio,
                    note,
                    model: depth.model.fingerprint.clone(),
                    interactions,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FidelityReport {
            schema_version: REPORT_SCHEMA_VERSION,
            report: "fidelity".to_string(),
            columns: self.columns.clone(),
            n_train: self.n_train,
            n_holdout: self.n_holdout,
            n_synthetic: synth.row_count(),
            config: self.config,
            seed: None,
            depths,
        })
    }
}

/// Fits per-depth discretizers on `train` and reports `F^k(T,S)` and `F^k(T,H)`.
pub fn fidelity_report(
    train: &Table,
    holdout: &Table,
    synth: &Table,
    cfg: &DiscretizationConfig,
    depths: &[usize],
) -> Result<FidelityReport> {
    FidelityReference::new(train, holdout, cfg, depths)?.evaluate(synth)
}
