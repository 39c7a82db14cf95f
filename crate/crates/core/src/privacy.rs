//! Distance to closest record (DCR) against training and holdout data.
//!
//! Distances are Hamming distances over discretized codes: the number of
//! columns in which two records differ. The nearest-neighbor search is exact.
//! Rows are packed into 64-bit words with one lane per column, so the
//! per-pair distance is a handful of XOR/ADD/popcount operations; duplicate
//! rows are collapsed on both sides, exact matches are answered from a hash
//! set, and each scan stops as soon as a distance of one is found.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{
    apply_discretizer, fit_discretizer, DiscretizationConfig, DiscretizationModel, DiscretizedTable,
};
use crate::error::{Error, Result};
use crate::ingest::{split_train_holdout, subsample, Table};
use crate::REPORT_SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LaneLayout {
    bits: u32,
    per_word: usize,
    low: u64,
    high: u64,
}

impl LaneLayout {
    fn for_cardinalities(cards: &[u32]) -> Self {
        let max = cards.iter().copied().max().unwrap_or(1);
        let bits = match max {
            0..=256 => 8,
            257..=65_536 => 16,
            _ => 32,
        };
        let per_word = (64 / bits) as usize;
        let lane_high = 1u64 << (bits - 1);
        let (mut low, mut high) = (0u64, 0u64);
        for lane in 0..per_word {
            low |= (lane_high - 1) << (lane as u32 * bits);
            high |= lane_high << (lane as u32 * bits);
        }
        LaneLayout {
            bits,
            per_word,
            low,
            high,
        }
    }

    /// Number of non-zero lanes in `x`.
    #[inline(always)]
    fn nonzero_lanes(&self, x: u64) -> u32 {
        let y = ((x & self.low) + self.low) | x;
        (y & self.high).count_ones()
    }
}

#[derive(Debug, Clone)]
struct PackedRows {
    layout: LaneLayout,
    words_per_row: usize,
    words: Vec<u64>,
    rows: usize,
}

impl PackedRows {
    fn pack(dt: &DiscretizedTable, layout: LaneLayout) -> Self {
        let words_per_row = dt.column_count().div_ceil(layout.per_word).max(1);
        let mut words = vec![0u64; words_per_row * dt.row_count()];
        for (j, col) in dt.codes().iter().enumerate() {
            let (word, shift) = (j / layout.per_word, (j % layout.per_word) as u32 * layout.bits);
            for (r, &code) in col.iter().enumerate() {
                words[r * words_per_row + word] |= u64::from(code) << shift;
            }
        }
        PackedRows {
            layout,
            words_per_row,
            words,
            rows: dt.row_count(),
        }
    }

    fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Distinct rows, in first-occurrence order, plus the distinct index of each row.
    fn dedup(&self) -> (PackedRows, Vec<usize>) {
        let mut seen: HashMap<&[u64], usize> = HashMap::with_capacity(self.rows);
        let mut words = Vec::new();
        let mut assignment = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let next = seen.len();
            let id = *seen.entry(row).or_insert_with(|| {
                words.extend_from_slice(row);
                next
            });
            assignment.push(id);
        }
        let rows = seen.len();
        (
            PackedRows {
                layout: self.layout,
                words_per_row: self.words_per_row,
                words,
                rows,
            },
            assignment,
        )
    }
}

/// A reference table prepared for repeated exact DCR queries.
#[derive(Debug, Clone)]
pub struct DcrIndex {
    provenance: String,
    cardinalities: Vec<u32>,
    unique: PackedRows,
    exact: HashSet<Vec<u64>>,
    columns: usize,
}

impl DcrIndex {
    pub fn new(reference: &DiscretizedTable) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::EmptyTable("reference"));
        }
        let layout = LaneLayout::for_cardinalities(reference.cardinalities());
        let (unique, _) = PackedRows::pack(reference, layout).dedup();
        let exact = (0..unique.rows).map(|r| unique.row(r).to_vec()).collect();
        Ok(DcrIndex {
            provenance: reference.provenance().to_string(),
            cardinalities: reference.cardinalities().to_vec(),
            unique,
            exact,
            columns: reference.column_count(),
        })
    }

    /// Number of distinct reference rows.
    pub fn distinct_rows(&self) -> usize {
        self.unique.rows
    }

    fn check(&self, synth: &DiscretizedTable) -> Result<()> {
        if synth.provenance() != self.provenance || synth.cardinalities() != self.cardinalities.as_slice() {
            return Err(Error::ProvenanceMismatch {
                left: synth.provenance().to_string(),
                right: self.provenance.clone(),
            });
        }
        Ok(())
    }

    fn nearest(&self, row: &[u64]) -> u32 {
        if self.exact.contains(row) {
            return 0;
        }
        let layout = &self.unique.layout;
        let wpr = self.unique.words_per_row;
        let mut best = self.columns as u32;
        if best <= 1 {
            return best;
        }
        for candidate in self.unique.words.chunks_exact(wpr) {
            let mut d = 0;
            for (a, b) in row.iter().zip(candidate) {
                d += layout.nonzero_lanes(a ^ b);
                if d >= best {
                    break;
                }
            }
            if d < best {
                best = d;
                // zero was ruled out by the exact-match lookup
                if best == 1 {
                    break;
                }
            }
        }
        best
    }

    /// Minimum Hamming distance from each synthetic row to the reference.
    pub fn distances(&self, synth: &DiscretizedTable) -> Result<Vec<u32>> {
        self.check(synth)?;
        let packed = PackedRows::pack(synth, self.unique.layout);
        let (unique, assignment) = packed.dedup();
        let per_unique: Vec<u32> = (0..unique.rows)
            .into_par_iter()
            .with_min_len(64)
            .map(|r| self.nearest(unique.row(r)))
            .collect();
        Ok(assignment.into_iter().map(|u| per_unique[u]).collect())
    }

    /// Synthetic rows that occur verbatim in the reference.
    pub fn identical_matches(&self, synth: &DiscretizedTable) -> Result<usize> {
        self.check(synth)?;
        let packed = PackedRows::pack(synth, self.unique.layout);
        Ok((0..packed.rows).filter(|&r| self.exact.contains(packed.row(r))).count())
    }
}

/// Exact DCR of every synthetic row with respect to `reference`.
pub fn dcr_all(synth: &DiscretizedTable, reference: &DiscretizedTable) -> Result<Vec<u32>> {
    synth.check_same_provenance(reference)?;
    DcrIndex::new(reference)?.distances(synth)
}

/// Number of synthetic rows with DCR zero. A diagnostic only: removing such
/// rows from a release would itself reveal training membership.
pub fn identical_match_count(synth: &DiscretizedTable, reference: &DiscretizedTable) -> Result<usize> {
    synth.check_same_provenance(reference)?;
    DcrIndex::new(reference)?.identical_matches(synth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DcrRecord {
    pub synth_row: usize,
    pub d_train: u32,
    pub d_holdout: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub distance: u32,
    pub count_train: usize,
    pub count_holdout: usize,
}

/// Aggregate statistics over paired training/holdout distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcrSummary {
    pub n_synthetic: usize,
    /// Records strictly closer to training than to holdout.
    pub closer_to_train: usize,
    pub ties: usize,
    pub closer_to_holdout: usize,
    /// `(closer_to_train + ties / 2) / n_synthetic`
    pub share_closer_to_train: f64,
    pub mean_dcr_train: f64,
    pub mean_dcr_holdout: f64,
    pub identical_match_count_train: usize,
    pub identical_match_count_holdout: usize,
    pub histogram: Vec<HistogramBin>,
}

impl DcrSummary {
    pub fn from_distances(d_train: &[u32], d_holdout: &[u32], column_count: usize) -> Result<Self> {
        if d_train.len() != d_holdout.len() {
            return Err(Error::InvalidParameter(format!(
                "{} training distances vs {} holdout distances",
                d_train.len(),
                d_holdout.len()
            )));
        }
        let n = d_train.len();
        if n == 0 {
            return Err(Error::EmptyTable("synthetic"));
        }
        let (mut wins, mut ties) = (0usize, 0usize);
        let mut histogram: Vec<HistogramBin> = (0..=column_count as u32)
            .map(|distance| HistogramBin {
                distance,
                count_train: 0,
                count_holdout: 0,
            })
            .collect();
        for (&t, &h) in d_train.iter().zip(d_holdout) {
            match t.cmp(&h) {
                std::cmp::Ordering::Less => wins += 1,
                std::cmp::Ordering::Equal => ties += 1,
                std::cmp::Ordering::Greater => {}
            }
            histogram[t as usize].count_train += 1;
            histogram[h as usize].count_holdout += 1;
        }
        let mean = |d: &[u32]| d.iter().map(|&x| u64::from(x)).sum::<u64>() as f64 / n as f64;
        Ok(DcrSummary {
            n_synthetic: n,
            closer_to_train: wins,
            ties,
            closer_to_holdout: n - wins - ties,
            share_closer_to_train: (2 * wins + ties) as f64 / (2 * n) as f64,
            mean_dcr_train: mean(d_train),
            mean_dcr_holdout: mean(d_holdout),
            identical_match_count_train: histogram[0].count_train,
            identical_match_count_holdout: histogram[0].count_holdout,
            histogram,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub schema_version: u32,
    pub report: String,
    pub column_count: usize,
    /// Training rows used as DCR reference (after size equalization).
    pub n_train: usize,
    pub n_holdout: usize,
    pub c_privacy: usize,
    pub seed: u64,
    /// Fingerprint of the discretization model.
    pub model: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(flatten)]
    pub summary: DcrSummary,
}

impl PrivacyReport {
    pub fn share_closer_to_train(&self) -> f64 {
        self.summary.share_closer_to_train
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: PrivacyReport = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION || report.report != "privacy" {
            return Err(Error::Report(format!(
                "expected privacy report v{REPORT_SCHEMA_VERSION}, found {} v{}",
                report.report, report.schema_version
            )));
        }
        Ok(report)
    }

    /// `distance,count_train,count_holdout`
    pub fn write_histogram_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["distance", "count_train", "count_holdout"])?;
        for bin in &self.summary.histogram {
            wtr.serialize((bin.distance, bin.count_train, bin.count_holdout))?;
        }
        wtr.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Training and holdout references for privacy evaluation, encoded once.
pub struct PrivacyReference {
    model: DiscretizationModel,
    train: DcrIndex,
    holdout: DcrIndex,
    schema_probe: Table,
    n_reference: usize,
    c_privacy: usize,
    seed: u64,
    notes: Vec<String>,
}

impl PrivacyReference {
    /// Fits the privacy discretizer on the full training table, then
    /// subsamples the larger of training and holdout so both references have
    /// the same size.
    pub fn new(train: &Table, holdout: &Table, cfg: &DiscretizationConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyTable("train"));
        }
        if holdout.is_empty() {
            return Err(Error::EmptyTable("holdout"));
        }
        train.check_same_schema(holdout)?;
        let model = fit_discretizer(train, cfg.c_privacy)?;

        let mut notes = Vec::new();
        let n = train.row_count().min(holdout.row_count());
        let equalize = |t: &Table, which: &str, notes: &mut Vec<String>| -> Result<Option<Table>> {
            if t.row_count() == n {
                return Ok(None);
            }
            let msg = format!("{which} subsampled from {} to {n} rows (seed {seed})", t.row_count());
            log::warn!("{msg}");
            notes.push(msg);
            subsample(t, n, seed).map(Some)
        };
        let train_eq = equalize(train, "training", &mut notes)?;
        let holdout_eq = equalize(holdout, "holdout", &mut notes)?;
        let train_ref = apply_discretizer(&model, train_eq.as_ref().unwrap_or(train))?;
        let holdout_ref = apply_discretizer(&model, holdout_eq.as_ref().unwrap_or(holdout))?;
        Ok(PrivacyReference {
            train: DcrIndex::new(&train_ref)?,
            holdout: DcrIndex::new(&holdout_ref)?,
            model,
            schema_probe: train.take_rows(&[]),
            n_reference: n,
            c_privacy: cfg.c_privacy,
            seed,
            notes,
        })
    }

    pub fn model(&self) -> &DiscretizationModel {
        &self.model
    }

    /// Per-row distances to both references.
    pub fn records(&self, synth: &Table) -> Result<Vec<DcrRecord>> {
        let (d_train, d_holdout) = self.distances(synth)?;
        Ok(d_train
            .into_iter()
            .zip(d_holdout)
            .enumerate()
            .map(|(synth_row, (d_train, d_holdout))| DcrRecord {
                synth_row,
                d_train,
                d_holdout,
            })
            .collect())
    }

    fn distances(&self, synth: &Table) -> Result<(Vec<u32>, Vec<u32>)> {
        if synth.is_empty() {
            return Err(Error::EmptyTable("synthetic"));
        }
        self.schema_probe.check_same_schema(synth)?;
        let encoded = apply_discretizer(&self.model, synth)?;
        Ok((self.train.distances(&encoded)?, self.holdout.distances(&encoded)?))
    }

    pub fn evaluate(&self, synth: &Table) -> Result<PrivacyReport> {
        let (d_train, d_holdout) = self.distances(synth)?;
        let summary = DcrSummary::from_distances(&d_train, &d_holdout, self.model.column_count())?;
        Ok(PrivacyReport {
            schema_version: REPORT_SCHEMA_VERSION,
            report: "privacy".to_string(),
            column_count: self.model.column_count(),
            n_train: self.n_reference,
            n_holdout: self.n_reference,
            c_privacy: self.c_privacy,
            seed: self.seed,
            model: self.model.fingerprint.clone(),
            notes: self.notes.clone(),
            summary,
        })
    }
}

/// DCR-based privacy report for `synth` against equally sized training and
/// holdout references. `seed` drives the size equalization.
pub fn privacy_report(
    train: &Table,
    holdout: &Table,
    synth: &Table,
    cfg: &DiscretizationConfig,
    seed: u64,
) -> Result<PrivacyReport> {
    PrivacyReference::new(train, holdout, cfg, seed)?.evaluate(synth)
}

/// Calibration control: split the holdout in two, use one half as the holdout
/// reference and feed the other half as if it were synthetic. Neither half was
/// seen by any generator, so the expected share is exactly one half.
pub fn holdout_control_report(
    train: &Table,
    holdout: &Table,
    cfg: &DiscretizationConfig,
    seed: u64,
) -> Result<PrivacyReport> {
    let (reference, pseudo_synthetic) = split_train_holdout(holdout, seed)?;
    let mut report = privacy_report(train, &reference, &pseudo_synthetic, cfg, seed)?;
    report.notes.push(format!(
        "holdout control: half of the holdout evaluated as synthetic (split seed {seed})"
    ));
    Ok(report)
}
