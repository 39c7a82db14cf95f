//! Training-only discretization of mixed-type tables into bounded category codes.
//!
//! Numeric and datetime columns are cut at deduplicated empirical quantiles;
//! categorical columns keep their most frequent values and lump the rest into
//! one group. Missing values get a code of their own. Rules are fitted on the
//! training table and then reused unchanged on every other table.
//!
//! Code layout per column:
//!
//! ```text
//! [0, regular)      quantile bins, or kept categories followed by the lump group
//! regular           missing code, when training had missing values
//! reserved slots    codes training never produces (see `ColumnEncoding::code_space`)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{ColumnData, ColumnKind, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscretizationConfig {
    pub c_univariate: usize,
    pub c_bivariate: usize,
    pub c_threeway: usize,
    pub c_privacy: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig {
            c_univariate: 100,
            c_bivariate: 10,
            c_threeway: 5,
            c_privacy: 10,
        }
    }
}

impl DiscretizationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [
            ("c_univariate", self.c_univariate),
            ("c_bivariate", self.c_bivariate),
            ("c_threeway", self.c_threeway),
            ("c_privacy", self.c_privacy),
        ] {
            if c < 2 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 2, got {c}")));
            }
        }
        Ok(())
    }

    /// Cardinality bound used for marginals of depth `k`. Depths above three
    /// reuse the three-way setting.
    pub fn for_depth(&self, k: usize) -> usize {
        match k {
            0 | 1 => self.c_univariate,
            2 => self.c_bivariate,
            _ => self.c_threeway,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnRule {
    /// Interior cut points; bin `i` is `(edges[i-1], edges[i]]`, with the first
    /// bin open below and the last open above.
    QuantileBins { edges: Vec<f64> },
    CategoryMap {
        /// Categories with their own code, in code order.
        kept: Vec<String>,
        has_lump_group: bool,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        lumped: Vec<String>,
        /// Training rows that fell into the lump group.
        lump_count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnEncoding {
    pub name: String,
    pub kind: ColumnKind,
    pub rule: ColumnRule,
    pub has_missing_code: bool,
}

impl ColumnEncoding {
    /// Codes for non-missing training values.
    pub fn regular_codes(&self) -> u32 {
        match &self.rule {
            ColumnRule::QuantileBins { edges } => edges.len() as u32 + 1,
            ColumnRule::CategoryMap {
                kept, has_lump_group, ..
            } => kept.len() as u32 + u32::from(*has_lump_group),
        }
    }

    /// Number of codes training data can produce: at most `c`, or `c + 1`
    /// with a missing code.
    pub fn cardinality(&self) -> u32 {
        self.regular_codes() + u32::from(self.has_missing_code)
    }

    pub fn missing_code(&self) -> Option<u32> {
        self.has_missing_code.then(|| self.regular_codes())
    }

    pub fn lump_code(&self) -> Option<u32> {
        match &self.rule {
            ColumnRule::CategoryMap {
                kept,
                has_lump_group: true,
                ..
            } => Some(kept.len() as u32),
            _ => None,
        }
    }

    /// Code for categories never seen in training, when there is no lump group.
    fn unseen_slot(&self) -> Option<u32> {
        match &self.rule {
            ColumnRule::CategoryMap {
                has_lump_group: false, ..
            } => Some(self.cardinality()),
            _ => None,
        }
    }

    /// Code for missing values in a column whose training data had none.
    fn unexpected_missing_slot(&self) -> Option<u32> {
        (!self.has_missing_code).then(|| self.cardinality() + u32::from(self.unseen_slot().is_some()))
    }

    /// Total code range, including the reserved slots that only non-training
    /// tables can hit.
    pub fn code_space(&self) -> u32 {
        self.cardinality()
            + u32::from(self.unseen_slot().is_some())
            + u32::from(self.unexpected_missing_slot().is_some())
    }

    fn encode_missing(&self) -> u32 {
        self.missing_code()
            .or_else(|| self.unexpected_missing_slot())
            .expect("either a missing code or a reserved slot exists")
    }

    fn encode_number(&self, edges: &[f64], v: f64) -> u32 {
        edges.partition_point(|&e| e < v) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationModel {
    pub c: usize,
    pub columns: Vec<ColumnEncoding>,
    /// Content hash of `c` and `columns`; identifies tables encoded by this model.
    pub fingerprint: String,
}

impl DiscretizationModel {
    fn new(c: usize, columns: Vec<ColumnEncoding>) -> Result<Self> {
        let fingerprint = fingerprint(c, &columns)?;
        Ok(DiscretizationModel {
            c,
            columns,
            fingerprint,
        })
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: DiscretizationModel = serde_json::from_str(text)?;
        let expected = fingerprint(model.c, &model.columns)?;
        if expected != model.fingerprint {
            return Err(Error::Report(format!(
                "discretization model fingerprint {} does not match its content ({expected})",
                model.fingerprint
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn fingerprint(c: usize, columns: &[ColumnEncoding]) -> Result<String> {
    let payload = serde_json::to_vec(&(c, columns))?;
    let digest = Sha256::digest(&payload);
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

/// Per-column category codes produced by one [`DiscretizationModel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedTable {
    codes: Vec<Vec<u32>>,
    cardinalities: Vec<u32>,
    row_count: usize,
    provenance: String,
}

impl DiscretizedTable {
    /// Builds a table from raw codes. `provenance` names the encoding; tables
    /// are only comparable when it matches.
    pub fn from_codes(codes: Vec<Vec<u32>>, cardinalities: Vec<u32>, provenance: impl Into<String>) -> Result<Self> {
        if codes.len() != cardinalities.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} code columns but {} cardinalities",
                codes.len(),
                cardinalities.len()
            )));
        }
        let row_count = codes.first().map_or(0, Vec::len);
        for (j, (col, &card)) in codes.iter().zip(&cardinalities).enumerate() {
            if col.len() != row_count {
                return Err(Error::SchemaMismatch(format!(
                    "code column {j} has {} rows, expected {row_count}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|&&c| c >= card) {
                return Err(Error::InvalidParameter(format!(
                    "code {bad} in column {j} exceeds cardinality {card}"
                )));
            }
        }
        Ok(DiscretizedTable {
            codes,
            cardinalities,
            row_count,
            provenance: provenance.into(),
        })
    }

    pub fn codes(&self) -> &[Vec<u32>] {
        &self.codes
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.codes[j]
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column_count(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_count == 0
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn row(&self, r: usize) -> Vec<u32> {
        self.codes.iter().map(|c| c[r]).collect()
    }

    pub fn check_same_provenance(&self, other: &DiscretizedTable) -> Result<()> {
        if self.provenance != other.provenance || self.cardinalities != other.cardinalities {
            return Err(Error::ProvenanceMismatch {
                left: self.provenance.clone(),
                right: other.provenance.clone(),
            });
        }
        Ok(())
    }
}

/// Fits one rule per column on `train`, with at most `c` codes per column
/// (plus one for missing values).
pub fn fit_discretizer(train: &Table, c: usize) -> Result<DiscretizationModel> {
    if c < 2 {
        return Err(Error::InvalidParameter(format!(
            "cardinality bound must be at least 2, got {c}"
        )));
    }
    if train.is_empty() {
        return Err(Error::EmptyTable("train"));
    }
    let columns = train
        .schema()
        .iter()
        .zip(train.columns())
        .map(|(schema, data)| {
            let missing = data.missing_count();
            if missing == data.len() {
                log::warn!(
                    "column `{}` is entirely missing; it encodes to a single code",
                    schema.name
                );
            }
            let rule = match data {
                ColumnData::Numeric(values) => {
                    let mut present: Vec<f64> = values.iter().flatten().copied().collect();
                    present.sort_unstable_by(f64::total_cmp);
                    ColumnRule::QuantileBins {
                        edges: quantile_edges(&present, c),
                    }
                }
                ColumnData::Categorical { levels, values } => category_rule(levels, values, c),
            };
            ColumnEncoding {
                name: schema.name.clone(),
                kind: schema.kind,
                rule,
                has_missing_code: missing > 0,
            }
        })
        .collect();
    DiscretizationModel::new(c, columns)
}

/// Deduplicated lower empirical quantiles of `sorted` at `i / c`, `i = 1..c`.
pub fn quantile_edges(sorted: &[f64], c: usize) -> Vec<f64> {
    let n = sorted.len();
    if n == 0 {
        return Vec::new();
    }
    let mut edges: Vec<f64> = Vec::with_capacity(c - 1);
    for i in 1..c {
        // floor(i / c * (n - 1)) without rounding error
        let idx = i * (n - 1) / c;
        let q = sorted[idx];
        if edges.last().map_or(true, |&last| q > last) {
            edges.push(q);
        }
    }
    edges
}

fn category_rule(levels: &[String], values: &[Option<u32>], c: usize) -> ColumnRule {
    let mut counts = vec![0usize; levels.len()];
    for &code in values.iter().flatten() {
        counts[code as usize] += 1;
    }
    // Keyed by value so level order in the input never matters.
    let observed: BTreeMap<&str, usize> = levels
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(l, &n)| (l.as_str(), n))
        .collect();

    let distinct = observed.len();
    if distinct <= c {
        return ColumnRule::CategoryMap {
            kept: observed.keys().map(|s| s.to_string()).collect(),
            has_lump_group: false,
            lumped: Vec::new(),
            lump_count: 0,
        };
    }
    let mut by_rarity: Vec<(&str, usize)> = observed.into_iter().collect();
    // stable sort keeps the lexicographic order among equal frequencies
    by_rarity.sort_by_key(|&(_, n)| n);
    let n_lumped = distinct - c + 1;
    let mut lumped: Vec<String> = by_rarity[..n_lumped].iter().map(|(v, _)| v.to_string()).collect();
    let lump_count = by_rarity[..n_lumped].iter().map(|(_, n)| n).sum();
    let mut kept: Vec<String> = by_rarity[n_lumped..].iter().map(|(v, _)| v.to_string()).collect();
    kept.sort();
    lumped.sort();
    ColumnRule::CategoryMap {
        kept,
        has_lump_group: true,
        lumped,
        lump_count,
    }
}

/// Encodes `table` with a fitted model. Columns must match by name and kind,
/// in model order.
pub fn apply_discretizer(model: &DiscretizationModel, table: &Table) -> Result<DiscretizedTable> {
    if table.column_count() != model.column_count() {
        return Err(Error::SchemaMismatch(format!(
            "model has {} columns, table has {}",
            model.column_count(),
            table.column_count()
        )));
    }
    for (enc, schema) in model.columns.iter().zip(table.schema()) {
        if enc.name != schema.name || enc.kind != schema.kind {
            return Err(Error::SchemaMismatch(format!(
                "model expects {} column `{}`, table has {} column `{}`",
                enc.kind, enc.name, schema.kind, schema.name
            )));
        }
    }
    let codes = model
        .columns
        .par_iter()
        .zip(table.columns().par_iter())
        .map(|(enc, data)| encode_column(enc, data))
        .collect::<Result<Vec<_>>>()?;
    let cardinalities = model.columns.iter().map(ColumnEncoding::code_space).collect();
    Ok(DiscretizedTable {
        codes,
        cardinalities,
        row_count: table.row_count(),
        provenance: model.fingerprint.clone(),
    })
}

fn encode_column(enc: &ColumnEncoding, data: &ColumnData) -> Result<Vec<u32>> {
    let missing = enc.encode_missing();
    match (&enc.rule, data) {
        (ColumnRule::QuantileBins { edges }, ColumnData::Numeric(values)) => Ok(values
            .iter()
            .map(|v| v.map_or(missing, |v| enc.encode_number(edges, v)))
            .collect()),
        (ColumnRule::CategoryMap { kept, .. }, ColumnData::Categorical { levels, values }) => {
            let index: HashMap<&str, u32> = kept.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
            let fallback = enc
                .lump_code()
                .or_else(|| enc.unseen_slot())
                .expect("category rules have a lump group or an unseen slot");
            let by_level: Vec<u32> = levels
                .iter()
                .map(|l| index.get(l.as_str()).copied().unwrap_or(fallback))
                .collect();
            Ok(values
                .iter()
                .map(|v| v.map_or(missing, |code| by_level[code as usize]))
                .collect())
        }
        _ => Err(Error::SchemaMismatch(format!(
            "column `{}` data does not match its {} rule",
            enc.name, enc.kind
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{read_table, ColumnSchema, IngestOptions};
    use proptest::prelude::*;

    fn categorical(name: &str, values: &[&str]) -> Table {
        let mut text = format!("{name}\n");
        for v in values {
            text.push_str(v);
            text.push('\n');
        }
        let schema = [ColumnSchema::new(name, ColumnKind::Categorical)];
        read_table(text.as_bytes(), Some(&schema), &IngestOptions::default()).unwrap()
    }

    fn numeric(values: &[Option<f64>]) -> Table {
        Table::new(
            vec![ColumnSchema::new("x", ColumnKind::Numeric)],
            vec![ColumnData::Numeric(values.to_vec())],
        )
        .unwrap()
    }

    /// Twelve categories `a`..`l`, where the i-th appears i + 1 times.
    fn twelve_levels() -> Table {
        let mut vals = Vec::new();
        for (i, ch) in ('a'..='l').enumerate() {
            for _ in 0..=i {
                vals.push(ch.to_string());
            }
        }
        let refs: Vec<&str> = vals.iter().map(String::as_str).collect();
        categorical("cat", &refs)
    }

    #[test]
    fn lumps_three_rarest_of_twelve() {
        let model = fit_discretizer(&twelve_levels(), 10).unwrap();
        match &model.columns[0].rule {
            ColumnRule::CategoryMap {
                kept,
                has_lump_group,
                lumped,
                lump_count,
            } => {
                assert_eq!(kept.len(), 9);
                assert!(has_lump_group);
                assert_eq!(lumped, &["a", "b", "c"]);
                assert_eq!(*lump_count, 1 + 2 + 3);
            }
            other => panic!("unexpected rule {other:?}"),
        }
        assert_eq!(model.columns[0].cardinality(), 10);
    }

    #[test]
    fn small_cardinality_keeps_everything() {
        let model = fit_discretizer(&categorical("cat", &["x", "y", "z", "x"]), 10).unwrap();
        let enc = &model.columns[0];
        assert!(matches!(&enc.rule, ColumnRule::CategoryMap { kept, has_lump_group: false, .. } if kept.len() == 3));
        assert_eq!(enc.cardinality(), 3);
    }

    #[test]
    fn lumping_tie_break_is_lexicographic() {
        // b, c, d each once; a twice. c=3 -> lump 2 of the singletons: b, c.
        let model = fit_discretizer(&categorical("cat", &["d", "a", "c", "a", "b"]), 3).unwrap();
        match &model.columns[0].rule {
            ColumnRule::CategoryMap { kept, lumped, .. } => {
                assert_eq!(kept, &["a", "d"]);
                assert_eq!(lumped, &["b", "c"]);
            }
            other => panic!("unexpected rule {other:?}"),
        }
    }

    #[test]
    fn hand_computed_edges() {
        // sorted 0,0,0,0,0,0,1,2,5,9 ; c=4 -> idx 9*1/4=2, 9*2/4=4, 9*3/4=6
        let v = [0., 0., 0., 0., 0., 0., 1., 2., 5., 9.];
        assert_eq!(quantile_edges(&v, 4), vec![0.0, 1.0]);
        // c=5 -> idx 1, 3, 5, 7 -> 0,0,0,2
        assert_eq!(quantile_edges(&v, 5), vec![0.0, 2.0]);
    }

    #[test]
    fn zero_heavy_column_collapses_bins() {
        // 1'000 draws, 950 zeros, the rest spread out
        let values: Vec<Option<f64>> = (0..1000)
            .map(|i| Some(if i % 20 == 0 { 1000.0 + i as f64 } else { 0.0 }))
            .collect();
        let table = numeric(&values);
        let model = fit_discretizer(&table, 100).unwrap();
        let enc = &model.columns[0];
        let ColumnRule::QuantileBins { edges } = &enc.rule else {
            panic!("numeric rule expected")
        };
        // Oracle: the lower quantile at i/100 is zero while idx = floor(i * 999 / 100) < 950,
        // i.e. for i <= 95; i = 96..99 land on distinct non-zero values.
        let mut sorted: Vec<f64> = values.iter().flatten().copied().collect();
        sorted.sort_by(f64::total_cmp);
        let mut expected = vec![0.0];
        for i in 96..100 {
            expected.push(sorted[i * 999 / 100]);
        }
        assert_eq!(edges, &expected);
        assert!(enc.cardinality() < 10);
        let dt = apply_discretizer(&model, &table).unwrap();
        let zeros = dt.column(0).iter().filter(|&&c| c == 0).count();
        assert_eq!(zeros, 950);
    }

    #[test]
    fn missing_gets_its_own_code() {
        let t = numeric(&[Some(1.0), None, Some(3.0), Some(2.0)]);
        let model = fit_discretizer(&t, 2).unwrap();
        let enc = &model.columns[0];
        assert!(enc.has_missing_code);
        assert_eq!(enc.cardinality(), 3);
        let dt = apply_discretizer(&model, &t).unwrap();
        assert_eq!(dt.column(0)[1], enc.missing_code().unwrap());
    }

    #[test]
    fn entirely_missing_column_is_a_single_code() {
        let t = categorical("cat", &["?", "?", ""]);
        let model = fit_discretizer(&t, 5).unwrap();
        assert_eq!(model.columns[0].cardinality(), 1);
        let dt = apply_discretizer(&model, &t).unwrap();
        assert!(dt.column(0).iter().all(|&c| c == 0));
    }

    #[test]
    fn empty_train_rejected() {
        let t = categorical("cat", &[]);
        assert!(matches!(fit_discretizer(&t, 5), Err(Error::EmptyTable(_))));
        assert!(fit_discretizer(&categorical("cat", &["a"]), 1).is_err());
    }

    #[test]
    fn unseen_category_goes_to_lump_group() {
        let model = fit_discretizer(&twelve_levels(), 10).unwrap();
        let holdout = categorical("cat", &["zzz", "l"]);
        let dt = apply_discretizer(&model, &holdout).unwrap();
        assert_eq!(dt.column(0)[0], model.columns[0].lump_code().unwrap());
        assert_ne!(dt.column(0)[1], dt.column(0)[0]);
    }

    #[test]
    fn unseen_category_without_lumping_uses_reserved_code() {
        let model = fit_discretizer(&categorical("cat", &["a", "b"]), 10).unwrap();
        let dt = apply_discretizer(&model, &categorical("cat", &["a", "new", "?"])).unwrap();
        let enc = &model.columns[0];
        assert_eq!(dt.column(0)[0], 0);
        assert_eq!(dt.column(0)[1], enc.cardinality());
        assert_eq!(dt.column(0)[2], enc.cardinality() + 1);
        assert_eq!(enc.code_space(), 4);
        assert!(dt.column(0).iter().all(|&c| c < dt.cardinalities()[0]));
    }

    #[test]
    fn out_of_range_numbers_clamp() {
        let train = numeric(&(1..=10).map(|v| Some(v as f64)).collect::<Vec<_>>());
        let model = fit_discretizer(&train, 4).unwrap();
        let dt = apply_discretizer(&model, &numeric(&[Some(-100.0), Some(1e9)])).unwrap();
        assert_eq!(dt.column(0)[0], 0);
        assert_eq!(dt.column(0)[1], model.columns[0].regular_codes() - 1);
    }

    #[test]
    fn lump_code_frequency_matches_fit_time_mass() {
        let t = twelve_levels();
        let model = fit_discretizer(&t, 10).unwrap();
        let dt = apply_discretizer(&model, &t).unwrap();
        let lump = model.columns[0].lump_code().unwrap();
        let ColumnRule::CategoryMap { lump_count, .. } = model.columns[0].rule else {
            unreachable!()
        };
        assert_eq!(dt.column(0).iter().filter(|&&c| c == lump).count(), lump_count);
    }

    #[test]
    fn schema_mismatch_on_apply() {
        let model = fit_discretizer(&numeric(&[Some(1.0), Some(2.0)]), 4).unwrap();
        assert!(matches!(
            apply_discretizer(&model, &categorical("x", &["a"])),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn model_json_round_trip_checks_fingerprint() {
        let model = fit_discretizer(&twelve_levels(), 10).unwrap();
        let json = model.to_json().unwrap();
        assert_eq!(DiscretizationModel::from_json(&json).unwrap(), model);
        let tampered = json.replacen("\"l\"", "\"L\"", 1);
        assert!(DiscretizationModel::from_json(&tampered).is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = DiscretizationConfig::default();
        assert_eq!((cfg.for_depth(1), cfg.for_depth(2), cfg.for_depth(3)), (100, 10, 5));
        assert_eq!(cfg.c_privacy, 10);
        let bad = DiscretizationConfig { c_bivariate: 1, ..cfg };
        assert!(bad.validate().is_err());
    }

    fn category_strategy() -> impl Strategy<Value = Vec<Option<u8>>> {
        prop::collection::vec(prop::option::weighted(0.9, 0u8..40), 1..300)
    }

    fn table_from(values: &[Option<u8>]) -> Table {
        let levels: Vec<String> = (0..40).map(|i| format!("v{i:02}")).collect();
        Table::new(
            vec![ColumnSchema::new("cat", ColumnKind::Categorical)],
            vec![ColumnData::Categorical {
                levels,
                values: values.iter().map(|v| v.map(u32::from)).collect(),
            }],
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn training_codes_respect_cardinality_bound(values in category_strategy(), c in 2usize..20) {
            let t = table_from(&values);
            let model = fit_discretizer(&t, c).unwrap();
            let enc = &model.columns[0];
            let bound = c as u32 + u32::from(enc.has_missing_code);
            prop_assert!(enc.cardinality() <= bound);
            let dt = apply_discretizer(&model, &t).unwrap();
            let distinct: std::collections::HashSet<_> = dt.column(0).iter().collect();
            prop_assert!(distinct.len() <= c + 1);
            prop_assert!(dt.column(0).iter().all(|&code| code < enc.cardinality()));
        }

        #[test]
        fn lumped_mass_is_minimal(values in category_strategy(), c in 2usize..20) {
            let t = table_from(&values);
            let model = fit_discretizer(&t, c).unwrap();
            if let ColumnRule::CategoryMap { kept, has_lump_group: true, lumped, lump_count } = &model.columns[0].rule {
                let mut freq = std::collections::HashMap::new();
                for v in values.iter().flatten() {
                    *freq.entry(format!("v{v:02}")).or_insert(0usize) += 1;
                }
                let mut kept_freq: Vec<usize> = kept.iter().map(|k| freq[k]).collect();
                kept_freq.sort_unstable();
                // the cheapest same-sized subset of kept values
                let cheapest_kept: usize = kept_freq.iter().take(lumped.len()).sum();
                prop_assert_eq!(lumped.len(), freq.len() - c + 1);
                prop_assert!(*lump_count <= cheapest_kept || kept_freq.len() < lumped.len());
            }
        }

        #[test]
        fn distinct_uniform_values_get_own_bins(n in 1usize..60, extra in 0usize..40) {
            let c = (n + extra).max(2);
            let values: Vec<Option<f64>> = (0..n).map(|i| Some(i as f64 * 0.37 - 3.0)).collect();
            let t = numeric(&values);
            let model = fit_discretizer(&t, c).unwrap();
            let dt = apply_discretizer(&model, &t).unwrap();
            let distinct: std::collections::HashSet<_> = dt.column(0).iter().collect();
            prop_assert_eq!(distinct.len(), n);
        }

        #[test]
        fn fit_and_apply_are_deterministic(values in category_strategy(), c in 2usize..20) {
            let t = table_from(&values);
            let a = fit_discretizer(&t, c).unwrap();
            let b = fit_discretizer(&t, c).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(apply_discretizer(&a, &t).unwrap(), apply_discretizer(&b, &t).unwrap());
        }
    }
}
