//! Fixture tables shaped like census extracts, for the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synthcheck_core::{ColumnData, ColumnKind, ColumnSchema, Table};

/// `numeric` skewed numeric columns followed by `categorical` columns with
/// 2 to 40 levels, about 2% missing throughout.
pub fn census_like(rows: usize, numeric: usize, categorical: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut schema = Vec::new();
    let mut columns = Vec::new();
    for j in 0..numeric {
        schema.push(ColumnSchema::new(format!("num{j}"), ColumnKind::Numeric));
        let values = (0..rows)
            .map(|_| {
                if rng.random_bool(0.02) {
                    None
                } else if j % 3 == 0 && rng.random_bool(0.8) {
                    Some(0.0)
                } else {
                    Some((rng.random::<f64>() * 90.0).powi(2).round())
                }
            })
            .collect();
        columns.push(ColumnData::Numeric(values));
    }
    for j in 0..categorical {
        let levels: Vec<String> = (0..2 + (j * 7) % 39).map(|l| format!("v{l}")).collect();
        let n = levels.len() as u32;
        schema.push(ColumnSchema::new(format!("cat{j}"), ColumnKind::Categorical));
        let values = (0..rows)
            .map(|_| {
                if rng.random_bool(0.02) {
                    None
                } else {
                    // Skewed toward low levels.
                    let u: f64 = rng.random();
                    Some(((u * u) * n as f64) as u32 % n)
                }
            })
            .collect();
        columns.push(ColumnData::Categorical { levels, values });
    }
    Table::new(schema, columns).expect("fixture schema is valid")
}
