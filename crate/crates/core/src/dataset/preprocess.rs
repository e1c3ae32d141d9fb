use std::collections::{BTreeSet, HashMap, HashSet};

use super::load::{Cell, RawTable};
use super::{Dataset, Label};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Features whose modal value covers at least this share of rows are dropped.
pub const DEFAULT_SELECTION_THRESHOLD: f64 = 0.99;

enum Column {
    Numeric { name: String, values: Vec<f64> },
    Categorical { name: String, values: Vec<String> },
}

/// Turns a raw table into a [`Dataset`].
///
/// Steps, in order:
/// 1. drop rows with a missing value in any used column;
/// 2. replace `±inf` by the column's finite max/min;
/// 3. one-hot encode text columns (one indicator per distinct value);
/// 4. min-max normalize to `[0, 1]`, dropping constant columns;
/// 5. drop features whose most frequent value covers `>= threshold` of rows;
/// 6. drop duplicate rows, keeping one per (features, label).
///
/// Row ids are the 0-based data-row positions in the input.
pub fn preprocess(table: &RawTable, threshold: f64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!(
            "selection threshold {threshold} outside [0, 1]"
        )));
    }
    let schema = &table.schema;
    let role = |name: &Option<String>| -> Option<usize> {
        name.as_deref().and_then(|n| table.column_index(n))
    };
    let label_idx = role(&schema.label_column);
    let class_idx = role(&schema.class_column);
    let key_idx = role(&schema.key_column);
    let feature_idx: Vec<usize> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| !schema.is_role_column(c) && !schema.ignore_columns.contains(c))
        .map(|(i, _)| i)
        .collect();
    if feature_idx.is_empty() {
        return Err(Error::NoFeatures);
    }
    let used: Vec<usize> = feature_idx
        .iter()
        .copied()
        .chain([label_idx, class_idx, key_idx].into_iter().flatten())
        .collect();

    // 1. missing values
    let kept: Vec<usize> = (0..table.rows.len())
        .filter(|&r| used.iter().all(|&c| table.rows[r][c] != Cell::Missing))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyDataset);
    }

    // 2. infinities, then 3. one-hot
    let mut columns = Vec::new();
    for &c in &feature_idx {
        let name = table.columns[c].clone();
        let cells: Vec<&Cell> = kept.iter().map(|&r| &table.rows[r][c]).collect();
        if cells.iter().any(|cell| matches!(cell, Cell::Text(_))) {
            let values = cells.iter().map(|cell| cell_text(cell)).collect();
            columns.push(Column::Categorical { name, values });
        } else if let Some(values) = replace_infinities(&cells) {
            columns.push(Column::Numeric { name, values });
        }
    }
    let mut names = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for col in columns {
        match col {
            Column::Numeric { name, values: v } => {
                names.push(name);
                values.push(v);
            }
            Column::Categorical { name, values: v } => {
                let distinct: BTreeSet<&str> = v.iter().map(String::as_str).collect();
                for level in distinct {
                    names.push(format!("{name}={level}"));
                    values.push(v.iter().map(|x| f64::from(u8::from(x == level))).collect());
                }
            }
        }
    }

    // 4. normalize, 5. value-frequency selection
    let n = kept.len();
    let mut selected_names = Vec::new();
    let mut selected: Vec<Vec<f64>> = Vec::new();
    for (name, mut col) in names.into_iter().zip(values) {
        if !normalize(&mut col) {
            continue;
        }
        if modal_share(&col, n) >= threshold {
            continue;
        }
        selected_names.push(name);
        selected.push(col);
    }
    if selected.is_empty() {
        return Err(Error::NoFeatures);
    }

    let labels: Option<Vec<Label>> = label_idx.map(|li| {
        kept.iter()
            .map(|&r| match &table.rows[r][li] {
                Cell::Text(s) if *s == schema.benign_value => Label::Benign,
                _ => Label::Attack,
            })
            .collect()
    });

    // 6. duplicates
    let dim = selected.len();
    let mut seen: HashSet<(Vec<u64>, Option<Label>)> = HashSet::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    let mut out_rows = Vec::with_capacity(n);
    for i in 0..n {
        let bits: Vec<u64> = selected.iter().map(|c| c[i].to_bits()).collect();
        let label = labels.as_ref().map(|l| l[i]);
        if seen.insert((bits, label)) {
            data.extend(selected.iter().map(|c| c[i]));
            out_rows.push(i);
        }
    }

    let features = Matrix::new(out_rows.len(), dim, data)?;
    let row_ids = out_rows.iter().map(|&i| kept[i] as u64).collect();
    let role_values = |idx: usize| -> Vec<String> {
        out_rows
            .iter()
            .map(|&i| cell_text(&table.rows[kept[i]][idx]))
            .collect()
    };
    let mut ds = Dataset::new(
        features,
        labels.map(|l| out_rows.iter().map(|&i| l[i]).collect()),
        row_ids,
        selected_names,
    )?;
    if let Some(ci) = class_idx {
        ds = ds.with_classes(role_values(ci))?;
    }
    if let Some(ki) = key_idx {
        ds = ds.with_keys(role_values(ki))?;
    }
    Ok(ds)
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Number(v) => v.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::PosInf => "inf".into(),
        Cell::NegInf => "-inf".into(),
        Cell::Missing => String::new(),
    }
}

/// `None` when the column has no finite value to anchor the replacement.
fn replace_infinities(cells: &[&Cell]) -> Option<Vec<f64>> {
    let finite = cells.iter().filter_map(|c| match c {
        Cell::Number(v) => Some(*v),
        _ => None,
    });
    let (lo, hi) = finite.fold(None, |acc: Option<(f64, f64)>, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })?;
    Some(
        cells
            .iter()
            .map(|c| match c {
                Cell::Number(v) => *v,
                Cell::PosInf => hi,
                Cell::NegInf => lo,
                _ => unreachable!("text and missing cells filtered earlier"),
            })
            .collect(),
    )
}

/// Min-max scales in place. Returns `false` for a constant column.
fn normalize(col: &mut [f64]) -> bool {
    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo >= hi {
        return false;
    }
    let span = hi - lo;
    for v in col.iter_mut() {
        *v = (*v - lo) / span;
    }
    true
}

fn modal_share(col: &[f64], n: usize) -> f64 {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for v in col {
        *counts.entry(v.to_bits()).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0) as f64 / n as f64
}
