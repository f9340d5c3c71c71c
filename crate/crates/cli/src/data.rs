//! Line-oriented data files: one sequence per line, whitespace-separated
//! tokens, with an optional parallel label file.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use regccrf::{DataDistribution, WeightedPair};

use crate::CliError;

/// One parsed file: 1-based line numbers with their whitespace-split fields.
pub struct Lines {
    pub rows: Vec<(usize, Vec<String>)>,
}

pub fn read_lines(path: &Path) -> Result<Lines, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let rows = text
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split_whitespace().map(str::to_string).collect()))
        .collect();
    Ok(Lines { rows })
}

/// A token line paired with its label line.
pub struct ParallelRow {
    pub line: usize,
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

/// Reads and cross-validates a token file and its parallel label file.
/// Structural problems (count mismatches, empty sequences) are collected per
/// line and reported together.
pub fn read_parallel(data: &Path, labels: &Path) -> Result<Vec<ParallelRow>, CliError> {
    let xs = read_lines(data)?;
    let ys = read_lines(labels)?;
    if xs.rows.len() != ys.rows.len() {
        return Err(CliError::Usage(format!(
            "{} has {} lines but {} has {}",
            data.display(),
            xs.rows.len(),
            labels.display(),
            ys.rows.len()
        )));
    }
    let mut problems = Vec::new();
    let mut rows = Vec::with_capacity(xs.rows.len());
    for ((line, tokens), (_, labels)) in xs.rows.into_iter().zip(ys.rows) {
        if tokens.is_empty() {
            problems.push(format!("line {line}: empty sequence"));
            continue;
        }
        if tokens.len() != labels.len() {
            problems.push(format!(
                "line {line}: {} tokens but {} labels",
                tokens.len(),
                labels.len()
            ));
            continue;
        }
        rows.push(ParallelRow {
            line,
            tokens,
            labels,
        });
    }
    if !problems.is_empty() {
        return Err(CliError::Usage(format!(
            "schema violations:\n  {}",
            problems.join("\n  ")
        )));
    }
    Ok(rows)
}

/// Collapses encoded rows into a weighted empirical distribution. Repeated
/// (tokens, labels) pairs merge, weighted by how often each line occurs;
/// support order is first occurrence, so identical files build identical
/// distributions.
pub fn to_distribution(rows: &[(Vec<String>, Vec<usize>)]) -> Result<DataDistribution, CliError> {
    let total = rows.len() as f64;
    let mut index: HashMap<&(Vec<String>, Vec<usize>), usize> = HashMap::new();
    let mut order: Vec<&(Vec<String>, Vec<usize>)> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for row in rows {
        match index.get(row) {
            Some(&i) => counts[i] += 1,
            None => {
                index.insert(row, order.len());
                order.push(row);
                counts.push(1);
            }
        }
    }
    let entries = order
        .into_iter()
        .zip(counts)
        .map(|((x, y), c)| WeightedPair {
            x: x.clone(),
            y: y.clone(),
            p: c as f64 / total,
        })
        .collect();
    DataDistribution::new(entries).map_err(|e| CliError::Usage(e.to_string()))
}
