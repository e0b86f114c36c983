//! Plain-text failure-time datasets and ranked-set CSV input.

use ovl_core::RankedSample;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<f64>,
}

/// Tokens separated by whitespace or commas; `#` starts a comment that runs
/// to the end of the line.
fn tokens(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(ln, line)| {
        let body = line.split('#').next().unwrap_or("");
        let mut out = Vec::new();
        let mut start = None;
        for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            let sep = ch.is_whitespace() || ch == ',';
            match (start, sep) {
                (None, false) => start = Some(i),
                (Some(s), true) => {
                    out.push((ln + 1, body[..s].chars().count() + 1, &body[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        out
    })
}

fn data_error(name: &str, line: usize, col: usize, msg: String) -> CliError {
    CliError::Data {
        name: name.to_string(),
        line,
        col,
        msg,
    }
}

fn parse_positive(name: &str, line: usize, col: usize, tok: &str) -> Result<f64, CliError> {
    let value: f64 = tok
        .parse()
        .map_err(|_| data_error(name, line, col, format!("`{tok}` is not a number")))?;
    if !(value > 0.0 && value.is_finite()) {
        return Err(data_error(
            name,
            line,
            col,
            format!("value {tok} is not positive and finite"),
        ));
    }
    Ok(value)
}

pub fn parse_dataset(name: &str, text: &str) -> Result<Dataset, CliError> {
    let values = tokens(text)
        .map(|(line, col, tok)| parse_positive(name, line, col, tok))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(data_error(name, 1, 1, "no observations".into()));
    }
    Ok(Dataset {
        name: name.to_string(),
        values,
    })
}

/// `rank,cycle,value` lines (1-based indices). A header line starting with
/// `rank` is skipped.
pub fn parse_ranked(name: &str, text: &str) -> Result<RankedSample, CliError> {
    let mut triples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("rank") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(data_error(
                name,
                idx + 1,
                1,
                format!("expected rank,cycle,value, found {} fields", fields.len()),
            ));
        }
        let index = |k: usize| -> Result<usize, CliError> {
            fields[k].parse().map_err(|_| {
                data_error(name, idx + 1, 1, format!("`{}` is not an index", fields[k]))
            })
        };
        let col = raw.find(fields[2]).map_or(1, |c| c + 1);
        let value = parse_positive(name, idx + 1, col, fields[2])?;
        triples.push((index(0)?, index(1)?, value));
    }
    RankedSample::from_triples(&triples).map_err(|e| data_error(name, 1, 1, e.to_string()))
}
