use serde::{Deserialize, Serialize};

use crate::error::{OvlError, Result};
use crate::estimators::FormulaSource;

fn default_alpha2() -> f64 {
    1.0
}

fn default_replications() -> usize {
    1000
}

fn default_level_alpha0() -> f64 {
    0.05
}

/// Grid and run parameters of a Monte Carlo study.
///
/// Cells are enumerated `cycles` outermost, then `r_values`, then
/// `set_sizes`; the position in that order is the cell index used for
/// seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub r_values: Vec<f64>,
    #[serde(default = "default_alpha2")]
    pub alpha2: f64,
    pub set_sizes: Vec<[usize; 2]>,
    pub cycles: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_level_alpha0")]
    pub level_alpha0: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub formula_source: FormulaSource,
}

/// One `(R, r1, r2, m)` grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: u64,
    pub r: f64,
    pub r1: usize,
    pub r2: usize,
    pub m: usize,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StudyConfig =
            serde_json::from_str(text).map_err(|e| OvlError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(OvlError::Config(msg));
        if self.r_values.is_empty() || self.set_sizes.is_empty() || self.cycles.is_empty() {
            return fail("r_values, set_sizes and cycles must be nonempty".into());
        }
        if self.replications == 0 {
            return fail("replications must be >= 1".into());
        }
        if !(self.level_alpha0 > 0.0 && self.level_alpha0 < 1.0) {
            return fail(format!("level_alpha0 = {} is not in (0, 1)", self.level_alpha0));
        }
        if !(self.alpha2 > 0.0 && self.alpha2.is_finite()) {
            return fail(format!("alpha2 = {} must be finite and > 0", self.alpha2));
        }
        for &r in &self.r_values {
            if !(r > 0.0 && r.is_finite()) {
                return fail(format!("R = {r} must be finite and > 0"));
            }
            if !(r * self.alpha2).is_finite() {
                return fail(format!("R * alpha2 overflows for R = {r}"));
            }
        }
        for &[r1, r2] in &self.set_sizes {
            if r1 == 0 || r2 == 0 {
                return fail(format!("set size ({r1}, {r2}) must be >= 1"));
            }
        }
        if self.cycles.contains(&0) {
            return fail("cycles must be >= 1".into());
        }
        if has_duplicates(&self.r_values) {
            return fail("r_values contains duplicates".into());
        }
        if has_duplicates(&self.set_sizes) {
            return fail("set_sizes contains duplicates".into());
        }
        if has_duplicates(&self.cycles) {
            return fail("cycles contains duplicates".into());
        }
        Ok(())
    }

    /// Confidence level `1 - alpha0`.
    pub fn level(&self) -> f64 {
        1.0 - self.level_alpha0
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &m in &self.cycles {
            for &r in &self.r_values {
                for &[r1, r2] in &self.set_sizes {
                    out.push(Cell {
                        index: out.len() as u64,
                        r,
                        r1,
                        r2,
                        m,
                    });
                }
            }
        }
        out
    }
}

fn has_duplicates<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter()
        .enumerate()
        .any(|(i, x)| xs[..i].iter().any(|y| y == x))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"r_values":[0.5],"set_sizes":[[2,3]],"cycles":[8],"master_seed":1}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = StudyConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.alpha2, 1.0);
        assert_eq!(cfg.replications, 1000);
        assert_eq!(cfg.level_alpha0, 0.05);
        assert_eq!(cfg.formula_source, FormulaSource::Derived);
        assert!((cfg.level() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("\"master_seed\"", "\"seed_typo\":3,\"master_seed\"");
        assert!(matches!(StudyConfig::from_json(&text), Err(OvlError::Config(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        for bad in [
            MINIMAL.replace("[0.5]", "[]"),
            MINIMAL.replace("[0.5]", "[-1.0]"),
            MINIMAL.replace("[0.5]", "[0.5, 0.5]"),
            MINIMAL.replace("[[2,3]]", "[[0,3]]"),
            MINIMAL.replace("[8]", "[0]"),
            MINIMAL.replace("\"master_seed\":1", "\"master_seed\":1,\"replications\":0"),
            MINIMAL.replace("\"master_seed\":1", "\"master_seed\":1,\"level_alpha0\":1.5"),
        ] {
            assert!(StudyConfig::from_json(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cell_order() {
        let cfg = StudyConfig {
            r_values: vec![0.1, 0.5],
            alpha2: 1.0,
            set_sizes: vec![[2, 2], [2, 3]],
            cycles: vec![8, 40],
            replications: 1,
            level_alpha0: 0.05,
            master_seed: 0,
            formula_source: FormulaSource::Derived,
        };
        let cells = cfg.cells();
        assert_eq!(cells.len(), 8);
        assert_eq!((cells[1].r, cells[1].r2, cells[1].m), (0.1, 3, 8));
        assert_eq!((cells[2].r, cells[2].r2), (0.5, 2));
        assert_eq!((cells[7].index, cells[7].m), (7, 40));
    }
}
