//! Simple random and ranked-set sample generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::InverseLomax;
use crate::error::{OvlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsDesign {
    n: usize,
}

impl SrsDesign {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(OvlError::InvalidDesign("SRS needs n >= 1".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Balanced ranked-set design: set size `r`, `m` cycles, `n = r m` retained
/// observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RssDesign {
    r: usize,
    m: usize,
}

impl RssDesign {
    pub fn new(r: usize, m: usize) -> Result<Self> {
        if r == 0 || m == 0 {
            return Err(OvlError::InvalidDesign(format!(
                "RSS needs r >= 1 and m >= 1, got r = {r}, m = {m}"
            )));
        }
        Ok(Self { r, m })
    }

    pub fn set_size(&self) -> usize {
        self.r
    }

    pub fn cycles(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.r * self.m
    }
}

/// Retained order statistics `X_(i)k`, rank-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSample {
    design: RssDesign,
    values: Vec<f64>,
}

impl RankedSample {
    /// Builds a sample from `(rank, cycle, value)` triples with 1-based
    /// indices. Every `(rank, cycle)` cell must appear exactly once.
    pub fn from_triples(triples: &[(usize, usize, f64)]) -> Result<Self> {
        let r = triples.iter().map(|t| t.0).max().unwrap_or(0);
        let m = triples.iter().map(|t| t.1).max().unwrap_or(0);
        let design = RssDesign::new(r, m)?;
        let mut cells: Vec<Option<f64>> = vec![None; r * m];
        for &(rank, cycle, value) in triples {
            if rank == 0 || cycle == 0 {
                return Err(OvlError::InvalidDesign(
                    "rank and cycle indices start at 1".into(),
                ));
            }
            if !(value > 0.0) || !value.is_finite() {
                return Err(OvlError::Domain {
                    what: "observation",
                    value,
                    expected: "finite and > 0",
                });
            }
            let slot = &mut cells[(rank - 1) * m + (cycle - 1)];
            if slot.is_some() {
                return Err(OvlError::InvalidDesign(format!(
                    "duplicate cell rank {rank}, cycle {cycle}"
                )));
            }
            *slot = Some(value);
        }
        let values = cells
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                v.ok_or_else(|| {
                    OvlError::InvalidDesign(format!(
                        "missing cell rank {}, cycle {}",
                        idx / m + 1,
                        idx % m + 1
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { design, values })
    }

    pub fn design(&self) -> RssDesign {
        self.design
    }

    /// Value for 1-based `rank` and `cycle`.
    pub fn value(&self, rank: usize, cycle: usize) -> f64 {
        assert!((1..=self.design.r).contains(&rank) && (1..=self.design.m).contains(&cycle));
        self.values[(rank - 1) * self.design.m + (cycle - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(rank, cycle, value)` triples, 1-based, rank-major.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.design.m;
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (idx / m + 1, idx % m + 1, v))
    }
}

pub fn draw_srs<R: Rng + ?Sized>(d: &InverseLomax, design: SrsDesign, rng: &mut R) -> Vec<f64> {
    (0..design.n).map(|_| d.draw(rng)).collect()
}

/// McIntyre ranked-set sampling with perfect ranking. For each cycle and
/// each rank `i` a fresh set of `r` units is drawn, sorted ascending, and
/// its `i`-th smallest value is kept; `r^2 m` raw draws in total.
pub fn draw_rss<R: Rng + ?Sized>(d: &InverseLomax, design: RssDesign, rng: &mut R) -> RankedSample {
    let RssDesign { r, m } = design;
    let mut values = vec![0.0; r * m];
    let mut set = vec![0.0; r];
    for cycle in 0..m {
        for rank in 0..r {
            for slot in set.iter_mut() {
                *slot = d.draw(rng);
            }
            set.sort_by(f64::total_cmp);
            values[rank * m + cycle] = set[rank];
        }
    }
    RankedSample { design, values }
}
