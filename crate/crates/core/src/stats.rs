//! Streaming trimmed-sum accumulation, normalized statistics, and
//! checkpoint records.
//!
//! One accumulator tracks a single path: the running sum `S_n`, the top-r
//! order statistics `M_n^(1) >= ... >= M_n^(r)`, and the trimmed sums
//! `^(r)S_n = S_n - sum of the top r`. Summation is compensated because a
//! heavy-tailed path adds 10^7 or more terms whose largest dwarfs the rest.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::str::FromStr;

use num::{BigRational, ToPrimitive};

use crate::error::{Error, Result};
use crate::lattice::{GoodSequence, RoundDirection};
use crate::mori::Normalizer;
use crate::rational::{ceil_int, floor_int};

/// Compensated (Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let y = x - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Total order on finite doubles, for heap storage.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TotalF64(f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Normalized functionals of a path prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatKind {
    /// `(S_n - M_n^(1)) / (n ln n)`.
    Th1,
    /// `^(r)S_n / (n ln n)^p`.
    ConvR,
    /// `M_n^(r) / (n ln n)`.
    MaxRatio,
}

impl FromStr for StatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "th1" => Ok(StatKind::Th1),
            "conv_r" => Ok(StatKind::ConvR),
            "max_ratio" => Ok(StatKind::MaxRatio),
            other => Err(Error::InvalidConfig(format!(
                "unknown statistic kind {other:?}; expected th1, conv_r, or max_ratio"
            ))),
        }
    }
}

/// Streaming sum plus top-r order statistics (multiset semantics: ties
/// occupy slots).
#[derive(Debug, Clone)]
pub struct TrimAccumulator {
    r: usize,
    count: u64,
    sum: KahanSum,
    /// Min-heap over the r largest values seen so far.
    top: BinaryHeap<Reverse<TotalF64>>,
}

impl TrimAccumulator {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidConfig(
                "trim depth r must be at least 1".into(),
            ));
        }
        Ok(TrimAccumulator {
            r,
            count: 0,
            sum: KahanSum::default(),
            top: BinaryHeap::with_capacity(r + 1),
        })
    }

    pub fn trim_depth(&self) -> usize {
        self.r
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `S_n`.
    pub fn total_sum(&self) -> f64 {
        self.sum.value()
    }

    pub fn observe(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::Domain(format!(
                "observations must be finite and nonnegative, got {value}"
            )));
        }
        self.count += 1;
        self.sum.add(value);
        self.top.push(Reverse(TotalF64(value)));
        if self.top.len() > self.r {
            self.top.pop();
        }
        Ok(())
    }

    /// `M_n^(1) >= M_n^(2) >= ...`, at most `min(r, n)` values.
    pub fn maxima(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.top.iter().map(|Reverse(v)| v.0).collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// `M_n^(k)` for 1-based `k`, when `k <= min(r, n)`.
    pub fn max_k(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        self.maxima().get(k - 1).copied()
    }

    /// `^(r')S_n` for any depth `r' <= r`; zero when everything is trimmed.
    pub fn trimmed_sum(&self, depth: usize) -> Result<f64> {
        if depth > self.r {
            return Err(Error::Domain(format!(
                "trimmed sum depth {depth} exceeds tracked depth {}",
                self.r
            )));
        }
        if self.count <= depth as u64 {
            return Ok(0.0);
        }
        let removed: f64 = self.maxima().iter().take(depth).sum();
        // Compensation error can leave a tiny negative residue.
        Ok((self.sum.value() - removed).max(0.0))
    }

    /// Normalized statistic at the current `n`; requires `n >= 2` so that
    /// `ln n > 0`.
    pub fn statistic(&self, kind: StatKind, norm: &Normalizer, p: f64) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::Domain(format!(
                "statistics need at least 2 observations, have {}",
                self.count
            )));
        }
        let a_n = norm.a(self.count as f64);
        match kind {
            StatKind::Th1 => {
                let m1 = self.max_k(1).expect("count >= 2");
                Ok((self.sum.value() - m1) / a_n)
            }
            StatKind::ConvR => {
                if !(p > 0.0) {
                    return Err(Error::Domain(format!(
                        "power normalization needs p > 0, got {p}"
                    )));
                }
                Ok(self.trimmed_sum(self.r)? / a_n.powf(p))
            }
            StatKind::MaxRatio => {
                let mr = self.max_k(self.r).ok_or_else(|| {
                    Error::Domain(format!(
                        "M^({}) undefined with {} observations",
                        self.r, self.count
                    ))
                })?;
                Ok(mr / a_n)
            }
        }
    }
}

/// Immutable snapshot of one path at a checkpoint.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckpointRecord {
    pub path_id: u64,
    pub n: u64,
    pub s_n: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    pub trimmed_r: f64,
    pub stat_th1: f64,
    pub stat_conv: f64,
    pub stat_maxratio: f64,
    pub c_n: f64,
}

impl CheckpointRecord {
    pub fn csv_header() -> &'static str {
        "path_id,n,S_n,M1,M2,M3,trimmed_r,stat_th1,stat_conv,stat_maxratio,c_n"
    }

    /// Snapshots `acc` at its current count. `c_n` is passed in because the
    /// centering depends on the model's distribution, not on the path.
    pub fn from_accumulator(
        acc: &TrimAccumulator,
        path_id: u64,
        norm: &Normalizer,
        p: f64,
        c_n: f64,
    ) -> Result<Self> {
        let pick = |k: usize| if k <= acc.trim_depth() { acc.max_k(k) } else { None };
        Ok(CheckpointRecord {
            path_id,
            n: acc.count(),
            s_n: acc.total_sum(),
            m1: pick(1),
            m2: pick(2),
            m3: pick(3),
            trimmed_r: acc.trimmed_sum(acc.trim_depth())?,
            stat_th1: acc.statistic(StatKind::Th1, norm, p)?,
            stat_conv: acc.statistic(StatKind::ConvR, norm, p)?,
            stat_maxratio: acc.statistic(StatKind::MaxRatio, norm, p)?,
            c_n,
        })
    }

    pub fn to_csv_row(&self) -> String {
        let mut row = String::with_capacity(256);
        let _ = write!(row, "{},{}", self.path_id, self.n);
        let _ = write!(row, ",{:.16e}", self.s_n);
        for m in [self.m1, self.m2, self.m3] {
            match m {
                Some(v) => {
                    let _ = write!(row, ",{v:.16e}");
                }
                None => row.push(','),
            }
        }
        let _ = write!(
            row,
            ",{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.trimmed_r, self.stat_th1, self.stat_conv, self.stat_maxratio, self.c_n
        );
        row
    }
}

/// Rounds a real value onto the lattice: `Up` takes the smallest lattice
/// point at or above it, `Down` the largest at or below.
pub fn discretize(value: f64, lattice: &GoodSequence, direction: RoundDirection) -> Result<u64> {
    if !value.is_finite() {
        return Err(Error::Domain(format!("cannot discretize {value}")));
    }
    lattice.round(value, direction)
}

/// Discretizes an exact ratio without any float rounding. Lattice points are
/// integers, so rounding `value` is the same as rounding its integer floor
/// (downward) or ceiling (upward).
pub fn discretize_exact(
    value: &BigRational,
    lattice: &GoodSequence,
    direction: RoundDirection,
) -> Result<u64> {
    let bound = match direction {
        RoundDirection::Up => ceil_int(value),
        RoundDirection::Down => floor_int(value),
    };
    let Some(b) = bound.to_u64() else {
        return Err(Error::Domain(format!(
            "value {value} outside the discretizable range"
        )));
    };
    if b > (1u64 << 53) {
        return Err(Error::CapExceeded(format!(
            "lattice discretization of {b} would lose integer precision"
        )));
    }
    lattice.round(b as f64, direction)
}
