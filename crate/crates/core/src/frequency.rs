//! Counts of A- and B-associated words within frequency-rank prefixes.
//!
//! A cell `(N, t)` counts records with rank `<= N`. At `t = 0` a word is
//! counted by the sign of `d`; for `t > 0` it needs `|d| >= t`. Words with
//! `d == 0` land in neither column.

use alloc::vec::Vec;

use crate::association::{AssociationRecord, Direction};

pub const DEFAULT_RANGES: [usize; 4] = [100, 1_000, 10_000, 100_000];
pub const DEFAULT_THRESHOLDS: [f64; 4] = [0.0, 0.2, 0.5, 0.8];

/// Direction counts for one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandCounts {
    pub threshold: f64,
    pub a: usize,
    pub b: usize,
}

impl BandCounts {
    /// Share of `direction` among the words counted in this cell, in percent.
    /// Zero when the cell is empty.
    pub fn pct_of_counted(&self, direction: Direction) -> f64 {
        pct(self.count(direction), self.a + self.b)
    }

    pub fn count(&self, direction: Direction) -> usize {
        match direction {
            Direction::A => self.a,
            Direction::B => self.b,
            Direction::None => 0,
        }
    }
}

pub(crate) fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Counts over a set of effect sizes.
pub fn band_counts(effects: impl Iterator<Item = f64> + Clone, thresholds: &[f64]) -> Vec<BandCounts> {
    thresholds
        .iter()
        .map(|&t| {
            let mut cell = BandCounts {
                threshold: t,
                a: 0,
                b: 0,
            };
            for d in effects.clone() {
                if passes(d, t, Direction::A) {
                    cell.a += 1;
                } else if passes(d, t, Direction::B) {
                    cell.b += 1;
                }
            }
            cell
        })
        .collect()
}

/// Band-entry test shared by every table.
pub fn passes(d: f64, threshold: f64, direction: Direction) -> bool {
    match direction {
        Direction::A if threshold > 0.0 => d >= threshold,
        Direction::A => d > 0.0,
        Direction::B if threshold > 0.0 => d <= -threshold,
        Direction::B => d < 0.0,
        Direction::None => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub range: usize,
    /// False when the records stop short of `range`; cells are then empty.
    pub available: bool,
    /// Records with `rank <= range` and `d == 0`.
    pub zero: usize,
    pub cells: Vec<BandCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBiasTable {
    pub ranges: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub rows: Vec<FrequencyRow>,
}

impl FrequencyBiasTable {
    pub fn cell(&self, range: usize, threshold: f64) -> Option<&BandCounts> {
        self.rows
            .iter()
            .find(|r| r.range == range && r.available)?
            .cells
            .iter()
            .find(|c| c.threshold == threshold)
    }
}

/// Builds the table from records sorted by ascending rank.
///
/// The optional `p_max` drops records whose p-value is missing or not below
/// it before counting.
pub fn gender_by_frequency(
    records: &[AssociationRecord],
    ranges: &[usize],
    thresholds: &[f64],
    p_max: Option<f64>,
) -> FrequencyBiasTable {
    debug_assert!(records.windows(2).all(|w| w[0].rank < w[1].rank));
    let covered = records.last().map_or(0, |r| r.rank);
    let rows = ranges
        .iter()
        .map(|&range| {
            if range > covered {
                return FrequencyRow {
                    range,
                    available: false,
                    zero: 0,
                    cells: Vec::new(),
                };
            }
            let end = records.partition_point(|r| r.rank <= range);
            let kept = records[..end].iter().filter(|r| match p_max {
                None => true,
                Some(p) => r.p_value.is_some_and(|v| v < p),
            });
            FrequencyRow {
                range,
                available: true,
                zero: kept.clone().filter(|r| r.effect_size == 0.0).count(),
                cells: band_counts(kept.map(|r| r.effect_size), thresholds),
            }
        })
        .collect();
    FrequencyBiasTable {
        ranges: ranges.to_vec(),
        thresholds: thresholds.to_vec(),
        rows,
    }
}
