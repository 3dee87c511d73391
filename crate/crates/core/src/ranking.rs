//! Per-window model ranks and the aggregate rank-percentage matrix.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::distributions::ModelKind;
use crate::divergence::DistanceReport;
use crate::{Error, Result};

/// Which distance a ranking uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// F = P over the full spectrum.
    Standard,
    /// F = 1/P over bins above the median.
    Tail,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::Tail => "tail",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "tail" => Ok(Variant::Tail),
            other => Err(Error::Config(format!("unknown variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub kind: ModelKind,
    /// 1 = smallest |distance|.
    pub rank: u8,
    /// Signed distance; ordering uses its absolute value.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWindow {
    pub window_start: DateTime<Utc>,
    /// Sorted by rank.
    pub entries: Vec<RankEntry>,
}

impl RankedWindow {
    pub fn winner(&self) -> ModelKind {
        self.entries[0].kind
    }

    pub fn rank_of(&self, kind: ModelKind) -> u8 {
        self.entries
            .iter()
            .find(|e| e.kind == kind)
            .map(|e| e.rank)
            .expect("every ranked window holds all four models")
    }

    pub fn distance_of(&self, kind: ModelKind) -> f64 {
        self.entries
            .iter()
            .find(|e| e.kind == kind)
            .map(|e| e.distance)
            .expect("every ranked window holds all four models")
    }
}

/// Ranks the four models of one window by |distance|, ties going to the
/// earlier [`ModelKind`].
pub fn rank_window(reports: &[DistanceReport], variant: Variant) -> Result<RankedWindow> {
    let mut slots: [Option<&DistanceReport>; 4] = [None; 4];
    for r in reports {
        let slot = &mut slots[r.kind.index()];
        if slot.is_some() {
            return Err(Error::DuplicateModel(r.kind));
        }
        *slot = Some(r);
    }
    let mut entries = Vec::with_capacity(4);
    for kind in ModelKind::ALL {
        let report = slots[kind.index()].ok_or(Error::MissingModel(kind))?;
        let distance = match variant {
            Variant::Standard => report.d_standard,
            Variant::Tail => report.d_tail.ok_or(Error::MissingModel(kind))?,
        };
        entries.push(RankEntry {
            kind,
            rank: 0,
            distance,
        });
    }
    let window_start = reports[0].window_start;
    Ok(rank_distances(window_start, entries))
}

fn rank_distances(window_start: DateTime<Utc>, mut entries: Vec<RankEntry>) -> RankedWindow {
    // stable sort keeps declaration order among equal keys
    entries.sort_by(|a, b| a.distance.abs().total_cmp(&b.distance.abs()));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i as u8 + 1;
    }
    RankedWindow {
        window_start,
        entries,
    }
}

/// Percentage of windows in which each model held each rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMatrix {
    /// `percent[model][rank - 1]`, rows in [`ModelKind::ALL`] order.
    pub percent: [[f64; 4]; 4],
    pub windows: usize,
}

impl RankMatrix {
    pub fn percent(&self, kind: ModelKind, rank: u8) -> f64 {
        self.percent[kind.index()][rank as usize - 1]
    }

    pub fn rank1(&self, kind: ModelKind) -> f64 {
        self.percent(kind, 1)
    }
}

pub fn aggregate(windows: &[RankedWindow]) -> Result<RankMatrix> {
    if windows.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let mut counts = [[0usize; 4]; 4];
    for w in windows {
        for e in &w.entries {
            counts[e.kind.index()][e.rank as usize - 1] += 1;
        }
    }
    let total = windows.len() as f64;
    let percent = counts.map(|row| row.map(|c| 100.0 * c as f64 / total));
    Ok(RankMatrix {
        percent,
        windows: windows.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub variant: Variant,
    pub windows: Vec<RankedWindow>,
    pub matrix: RankMatrix,
    /// Windows that could not be ranked under this variant.
    pub excluded: usize,
}
