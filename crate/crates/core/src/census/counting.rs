//! Counters and per-record statistics over a [`CensusTable`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{CensusTable, ClassId};
use crate::error::{Error, Result};
use crate::symspace::{chamber_angle, flag_distance, Flag, WeylVector};

/// A count together with whether the census is guaranteed to contain every contributor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Count {
    pub value: u64,
    pub complete: bool,
}

/// `N(R) = #{γ : d(o, γo) < R}`.
pub fn count_orbit(table: &CensusTable, r: f64) -> Count {
    Count {
        value: table.sorted_distances().partition_point(|&x| x < r) as u64,
        complete: r <= table.horizon_r(),
    }
}

/// `P(t)`: primitive classes (up to inversion) with `l([γ]) < t`.
pub fn count_primitive_classes(table: &CensusTable, t: f64) -> Count {
    Count {
        value: table.sorted_class_lengths().partition_point(|&x| x < t) as u64,
        complete: t <= table.horizon_t(),
    }
}

#[derive(Clone, Debug)]
pub struct FlagBall {
    pub center: Flag,
    pub radius: f64,
}

impl FlagBall {
    pub fn new(center: Flag, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, f: &Flag) -> bool {
        flag_distance(f, &self.center).is_ok_and(|x| x <= self.radius)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionalCount {
    pub count: u64,
    /// Records within the radius whose Cartan flags are undefined.
    pub undefined: u64,
    pub complete: bool,
}

/// Sorted distances of the records passing the two flag-ball constraints, for
/// evaluating `N(R; A, B)` at many radii.
pub struct DirectionalCounter {
    members: Vec<f64>,
    undefined: Vec<f64>,
    horizon: f64,
}

impl DirectionalCounter {
    pub fn new(table: &CensusTable, a: &FlagBall, b: &FlagBall) -> Self {
        let mut members = Vec::new();
        let mut undefined = Vec::new();
        for (i, r) in table.records().iter().enumerate() {
            match (table.flag(i), table.inv_flag(i)) {
                (Some(f), Some(g)) => {
                    if a.contains(&f) && b.contains(&g) {
                        members.push(r.distance);
                    }
                }
                _ => undefined.push(r.distance),
            }
        }
        members.sort_by(f64::total_cmp);
        undefined.sort_by(f64::total_cmp);
        Self {
            members,
            undefined,
            horizon: table.horizon_r(),
        }
    }

    pub fn count(&self, r: f64) -> DirectionalCount {
        DirectionalCount {
            count: self.members.partition_point(|&x| x < r) as u64,
            undefined: self.undefined.partition_point(|&x| x < r) as u64,
            complete: r <= self.horizon,
        }
    }
}

/// `N(R; A, B)`: records with `d(o, γo) < R` whose direction flag lies in `A`
/// and whose inverse direction flag lies in `B`.
pub fn count_directional(table: &CensusTable, r: f64, a: &FlagBall, b: &FlagBall) -> DirectionalCount {
    DirectionalCounter::new(table, a, b).count(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenoistGap {
    /// Index `k`: max of `|L(γ) - H(o, γo)|` over very reduced words of length `k`.
    pub per_length: Vec<f64>,
    pub m_hat: f64,
}

pub fn benoist_gap(table: &CensusTable) -> BenoistGap {
    let mut per_length = vec![0.0_f64; table.max_word_length() + 1];
    for (i, r) in table.records().iter().enumerate() {
        if !r.very_reduced {
            continue;
        }
        let gap = table.jordan(i).distance(&table.cartan(i));
        let slot = &mut per_length[r.word_len()];
        *slot = slot.max(gap);
    }
    let m_hat = per_length.iter().copied().fold(0.0, f64::max);
    BenoistGap { per_length, m_hat }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMultiplicity {
    pub t: f64,
    /// `(class id, number of primitive conjugates with l(γ) <= t)`, nonzero entries only.
    pub counts: Vec<(ClassId, u64)>,
    pub max_count: u64,
    /// Log-log slope of the max count against `t` over `t/8, 2t/8, ..., t`.
    pub slope: Option<f64>,
}

/// Conjugates (and inverse conjugates) of each primitive class present in the census.
pub fn class_multiplicity(table: &CensusTable, t: f64) -> ClassMultiplicity {
    let members: Vec<(ClassId, f64)> = table
        .records()
        .iter()
        .filter(|r| r.primitive)
        .filter_map(|r| r.class.map(|c| (c, r.length)))
        .collect();
    let tally = |limit: f64| -> HashMap<ClassId, u64> {
        let mut m = HashMap::new();
        for &(c, len) in &members {
            if len <= limit {
                *m.entry(c).or_insert(0) += 1;
            }
        }
        m
    };
    let mut counts: Vec<(ClassId, u64)> = tally(t).into_iter().collect();
    counts.sort_unstable();
    let max_count = counts.iter().map(|c| c.1).max().unwrap_or(0);

    let points: Vec<(f64, f64)> = (1..=8)
        .map(|k| t * k as f64 / 8.0)
        .filter_map(|tk| {
            let m = tally(tk).values().copied().max().unwrap_or(0);
            (m > 0 && tk > 0.0).then(|| (tk.ln(), (m as f64).ln()))
        })
        .collect();
    let slope = (points.len() >= 2)
        .then(|| super::growth::least_squares(&points).map(|f| f.slope))
        .flatten();
    ClassMultiplicity {
        t,
        counts,
        max_count,
        slope,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCone {
    pub min_len: usize,
    pub sample_count: usize,
    /// Largest pairwise chamber angle among sampled directions.
    pub alpha_hat: f64,
    /// Smallest `min_i (H_i - H_(i+1)) / |H|` among sampled directions.
    pub min_wall_gap: f64,
    /// `(k, min_wall_gap over words of length exactly k)` for `k >= min_len`.
    pub per_length_min_wall_gap: Vec<(usize, f64)>,
}

/// `(alpha_hat, min_wall_gap)` of a set of unit chamber vectors.
pub fn cone_statistics(dirs: &[WeylVector]) -> (f64, f64) {
    let min_wall_gap = dirs.iter().map(|h| h.min_gap()).fold(f64::INFINITY, f64::min);
    let Some(first) = dirs.first() else {
        return (0.0, min_wall_gap);
    };
    let alpha = match first.dim() {
        // a single ray: every direction is compared with the first
        2 => dirs
            .iter()
            .filter_map(|h| chamber_angle(first, h).ok())
            .fold(0.0, f64::max),
        // the chamber is a planar sector; the widest pair are the angular extremes
        3 => {
            let (s2, s6) = (2f64.sqrt(), 6f64.sqrt());
            let (lo, hi) = dirs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| {
                let c = h.coords();
                let u = (c[0] - c[1]) / s2;
                let v = (c[0] + c[1] - 2.0 * c[2]) / s6;
                let phi = v.atan2(u);
                (lo.min(phi), hi.max(phi))
            });
            hi - lo
        }
        _ => {
            let mut best = 0.0_f64;
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    best = best.max(chamber_angle(&dirs[i], &dirs[j]).unwrap_or(0.0));
                }
            }
            best
        }
    };
    (alpha, min_wall_gap)
}

/// Normalized Cartan directions of words of length `>= min_len`.
pub fn limit_cone(table: &CensusTable, min_len: usize) -> Result<LimitCone> {
    if table.dim() == 2 {
        return Err(Error::RankOne);
    }
    if min_len > table.max_word_length() {
        return Err(Error::DegenerateWindow(format!(
            "min_len {min_len} exceeds census length {}",
            table.max_word_length()
        )));
    }
    let mut by_len: Vec<Vec<WeylVector>> = vec![Vec::new(); table.max_word_length() + 1];
    for (i, r) in table.records().iter().enumerate() {
        if r.word_len() >= min_len {
            if let Some(h) = table.cartan_dir(i) {
                by_len[r.word_len()].push(h);
            }
        }
    }
    let per_length_min_wall_gap = (min_len..=table.max_word_length())
        .map(|k| (k, cone_statistics(&by_len[k]).1))
        .collect();
    let all: Vec<WeylVector> = by_len.into_iter().flatten().collect();
    let (alpha_hat, min_wall_gap) = cone_statistics(&all);
    Ok(LimitCone {
        min_len,
        sample_count: all.len(),
        alpha_hat,
        min_wall_gap,
        per_length_min_wall_gap,
    })
}
