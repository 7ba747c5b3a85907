//! Exhaustive word census of a validated Schottky system.
//!
//! Every reduced word of length `<= L` gets one [`CensusRecord`]: its orbit
//! distance `d(o, γo)`, translation length `l(γ)`, conjugacy class, and Cartan
//! data. All counters and estimators in [`counting`] and [`growth`] read from
//! the immutable [`CensusTable`].
//!
//! The sweep is breadth first: level `k` is computed from level `k - 1` as an
//! order-preserving parallel map, so record order (length, then lexicographic)
//! and every floating-point value are independent of the worker count.

pub mod counting;
pub mod growth;
pub mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::freegroup::{canonical_class, cyclic_reduce, is_primitive, word_count, word_rank, Letter, Word};
use crate::schottky::{ProductState, SchottkySystem, OVERFLOW_LIMIT};
use crate::symspace::{
    cartan_projection_with_inverse, cartan_flag_unchecked, jordan_projection_with_inverse, Flag, SquareMatrix,
    WeylVector,
};

pub use counting::{
    benoist_gap, class_multiplicity, cone_statistics, count_directional, count_orbit, count_primitive_classes,
    limit_cone, BenoistGap, ClassMultiplicity, Count, DirectionalCount, DirectionalCounter, FlagBall, LimitCone,
};
pub use growth::{
    default_delta_window, estimate_delta, fit_exponential_rate, growth_report, theorem_report, theorem_report_with,
    DeltaEstimate, GrowthReport, RatioRow, ReportOptions, TheoremReport,
};

pub const DEFAULT_BUDGET: u128 = 100_000_000;
/// Records closer to the base point than this have no Cartan direction.
pub const MIN_DIRECTION_DISTANCE: f64 = 1e-9;

pub type ClassId = u32;

/// One reduced word of the census.
#[derive(Clone, Debug, PartialEq)]
pub struct CensusRecord {
    pub word: Word,
    /// `d(o, γo)`.
    pub distance: f64,
    /// `l(γ)`.
    pub length: f64,
    pub very_reduced: bool,
    /// Cyclic core is not a proper power. False for the identity.
    pub primitive: bool,
    /// Class of the primitive root; `None` for the identity.
    pub class: Option<ClassId>,
    /// Cartan flags are stored (Cartan vector regular at the gap tolerance).
    pub flags_defined: bool,
}

impl CensusRecord {
    pub fn word_len(&self) -> usize {
        self.word.len()
    }
}

/// A conjugacy class of primitive elements, up to inversion.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassInfo {
    /// Canonical primitive root.
    pub key: Word,
    /// `l([γ])`, read from the record of the canonical root.
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub dimension: usize,
    pub generators: usize,
    pub max_word_length: usize,
    pub max_displacement: f64,
    pub gap_tol: f64,
    pub system_fingerprint: String,
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub execution: Execution,
    pub budget: u128,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            execution: Execution::Parallel,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CensusTable {
    meta: TableMeta,
    records: Vec<CensusRecord>,
    /// Per record: Cartan vector, Jordan vector, flag frame, inverse flag frame.
    geometry: Vec<f64>,
    classes: Vec<ClassInfo>,
    horizon_r: f64,
    horizon_t: f64,
    sorted_distances: Vec<f64>,
    sorted_class_lengths: Vec<f64>,
}

fn stride(d: usize) -> usize {
    2 * d + 2 * d * d
}

impl CensusTable {
    /// Assembles a table from records and their packed geometry, deriving the
    /// class table, horizons and lookup caches. Lengths of canonical class
    /// roots are read from their own records, which must be present.
    pub fn from_parts(meta: TableMeta, mut records: Vec<CensusRecord>, geometry: Vec<f64>) -> Result<Self> {
        let d = meta.dimension;
        if geometry.len() != records.len() * stride(d) {
            return Err(Error::DimensionMismatch {
                expected: records.len() * stride(d),
                found: geometry.len(),
            });
        }
        let l = meta.generators;
        let roots = exec::map_slice(Execution::Parallel, &records, |r| -> Result<Option<Word>> {
            if r.word.is_empty() {
                return Ok(None);
            }
            Ok(Some(canonical_class(&r.word)?.primitive_root))
        });
        let mut ids: HashMap<Word, ClassId> = HashMap::new();
        let mut classes = Vec::new();
        for (i, root) in roots.into_iter().enumerate() {
            let Some(root) = root? else {
                records[i].class = None;
                continue;
            };
            let next = ids.len() as ClassId;
            let id = *ids.entry(root.clone()).or_insert_with(|| {
                classes.push(ClassInfo {
                    key: root.clone(),
                    length: f64::NAN,
                });
                next
            });
            records[i].class = Some(id);
        }
        let index_of = |w: &Word| -> Option<usize> {
            let i = word_rank(w, l) as usize;
            (i < records.len() && records[i].word == *w).then_some(i)
        };
        for class in &mut classes {
            let i = index_of(&class.key).ok_or_else(|| {
                Error::Parse(format!(
                    "class root {} missing from the table",
                    class.key.to_text(l)
                ))
            })?;
            class.length = records[i].length;
        }

        let max_len = meta.max_word_length;
        let top = records.iter().filter(|r| r.word_len() == max_len);
        let horizon_r = top.clone().map(|r| r.distance).fold(f64::INFINITY, f64::min);
        let horizon_t = top
            .filter(|r| r.very_reduced)
            .map(|r| r.length)
            .fold(f64::INFINITY, f64::min);

        let mut sorted_distances: Vec<f64> = records.iter().map(|r| r.distance).collect();
        sorted_distances.sort_by(f64::total_cmp);
        let mut sorted_class_lengths: Vec<f64> = classes.iter().map(|c| c.length).collect();
        sorted_class_lengths.sort_by(f64::total_cmp);

        Ok(Self {
            meta,
            records,
            geometry,
            classes,
            horizon_r,
            horizon_t,
            sorted_distances,
            sorted_class_lengths,
        })
    }

    pub fn meta(&self) -> &TableMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.meta.dimension
    }

    pub fn rank(&self) -> usize {
        self.meta.dimension - 1
    }

    pub fn generator_count(&self) -> usize {
        self.meta.generators
    }

    pub fn max_word_length(&self) -> usize {
        self.meta.max_word_length
    }

    pub fn max_displacement(&self) -> f64 {
        self.meta.max_displacement
    }

    pub fn system_fingerprint(&self) -> &str {
        &self.meta.system_fingerprint
    }

    pub fn records(&self) -> &[CensusRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    /// `min d(o, γo)` over words of length exactly `L`; orbit counts below it are complete.
    pub fn horizon_r(&self) -> f64 {
        self.horizon_r
    }

    /// `min l(γ)` over very reduced words of length exactly `L`.
    pub fn horizon_t(&self) -> f64 {
        self.horizon_t
    }

    pub(crate) fn sorted_distances(&self) -> &[f64] {
        &self.sorted_distances
    }

    pub(crate) fn sorted_class_lengths(&self) -> &[f64] {
        &self.sorted_class_lengths
    }

    fn slot(&self, i: usize) -> &[f64] {
        let s = stride(self.dim());
        &self.geometry[i * s..(i + 1) * s]
    }

    pub fn index_of(&self, w: &Word) -> Option<usize> {
        let i = word_rank(w, self.generator_count()) as usize;
        (i < self.records.len() && self.records[i].word == *w).then_some(i)
    }

    /// `H(o, γo)`.
    pub fn cartan(&self, i: usize) -> WeylVector {
        WeylVector::from_sorted(self.slot(i)[..self.dim()].to_vec())
    }

    /// `L(γ)`.
    pub fn jordan(&self, i: usize) -> WeylVector {
        let d = self.dim();
        WeylVector::from_sorted(self.slot(i)[d..2 * d].to_vec())
    }

    /// Normalized Cartan vector, absent near the base point.
    pub fn cartan_dir(&self, i: usize) -> Option<WeylVector> {
        if self.records[i].distance < MIN_DIRECTION_DISTANCE {
            return None;
        }
        self.cartan(i).normalized().ok()
    }

    /// Direction flag of `γo` (left Cartan factor of `γ`).
    pub fn flag(&self, i: usize) -> Option<Flag> {
        self.records[i].flags_defined.then(|| {
            let d = self.dim();
            Flag::from_column_major(d, &self.slot(i)[2 * d..2 * d + d * d])
        })
    }

    /// Direction flag of `γ^-1 o`.
    pub fn inv_flag(&self, i: usize) -> Option<Flag> {
        self.records[i].flags_defined.then(|| {
            let d = self.dim();
            Flag::from_column_major(d, &self.slot(i)[2 * d + d * d..])
        })
    }

    pub fn class_key(&self, i: usize) -> Option<&Word> {
        self.records[i].class.map(|c| &self.classes[c as usize].key)
    }

    /// The sub-census of words of length `<= max_len` (a prefix in census order).
    pub fn truncated(&self, max_len: usize) -> Result<Self> {
        let max_len = max_len.min(self.max_word_length());
        let n = word_count(self.generator_count(), max_len) as usize;
        let mut meta = self.meta.clone();
        meta.max_word_length = max_len;
        let s = stride(self.dim());
        Self::from_parts(meta, self.records[..n].to_vec(), self.geometry[..n * s].to_vec())
    }

    /// SHA-256 over every stored bit of the table.
    pub fn content_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.meta.system_fingerprint.as_bytes());
        h.update((self.meta.max_word_length as u64).to_le_bytes());
        for r in &self.records {
            h.update([r.word.len() as u8]);
            h.update(r.word.letters().iter().map(|x| x.code() as u8).collect::<Vec<_>>());
            h.update(r.distance.to_bits().to_le_bytes());
            h.update(r.length.to_bits().to_le_bytes());
            h.update([r.very_reduced as u8, r.primitive as u8, r.flags_defined as u8]);
        }
        for x in &self.geometry {
            h.update(x.to_bits().to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

struct Node {
    word: Word,
    state: ProductState,
}

struct Computed {
    record: CensusRecord,
    geometry: Vec<f64>,
}

fn compute_geometry(
    word: Word,
    g: &SquareMatrix,
    g_inv: &SquareMatrix,
    gap_tol: f64,
) -> Result<Computed> {
    let d = g.dim();
    let very_reduced = word.is_very_reduced();
    let cartan = cartan_projection_with_inverse(g, g_inv)?;
    let mut geometry = Vec::with_capacity(stride(d));
    geometry.extend_from_slice(cartan.coords());
    let (length, jordan) = if very_reduced && !word.is_empty() {
        let j = jordan_projection_with_inverse(g, g_inv)?;
        (j.norm(), j.coords().to_vec())
    } else if word.is_empty() {
        (0.0, vec![0.0; d])
    } else {
        // filled from the cyclic core once the whole table exists
        (f64::NAN, vec![f64::NAN; d])
    };
    geometry.extend_from_slice(&jordan);
    let flags_defined = cartan.is_regular(gap_tol);
    if flags_defined {
        geometry.extend_from_slice(cartan_flag_unchecked(g, g_inv)?.as_slice());
        geometry.extend_from_slice(cartan_flag_unchecked(g_inv, g)?.as_slice());
    } else {
        geometry.resize(stride(d), 0.0);
    }
    let primitive = if word.is_empty() {
        false
    } else {
        is_primitive(&cyclic_reduce(&word).0)?
    };
    Ok(Computed {
        record: CensusRecord {
            distance: cartan.norm(),
            length,
            very_reduced,
            primitive,
            class: None,
            flags_defined,
            word,
        },
        geometry,
    })
}

pub fn build_census(sys: &SchottkySystem, max_len: usize) -> Result<CensusTable> {
    build_census_with(sys, max_len, &CensusOptions::default())
}

pub fn build_census_with(sys: &SchottkySystem, max_len: usize, options: &CensusOptions) -> Result<CensusTable> {
    if !sys.is_validated() {
        return Err(Error::NotValidated);
    }
    let l = sys.generator_count();
    let d = sys.dim();
    let projected = word_count(l, max_len);
    if projected > options.budget {
        return Err(Error::BudgetExceeded {
            projected,
            budget: options.budget,
        });
    }
    let gap_tol = sys.tolerances().gap;
    let n = projected as usize;
    let mut records = Vec::with_capacity(n);
    let mut geometry = Vec::with_capacity(n * stride(d));

    let root = ProductState::identity(d);
    let first = compute_geometry(Word::empty(), &root.matrix, &root.inverse, gap_tol)?;
    records.push(first.record);
    geometry.extend(first.geometry);

    let mut level = vec![Node {
        word: Word::empty(),
        state: root,
    }];
    for k in 1..=max_len {
        let keep_nodes = k < max_len;
        let children = exec::flat_map_slice(options.execution, &level, |node| {
            let forbidden = node.word.last().map(Letter::inverse);
            (0..2 * l)
                .map(Letter::from_code)
                .filter(|&x| Some(x) != forbidden)
                .map(|x| {
                    let mut word = node.word.clone();
                    word.push(x);
                    let state = node.state.extend(sys, x, k);
                    if state.matrix.max_abs() > OVERFLOW_LIMIT || state.inverse.max_abs() > OVERFLOW_LIMIT {
                        return Err(Error::Overflow(word.to_text(l)));
                    }
                    let computed = compute_geometry(word.clone(), &state.matrix, &state.inverse, gap_tol)?;
                    let node = keep_nodes.then_some(Node { word, state });
                    Ok((node, computed))
                })
                .collect::<Vec<_>>()
        });
        let mut next = Vec::with_capacity(if keep_nodes { children.len() } else { 0 });
        for child in children {
            let (node, computed) = child?;
            records.push(computed.record);
            geometry.extend(computed.geometry);
            if let Some(node) = node {
                next.push(node);
            }
        }
        level = next;
    }
    drop(level);

    // translation data of a word is that of its cyclic core, which is shorter
    let s = stride(d);
    for i in 0..records.len() {
        if !records[i].length.is_nan() {
            continue;
        }
        let (core, _) = cyclic_reduce(&records[i].word);
        let j = word_rank(&core, l) as usize;
        debug_assert!(j < i && records[j].very_reduced);
        records[i].length = records[j].length;
        let (head, tail) = geometry.split_at_mut(i * s);
        tail[d..2 * d].copy_from_slice(&head[j * s + d..j * s + 2 * d]);
    }

    let meta = TableMeta {
        dimension: d,
        generators: l,
        max_word_length: max_len,
        max_displacement: sys.max_displacement(),
        gap_tol,
        system_fingerprint: sys.fingerprint(),
    };
    CensusTable::from_parts(meta, records, geometry)
}
