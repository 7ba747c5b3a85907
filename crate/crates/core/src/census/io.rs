//! CSV persistence of census tables, JSON sidecars and ratio tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a table
//! read back from disk is bit-identical to the one written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::growth::RatioRow;
use super::{stride, CensusRecord, CensusTable, TableMeta};
use crate::error::{Error, Result};
use crate::freegroup::Word;
use crate::schottky::SystemConfig;

pub const CENSUS_FILE: &str = "census.csv";
pub const SIDECAR_FILE: &str = "census.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub fingerprint: String,
    pub content_digest: String,
    pub records: usize,
    /// `None` when no word of the top length exists.
    pub horizon_r: Option<f64>,
    pub horizon_t: Option<f64>,
    pub meta: TableMeta,
    pub config: SystemConfig,
}

pub fn header(d: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "word",
        "word_len",
        "distance",
        "length",
        "very_reduced",
        "class_key",
        "primitive",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=d).map(|i| format!("h{i}")));
    h.extend((1..=d).map(|i| format!("l{i}")));
    for prefix in ["f", "g"] {
        for i in 0..d {
            for j in 0..d {
                h.push(format!("{prefix}{i}{j}"));
            }
        }
    }
    h
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Writes the CSV to any writer. Flag columns (`f` for `γ`, `g` for `γ^-1`,
/// row `i` column `j` of the frame) are empty when the flag is undefined.
pub fn write_census_csv<W: std::io::Write>(table: &CensusTable, out: W) -> Result<()> {
    let d = table.dim();
    let l = table.generator_count();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(d))?;
    let mut row: Vec<String> = Vec::with_capacity(7 + stride(d));
    for (i, r) in table.records().iter().enumerate() {
        row.clear();
        row.push(r.word.to_text(l));
        row.push(r.word_len().to_string());
        row.push(format!("{}", r.distance));
        row.push(format!("{}", r.length));
        row.push(r.very_reduced.to_string());
        row.push(table.class_key(i).map(|k| k.to_text(l)).unwrap_or_default());
        row.push(r.primitive.to_string());
        let slot = table.slot(i);
        row.extend(slot[..2 * d].iter().map(|x| format!("{x}")));
        // stored column-major, written row-major
        for base in [2 * d, 2 * d + d * d] {
            for a in 0..d {
                for b in 0..d {
                    row.push(if r.flags_defined {
                        format!("{}", slot[base + b * d + a])
                    } else {
                        String::new()
                    });
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

fn parse_bool(s: &str, what: &str) -> Result<bool> {
    s.parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

/// Reads records written by [`write_census_csv`] and rebuilds the table.
pub fn read_census_csv<R: std::io::Read>(meta: TableMeta, input: R) -> Result<CensusTable> {
    let d = meta.dimension;
    let l = meta.generators;
    let mut rd = csv::Reader::from_reader(input);
    let expected = header(d);
    let found: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(Error::Parse(format!("unexpected header for dimension {d}")));
    }
    let mut records = Vec::new();
    let mut geometry = Vec::new();
    let mut keys = Vec::new();
    for row in rd.records() {
        let row = row?;
        let word = Word::parse(&row[0], l)?;
        let word_len: usize = row[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad word_len: {:?}", &row[1])))?;
        if word_len != word.len() {
            return Err(Error::Parse(format!("word_len mismatch for {:?}", &row[0])));
        }
        let flags_defined = !row[7 + 2 * d].is_empty();
        for k in 0..2 * d {
            geometry.push(parse_f64(&row[7 + k], "coordinate")?);
        }
        let base = 7 + 2 * d;
        for block in 0..2 {
            let cells = &row.iter().skip(base + block * d * d).take(d * d).collect::<Vec<_>>();
            for b in 0..d {
                for a in 0..d {
                    geometry.push(if flags_defined {
                        parse_f64(cells[a * d + b], "flag entry")?
                    } else {
                        0.0
                    });
                }
            }
        }
        keys.push(row[5].to_string());
        records.push(CensusRecord {
            word,
            distance: parse_f64(&row[2], "distance")?,
            length: parse_f64(&row[3], "length")?,
            very_reduced: parse_bool(&row[4], "very_reduced")?,
            primitive: parse_bool(&row[6], "primitive")?,
            class: None,
            flags_defined,
        });
    }
    let table = CensusTable::from_parts(meta, records, geometry)?;
    for (i, key) in keys.iter().enumerate() {
        let derived = table.class_key(i).map(|k| k.to_text(l)).unwrap_or_default();
        if *key != derived {
            return Err(Error::Parse(format!("class_key mismatch at row {}", i + 1)));
        }
    }
    Ok(table)
}

pub fn sidecar(table: &CensusTable, config: &SystemConfig) -> Sidecar {
    Sidecar {
        format_version: FORMAT_VERSION,
        fingerprint: table.system_fingerprint().to_string(),
        content_digest: table.content_digest(),
        records: table.len(),
        horizon_r: finite(table.horizon_r()),
        horizon_t: finite(table.horizon_t()),
        meta: table.meta().clone(),
        config: config.clone(),
    }
}

/// Writes `census.csv` and `census.json` into `dir` and returns their paths.
pub fn write_census(table: &CensusTable, config: &SystemConfig, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(CENSUS_FILE);
    let json_path = dir.join(SIDECAR_FILE);
    let file = std::io::BufWriter::new(fs::File::create(&csv_path)?);
    write_census_csv(table, file)?;
    let mut text = serde_json::to_string_pretty(&sidecar(table, config))?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path))
}

/// Sidecar path for a census CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Loads a census and checks it against its sidecar's content digest.
pub fn read_census(csv_path: &Path) -> Result<(CensusTable, Sidecar)> {
    let side: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
    if side.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format version {}", side.format_version)));
    }
    let file = std::io::BufReader::new(fs::File::open(csv_path)?);
    let table = read_census_csv(side.meta.clone(), file)?;
    if table.content_digest() != side.content_digest {
        return Err(Error::Parse("census CSV does not match its sidecar digest".into()));
    }
    Ok((table, side))
}

pub fn write_ratio_csv<W: std::io::Write>(rows: &[RatioRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["R_or_t", "count", "ratio_lower", "ratio_upper"])?;
    for r in rows {
        w.write_record([
            format!("{}", r.x),
            r.count.to_string(),
            format!("{}", r.ratio_lower),
            format!("{}", r.ratio_upper),
        ])?;
    }
    w.flush()?;
    Ok(())
}
