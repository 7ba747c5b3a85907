//! Schottky generator systems: loading, validation and word evaluation.
//!
//! A system is validated numerically. Each powered generator must be regular
//! axial, the `2l` fixed flags must be pairwise transverse, the flag balls of
//! radius `ball_radius` around them must be disjoint, and every letter must
//! map each sampled flag of the other balls into its own ball (the ping-pong
//! certificate). Short words are also checked to evaluate to distinct matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec;
use crate::freegroup::{enumerate_words, word_count, Letter, Word};
use crate::symspace::{
    fixed_flags_with_inverse, flag_distance, jordan_projection_with_inverse, orbit_distance,
    transversality_margin, Flag, SquareMatrix, Tolerances,
};

pub const DEFAULT_BALL_RADIUS: f64 = 0.2;
pub const DEFAULT_SAMPLE_COUNT: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Determinant deviation tolerated (and normalized away) when loading.
pub const UNIMODULAR_TOL: f64 = 1e-6;
/// Entries beyond this magnitude abort word evaluation.
pub const OVERFLOW_LIMIT: f64 = 1e300;
/// Products are renormalized after this many multiplications.
pub const RESCALE_PERIOD: usize = 8;
/// Words up to this length are checked to give pairwise distinct matrices.
pub const DISTINCT_WORD_LEN: usize = 8;
/// Minimal max-entry separation between matrices of distinct short words.
pub const DISTINCT_WORD_SEPARATION: f64 = 1e-6;
const DISTINCT_WORD_BUDGET: u128 = 300_000;

/// On-disk description of a generator system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dimension: usize,
    /// Seed generators, each row-major with `dimension^2` entries.
    pub generators: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Hash of the canonical config serialization, the seed and the crate version.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_string(self).expect("config serializes").as_bytes());
        h.update(self.seed().to_le_bytes());
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Per-letter data; indexed by [`Letter::code`].
#[derive(Clone, Debug)]
pub struct LetterData {
    pub letter: Letter,
    pub matrix: SquareMatrix,
    /// Natural log of the determinant, tracked for renormalization.
    pub log_det: f64,
    /// `d(o, s.o)`.
    pub displacement: f64,
    /// Attracting flag of the letter's matrix (repelling flag of its inverse).
    pub fixed_flag: Option<Flag>,
}

#[derive(Clone, Debug)]
pub struct SchottkySystem {
    config: SystemConfig,
    dim: usize,
    seeds: Vec<SquareMatrix>,
    power: u32,
    letters: Vec<LetterData>,
    max_displacement: f64,
    ball_radius: f64,
    sample_count: usize,
    seed: u64,
    tolerances: Tolerances,
    validated: bool,
}

/// A word together with its matrix and inverse matrix.
#[derive(Clone, Debug)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: SquareMatrix,
    pub inverse: SquareMatrix,
}

/// Parses a JSON configuration and builds the (unvalidated) system.
pub fn load_system_json(text: &str) -> Result<SchottkySystem> {
    load_system(&SystemConfig::from_json(text)?)
}

/// Builds the letter table from a configuration; does not validate.
pub fn load_system(config: &SystemConfig) -> Result<SchottkySystem> {
    let d = config.dimension;
    if d < 2 {
        return Err(Error::Parse(format!("dimension must be at least 2, got {d}")));
    }
    if config.generators.is_empty() {
        return Err(Error::Parse("at least one generator is required".into()));
    }
    if config.generators.len() > Letter::MAX_GENERATORS {
        return Err(Error::Parse("too many generators".into()));
    }
    let power = config.power.unwrap_or(1);
    if power == 0 {
        return Err(Error::Parse("power must be at least 1".into()));
    }
    let ball_radius = config.ball_radius.unwrap_or(DEFAULT_BALL_RADIUS);
    if !(ball_radius > 0.0 && ball_radius <= 1.0) {
        return Err(Error::Parse(format!("ball_radius {ball_radius} outside (0, 1]")));
    }
    let tolerances = config.tolerances.unwrap_or_default();

    let mut seeds = Vec::with_capacity(config.generators.len());
    for entries in &config.generators {
        let mut m = SquareMatrix::from_row_major_unchecked(d, entries)?;
        let det = m.det();
        if !((det - 1.0).abs() <= UNIMODULAR_TOL) {
            return Err(Error::NotUnimodular { det });
        }
        m.scale(det.powf(-1.0 / d as f64));
        seeds.push(m);
    }

    let l = seeds.len();
    let mut letters = Vec::with_capacity(2 * l);
    for (i, seed) in seeds.iter().enumerate() {
        let g = seed.pow(power);
        let g_inv = g.inverse()?;
        let flags = fixed_flags_with_inverse(&g, &g_inv, tolerances.gap).ok();
        let (att, rep) = match flags {
            Some((a, r)) => (Some(a), Some(r)),
            None => (None, None),
        };
        for (inverted, (matrix, flag)) in [(false, (g, att)), (true, (g_inv, rep))] {
            letters.push(LetterData {
                letter: Letter::new(i, inverted),
                log_det: matrix.det().ln(),
                displacement: orbit_distance(&matrix)?,
                matrix,
                fixed_flag: flag,
            });
        }
    }
    let max_displacement = letters.iter().map(|x| x.displacement).fold(0.0, f64::max);

    Ok(SchottkySystem {
        config: config.clone(),
        dim: d,
        seeds,
        power,
        letters,
        max_displacement,
        ball_radius,
        sample_count: config.sample_count.unwrap_or(DEFAULT_SAMPLE_COUNT),
        seed: config.seed(),
        tolerances,
        validated: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst-case slack; negative when failing, absent when the check could not run.
    pub margin: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub power: u32,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The first failing check as a typed error.
    pub fn first_error(&self) -> Option<Error> {
        let failed = self.checks.iter().find(|c| !c.passed)?;
        Some(match failed.name.as_str() {
            "regular" => Error::NotRegular(failed.detail.clone()),
            "transverse" | "balls_disjoint" => Error::NotTransverse(failed.detail.clone()),
            _ => Error::PingPongFailed(failed.detail.clone()),
        })
    }

    pub fn into_result(self) -> Result<Self> {
        match self.first_error() {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

impl SchottkySystem {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn fingerprint(&self) -> String {
        self.config.fingerprint()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.dim - 1
    }

    /// Number of generators `l`.
    pub fn generator_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn generators(&self) -> impl Iterator<Item = &SquareMatrix> {
        self.letters.iter().step_by(2).map(|x| &x.matrix)
    }

    pub fn letters(&self) -> &[LetterData] {
        &self.letters
    }

    pub fn letter(&self, x: Letter) -> &LetterData {
        &self.letters[x.code()]
    }

    pub fn letter_displacement(&self, x: Letter) -> f64 {
        self.letters[x.code()].displacement
    }

    /// `max_s d(o, s.o)`.
    pub fn max_displacement(&self) -> f64 {
        self.max_displacement
    }

    pub fn fixed_flag(&self, x: Letter) -> Option<&Flag> {
        self.letters[x.code()].fixed_flag.as_ref()
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Runs every check and marks the system validated iff all pass.
    pub fn validate(&mut self) -> ValidationReport {
        let report = validate(self);
        self.validated = report.passed;
        report
    }

    /// Validates and fails with the first offending check.
    pub fn into_validated(mut self) -> Result<Self> {
        self.validate().into_result()?;
        Ok(self)
    }

    /// The same system with seeds raised to `power` instead.
    pub fn with_power(&self, power: u32) -> Result<Self> {
        let mut config = self.config.clone();
        config.power = Some(power);
        load_system(&config)
    }

    /// Evaluates a reduced word. Products are renormalized by `det^(-1/d)`
    /// after every [`RESCALE_PERIOD`] multiplications, with the determinant
    /// tracked from the letters.
    pub fn element(&self, w: &Word) -> Result<GroupElement> {
        let mut acc = ProductState::identity(self.dim);
        for (k, &x) in w.letters().iter().enumerate() {
            acc = acc.extend(self, x, k + 1);
            if acc.matrix.max_abs() > OVERFLOW_LIMIT || acc.inverse.max_abs() > OVERFLOW_LIMIT {
                return Err(Error::Overflow(w.to_text(self.generator_count())));
            }
        }
        if !acc.matrix.is_finite() || !acc.inverse.is_finite() {
            return Err(Error::Overflow(w.to_text(self.generator_count())));
        }
        Ok(GroupElement {
            word: w.clone(),
            matrix: acc.matrix,
            inverse: acc.inverse,
        })
    }
}

/// Running product for a word and its inverse. Shared by [`SchottkySystem::element`]
/// and the census sweep so both produce identical floating-point results.
#[derive(Clone, Debug)]
pub(crate) struct ProductState {
    pub matrix: SquareMatrix,
    pub inverse: SquareMatrix,
    /// Sum of letter log-determinants since the last renormalization.
    pub pending_log_det: f64,
}

impl ProductState {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: SquareMatrix::identity(dim),
            inverse: SquareMatrix::identity(dim),
            pending_log_det: 0.0,
        }
    }

    /// Appends letter `x` as the `length`-th letter.
    pub fn extend(&self, sys: &SchottkySystem, x: Letter, length: usize) -> Self {
        let data = &sys.letters[x.code()];
        let inv = &sys.letters[x.inverse().code()];
        let mut matrix = self.matrix.mul(&data.matrix);
        let mut inverse = inv.matrix.mul(&self.inverse);
        let mut pending = self.pending_log_det + data.log_det;
        if length % RESCALE_PERIOD == 0 {
            let d = sys.dim as f64;
            matrix.scale((-pending / d).exp());
            inverse.scale((pending / d).exp());
            pending = 0.0;
        }
        Self {
            matrix,
            inverse,
            pending_log_det: pending,
        }
    }
}

fn check(name: &str, margin: Option<f64>, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: margin.is_some_and(|m| m > 0.0),
        margin,
        detail,
    }
}

fn skipped(name: &str, why: &str) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed: false,
        margin: None,
        detail: format!("skipped: {why}"),
    }
}

pub fn validate(sys: &SchottkySystem) -> ValidationReport {
    let l = sys.generator_count();
    let tol = &sys.tolerances;
    let mut checks = Vec::new();

    // (a) regularity of the powered generators
    let mut worst = (f64::INFINITY, String::new());
    for x in sys.letters.iter().step_by(2) {
        let inv = &sys.letters[x.letter.inverse().code()];
        let gap = match jordan_projection_with_inverse(&x.matrix, &inv.matrix) {
            Ok(v) => v.min_gap(),
            Err(_) => f64::NEG_INFINITY,
        };
        if gap - tol.gap < worst.0 {
            worst = (gap - tol.gap, x.letter.name(l));
        }
    }
    let regular = check(
        "regular",
        Some(worst.0),
        format!("smallest Jordan gap minus tolerance at generator {}", worst.1),
    );
    let regular_ok = regular.passed && sys.letters.iter().all(|x| x.fixed_flag.is_some());
    checks.push(regular);
    if !regular_ok {
        for name in ["transverse", "balls_disjoint", "ping_pong"] {
            checks.push(skipped(name, "generators are not regular"));
        }
        checks.push(distinct_words_check(sys));
        return finish(sys, checks);
    }
    let flags: Vec<&Flag> = sys.letters.iter().map(|x| x.fixed_flag.as_ref().expect("regular")).collect();

    // (b) pairwise transversality and disjoint balls
    let mut worst_t = (f64::INFINITY, String::new());
    let mut worst_b = (f64::INFINITY, String::new());
    for i in 0..flags.len() {
        for j in i + 1..flags.len() {
            let pair = format!(
                "{}/{}",
                sys.letters[i].letter.name(l),
                sys.letters[j].letter.name(l)
            );
            let t = transversality_margin(flags[i], flags[j]).unwrap_or(f64::NEG_INFINITY) - tol.transverse;
            if t < worst_t.0 {
                worst_t = (t, pair.clone());
            }
            let b = flag_distance(flags[i], flags[j]).unwrap_or(0.0) - 2.0 * sys.ball_radius;
            if b < worst_b.0 {
                worst_b = (b, pair);
            }
        }
    }
    checks.push(check(
        "transverse",
        Some(worst_t.0),
        format!("smallest transversality margin at pair {}", worst_t.1),
    ));
    checks.push(check(
        "balls_disjoint",
        Some(worst_b.0),
        format!("closest flag balls at pair {}", worst_b.1),
    ));

    // (c) ping-pong: s maps every other ball into its own ball
    let mut worst_p = (f64::INFINITY, String::new());
    for s in &sys.letters {
        let target = s.fixed_flag.as_ref().expect("regular");
        let excluded = s.letter.inverse().code();
        let sources: Vec<usize> = (0..flags.len()).filter(|&j| j != excluded).collect();
        let sampled = exec::map_range(sys.sample_count, |k| {
            let j = sources[k % sources.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(sys.seed, s.letter.code(), k));
            let f = sample_flag_in_ball(&mut rng, flags[j], sys.ball_radius);
            image_distance(&s.matrix, &f, target)
        });
        let centers = sources.iter().map(|&j| image_distance(&s.matrix, flags[j], target));
        let worst_here = sampled.into_iter().chain(centers).fold(0.0_f64, f64::max);
        if sys.ball_radius - worst_here < worst_p.0 {
            worst_p = (sys.ball_radius - worst_here, s.letter.name(l));
        }
    }
    checks.push(check(
        "ping_pong",
        Some(worst_p.0),
        format!("radius minus farthest image distance at letter {}", worst_p.1),
    ));

    checks.push(distinct_words_check(sys));
    finish(sys, checks)
}

fn finish(sys: &SchottkySystem, checks: Vec<CheckResult>) -> ValidationReport {
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        power: sys.power,
        checks,
    }
}

fn image_distance(g: &SquareMatrix, f: &Flag, target: &Flag) -> f64 {
    match f.act(g) {
        Ok(img) => flag_distance(&img, target).unwrap_or(1.0),
        Err(_) => 1.0,
    }
}

fn sample_seed(seed: u64, letter: usize, k: usize) -> u64 {
    // splitmix-style mixing so neighbouring samples get unrelated streams
    let mut z = seed
        ^ (letter as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (k as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A flag at distance at most `radius` from `center`, with radius drawn so
/// samples spread over the ball volume rather than crowding the center.
pub fn sample_flag_in_ball<R: Rng>(rng: &mut R, center: &Flag, radius: f64) -> Flag {
    let d = center.dim();
    let manifold_dim = (d * (d - 1) / 2) as f64;
    let target = radius * rng.random::<f64>().powf(1.0 / manifold_dim);
    let mut direction = nalgebra::DMatrix::<f64>::zeros(d, d);
    for x in direction.iter_mut() {
        *x = rng.sample(StandardNormal);
    }
    let norm = direction.norm();
    if norm > 0.0 {
        direction /= norm;
    }
    let at = |t: f64| -> Option<(Flag, f64)> {
        let f = Flag::from_basis(&(center.frame() + &direction * t)).ok()?;
        let dist = flag_distance(&f, center).ok()?;
        Some((f, dist))
    };
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    let mut best = center.clone();
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match at(mid) {
            Some((f, dist)) if dist <= target => {
                best = f;
                lo = mid;
            }
            _ => hi = mid,
        }
    }
    best
}

/// Minimal max-entry separation between matrices of distinct words of length
/// `<= max_len` (sweep over the first entry, so close pairs are not missed).
pub fn distinct_word_separation(sys: &SchottkySystem, max_len: usize) -> Result<f64> {
    let mut mats = Vec::new();
    for w in enumerate_words(sys.generator_count(), max_len) {
        mats.push(sys.element(&w)?.matrix.to_row_major());
    }
    mats.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut best = f64::INFINITY;
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            if mats[j][0] - mats[i][0] > best {
                break;
            }
            let diff = mats[i]
                .iter()
                .zip(&mats[j])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            best = best.min(diff);
        }
    }
    Ok(best)
}

fn distinct_words_check(sys: &SchottkySystem) -> CheckResult {
    let l = sys.generator_count();
    let mut len = DISTINCT_WORD_LEN;
    while len > 1 && word_count(l, len) > DISTINCT_WORD_BUDGET {
        len -= 1;
    }
    match distinct_word_separation(sys, len) {
        Ok(sep) => check(
            "distinct_words",
            Some(sep - DISTINCT_WORD_SEPARATION),
            format!("closest matrices among words of length <= {len}"),
        ),
        Err(e) => skipped("distinct_words", &e.to_string()),
    }
}

/// Least power `p <= max_power` for which the powered system validates.
pub fn suggest_power(sys: &SchottkySystem, max_power: u32) -> Result<u32> {
    // fixed flags do not depend on the power, so transversality is checked once
    let flags: Vec<&Flag> = sys
        .letters
        .iter()
        .map(|x| {
            x.fixed_flag
                .as_ref()
                .ok_or_else(|| Error::NotRegular(format!("generator {}", x.letter.name(sys.generator_count()))))
        })
        .collect::<Result<_>>()?;
    for i in 0..flags.len() {
        for j in i + 1..flags.len() {
            if transversality_margin(flags[i], flags[j])? <= sys.tolerances.transverse {
                return Err(Error::NotTransverse(format!(
                    "{}/{}",
                    sys.letters[i].letter.name(sys.generator_count()),
                    sys.letters[j].letter.name(sys.generator_count())
                )));
            }
        }
    }
    for p in 1..=max_power {
        let candidate = sys.with_power(p)?;
        if validate(&candidate).passed {
            return Ok(p);
        }
    }
    Err(Error::NoPowerFound { max_power })
}

/// Built-in demonstration systems.
pub mod presets {
    use super::SystemConfig;
    use crate::symspace::SquareMatrix;

    pub const NAMES: [&str; 2] = ["sl2-demo", "sl3-demo"];

    pub fn get(name: &str) -> Option<SystemConfig> {
        match name {
            "sl2-demo" => Some(sl2_demo()),
            "sl3-demo" => Some(sl3_demo()),
            _ => None,
        }
    }

    fn conjugate(k: &SquareMatrix, a: &SquareMatrix) -> SquareMatrix {
        k.mul(a).mul(&k.transpose())
    }

    /// `diag(4, 1/4)` and its conjugate by the rotation through `pi/4`, squared.
    pub fn sl2_demo() -> SystemConfig {
        let a = SquareMatrix::diagonal(&[4.0, 0.25]);
        let k = SquareMatrix::rotation(2, 0, 1, std::f64::consts::FRAC_PI_4);
        SystemConfig {
            dimension: 2,
            generators: vec![a.to_row_major(), conjugate(&k, &a).to_row_major()],
            power: Some(2),
            ball_radius: None,
            sample_count: None,
            seed: None,
            tolerances: None,
        }
    }

    /// The rotation used to place the second SL(3) generator.
    pub fn sl3_rotation() -> SquareMatrix {
        SquareMatrix::rotation(3, 0, 1, 0.3)
            .mul(&SquareMatrix::rotation(3, 1, 2, 0.3))
            .mul(&SquareMatrix::rotation(3, 0, 2, -0.75))
    }

    /// `diag(4, 1, 1/4)` and a generic rotation conjugate, at the least valid power.
    pub fn sl3_demo() -> SystemConfig {
        let a = SquareMatrix::diagonal(&[4.0, 1.0, 0.25]);
        SystemConfig {
            dimension: 3,
            generators: vec![a.to_row_major(), conjugate(&sl3_rotation(), &a).to_row_major()],
            power: Some(SL3_POWER),
            ball_radius: None,
            sample_count: None,
            seed: None,
            tolerances: None,
        }
    }

    /// Least power at which [`sl3_demo`] validates.
    pub const SL3_POWER: u32 = 2;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::Word;

    fn sl2_pair(scale: f64, power: u32) -> SystemConfig {
        let a = SquareMatrix::diagonal(&[scale, 1.0 / scale]);
        let k = SquareMatrix::rotation(2, 0, 1, std::f64::consts::FRAC_PI_4);
        SystemConfig {
            dimension: 2,
            generators: vec![a.to_row_major(), k.mul(&a).mul(&k.transpose()).to_row_major()],
            power: Some(power),
            ball_radius: None,
            sample_count: Some(200),
            seed: None,
            tolerances: None,
        }
    }

    #[test]
    fn load_parses_simple_config() {
        let sys = load_system_json(
            r#"{"dimension": 2, "generators": [[2, 0, 0, 0.5], [1, 1, 1, 2]]}"#,
        )
        .unwrap();
        assert_eq!(sys.generator_count(), 2);
        assert_eq!(sys.dim(), 2);
        assert_eq!(sys.power(), 1);
        assert!(!sys.is_validated());
    }

    #[test]
    fn load_rejects_non_unimodular_and_bad_shapes() {
        assert!(matches!(
            load_system_json(r#"{"dimension": 2, "generators": [[2, 0, 0, 1]]}"#),
            Err(Error::NotUnimodular { .. })
        ));
        assert!(matches!(
            load_system_json(r#"{"dimension": 2, "generators": [[1, 0, 0]]}"#),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(load_system_json("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn load_normalizes_small_determinant_drift() {
        let sys = load_system_json(r#"{"dimension": 2, "generators": [[2.000001, 0, 0, 0.5]]}"#).unwrap();
        assert!((sys.generators().next().unwrap().det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn letter_displacements_are_inversion_symmetric() {
        let sys = load_system(&presets::sl3_demo()).unwrap();
        for x in sys.letters() {
            let inv = sys.letter_displacement(x.letter.inverse());
            assert!((x.displacement - inv).abs() < 1e-9);
        }
        let max = sys.letters().iter().map(|x| x.displacement).fold(0.0, f64::max);
        assert_eq!(sys.max_displacement(), max);
    }

    #[test]
    fn classical_sl2_pair_validates() {
        // oracle: on the projective line, diag(16, 1/16) sends the angle θ to
        // atan(tan θ / 256); the three other arcs sit within 0.99 rad of 0 or π,
        // so they land within 0.01 rad of the attracting point.
        let theta = std::f64::consts::FRAC_PI_4 + 0.21;
        let image = (theta.tan() / 256.0).atan();
        assert!(image.sin() < 0.2);
        let mut sys = load_system(&sl2_pair(4.0, 2)).unwrap();
        let report = sys.validate();
        assert!(report.passed, "{report:#?}");
        assert!(sys.is_validated());
    }

    #[test]
    fn duplicate_generators_are_not_transverse() {
        let mut cfg = sl2_pair(4.0, 2);
        cfg.generators[1] = cfg.generators[0].clone();
        let mut sys = load_system(&cfg).unwrap();
        let err = sys.validate().into_result().unwrap_err();
        assert!(matches!(err, Error::NotTransverse(_)), "{err}");
    }

    #[test]
    fn rotation_generator_is_not_regular() {
        let r = SquareMatrix::rotation(2, 0, 1, 0.3).to_row_major();
        let mut sys = load_system(&SystemConfig {
            dimension: 2,
            generators: vec![r],
            power: None,
            ball_radius: None,
            sample_count: Some(10),
            seed: None,
            tolerances: None,
        })
        .unwrap();
        let err = sys.validate().into_result().unwrap_err();
        assert!(matches!(err, Error::NotRegular(_)), "{err}");
    }

    #[test]
    fn suggest_power_examples() {
        let sys = load_system(&sl2_pair(4.0, 1)).unwrap();
        assert_eq!(suggest_power(&sys, 5).unwrap(), 1);
        assert!(matches!(suggest_power(&sys, 0), Err(Error::NoPowerFound { .. })));

        // weak contraction: the oracle is validate() itself at each power
        let weak = load_system(&sl2_pair(1.3, 1)).unwrap();
        let first_valid = (1..=6)
            .find(|&p| validate(&weak.with_power(p).unwrap()).passed)
            .unwrap();
        assert_eq!(first_valid, 4);
        assert_eq!(suggest_power(&weak, 6).unwrap(), 4);
    }

    #[test]
    fn sl3_preset_power_is_minimal() {
        let sys = load_system(&presets::sl3_demo()).unwrap();
        assert_eq!(suggest_power(&sys.with_power(1).unwrap(), 6).unwrap(), presets::SL3_POWER);
    }

    #[test]
    fn element_examples() {
        let sys = load_system_json(r#"{"dimension": 2, "generators": [[2, 0, 0, 0.5], [1, 1, 1, 2]]}"#).unwrap();
        let e = sys.element(&Word::empty()).unwrap();
        assert_eq!(e.matrix, SquareMatrix::identity(2));
        // hand multiplication: diag(2, 1/2) [[1,1],[1,2]] = [[2,2],[0.5,1]]
        let ab = sys.element(&Word::parse("a b", 2).unwrap()).unwrap();
        let expected = [2.0, 2.0, 0.5, 1.0];
        for (x, y) in ab.matrix.to_row_major().iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        let w = Word::parse("a b A b b a B", 2).unwrap();
        let g = sys.element(&w).unwrap();
        let g_inv = sys.element(&w.inverse()).unwrap();
        let prod = g.matrix.mul(&g_inv.matrix);
        assert!(prod.distance_to(&SquareMatrix::identity(2)) < 1e-8 * g.matrix.max_abs().powi(2));
        assert!(g.matrix.mul(&g.inverse).distance_to(&SquareMatrix::identity(2)) < 1e-8 * g.matrix.max_abs().powi(2));
    }

    #[test]
    fn element_overflow_is_reported() {
        let huge = SquareMatrix::diagonal(&[1e200, 1e-200]).to_row_major();
        let sys = load_system(&SystemConfig {
            dimension: 2,
            generators: vec![huge],
            power: None,
            ball_radius: None,
            sample_count: None,
            seed: None,
            tolerances: None,
        })
        .unwrap();
        assert!(matches!(sys.element(&Word::parse("a a", 1).unwrap()), Err(Error::Overflow(_))));
    }

    #[test]
    fn sampled_flags_stay_in_ball() {
        let sys = load_system(&presets::sl3_demo()).unwrap();
        let center = sys.letters()[0].fixed_flag.clone().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut farthest: f64 = 0.0;
        for _ in 0..200 {
            let f = sample_flag_in_ball(&mut rng, &center, 0.2);
            let dist = flag_distance(&f, &center).unwrap();
            assert!(dist <= 0.2 + 1e-12);
            farthest = farthest.max(dist);
        }
        assert!(farthest > 0.15, "samples should reach toward the boundary");
    }

    #[test]
    fn config_round_trips_and_fingerprint_tracks_edits() {
        let cfg = presets::sl2_demo();
        let back = SystemConfig::from_json(&cfg.to_json_pretty()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.fingerprint(), cfg.fingerprint());
        let mut edited = cfg.clone();
        edited.ball_radius = Some(0.15);
        assert_ne!(edited.fingerprint(), cfg.fingerprint());
    }
}
