//! Exact combinatorics of the free group on `l` generators.
//!
//! Letters are totally ordered `h0 < h0^-1 < h1 < h1^-1 < ...`; canonical
//! conjugacy-class representatives are lexicographic minima under that order.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A generator or its inverse. Encoded as `2 * index + inverted`, which is also
/// the total order on letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub const MAX_GENERATORS: usize = 128;

    pub fn new(generator_index: usize, inverted: bool) -> Self {
        assert!(generator_index < Self::MAX_GENERATORS, "generator index out of range");
        Self((generator_index as u8) << 1 | inverted as u8)
    }

    pub fn from_code(code: usize) -> Self {
        assert!(code < 2 * Self::MAX_GENERATORS);
        Self(code as u8)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn generator_index(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverted(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Self(self.0 ^ 1)
    }

    /// Name in the given alphabet: `a`/`A` style when `l <= 26`, `g3`/`g3'` otherwise.
    pub fn name(self, generators: usize) -> String {
        if generators <= 26 {
            let c = (b'a' + self.generator_index() as u8) as char;
            if self.is_inverted() {
                c.to_ascii_uppercase().to_string()
            } else {
                c.to_string()
            }
        } else if self.is_inverted() {
            format!("g{}'", self.generator_index())
        } else {
            format!("g{}", self.generator_index())
        }
    }

    pub fn parse(token: &str, generators: usize) -> Result<Self> {
        let bad = || Error::Parse(format!("bad letter {token:?} for {generators} generators"));
        let letter = if let Some(rest) = token.strip_prefix('g').filter(|r| !r.is_empty() && generators > 26) {
            let (digits, inverted) = match rest.strip_suffix('\'') {
                Some(d) => (d, true),
                None => (rest, false),
            };
            let index: usize = digits.parse().map_err(|_| bad())?;
            if index >= generators {
                return Err(bad());
            }
            Self::new(index, inverted)
        } else {
            let mut chars = token.chars();
            let c = chars.next().ok_or_else(bad)?;
            if chars.next().is_some() || !c.is_ascii_alphabetic() || generators > 26 {
                return Err(bad());
            }
            let index = (c.to_ascii_lowercase() as u8 - b'a') as usize;
            if index >= generators {
                return Err(bad());
            }
            Self::new(index, c.is_ascii_uppercase())
        };
        Ok(letter)
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(SmallVec<[Letter; 16]>);

/// Free reduction of an arbitrary letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
    let mut out: SmallVec<[Letter; 16]> = SmallVec::new();
    for x in raw {
        if out.last() == Some(&x.inverse()) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    Word(out)
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Wraps letters that are already freely reduced.
    pub fn from_reduced(letters: &[Letter]) -> Result<Self> {
        if letters.windows(2).any(|w| w[1] == w[0].inverse()) {
            return Err(Error::Parse("word is not freely reduced".into()));
        }
        Ok(Self(SmallVec::from_slice(letters)))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|x| x.inverse()).collect())
    }

    /// Reduced product `self * rhs`.
    pub fn concat(&self, rhs: &Self) -> Self {
        reduce(self.0.iter().chain(rhs.0.iter()).copied())
    }

    pub fn pow(&self, k: usize) -> Self {
        reduce((0..k).flat_map(|_| self.0.iter().copied()))
    }

    /// Appends a letter; the caller guarantees it does not cancel.
    pub(crate) fn push(&mut self, x: Letter) {
        debug_assert!(self.last() != Some(x.inverse()));
        self.0.push(x);
    }

    /// Cyclically reduced: empty, or last letter is not the inverse of the first.
    pub fn is_very_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => b != a.inverse(),
            _ => true,
        }
    }

    /// The rotation `s_j ... s_n s_1 ... s_(j-1)` (0-based `j`).
    pub fn rotated(&self, j: usize) -> Self {
        let n = self.len();
        if n == 0 {
            return self.clone();
        }
        let j = j % n;
        Self(self.0[j..].iter().chain(&self.0[..j]).copied().collect())
    }

    /// Space-separated letter names, e.g. `"a b A"`.
    pub fn to_text(&self, generators: usize) -> String {
        let names: Vec<String> = self.0.iter().map(|x| x.name(generators)).collect();
        names.join(" ")
    }

    pub fn parse(text: &str, generators: usize) -> Result<Self> {
        let letters = text
            .split_whitespace()
            .map(|t| Letter::parse(t, generators))
            .collect::<Result<Vec<_>>>()?;
        Ok(reduce(letters))
    }

    pub fn display(&self, generators: usize) -> WordDisplay<'_> {
        WordDisplay { word: self, generators }
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    generators: usize,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word.to_text(self.generators))
    }
}

/// Strips matching first/last letters: returns `(core, conjugator)` with
/// `w = conjugator * core * conjugator^-1` and `core` very reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let s = w.letters();
    let (mut lo, mut hi) = (0, s.len());
    while hi - lo >= 2 && s[hi - 1] == s[lo].inverse() {
        lo += 1;
        hi -= 1;
    }
    (
        Word(SmallVec::from_slice(&s[lo..hi])),
        Word(SmallVec::from_slice(&s[..lo])),
    )
}

/// Smallest `p` dividing `n` with `s[i] == s[(i + p) % n]` for all `i`.
fn cyclic_period(s: &[Letter]) -> usize {
    let n = s.len();
    (1..=n)
        .filter(|p| n % p == 0)
        .find(|&p| (0..n - p).all(|i| s[i] == s[i + p]))
        .unwrap_or(n)
}

fn require_very_reduced(w: &Word) -> Result<()> {
    if w.is_empty() || !w.is_very_reduced() {
        return Err(Error::NotVeryReduced(format!("{:?}", w.letters())));
    }
    Ok(())
}

/// Distinct cyclic rotations of a nonempty very reduced word, in rotation order.
pub fn rotations(w: &Word) -> Result<Vec<Word>> {
    require_very_reduced(w)?;
    let p = cyclic_period(w.letters());
    Ok((0..p).map(|j| w.rotated(j)).collect())
}

/// Number of distinct rotations without materializing them.
pub fn rotation_count(w: &Word) -> Result<usize> {
    require_very_reduced(w)?;
    Ok(cyclic_period(w.letters()))
}

pub fn is_primitive(w: &Word) -> Result<bool> {
    require_very_reduced(w)?;
    Ok(cyclic_period(w.letters()) == w.len())
}

/// Conjugacy class in the free group, up to inversion.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjClass {
    pub canonical: Word,
    pub primitive_root: Word,
    pub power: usize,
}

impl ConjClass {
    pub fn is_primitive(&self) -> bool {
        self.power == 1
    }
}

/// Lexicographically least rotation (Booth's algorithm would be linear; words
/// here are short, so the quadratic scan is fine).
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let mut best = 0;
    for j in 1..n {
        for k in 0..n {
            let a = s[(j + k) % n];
            let b = s[(best + k) % n];
            if a != b {
                if a < b {
                    best = j;
                }
                break;
            }
        }
    }
    best
}

pub fn canonical_class(w: &Word) -> Result<ConjClass> {
    let (core, _) = cyclic_reduce(w);
    if core.is_empty() {
        return Err(Error::EmptyCore);
    }
    let fwd = core.rotated(least_rotation(core.letters()));
    let inv = core.inverse();
    let bwd = inv.rotated(least_rotation(inv.letters()));
    let canonical = fwd.min(bwd);
    let p = cyclic_period(canonical.letters());
    Ok(ConjClass {
        primitive_root: Word(SmallVec::from_slice(&canonical.letters()[..p])),
        power: canonical.len() / p,
        canonical,
    })
}

/// `1 + sum_(k=1..max_len) 2l(2l-1)^(k-1)`, the number of reduced words of length `<= max_len`.
pub fn word_count(generators: usize, max_len: usize) -> u128 {
    let mut total: u128 = 1;
    let mut level: u128 = 1;
    for k in 1..=max_len {
        level = if k == 1 {
            2 * generators as u128
        } else {
            level * (2 * generators as u128 - 1)
        };
        total += level;
    }
    total
}

/// Position of `w` in the length-then-lexicographic enumeration.
pub fn word_rank(w: &Word, generators: usize) -> u128 {
    let s = w.letters();
    let mut rank = word_count(generators, s.len().saturating_sub(1));
    if s.is_empty() {
        return 0;
    }
    let branching = 2 * generators as u128 - 1;
    let mut within: u128 = s[0].code() as u128;
    for pair in s.windows(2) {
        let forbidden = pair[0].inverse().code();
        let c = pair[1].code();
        let digit = if c > forbidden { c - 1 } else { c };
        within = within * branching + digit as u128;
    }
    rank += within;
    rank
}

/// Every reduced word of length `<= max_len`, once each, in length-then-lexicographic order.
pub fn enumerate_words(generators: usize, max_len: usize) -> WordIter {
    assert!((1..=Letter::MAX_GENERATORS).contains(&generators));
    WordIter {
        generators,
        max_len,
        current: None,
    }
}

pub struct WordIter {
    generators: usize,
    max_len: usize,
    current: Option<Vec<usize>>,
}

impl WordIter {
    /// Lexicographic successor among reduced words of the same length.
    fn advance(&self, codes: &mut [usize]) -> bool {
        let alphabet = 2 * self.generators;
        let n = codes.len();
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            let mut c = codes[pos] + 1;
            if pos > 0 && c == (codes[pos - 1] ^ 1) {
                c += 1;
            }
            if c < alphabet {
                codes[pos] = c;
                for k in pos + 1..n {
                    codes[k] = if codes[k - 1] ^ 1 == 0 { 1 } else { 0 };
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let next = match self.current.take() {
            None => Vec::new(),
            Some(mut codes) => {
                if self.advance(&mut codes) {
                    codes
                } else if codes.len() < self.max_len {
                    // smallest reduced word of the next length is h0^(n+1)
                    vec![0; codes.len() + 1]
                } else {
                    return None;
                }
            }
        };
        let word = Word(next.iter().map(|&c| Letter::from_code(c)).collect());
        self.current = Some(next);
        Some(word)
    }
}
