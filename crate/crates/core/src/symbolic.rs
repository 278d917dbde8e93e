//! Shift spaces, words, cylinder sets and Bowen balls.
//!
//! Points of a one-sided subshift are infinite sequences; we only ever handle
//! finite prefixes. Under the dyadic metric `rho(x, y) = 2^-min{i : x_i != y_i}`
//! with `eps = 2^-k`, the Bowen ball `B^n_eps(x)` is exactly the cylinder of the
//! length-`n + k` prefix of `x`, so every covering and packing question reduces
//! to questions about words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `eps = 2^-k`. Larger offsets mean smaller balls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DepthOffset(pub u32);

impl DepthOffset {
    pub fn epsilon(self) -> f64 {
        (-(self.0 as f64)).exp2()
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }
}

/// A finite string of symbols. The empty word names the whole space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// The first `len` symbols (the whole word if it is shorter).
    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn child(&self, symbol: u8) -> Word {
        let mut symbols = Vec::with_capacity(self.0.len() + 1);
        symbols.extend_from_slice(&self.0);
        symbols.push(symbol);
        Word(symbols)
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Whether the two cylinders intersect, i.e. one word extends the other.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }
}

impl From<Vec<u8>> for Word {
    fn from(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }
}

impl From<&[u8]> for Word {
    fn from(symbols: &[u8]) -> Self {
        Word(symbols.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Digits `"0110"`, or comma separated symbols `"0,12,3"` for alphabets
    /// larger than ten.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse word {s:?}"));
        if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<u8>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(Word)
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()
                .map(Word)
        }
    }
}

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShiftSpace {
    alphabet: usize,
    transitions: Vec<Vec<bool>>,
    irreducible: bool,
}

impl ShiftSpace {
    /// Validates the matrix and records whether some power of it is positive.
    pub fn new(alphabet: usize, transitions: &[Vec<u8>]) -> Result<Self> {
        if !(2..=256).contains(&alphabet) {
            return Err(Error::AlphabetSize(alphabet));
        }
        if transitions.len() != alphabet {
            return Err(Error::DimensionMismatch {
                rows: transitions.len(),
                cols: transitions.first().map_or(0, Vec::len),
                expected: alphabet,
            });
        }
        let mut matrix = vec![vec![false; alphabet]; alphabet];
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != alphabet {
                return Err(Error::DimensionMismatch {
                    rows: transitions.len(),
                    cols: row.len(),
                    expected: alphabet,
                });
            }
            for (j, &entry) in row.iter().enumerate() {
                matrix[i][j] = match entry {
                    0 => false,
                    1 => true,
                    _ => return Err(Error::NonBinaryEntry { row: i, col: j }),
                };
            }
        }
        for i in 0..alphabet {
            if !matrix[i].iter().any(|&b| b) {
                return Err(Error::DeadRow(i));
            }
            if !(0..alphabet).any(|r| matrix[r][i]) {
                return Err(Error::DeadColumn(i));
            }
        }
        let irreducible = has_positive_power(&matrix);
        Ok(ShiftSpace {
            alphabet,
            transitions: matrix,
            irreducible,
        })
    }

    pub fn full(alphabet: usize) -> Self {
        let ones = vec![vec![1u8; alphabet]; alphabet];
        Self::new(alphabet, &ones).expect("full shift is valid")
    }

    /// The shift on {0, 1} forbidding the block `11`.
    pub fn golden_mean() -> Self {
        Self::new(2, &[vec![1, 1], vec![1, 0]]).expect("golden mean shift is valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn allows(&self, from: u8, to: u8) -> bool {
        self.transitions[from as usize][to as usize]
    }

    /// True when some power `A^p` with `p <= m^2` is entrywise positive.
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn is_full(&self) -> bool {
        self.transitions.iter().all(|row| row.iter().all(|&b| b))
    }

    pub fn transition_rows(&self) -> Vec<Vec<u8>> {
        self.transitions
            .iter()
            .map(|row| row.iter().map(|&b| b as u8).collect())
            .collect()
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        let s = w.symbols();
        for (i, &sym) in s.iter().enumerate() {
            if sym as usize >= self.alphabet || (i > 0 && !self.allows(s[i - 1], sym)) {
                return Err(Error::Inadmissible {
                    word: w.to_string(),
                    position: i,
                });
            }
        }
        Ok(())
    }

    pub fn is_admissible(&self, w: &Word) -> bool {
        self.check_word(w).is_ok()
    }

    /// Symbols that may follow `last` (every symbol after the empty word).
    pub fn successors(&self, last: Option<u8>) -> impl Iterator<Item = u8> + '_ {
        (0..self.alphabet as u16)
            .map(|s| s as u8)
            .filter(move |&s| last.map_or(true, |l| self.allows(l, s)))
    }

    /// Admissible one-symbol extensions of `w`, in symbol order.
    pub fn children(&self, w: &Word) -> Vec<Word> {
        self.successors(w.last()).map(|s| w.child(s)).collect()
    }

    /// All admissible words of length `n` in lexicographic order.
    pub fn words_of_length(&self, n: usize) -> Vec<Word> {
        let mut level = vec![Word::empty()];
        for _ in 0..n {
            level = level.iter().flat_map(|w| self.children(w)).collect();
        }
        level
    }

    /// Number of admissible words of length `n` (saturating).
    pub fn count_words(&self, n: usize) -> u128 {
        let m = self.alphabet;
        let mut counts = vec![1u128; m];
        if n == 0 {
            return 1;
        }
        for _ in 1..n {
            let mut next = vec![0u128; m];
            for (from, &c) in counts.iter().enumerate() {
                for (to, slot) in next.iter_mut().enumerate() {
                    if self.transitions[from][to] {
                        *slot = slot.saturating_add(c);
                    }
                }
            }
            counts = next;
        }
        counts.iter().fold(0u128, |a, &c| a.saturating_add(c))
    }
}

fn has_positive_power(matrix: &[Vec<bool>]) -> bool {
    let m = matrix.len();
    // Wielandt: a primitive matrix has A^p > 0 for p = (m-1)^2 + 1.
    let bound = (m - 1) * (m - 1) + 1;
    let mut power = matrix.to_vec();
    let mut exponent = 1usize;
    loop {
        if power.iter().all(|row| row.iter().all(|&b| b)) {
            return true;
        }
        if exponent >= bound {
            return false;
        }
        power = bool_product(&power, &power);
        exponent *= 2;
    }
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let m = a.len();
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (0..m).any(|l| a[i][l] && b[l][j]))
                .collect()
        })
        .collect()
}

/// The word whose cylinder is `B^n_eps(x)` for `eps = 2^-k`: the length-`n + k`
/// prefix of `x`.
pub fn bowen_cylinder(x: &Word, n: usize, k: DepthOffset) -> Result<Word> {
    let required = n + k.get();
    if x.len() < required {
        return Err(Error::WordTooShort {
            len: x.len(),
            required,
        });
    }
    Ok(x.prefix(required))
}

/// A clopen set given as a finite antichain of cylinders, kept in canonical
/// form: the members are exactly the maximal cylinders contained in the set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CylinderSet {
    members: BTreeSet<Word>,
}

impl CylinderSet {
    /// Builds a set from an antichain of admissible words. Overlapping members
    /// are rejected; use [`CylinderSet::union`] to merge overlapping pieces.
    pub fn new<I>(space: &ShiftSpace, members: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        let words: BTreeSet<Word> = members.into_iter().collect();
        for w in &words {
            space.check_word(w)?;
        }
        // In lexicographic order a prefix sorts immediately before the block
        // of its extensions, so checking neighbours suffices.
        let sorted: Vec<&Word> = words.iter().collect();
        for pair in sorted.windows(2) {
            if pair[0].is_prefix_of(pair[1]) {
                return Err(Error::NotAntichain(pair[0].to_string(), pair[1].to_string()));
            }
        }
        Ok(Self::canonical(space, words))
    }

    /// The whole space.
    pub fn full() -> Self {
        CylinderSet {
            members: BTreeSet::from([Word::empty()]),
        }
    }

    pub fn empty() -> Self {
        CylinderSet::default()
    }

    /// Union of arbitrary admissible words; members covered by shorter ones
    /// are dropped.
    pub fn union<I>(space: &ShiftSpace, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = Word>,
    {
        let words: BTreeSet<Word> = words.into_iter().collect();
        for w in &words {
            space.check_word(w)?;
        }
        let mut kept = BTreeSet::new();
        let mut last: Option<Word> = None;
        for w in words {
            if let Some(prev) = &last {
                if prev.is_prefix_of(&w) {
                    continue;
                }
            }
            last = Some(w.clone());
            kept.insert(w);
        }
        Ok(Self::canonical(space, kept))
    }

    pub fn union_with(&self, space: &ShiftSpace, other: &CylinderSet) -> Self {
        Self::union(space, self.members.iter().chain(other.members.iter()).cloned())
            .expect("members of valid sets are admissible")
    }

    fn canonical(space: &ShiftSpace, mut members: BTreeSet<Word>) -> Self {
        loop {
            let mut by_parent: BTreeMap<Word, usize> = BTreeMap::new();
            for w in &members {
                if let Some(p) = w.parent() {
                    *by_parent.entry(p).or_default() += 1;
                }
            }
            let full_parents: Vec<Word> = by_parent
                .into_iter()
                .filter(|(p, count)| *count == space.children(p).len())
                .map(|(p, _)| p)
                .collect();
            if full_parents.is_empty() {
                break;
            }
            for p in full_parents {
                for c in space.children(&p) {
                    members.remove(&c);
                }
                members.insert(p);
            }
        }
        CylinderSet { members }
    }

    pub fn members(&self) -> impl Iterator<Item = &Word> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.members.iter().map(Word::len).max().unwrap_or(0)
    }

    /// `[w]` is contained in the set.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.members.iter().any(|m| m.is_prefix_of(w))
    }

    /// `[w]` contains a point of the set.
    pub fn intersects(&self, w: &Word) -> bool {
        self.members.iter().any(|m| m.comparable(w))
    }

    /// `K ∩ [w]`.
    pub fn restrict(&self, w: &Word) -> CylinderSet {
        if self.contains_cylinder(w) {
            return CylinderSet {
                members: BTreeSet::from([w.clone()]),
            };
        }
        CylinderSet {
            members: self
                .members
                .iter()
                .filter(|m| w.is_prefix_of(m))
                .cloned()
                .collect(),
        }
    }

    /// Set inclusion, decided on the cylinder tree.
    pub fn is_subset_of(&self, other: &CylinderSet) -> bool {
        self.members.iter().all(|m| other.contains_cylinder(m))
    }
}

/// Hausdorff distance between two cylinder sets under the dyadic metric,
/// computed exactly on the cylinder tree. One empty argument gives 1, two
/// give 0.
pub fn hausdorff_distance(space: &ShiftSpace, a: &CylinderSet, b: &CylinderSet) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => {
            let root = Word::empty();
            directed(space, a, b, &root).max(directed(space, b, a, &root))
        }
    }
}

/// `sup_{x in A ∩ [w]} dist(x, B)` given that both sets meet `[w]`.
fn directed(space: &ShiftSpace, a: &CylinderSet, b: &CylinderSet, w: &Word) -> f64 {
    if b.contains_cylinder(w) {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for c in space.children(w) {
        if !a.intersects(&c) {
            continue;
        }
        let d = if b.intersects(&c) {
            directed(space, a, b, &c)
        } else {
            // First disagreement with every point of B happens at index |w|.
            (-(w.len() as f64)).exp2()
        };
        worst = worst.max(d);
    }
    worst
}
