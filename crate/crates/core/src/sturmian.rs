//! Sturmian exponents, cutting sequences and syzygy-word combinatorics.
//!
//! A line `y = m x + b` on the unit torus crosses vertical circles (symbol `V`,
//! or a syzygy label 1/2) and horizontal circles (`H`, or label 3). Between the
//! vertical crossings at `x = k − 1` and `x = k` it crosses exactly
//! `n_k = ⌊m + {y_{k−1}}⌋` horizontals, which is either `⌊m⌋` or `⌊m⌋ + 1`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Distance below which a crossing is treated as hitting a lattice point or a
/// window intersection.
pub const LATTICE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    One,
    Two,
    Three,
    H,
    V,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::One => '1',
            Symbol::Two => '2',
            Symbol::Three => '3',
            Symbol::H => 'H',
            Symbol::V => 'V',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '1' => Symbol::One,
            '2' => Symbol::Two,
            '3' => Symbol::Three,
            'H' => Symbol::H,
            'V' => Symbol::V,
            _ => return None,
        })
    }

    /// Swap 1 and 2, leave everything else alone.
    pub fn relabel(self) -> Self {
        match self {
            Symbol::One => Symbol::Two,
            Symbol::Two => Symbol::One,
            s => s,
        }
    }

    fn is_vertical(self) -> bool {
        matches!(self, Symbol::One | Symbol::Two | Symbol::V)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A finite word, optionally read cyclically. Cyclic words compare equal when
/// they are rotations of one another.
#[derive(Debug, Clone)]
pub struct SymbolWord {
    symbols: Vec<Symbol>,
    cyclic: bool,
}

impl SymbolWord {
    pub fn new(symbols: Vec<Symbol>, cyclic: bool) -> Self {
        Self { symbols, cyclic }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), false)
    }

    pub fn parse(s: &str, cyclic: bool) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| {
                Symbol::from_char(c)
                    .ok_or_else(|| Error::InvalidParams(format!("bad symbol {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(symbols, cyclic))
    }

    /// Shorthand for a cyclic word from a string literal known to be valid.
    pub fn cyclic(s: &str) -> Self {
        Self::parse(s, true).expect("valid word literal")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn count(&self, s: Symbol) -> usize {
        self.symbols.iter().filter(|&&x| x == s).count()
    }

    pub fn as_cyclic(&self) -> Self {
        Self::new(self.symbols.clone(), true)
    }

    pub fn relabeled(&self) -> Self {
        Self::new(
            self.symbols.iter().map(|s| s.relabel()).collect(),
            self.cyclic,
        )
    }

    pub fn repeat(&self, n: usize) -> Self {
        Self::new(self.symbols.repeat(n), self.cyclic)
    }

    /// Lexicographically least rotation for cyclic words, the word itself
    /// otherwise.
    pub fn canonical(&self) -> Vec<Symbol> {
        if !self.cyclic || self.symbols.is_empty() {
            return self.symbols.clone();
        }
        let n = self.symbols.len();
        let at = |i: usize| self.symbols[i % n];
        let mut best = 0;
        for start in 1..n {
            for k in 0..n {
                let (a, b) = (at(start + k), at(best + k));
                if a != b {
                    if a < b {
                        best = start;
                    }
                    break;
                }
            }
        }
        (0..n).map(|k| at(best + k)).collect()
    }

    /// Canonical form modulo the 1↔2 relabelling.
    pub fn canonical_up_to_relabel(&self) -> Vec<Symbol> {
        let a = self.canonical();
        let b = self.relabeled().canonical();
        a.min(b)
    }

    /// Cyclic equality that also accepts swapping 1 and 2.
    pub fn eq_up_to_relabel(&self, other: &Self) -> bool {
        self == other || *self == other.relabeled()
    }
}

impl PartialEq for SymbolWord {
    fn eq(&self, other: &Self) -> bool {
        self.cyclic == other.cyclic
            && self.len() == other.len()
            && self.canonical() == other.canonical()
    }
}

impl Eq for SymbolWord {}

impl std::hash::Hash for SymbolWord {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.cyclic.hash(state);
        self.canonical().hash(state);
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A positive rational `p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational {
    p: u64,
    q: u64,
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    /// Reduces `p/q`; both must be positive.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidParams(format!(
                "rational {p}/{q} must have p, q >= 1"
            )));
        }
        let d = gcd(p, q);
        Ok(Self { p: p / d, q: q / d })
    }

    pub fn p(self) -> u64 {
        self.p
    }

    pub fn q(self) -> u64 {
        self.q
    }

    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn floor(self) -> u64 {
        self.p / self.q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("cannot parse rational {s:?}"));
        let (p, q) = match s.trim().split_once('/') {
            Some((p, q)) => (
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Rational::new(p, q)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The line `y = m x + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeIntercept {
    pub m: f64,
    pub b: f64,
    pub rational_form: Option<Rational>,
}

impl SlopeIntercept {
    pub fn new(m: f64, b: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParams(format!("slope {m} must be positive")));
        }
        if !(0.0..1.0).contains(&b) {
            return Err(Error::InvalidParams(format!(
                "intercept {b} must lie in [0, 1)"
            )));
        }
        Ok(Self {
            m,
            b,
            rational_form: None,
        })
    }

    pub fn rational(r: Rational, b: f64) -> Result<Self> {
        let mut si = Self::new(r.value(), b)?;
        si.rational_form = Some(r);
        Ok(si)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Grid {
    /// One vertical and one horizontal circle per unit.
    Unit,
    /// Two of each, half a unit apart.
    Half,
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unit" => Ok(Grid::Unit),
            "half" => Ok(Grid::Half),
            _ => Err(Error::InvalidParams(format!("unknown grid {s:?}"))),
        }
    }
}

/// Horizontal-crossing counts between consecutive vertical crossings.
///
/// For a rational slope `p/q`, a sequence of length `q` is one period on the
/// unit grid and a sequence of length `2q` one period on the half grid; both are
/// flagged `periodic`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSequence {
    pub values: Vec<u64>,
    pub slope: f64,
    pub periodic: bool,
    pub grid: Grid,
}

impl fmt::Display for ExponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Marked phases on the flattened torus: vertical circles `x = φ` and
/// horizontal circles `y = ψ`, each carrying the symbol emitted on crossing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowPhases {
    pub vertical: Vec<(f64, Symbol)>,
    pub horizontal: Vec<(f64, Symbol)>,
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl WindowPhases {
    pub fn new(vertical: Vec<(f64, Symbol)>, horizontal: Vec<(f64, Symbol)>) -> Result<Self> {
        for list in [&vertical, &horizontal] {
            if list.len() > 2 {
                return Err(Error::InvalidParams(
                    "at most two windows per direction".into(),
                ));
            }
            for (phase, _) in list.iter() {
                if !(0.0..1.0).contains(phase) {
                    return Err(Error::InvalidParams(format!(
                        "window phase {phase} outside [0, 1)"
                    )));
                }
            }
            if list.len() == 2 && list[0].0 == list[1].0 {
                return Err(Error::InvalidParams(
                    "window phases must be distinct".into(),
                ));
            }
        }
        Ok(Self {
            vertical,
            horizontal,
        })
    }

    /// Uniform half-spaced windows: verticals at 0 and ½, horizontals at ¼ and ¾.
    pub fn half_spaced(v: [Symbol; 2], h: Option<Symbol>) -> Self {
        let horizontal = match h {
            Some(s) => vec![(0.25, s), (0.75, s)],
            None => Vec::new(),
        };
        Self {
            vertical: vec![(0.0, v[0]), (0.5, v[1])],
            horizontal,
        }
    }

    fn separation(list: &[(f64, Symbol)]) -> Option<f64> {
        match list {
            [a, b] => {
                let d = (a.0 - b.0).rem_euclid(1.0);
                Some(d.min(1.0 - d))
            }
            _ => None,
        }
    }

    /// Circular distance between the two vertical phases.
    pub fn vertical_separation(&self) -> Option<f64> {
        Self::separation(&self.vertical)
    }

    pub fn horizontal_separation(&self) -> Option<f64> {
        Self::separation(&self.horizontal)
    }
}

/// `n_k = ⌊m + {y_{k−1}}⌋` for `k = 1..=count`.
///
/// Rational slopes are handled in exact integer arithmetic on multiples of
/// `1/q`; only the intercept is a float.
pub fn sturmian_exponents(si: &SlopeIntercept, count: usize) -> Result<ExponentSequence> {
    let check = |k: usize, frac: f64| {
        if !(LATTICE_TOL..=1.0 - LATTICE_TOL).contains(&frac) {
            Err(Error::LatticeHit { index: k, frac })
        } else {
            Ok(())
        }
    };
    let mut floors = Vec::with_capacity(count + 1);
    match si.rational_form {
        Some(r) => {
            let (p, q) = (r.p() as u128, r.q() as u128);
            for k in 0..=count {
                let kp = k as u128 * p;
                let rem = (kp % q) as f64 / q as f64;
                let sum = si.b + rem;
                let carry = sum >= 1.0;
                let frac = if carry { sum - 1.0 } else { sum };
                check(k, frac)?;
                floors.push((kp / q) as i128 + carry as i128);
            }
        }
        None => {
            for k in 0..=count {
                let y = si.b + k as f64 * si.m;
                check(k, y - y.floor())?;
                floors.push(y.floor() as i128);
            }
        }
    }
    let values = floors.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    let (periodic, grid) = match si.rational_form {
        Some(r) if count as u64 == r.q() => (true, Grid::Unit),
        Some(r) if count as u64 == 2 * r.q() => (true, Grid::Half),
        _ => (false, Grid::Unit),
    };
    Ok(ExponentSequence {
        values,
        slope: si.m,
        periodic,
        grid,
    })
}

/// Interleave vertical labels with runs of `h_label`: `v₀ h^{n₁} v₁ h^{n₂} …`.
/// The vertical labels are used cyclically.
pub fn word_from_exponents(
    e: &ExponentSequence,
    v_labels: &[Symbol],
    h_label: Symbol,
) -> SymbolWord {
    assert!(!v_labels.is_empty(), "need at least one vertical label");
    let mut symbols = Vec::new();
    for (i, &n) in e.values.iter().enumerate() {
        symbols.push(v_labels[i % v_labels.len()]);
        symbols.extend(std::iter::repeat_n(h_label, n as usize));
    }
    SymbolWord::new(symbols, e.periodic)
}

/// The cyclic V/H word of any lattice-avoiding line of slope `r`.
pub fn canonical_rational_word(r: Rational, grid: Grid) -> SymbolWord {
    let si = SlopeIntercept::rational(r, 0.5 / r.q() as f64).expect("positive slope");
    let count = match grid {
        Grid::Unit => r.q(),
        Grid::Half => 2 * r.q(),
    } as usize;
    let e = sturmian_exponents(&si, count).expect("b = 1/(2q) avoids the lattice");
    word_from_exponents(&e, &[Symbol::V], Symbol::H)
}

/// First `count` window crossings of `y = m x + b`, for `x ≥ 0`, in order.
pub fn cutting_sequence(w: &WindowPhases, m: f64, b: f64, count: usize) -> Result<SymbolWord> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParams(format!("slope {m} must be positive")));
    }
    if w.vertical.is_empty() && w.horizontal.is_empty() {
        return Err(Error::InvalidParams("no windows to cross".into()));
    }
    let rate = w.vertical.len() as f64 + w.horizontal.len() as f64 * m;
    let mut x_max = count as f64 / rate + 1.0;
    let events = loop {
        let mut events: Vec<(f64, Symbol, bool)> = Vec::new();
        for &(phi, s) in &w.vertical {
            let mut j = 0.0;
            while j + phi <= x_max {
                events.push((j + phi, s, true));
                j += 1.0;
            }
        }
        for &(psi, s) in &w.horizontal {
            let mut j = (b - psi).ceil();
            loop {
                let x = (psi + j - b) / m;
                if x > x_max {
                    break;
                }
                if x >= 0.0 {
                    events.push((x, s, false));
                }
                j += 1.0;
            }
        }
        if events.len() > count {
            events.sort_by(|a, b| a.0.total_cmp(&b.0));
            break events;
        }
        x_max *= 2.0;
    };
    for pair in events[..=count].windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.2 != b.2 && (b.0 - a.0).abs() <= LATTICE_TOL * a.0.abs().max(1.0) {
            return Err(Error::PhaseHit { x: a.0 });
        }
    }
    Ok(SymbolWord::new(
        events[..count].iter().map(|e| e.1).collect(),
        false,
    ))
}

/// Torus families that carry syzygy words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Lemniscate: vertical labels alternate 1, 2.
    L,
    /// Satellite around one center: every vertical label is the given symbol.
    S(Symbol),
    /// Planetary: no horizontal windows.
    P,
}

/// The periodic syzygy word of rotation number `r` for a torus family with
/// half-spaced windows.
pub fn family_word(family: Family, r: Rational) -> SymbolWord {
    let labels: Vec<Symbol> = match family {
        Family::L | Family::P => vec![Symbol::One, Symbol::Two],
        Family::S(s) => vec![s],
    };
    if family == Family::P {
        return SymbolWord::new(labels.repeat(r.q() as usize), true);
    }
    let si = SlopeIntercept::rational(r, 0.5 / r.q() as f64).expect("positive slope");
    let e = sturmian_exponents(&si, 2 * r.q() as usize).expect("b = 1/(2q) avoids the lattice");
    word_from_exponents(&e, &labels, Symbol::Three)
}

/// Coprime pairs `(p, q)` with `p + q ≤ n`.
fn coprime_pairs(n: u64) -> Vec<Rational> {
    let mut out = Vec::new();
    for s in 2..=n {
        for p in 1..s {
            let q = s - p;
            if gcd(p, q) == 1 {
                out.push(Rational::new(p, q).expect("positive"));
            }
        }
    }
    out
}

/// All distinct cyclic syzygy words of length at most `max_len`: L words and
/// both S families for coprime `p/q` with `2(p + q) ≤ max_len`, and P words
/// `(12)^q` with `2q ≤ max_len`. Sorted by length, then lexicographically.
pub fn enumerate_syzygy_words(max_len: usize) -> Vec<SymbolWord> {
    let mut seen = BTreeSet::new();
    for r in coprime_pairs(max_len as u64 / 2) {
        for fam in [Family::L, Family::S(Symbol::One), Family::S(Symbol::Two)] {
            seen.insert((
                2 * (r.p() + r.q()) as usize,
                family_word(fam, r).canonical(),
            ));
        }
    }
    for q in 1..=(max_len as u64 / 2) {
        let r = Rational::new(1, q).expect("positive");
        seen.insert((2 * q as usize, family_word(Family::P, r).canonical()));
    }
    seen.into_iter()
        .map(|(_, s)| SymbolWord::new(s, true))
        .collect()
}

/// Number of syzygy orbit classes up to length `max_len`: words are identified
/// under 1↔2 relabelling, and all P words count once since they differ only in
/// how often the period is traversed. Bounded by `max_len²/4 + 1`.
pub fn orbit_count(max_len: usize) -> usize {
    let mut classes = BTreeSet::new();
    let mut planetary = false;
    for w in enumerate_syzygy_words(max_len) {
        if w.count(Symbol::Three) == 0 {
            planetary = true;
        } else {
            classes.insert(w.canonical_up_to_relabel());
        }
    }
    let n = classes.len() + planetary as usize;
    assert!(
        n <= max_len * max_len / 4 + 1,
        "orbit count {n} exceeds quadratic bound at length {max_len}"
    );
    n
}

/// Run statistics of a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceReport {
    /// The symbol whose runs are measured: `3` for syzygy words, `H` for V/H words.
    pub run_symbol: Symbol,
    /// Number of run symbols between consecutive other symbols, zeros included.
    pub runs: Vec<usize>,
    pub min_run: Option<usize>,
    pub max_run: Option<usize>,
    /// All runs have length `n` or `n + 1` for some `n`.
    pub balanced: bool,
    /// Some 1 sits next to a 2.
    pub adjacent_12: bool,
    /// Some 1 sits next to a 1, or 2 next to 2.
    pub stutter: bool,
}

pub fn is_balanced(word: &SymbolWord) -> BalanceReport {
    let syms = word.symbols();
    let run_symbol = if syms.iter().any(|s| matches!(s, Symbol::H | Symbol::V)) {
        Symbol::H
    } else {
        Symbol::Three
    };
    let n = syms.len();
    let verticals: Vec<usize> = (0..n).filter(|&i| syms[i].is_vertical()).collect();
    let mut runs = Vec::new();
    for pair in verticals.windows(2) {
        runs.push(pair[1] - pair[0] - 1);
    }
    if word.is_cyclic() && !verticals.is_empty() {
        let (first, last) = (verticals[0], *verticals.last().expect("nonempty"));
        runs.push(n - 1 - last + first);
    }
    let min_run = runs.iter().copied().min();
    let max_run = runs.iter().copied().max();
    let balanced = match (min_run, max_run) {
        (Some(a), Some(b)) => b - a <= 1,
        _ => true,
    };
    let pairs: Vec<(Symbol, Symbol)> = {
        let mut v: Vec<_> = syms.windows(2).map(|w| (w[0], w[1])).collect();
        if word.is_cyclic() && n >= 2 {
            v.push((syms[n - 1], syms[0]));
        }
        v
    };
    let adjacent_12 = pairs.iter().any(|&(a, b)| {
        matches!(
            (a, b),
            (Symbol::One, Symbol::Two) | (Symbol::Two, Symbol::One)
        )
    });
    let stutter = pairs.iter().any(|&(a, b)| {
        matches!(
            (a, b),
            (Symbol::One, Symbol::One) | (Symbol::Two, Symbol::Two)
        )
    });
    BalanceReport {
        run_symbol,
        runs,
        min_run,
        max_run,
        balanced,
        adjacent_12,
        stutter,
    }
}
