//! Three-neighborhood cellular automaton rules and fuzzy state evolution.
//!
//! Neighborhoods are read as the 3-bit number `(left << 2) | (self << 1) | right`,
//! so Wolfram rule `n` outputs bit `p` of `n` for neighborhood `p`. The MACA rule
//! set is the 16 OR-forms over a subset of `{left, self, right}`, optionally
//! complemented. Fuzzy evaluation uses bounded-sum OR `min(1, a + b)` and
//! complement `1 - a`; cells beyond the grid read as 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truth table of an arbitrary elementary rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleTable {
    outputs: [bool; 8],
}

impl RuleTable {
    pub fn from_number(n: u32) -> Result<Self> {
        if n > 255 {
            return Err(Error::RuleOutOfRange(n));
        }
        let mut outputs = [false; 8];
        for (p, out) in outputs.iter_mut().enumerate() {
            *out = (n >> p) & 1 == 1;
        }
        Ok(RuleTable { outputs })
    }

    pub fn from_outputs(outputs: [bool; 8]) -> Self {
        RuleTable { outputs }
    }

    pub fn number(&self) -> u8 {
        self.outputs
            .iter()
            .enumerate()
            .fold(0u8, |acc, (p, &b)| acc | ((b as u8) << p))
    }

    /// Output for neighborhood pattern `p` in `0..8`.
    pub fn output(&self, p: usize) -> bool {
        self.outputs[p]
    }

    pub fn apply(&self, l: bool, s: bool, r: bool) -> bool {
        self.outputs[neighborhood(l, s, r)]
    }

    /// Outputs listed in column order 111, 110, ..., 000.
    pub fn outputs_descending(&self) -> [u8; 8] {
        let mut out = [0u8; 8];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.outputs[7 - i] as u8;
        }
        out
    }
}

/// Decode a Wolfram rule number into its truth table.
pub fn rule_from_number(n: u32) -> Result<RuleTable> {
    RuleTable::from_number(n)
}

#[inline]
fn neighborhood(l: bool, s: bool, r: bool) -> usize {
    ((l as usize) << 2) | ((s as usize) << 1) | (r as usize)
}

/// Subset of the neighborhood a MACA cell ORs together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NeighborMask(u8);

impl NeighborMask {
    pub const LEFT: u8 = 0b100;
    pub const SELF: u8 = 0b010;
    pub const RIGHT: u8 = 0b001;

    pub fn new(bits: u8) -> Self {
        NeighborMask(bits & 0b111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn left(self) -> bool {
        self.0 & Self::LEFT != 0
    }

    pub fn center(self) -> bool {
        self.0 & Self::SELF != 0
    }

    pub fn right(self) -> bool {
        self.0 & Self::RIGHT != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// One of the 16 MACA rules: OR of the masked neighbors, optionally complemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacaRule {
    mask: NeighborMask,
    complemented: bool,
}

impl MacaRule {
    pub const fn count() -> usize {
        16
    }

    pub fn new(mask: NeighborMask, complemented: bool) -> Self {
        MacaRule { mask, complemented }
    }

    /// All 16 rules, ordered by (complemented, mask bits).
    pub fn all() -> [MacaRule; 16] {
        let mut rules = [MacaRule::new(NeighborMask(0), false); 16];
        for (i, slot) in rules.iter_mut().enumerate() {
            *slot = MacaRule::from_index(i);
        }
        rules
    }

    /// Dense index in `0..16`, stable across releases.
    pub fn index(self) -> usize {
        ((self.complemented as usize) << 3) | self.mask.bits() as usize
    }

    pub fn from_index(i: usize) -> Self {
        MacaRule {
            mask: NeighborMask::new((i & 0b111) as u8),
            complemented: i & 0b1000 != 0,
        }
    }

    pub fn mask(self) -> NeighborMask {
        self.mask
    }

    pub fn is_complemented(self) -> bool {
        self.complemented
    }

    /// Wolfram number of this rule.
    pub fn number(self) -> u8 {
        let mut n = 0u8;
        for p in 0..8u8 {
            let or = p & self.mask.bits() != 0;
            if or != self.complemented {
                n |= 1 << p;
            }
        }
        n
    }

    pub fn from_number(n: u8) -> Result<Self> {
        MacaRule::all()
            .into_iter()
            .find(|r| r.number() == n)
            .ok_or(Error::NotMacaRule(n))
    }

    pub fn table(self) -> RuleTable {
        RuleTable::from_number(self.number() as u32).expect("u8 is in range")
    }

    pub fn eval_boolean(self, l: bool, s: bool, r: bool) -> bool {
        let or = (self.mask.left() && l) || (self.mask.center() && s) || (self.mask.right() && r);
        or != self.complemented
    }

    #[inline]
    pub fn eval_fuzzy(self, l: f64, s: f64, r: f64) -> f64 {
        let mut v = 0.0;
        if self.mask.left() {
            v += l;
        }
        if self.mask.center() {
            v += s;
        }
        if self.mask.right() {
            v += r;
        }
        let v = v.clamp(0.0, 1.0);
        if self.complemented {
            1.0 - v
        } else {
            v
        }
    }
}

impl fmt::Display for MacaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for MacaRule {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

impl<'de> Deserialize<'de> for MacaRule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let n = u8::deserialize(deserializer)?;
        MacaRule::from_number(n).map_err(serde::de::Error::custom)
    }
}

pub fn maca_rule_number(r: MacaRule) -> u8 {
    r.number()
}

pub fn eval_boolean(r: MacaRule, l: bool, s: bool, right: bool) -> bool {
    r.eval_boolean(l, s, right)
}

pub fn eval_fuzzy(r: MacaRule, l: f64, s: f64, right: f64) -> f64 {
    r.eval_fuzzy(l, s, right)
}

/// Per-cell rule assignment; the genome of a classifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<MacaRule>", into = "Vec<MacaRule>")]
pub struct RuleVector {
    rules: Vec<MacaRule>,
}

impl RuleVector {
    pub fn new(rules: Vec<MacaRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Empty("rule vector"));
        }
        Ok(RuleVector { rules })
    }

    pub fn uniform(rule: MacaRule, n: usize) -> Result<Self> {
        RuleVector::new(vec![rule; n])
    }

    pub fn from_numbers(numbers: &[u8]) -> Result<Self> {
        let rules = numbers
            .iter()
            .map(|&n| MacaRule::from_number(n))
            .collect::<Result<Vec<_>>>()?;
        RuleVector::new(rules)
    }

    pub fn numbers(&self) -> Vec<u8> {
        self.rules.iter().map(|r| r.number()).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> &[MacaRule] {
        &self.rules
    }

    pub fn rules_mut(&mut self) -> &mut [MacaRule] {
        &mut self.rules
    }

    pub fn iter(&self) -> impl Iterator<Item = &MacaRule> {
        self.rules.iter()
    }

    /// True when every cell uses a non-complemented rule.
    pub fn is_monotone(&self) -> bool {
        self.rules.iter().all(|r| !r.is_complemented())
    }
}

impl TryFrom<Vec<MacaRule>> for RuleVector {
    type Error = Error;

    fn try_from(rules: Vec<MacaRule>) -> Result<Self> {
        RuleVector::new(rules)
    }
}

impl From<RuleVector> for Vec<MacaRule> {
    fn from(rv: RuleVector) -> Self {
        rv.rules
    }
}

/// Fuzzy CA configuration; every cell lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyState {
    cells: Vec<f64>,
}

impl FuzzyState {
    pub fn new(cells: Vec<f64>) -> Result<Self> {
        for (index, &value) in cells.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::CellOutOfRange { index, value });
            }
        }
        Ok(FuzzyState { cells })
    }

    /// Builds a state, clamping each value into `[0, 1]` (NaN maps to 0).
    pub fn clamped(cells: Vec<f64>) -> Self {
        let cells = cells
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        FuzzyState { cells }
    }

    pub fn zeros(n: usize) -> Self {
        FuzzyState { cells: vec![0.0; n] }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        FuzzyState {
            cells: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }
}

/// One synchronous update with null boundary.
pub fn step(rv: &RuleVector, st: &FuzzyState) -> Result<FuzzyState> {
    if rv.len() != st.len() {
        return Err(Error::LengthMismatch {
            expected: rv.len(),
            actual: st.len(),
        });
    }
    let mut next = vec![0.0; st.len()];
    step_into(rv.rules(), &st.cells, &mut next);
    Ok(FuzzyState { cells: next })
}

/// Allocation-free update; slices must share one length.
#[inline]
pub(crate) fn step_into(rules: &[MacaRule], cur: &[f64], next: &mut [f64]) {
    let n = cur.len();
    for i in 0..n {
        let l = if i > 0 { cur[i - 1] } else { 0.0 };
        let r = if i + 1 < n { cur[i + 1] } else { 0.0 };
        next[i] = rules[i].eval_fuzzy(l, cur[i], r);
    }
}

/// Crisp update on a bit-packed state (cell `i` is bit `i`), null boundary.
pub fn step_bits(rules: &[MacaRule], state: u32) -> u32 {
    let n = rules.len();
    let mut next = 0u32;
    for (i, rule) in rules.iter().enumerate() {
        let l = i > 0 && (state >> (i - 1)) & 1 == 1;
        let s = (state >> i) & 1 == 1;
        let r = i + 1 < n && (state >> (i + 1)) & 1 == 1;
        if rule.eval_boolean(l, s, r) {
            next |= 1 << i;
        }
    }
    next
}
