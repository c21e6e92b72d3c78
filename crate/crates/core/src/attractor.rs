//! Attractors, basins and basin-membership classification.
//!
//! Fuzzy trajectories are tracked on a quantization grid: a trajectory ends at
//! a fixed point once successive states are within `eps` in max-norm, or at a
//! cycle once a quantized state repeats. The cycle, rotated to start at its
//! lexicographically smallest state, is the attractor's identity.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::ca::{step_bits, step_into, FuzzyState, MacaRule, NeighborMask, RuleVector};
use crate::error::{Error, Result};

pub type ClassId = usize;

/// Trajectory parameters shared by training and prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Dynamics {
    /// Step budget; `None` means `max(4 * cells, 64)`.
    pub max_steps: Option<usize>,
    pub eps: f64,
    /// Grid spacing used to identify states.
    pub quant: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics {
            max_steps: None,
            eps: 1e-9,
            quant: 1.0 / 256.0,
        }
    }
}

impl Dynamics {
    pub fn step_budget(&self, cells: usize) -> usize {
        self.max_steps.unwrap_or_else(|| (4 * cells).max(64))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(0) = self.max_steps {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::InvalidParameter("eps must be > 0".into()));
        }
        if !(self.quant >= 1e-9 && self.quant <= 1.0) {
            return Err(Error::InvalidParameter("quant must lie in [1e-9, 1]".into()));
        }
        Ok(())
    }

    #[inline]
    fn quantize(&self, cells: &[f64]) -> Vec<u32> {
        cells.iter().map(|&v| (v / self.quant).round() as u32).collect()
    }
}

/// Canonical quantized attractor cycle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttractorSignature {
    cycle: Vec<Vec<u32>>,
}

impl AttractorSignature {
    /// Rotates `cycle` so it begins at its smallest state.
    pub fn from_cycle(mut cycle: Vec<Vec<u32>>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Empty("attractor cycle"));
        }
        let start = cycle
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        cycle.rotate_left(start);
        Ok(AttractorSignature { cycle })
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.cycle
    }

    pub fn cycle_len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_fixed_point(&self) -> bool {
        self.cycle.len() == 1
    }

    /// Dequantizes the cycle states back onto `[0, 1]`.
    pub fn to_states(&self, quant: f64) -> Vec<FuzzyState> {
        self.cycle
            .iter()
            .map(|s| FuzzyState::clamped(s.iter().map(|&q| q as f64 * quant).collect()))
            .collect()
    }

    pub(crate) fn validate(&self, cells: usize, quant: f64) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::ModelInvariant("empty attractor signature".into()));
        }
        let top = (1.0 / quant).round() as u32;
        for state in &self.cycle {
            if state.len() != cells {
                return Err(Error::ModelInvariant(format!(
                    "signature state has {} cells, rule vector has {cells}",
                    state.len()
                )));
            }
            if state.iter().any(|&q| q > top) {
                return Err(Error::ModelInvariant("signature value above grid maximum".into()));
            }
        }
        if let Some(i) = (1..self.cycle.len()).find(|&i| self.cycle[i] < self.cycle[0]) {
            return Err(Error::ModelInvariant(format!("signature not canonical at state {i}")));
        }
        Ok(())
    }
}

/// Runs `s0` to its attractor.
pub fn evolve(rv: &RuleVector, s0: &FuzzyState, dynamics: &Dynamics) -> Result<AttractorSignature> {
    if rv.len() != s0.len() {
        return Err(Error::LengthMismatch {
            expected: rv.len(),
            actual: s0.len(),
        });
    }
    let budget = dynamics.step_budget(rv.len());
    let rules = rv.rules();
    let mut cur = s0.cells().to_vec();
    let mut next = vec![0.0; cur.len()];

    let first = dynamics.quantize(&cur);
    let mut history = vec![first.clone()];
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    seen.insert(first, 0);

    for t in 1..=budget {
        step_into(rules, &cur, &mut next);
        let delta = cur.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if delta < dynamics.eps {
            return AttractorSignature::from_cycle(vec![dynamics.quantize(&next)]);
        }
        let q = dynamics.quantize(&next);
        if let Some(&j) = seen.get(&q) {
            history.truncate(t);
            return AttractorSignature::from_cycle(history.split_off(j));
        }
        seen.insert(q.clone(), t);
        history.push(q);
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::NonConvergence(budget))
}

/// Largest cell count accepted by [`enumerate_state_graph`].
pub const MAX_ENUMERATION_CELLS: usize = 20;

/// Full functional graph of the crisp automaton over `{0,1}^n`.
///
/// States are bit-packed: cell `i` is bit `i`.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub cells: usize,
    pub successor: Vec<u32>,
    /// Attractor cycles in discovery order, each listed in trajectory order.
    pub attractors: Vec<Vec<u32>>,
    /// Index into `attractors` for every state.
    pub basin_of: Vec<usize>,
}

impl StateGraph {
    pub fn basins(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.attractors.len()];
        for (s, &b) in self.basin_of.iter().enumerate() {
            out[b].push(s as u32);
        }
        out
    }
}

pub fn enumerate_state_graph(rv: &RuleVector) -> Result<StateGraph> {
    let n = rv.len();
    if n > MAX_ENUMERATION_CELLS {
        return Err(Error::TooManyCells {
            cells: n,
            max: MAX_ENUMERATION_CELLS,
        });
    }
    let total = 1usize << n;
    let successor: Vec<u32> = (0..total as u32).map(|s| step_bits(rv.rules(), s)).collect();

    const UNSET: usize = usize::MAX;
    let mut basin_of = vec![UNSET; total];
    let mut visit_mark = vec![UNSET; total];
    let mut attractors: Vec<Vec<u32>> = Vec::new();
    let mut path = Vec::new();

    for start in 0..total {
        if basin_of[start] != UNSET {
            continue;
        }
        path.clear();
        let mut x = start;
        while basin_of[x] == UNSET && visit_mark[x] != start {
            visit_mark[x] = start;
            path.push(x);
            x = successor[x] as usize;
        }
        let b = if basin_of[x] != UNSET {
            basin_of[x]
        } else {
            let mut cycle = vec![x as u32];
            let mut c = successor[x] as usize;
            while c != x {
                cycle.push(c as u32);
                c = successor[c] as usize;
            }
            attractors.push(cycle);
            attractors.len() - 1
        };
        for &p in &path {
            basin_of[p] = b;
        }
    }

    Ok(StateGraph {
        cells: n,
        successor,
        attractors,
        basin_of,
    })
}

/// Dependency matrix `T` and complement vector `F` of a rule vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPair {
    pub t: Vec<Vec<u8>>,
    pub f: Vec<u8>,
}

pub fn build_t_f(rv: &RuleVector) -> DependencyPair {
    let n = rv.len();
    let mut t = vec![vec![0u8; n]; n];
    let mut f = vec![0u8; n];
    for (i, rule) in rv.iter().enumerate() {
        let mask = rule.mask();
        if mask.left() && i > 0 {
            t[i][i - 1] = 1;
        }
        if mask.center() {
            t[i][i] = 1;
        }
        if mask.right() && i + 1 < n {
            t[i][i + 1] = 1;
        }
        f[i] = rule.is_complemented() as u8;
    }
    DependencyPair { t, f }
}

impl DependencyPair {
    /// Rebuilds the rule vector; boundary-facing mask bits come back cleared.
    pub fn reconstruct(&self) -> Result<RuleVector> {
        let n = self.f.len();
        if self.t.len() != n || self.t.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidParameter("T must be n x n with n = |F|".into()));
        }
        let mut rules = Vec::with_capacity(n);
        for i in 0..n {
            for (j, &v) in self.t[i].iter().enumerate() {
                if v > 1 || (v == 1 && i.abs_diff(j) > 1) {
                    return Err(Error::InvalidParameter(format!(
                        "T[{i}][{j}] is not a binary tridiagonal entry"
                    )));
                }
            }
            if self.f[i] > 1 {
                return Err(Error::InvalidParameter(format!("F[{i}] is not binary")));
            }
            let mut bits = 0u8;
            if i > 0 && self.t[i][i - 1] == 1 {
                bits |= NeighborMask::LEFT;
            }
            if self.t[i][i] == 1 {
                bits |= NeighborMask::SELF;
            }
            if i + 1 < n && self.t[i][i + 1] == 1 {
                bits |= NeighborMask::RIGHT;
            }
            rules.push(MacaRule::new(NeighborMask::new(bits), self.f[i] == 1));
        }
        RuleVector::new(rules)
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.t
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &v)| v == 0 || i.abs_diff(j) <= 1))
    }
}

/// The rule vector with boundary-facing neighbor bits cleared. Under null
/// boundary it has identical dynamics to the input.
pub fn boundary_normalized(rv: &RuleVector) -> RuleVector {
    let n = rv.len();
    let rules = rv
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut bits = r.mask().bits();
            if i == 0 {
                bits &= !NeighborMask::LEFT;
            }
            if i + 1 == n {
                bits &= !NeighborMask::RIGHT;
            }
            MacaRule::new(NeighborMask::new(bits), r.is_complemented())
        })
        .collect();
    RuleVector::new(rules).expect("same length as a valid rule vector")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinEntry {
    pub class: ClassId,
    pub purity: f64,
    pub support: usize,
}

/// Basin-to-class labeling learned from training patterns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BasinMap {
    pub entries: BTreeMap<AttractorSignature, BasinEntry>,
    /// Class with the most training patterns; used for unseen attractors.
    pub fallback_class: ClassId,
    /// Patterns whose trajectory did not settle.
    pub nonconvergent: usize,
    /// Training patterns whose basin majority equals their own class.
    pub correct: usize,
    pub total: usize,
}

impl BasinMap {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Training accuracy under majority labeling.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

/// Majority class of a count table; ties go to the lowest class index.
pub(crate) fn majority(counts: &BTreeMap<ClassId, usize>) -> (ClassId, usize) {
    counts
        .iter()
        .fold((0, 0), |best, (&c, &k)| if k > best.1 { (c, k) } else { best })
}

/// Attractor of every pattern (`None` when the trajectory did not settle).
pub fn assign_attractors(
    rv: &RuleVector,
    patterns: &[(FuzzyState, ClassId)],
    dynamics: &Dynamics,
) -> Result<Vec<Option<AttractorSignature>>> {
    patterns
        .iter()
        .map(|(p, _)| match evolve(rv, p, dynamics) {
            Ok(sig) => Ok(Some(sig)),
            Err(Error::NonConvergence(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

pub(crate) fn basin_map_from_assignments(
    patterns: &[(FuzzyState, ClassId)],
    assignments: &[Option<AttractorSignature>],
) -> BasinMap {
    let mut per_basin: BTreeMap<&AttractorSignature, BTreeMap<ClassId, usize>> = BTreeMap::new();
    let mut global: BTreeMap<ClassId, usize> = BTreeMap::new();
    let mut nonconvergent = 0;
    for ((_, class), sig) in patterns.iter().zip(assignments) {
        *global.entry(*class).or_default() += 1;
        match sig {
            Some(sig) => *per_basin.entry(sig).or_default().entry(*class).or_default() += 1,
            None => nonconvergent += 1,
        }
    }
    let mut correct = 0;
    let entries = per_basin
        .into_iter()
        .map(|(sig, counts)| {
            let support: usize = counts.values().sum();
            let (class, k) = majority(&counts);
            correct += k;
            let entry = BasinEntry {
                class,
                purity: k as f64 / support as f64,
                support,
            };
            (sig.clone(), entry)
        })
        .collect();
    BasinMap {
        entries,
        fallback_class: majority(&global).0,
        nonconvergent,
        correct,
        total: patterns.len(),
    }
}

pub fn label_basins(rv: &RuleVector, patterns: &[(FuzzyState, ClassId)], dynamics: &Dynamics) -> Result<BasinMap> {
    if patterns.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let assignments = assign_attractors(rv, patterns, dynamics)?;
    Ok(basin_map_from_assignments(patterns, &assignments))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: ClassId,
    pub score: f64,
    pub fallback: bool,
}

pub fn classify(rv: &RuleVector, basins: &BasinMap, p: &FuzzyState, dynamics: &Dynamics) -> Result<Classification> {
    let fallback = Classification {
        class: basins.fallback_class,
        score: 0.0,
        fallback: true,
    };
    match evolve(rv, p, dynamics) {
        Ok(sig) => Ok(match basins.entries.get(&sig) {
            Some(e) => Classification {
                class: e.class,
                score: e.purity,
                fallback: false,
            },
            None => fallback,
        }),
        Err(Error::NonConvergence(_)) => Ok(fallback),
        Err(e) => Err(e),
    }
}
