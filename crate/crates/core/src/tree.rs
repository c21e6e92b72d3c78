//! Recursive multi-class tree of evolved MACA nodes.
//!
//! A split node owns an evolved rule vector. Its basins route patterns either
//! to a labeled leaf or to a child node trained on the basin's members alone.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::{assign_attractors, evolve, majority, AttractorSignature, ClassId, Dynamics};
use crate::ca::{FuzzyState, RuleVector};
use crate::clonal::{run_clonal, splitmix64, ClonalConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Number of split-node levels; children are created only above this.
    pub max_depth: usize,
    /// Impure basins with fewer members become majority leaves.
    pub min_support: usize,
    pub clonal: ClonalConfig,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 10,
            min_support: 5,
            clonal: ClonalConfig::default(),
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        if self.min_support == 0 {
            return Err(Error::InvalidParameter("min_support must be >= 1".into()));
        }
        self.clonal.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafCause {
    Pure,
    DepthCap,
    SupportFloor,
    /// One impure basin swallowed every pattern twice in a row.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub class: ClassId,
    pub purity: f64,
    pub support: usize,
    pub cause: LeafCause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Leaf(Leaf),
    Child {
        /// Fraction of the basin's training patterns the subtree labels correctly.
        purity: f64,
        node: Box<SplitNode>,
    },
}

impl Route {
    pub fn purity(&self) -> f64 {
        match self {
            Route::Leaf(l) => l.purity,
            Route::Child { purity, .. } => *purity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEntry {
    pub signature: AttractorSignature,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitNode {
    pub depth: usize,
    pub rules: RuleVector,
    /// Node-local majority, used when a pattern reaches an unseen attractor.
    pub majority_class: ClassId,
    pub support: usize,
    /// Training fitness of the node's rule vector.
    pub fitness: f64,
    /// Sorted by signature.
    pub routes: Vec<RouteEntry>,
}

impl SplitNode {
    pub fn route(&self, sig: &AttractorSignature) -> Option<&Route> {
        self.routes
            .binary_search_by(|e| e.signature.cmp(sig))
            .ok()
            .map(|i| &self.routes[i].route)
    }

    fn correct(&self) -> usize {
        self.routes
            .iter()
            .map(|e| match &e.route {
                Route::Leaf(l) => (l.purity * l.support as f64).round() as usize,
                Route::Child { node, .. } => node.correct(),
            })
            .sum()
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .routes
            .iter()
            .map(|e| match &e.route {
                Route::Child { node, .. } => node.node_count(),
                Route::Leaf(_) => 0,
            })
            .sum::<usize>()
    }

    pub fn max_depth(&self) -> usize {
        self.routes
            .iter()
            .map(|e| match &e.route {
                Route::Child { node, .. } => node.max_depth(),
                Route::Leaf(_) => self.depth,
            })
            .max()
            .unwrap_or(self.depth)
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        for e in &self.routes {
            match &e.route {
                Route::Leaf(l) => out.push(l),
                Route::Child { node, .. } => node.collect_leaves(out),
            }
        }
    }

    /// Node reached by following route indices from this node.
    pub fn descend(&self, path: &[usize]) -> Option<&SplitNode> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => match &self.routes.get(i)?.route {
                Route::Child { node, .. } => node.descend(rest),
                Route::Leaf(_) => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeRoot {
    Leaf(Leaf),
    Split(SplitNode),
}

/// A trained classifier: the tree plus the dynamics it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InmacaTree {
    pub cells: usize,
    pub dynamics: Dynamics,
    pub root: TreeRoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildEvent {
    /// Route indices from the root to the affected node.
    pub path: Vec<usize>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildDiagnostics {
    pub events: Vec<BuildEvent>,
    pub nodes: usize,
    pub nonconvergent: usize,
    /// Best fitness found at the root split (1.0 for a leaf root).
    pub root_fitness: f64,
}

#[derive(Debug, Clone)]
pub struct TreeBuild {
    pub tree: InmacaTree,
    pub diagnostics: BuildDiagnostics,
}

fn node_seed(master: u64, path: &[usize], attempt: u64) -> u64 {
    let mut h = splitmix64(master ^ 0xA5A5_A5A5);
    for &p in path {
        h = splitmix64(h ^ (p as u64 + 1));
    }
    splitmix64(h ^ attempt.wrapping_mul(0x1000_0000_01B3))
}

fn class_counts(patterns: &[(FuzzyState, ClassId)]) -> BTreeMap<ClassId, usize> {
    let mut counts = BTreeMap::new();
    for (_, c) in patterns {
        *counts.entry(*c).or_default() += 1;
    }
    counts
}

fn leaf_for(patterns: &[(FuzzyState, ClassId)], cause: LeafCause) -> Leaf {
    let counts = class_counts(patterns);
    let (class, k) = majority(&counts);
    Leaf {
        class,
        purity: k as f64 / patterns.len() as f64,
        support: patterns.len(),
        cause,
    }
}

struct NodeBuild {
    node: SplitNode,
    events: Vec<BuildEvent>,
    nodes: usize,
    nonconvergent: usize,
}

enum Built {
    Leaf(Leaf, Vec<BuildEvent>),
    Split(NodeBuild),
}

fn build_node(patterns: Vec<(FuzzyState, ClassId)>, depth: usize, path: Vec<usize>, cfg: &TreeConfig) -> Result<Built> {
    if class_counts(&patterns).len() == 1 {
        return Ok(Built::Leaf(leaf_for(&patterns, LeafCause::Pure), Vec::new()));
    }
    let mut events = Vec::new();
    let mut attempt = 0u64;
    let (outcome, assignments) = loop {
        let clonal = ClonalConfig {
            rng_seed: node_seed(cfg.clonal.rng_seed, &path, attempt),
            ..cfg.clonal.clone()
        };
        let outcome = run_clonal(&patterns, &clonal)?;
        let assignments = assign_attractors(&outcome.best.rv, &patterns, &clonal.dynamics)?;
        let degenerate = outcome.basins.len() == 1 && outcome.basins.nonconvergent == 0;
        if !degenerate {
            break (outcome, assignments);
        }
        if attempt == 0 {
            events.push(BuildEvent {
                path: path.clone(),
                message: "single impure basin; retrying with a fresh seed".into(),
            });
            attempt += 1;
            continue;
        }
        events.push(BuildEvent {
            path: path.clone(),
            message: "single impure basin after retry; forced majority leaf".into(),
        });
        return Ok(Built::Leaf(leaf_for(&patterns, LeafCause::Degenerate), events));
    };

    let nonconvergent_here = outcome.basins.nonconvergent;
    let mut members: BTreeMap<AttractorSignature, Vec<(FuzzyState, ClassId)>> = BTreeMap::new();
    for (p, sig) in patterns.iter().zip(assignments) {
        if let Some(sig) = sig {
            members.entry(sig).or_default().push(p.clone());
        }
    }

    // (route, events, nodes, nonconvergent) per basin
    type Child = Result<(Route, Vec<BuildEvent>, usize, usize)>;
    let children: Vec<(AttractorSignature, Child)> = members
        .into_iter()
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, (sig, group))| {
            let pure = class_counts(&group).len() == 1;
            let result = if pure {
                Ok((Route::Leaf(leaf_for(&group, LeafCause::Pure)), Vec::new(), 0, 0))
            } else if group.len() < cfg.min_support {
                Ok((Route::Leaf(leaf_for(&group, LeafCause::SupportFloor)), Vec::new(), 0, 0))
            } else if depth + 1 >= cfg.max_depth {
                Ok((Route::Leaf(leaf_for(&group, LeafCause::DepthCap)), Vec::new(), 0, 0))
            } else {
                let mut child_path = path.clone();
                child_path.push(i);
                let support = group.len();
                build_node(group, depth + 1, child_path, cfg).map(|b| match b {
                    Built::Leaf(leaf, ev) => (Route::Leaf(leaf), ev, 0, 0),
                    Built::Split(nb) => {
                        let purity = nb.node.correct() as f64 / support as f64;
                        (
                            Route::Child {
                                purity,
                                node: Box::new(nb.node),
                            },
                            nb.events,
                            nb.nodes,
                            nb.nonconvergent,
                        )
                    }
                })
            };
            (sig, result)
        })
        .collect();

    let mut routes = Vec::with_capacity(children.len());
    let mut nodes = 1;
    let mut nonconvergent = nonconvergent_here;
    for (signature, result) in children {
        let (route, ev, n, nc) = result?;
        events.extend(ev);
        nodes += n;
        nonconvergent += nc;
        routes.push(RouteEntry { signature, route });
    }

    let counts = class_counts(&patterns);
    let node = SplitNode {
        depth,
        rules: outcome.best.rv.clone(),
        majority_class: majority(&counts).0,
        support: patterns.len(),
        fitness: outcome.best.fitness_or_zero(),
        routes,
    };
    Ok(Built::Split(NodeBuild {
        node,
        events,
        nodes,
        nonconvergent,
    }))
}

pub fn build_tree(train: &[(FuzzyState, ClassId)], cfg: &TreeConfig) -> Result<TreeBuild> {
    cfg.validate()?;
    let first = train.first().ok_or(Error::Empty("training set"))?;
    let cells = first.0.len();
    if let Some((p, _)) = train.iter().find(|(p, _)| p.len() != cells) {
        return Err(Error::LengthMismatch {
            expected: cells,
            actual: p.len(),
        });
    }
    let built = build_node(train.to_vec(), 0, Vec::new(), cfg)?;
    let (root, diagnostics) = match built {
        Built::Leaf(leaf, events) => (
            TreeRoot::Leaf(leaf),
            BuildDiagnostics {
                events,
                nodes: 0,
                nonconvergent: 0,
                root_fitness: 1.0,
            },
        ),
        Built::Split(nb) => {
            let root_fitness = nb.node.fitness;
            (
                TreeRoot::Split(nb.node),
                BuildDiagnostics {
                    events: nb.events,
                    nodes: nb.nodes,
                    nonconvergent: nb.nonconvergent,
                    root_fitness,
                },
            )
        }
    };
    Ok(TreeBuild {
        tree: InmacaTree {
            cells,
            dynamics: cfg.clonal.dynamics,
            root,
        },
        diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeClassification {
    pub class: ClassId,
    pub score: f64,
    pub path: Vec<AttractorSignature>,
    pub fallback: bool,
}

impl InmacaTree {
    pub fn classify(&self, p: &FuzzyState) -> Result<TreeClassification> {
        tree_classify(self, p)
    }

    /// Every leaf in the tree.
    pub fn leaves(&self) -> Vec<&Leaf> {
        match &self.root {
            TreeRoot::Leaf(l) => vec![l],
            TreeRoot::Split(n) => n.leaves(),
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.root {
            TreeRoot::Leaf(_) => 0,
            TreeRoot::Split(n) => n.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match &self.root {
            TreeRoot::Leaf(_) => 0,
            TreeRoot::Split(n) => n.max_depth(),
        }
    }

    /// Checks structural invariants of a tree read from storage.
    pub fn validate(&self, n_classes: usize) -> Result<()> {
        self.dynamics
            .validate()
            .map_err(|e| Error::ModelInvariant(e.to_string()))?;
        let check_leaf = |l: &Leaf| -> Result<()> {
            if !(l.purity > 0.0 && l.purity <= 1.0) {
                return Err(Error::ModelInvariant(format!(
                    "leaf purity {} outside (0, 1]",
                    l.purity
                )));
            }
            if l.support == 0 {
                return Err(Error::ModelInvariant("leaf support is zero".into()));
            }
            if l.class >= n_classes {
                return Err(Error::ModelInvariant(format!("leaf class {} unknown", l.class)));
            }
            Ok(())
        };
        fn walk(
            node: &SplitNode,
            cells: usize,
            quant: f64,
            n_classes: usize,
            check_leaf: &dyn Fn(&Leaf) -> Result<()>,
        ) -> Result<()> {
            if node.rules.len() != cells {
                return Err(Error::ModelInvariant(format!(
                    "node at depth {} has {} rules, expected {cells}",
                    node.depth,
                    node.rules.len()
                )));
            }
            if node.majority_class >= n_classes {
                return Err(Error::ModelInvariant("node majority class unknown".into()));
            }
            for w in node.routes.windows(2) {
                if w[0].signature >= w[1].signature {
                    return Err(Error::ModelInvariant("routes not strictly sorted by signature".into()));
                }
            }
            for e in &node.routes {
                e.signature.validate(cells, quant)?;
                match &e.route {
                    Route::Leaf(l) => check_leaf(l)?,
                    Route::Child { purity, node: child } => {
                        if !(0.0..=1.0).contains(purity) {
                            return Err(Error::ModelInvariant(format!("route purity {purity} outside [0, 1]")));
                        }
                        if child.depth != node.depth + 1 {
                            return Err(Error::ModelInvariant("child depth is not parent depth + 1".into()));
                        }
                        walk(child, cells, quant, n_classes, check_leaf)?;
                    }
                }
            }
            Ok(())
        }
        match &self.root {
            TreeRoot::Leaf(l) => check_leaf(l),
            TreeRoot::Split(n) => walk(n, self.cells, self.dynamics.quant, n_classes, &check_leaf),
        }
    }
}

pub fn tree_classify(tree: &InmacaTree, p: &FuzzyState) -> Result<TreeClassification> {
    if p.len() != tree.cells {
        return Err(Error::LengthMismatch {
            expected: tree.cells,
            actual: p.len(),
        });
    }
    let mut node = match &tree.root {
        TreeRoot::Leaf(l) => {
            return Ok(TreeClassification {
                class: l.class,
                score: l.purity,
                path: Vec::new(),
                fallback: false,
            })
        }
        TreeRoot::Split(n) => n,
    };
    let mut path = Vec::new();
    let mut score = 1.0;
    loop {
        let route = match evolve(&node.rules, p, &tree.dynamics) {
            Ok(sig) => node.route(&sig).map(|r| (r, sig)),
            Err(Error::NonConvergence(_)) => None,
            Err(e) => return Err(e),
        };
        let Some((route, sig)) = route else {
            return Ok(TreeClassification {
                class: node.majority_class,
                score: 0.0,
                path,
                fallback: true,
            });
        };
        path.push(sig);
        match route {
            Route::Leaf(l) => {
                return Ok(TreeClassification {
                    class: l.class,
                    score: score * l.purity,
                    path,
                    fallback: false,
                })
            }
            Route::Child { purity, node: child } => {
                score *= purity;
                node = child;
            }
        }
    }
}
