//! Fuzzy multiple-attractor cellular automata evolved by clonal selection,
//! arranged into a basin tree, and applied to coding-region and promoter
//! annotation.

pub mod attractor;
pub mod ca;
pub mod clonal;
pub mod error;
pub mod genome;
pub mod io;
pub mod pipeline;
pub mod tree;

pub use attractor::{
    build_t_f, classify, enumerate_state_graph, evolve, label_basins, AttractorSignature, BasinMap, ClassId,
    DependencyPair, Dynamics, StateGraph,
};
pub use ca::{
    eval_boolean, eval_fuzzy, maca_rule_number, rule_from_number, step, FuzzyState, MacaRule, RuleTable, RuleVector,
};
pub use clonal::{run_clonal, Chromosome, ClonalConfig, ClonalOutcome};
pub use error::{Error, Result};
pub use genome::annotate::{annotate, AnnotateConfig, GenomeAnnotation};
pub use genome::dna::{encode_window, DnaSequence, Encoding, WindowConfig, WINDOW_LENGTHS};
pub use io::model::{load_model, save_model, ModelFile};
pub use tree::{build_tree, tree_classify, InmacaTree, TreeConfig};
