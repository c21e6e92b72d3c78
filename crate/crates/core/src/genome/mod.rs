pub mod annotate;
pub mod dna;
pub mod features;
pub mod orf;
pub mod synth;
pub mod training;
