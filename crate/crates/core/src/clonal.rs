//! Clonal selection over rule-vector chromosomes.
//!
//! Each generation ranks the population by fitness, clones the top fraction in
//! inverse proportion to rank, hypermutates each clone at a rate that shrinks
//! as its parent's fitness grows, and keeps the best `population_size` distinct
//! chromosomes of parents and clones. Every chromosome that ever beats the
//! fitness threshold is archived; the run stops once the archive holds
//! `stop_count` members or the generation budget is spent.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::{label_basins, BasinMap, ClassId, Dynamics};
use crate::ca::{FuzzyState, MacaRule, RuleVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClonalConfig {
    pub population_size: usize,
    pub fitness_threshold: f64,
    pub stop_count: usize,
    pub g_max: usize,
    pub clone_fraction: f64,
    pub base_mutation_rate: f64,
    pub rng_seed: u64,
    pub dynamics: Dynamics,
}

impl Default for ClonalConfig {
    fn default() -> Self {
        ClonalConfig {
            population_size: 200,
            fitness_threshold: 0.5,
            stop_count: 50,
            g_max: 100,
            clone_fraction: 0.1,
            base_mutation_rate: 0.1,
            rng_seed: 0,
            dynamics: Dynamics::default(),
        }
    }
}

impl ClonalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be >= 1");
        }
        if self.stop_count == 0 || self.stop_count > self.population_size {
            return bad("stop_count must lie in 1..=population_size");
        }
        if !(self.clone_fraction > 0.0 && self.clone_fraction <= 1.0) {
            return bad("clone_fraction must lie in (0, 1]");
        }
        if !(self.base_mutation_rate > 0.0 && self.base_mutation_rate < 1.0) {
            return bad("base_mutation_rate must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.fitness_threshold) {
            return bad("fitness_threshold must lie in [0, 1]");
        }
        self.dynamics.validate()
    }

    /// Number of top-ranked chromosomes that get cloned.
    pub fn cloned_ranks(&self) -> usize {
        ((self.population_size as f64 * self.clone_fraction).ceil() as usize).clamp(1, self.population_size)
    }

    /// Clones produced for 1-based rank `rank`.
    pub fn clone_count(&self, rank: usize) -> usize {
        (self.population_size as f64 * self.clone_fraction / rank as f64).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub rv: RuleVector,
    pub fitness: Option<f64>,
    /// Basin count at evaluation; breaks fitness ties toward simpler models.
    #[serde(default)]
    pub basins: usize,
}

impl Chromosome {
    pub fn new(rv: RuleVector) -> Self {
        Chromosome {
            rv,
            fitness: None,
            basins: 0,
        }
    }

    pub fn fitness_or_zero(&self) -> f64 {
        self.fitness.unwrap_or(0.0)
    }

    fn evaluate(&mut self, train: &[(FuzzyState, ClassId)], dynamics: &Dynamics) -> Result<()> {
        if self.fitness.is_none() {
            let map = label_basins(&self.rv, train, dynamics)?;
            self.fitness = Some(map.accuracy());
            self.basins = map.len();
        }
        Ok(())
    }
}

/// Deterministic generator for a labeled substream of the master seed.
pub fn substream(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(tag)))
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

const INIT_STREAM: u64 = u64::MAX;

fn random_rule_vector<R: Rng>(n: usize, rng: &mut R) -> RuleVector {
    let rules = (0..n)
        .map(|_| MacaRule::from_index(rng.gen_range(0..MacaRule::count())))
        .collect();
    RuleVector::new(rules).expect("n >= 1")
}

pub fn init_population(n_cells: usize, cfg: &ClonalConfig) -> Result<Vec<Chromosome>> {
    if n_cells == 0 {
        return Err(Error::InvalidParameter("n_cells must be >= 1".into()));
    }
    let mut rng = substream(cfg.rng_seed, INIT_STREAM);
    Ok((0..cfg.population_size)
        .map(|_| Chromosome::new(random_rule_vector(n_cells, &mut rng)))
        .collect())
}

/// Training accuracy of the chromosome's majority-labeled basins.
pub fn fitness(c: &Chromosome, train: &[(FuzzyState, ClassId)], dynamics: &Dynamics) -> Result<f64> {
    Ok(label_basins(&c.rv, train, dynamics)?.accuracy())
}

/// Replaces each gene with probability `rate` by a different random rule.
fn hypermutate<R: Rng>(rv: &mut RuleVector, rate: f64, rng: &mut R) -> usize {
    let mut mutated = 0;
    for gene in rv.rules_mut() {
        if rng.gen::<f64>() < rate {
            let mut k = rng.gen_range(0..MacaRule::count() - 1);
            if k >= gene.index() {
                k += 1;
            }
            *gene = MacaRule::from_index(k);
            mutated += 1;
        }
    }
    mutated
}

/// Clones and hypermutates the top of a fitness-ranked population.
pub fn clone_and_mutate<R: Rng>(ranked: &[Chromosome], cfg: &ClonalConfig, rng: &mut R) -> Vec<Chromosome> {
    let mut clones = Vec::new();
    for (i, parent) in ranked.iter().take(cfg.cloned_ranks()).enumerate() {
        let rate = cfg.base_mutation_rate * (1.0 - parent.fitness_or_zero());
        for _ in 0..cfg.clone_count(i + 1) {
            let mut rv = parent.rv.clone();
            hypermutate(&mut rv, rate, rng);
            clones.push(Chromosome::new(rv));
        }
    }
    clones
}

/// Sorts by fitness (descending), then basin count (ascending). Stable.
pub fn rank(population: &mut [Chromosome]) {
    population.sort_by(|a, b| {
        b.fitness_or_zero()
            .total_cmp(&a.fitness_or_zero())
            .then(a.basins.cmp(&b.basins))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ArchiveFull,
    GenerationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub archive_size: usize,
}

#[derive(Debug, Clone)]
pub struct ClonalOutcome {
    pub best: Chromosome,
    pub basins: BasinMap,
    pub archive: Vec<Chromosome>,
    pub final_population: Vec<Chromosome>,
    pub history: Vec<GenerationStats>,
    pub stop: StopReason,
}

fn evaluate_all(pop: &mut [Chromosome], train: &[(FuzzyState, ClassId)], dynamics: &Dynamics) -> Result<()> {
    pop.par_iter_mut().try_for_each(|c| c.evaluate(train, dynamics))
}

fn check_training_set(train: &[(FuzzyState, ClassId)]) -> Result<usize> {
    let first = train.first().ok_or(Error::Empty("training set"))?;
    let n = first.0.len();
    if n == 0 {
        return Err(Error::Empty("pattern"));
    }
    if let Some((p, _)) = train.iter().find(|(p, _)| p.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: p.len(),
        });
    }
    Ok(n)
}

pub fn run_clonal(train: &[(FuzzyState, ClassId)], cfg: &ClonalConfig) -> Result<ClonalOutcome> {
    cfg.validate()?;
    let n_cells = check_training_set(train)?;
    let dynamics = cfg.dynamics;

    let mut population = init_population(n_cells, cfg)?;
    let mut archive: Vec<Chromosome> = Vec::new();
    let mut archived: HashSet<RuleVector> = HashSet::new();
    let mut history = Vec::new();
    let mut generation = 0usize;
    let mut new_members: Vec<Chromosome> = Vec::new();

    evaluate_all(&mut population, train, &dynamics)?;
    new_members.extend(population.iter().cloned());

    let stop = loop {
        for c in new_members.drain(..) {
            if c.fitness_or_zero() > cfg.fitness_threshold && archived.insert(c.rv.clone()) {
                archive.push(c);
            }
        }
        rank(&mut population);
        let mean = population.iter().map(Chromosome::fitness_or_zero).sum::<f64>() / population.len() as f64;
        history.push(GenerationStats {
            generation,
            best_fitness: population[0].fitness_or_zero(),
            mean_fitness: mean,
            archive_size: archive.len(),
        });
        if archive.len() >= cfg.stop_count {
            break StopReason::ArchiveFull;
        }
        generation += 1;
        if generation > cfg.g_max {
            break StopReason::GenerationLimit;
        }

        let mut rng = substream(cfg.rng_seed, generation as u64);
        let mut clones = clone_and_mutate(&population, cfg, &mut rng);
        evaluate_all(&mut clones, train, &dynamics)?;
        new_members.extend(clones.iter().cloned());

        let mut merged = std::mem::take(&mut population);
        merged.extend(clones);
        rank(&mut merged);
        let mut seen = HashSet::new();
        population = merged
            .into_iter()
            .filter(|c| seen.insert(c.rv.clone()))
            .take(cfg.population_size)
            .collect();
        if population.len() < cfg.population_size {
            let mut fresh: Vec<Chromosome> = (population.len()..cfg.population_size)
                .map(|_| Chromosome::new(random_rule_vector(n_cells, &mut rng)))
                .collect();
            evaluate_all(&mut fresh, train, &dynamics)?;
            new_members.extend(fresh.iter().cloned());
            population.extend(fresh);
        }
    };

    let best = population[0].clone();
    let basins = label_basins(&best.rv, train, &dynamics)?;
    Ok(ClonalOutcome {
        best,
        basins,
        archive,
        final_population: population,
        history,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cluster(n: usize, per_class: usize, seed: u64) -> Vec<(FuzzyState, ClassId)> {
        let mut rng = substream(seed, 7);
        let protos: Vec<Vec<bool>> = (0..2).map(|_| (0..n).map(|_| rng.gen()).collect()).collect();
        let mut out = Vec::new();
        for _ in 0..per_class {
            for (class, proto) in protos.iter().enumerate() {
                let bits: Vec<bool> = proto.iter().map(|&b| b ^ (rng.gen::<f64>() < 0.1)).collect();
                out.push((FuzzyState::from_bits(&bits), class));
            }
        }
        out
    }

    #[test]
    fn init_is_deterministic_and_sized() {
        let cfg = ClonalConfig {
            rng_seed: 42,
            ..ClonalConfig::default()
        };
        let a = init_population(54, &cfg).unwrap();
        let b = init_population(54, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 200);
        assert!(a.iter().all(|c| c.rv.len() == 54));
    }

    #[test]
    fn init_rule_histogram_is_uniform() {
        let cfg = ClonalConfig {
            rng_seed: 42,
            ..ClonalConfig::default()
        };
        let pop = init_population(54, &cfg).unwrap();
        let mut hist = [0usize; 16];
        for c in &pop {
            for r in c.rv.iter() {
                hist[r.index()] += 1;
            }
        }
        // binomial(10800, 1/16): mean 675, sd ~25.2
        let total: f64 = 200.0 * 54.0;
        let mean = total / 16.0;
        let sd = (total * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for &h in &hist {
            assert!((h as f64 - mean).abs() < 5.0 * sd, "{hist:?}");
        }
    }

    #[test]
    fn fitness_examples() {
        let dynamics = Dynamics::default();
        let id = Chromosome::new(RuleVector::uniform(MacaRule::from_number(204).unwrap(), 2).unwrap());
        let sep: Vec<_> = (0..10)
            .flat_map(|_| {
                [
                    (FuzzyState::new(vec![0.0, 0.0]).unwrap(), 0),
                    (FuzzyState::new(vec![1.0, 1.0]).unwrap(), 1),
                ]
            })
            .collect();
        assert_eq!(fitness(&id, &sep, &dynamics).unwrap(), 1.0);

        let zero = Chromosome::new(RuleVector::uniform(MacaRule::from_number(0).unwrap(), 2).unwrap());
        assert_eq!(fitness(&zero, &sep, &dynamics).unwrap(), 0.5);

        let one_class: Vec<_> = sep.iter().map(|(p, _)| (p.clone(), 3)).collect();
        let cfg = ClonalConfig::default();
        for c in init_population(2, &cfg).unwrap().iter().take(20) {
            assert_eq!(fitness(c, &one_class, &dynamics).unwrap(), 1.0);
        }
    }

    #[test]
    fn perfect_fitness_disables_mutation() {
        let cfg = ClonalConfig::default();
        let parent = Chromosome {
            rv: RuleVector::uniform(MacaRule::from_number(204).unwrap(), 50).unwrap(),
            fitness: Some(1.0),
            basins: 1,
        };
        let mut rng = substream(1, 1);
        let clones = clone_and_mutate(std::slice::from_ref(&parent), &cfg, &mut rng);
        assert!(!clones.is_empty());
        assert!(clones.iter().all(|c| c.rv == parent.rv));
    }

    #[test]
    fn clone_counts_fall_with_rank() {
        let cfg = ClonalConfig::default();
        assert_eq!(cfg.cloned_ranks(), 20);
        assert_eq!(cfg.clone_count(1), 20);
        assert_eq!(cfg.clone_count(2), 10);
        for r in 1..cfg.cloned_ranks() {
            assert!(cfg.clone_count(r) >= cfg.clone_count(r + 1));
        }
    }

    #[test]
    fn zero_fitness_mutation_rate_matches_binomial() {
        // 1000 clones x 100 genes at p = 0.1: per-clone mean 10, sd 3;
        // the mean over 1000 clones has sd 0.095.
        let cfg = ClonalConfig {
            population_size: 1000,
            clone_fraction: 1.0,
            base_mutation_rate: 0.1,
            ..ClonalConfig::default()
        };
        let rv = RuleVector::uniform(MacaRule::from_number(204).unwrap(), 100).unwrap();
        let mut rng = substream(9, 9);
        let mut total = 0usize;
        for _ in 0..1000 {
            let mut v = rv.clone();
            total += hypermutate(&mut v, cfg.base_mutation_rate * (1.0 - 0.0), &mut rng);
            assert!(v.iter().zip(rv.iter()).all(|(a, b)| a == b || a.index() != b.index()));
        }
        let mean = total as f64 / 1000.0;
        let sd = (100.0f64 * 0.1 * 0.9).sqrt() / 1000.0f64.sqrt();
        assert!((mean - 10.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn mutation_never_keeps_the_gene() {
        let mut rng = substream(3, 3);
        let rv = RuleVector::new(MacaRule::all().to_vec()).unwrap();
        let mut v = rv.clone();
        assert_eq!(hypermutate(&mut v, 0.999_999, &mut rng), 16);
        assert!(v.iter().zip(rv.iter()).all(|(a, b)| a != b));
    }

    #[test]
    fn zero_generations_returns_initial_best() {
        let train = two_cluster(8, 20, 1);
        let cfg = ClonalConfig {
            g_max: 0,
            stop_count: 200,
            rng_seed: 5,
            ..ClonalConfig::default()
        };
        let out = run_clonal(&train, &cfg).unwrap();
        let mut init = init_population(8, &cfg).unwrap();
        for c in &mut init {
            c.evaluate(&train, &cfg.dynamics).unwrap();
        }
        rank(&mut init);
        assert_eq!(out.best.rv, init[0].rv);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.stop, StopReason::GenerationLimit);
    }

    #[test]
    fn run_is_deterministic_elitist_and_archive_is_valid() {
        let train = two_cluster(10, 30, 2);
        let cfg = ClonalConfig {
            population_size: 40,
            stop_count: 40,
            fitness_threshold: 0.95,
            g_max: 15,
            rng_seed: 11,
            ..ClonalConfig::default()
        };
        let a = run_clonal(&train, &cfg).unwrap();
        let b = run_clonal(&train, &cfg).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.archive, b.archive);
        assert_eq!(a.history, b.history);
        for w in a.history.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        assert!(a.final_population.len() == cfg.population_size);
        for c in &a.archive {
            assert!(fitness(c, &train, &cfg.dynamics).unwrap() > cfg.fitness_threshold);
        }
        let best = a.best.fitness_or_zero();
        let max_seen = a
            .archive
            .iter()
            .chain(&a.final_population)
            .map(Chromosome::fitness_or_zero)
            .fold(0.0, f64::max);
        assert_eq!(best, max_seen);
        assert_eq!(best, fitness(&a.best, &train, &cfg.dynamics).unwrap());
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(matches!(
            run_clonal(&[], &ClonalConfig::default()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = ClonalConfig {
            stop_count: 500,
            ..ClonalConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
