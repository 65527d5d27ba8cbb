//! Generation loop, replications and median aggregation.
//!
//! One generation runs: decode, translate, classify, match, score fitness,
//! record metrics, then reproduce, cross over, mutate and redraw every type
//! segment. Metrics therefore describe the population before the genetic
//! operators act.
//!
//! # Seeding
//!
//! Replication `r` under master seed `s` uses a ChaCha8 stream keyed by
//! four SplitMix64 outputs:
//!
//! ```text
//! state = mix64(s) ^ mix64(r ^ 0xD1B54A32D192ED03)
//! key   = [next(state), next(state), next(state), next(state)]   (little endian)
//! ```
//!
//! where `next` is the SplitMix64 step (add `0x9E3779B97F4A7C15`, then
//! `mix64`). Each replication's stream depends only on `(s, r)`, so results
//! do not depend on how replications are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{crossover_population, mutate, tournament_reproduce, EvolutionParams};
use crate::genome::{decode, fresh_type_segment, initial_population, Chromosome, InitPolicy};
use crate::interpreter::{classify, translate_identity, IdentityClass, DEFAULT_EPS_CLASS};
use crate::matching::{
    estimate_fitness_detailed, realize_matching, FitnessMode, FitnessVector, MatchingResult,
};
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitnessBackend {
    Analytic,
    Counts,
    #[default]
    MonteCarlo,
}

impl FitnessBackend {
    pub fn as_str(self) -> &'static str {
        match self {
            FitnessBackend::Analytic => "analytic",
            FitnessBackend::Counts => "counts",
            FitnessBackend::MonteCarlo => "montecarlo",
        }
    }
}

impl std::str::FromStr for FitnessBackend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "analytic" => Ok(FitnessBackend::Analytic),
            "counts" => Ok(FitnessBackend::Counts),
            "montecarlo" => Ok(FitnessBackend::MonteCarlo),
            other => Err(format!(
                "unknown mode `{other}` (expected analytic, counts or montecarlo)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub agents: usize,
    pub segment_len: usize,
    pub periods: usize,
    pub replications: usize,
    pub p_mut: f64,
    pub p_cross: f64,
    pub bin_size: f64,
    pub eps_class: f64,
    pub rounds: usize,
    pub init: InitPolicy,
    pub mode: FitnessBackend,
    pub master_seed: u64,
}

impl Default for SimConfig {
    /// Desk-scale defaults; the full-scale runs use 300 agents, 1000
    /// periods and 1000 replications.
    fn default() -> Self {
        Self {
            agents: 100,
            segment_len: 10,
            periods: 600,
            replications: 30,
            p_mut: 0.001,
            p_cross: 0.001,
            bin_size: 0.1,
            eps_class: DEFAULT_EPS_CLASS,
            rounds: 32,
            init: InitPolicy::BinaryOrigin,
            mode: FitnessBackend::MonteCarlo,
            master_seed: 20_240_901,
        }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.agents < 2 || self.agents % 2 != 0 {
            return Err(config_error(
                "agents",
                format!("N = {} must be even and at least 2", self.agents),
            ));
        }
        if self.segment_len == 0 || self.segment_len > crate::genome::MAX_SEGMENT_LEN {
            return Err(config_error(
                "segment_length",
                format!("{} must be in 1..=63", self.segment_len),
            ));
        }
        if self.replications == 0 {
            return Err(config_error("replications", "must be at least 1"));
        }
        for (key, p) in [("pmut", self.p_mut), ("pcross", self.p_cross)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(config_error(key, format!("{p} is not a probability")));
            }
        }
        if !(self.bin_size >= 0.0 && self.bin_size.is_finite()) {
            return Err(config_error(
                "bin_size",
                format!("{} must be non-negative", self.bin_size),
            ));
        }
        if !(self.eps_class > 0.0 && self.eps_class < 0.5) {
            return Err(config_error(
                "eps_class",
                format!("{} must lie in (0, 0.5)", self.eps_class),
            ));
        }
        if self.mode == FitnessBackend::MonteCarlo && self.rounds == 0 {
            return Err(config_error("rounds", "Monte Carlo needs at least 1 round"));
        }
        Ok(())
    }

    pub fn evolution_params(&self) -> EvolutionParams {
        EvolutionParams {
            p_cross: self.p_cross,
            p_mut: self.p_mut,
            segment_len: self.segment_len,
        }
    }

    pub fn fitness_mode(&self) -> FitnessMode {
        match self.mode {
            FitnessBackend::Analytic => FitnessMode::AnalyticBinary,
            FitnessBackend::Counts => FitnessMode::Counts,
            FitnessBackend::MonteCarlo => FitnessMode::MonteCarlo {
                rounds: self.rounds,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationMetrics {
    pub gen: usize,
    pub prop_zero: f64,
    pub prop_one: f64,
    pub prop_nonbinary: f64,
    /// Mean estimated matching probability per individual.
    pub match_prob: f64,
    /// Unmatched individuals in the designated realized matching.
    pub unmatched: usize,
    pub mean_fitness: f64,
}

/// Intra-generation state: identities, fitness and the designated matching.
#[derive(Debug, Clone)]
pub struct GenerationState {
    pub classes: Vec<IdentityClass>,
    pub fitness: FitnessVector,
    pub matching: MatchingResult,
}

impl GenerationState {
    pub fn metrics(&self, gen: usize) -> GenerationMetrics {
        let n = self.classes.len();
        let count =
            |pred: fn(&IdentityClass) -> bool| self.classes.iter().filter(|c| pred(c)).count();
        let zeros = count(|c| *c == IdentityClass::Zero);
        let ones = count(|c| *c == IdentityClass::One);
        let nonbinary = n - zeros - ones;
        let share = |k: usize| k as f64 / n as f64;
        let mean_fitness = self.fitness.mean();
        GenerationMetrics {
            gen,
            prop_zero: share(zeros),
            prop_one: share(ones),
            prop_nonbinary: share(nonbinary),
            match_prob: mean_fitness,
            unmatched: self.matching.unmatched.len(),
            mean_fitness,
        }
    }
}

/// Decodes, translates, classifies, matches and scores one population.
pub fn evaluate_generation<R: Rng + ?Sized>(
    chromosomes: &[Chromosome],
    config: &SimConfig,
    rng: &mut R,
) -> Result<GenerationState> {
    let classes = chromosomes
        .iter()
        .map(|c| translate_identity(&decode(c)).map(|xi| classify(xi, config.eps_class)))
        .collect::<Result<Vec<_>>>()?;
    let estimate =
        estimate_fitness_detailed(&classes, config.bin_size, config.fitness_mode(), rng)?;
    let matching = match estimate.first_matching {
        Some(m) => m,
        None => realize_matching(&classes, config.bin_size, rng),
    };
    Ok(GenerationState {
        classes,
        fitness: estimate.fitness,
        matching,
    })
}

/// Applies the genetic operators and redraws the type segments.
pub fn next_generation<R: Rng + ?Sized>(
    chromosomes: &[Chromosome],
    fitness: &FitnessVector,
    config: &SimConfig,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let params = config.evolution_params();
    let pool = tournament_reproduce(chromosomes, fitness, rng)?;
    let pool = crossover_population(&pool, &params, rng)?;
    pool.iter()
        .map(|c| {
            let child = mutate(c, &params, rng);
            let t = fresh_type_segment(config.segment_len, rng)?;
            child.with_type_segment(&t)
        })
        .collect()
}

pub fn run_generation<R: Rng + ?Sized>(
    chromosomes: &[Chromosome],
    config: &SimConfig,
    gen: usize,
    rng: &mut R,
) -> Result<(Vec<Chromosome>, GenerationMetrics)> {
    let attach = |e: Error| Error::Generation {
        generation: gen,
        source: Box::new(e),
    };
    let state = evaluate_generation(chromosomes, config, rng).map_err(attach)?;
    let metrics = state.metrics(gen);
    let next = next_generation(chromosomes, &state.fitness, config, rng).map_err(attach)?;
    Ok((next, metrics))
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 key for replication `rep` under `master_seed`.
pub fn replication_seed(master_seed: u64, rep: u64) -> [u8; 32] {
    let mut state = mix64(master_seed) ^ mix64(rep ^ 0xD1B5_4A32_D192_ED03);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    key
}

pub fn replication_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(replication_seed(master_seed, rep))
}

pub fn run_simulation(config: &SimConfig, rep: u64) -> Result<Vec<GenerationMetrics>> {
    config.validate()?;
    let attach = |e: Error| Error::Replication {
        replication: rep,
        source: Box::new(e),
    };
    let mut rng = replication_rng(config.master_seed, rep);
    let mut population =
        initial_population(config.agents, config.segment_len, config.init, &mut rng)
            .map_err(attach)?;
    let mut series = Vec::with_capacity(config.periods);
    for gen in 0..config.periods {
        let (next, metrics) = run_generation(&population, config, gen, &mut rng).map_err(attach)?;
        series.push(metrics);
        population = next;
    }
    Ok(series)
}

/// Per-generation medians across replications. `unmatched` becomes real
/// valued because even replication counts average the two middle values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianMetrics {
    pub gen: usize,
    pub prop_zero: f64,
    pub prop_one: f64,
    pub prop_nonbinary: f64,
    pub match_prob: f64,
    pub unmatched: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutput {
    /// Indexed by replication.
    pub raw: Vec<Vec<GenerationMetrics>>,
    pub median: Vec<MedianMetrics>,
}

pub fn median_series(raw: &[Vec<GenerationMetrics>]) -> Vec<MedianMetrics> {
    let periods = raw.iter().map(Vec::len).min().unwrap_or(0);
    (0..periods)
        .map(|g| {
            let column = |f: fn(&GenerationMetrics) -> f64| {
                median(&raw.iter().map(|s| f(&s[g])).collect::<Vec<_>>())
            };
            MedianMetrics {
                gen: g,
                prop_zero: column(|m| m.prop_zero),
                prop_one: column(|m| m.prop_one),
                prop_nonbinary: column(|m| m.prop_nonbinary),
                match_prob: column(|m| m.match_prob),
                unmatched: column(|m| m.unmatched as f64),
                mean_fitness: column(|m| m.mean_fitness),
            }
        })
        .collect()
}

/// Runs every replication, on at most `threads` workers when given.
pub fn run_replications(config: &SimConfig, threads: Option<usize>) -> Result<ReplicationOutput> {
    config.validate()?;
    let run = || {
        (0..config.replications as u64)
            .into_par_iter()
            .map(|rep| run_simulation(config, rep))
            .collect::<Result<Vec<_>>>()
    };
    let raw = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let median = median_series(&raw);
    Ok(ReplicationOutput { raw, median })
}
