//! Genetic operators: binary tournament reproduction, single-point
//! crossover on the alpha and beta segments, and bitwise mutation.
//!
//! None of the operators touch the type segment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::genome::{Chromosome, Segment};
use crate::matching::FitnessVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub p_cross: f64,
    pub p_mut: f64,
    pub segment_len: usize,
}

impl EvolutionParams {
    pub fn new(p_cross: f64, p_mut: f64, segment_len: usize) -> Result<Self> {
        for (name, p) in [("p_cross", p_cross), ("p_mut", p_mut)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfRange {
                    name,
                    value: p,
                    range: "[0, 1]",
                });
            }
        }
        Ok(Self {
            p_cross,
            p_mut,
            segment_len,
        })
    }
}

/// Runs `N` binary tournaments with replacement. Strictly higher fitness
/// wins; ties are settled by a fair coin.
pub fn tournament_reproduce<R: Rng + ?Sized>(
    chromosomes: &[Chromosome],
    fitness: &FitnessVector,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let n = chromosomes.len();
    if n == 0 {
        return Err(Error::PopulationSize(0));
    }
    if fitness.len() != n {
        return Err(Error::FitnessLength {
            fitness: fitness.len(),
            population: n,
        });
    }
    Ok((0..n)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            let winner = if fitness[i] > fitness[j] {
                i
            } else if fitness[j] > fitness[i] {
                j
            } else if rng.gen_bool(0.5) {
                i
            } else {
                j
            };
            chromosomes[winner].clone()
        })
        .collect())
}

/// Swaps the alpha and beta tails after position `cut` (1-based, counted
/// from the left of each segment) between two chromosomes.
pub fn crossover_at(c1: &Chromosome, c2: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    let mut a = c1.clone();
    let mut b = c2.clone();
    for seg in [Segment::Alpha, Segment::Beta] {
        let tail_a = &mut a.segment_mut(seg)[cut..];
        let tail_b = &mut b.segment_mut(seg)[cut..];
        tail_a.swap_with_slice(tail_b);
    }
    (a, b)
}

pub fn crossover_pair<R: Rng + ?Sized>(
    c1: &Chromosome,
    c2: &Chromosome,
    params: &EvolutionParams,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let l = c1.segment_len();
    debug_assert_eq!(l, c2.segment_len());
    // With l = 1 there is no interior cut point.
    if l < 2 || !rng.gen_bool(params.p_cross) {
        return (c1.clone(), c2.clone());
    }
    let cut = rng.gen_range(1..l);
    crossover_at(c1, c2, cut)
}

/// Pairs the population at random without replacement and crosses each
/// pair. Offspring take the slots of their parents.
pub fn crossover_population<R: Rng + ?Sized>(
    chromosomes: &[Chromosome],
    params: &EvolutionParams,
    rng: &mut R,
) -> Result<Vec<Chromosome>> {
    let n = chromosomes.len();
    if n % 2 != 0 {
        return Err(Error::PopulationSize(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut out = chromosomes.to_vec();
    for pair in order.chunks_exact(2) {
        let (i, j) = (pair[0], pair[1]);
        let (a, b) = crossover_pair(&chromosomes[i], &chromosomes[j], params, rng);
        out[i] = a;
        out[j] = b;
    }
    Ok(out)
}

pub fn mutate<R: Rng + ?Sized>(
    chromosome: &Chromosome,
    params: &EvolutionParams,
    rng: &mut R,
) -> Chromosome {
    let mut out = chromosome.clone();
    if params.p_mut == 0.0 {
        return out;
    }
    for seg in [Segment::Alpha, Segment::Beta] {
        for bit in out.segment_mut(seg) {
            if rng.gen_bool(params.p_mut) {
                *bit ^= 1;
            }
        }
    }
    out
}
