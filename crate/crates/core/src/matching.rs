//! Matching preferences, realized pairings and fitness.
//!
//! Binary identities strictly prefer the opposite binary identity. A
//! nonbinary identity `o` accepts any identity within `[o - b, o + b]`. A
//! match needs acceptance on both sides, so nonbinary and binary individuals
//! never pair with each other.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::interpreter::IdentityClass;

pub fn prefers(from: IdentityClass, to: IdentityClass, b: f64) -> bool {
    match from {
        IdentityClass::Zero => to == IdentityClass::One,
        IdentityClass::One => to == IdentityClass::Zero,
        IdentityClass::Nonbinary(o) => (to.value() - o).abs() <= b,
    }
}

pub fn mutual(i: IdentityClass, j: IdentityClass, b: f64) -> bool {
    prefers(i, j, b) && prefers(j, i, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchingResult {
    /// Each pair stored with the smaller index first.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched: Vec<usize>,
}

impl MatchingResult {
    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Per-index matched flags.
    pub fn matched_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &(i, j) in &self.pairs {
            mask[i] = true;
            mask[j] = true;
        }
        mask
    }

    /// Checks coverage, mutual compatibility and maximality against `pop`.
    pub fn validate(&self, pop: &[IdentityClass], b: f64) -> std::result::Result<(), String> {
        let n = pop.len();
        let mut seen = vec![0u8; n];
        for &(i, j) in &self.pairs {
            if i == j || i >= n || j >= n {
                return Err(format!("bad pair ({i}, {j})"));
            }
            if !mutual(pop[i], pop[j], b) {
                return Err(format!("pair ({i}, {j}) is not mutually compatible"));
            }
            seen[i] += 1;
            seen[j] += 1;
        }
        for &i in &self.unmatched {
            if i >= n {
                return Err(format!("unmatched index {i} out of range"));
            }
            seen[i] += 1;
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            return Err(format!("index {i} appears {} times", seen[i]));
        }
        for (k, &i) in self.unmatched.iter().enumerate() {
            for &j in &self.unmatched[k + 1..] {
                if mutual(pop[i], pop[j], b) {
                    return Err(format!("unmatched {i} and {j} are compatible"));
                }
            }
        }
        Ok(())
    }
}

/// Uniformly random greedy maximal matching.
///
/// Individuals are visited in a random order; each one still free picks a
/// uniformly random free, mutually compatible partner if any exists.
pub fn realize_matching<R: Rng + ?Sized>(
    pop: &[IdentityClass],
    b: f64,
    rng: &mut R,
) -> MatchingResult {
    let n = pop.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut candidates = Vec::with_capacity(n);
    let mut pairs = Vec::with_capacity(n / 2);

    for &i in &order {
        if partner[i].is_some() {
            continue;
        }
        candidates.clear();
        candidates.extend(
            (0..n).filter(|&j| j != i && partner[j].is_none() && mutual(pop[i], pop[j], b)),
        );
        if let Some(&j) = candidates.choose(rng) {
            partner[i] = Some(j);
            partner[j] = Some(i);
            pairs.push((i.min(j), i.max(j)));
        }
    }

    let unmatched = (0..n).filter(|&i| partner[i].is_none()).collect();
    MatchingResult { pairs, unmatched }
}

/// Matching probability of an identity with `n_own` members whose
/// compatible counterpart has `n_partner` members.
pub fn fitness_binary_counts(n_own: usize, n_partner: usize) -> f64 {
    if n_partner == 0 || n_own == 0 {
        0.0
    } else if n_own <= n_partner {
        1.0
    } else {
        n_partner as f64 / n_own as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMode {
    /// Closed-form binary fitness; fails if any nonbinary is present.
    AnalyticBinary,
    /// Count formula applied per individual: own count is the number of
    /// individuals with exactly the same identity, partner count the number
    /// of other individuals with mutual preference.
    Counts,
    /// Fraction of `rounds` random maximal matchings in which the
    /// individual is paired.
    MonteCarlo { rounds: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitnessVector(pub Vec<f64>);

impl FitnessVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

impl std::ops::Index<usize> for FitnessVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Fitness together with the first realized matching, if any was drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessEstimate {
    pub fitness: FitnessVector,
    pub first_matching: Option<MatchingResult>,
}

pub fn estimate_fitness<R: Rng + ?Sized>(
    pop: &[IdentityClass],
    b: f64,
    mode: FitnessMode,
    rng: &mut R,
) -> Result<FitnessVector> {
    estimate_fitness_detailed(pop, b, mode, rng).map(|e| e.fitness)
}

pub fn estimate_fitness_detailed<R: Rng + ?Sized>(
    pop: &[IdentityClass],
    b: f64,
    mode: FitnessMode,
    rng: &mut R,
) -> Result<FitnessEstimate> {
    match mode {
        FitnessMode::AnalyticBinary => {
            let nonbinary = pop.iter().filter(|c| !c.is_binary()).count();
            if nonbinary > 0 {
                return Err(Error::ModeMismatch { nonbinary });
            }
            let zeros = pop.iter().filter(|&&c| c == IdentityClass::Zero).count();
            let ones = pop.len() - zeros;
            let fit_zero = fitness_binary_counts(zeros, ones);
            let fit_one = fitness_binary_counts(ones, zeros);
            let fitness = pop
                .iter()
                .map(|&c| {
                    if c == IdentityClass::Zero {
                        fit_zero
                    } else {
                        fit_one
                    }
                })
                .collect();
            Ok(FitnessEstimate {
                fitness: FitnessVector(fitness),
                first_matching: None,
            })
        }
        FitnessMode::Counts => {
            let n = pop.len();
            let fitness = (0..n)
                .map(|i| {
                    let own = pop.iter().filter(|&&c| c == pop[i]).count();
                    let partners = (0..n)
                        .filter(|&j| j != i && mutual(pop[i], pop[j], b))
                        .count();
                    fitness_binary_counts(own, partners)
                })
                .collect();
            Ok(FitnessEstimate {
                fitness: FitnessVector(fitness),
                first_matching: None,
            })
        }
        FitnessMode::MonteCarlo { rounds } => {
            if rounds == 0 {
                return Err(Error::OutOfRange {
                    name: "rounds",
                    value: 0.0,
                    range: ">= 1",
                });
            }
            let n = pop.len();
            let mut hits = vec![0usize; n];
            let mut first = None;
            for round in 0..rounds {
                let m = realize_matching(pop, b, rng);
                for &(i, j) in &m.pairs {
                    hits[i] += 1;
                    hits[j] += 1;
                }
                if round == 0 {
                    first = Some(m);
                }
            }
            let fitness = hits.iter().map(|&h| h as f64 / rounds as f64).collect();
            Ok(FitnessEstimate {
                fitness: FitnessVector(fitness),
                first_matching: first,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use IdentityClass::{Nonbinary, One, Zero};

    fn binary_pop(zeros: usize, ones: usize) -> Vec<IdentityClass> {
        std::iter::repeat(Zero)
            .take(zeros)
            .chain(std::iter::repeat(One).take(ones))
            .collect()
    }

    #[test]
    fn preference_examples() {
        assert!(prefers(Zero, One, 0.0));
        assert!(prefers(One, Zero, 0.7));
        assert!(!prefers(Zero, Nonbinary(0.9), 0.5));
        assert!(!prefers(Zero, Zero, 1.0));
        assert!(prefers(Nonbinary(0.50), Nonbinary(0.52), 0.05));
        assert!(prefers(Nonbinary(0.02), Zero, 0.05));
    }

    #[test]
    fn mutual_examples() {
        assert!(mutual(Zero, One, 0.0));
        assert!(!mutual(Nonbinary(0.02), Zero, 0.05));
        assert!(mutual(Nonbinary(0.3), Nonbinary(0.3), 0.0));
        assert!(!mutual(Nonbinary(0.3), Nonbinary(0.5), 0.1));
    }

    #[test]
    fn matching_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = realize_matching(&binary_pop(2, 2), 0.1, &mut rng);
        assert_eq!((m.pairs.len(), m.unmatched.len()), (2, 0));

        let m = realize_matching(&binary_pop(5, 0), 0.1, &mut rng);
        assert_eq!((m.pairs.len(), m.unmatched.len()), (0, 5));

        let pop = binary_pop(2, 1);
        let m = realize_matching(&pop, 0.1, &mut rng);
        assert_eq!(m.pairs.len(), 1);
        assert_eq!(m.unmatched.len(), 1);
        assert_eq!(pop[m.unmatched[0]], Zero);
    }

    #[test]
    fn never_self_matched() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = realize_matching(&[Nonbinary(0.4)], 0.5, &mut rng);
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched, vec![0]);
    }

    #[test]
    fn fitness_count_examples() {
        assert_eq!(fitness_binary_counts(100, 150), 1.0);
        assert_eq!(fitness_binary_counts(200, 100), 0.5);
        assert_eq!(fitness_binary_counts(5, 0), 0.0);
        assert_eq!(fitness_binary_counts(7, 7), 1.0);
    }

    #[test]
    fn analytic_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fit = estimate_fitness(
            &binary_pop(150, 150),
            0.1,
            FitnessMode::AnalyticBinary,
            &mut rng,
        )
        .unwrap();
        assert!(fit.0.iter().all(|&f| f == 1.0));

        let fit = estimate_fitness(
            &binary_pop(200, 100),
            0.1,
            FitnessMode::AnalyticBinary,
            &mut rng,
        )
        .unwrap();
        assert_eq!(fit[0], 0.5);
        assert_eq!(fit[250], 1.0);

        let mut pop = binary_pop(3, 3);
        pop.push(Nonbinary(0.5));
        assert!(matches!(
            estimate_fitness(&pop, 0.1, FitnessMode::AnalyticBinary, &mut rng),
            Err(Error::ModeMismatch { nonbinary: 1 })
        ));
    }

    #[test]
    fn monte_carlo_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pop = binary_pop(200, 100);
        let fit = estimate_fitness(
            &pop,
            0.1,
            FitnessMode::MonteCarlo { rounds: 1000 },
            &mut rng,
        )
        .unwrap();
        let zero_mean = fit.0[..200].iter().sum::<f64>() / 200.0;
        assert!((zero_mean - 0.5).abs() < 0.05, "{zero_mean}");
        assert!(fit.0[200..].iter().all(|&f| f == 1.0));

        let fit = estimate_fitness(
            &binary_pop(10, 0),
            0.1,
            FitnessMode::MonteCarlo { rounds: 50 },
            &mut rng,
        )
        .unwrap();
        assert!(fit.0.iter().all(|&f| f == 0.0));

        assert!(
            estimate_fitness(&pop, 0.1, FitnessMode::MonteCarlo { rounds: 0 }, &mut rng).is_err()
        );
    }

    #[test]
    fn counts_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = binary_pop(150, 50);
        let counts = estimate_fitness(&pop, 0.1, FitnessMode::Counts, &mut rng).unwrap();
        let analytic = estimate_fitness(&pop, 0.1, FitnessMode::AnalyticBinary, &mut rng).unwrap();
        assert_eq!(counts, analytic);

        // three mutually compatible nonbinaries each have a partner; the
        // isolated one at 0.9 has none
        let mut pop = binary_pop(2, 2);
        pop.extend([
            Nonbinary(0.3),
            Nonbinary(0.35),
            Nonbinary(0.4),
            Nonbinary(0.9),
        ]);
        let fit = estimate_fitness(&pop, 0.1, FitnessMode::Counts, &mut rng).unwrap();
        assert_eq!(fit.0, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn class() -> impl Strategy<Value = IdentityClass> {
            prop_oneof![Just(Zero), Just(One), (0.001f64..0.999).prop_map(Nonbinary),]
        }

        proptest! {
            #[test]
            fn mutual_is_symmetric(i in class(), j in class(), b in 0.0f64..1.0) {
                prop_assert_eq!(mutual(i, j, b), mutual(j, i, b));
            }

            #[test]
            fn matchings_are_valid(
                pop in proptest::collection::vec(class(), 0..50),
                b in 0.0f64..0.5,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = realize_matching(&pop, b, &mut rng);
                prop_assert_eq!(m.validate(&pop, b), Ok(()));
            }

            #[test]
            fn binary_matchings_have_min_count_pairs(
                zeros in 0usize..40,
                ones in 0usize..40,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = realize_matching(&binary_pop(zeros, ones), 0.2, &mut rng);
                prop_assert_eq!(m.pair_count(), zeros.min(ones));
            }

            #[test]
            fn wider_bins_keep_compatible_pairs(
                i in class(), j in class(), b in 0.0f64..0.5, extra in 0.0f64..0.5,
            ) {
                if mutual(i, j, b) {
                    prop_assert!(mutual(i, j, b + extra));
                }
            }
        }
    }
}
