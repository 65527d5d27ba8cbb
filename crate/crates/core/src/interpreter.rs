//! Translation of a decoded genome into an identity on `[0, 1]`.
//!
//! The type value `x` is pushed through the quantile function of
//! `Beta(a, b)` whose shapes come from the alpha and beta genes. Genes of
//! zero sit at the degenerate limits: both zero gives the two-point
//! distribution on `{0, 1}`, one zero collapses onto a single endpoint.

use crate::beta_numerics::{inv_reg_inc_beta, ShapePair, MIN_SHAPE};
use crate::error::{Error, Result};
use crate::genome::DecodedGenome;

/// Default half-width around 0 and 1 counted as binary.
pub const DEFAULT_EPS_CLASS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Below [`MIN_SHAPE`]; handled by the limiting distribution.
    Degenerate,
    Positive(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Identity(f64);

impl Identity {
    pub fn new(xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::OutOfRange {
                name: "xi",
                value: xi,
                range: "[0, 1]",
            });
        }
        Ok(Self(xi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentityClass {
    Zero,
    One,
    Nonbinary(f64),
}

impl IdentityClass {
    /// Position on the identity line; binary classes sit at the endpoints.
    pub fn value(self) -> f64 {
        match self {
            IdentityClass::Zero => 0.0,
            IdentityClass::One => 1.0,
            IdentityClass::Nonbinary(v) => v,
        }
    }

    pub fn is_binary(self) -> bool {
        !matches!(self, IdentityClass::Nonbinary(_))
    }
}

/// The Beta shape carried by a normalized gene: the gene value itself.
pub fn shape_from_gene(g: f64) -> Shape {
    if g >= MIN_SHAPE {
        Shape::Positive(g)
    } else {
        Shape::Degenerate
    }
}

pub fn translate_identity(genome: &DecodedGenome) -> Result<Identity> {
    let x = genome.x;
    let xi = match (
        shape_from_gene(genome.alpha_gene),
        shape_from_gene(genome.beta_gene),
    ) {
        (Shape::Degenerate, Shape::Degenerate) => {
            if x <= 0.5 {
                0.0
            } else {
                1.0
            }
        }
        (Shape::Degenerate, Shape::Positive(_)) => 0.0,
        (Shape::Positive(_), Shape::Degenerate) => 1.0,
        (Shape::Positive(a), Shape::Positive(b)) => inv_reg_inc_beta(x, &ShapePair::new(a, b))?,
    };
    Identity::new(xi)
}

/// Buckets an identity; `eps_class` must lie in `(0, 0.5)`.
pub fn classify(identity: Identity, eps_class: f64) -> IdentityClass {
    debug_assert!(eps_class > 0.0 && eps_class < 0.5);
    let xi = identity.value();
    if xi <= eps_class {
        IdentityClass::Zero
    } else if xi >= 1.0 - eps_class {
        IdentityClass::One
    } else {
        IdentityClass::Nonbinary(xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{decode, initial_population, InitPolicy};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn genome(x: f64, alpha_gene: f64, beta_gene: f64) -> DecodedGenome {
        DecodedGenome {
            x,
            alpha_gene,
            beta_gene,
        }
    }

    #[test]
    fn shape_examples() {
        assert_eq!(shape_from_gene(1.0), Shape::Positive(1.0));
        assert_eq!(shape_from_gene(0.0), Shape::Degenerate);
        assert_eq!(shape_from_gene(0.5), Shape::Positive(0.5));
    }

    #[test]
    fn translate_examples() {
        assert_eq!(
            translate_identity(&genome(0.3, 0.0, 0.0)).unwrap().value(),
            0.0
        );
        assert_eq!(
            translate_identity(&genome(0.7, 0.0, 0.0)).unwrap().value(),
            1.0
        );
        let mid = translate_identity(&genome(0.5, 1.0, 1.0)).unwrap().value();
        assert!((mid - 0.5).abs() < 1e-12);
        let v = translate_identity(&genome(0.7, 1.0, 1.0)).unwrap().value();
        assert!((v - 0.7).abs() < 1e-12);
    }

    #[test]
    fn one_sided_degeneracy_is_a_point_mass() {
        for x in [0.0, 0.2, 0.9, 1.0] {
            assert_eq!(
                translate_identity(&genome(x, 0.0, 0.4)).unwrap().value(),
                0.0
            );
            assert_eq!(
                translate_identity(&genome(x, 0.4, 0.0)).unwrap().value(),
                1.0
            );
        }
    }

    #[test]
    fn boundary_types_are_exact() {
        assert_eq!(
            translate_identity(&genome(0.0, 0.3, 0.8)).unwrap().value(),
            0.0
        );
        assert_eq!(
            translate_identity(&genome(1.0, 0.3, 0.8)).unwrap().value(),
            1.0
        );
    }

    #[test]
    fn classify_examples() {
        let eps = DEFAULT_EPS_CLASS;
        assert_eq!(
            classify(Identity::new(0.0).unwrap(), eps),
            IdentityClass::Zero
        );
        assert_eq!(
            classify(Identity::new(1.0).unwrap(), eps),
            IdentityClass::One
        );
        assert_eq!(
            classify(Identity::new(0.5).unwrap(), eps),
            IdentityClass::Nonbinary(0.5)
        );
        assert_eq!(
            classify(Identity::new(0.001).unwrap(), eps),
            IdentityClass::Zero
        );
        assert_eq!(
            classify(Identity::new(0.999).unwrap(), eps),
            IdentityClass::One
        );
        assert!(Identity::new(1.5).is_err());
    }

    #[test]
    fn monotone_in_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let a = rng.gen_range(1e-3..1.0);
            let b = rng.gen_range(1e-3..1.0);
            let mut prev = 0.0;
            for i in 0..=100 {
                let xi = translate_identity(&genome(i as f64 / 100.0, a, b))
                    .unwrap()
                    .value();
                assert!(xi >= prev, "a={a} b={b} i={i}");
                prev = xi;
            }
        }
    }

    #[test]
    fn binary_origin_is_bernoulli_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut zeros = 0usize;
        let mut total = 0usize;
        for _ in 0..100 {
            let pop = initial_population(100, 10, InitPolicy::BinaryOrigin, &mut rng).unwrap();
            for c in &pop {
                let class = classify(translate_identity(&decode(c)).unwrap(), DEFAULT_EPS_CLASS);
                assert!(class.is_binary());
                zeros += usize::from(class == IdentityClass::Zero);
                total += 1;
            }
        }
        let share = zeros as f64 / total as f64;
        assert!((0.45..=0.55).contains(&share), "zero share {share}");
    }
}
