//! Seeded sampling of particle configurations.
//!
//! Every trial draws from its own ChaCha stream selected by `(seed, trial)`,
//! so results do not depend on how trials are scheduled across threads.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::configuration::{DomainBox, ParticleConfiguration};

/// Minimum pairwise particle distance for "distinct" samples.
pub const DISTINCT_GAP: f64 = 1e-3;

const MAX_REJECTIONS: usize = 10_000;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn uniform_point<R: Rng + ?Sized>(domain: &DomainBox<f64>, rng: &mut R) -> Vec<f64> {
    domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(&lo, &hi)| rng.random_range(lo..=hi))
        .collect()
}

pub fn uniform_configuration<R: Rng + ?Sized>(n: usize, domain: &DomainBox<f64>, rng: &mut R) -> ParticleConfiguration<f64> {
    let coords = (0..n).flat_map(|_| uniform_point(domain, rng)).collect();
    ParticleConfiguration::new(n, domain.dim(), coords).expect("sampled shape is consistent")
}

/// Uniform sample conditioned on every pairwise distance being at least `gap`.
///
/// # Panics
/// If no such sample is found after a large number of rejections, which
/// means `gap` is too large for the domain.
pub fn distinct_configuration<R: Rng + ?Sized>(
    n: usize,
    domain: &DomainBox<f64>,
    gap: f64,
    rng: &mut R,
) -> ParticleConfiguration<f64> {
    for _ in 0..MAX_REJECTIONS {
        let x = uniform_configuration(n, domain, rng);
        if x.min_pairwise_distance().is_none_or(|g| g >= gap) {
            return x;
        }
    }
    panic!("could not place {n} particles with pairwise gap {gap} in the domain");
}

/// Uniform sample with particle `j` overwritten by particle `i` for a random pair `i < j`.
pub fn colliding_configuration<R: Rng + ?Sized>(
    n: usize,
    domain: &DomainBox<f64>,
    rng: &mut R,
) -> (ParticleConfiguration<f64>, (usize, usize)) {
    assert!(n >= 2, "a collision needs at least two particles");
    let x = uniform_configuration(n, domain, rng);
    let mut pair = sample(rng, n, 2).into_vec();
    pair.sort_unstable();
    let (i, j) = (pair[0], pair[1]);
    let d = domain.dim();
    let mut coords = x.coords().to_vec();
    coords.copy_within(i * d..(i + 1) * d, j * d);
    (ParticleConfiguration::new(n, d, coords).expect("same shape"), (i, j))
}
