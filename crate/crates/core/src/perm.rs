//! Particle permutations and their signatures.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A permutation of `{0, .., n-1}` acting on particle rows: `(σ·x)_i = x_{σ(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Returns `None` unless `images` is a rearrangement of `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Self(images))
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self(images)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Self(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `+1` for even permutations, `-1` for odd ones (parity of the inversion count).
    pub fn sign(&self) -> i8 {
        let inversions = self
            .0
            .iter()
            .tuple_combinations()
            .filter(|(a, b)| a > b)
            .count();
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_even(&self) -> bool {
        self.sign() == 1
    }

    /// Permute the rows of a row-major `n x width` buffer.
    pub fn apply_rows<T: Copy>(&self, rows: &[T], width: usize) -> Vec<T> {
        assert_eq!(rows.len(), self.0.len() * width, "row buffer does not match permutation length");
        self.0
            .iter()
            .flat_map(|&src| rows[src * width..(src + 1) * width].iter().copied())
            .collect()
    }
}

/// All `n!` permutations in lexicographic order of their image lists.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    (0..n).permutations(n).map(Permutation).collect()
}

pub fn even_permutations(n: usize) -> Vec<Permutation> {
    all_permutations(n).into_iter().filter(Permutation::is_even).collect()
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signs_of_small_permutations() {
        assert_eq!(Permutation::identity(4).sign(), 1);
        assert_eq!(Permutation::transposition(4, 1, 3).sign(), -1);
        // 3-cycle
        assert_eq!(Permutation::from_images(vec![1, 2, 0]).unwrap().sign(), 1);
    }

    #[test]
    fn enumeration_counts() {
        for n in 1..=5 {
            let all = all_permutations(n);
            assert_eq!(all.len(), factorial(n));
            let even = all.iter().filter(|p| p.is_even()).count();
            assert_eq!(even, if n == 1 { 1 } else { factorial(n) / 2 });
        }
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_none());
        assert!(Permutation::from_images(vec![0, 3, 1]).is_none());
    }

    #[test]
    fn apply_rows_moves_whole_rows() {
        let rows = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = Permutation::from_images(vec![2, 0, 1]).unwrap();
        assert_eq!(p.apply_rows(&rows, 2), vec![5.0, 6.0, 1.0, 2.0, 3.0, 4.0]);
    }
}
