//! Particle configurations `x = (x_1, .., x_n)` with `x_i` in `R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::{max_abs, Scalar};

/// Axis-aligned compact box `[lower_j, upper_j]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DomainBox<T: Scalar> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> DomainBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "domain box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::InvalidArgument(format!(
                "domain box coordinate {j} has lower >= upper"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` in every one of `d` coordinates.
    pub fn cube(d: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    /// `[-1, 1]^d`.
    pub fn symmetric_unit(d: usize) -> Self {
        Self::cube(d, -T::one(), T::one()).expect("[-1, 1] is a valid interval")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, point: &[T]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Affine map of coordinate `j` onto `[-1, 1]`.
    pub fn to_unit(&self, j: usize, v: T) -> T {
        let two = T::one() + T::one();
        two * (v - self.lower[j]) / (self.upper[j] - self.lower[j]) - T::one()
    }
}

/// A point of `(R^d)^n`, stored row-major: row `i` is particle `x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ParticleConfiguration<T: Scalar> {
    n: usize,
    d: usize,
    coords: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_box: Option<DomainBox<T>>,
}

impl<T: Scalar> ParticleConfiguration<T> {
    pub fn new(n: usize, d: usize, coords: Vec<T>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "configuration needs n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if coords.len() != n * d {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates for n={n}, d={d}, got {}",
                n * d,
                coords.len()
            )));
        }
        Ok(Self {
            n,
            d,
            coords,
            domain_box: None,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("ragged particle rows".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    /// One-dimensional particles, `d = 1`.
    pub fn from_scalars(values: &[T]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    /// Attach a domain box; every particle must lie inside it.
    pub fn with_domain(mut self, domain: DomainBox<T>) -> Result<Self> {
        if domain.dim() != self.d {
            return Err(Error::InvalidArgument(format!(
                "domain box has dimension {}, particles have d={}",
                domain.dim(),
                self.d
            )));
        }
        if let Some(i) = (0..self.n).find(|&i| !domain.contains(self.particle(i))) {
            return Err(Error::DomainViolation(format!(
                "particle {i} lies outside the declared domain box"
            )));
        }
        self.domain_box = Some(domain);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn domain_box(&self) -> Option<&DomainBox<T>> {
        self.domain_box.as_ref()
    }

    pub fn particle(&self, i: usize) -> &[T] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn particles(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.d)
    }

    /// `σ·x`, i.e. particle `i` of the result is particle `σ(i)` of `self`.
    pub fn permuted(&self, sigma: &Permutation) -> Self {
        assert_eq!(sigma.len(), self.n, "permutation length differs from particle count");
        Self {
            n: self.n,
            d: self.d,
            coords: sigma.apply_rows(&self.coords, self.d),
            domain_box: self.domain_box.clone(),
        }
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.coords)
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        self.particle(i)
            .iter()
            .zip(self.particle(j))
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt()
    }

    /// Smallest Euclidean distance between two distinct particles; `None` for `n = 1`.
    pub fn min_pairwise_distance(&self) -> Option<T> {
        let mut best: Option<T> = None;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let dist = self.distance(i, j);
                best = Some(best.map_or(dist, |b| if dist < b { dist } else { b }));
            }
        }
        best
    }

    /// First pair `i < j` with identical rows or distance at most `tolerance`.
    pub fn colliding_pair(&self, tolerance: T) -> Option<(usize, usize)> {
        self.colliding_pairs(tolerance).into_iter().next()
    }

    pub fn colliding_pairs(&self, tolerance: T) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.particle(i) == self.particle(j) || self.distance(i, j) <= tolerance {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Same coordinates in another scalar type.
    pub fn cast<U: Scalar>(&self) -> ParticleConfiguration<U> {
        let conv = |v: &T| U::from_f64_lossy(v.to_f64_lossy());
        ParticleConfiguration {
            n: self.n,
            d: self.d,
            coords: self.coords.iter().map(conv).collect(),
            domain_box: self.domain_box.as_ref().map(|b| DomainBox {
                lower: b.lower.iter().map(conv).collect(),
                upper: b.upper.iter().map(conv).collect(),
            }),
        }
    }
}
