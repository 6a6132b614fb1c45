//! Projection vectors in generic position and separating-projection search.
//!
//! A set of `p` vectors in `R^d` is in generic position when every `d` of
//! them form a basis. Points on the moment curve `(1, t, .., t^{d-1})` with
//! distinct nodes have this property because any `d` of them stack into a
//! nonsingular Vandermonde matrix.

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::configuration::ParticleConfiguration;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unit-norm tolerance for stored projection vectors.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;
/// Minimum `|det|` of any `d x d` subset for generic position.
pub const GENERIC_POSITION_TOLERANCE: f64 = 1e-10;
/// Default collision tolerance on Euclidean particle distance.
pub const DEFAULT_COLLISION_TOLERANCE: f64 = 1e-12;
/// Relative separation tolerance; the absolute value is `this * (1 + max |x_ij|)`.
pub const DEFAULT_SEPARATION_TOLERANCE: f64 = 1e-9;

/// Which projection count to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionMode {
    /// `p = n(n-1)/2 * (d-1) + 1`.
    #[default]
    Paper,
    /// `p = d*n + 1`.
    Improved,
}

impl ProjectionMode {
    pub fn projection_count(self, n: usize, d: usize) -> usize {
        match self {
            ProjectionMode::Paper => n * (n - 1) / 2 * (d - 1) + 1,
            ProjectionMode::Improved => d * n + 1,
        }
    }
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Self::Paper),
            "improved" => Ok(Self::Improved),
            other => Err(Error::InvalidArgument(format!("unknown projection mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProjectionMode::Paper => "paper",
            ProjectionMode::Improved => "improved",
        })
    }
}

/// Ordered unit vectors `w_1, .., w_p` in `R^d`, any `d` of which are independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "RawProjectionSet<T>", into = "RawProjectionSet<T>")]
pub struct ProjectionSet<T: Scalar> {
    n: usize,
    d: usize,
    mode: ProjectionMode,
    vectors: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct RawProjectionSet<T: Scalar> {
    n: usize,
    d: usize,
    mode: ProjectionMode,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawProjectionSet<T>> for ProjectionSet<T> {
    type Error = Error;

    fn try_from(raw: RawProjectionSet<T>) -> Result<Self> {
        let set = Self {
            n: raw.n,
            d: raw.d,
            mode: raw.mode,
            vectors: raw.vectors,
        };
        set.validate_shape()?;
        let tol = T::from_f64_lossy(UNIT_NORM_TOLERANCE.max(T::epsilon().to_f64_lossy() * 8.0));
        if let Some(k) = set.vectors.iter().position(|w| (norm(w) - T::one()).abs() > tol) {
            return Err(Error::InvalidArgument(format!("projection vector {k} is not unit norm")));
        }
        Ok(set)
    }
}

impl<T: Scalar> From<ProjectionSet<T>> for RawProjectionSet<T> {
    fn from(set: ProjectionSet<T>) -> Self {
        Self {
            n: set.n,
            d: set.d,
            mode: set.mode,
            vectors: set.vectors,
        }
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &c| acc + c * c).sqrt()
}

/// Deterministic moment-curve construction with nodes `t_k = k / (p + 1)`.
pub fn build_projection_set<T: Scalar>(n: usize, d: usize, mode: ProjectionMode) -> Result<ProjectionSet<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("need n >= 1 and d >= 1, got n={n}, d={d}")));
    }
    let p = mode.projection_count(n, d);
    let denom = T::from_usize_lossy(p + 1);
    let vectors = (1..=p)
        .map(|k| {
            let t = T::from_usize_lossy(k) / denom;
            let raw: Vec<T> = std::iter::successors(Some(T::one()), |&prev| Some(prev * t))
                .take(d)
                .collect();
            let len = norm(&raw);
            raw.into_iter().map(|c| c / len).collect()
        })
        .collect();
    Ok(ProjectionSet { n, d, mode, vectors })
}

impl<T: Scalar> ProjectionSet<T> {
    /// Wrap user-supplied vectors. They are unit-normalised; the count must
    /// match `mode` and every `d`-subset must be independent.
    pub fn from_vectors(n: usize, mode: ProjectionMode, vectors: Vec<Vec<T>>) -> Result<Self> {
        let d = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|w| w.len() != d) {
            return Err(Error::InvalidArgument("projection vectors have different lengths".into()));
        }
        let vectors = vectors
            .into_iter()
            .enumerate()
            .map(|(k, w)| {
                let len = norm(&w);
                if len == T::zero() {
                    Err(Error::InvalidArgument(format!("projection vector {k} is zero")))
                } else {
                    Ok(w.into_iter().map(|c| c / len).collect())
                }
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        let set = Self { n, d, mode, vectors };
        set.validate_shape()?;
        if set.min_subset_determinant() <= GENERIC_POSITION_TOLERANCE {
            return Err(Error::InvalidArgument(
                "projection vectors are not in generic position".into(),
            ));
        }
        Ok(set)
    }

    fn validate_shape(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidArgument("projection set needs n >= 1 and d >= 1".into()));
        }
        let expected = self.mode.projection_count(self.n, self.d);
        if self.vectors.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{} mode with n={}, d={} needs p={expected} vectors, got {}",
                self.mode,
                self.n,
                self.d,
                self.vectors.len()
            )));
        }
        if self.vectors.iter().any(|w| w.len() != self.d) {
            return Err(Error::InvalidArgument("projection vector of wrong dimension".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.vectors.len()
    }

    pub fn mode(&self) -> ProjectionMode {
        self.mode
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k]
    }

    /// `w_k^T x_i` for every particle.
    pub fn project(&self, k: usize, x: &ParticleConfiguration<T>) -> Vec<T> {
        let w = &self.vectors[k];
        x.particles()
            .map(|xi| w.iter().zip(xi).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// Smallest `|det|` over every `d`-subset, enumerated exhaustively.
    pub fn min_subset_determinant(&self) -> f64 {
        (0..self.p())
            .combinations(self.d)
            .map(|idx| self.subset_determinant(&idx))
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest `|det|` over `samples` random `d`-subsets; for large `p` where
    /// enumeration is too expensive.
    pub fn min_subset_determinant_sampled(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                let mut idx = sample(&mut rng, self.p(), self.d).into_vec();
                idx.sort_unstable();
                self.subset_determinant(&idx)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn subset_determinant(&self, idx: &[usize]) -> f64 {
        let rows: Vec<f64> = idx
            .iter()
            .flat_map(|&k| self.vectors[k].iter().map(|c| c.to_f64_lossy()))
            .collect();
        determinant(rows, self.d).abs()
    }
}

/// Determinant of a row-major `size x size` matrix by partial-pivot elimination.
pub(crate) fn determinant(mut a: Vec<f64>, size: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&r, &s| a[r * size + col].abs().total_cmp(&a[s * size + col].abs()))
            .expect("non-empty pivot range");
        if a[pivot * size + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for c in 0..size {
                a.swap(pivot * size + c, col * size + c);
            }
            det = -det;
        }
        let diag = a[col * size + col];
        det *= diag;
        for r in col + 1..size {
            let factor = a[r * size + col] / diag;
            for c in col..size {
                a[r * size + c] -= factor * a[col * size + c];
            }
        }
    }
    det
}

/// Tolerances for [`find_separating_projection_with`]; `None` selects the default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SeparationTolerances {
    pub collision: Option<f64>,
    pub separation: Option<f64>,
}

/// Smallest index `k` (0-based) whose projection separates every pair of
/// particles, using the default tolerances.
pub fn find_separating_projection<T: Scalar>(w: &ProjectionSet<T>, x: &ParticleConfiguration<T>) -> Result<usize> {
    find_separating_projection_with(w, x, SeparationTolerances::default())
}

pub fn find_separating_projection_with<T: Scalar>(
    w: &ProjectionSet<T>,
    x: &ParticleConfiguration<T>,
    tolerances: SeparationTolerances,
) -> Result<usize> {
    if x.d() != w.d() || x.n() != w.n() {
        return Err(Error::DimensionMismatch {
            expected_n: w.n(),
            expected_d: w.d(),
            got_n: x.n(),
            got_d: x.d(),
        });
    }
    let collision = T::from_f64_lossy(tolerances.collision.unwrap_or(DEFAULT_COLLISION_TOLERANCE));
    if let Some((first, second)) = x.colliding_pair(collision) {
        return Err(Error::CollidingInput { first, second });
    }
    let separation = tolerances
        .separation
        .unwrap_or(DEFAULT_SEPARATION_TOLERANCE * (1.0 + x.max_abs().to_f64_lossy()));
    let sep = T::from_f64_lossy(separation);
    (0..w.p())
        .find(|&k| {
            let s = w.project(k, x);
            s.iter()
                .tuple_combinations()
                .all(|(&a, &b)| (a - b).abs() > sep)
        })
        .ok_or(Error::NoneFound { tolerance: separation })
}
