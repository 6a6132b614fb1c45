//! The anti-symmetric basis map `eta = (phi, psi_1 phi, .., psi_q phi)`.
//!
//! `phi_k` is the Vandermonde product of the particles projected onto `w_k`,
//! using the sign convention `prod_{i<j} (s_i - s_j)`. `psi` collects the
//! multi-symmetric power sums `sum_i prod_j x_ij^{alpha_j}` over every
//! multi-index with `1 <= |alpha| <= n`, ordered by total degree and then
//! lexicographically.

use std::borrow::Cow;
use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::{DomainBox, ParticleConfiguration};
use crate::error::{Error, Result};
use crate::geometry::{build_projection_set, ProjectionMode, ProjectionSet};
use crate::scalar::Scalar;

/// Multi-index `alpha` in `N^d`.
pub type MultiIndex = Vec<u32>;

/// Lightweight identity of a feature map, enough to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRef {
    pub n: usize,
    pub d: usize,
    pub mode: ProjectionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBox<f64>>,
}

/// Static shape of `eta` together with the projections it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", try_from = "RawFeatureMapSpec<T>")]
pub struct FeatureMapSpec<T: Scalar> {
    n: usize,
    d: usize,
    p: usize,
    q: usize,
    m: usize,
    multi_indices: Vec<MultiIndex>,
    projections: ProjectionSet<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<DomainBox<T>>,
}

#[derive(Deserialize)]
#[serde(bound = "")]
struct RawFeatureMapSpec<T: Scalar> {
    n: usize,
    d: usize,
    p: usize,
    q: usize,
    m: usize,
    multi_indices: Vec<MultiIndex>,
    projections: ProjectionSet<T>,
    #[serde(default)]
    domain: Option<DomainBox<T>>,
}

impl<T: Scalar> TryFrom<RawFeatureMapSpec<T>> for FeatureMapSpec<T> {
    type Error = Error;

    fn try_from(raw: RawFeatureMapSpec<T>) -> Result<Self> {
        let mut spec = Self::with_projections(raw.projections)?;
        if let Some(domain) = raw.domain {
            spec = spec.with_domain(domain)?;
        }
        if (raw.n, raw.d, raw.p, raw.q, raw.m) != (spec.n, spec.d, spec.p, spec.q, spec.m)
            || raw.multi_indices != spec.multi_indices
        {
            return Err(Error::InvalidArgument(
                "stored feature-map counts disagree with its projections".into(),
            ));
        }
        Ok(spec)
    }
}

/// `binom(a, b)` without overflow for the sizes used here.
pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
}

/// Every `alpha` in `N^d` with `1 <= |alpha| <= max_degree`, by degree then lexicographically.
pub fn multi_indices(d: usize, max_degree: usize) -> Vec<MultiIndex> {
    fn compositions(total: u32, parts: usize, prefix: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            compositions(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in 1..=max_degree as u32 {
        compositions(degree, d, &mut Vec::with_capacity(d), &mut out);
    }
    out
}

impl<T: Scalar> FeatureMapSpec<T> {
    pub fn new(n: usize, d: usize, mode: ProjectionMode) -> Result<Self> {
        Self::with_projections(build_projection_set(n, d, mode)?)
    }

    pub fn with_projections(projections: ProjectionSet<T>) -> Result<Self> {
        let (n, d) = (projections.n(), projections.d());
        let multi_indices = multi_indices(d, n);
        let p = projections.p();
        let q = multi_indices.len();
        debug_assert_eq!(q, binomial(n + d, d) - 1);
        Ok(Self {
            n,
            d,
            p,
            q,
            m: p * (q + 1),
            multi_indices,
            projections,
            domain: None,
        })
    }

    /// Declare a compact domain; inputs are then affinely mapped onto `[-1, 1]^d`
    /// before evaluation.
    pub fn with_domain(mut self, domain: DomainBox<T>) -> Result<Self> {
        if domain.dim() != self.d {
            return Err(Error::InvalidArgument(format!(
                "domain box has dimension {}, feature map has d={}",
                domain.dim(),
                self.d
            )));
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn from_ref(spec: &SpecRef) -> Result<Self> {
        let base = Self::new(spec.n, spec.d, spec.mode)?;
        match &spec.domain {
            Some(b) => base.with_domain(DomainBox::new(
                b.lower.iter().map(|&v| T::from_f64_lossy(v)).collect(),
                b.upper.iter().map(|&v| T::from_f64_lossy(v)).collect(),
            )?),
            None => Ok(base),
        }
    }

    pub fn spec_ref(&self) -> SpecRef {
        SpecRef {
            n: self.n,
            d: self.d,
            mode: self.projections.mode(),
            domain: self.domain.as_ref().map(|b| DomainBox {
                lower: b.lower.iter().map(|v| v.to_f64_lossy()).collect(),
                upper: b.upper.iter().map(|v| v.to_f64_lossy()).collect(),
            }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> ProjectionMode {
        self.projections.mode()
    }

    pub fn multi_indices(&self) -> &[MultiIndex] {
        &self.multi_indices
    }

    pub fn projections(&self) -> &ProjectionSet<T> {
        &self.projections
    }

    pub fn domain(&self) -> Option<&DomainBox<T>> {
        self.domain.as_ref()
    }

    /// Number of Vandermonde factors in each `phi_k`.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn check_shape(&self, x: &ParticleConfiguration<T>) -> Result<()> {
        if x.n() != self.n || x.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected_n: self.n,
                expected_d: self.d,
                got_n: x.n(),
                got_d: x.d(),
            });
        }
        Ok(())
    }

    /// Shape-checked input in the coordinates `eta` is evaluated in.
    pub(crate) fn prepare<'a>(&self, x: &'a ParticleConfiguration<T>) -> Result<Cow<'a, ParticleConfiguration<T>>> {
        self.check_shape(x)?;
        Ok(match &self.domain {
            None => Cow::Borrowed(x),
            Some(b) => {
                let coords = x
                    .coords()
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| b.to_unit(idx % self.d, v))
                    .collect();
                Cow::Owned(ParticleConfiguration::new(self.n, self.d, coords)?)
            }
        })
    }

    /// Derivative of the input rescaling for coordinate `j` (1 without a domain box).
    pub(crate) fn rescale_factor(&self, j: usize) -> T {
        match &self.domain {
            None => T::one(),
            Some(b) => (T::one() + T::one()) / (b.upper[j] - b.lower[j]),
        }
    }

    /// Products run over the projections sorted in decreasing order, with the
    /// sign of the sorting permutation applied at the end, so permuting the
    /// particles changes at most the sign bit.
    pub(crate) fn phi_prepared(&self, x: &ParticleConfiguration<T>) -> Vec<T> {
        (0..self.p)
            .map(|k| {
                let s = self.projections.project(k, x);
                let mut order: Vec<usize> = (0..self.n).collect();
                order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(Ordering::Equal));
                let mut prod = T::one();
                for a in 0..self.n {
                    for b in a + 1..self.n {
                        prod = prod * (s[order[a]] - s[order[b]]);
                    }
                }
                if prod == T::zero() {
                    return T::zero();
                }
                if inversion_parity_odd(&order) {
                    -prod
                } else {
                    prod
                }
            })
            .collect()
    }

    /// Power sums accumulate over particles in lexicographic order.
    pub(crate) fn psi_prepared(&self, x: &ParticleConfiguration<T>) -> Vec<T> {
        let mut rows: Vec<&[T]> = x.particles().collect();
        rows.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(u, v)| u.partial_cmp(v).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
        self.multi_indices
            .iter()
            .map(|alpha| {
                rows.iter().fold(T::zero(), |acc, xi| {
                    acc + xi
                        .iter()
                        .zip(alpha)
                        .fold(T::one(), |m, (&c, &a)| m * c.powi(a as i32))
                })
            })
            .collect()
    }

    pub(crate) fn eta_from_parts(&self, phi: &[T], psi: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.m);
        out.extend_from_slice(phi);
        for &s in psi {
            out.extend(phi.iter().map(|&f| s * f));
        }
        out
    }
}

fn inversion_parity_odd(order: &[usize]) -> bool {
    let mut odd = false;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] {
                odd = !odd;
            }
        }
    }
    odd
}

/// `eta(x)` together with the map that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeatureVector<T: Scalar> {
    pub values: Vec<T>,
    pub spec: SpecRef,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Block `l` of the layout: `l = 0` is `phi`, `l >= 1` is `psi_l * phi`.
    pub fn block(&self, l: usize, p: usize) -> &[T] {
        &self.values[l * p..(l + 1) * p]
    }
}

/// The `p` anti-symmetric Vandermonde factors.
pub fn eval_phi<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<Vec<T>> {
    let x = spec.prepare(x)?;
    Ok(spec.phi_prepared(&x))
}

/// The `q` symmetric power sums.
pub fn eval_psi<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<Vec<T>> {
    let x = spec.prepare(x)?;
    Ok(spec.psi_prepared(&x))
}

pub fn eval_eta<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<FeatureVector<T>> {
    let x = spec.prepare(x)?;
    let phi = spec.phi_prepared(&x);
    let psi = spec.psi_prepared(&x);
    Ok(FeatureVector {
        values: spec.eta_from_parts(&phi, &psi),
        spec: spec.spec_ref(),
    })
}

/// Evaluate many configurations in parallel; output order follows input order.
pub fn eval_eta_batch<T: Scalar>(
    spec: &FeatureMapSpec<T>,
    xs: &[ParticleConfiguration<T>],
) -> Result<Vec<FeatureVector<T>>> {
    if let Some((index, err)) = xs
        .iter()
        .enumerate()
        .find_map(|(i, x)| spec.check_shape(x).err().map(|e| (i, e)))
    {
        return Err(Error::BatchElement {
            index,
            source: Box::new(err),
        });
    }
    xs.par_iter().map(|x| eval_eta(spec, x)).collect()
}
