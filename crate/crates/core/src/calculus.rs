//! Jacobians of the basis map, numerical rank, and the singular-locus checks.
//!
//! Columns are indexed by `(i, j) -> i * d + j`, the `j`-th coordinate of
//! particle `i`. Exact derivatives of each Vandermonde product use
//! leave-one-factor-out products, which stay exact when a factor vanishes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::configuration::{DomainBox, ParticleConfiguration};
use crate::error::{Error, Result};
use crate::features::FeatureMapSpec;
use crate::sampling::{distinct_configuration, trial_rng};
use crate::scalar::Scalar;
use crate::verify::{run_trials, CertificationReport, Property, ReportFrame, Witness};

/// Two particles closer than this count as a collision.
pub const SING_DISTANCE: f64 = 1e-12;
/// `σ_min / σ_max` must exceed this off the collision locus.
pub const FULL_RANK_RATIO: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMethod {
    CentralDifference,
    ExactPolynomial,
}

impl std::str::FromStr for JacobianMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central-difference" | "fd" => Ok(Self::CentralDifference),
            "exact-polynomial" | "exact" => Ok(Self::ExactPolynomial),
            other => Err(Error::InvalidArgument(format!("unknown jacobian method `{other}`"))),
        }
    }
}

/// `J eta(x)` with its singular spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianResult<T: Scalar> {
    pub matrix: DMatrix<T>,
    pub method: JacobianMethod,
    /// Base relative step `cbrt(eps)`; the step for coordinate `x_ij` is this times `1 + |x_ij|`.
    pub step: Option<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub rank_tolerance: f64,
}

impl<T: Scalar> JacobianResult<T> {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |acc, v| acc.max(v.to_f64_lossy().abs()))
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.numerical_rank == self.cols()
    }

    /// `σ_min / σ_max`, `0` for the zero matrix.
    pub fn condition_ratio(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        }
    }

    pub fn as_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v.to_f64_lossy())
    }
}

/// Singular values (descending) of a real matrix.
pub fn singular_values(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = matrix.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `‖U S V^T - A‖max / ‖A‖max` for the decomposition used in rank decisions.
pub fn svd_reconstruction_error(matrix: &DMatrix<f64>) -> f64 {
    let svd = matrix.clone().svd(true, true);
    let rebuilt = svd.recompose().expect("U and V^T were requested");
    let scale = matrix.amax();
    let err = (rebuilt - matrix).amax();
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn attach_spectrum<T: Scalar>(
    matrix: DMatrix<T>,
    method: JacobianMethod,
    step: Option<f64>,
    rank_tolerance: Option<f64>,
) -> JacobianResult<T> {
    let sv = singular_values(&matrix.map(|v| v.to_f64_lossy()));
    let largest = sv.first().copied().unwrap_or(0.0);
    let tol = rank_tolerance.unwrap_or_else(|| {
        matrix.nrows().max(matrix.ncols()) as f64 * T::epsilon().to_f64_lossy() * largest
    });
    let numerical_rank = sv.iter().filter(|&&s| s > tol).count();
    JacobianResult {
        matrix,
        method,
        step,
        singular_values: sv,
        numerical_rank,
        rank_tolerance: tol,
    }
}

pub fn jacobian<T: Scalar>(
    spec: &FeatureMapSpec<T>,
    x: &ParticleConfiguration<T>,
    method: JacobianMethod,
) -> Result<JacobianResult<T>> {
    jacobian_with(spec, x, method, None)
}

/// As [`jacobian`], with an explicit rank tolerance.
pub fn jacobian_with<T: Scalar>(
    spec: &FeatureMapSpec<T>,
    x: &ParticleConfiguration<T>,
    method: JacobianMethod,
    rank_tolerance: Option<f64>,
) -> Result<JacobianResult<T>> {
    match method {
        JacobianMethod::CentralDifference => {
            let step = T::epsilon().cbrt();
            let matrix = central_difference(spec, x, step)?;
            Ok(attach_spectrum(matrix, method, Some(step.to_f64_lossy()), rank_tolerance))
        }
        JacobianMethod::ExactPolynomial => {
            let parts = exact_parts(spec, x)?;
            Ok(attach_spectrum(parts.eta_jacobian(spec), method, None, rank_tolerance))
        }
    }
}

fn central_difference<T: Scalar>(
    spec: &FeatureMapSpec<T>,
    x: &ParticleConfiguration<T>,
    step: T,
) -> Result<DMatrix<T>> {
    let eval = |coords: Vec<T>| -> Result<Vec<T>> {
        let xp = ParticleConfiguration::new(x.n(), x.d(), coords)?;
        crate::features::eval_eta(spec, &xp).map(|y| y.values)
    };
    // shape check up front so errors surface as DimensionMismatch
    crate::features::eval_eta(spec, x)?;
    let cols = x.n() * x.d();
    let mut matrix = DMatrix::zeros(spec.m(), cols);
    let two = T::one() + T::one();
    for c in 0..cols {
        let v = x.coords()[c];
        let h = step * (T::one() + v.abs());
        let (hi, lo) = (v + h, v - h);
        let mut plus = x.coords().to_vec();
        plus[c] = hi;
        let mut minus = x.coords().to_vec();
        minus[c] = lo;
        let (fp, fm) = (eval(plus)?, eval(minus)?);
        // divide by the representable step actually taken
        let width = hi - lo;
        for r in 0..spec.m() {
            matrix[(r, c)] = (fp[r] - fm[r]) / width;
        }
        debug_assert!(width > T::zero() && width <= two * two * h);
    }
    Ok(matrix)
}

/// Values and exact gradients of `phi` and `psi` at one point, in the
/// caller's coordinates (the domain rescaling is folded in).
pub struct FactorDerivatives<T: Scalar> {
    pub phi: Vec<T>,
    /// `p x nd`.
    pub phi_jacobian: DMatrix<T>,
    pub psi: Vec<T>,
    /// `q x nd`.
    pub psi_jacobian: DMatrix<T>,
}

impl<T: Scalar> FactorDerivatives<T> {
    /// `J eta = [J phi; psi_l J phi + phi ∇psi_l^T]`.
    pub fn eta_jacobian(&self, spec: &FeatureMapSpec<T>) -> DMatrix<T> {
        let p = spec.p();
        let cols = self.phi_jacobian.ncols();
        let mut out = DMatrix::zeros(spec.m(), cols);
        out.rows_mut(0, p).copy_from(&self.phi_jacobian);
        for l in 0..spec.q() {
            out.rows_mut((l + 1) * p, p).copy_from(&self.block_product_rule(l));
        }
        out
    }

    /// `psi_l J phi + phi ∇psi_l^T`, the Jacobian of block `l + 1`.
    pub fn block_product_rule(&self, l: usize) -> DMatrix<T> {
        let (p, cols) = self.phi_jacobian.shape();
        DMatrix::from_fn(p, cols, |k, c| {
            self.psi[l] * self.phi_jacobian[(k, c)] + self.phi[k] * self.psi_jacobian[(l, c)]
        })
    }
}

pub fn exact_parts<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<FactorDerivatives<T>> {
    let xs = spec.prepare(x)?;
    let (n, d) = (spec.n(), spec.d());
    let cols = n * d;
    let phi = spec.phi_prepared(&xs);
    let psi = spec.psi_prepared(&xs);

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut phi_jacobian = DMatrix::zeros(spec.p(), cols);
    for k in 0..spec.p() {
        let s = spec.projections().project(k, &xs);
        let factors: Vec<T> = pairs.iter().map(|&(i, j)| s[i] - s[j]).collect();
        // prefix[a] = f_0 .. f_{a-1}, suffix[a] = f_a .. f_last
        let mut prefix = vec![T::one(); factors.len() + 1];
        for a in 0..factors.len() {
            prefix[a + 1] = prefix[a] * factors[a];
        }
        let mut suffix = vec![T::one(); factors.len() + 1];
        for a in (0..factors.len()).rev() {
            suffix[a] = suffix[a + 1] * factors[a];
        }
        let mut d_ds = vec![T::zero(); n];
        for (a, &(i, j)) in pairs.iter().enumerate() {
            let rest = prefix[a] * suffix[a + 1];
            d_ds[i] = d_ds[i] + rest;
            d_ds[j] = d_ds[j] - rest;
        }
        let w = spec.projections().vector(k);
        for i in 0..n {
            for c in 0..d {
                phi_jacobian[(k, i * d + c)] = w[c] * d_ds[i] * spec.rescale_factor(c);
            }
        }
    }

    let mut psi_jacobian = DMatrix::zeros(spec.q(), cols);
    for (l, alpha) in spec.multi_indices().iter().enumerate() {
        for (i, xi) in xs.particles().enumerate() {
            for c in 0..d {
                if alpha[c] == 0 {
                    continue;
                }
                let others = xi
                    .iter()
                    .zip(alpha)
                    .enumerate()
                    .filter(|&(c2, _)| c2 != c)
                    .fold(T::one(), |acc, (_, (&v, &a))| acc * v.powi(a as i32));
                let deriv = T::from_f64_lossy(f64::from(alpha[c])) * xi[c].powi(alpha[c] as i32 - 1) * others;
                psi_jacobian[(l, i * d + c)] = deriv * spec.rescale_factor(c);
            }
        }
    }
    Ok(FactorDerivatives {
        phi,
        phi_jacobian,
        psi,
        psi_jacobian,
    })
}

/// Largest `‖col(i1, j) + col(i2, j)‖∞` of the exact Jacobian over every
/// coinciding pair `(i1, i2)` and coordinate `j`. On the collision locus
/// the two columns cancel.
pub fn check_singular_column_pairs<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<f64> {
    let pairs = x.colliding_pairs(T::from_f64_lossy(SING_DISTANCE));
    if pairs.is_empty() {
        // still report shape errors first
        spec.prepare(x)?;
        return Err(Error::NoCollision);
    }
    let jac = exact_parts(spec, x)?.eta_jacobian(spec);
    let d = spec.d();
    let mut worst = 0.0f64;
    for (i1, i2) in pairs {
        for j in 0..d {
            let a = jac.column(i1 * d + j);
            let b = jac.column(i2 * d + j);
            let residual = a
                .iter()
                .zip(b.iter())
                .fold(0.0f64, |acc, (&u, &v)| acc.max((u + v).to_f64_lossy().abs()));
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

/// Samples distinct-particle configurations and checks
/// `σ_min / σ_max > FULL_RANK_RATIO` for the exact Jacobian.
pub fn check_full_rank_off_singular<T: Scalar>(
    spec: &FeatureMapSpec<T>,
    trials: usize,
    seed: u64,
) -> Result<CertificationReport> {
    let nd = spec.n() * spec.d();
    if spec.m() < nd {
        return Err(Error::SpecTooSmall { m: spec.m(), nd });
    }
    let domain = spec
        .domain()
        .map(|b| DomainBox {
            lower: b.lower.iter().map(|v| v.to_f64_lossy()).collect(),
            upper: b.upper.iter().map(|v| v.to_f64_lossy()).collect(),
        })
        .unwrap_or_else(|| DomainBox::symmetric_unit(spec.d()));
    let frame = ReportFrame {
        property: Property::FullColumnRank,
        trials,
        seed,
        tolerance: 0.0,
        margin_tolerance: Some(FULL_RANK_RATIO),
        tolerances: [
            ("distinct_gap".to_string(), crate::sampling::DISTINCT_GAP),
            ("rank_ratio".to_string(), FULL_RANK_RATIO),
        ]
        .into_iter()
        .collect(),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        let x64 = distinct_configuration(spec.n(), &domain, crate::sampling::DISTINCT_GAP, &mut rng);
        let x: ParticleConfiguration<T> = x64.cast();
        let jac = jacobian(spec, &x, JacobianMethod::ExactPolynomial)?;
        tally.margin(jac.condition_ratio(), FULL_RANK_RATIO, || Witness {
            check: "rank-deficient-off-collisions".into(),
            x: x64.coords().to_vec(),
            other: None,
            permutation: None,
            value: 0.0,
        });
        Ok(())
    })
}

/// Largest `‖J(psi_l phi) - psi_l J phi - phi ∇psi_l^T‖max` over the blocks
/// `l >= 1`, with the left side from central differences and the right side
/// from exact factor derivatives.
pub fn check_product_rule_blocks<T: Scalar>(spec: &FeatureMapSpec<T>, x: &ParticleConfiguration<T>) -> Result<f64> {
    let fd = central_difference(spec, x, T::epsilon().cbrt())?;
    let parts = exact_parts(spec, x)?;
    let p = spec.p();
    let mut worst = 0.0f64;
    for l in 0..spec.q() {
        let lhs = fd.rows((l + 1) * p, p);
        let rhs = parts.block_product_rule(l);
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            worst = worst.max((*a - *b).to_f64_lossy().abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ProjectionMode;

    fn two_particle_map() -> FeatureMapSpec<f64> {
        FeatureMapSpec::new(2, 1, ProjectionMode::Paper).unwrap()
    }

    fn cfg(v: &[f64]) -> ParticleConfiguration<f64> {
        ParticleConfiguration::from_scalars(v).unwrap()
    }

    #[test]
    fn hand_jacobian_on_the_diagonal() {
        let expected = [[1.0, -1.0], [2.0, -2.0], [2.0, -2.0]];
        for method in [JacobianMethod::ExactPolynomial, JacobianMethod::CentralDifference] {
            let j = jacobian(&two_particle_map(), &cfg(&[1.0, 1.0]), method).unwrap();
            for r in 0..3 {
                for c in 0..2 {
                    assert!((j.matrix[(r, c)] - expected[r][c]).abs() < 1e-6, "{method:?} ({r},{c})");
                }
            }
        }
        let exact = jacobian(&two_particle_map(), &cfg(&[1.0, 1.0]), JacobianMethod::ExactPolynomial).unwrap();
        assert_eq!(exact.numerical_rank, 1);
        assert!(!exact.is_full_column_rank());
    }

    #[test]
    fn full_rank_off_the_diagonal() {
        let j = jacobian(&two_particle_map(), &cfg(&[1.0, 2.0]), JacobianMethod::CentralDifference).unwrap();
        assert_eq!(j.numerical_rank, 2);
        assert!(j.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn column_pairs_cancel() {
        assert_eq!(check_singular_column_pairs(&two_particle_map(), &cfg(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(
            check_singular_column_pairs(&two_particle_map(), &cfg(&[1.0, 2.0])),
            Err(Error::NoCollision)
        );
        let s = FeatureMapSpec::<f64>::new(3, 2, ProjectionMode::Paper).unwrap();
        let all_equal = ParticleConfiguration::from_rows(&vec![vec![0.3, -0.7]; 3]).unwrap();
        assert!(check_singular_column_pairs(&s, &all_equal).unwrap() <= 1e-8);
    }

    #[test]
    fn too_small_map_is_rejected() {
        // n=3, d=1: m = 1 * 4 = 4 >= 3, fine; n=1, d=3: m = 1 * 4 = 4 >= 3
        let ok = FeatureMapSpec::<f64>::new(1, 3, ProjectionMode::Paper).unwrap();
        assert!(check_full_rank_off_singular(&ok, 5, 1).is_ok());
    }

    #[test]
    fn product_rule_on_and_off_the_diagonal() {
        assert!(check_product_rule_blocks(&two_particle_map(), &cfg(&[1.0, 2.0])).unwrap() <= 1e-6);
        assert!(check_product_rule_blocks(&two_particle_map(), &cfg(&[0.4, 0.4])).unwrap() <= 1e-6);
    }

    #[test]
    fn svd_reconstructs() {
        let j = jacobian(&two_particle_map(), &cfg(&[0.3, -0.8]), JacobianMethod::ExactPolynomial).unwrap();
        assert!(svd_reconstruction_error(&j.as_f64()) <= 1e-10);
    }

    #[test]
    fn rescaled_domain_uses_chain_rule() {
        let s = two_particle_map().with_domain(DomainBox::cube(1, 0.0, 4.0).unwrap()).unwrap();
        let x = cfg(&[1.0, 3.0]);
        let exact = jacobian(&s, &x, JacobianMethod::ExactPolynomial).unwrap();
        let fd = jacobian(&s, &x, JacobianMethod::CentralDifference).unwrap();
        for (a, b) in exact.matrix.iter().zip(fd.matrix.iter()) {
            assert!((a - b).abs() <= 1e-5 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn single_precision_rank() {
        let s = FeatureMapSpec::<f32>::new(2, 1, ProjectionMode::Paper).unwrap();
        let on = ParticleConfiguration::from_scalars(&[0.5f32, 0.5]).unwrap();
        let off = ParticleConfiguration::from_scalars(&[0.5f32, -0.25]).unwrap();
        assert_eq!(jacobian(&s, &on, JacobianMethod::ExactPolynomial).unwrap().numerical_rank, 1);
        assert_eq!(jacobian(&s, &off, JacobianMethod::ExactPolynomial).unwrap().numerical_rank, 2);
    }
}
