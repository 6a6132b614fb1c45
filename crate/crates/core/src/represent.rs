//! Odd models `g` with `f ≈ g ∘ eta`, target functions, and the regularity
//! counterexamples of the two-particle map.
//!
//! The model is `g(y) = (h(y) - h(-y)) / 2` with
//! `h(y) = sum_r w_r sin(omega_r . y + b_r)`. Phases are zero, so `h` is
//! already odd and `g = h`; the explicit odd part makes `g(-y) = -g(y)`
//! hold bitwise regardless of how `sin` rounds.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::{DomainBox, ParticleConfiguration};
use crate::error::{Error, Result};
use crate::features::{eval_eta, eval_eta_batch, FeatureMapSpec, SpecRef};
use crate::geometry::{determinant, ProjectionMode};
use crate::perm::{even_permutations, Permutation};
use crate::sampling::{colliding_configuration, distinct_configuration, trial_rng, uniform_configuration, DISTINCT_GAP};
use crate::verify::{run_trials, CertificationReport, Property, ReportFrame, Witness};

/// Largest accepted condition estimate of the ridge system.
pub const MAX_CONDITION: f64 = 1e14;
/// Tolerance on `f` in the fiber-constancy check.
pub const WELL_DEFINED_TOLERANCE: f64 = 1e-10;

/// Single-particle orbital `x -> sin(π ω·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineOrbital {
    pub frequency: Vec<f64>,
}

impl SineOrbital {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let phase: f64 = self.frequency.iter().zip(x).map(|(w, v)| w * v).sum();
        (PI * phase).sin()
    }

    /// `sin(kπ x_1 + π (x_2 + .. + x_d))` for `k = 1..=n`.
    pub fn defaults(n: usize, d: usize) -> Vec<Self> {
        (1..=n)
            .map(|k| {
                let mut frequency = vec![1.0; d];
                frequency[0] = k as f64;
                Self { frequency }
            })
            .collect()
    }
}

pub type CustomFn = Arc<dyn Fn(&ParticleConfiguration<f64>) -> f64 + Send + Sync>;

/// An anti-symmetric target `f`.
#[derive(Clone)]
pub enum TargetFunction {
    /// `det[phi_a(x_b)]` over the given orbitals; `n = orbitals.len()`.
    Slater { d: usize, orbitals: Vec<SineOrbital> },
    /// `|x_1| - |x_2|` on two one-dimensional particles.
    AbsDiff,
    /// `x_1^{4/3} - x_2^{4/3}` on two one-dimensional particles, with the real
    /// power `t^{4/3} = t * cbrt(t)`.
    Pow43Diff,
    Custom {
        name: String,
        n: usize,
        d: usize,
        f: CustomFn,
    },
}

impl fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Slater { d, orbitals } => f
                .debug_struct("Slater")
                .field("d", d)
                .field("orbitals", orbitals)
                .finish(),
            Self::AbsDiff => f.write_str("AbsDiff"),
            Self::Pow43Diff => f.write_str("Pow43Diff"),
            Self::Custom { name, n, d, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("n", n)
                .field("d", d)
                .finish_non_exhaustive(),
        }
    }
}

/// Serializable description of the built-in targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Slater,
    AbsDiff,
    Pow43Diff,
    Zero,
}

impl std::str::FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slater" => Ok(Self::Slater),
            "abs-diff" => Ok(Self::AbsDiff),
            "pow43-diff" => Ok(Self::Pow43Diff),
            "zero" => Ok(Self::Zero),
            other => Err(Error::InvalidArgument(format!("unknown target `{other}`"))),
        }
    }
}

impl TargetFunction {
    /// Slater determinant of the default sine orbitals.
    pub fn slater(n: usize, d: usize) -> Self {
        Self::Slater {
            d,
            orbitals: SineOrbital::defaults(n, d),
        }
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Self::Custom {
            name: "zero".into(),
            n,
            d,
            f: Arc::new(|_| 0.0),
        }
    }

    pub fn from_kind(kind: TargetKind, n: usize, d: usize) -> Result<Self> {
        let target = match kind {
            TargetKind::Slater => Self::slater(n, d),
            TargetKind::AbsDiff => Self::AbsDiff,
            TargetKind::Pow43Diff => Self::Pow43Diff,
            TargetKind::Zero => Self::zero(n, d),
        };
        if (target.n(), target.d()) != (n, d) {
            return Err(Error::InvalidArgument(format!(
                "{kind:?} target is defined for n={}, d={}, not n={n}, d={d}",
                target.n(),
                target.d()
            )));
        }
        Ok(target)
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Slater { orbitals, .. } => orbitals.len(),
            Self::AbsDiff | Self::Pow43Diff => 2,
            Self::Custom { n, .. } => *n,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Slater { d, .. } | Self::Custom { d, .. } => *d,
            Self::AbsDiff | Self::Pow43Diff => 1,
        }
    }

    /// `[-1, 1]^d` for every built-in target.
    pub fn domain(&self) -> DomainBox<f64> {
        DomainBox::symmetric_unit(self.d())
    }
}

/// `t^{4/3}` as the real power `(t^{1/3})^4`.
fn pow43(t: f64) -> f64 {
    t * t.cbrt()
}

pub fn eval_target(t: &TargetFunction, x: &ParticleConfiguration<f64>) -> Result<f64> {
    if x.n() != t.n() || x.d() != t.d() {
        return Err(Error::DimensionMismatch {
            expected_n: t.n(),
            expected_d: t.d(),
            got_n: x.n(),
            got_d: x.d(),
        });
    }
    if let Some(v) = x.coords().iter().find(|v| !v.is_finite()) {
        return Err(Error::DomainViolation(format!("non-finite coordinate {v}")));
    }
    let c = x.coords();
    Ok(match t {
        TargetFunction::Slater { orbitals, .. } => {
            let n = orbitals.len();
            let entries = orbitals
                .iter()
                .flat_map(|orb| x.particles().map(move |p| orb.eval(p)))
                .collect();
            determinant(entries, n)
        }
        TargetFunction::AbsDiff => c[0].abs() - c[1].abs(),
        TargetFunction::Pow43Diff => pow43(c[0]) - pow43(c[1]),
        TargetFunction::Custom { f, .. } => f(x),
    })
}

/// A fitted odd function `R^m -> R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddModel {
    pub feature_count: usize,
    pub input_dim: usize,
    /// `feature_count` rows of length `input_dim`.
    pub frequencies: Vec<Vec<f64>>,
    pub phases: Vec<f64>,
    pub weights: Vec<f64>,
    pub ridge: f64,
    pub seed: u64,
    pub bandwidth: f64,
    pub spec: SpecRef,
}

impl OddModel {
    fn h(&self, y: &[f64], sign: f64) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.phases)
            .zip(&self.weights)
            .map(|((omega, &b), &w)| {
                let arg: f64 = omega.iter().zip(y).map(|(o, v)| o * (sign * v)).sum();
                w * (arg + b).sin()
            })
            .sum()
    }

    /// `g(y) = (h(y) - h(-y)) / 2`.
    pub fn predict(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.input_dim, "feature vector length differs from model input");
        (self.h(y, 1.0) - self.h(y, -1.0)) / 2.0
    }

    /// `g(eta(x))`.
    pub fn predict_configuration(&self, spec: &FeatureMapSpec<f64>, x: &ParticleConfiguration<f64>) -> Result<f64> {
        let y = eval_eta(spec, x)?;
        if y.len() != self.input_dim {
            return Err(Error::InvalidArgument(format!(
                "model expects {} features, map produces {}",
                self.input_dim,
                y.len()
            )));
        }
        Ok(self.predict(&y.values))
    }

    /// Random model with unit-scale weights; used to probe oddness.
    pub fn random(spec: &FeatureMapSpec<f64>, feature_count: usize, seed: u64) -> Self {
        let mut rng = trial_rng(seed, 0);
        let frequencies = (0..feature_count)
            .map(|_| (0..spec.m()).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let weights = (0..feature_count).map(|_| StandardNormal.sample(&mut rng)).collect();
        Self {
            feature_count,
            input_dim: spec.m(),
            frequencies,
            phases: vec![0.0; feature_count],
            weights,
            ridge: 0.0,
            seed,
            bandwidth: 1.0,
            spec: spec.spec_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub samples: usize,
    pub feature_count: usize,
    pub ridge: f64,
    pub seed: u64,
    /// Held-out configurations drawn after training.
    pub holdout: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            feature_count: 500,
            ridge: 1e-8,
            seed: 0,
            holdout: 500,
        }
    }
}

/// Acceptance thresholds for a fit. These come from pilot runs on the
/// two-particle Slater target, not from theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitThresholds {
    pub holdout_rmse: f64,
}

impl Default for FitThresholds {
    fn default() -> Self {
        Self { holdout_rmse: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub samples: usize,
    pub holdout_samples: usize,
    pub train_rmse: f64,
    pub holdout_rmse: f64,
    pub condition_estimate: f64,
    pub bandwidth: f64,
}

fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    (pred.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / pred.len() as f64).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    }
}

/// Training set of `(configuration, eta, f)` triples from streams `first..first + count`.
fn draw_set(
    spec: &FeatureMapSpec<f64>,
    t: &TargetFunction,
    domain: &DomainBox<f64>,
    seed: u64,
    first: u64,
    count: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let xs: Vec<ParticleConfiguration<f64>> = (0..count as u64)
        .map(|i| uniform_configuration(t.n(), domain, &mut trial_rng(seed, first + i)))
        .collect();
    let ys = eval_eta_batch(spec, &xs)?;
    let fs = xs.par_iter().map(|x| eval_target(t, x)).collect::<Result<Vec<_>>>()?;
    Ok((ys.into_iter().map(|y| y.values).collect(), fs))
}

/// Fit `g` by ridge regression on odd sine features of `eta(x)`.
///
/// Minimises `(1/N) ‖Φw - f‖² + λ‖w‖²` in closed form. Frequencies are
/// standard normal divided by the median training `‖eta(x)‖₂`.
pub fn fit_odd_model(
    spec: &FeatureMapSpec<f64>,
    t: &TargetFunction,
    opts: &FitOptions,
) -> Result<(OddModel, FitDiagnostics)> {
    if spec.n() != t.n() || spec.d() != t.d() {
        return Err(Error::DimensionMismatch {
            expected_n: spec.n(),
            expected_d: spec.d(),
            got_n: t.n(),
            got_d: t.d(),
        });
    }
    if opts.feature_count == 0 || opts.samples < opts.feature_count {
        return Err(Error::InvalidArgument(format!(
            "need samples >= feature count >= 1, got {} samples for {} features",
            opts.samples, opts.feature_count
        )));
    }
    if !(opts.ridge > 0.0 && opts.ridge.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge must be positive, got {}", opts.ridge)));
    }
    let domain = spec.domain().cloned().unwrap_or_else(|| t.domain());
    let (train_y, train_f) = draw_set(spec, t, &domain, opts.seed, 0, opts.samples)?;
    let (test_y, test_f) = draw_set(spec, t, &domain, opts.seed, opts.samples as u64, opts.holdout)?;

    let norms: Vec<f64> = train_y.iter().map(|y| y.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let bandwidth = match median(norms) {
        b if b > 0.0 && b.is_finite() => b,
        _ => 1.0,
    };
    let mut rng = trial_rng(opts.seed, u64::MAX);
    let frequencies: Vec<Vec<f64>> = (0..opts.feature_count)
        .map(|_| {
            (0..spec.m())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z / bandwidth
                })
                .collect()
        })
        .collect();

    let mut model = OddModel {
        feature_count: opts.feature_count,
        input_dim: spec.m(),
        frequencies,
        phases: vec![0.0; opts.feature_count],
        weights: vec![0.0; opts.feature_count],
        ridge: opts.ridge,
        seed: opts.seed,
        bandwidth,
        spec: spec.spec_ref(),
    };

    let n_train = train_y.len();
    let rows: Vec<Vec<f64>> = train_y
        .par_iter()
        .map(|y| {
            model
                .frequencies
                .iter()
                .map(|omega| omega.iter().zip(y).map(|(o, v)| o * v).sum::<f64>().sin())
                .collect()
        })
        .collect();
    let design = DMatrix::from_fn(n_train, opts.feature_count, |r, c| rows[r][c]);
    let scale = 1.0 / n_train as f64;
    let mut gram = design.tr_mul(&design) * scale;
    for i in 0..opts.feature_count {
        gram[(i, i)] += opts.ridge;
    }
    let rhs = design.tr_mul(&DVector::from_vec(train_f.clone())) * scale;

    let eig = gram.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    let condition_estimate = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition_estimate > MAX_CONDITION {
        return Err(Error::IllConditioned {
            estimate: condition_estimate,
            limit: MAX_CONDITION,
        });
    }
    let weights = gram
        .cholesky()
        .ok_or(Error::IllConditioned {
            estimate: condition_estimate,
            limit: MAX_CONDITION,
        })?
        .solve(&rhs);
    model.weights = weights.iter().copied().collect();

    let train_pred: Vec<f64> = train_y.par_iter().map(|y| model.predict(y)).collect();
    let test_pred: Vec<f64> = test_y.par_iter().map(|y| model.predict(y)).collect();
    let diagnostics = FitDiagnostics {
        samples: n_train,
        holdout_samples: test_y.len(),
        train_rmse: rmse(&train_pred, &train_f),
        holdout_rmse: rmse(&test_pred, &test_f),
        condition_estimate,
        bandwidth,
    };
    Ok((model, diagnostics))
}

/// Fiber constancy of `f` over `eta`: equal on even permutations (where
/// `eta` agrees) and zero on every collision (where `eta = 0`).
pub fn check_well_defined(
    spec: &FeatureMapSpec<f64>,
    t: &TargetFunction,
    trials: usize,
    seed: u64,
) -> Result<CertificationReport> {
    if spec.n() != t.n() || spec.d() != t.d() {
        return Err(Error::DimensionMismatch {
            expected_n: spec.n(),
            expected_d: spec.d(),
            got_n: t.n(),
            got_d: t.d(),
        });
    }
    let n = t.n();
    let domain = spec.domain().cloned().unwrap_or_else(|| t.domain());
    let frame = ReportFrame {
        property: Property::OddWellDefined,
        trials,
        seed,
        tolerance: WELL_DEFINED_TOLERANCE,
        margin_tolerance: None,
        tolerances: [("fiber".to_string(), WELL_DEFINED_TOLERANCE)].into_iter().collect(),
    };
    let evens = even_permutations(n.min(crate::verify::EXHAUSTIVE_PERMUTATION_LIMIT));
    run_trials(frame, |trial, tally| {
        let mut rng = trial_rng(seed, trial);
        let x = distinct_configuration(n, &domain, DISTINCT_GAP, &mut rng);
        let fx = eval_target(t, &x)?;
        let sigmas: Vec<Permutation> = if n <= crate::verify::EXHAUSTIVE_PERMUTATION_LIMIT {
            evens.clone()
        } else {
            // random 3-cycles are even
            (0..crate::verify::RANDOM_PERMUTATIONS_PER_TRIAL)
                .map(|_| {
                    let idx = rand::seq::index::sample(&mut rng, n, 3).into_vec();
                    let mut images: Vec<usize> = (0..n).collect();
                    images[idx[0]] = idx[1];
                    images[idx[1]] = idx[2];
                    images[idx[2]] = idx[0];
                    Permutation::from_images(images).expect("3-cycle")
                })
                .collect()
        };
        for sigma in sigmas {
            let diff = (eval_target(t, &x.permuted(&sigma))? - fx).abs();
            tally.bound(diff, WELL_DEFINED_TOLERANCE, || Witness {
                check: "even-permutation-changed-target".into(),
                x: x.coords().to_vec(),
                other: None,
                permutation: Some(sigma.images().to_vec()),
                value: 0.0,
            });
        }
        if n >= 2 {
            let (xc, _) = colliding_configuration(n, &domain, &mut rng);
            let value = eval_target(t, &xc)?.abs();
            tally.bound(value, WELL_DEFINED_TOLERANCE, || Witness {
                check: "collision-target-nonzero".into(),
                x: xc.coords().to_vec(),
                other: None,
                permutation: None,
                value: 0.0,
            });
        }
        Ok(())
    })
}

/// One point of a counterexample curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eps: f64,
    pub value: f64,
    pub closed_form: f64,
    pub rel_err: f64,
}

fn two_particle_map() -> FeatureMapSpec<f64> {
    FeatureMapSpec::new(2, 1, ProjectionMode::Paper).expect("n=2, d=1 is valid")
}

/// `(f(x) - f(x')) / ‖eta(x) - eta(x')‖₂` at `x = (2ε, 0)`, `x' = (ε, -ε)`.
fn difference_quotient(spec: &FeatureMapSpec<f64>, t: &TargetFunction, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps(eps));
    }
    let x = ParticleConfiguration::from_scalars(&[2.0 * eps, 0.0])?;
    let xp = ParticleConfiguration::from_scalars(&[eps, -eps])?;
    let (y, yp) = (eval_eta(spec, &x)?, eval_eta(spec, &xp)?);
    let dist = y
        .values
        .iter()
        .zip(&yp.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok((eval_target(t, &x)? - eval_target(t, &xp)?) / dist)
}

fn curve(
    eps_list: &[f64],
    t: TargetFunction,
    closed_form: impl Fn(f64) -> f64,
    absolute: bool,
) -> Result<Vec<CurvePoint>> {
    let spec = two_particle_map();
    eps_list
        .iter()
        .map(|&eps| {
            let raw = difference_quotient(&spec, &t, eps)?;
            let value = if absolute { raw.abs() } else { raw };
            let exact = closed_form(eps);
            Ok(CurvePoint {
                eps,
                value,
                closed_form: exact,
                rel_err: ((value - exact) / exact).abs(),
            })
        })
        .collect()
}

/// Lipschitz quotient of `g` for `f = |x_1| - |x_2|`; closed form `1 / (2ε sqrt(1 + ε²))`.
pub fn lipschitz_ratio_curve(eps_list: &[f64]) -> Result<Vec<CurvePoint>> {
    curve(eps_list, TargetFunction::AbsDiff, lipschitz_closed_form, true)
}

pub fn lipschitz_closed_form(eps: f64) -> f64 {
    1.0 / (2.0 * eps * (1.0 + eps * eps).sqrt())
}

/// Directional difference quotient of `g` for `f = x_1^{4/3} - x_2^{4/3}`;
/// closed form `2^{4/3} / (4 ε^{2/3} sqrt(1 + ε²))`, unbounded as `ε -> 0`.
pub fn c1_obstruction_curve(eps_list: &[f64]) -> Result<Vec<CurvePoint>> {
    curve(eps_list, TargetFunction::Pow43Diff, c1_closed_form, false)
}

pub fn c1_closed_form(eps: f64) -> f64 {
    2f64.powf(4.0 / 3.0) / (4.0 * eps.powf(2.0 / 3.0) * (1.0 + eps * eps).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: &[f64]) -> ParticleConfiguration<f64> {
        ParticleConfiguration::from_scalars(v).unwrap()
    }

    #[test]
    fn abs_diff_values() {
        assert!((eval_target(&TargetFunction::AbsDiff, &cfg(&[0.2, 0.0])).unwrap() - 0.2).abs() < 1e-16);
        assert_eq!(eval_target(&TargetFunction::AbsDiff, &cfg(&[0.1, -0.1])).unwrap(), 0.0);
        assert_eq!(eval_target(&TargetFunction::AbsDiff, &cfg(&[0.3, 0.3])).unwrap(), 0.0);
    }

    #[test]
    fn pow43_is_the_real_power() {
        let v = eval_target(&TargetFunction::Pow43Diff, &cfg(&[8.0, -1.0])).unwrap();
        assert!((v - 15.0).abs() < 1e-12);
        assert_eq!(eval_target(&TargetFunction::Pow43Diff, &cfg(&[0.1, -0.1])).unwrap(), 0.0);
        assert!(matches!(
            eval_target(&TargetFunction::Pow43Diff, &cfg(&[f64::NAN, 0.0])),
            Err(Error::DomainViolation(_))
        ));
    }

    #[test]
    fn slater_two_by_two() {
        let t = TargetFunction::slater(2, 1);
        let v = eval_target(&t, &cfg(&[0.5, 0.25])).unwrap();
        // 2x2 oracle: phi_1(x_1) phi_2(x_2) - phi_1(x_2) phi_2(x_1)
        let oracle = (PI * 0.5).sin() * (2.0 * PI * 0.25).sin() - (PI * 0.25).sin() * (2.0 * PI * 0.5).sin();
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 1.0).abs() < 1e-12);
        assert!(matches!(eval_target(&t, &cfg(&[0.1, 0.2, 0.3])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn target_kinds_check_shape() {
        assert!(TargetFunction::from_kind(TargetKind::AbsDiff, 3, 1).is_err());
        assert_eq!(TargetFunction::from_kind(TargetKind::Slater, 3, 2).unwrap().n(), 3);
    }

    #[test]
    fn model_is_odd_and_vanishes_at_zero() {
        let spec = two_particle_map();
        let model = OddModel::random(&spec, 40, 3);
        assert_eq!(model.predict(&[0.0, 0.0, 0.0]), 0.0);
        let y = [0.3, -1.2, 0.7];
        let ny = [-0.3, 1.2, -0.7];
        assert_eq!(model.predict(&y), -model.predict(&ny));
    }

    #[test]
    fn zero_target_fits_to_zero() {
        let spec = two_particle_map();
        let opts = FitOptions {
            samples: 200,
            feature_count: 50,
            ridge: 1e-6,
            seed: 1,
            holdout: 50,
        };
        let (model, diag) = fit_odd_model(&spec, &TargetFunction::zero(2, 1), &opts).unwrap();
        assert!(diag.holdout_rmse <= 1e-10 && diag.train_rmse <= 1e-10);
        assert!(model.weights.iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn fit_rejects_bad_options() {
        let spec = two_particle_map();
        let t = TargetFunction::slater(2, 1);
        let few = FitOptions { samples: 10, feature_count: 20, ..FitOptions::default() };
        assert!(fit_odd_model(&spec, &t, &few).is_err());
        let no_ridge = FitOptions { samples: 50, feature_count: 20, ridge: 0.0, ..FitOptions::default() };
        assert!(fit_odd_model(&spec, &t, &no_ridge).is_err());
        let tiny_ridge = FitOptions { samples: 400, feature_count: 200, ridge: 1e-300, ..FitOptions::default() };
        assert!(matches!(fit_odd_model(&spec, &t, &tiny_ridge), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn well_defined_on_builtin_targets() {
        let spec = two_particle_map();
        for t in [TargetFunction::AbsDiff, TargetFunction::Pow43Diff, TargetFunction::slater(2, 1)] {
            let r = check_well_defined(&spec, &t, 50, 2).unwrap();
            assert!(r.passed(), "{t:?}: {r:?}");
        }
    }

    #[test]
    fn well_defined_detects_a_symmetric_target() {
        let spec = two_particle_map();
        let t = TargetFunction::Custom {
            name: "sum".into(),
            n: 2,
            d: 1,
            f: Arc::new(|x| x.coords().iter().sum()),
        };
        assert!(check_well_defined(&spec, &t, 20, 2).unwrap().failures > 0);
    }

    #[test]
    fn lipschitz_curve_values() {
        let c = lipschitz_ratio_curve(&[0.1, 1e-3]).unwrap();
        assert!((c[0].value - 4.97519).abs() < 1e-5);
        assert!((c[1].value - 499.99975).abs() < 1e-5);
        assert!(c.iter().all(|p| p.rel_err <= 1e-12));
        assert_eq!(lipschitz_ratio_curve(&[0.0]), Err(Error::NonpositiveEps(0.0)));
        assert!(matches!(c1_obstruction_curve(&[-1.0]), Err(Error::NonpositiveEps(_))));
    }

    #[test]
    fn c1_curve_values() {
        let c = c1_obstruction_curve(&[0.1, 1e-6]).unwrap();
        // 2^{4/3} / (4 * 0.1^{2/3} * sqrt(1.01)) = 2.90950639...
        assert!((c[0].value - 2.909_506_394).abs() < 1e-8);
        assert!((c[1].value - 6299.6).abs() < 0.1);
        assert!(c.iter().all(|p| p.rel_err <= 1e-12));
        let tiny = c1_obstruction_curve(&[1e-8]).unwrap()[0];
        assert!((tiny.value * 1e-8f64.powf(2.0 / 3.0) - 2f64.powf(4.0 / 3.0) / 4.0).abs() < 1e-6);
    }
}
