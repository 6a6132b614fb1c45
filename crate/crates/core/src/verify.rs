//! Randomised certifiers for the defining properties of the basis map and
//! of the symmetric power sums.
//!
//! Each certifier runs `trials` independent trials, each on its own seeded
//! stream, and returns a [`CertificationReport`]. Checks come in two kinds:
//! quantities that must stay below a tolerance (recorded in
//! `worst_violation`) and gaps that must stay above one (recorded in
//! `min_margin`).

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::configuration::{DomainBox, ParticleConfiguration};
use crate::error::{Error, Result};
use crate::features::FeatureMapSpec;
use crate::perm::{all_permutations, even_permutations, Permutation};
use crate::sampling::{colliding_configuration, distinct_configuration, trial_rng, uniform_configuration};
use crate::scalar::max_abs;

/// Largest `n` for which orbit membership is decided by trying all `n!` permutations.
pub const EXHAUSTIVE_ORBIT_LIMIT: usize = 6;
/// Largest `n` for which every permutation is checked per sample.
pub const EXHAUSTIVE_PERMUTATION_LIMIT: usize = 4;
/// Random permutations per sample above [`EXHAUSTIVE_PERMUTATION_LIMIT`].
pub const RANDOM_PERMUTATIONS_PER_TRIAL: usize = 8;
/// Witnesses kept per report.
pub const WITNESS_CAP: usize = 10;

/// An anti-symmetric map `(R^d)^n -> R^m` under certification.
pub trait AntisymmetricMap: Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn eval(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>>;

    /// Box that test configurations are drawn from.
    fn sampling_domain(&self) -> DomainBox<f64> {
        DomainBox::symmetric_unit(self.d())
    }
}

/// A symmetric map `(R^d)^n -> R^q` under certification.
pub trait SymmetricMap: Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn eval_symmetric(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>>;

    fn sampling_domain(&self) -> DomainBox<f64> {
        DomainBox::symmetric_unit(self.d())
    }
}

impl AntisymmetricMap for FeatureMapSpec<f64> {
    fn n(&self) -> usize {
        FeatureMapSpec::n(self)
    }

    fn d(&self) -> usize {
        FeatureMapSpec::d(self)
    }

    fn eval(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>> {
        crate::features::eval_eta(self, x).map(|y| y.values)
    }

    fn sampling_domain(&self) -> DomainBox<f64> {
        self.domain().cloned().unwrap_or_else(|| DomainBox::symmetric_unit(FeatureMapSpec::d(self)))
    }
}

impl SymmetricMap for FeatureMapSpec<f64> {
    fn n(&self) -> usize {
        FeatureMapSpec::n(self)
    }

    fn d(&self) -> usize {
        FeatureMapSpec::d(self)
    }

    fn eval_symmetric(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>> {
        crate::features::eval_psi(self, x)
    }

    fn sampling_domain(&self) -> DomainBox<f64> {
        AntisymmetricMap::sampling_domain(self)
    }
}

/// Deliberate corruptions used to show the certifiers are not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Feature 0 loses its sign: `eta_0 -> |eta_0|`.
    SignFlip,
    /// The `psi_1 * phi` block is dropped (zeroed).
    DropBlock,
    /// The last power sum is replaced by a copy of the first.
    DuplicatePsi,
    /// `phi_1` is replaced by the symmetric power sum `psi_1`.
    SymmetricPhi,
}

impl std::str::FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign-flip" => Ok(Self::SignFlip),
            "drop-block" => Ok(Self::DropBlock),
            "duplicate-psi" => Ok(Self::DuplicatePsi),
            "symmetric-phi" => Ok(Self::SymmetricPhi),
            other => Err(Error::InvalidArgument(format!("unknown mutation `{other}`"))),
        }
    }
}

/// A feature map with one [`Mutation`] applied.
#[derive(Debug, Clone)]
pub struct MutatedMap<'a> {
    pub spec: &'a FeatureMapSpec<f64>,
    pub mutation: Mutation,
}

impl MutatedMap<'_> {
    fn parts(&self, x: &ParticleConfiguration<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = self.spec.prepare(x)?;
        let mut phi = self.spec.phi_prepared(&x);
        let mut psi = self.spec.psi_prepared(&x);
        match self.mutation {
            Mutation::DuplicatePsi => {
                let last = psi.len() - 1;
                psi[last] = psi[0];
            }
            Mutation::SymmetricPhi => phi[0] = psi[0],
            Mutation::SignFlip | Mutation::DropBlock => {}
        }
        Ok((phi, psi))
    }
}

impl AntisymmetricMap for MutatedMap<'_> {
    fn n(&self) -> usize {
        self.spec.n()
    }

    fn d(&self) -> usize {
        self.spec.d()
    }

    fn eval(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>> {
        let (phi, psi) = self.parts(x)?;
        let mut y = self.spec.eta_from_parts(&phi, &psi);
        let p = self.spec.p();
        match self.mutation {
            Mutation::SignFlip => y[0] = y[0].abs(),
            Mutation::DropBlock => y[p..2 * p].iter_mut().for_each(|v| *v = 0.0),
            Mutation::DuplicatePsi | Mutation::SymmetricPhi => {}
        }
        Ok(y)
    }

    fn sampling_domain(&self) -> DomainBox<f64> {
        AntisymmetricMap::sampling_domain(self.spec)
    }
}

impl SymmetricMap for MutatedMap<'_> {
    fn n(&self) -> usize {
        self.spec.n()
    }

    fn d(&self) -> usize {
        self.spec.d()
    }

    fn eval_symmetric(&self, x: &ParticleConfiguration<f64>) -> Result<Vec<f64>> {
        self.parts(x).map(|(_, psi)| psi)
    }

    fn sampling_domain(&self) -> DomainBox<f64> {
        AntisymmetricMap::sampling_domain(self.spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    AntiSymmetry,
    SymmetryPsi,
    ZeroIffCollision,
    OrbitSeparation,
    PsiSeparation,
    OddWellDefined,
    FullColumnRank,
}

impl std::fmt::Display for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Property::AntiSymmetry => "anti-symmetry",
            Property::SymmetryPsi => "symmetry-psi",
            Property::ZeroIffCollision => "zero-iff-collision",
            Property::OrbitSeparation => "orbit-separation",
            Property::PsiSeparation => "psi-separation",
            Property::OddWellDefined => "odd-well-defined",
            Property::FullColumnRank => "full-column-rank",
        })
    }
}

/// A failing input kept as evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub property: Property,
    pub trials: usize,
    pub checks: usize,
    pub failures: usize,
    /// Largest observed value of the quantity that must stay `<= tolerance`.
    pub worst_violation: f64,
    pub tolerance: f64,
    /// Smallest observed value of the gap that must stay `> margin_tolerance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_tolerance: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<20} {:>6} trials {:>8} checks {:>6} failures  worst {:.3e} (tol {:.1e})  margin {}  {}",
            self.property.to_string(),
            self.trials,
            self.checks,
            self.failures,
            self.worst_violation,
            self.tolerance,
            self.min_margin.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}")),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Per-trial bookkeeping, merged in trial order.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    checks: usize,
    failures: usize,
    worst: f64,
    margin: Option<f64>,
    witnesses: Vec<Witness>,
}

impl Tally {
    pub(crate) fn bound(&mut self, value: f64, tolerance: f64, witness: impl FnOnce() -> Witness) {
        self.checks += 1;
        // NaN counts as a violation
        let ok = value <= tolerance;
        if value.is_finite() && value > self.worst {
            self.worst = value;
        }
        if !ok {
            self.fail(witness(), value);
        }
    }

    pub(crate) fn margin(&mut self, value: f64, tolerance: f64, witness: impl FnOnce() -> Witness) {
        self.checks += 1;
        self.margin = Some(self.margin.map_or(value, |m| m.min(value)));
        if !(value > tolerance) {
            self.fail(witness(), value);
        }
    }

    fn fail(&mut self, mut witness: Witness, value: f64) {
        self.failures += 1;
        if self.witnesses.len() < WITNESS_CAP {
            witness.value = value;
            self.witnesses.push(witness);
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failures += other.failures;
        self.worst = self.worst.max(other.worst);
        self.margin = match (self.margin, other.margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let room = WITNESS_CAP - self.witnesses.len();
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        self
    }
}

pub(crate) struct ReportFrame {
    pub property: Property,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub margin_tolerance: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
}

/// Run `trials` independent trials in parallel and fold them in trial order.
pub(crate) fn run_trials<F>(frame: ReportFrame, trial: F) -> Result<CertificationReport>
where
    F: Fn(u64, &mut Tally) -> Result<()> + Sync,
{
    if frame.trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let tallies = (0..frame.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            trial(t, &mut tally).map(|()| tally)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(CertificationReport {
        property: frame.property,
        trials: frame.trials,
        checks: total.checks,
        failures: total.failures,
        worst_violation: total.worst,
        tolerance: frame.tolerance,
        min_margin: total.margin,
        margin_tolerance: frame.margin_tolerance,
        witnesses: total.witnesses,
        seed: frame.seed,
        tolerances: frame.tolerances,
    })
}

/// Tolerances used by the certifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `‖eta(σx) - sgn(σ) eta(x)‖∞ / (1 + ‖eta(x)‖∞)`.
    pub antisymmetry: f64,
    /// Relative tolerance for symmetric quantities and even-permutation equality.
    pub invariance: f64,
    /// `‖eta‖∞` on collisions, multiplied by `(1 + ‖x‖∞)^{n(n-1)/2}`.
    pub zero: f64,
    /// Minimum `‖eta(x) - eta(x')‖∞` for points on different orbits.
    pub separation: f64,
    /// Minimum particle distance for distinct-particle samples.
    pub distinct_gap: f64,
    /// Row equality tolerance when deciding orbit membership.
    pub orbit_membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            antisymmetry: 1e-10,
            invariance: 1e-10,
            zero: 1e-12,
            separation: 1e-10,
            distinct_gap: crate::sampling::DISTINCT_GAP,
            orbit_membership: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.antisymmetry,
            self.invariance,
            self.zero,
            self.separation,
            self.distinct_gap,
            self.orbit_membership,
        ];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument("tolerances must be positive and finite".into()))
        }
    }

    fn map(&self, keys: &[&str]) -> BTreeMap<String, f64> {
        keys.iter()
            .map(|&k| {
                let v = match k {
                    "antisymmetry" => self.antisymmetry,
                    "invariance" => self.invariance,
                    "zero" => self.zero,
                    "separation" => self.separation,
                    "distinct_gap" => self.distinct_gap,
                    "orbit_membership" => self.orbit_membership,
                    _ => unreachable!("unknown tolerance key {k}"),
                };
                (k.to_string(), v)
            })
            .collect()
    }
}

fn sup_diff(a: &[f64], b: &[f64], sign: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| (u - sign * v).abs())
        .fold(0.0, f64::max)
}

/// Permutations to test for one sample: all of them for small `n`, else random ones.
fn permutations_for<R: Rng>(n: usize, even_only: bool, rng: &mut R) -> Vec<Permutation> {
    if n <= EXHAUSTIVE_PERMUTATION_LIMIT {
        if even_only {
            even_permutations(n)
        } else {
            all_permutations(n)
        }
    } else {
        (0..RANDOM_PERMUTATIONS_PER_TRIAL)
            .map(|_| {
                let mut sigma = Permutation::random(n, rng);
                if even_only && !sigma.is_even() {
                    let mut images = sigma.images().to_vec();
                    images.swap(0, 1);
                    sigma = Permutation::from_images(images).expect("swap keeps a permutation");
                }
                sigma
            })
            .collect()
    }
}

/// Whether `y` is a reordering of the rows of `x`, by trying every permutation.
pub fn orbit_contains_exhaustive(
    x: &ParticleConfiguration<f64>,
    y: &ParticleConfiguration<f64>,
    tolerance: f64,
) -> Result<bool> {
    if x.n() > EXHAUSTIVE_ORBIT_LIMIT {
        return Err(Error::OrbitCheckInfeasible {
            n: x.n(),
            limit: EXHAUSTIVE_ORBIT_LIMIT,
        });
    }
    if x.n() != y.n() || x.d() != y.d() {
        return Ok(false);
    }
    Ok(all_permutations(x.n())
        .iter()
        .any(|sigma| sup_diff(x.permuted(sigma).coords(), y.coords(), 1.0) <= tolerance))
}

/// Rows sorted lexicographically: equal for exactly the configurations on one orbit.
pub fn canonical_form(x: &ParticleConfiguration<f64>) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = x.particles().map(<[f64]>::to_vec).collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    rows
}

/// Orbit membership: exhaustive for small `n`, canonical sorting otherwise.
pub fn same_orbit(x: &ParticleConfiguration<f64>, y: &ParticleConfiguration<f64>, tolerance: f64) -> bool {
    match orbit_contains_exhaustive(x, y, tolerance) {
        Ok(found) => found,
        Err(_) => {
            let (a, b) = (canonical_form(x), canonical_form(y));
            a.iter().zip(&b).all(|(r, s)| sup_diff(r, s, 1.0) <= tolerance)
        }
    }
}

/// Ways of building a second configuration that is off the orbit of the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partner {
    /// Independent uniform sample.
    Independent,
    /// Common shift of every particle; leaves every Vandermonde factor unchanged.
    Translation,
    /// Scaling about the centroid; leaves the degree-1 power sums unchanged.
    Dilation,
    /// Orthogonal mixing of particles fixing the all-ones vector; leaves
    /// every power sum of degree <= 2 unchanged.
    Reflection,
    /// Point reflection through the box centre, odd-permuted when that
    /// restores the sign of the Vandermonde factors.
    Negation,
}

const PARTNERS: [Partner; 5] = [
    Partner::Independent,
    Partner::Translation,
    Partner::Dilation,
    Partner::Reflection,
    Partner::Negation,
];

fn partner<R: Rng>(
    kind: Partner,
    x: &ParticleConfiguration<f64>,
    domain: &DomainBox<f64>,
    rng: &mut R,
) -> ParticleConfiguration<f64> {
    let (n, d) = (x.n(), x.d());
    let centroid: Vec<f64> = (0..d)
        .map(|j| x.particles().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let coords: Vec<f64> = match kind {
        Partner::Independent => return uniform_configuration(n, domain, rng),
        Partner::Translation => {
            let shift: Vec<f64> = (0..d)
                .map(|j| {
                    let width = domain.upper[j] - domain.lower[j];
                    let magnitude = rng.random_range(0.05..=0.25) * width;
                    if rng.random_bool(0.5) {
                        magnitude
                    } else {
                        -magnitude
                    }
                })
                .collect();
            x.coords().iter().enumerate().map(|(k, &v)| v + shift[k % d]).collect()
        }
        Partner::Dilation => {
            let lambda = rng.random_range(0.5..=0.8);
            x.coords()
                .iter()
                .enumerate()
                .map(|(k, &v)| centroid[k % d] + lambda * (v - centroid[k % d]))
                .collect()
        }
        Partner::Reflection if n >= 3 => {
            // Householder reflection I - 2vv^T with v orthogonal to (1, .., 1)
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|c| *c -= mean);
            let len = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.iter_mut().for_each(|c| *c /= len);
            let mut out = vec![0.0; n * d];
            for j in 0..d {
                let dot: f64 = (0..n).map(|i| v[i] * (x.particle(i)[j] - centroid[j])).sum();
                for i in 0..n {
                    out[i * d + j] = x.particle(i)[j] - 2.0 * v[i] * dot;
                }
            }
            out
        }
        Partner::Reflection => return partner(Partner::Dilation, x, domain, rng),
        Partner::Negation => {
            let mut out: Vec<f64> = x
                .coords()
                .iter()
                .enumerate()
                .map(|(k, &v)| domain.lower[k % d] + domain.upper[k % d] - v)
                .collect();
            if n >= 2 && (n * (n - 1) / 2) % 2 == 1 {
                for j in 0..d {
                    out.swap(j, d + j);
                }
            }
            out
        }
    };
    ParticleConfiguration::new(n, d, coords).expect("partner keeps the shape")
}

/// Draw an off-orbit partner, falling back to independent samples when the
/// structured construction lands on the orbit (or, if `distinct`, near a collision).
fn off_orbit_partner<R: Rng>(
    kind: Partner,
    x: &ParticleConfiguration<f64>,
    domain: &DomainBox<f64>,
    tolerances: &Tolerances,
    distinct: bool,
    rng: &mut R,
) -> ParticleConfiguration<f64> {
    let mut kind = kind;
    loop {
        let y = partner(kind, x, domain, rng);
        let spread_ok = !distinct || y.min_pairwise_distance().is_none_or(|g| g >= tolerances.distinct_gap);
        if spread_ok && !same_orbit(x, &y, tolerances.orbit_membership) {
            return y;
        }
        kind = Partner::Independent;
    }
}

fn witness(check: &str, x: &ParticleConfiguration<f64>) -> Witness {
    Witness {
        check: check.to_string(),
        x: x.coords().to_vec(),
        other: None,
        permutation: None,
        value: 0.0,
    }
}

fn witness_pair(check: &str, x: &ParticleConfiguration<f64>, y: &ParticleConfiguration<f64>) -> Witness {
    Witness {
        other: Some(y.coords().to_vec()),
        ..witness(check, x)
    }
}

fn witness_perm(check: &str, x: &ParticleConfiguration<f64>, sigma: &Permutation) -> Witness {
    Witness {
        permutation: Some(sigma.images().to_vec()),
        ..witness(check, x)
    }
}

pub fn certify_antisymmetry<M: AntisymmetricMap>(map: &M, trials: usize, seed: u64) -> Result<CertificationReport> {
    certify_antisymmetry_with(map, trials, seed, &Tolerances::default())
}

/// `eta(σx) = sgn(σ) eta(x)` on uniform samples.
pub fn certify_antisymmetry_with<M: AntisymmetricMap>(
    map: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    tol.validate()?;
    let domain = map.sampling_domain();
    let frame = ReportFrame {
        property: Property::AntiSymmetry,
        trials,
        seed,
        tolerance: tol.antisymmetry,
        margin_tolerance: None,
        tolerances: tol.map(&["antisymmetry"]),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        let x = uniform_configuration(map.n(), &domain, &mut rng);
        let y = map.eval(&x)?;
        let scale = 1.0 + max_abs(&y);
        for sigma in permutations_for(map.n(), false, &mut rng) {
            let ys = map.eval(&x.permuted(&sigma))?;
            let err = sup_diff(&ys, &y, f64::from(sigma.sign())) / scale;
            tally.bound(err, tol.antisymmetry, || witness_perm("sign-rule", &x, &sigma));
        }
        Ok(())
    })
}

pub fn certify_psi_symmetry<M: SymmetricMap>(map: &M, trials: usize, seed: u64) -> Result<CertificationReport> {
    certify_psi_symmetry_with(map, trials, seed, &Tolerances::default())
}

/// `psi(σx) = psi(x)` on uniform samples, collisions included.
pub fn certify_psi_symmetry_with<M: SymmetricMap>(
    map: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    tol.validate()?;
    let domain = map.sampling_domain();
    let frame = ReportFrame {
        property: Property::SymmetryPsi,
        trials,
        seed,
        tolerance: tol.invariance,
        margin_tolerance: None,
        tolerances: tol.map(&["invariance"]),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        let x = uniform_configuration(map.n(), &domain, &mut rng);
        let y = map.eval_symmetric(&x)?;
        let scale = 1.0 + max_abs(&y);
        for sigma in permutations_for(map.n(), false, &mut rng) {
            let ys = map.eval_symmetric(&x.permuted(&sigma))?;
            tally.bound(sup_diff(&ys, &y, 1.0) / scale, tol.invariance, || {
                witness_perm("invariance", &x, &sigma)
            });
        }
        Ok(())
    })
}

pub fn certify_zero_iff_collision<M: AntisymmetricMap>(map: &M, trials: usize, seed: u64) -> Result<CertificationReport> {
    certify_zero_iff_collision_with(map, trials, seed, &Tolerances::default())
}

/// Forward: a forced duplicate pair gives `eta = 0`. Reverse: distinct
/// particles (pairwise gap at least `distinct_gap`) give `eta != 0`.
pub fn certify_zero_iff_collision_with<M: AntisymmetricMap>(
    map: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    tol.validate()?;
    let domain = map.sampling_domain();
    let n = map.n();
    let pairs = (n * n.saturating_sub(1) / 2) as i32;
    let frame = ReportFrame {
        property: Property::ZeroIffCollision,
        trials,
        seed,
        tolerance: tol.zero,
        margin_tolerance: Some(0.0),
        tolerances: tol.map(&["zero", "distinct_gap"]),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        if n >= 2 {
            let (x, _) = colliding_configuration(n, &domain, &mut rng);
            let scale = (1.0 + x.max_abs()).powi(pairs);
            let size = max_abs(&map.eval(&x)?) / scale;
            tally.bound(size, tol.zero, || witness("collision-not-zero", &x));
        }
        let x = distinct_configuration(n, &domain, tol.distinct_gap, &mut rng);
        let size = max_abs(&map.eval(&x)?);
        tally.margin(size, 0.0, || witness("distinct-but-zero", &x));
        Ok(())
    })
}

pub fn certify_orbit_separation<M: AntisymmetricMap>(map: &M, trials: usize, seed: u64) -> Result<CertificationReport> {
    certify_orbit_separation_with(map, trials, seed, &Tolerances::default())
}

/// Positive: even permutations leave `eta` unchanged. Negative: a
/// distinct-particle configuration and an off-orbit partner have
/// `‖eta(x) - eta(x')‖∞ > separation`.
pub fn certify_orbit_separation_with<M: AntisymmetricMap>(
    map: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    tol.validate()?;
    let domain = map.sampling_domain();
    let n = map.n();
    let frame = ReportFrame {
        property: Property::OrbitSeparation,
        trials,
        seed,
        tolerance: tol.invariance,
        margin_tolerance: Some(tol.separation),
        tolerances: tol.map(&["invariance", "separation", "distinct_gap", "orbit_membership"]),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        let x = distinct_configuration(n, &domain, tol.distinct_gap, &mut rng);
        let y = map.eval(&x)?;
        let scale = 1.0 + max_abs(&y);
        for sigma in permutations_for(n, true, &mut rng) {
            let ys = map.eval(&x.permuted(&sigma))?;
            tally.bound(sup_diff(&ys, &y, 1.0) / scale, tol.invariance, || {
                witness_perm("even-permutation-changed-features", &x, &sigma)
            });
        }
        if n >= 2 || domain.dim() >= 1 {
            let kind = PARTNERS[t as usize % PARTNERS.len()];
            let xp = off_orbit_partner(kind, &x, &domain, tol, true, &mut rng);
            let gap = sup_diff(&map.eval(&xp)?, &y, 1.0);
            tally.margin(gap, tol.separation, || witness_pair("orbits-not-separated", &x, &xp));
        }
        Ok(())
    })
}

pub fn certify_psi_separation<M: SymmetricMap>(map: &M, trials: usize, seed: u64) -> Result<CertificationReport> {
    certify_psi_separation_with(map, trials, seed, &Tolerances::default())
}

/// Same protocol as [`certify_orbit_separation_with`] on `psi` alone, over
/// all permutations and without excluding repeated particles.
pub fn certify_psi_separation_with<M: SymmetricMap>(
    map: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CertificationReport> {
    tol.validate()?;
    let domain = map.sampling_domain();
    let n = map.n();
    let frame = ReportFrame {
        property: Property::PsiSeparation,
        trials,
        seed,
        tolerance: tol.invariance,
        margin_tolerance: Some(tol.separation),
        tolerances: tol.map(&["invariance", "separation", "orbit_membership"]),
    };
    run_trials(frame, |t, tally| {
        let mut rng = trial_rng(seed, t);
        let x = if n >= 2 && t % 2 == 1 {
            colliding_configuration(n, &domain, &mut rng).0
        } else {
            uniform_configuration(n, &domain, &mut rng)
        };
        let y = map.eval_symmetric(&x)?;
        let scale = 1.0 + max_abs(&y);
        for sigma in permutations_for(n, false, &mut rng) {
            let ys = map.eval_symmetric(&x.permuted(&sigma))?;
            tally.bound(sup_diff(&ys, &y, 1.0) / scale, tol.invariance, || {
                witness_perm("permutation-changed-psi", &x, &sigma)
            });
        }
        let kind = PARTNERS[(t as usize / 2) % PARTNERS.len()];
        let xp = off_orbit_partner(kind, &x, &domain, tol, false, &mut rng);
        let gap = sup_diff(&map.eval_symmetric(&xp)?, &y, 1.0);
        tally.margin(gap, tol.separation, || witness_pair("orbits-not-separated", &x, &xp));
        Ok(())
    })
}

/// The standard battery on a feature map: every `eta` and `psi` certifier.
pub fn certify_all<M: AntisymmetricMap + SymmetricMap>(
    spec: &M,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<CertificationReport>> {
    Ok(vec![
        certify_antisymmetry_with(spec, trials, seed, tol)?,
        certify_psi_symmetry_with(spec, trials, seed, tol)?,
        certify_zero_iff_collision_with(spec, trials, seed, tol)?,
        certify_orbit_separation_with(spec, trials, seed, tol)?,
        certify_psi_separation_with(spec, trials, seed, tol)?,
    ])
}
