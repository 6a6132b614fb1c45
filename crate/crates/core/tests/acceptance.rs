//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! straight to stdout so the verdicts show up even when output is captured.

use std::io::Write;
use std::time::{Duration, Instant};

use antisym::calculus::{
    check_full_rank_off_singular, check_product_rule_blocks, check_singular_column_pairs, jacobian, JacobianMethod,
};
use antisym::export::curve_csv;
use antisym::represent::{
    c1_obstruction_curve, fit_odd_model, lipschitz_ratio_curve, FitOptions, FitThresholds, TargetFunction,
};
use antisym::sampling::{colliding_configuration, distinct_configuration, trial_rng, uniform_configuration};
use antisym::verify::{
    certify_antisymmetry, certify_orbit_separation, certify_psi_separation, certify_psi_symmetry,
    certify_zero_iff_collision, CertificationReport, MutatedMap, Mutation,
};
use antisym::*;
use rand::Rng;

const EPS_GRID: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

fn report(id: u32, name: &str, passed: bool, detail: &str, elapsed: Duration, limit: Duration) -> bool {
    let in_time = elapsed <= limit;
    let ok = passed && in_time;
    let line = format!(
        "acceptance {id:>2} {name:<32} {}  {detail}  [{:.2}s, limit {}s]\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    ok
}

fn map(n: usize, d: usize) -> FeatureMap {
    FeatureMap::new(n, d, ProjectionMode::Paper).unwrap()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    if b == 0.0 {
        a == 0.0
    } else {
        ((a - b) / b).abs() <= rel
    }
}

#[test]
fn criterion_01_golden_values() {
    let start = Instant::now();
    let spec = map(2, 1);
    let mut ok = true;
    let mut detail = String::new();
    // (x1, x2, oracle): phi = x1 - x2, psi = (x1 + x2, x1^2 + x2^2), eta = (phi, psi_1 phi, psi_2 phi)
    for (x1, x2) in [(0.2, 0.0), (0.1, -0.1)] {
        let phi: f64 = x1 - x2;
        let oracle = [phi, (x1 + x2) * phi, (x1 * x1 + x2 * x2) * phi];
        let eta = eval_eta(&spec, &Configuration::from_scalars(&[x1, x2]).unwrap()).unwrap();
        ok &= eta.values.iter().zip(&oracle).all(|(a, b)| rel_close(*a, *b, 1e-15));
        detail += &format!("eta({x1},{x2})={:?} ", eta.values);
    }
    // closed forms at ε = 0.1: (2ε, 4ε², 8ε³) and (2ε, 0, 4ε³)
    let e = 0.1f64;
    let shown = [[2.0 * e, 4.0 * e * e, 8.0 * e * e * e], [2.0 * e, 0.0, 4.0 * e * e * e]];
    for ((x1, x2), s) in [(0.2, 0.0), (0.1, -0.1)].into_iter().zip(shown) {
        let eta = eval_eta(&spec, &Configuration::from_scalars(&[x1, x2]).unwrap()).unwrap();
        ok &= eta.values.iter().zip(&s).all(|(a, b)| rel_close(*a, *b, 1e-15));
    }
    assert!(report(1, "golden values", ok, &detail, start.elapsed(), Duration::from_secs(1)));
}

#[test]
fn criterion_02_counting_formulas() {
    let start = Instant::now();
    let binom = |a: usize, b: usize| (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1));
    let mut ok = true;
    let mut detail = String::new();
    for ((n, d), expect) in [((2, 1), (1, 2, 3)), ((3, 2), (4, 9, 40)), ((4, 3), (13, 34, 455))] {
        let s = map(n, d);
        let formula_p = n * (n - 1) / 2 * (d - 1) + 1;
        let formula_q = binom(n + d, d) - 1;
        let got = (s.p(), s.q(), s.m());
        ok &= got == expect && got == (formula_p, formula_q, formula_p * (formula_q + 1));
        detail += &format!("({n},{d})->{got:?} ");
    }
    let improved = FeatureMap::new(3, 2, ProjectionMode::Improved).unwrap();
    ok &= improved.p() == 7 && improved.m() == 70;
    detail += &format!("improved(3,2) p={} m={}", improved.p(), improved.m());
    assert!(report(2, "counting formulas", ok, &detail, start.elapsed(), Duration::from_secs(1)));
}

#[test]
fn criterion_03_eta_certification() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (n, d) in [(2, 1), (3, 2), (4, 3)] {
        let s = map(n, d);
        let reports = [
            certify_antisymmetry(&s, 1000, 3).unwrap(),
            certify_zero_iff_collision(&s, 1000, 3).unwrap(),
            certify_orbit_separation(&s, 1000, 3).unwrap(),
        ];
        let failures: usize = reports.iter().map(|r| r.failures).sum();
        ok &= reports.iter().all(CertificationReport::passed);
        detail += &format!("({n},{d}) failures={failures} ");
    }
    let s = map(2, 1);
    let mutated = |mutation| MutatedMap { spec: &s, mutation };
    let caught = [
        certify_antisymmetry(&mutated(Mutation::SignFlip), 1000, 3).unwrap().failures,
        certify_zero_iff_collision(&mutated(Mutation::SymmetricPhi), 1000, 3).unwrap().failures,
        certify_orbit_separation(&mutated(Mutation::DropBlock), 1000, 3).unwrap().failures,
    ];
    ok &= caught.iter().all(|&f| f >= 1);
    detail += &format!("mutants caught {caught:?}");
    assert!(report(3, "eta certification + mutants", ok, &detail, start.elapsed(), Duration::from_secs(60)));
}

#[test]
fn criterion_04_psi_certification() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (n, d) in [(3, 1), (4, 2)] {
        let s = map(n, d);
        let sym = certify_psi_symmetry(&s, 500, 4).unwrap();
        let sep = certify_psi_separation(&s, 500, 4).unwrap();
        ok &= sym.passed() && sep.passed();
        detail += &format!("({n},{d}) failures={}+{} ", sym.failures, sep.failures);
    }
    assert!(report(4, "psi certification", ok, &detail, start.elapsed(), Duration::from_secs(30)));
}

#[test]
fn criterion_05_rank_drop_on_collisions() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (n, d) in [(2, 1), (3, 2)] {
        let s = map(n, d);
        let domain = Domain::symmetric_unit(d);
        let mut worst_ratio = 0.0f64;
        let mut max_rank = 0;
        for t in 0..100 {
            let (x, _) = colliding_configuration(n, &domain, &mut trial_rng(5, t));
            let jac = jacobian(&s, &x, JacobianMethod::ExactPolynomial).unwrap();
            let residual = check_singular_column_pairs(&s, &x).unwrap();
            worst_ratio = worst_ratio.max(residual / (1e-8 * (1.0 + jac.max_abs())));
            max_rank = max_rank.max(jac.numerical_rank);
        }
        ok &= worst_ratio <= 1.0 && max_rank <= n * d - d;
        detail += &format!("({n},{d}) residual/bound={worst_ratio:.1e} max rank={max_rank} ");
    }
    // hand Jacobian at x = (1, 1): rows d(x1-x2), d((x1+x2)(x1-x2)), d((x1^2+x2^2)(x1-x2))
    let hand = [[1.0, -1.0], [2.0, -2.0], [2.0, -2.0]];
    let x = Configuration::from_scalars(&[1.0, 1.0]).unwrap();
    let jac = jacobian(&map(2, 1), &x, JacobianMethod::ExactPolynomial).unwrap();
    let close = (0..3).all(|r| (0..2).all(|c| (jac.matrix[(r, c)] - hand[r][c]).abs() <= 1e-6));
    ok &= close && jac.numerical_rank == 1;
    detail += &format!("x=(1,1) rank {}", jac.numerical_rank);
    assert!(report(5, "rank drop on collisions", ok, &detail, start.elapsed(), Duration::from_secs(30)));
}

#[test]
fn criterion_06_full_rank_off_collisions() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    for (n, d) in [(2, 1), (3, 2)] {
        let r = check_full_rank_off_singular(&map(n, d), 100, 6).unwrap();
        ok &= r.passed();
        detail += &format!("({n},{d}) min σmin/σmax={:.3e} ", r.min_margin.unwrap_or(f64::NAN));
    }
    assert!(report(6, "full rank off collisions", ok, &detail, start.elapsed(), Duration::from_secs(60)));
}

#[test]
fn criterion_07_product_rule_blocks() {
    let start = Instant::now();
    let s = map(3, 2);
    let domain = Domain::symmetric_unit(2);
    let mut worst_ratio = 0.0f64;
    for t in 0..20 {
        let x = uniform_configuration(3, &domain, &mut trial_rng(7, t));
        let jac = jacobian(&s, &x, JacobianMethod::ExactPolynomial).unwrap();
        let residual = check_product_rule_blocks(&s, &x).unwrap();
        worst_ratio = worst_ratio.max(residual / (1e-5 * (1.0 + jac.max_abs())));
    }
    let detail = format!("residual/bound={worst_ratio:.2e}");
    assert!(report(7, "product-rule blocks", worst_ratio <= 1.0, &detail, start.elapsed(), Duration::from_secs(10)));
}

#[test]
fn criterion_08_lipschitz_counterexample() {
    let start = Instant::now();
    let curve = lipschitz_ratio_curve(&EPS_GRID).unwrap();
    let closed = |e: f64| 1.0 / (2.0 * e * (1.0 + e * e).sqrt());
    let mut ok = curve.iter().all(|p| rel_close(p.value, closed(p.eps), 1e-12));
    ok &= (curve[2].value - 499.99975).abs() <= 1e-5;
    ok &= curve.windows(2).all(|w| w[1].value > w[0].value);
    let detail = format!("ratio(1e-3)={:.8}", curve[2].value);
    assert!(report(8, "Lipschitz counterexample", ok, &detail, start.elapsed(), Duration::from_secs(1)));
}

#[test]
fn criterion_09_c1_counterexample() {
    let start = Instant::now();
    let closed = |e: f64| 2f64.powf(4.0 / 3.0) / (4.0 * e.powf(2.0 / 3.0) * (1.0 + e * e).sqrt());
    let curve = c1_obstruction_curve(&EPS_GRID).unwrap();
    let mut ok = curve.iter().all(|p| rel_close(p.value, closed(p.eps), 1e-12));
    let tiny = c1_obstruction_curve(&[1e-8]).unwrap()[0];
    let scaled = tiny.value * 1e-8f64.powf(2.0 / 3.0);
    ok &= (scaled - 2f64.powf(4.0 / 3.0) / 4.0).abs() <= 1e-6;
    let detail = format!("q(0.1)={:.6} q(1e-8)·ε^(2/3)={scaled:.9}", curve[0].value);
    assert!(report(9, "C1 counterexample", ok, &detail, start.elapsed(), Duration::from_secs(1)));
}

#[test]
fn criterion_10_odd_model_fit() {
    let start = Instant::now();
    let spec = map(2, 1);
    let target = TargetFunction::slater(2, 1);
    let opts = FitOptions {
        samples: 2000,
        feature_count: 500,
        ridge: 1e-8,
        seed: 0,
        holdout: 500,
    };
    let (model, diag) = fit_odd_model(&spec, &target, &opts).unwrap();
    let threshold = FitThresholds::default().holdout_rmse;
    let fit_ok = diag.holdout_rmse <= threshold;

    let mut rng = trial_rng(10, 0);
    let mut worst_odd = 0.0f64;
    for _ in 0..10_000 {
        let y: Vec<f64> = (0..spec.m()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        let (a, b) = (model.predict(&y), model.predict(&ny));
        worst_odd = worst_odd.max((a + b).abs());
    }
    let odd_ok = worst_odd <= 1e-14;

    let domain = Domain::symmetric_unit(1);
    let mut worst_anti = 0.0f64;
    for t in 0..1000 {
        let mut rng = trial_rng(10, t + 1);
        let x = distinct_configuration(2, &domain, 1e-3, &mut rng);
        let sigma = Permutation::random(2, &mut rng);
        let a = model.predict_configuration(&spec, &x.permuted(&sigma)).unwrap();
        let b = model.predict_configuration(&spec, &x).unwrap();
        worst_anti = worst_anti.max((a - f64::from(sigma.sign()) * b).abs());
    }
    let anti_ok = worst_anti <= 1e-10;

    let detail = format!(
        "holdout rmse={:.4e} (≤{threshold:e}: {}) oddness={worst_odd:.1e} antisymmetry={worst_anti:.1e}",
        diag.holdout_rmse,
        if fit_ok { "yes" } else { "no" }
    );
    let ok = fit_ok && odd_ok && anti_ok;
    assert!(report(10, "odd model fit", ok, &detail, start.elapsed(), Duration::from_secs(120)));
}

/// Every artifact the other criteria produce, serialized.
fn artifacts(seed: u64) -> Vec<String> {
    let s = map(3, 2);
    let mut out = vec![
        serde_json::to_string(&certify_antisymmetry(&s, 200, seed).unwrap()).unwrap(),
        serde_json::to_string(&certify_zero_iff_collision(&s, 200, seed).unwrap()).unwrap(),
        serde_json::to_string(&certify_orbit_separation(&s, 200, seed).unwrap()).unwrap(),
        serde_json::to_string(&certify_psi_symmetry(&s, 200, seed).unwrap()).unwrap(),
        serde_json::to_string(&certify_psi_separation(&s, 200, seed).unwrap()).unwrap(),
        serde_json::to_string(&check_full_rank_off_singular(&s, 50, seed).unwrap()).unwrap(),
        curve_csv(&lipschitz_ratio_curve(&EPS_GRID).unwrap()),
        curve_csv(&c1_obstruction_curve(&EPS_GRID).unwrap()),
    ];
    let opts = FitOptions {
        samples: 400,
        feature_count: 100,
        ridge: 1e-8,
        seed,
        holdout: 100,
    };
    let (model, diag) = fit_odd_model(&map(2, 1), &TargetFunction::slater(2, 1), &opts).unwrap();
    out.push(serde_json::to_string(&model).unwrap());
    out.push(serde_json::to_string(&diag).unwrap());
    out
}

#[test]
fn criterion_11_determinism() {
    let start = Instant::now();
    let first = artifacts(11);
    let second = artifacts(11);
    let ok = first == second && artifacts(12) != first;
    let detail = format!("{} artifacts compared byte for byte", first.len());
    assert!(report(11, "determinism", ok, &detail, start.elapsed(), Duration::from_secs(120)));
}
