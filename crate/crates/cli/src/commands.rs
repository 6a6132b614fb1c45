//! Subcommand bodies. Each one computes everything first and returns the
//! files to write, so a failing run leaves nothing behind.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use antisym::calculus::jacobian_with;
use antisym::export::{curve_csv, diagnostics_csv, features_csv, fmt_float, JacobianReport};
use antisym::represent::{c1_obstruction_curve, fit_odd_model, lipschitz_ratio_curve, OddModel, TargetFunction};
use antisym::sampling::{colliding_configuration, distinct_configuration, trial_rng};
use antisym::verify::{certify_all, CertificationReport, MutatedMap, Mutation};
use antisym::{eval_eta_batch, Domain, FeatureMap, ProjectionMode};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::input::read_configurations;
use crate::Demo;

/// Largest accepted relative error of a counterexample curve against its closed form.
pub const CURVE_TOLERANCE: f64 = 1e-12;

pub struct Outcome {
    pub text: String,
    pub json: String,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

impl Outcome {
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        if self.files.is_empty() {
            return Ok(());
        }
        std::fs::create_dir_all(dir)?;
        for (name, contents) in &self.files {
            std::fs::write(dir.join(name), contents).with_context(|| format!("writing {name}"))?;
        }
        Ok(())
    }
}

fn pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn basis(cfg: &RunConfig, eval: Option<&Path>) -> Result<Outcome> {
    let xs = eval.map(|p| read_configurations(p, cfg.n, cfg.d)).transpose()?;
    let spec = cfg.feature_map()?;
    let (n, d, p, q, m) = (cfg.n, cfg.d, spec.p(), spec.q(), spec.m());
    let mut text = format!("p={p} q={q} m={m}\n");
    match cfg.projection_mode {
        ProjectionMode::Paper => {
            let _ = writeln!(text, "  p = n(n-1)/2 * (d-1) + 1 = {} * {} + 1 = {p}", n * (n - 1) / 2, d - 1);
        }
        ProjectionMode::Improved => {
            let _ = writeln!(text, "  p = d*n + 1 = {d} * {n} + 1 = {p}");
        }
    }
    let _ = writeln!(text, "  q = C(n+d, d) - 1 = C({}, {d}) - 1 = {q}", n + d);
    let _ = writeln!(text, "  m = p * (q+1) = {p} * {} = {m}", q + 1);

    let mut files = vec![("spec.json".to_string(), pretty(&spec)?)];
    let mut features = None;
    if let Some(xs) = xs {
        let fs = eval_eta_batch(&spec, &xs)?;
        files.push(("features.csv".into(), features_csv(&xs, &fs)));
        let _ = writeln!(text, "evaluated eta on {} configurations", xs.len());
        features = Some(fs.into_iter().map(|f| f.values).collect::<Vec<_>>());
    }
    let json = pretty(&json!({ "p": p, "q": q, "m": m, "spec": spec, "features": features }))?;
    Ok(Outcome {
        text,
        json,
        files,
        passed: true,
    })
}

fn witness_lines(out: &mut String, r: &CertificationReport) {
    for w in r.witnesses.iter().take(3) {
        let _ = write!(out, "  witness {} [{}] x={:?}", r.property, w.check, w.x);
        if let Some(o) = &w.other {
            let _ = write!(out, " other={o:?}");
        }
        if let Some(s) = &w.permutation {
            let _ = write!(out, " sigma={s:?}");
        }
        let _ = writeln!(out, " value={}", fmt_float(w.value));
    }
}

pub fn verify(cfg: &RunConfig, mutate: Option<Mutation>) -> Result<Outcome> {
    let spec = cfg.feature_map()?;
    let (trials, seed, tol) = (cfg.verify.trials, cfg.seed, &cfg.tolerances);
    let reports = match mutate {
        None => certify_all(&spec, trials, seed, tol)?,
        Some(mutation) => certify_all(&MutatedMap { spec: &spec, mutation }, trials, seed, tol)?,
    };
    let passed = reports.iter().all(CertificationReport::passed);
    let mut summary = format!("n={} d={} m={} seed={seed}", cfg.n, cfg.d, spec.m());
    if let Some(mutation) = mutate {
        let _ = write!(summary, " mutation={}", serde_json::to_value(mutation)?.as_str().unwrap_or(""));
    }
    summary.push('\n');
    for r in &reports {
        summary.push_str(&r.summary_line());
        summary.push('\n');
    }
    let _ = writeln!(summary, "overall {}", status(passed));
    let mut text = summary.clone();
    for r in reports.iter().filter(|r| !r.passed()) {
        witness_lines(&mut text, r);
    }
    let mut files = vec![
        ("verify.json".to_string(), pretty(&reports)?),
        ("verify-summary.txt".to_string(), summary),
    ];
    for r in &reports {
        files.push((format!("verify-{}.json", r.property), pretty(r)?));
    }
    Ok(Outcome {
        text,
        json: pretty(&reports)?,
        files,
        passed,
    })
}

pub fn jacobian(cfg: &RunConfig, demo: bool) -> Result<Outcome> {
    let spec = cfg.feature_map()?;
    let mut xs = cfg
        .jacobian
        .points
        .iter()
        .map(|p| cfg.configuration(p))
        .collect::<Result<Vec<_>>>()?;
    if demo {
        let domain = cfg.domain().unwrap_or_else(|| Domain::symmetric_unit(cfg.d));
        for k in 0..cfg.jacobian.random_points as u64 {
            if cfg.n >= 2 {
                xs.push(colliding_configuration(cfg.n, &domain, &mut trial_rng(cfg.seed, 2 * k)).0);
            }
            xs.push(distinct_configuration(
                cfg.n,
                &domain,
                cfg.tolerances.distinct_gap,
                &mut trial_rng(cfg.seed, 2 * k + 1),
            ));
        }
    }
    if xs.is_empty() {
        bail!("no configurations given; pass --point or set jacobian.points");
    }
    let reports = xs
        .iter()
        .map(|x| {
            let j = jacobian_with(&spec, x, cfg.jacobian.method, cfg.jacobian.rank_tolerance)?;
            Ok(JacobianReport::new(x, &j))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(JacobianReport::as_expected);
    let mut text = String::new();
    let mut spectrum = String::from("point,index,singular_value\n");
    for (i, r) in reports.iter().enumerate() {
        let sv: Vec<String> = r.singular_values.iter().map(|s| format!("{s:.6e}")).collect();
        let _ = writeln!(text, "x = {:?}", r.point);
        let _ = writeln!(text, "  {}", r.verdict);
        let _ = writeln!(text, "  singular values: {}", sv.join(" "));
        for (k, s) in r.singular_values.iter().enumerate() {
            let _ = writeln!(spectrum, "{i},{k},{}", fmt_float(*s));
        }
    }
    let _ = writeln!(text, "overall {}", status(passed));
    let stem = if demo { "demo-jacobian" } else { "jacobian" };
    Ok(Outcome {
        text,
        json: pretty(&reports)?,
        files: vec![
            (format!("{stem}.json"), pretty(&reports)?),
            (format!("{stem}-spectrum.csv"), spectrum),
        ],
        passed,
    })
}

pub fn fit(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.feature_map()?;
    let target = TargetFunction::from_kind(cfg.fit.target, cfg.n, cfg.d)?;
    let opts = cfg.fit_options();
    let (model, diag) = fit_odd_model(&spec, &target, &opts)?;
    let threshold = cfg.fit.thresholds.holdout_rmse;
    let passed = diag.holdout_rmse <= threshold;
    let mut text = format!(
        "target={} n={} d={} samples={} features={} ridge={:e} seed={}\n",
        serde_json::to_value(cfg.fit.target)?.as_str().unwrap_or(""),
        cfg.n,
        cfg.d,
        opts.samples,
        opts.feature_count,
        opts.ridge,
        opts.seed
    );
    let _ = writeln!(text, "train rmse   {:.6e}", diag.train_rmse);
    let _ = writeln!(
        text,
        "holdout rmse {:.6e} (threshold {:e}) {}",
        diag.holdout_rmse,
        threshold,
        status(passed)
    );
    let _ = writeln!(text, "condition    {:.3e}", diag.condition_estimate);
    Ok(Outcome {
        text,
        json: pretty(&json!({ "diagnostics": diag, "threshold": threshold, "passed": passed }))?,
        files: vec![
            ("model.json".into(), pretty(&model)?),
            ("fit-diagnostics.csv".into(), diagnostics_csv(&diag)),
        ],
        passed,
    })
}

pub fn predict(_cfg: &RunConfig, model_path: &Path, input: &Path) -> Result<Outcome> {
    let text = std::fs::read_to_string(model_path).with_context(|| format!("reading {}", model_path.display()))?;
    let model: OddModel = serde_json::from_str(&text).with_context(|| format!("parsing {}", model_path.display()))?;
    let spec = FeatureMap::from_ref(&model.spec)?;
    if spec.m() != model.input_dim || model.frequencies.len() != model.feature_count {
        bail!("model {} is inconsistent with its feature map", model_path.display());
    }
    let xs = read_configurations(input, spec.n(), spec.d())?;
    let predictions = xs
        .iter()
        .map(|x| model.predict_configuration(&spec, x))
        .collect::<antisym::Result<Vec<f64>>>()?;
    let mut csv = String::new();
    let header: Vec<String> = (0..spec.n())
        .flat_map(|i| (0..spec.d()).map(move |j| format!("x{i}_{j}")))
        .chain(["prediction".to_string()])
        .collect();
    let _ = writeln!(csv, "{}", header.join(","));
    for (x, p) in xs.iter().zip(&predictions) {
        let row: Vec<String> = x.coords().iter().chain([p]).map(|v| fmt_float(*v)).collect();
        let _ = writeln!(csv, "{}", row.join(","));
    }
    Ok(Outcome {
        text: csv.clone(),
        json: pretty(&json!({ "predictions": predictions }))?,
        files: vec![("predictions.csv".into(), csv)],
        passed: true,
    })
}

pub fn curve(cfg: &RunConfig, which: Demo) -> Result<Outcome> {
    let (name, points) = match which {
        Demo::Lipschitz => ("lipschitz", lipschitz_ratio_curve(&cfg.demo.eps_list)?),
        Demo::C1 => ("c1", c1_obstruction_curve(&cfg.demo.eps_list)?),
        Demo::Jacobian => unreachable!("handled by jacobian"),
    };
    let passed = points.iter().all(|p| p.rel_err <= CURVE_TOLERANCE);
    let csv = curve_csv(&points);
    Ok(Outcome {
        text: format!("{csv}overall {}\n", status(passed)),
        json: pretty(&points)?,
        files: vec![(format!("demo-{name}.csv"), csv)],
        passed,
    })
}
