//! Text exports: CSV tables with 17 significant digits and serializable
//! report records.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::calculus::{JacobianMethod, JacobianResult, SING_DISTANCE};
use crate::configuration::ParticleConfiguration;
use crate::features::FeatureVector;
use crate::represent::{CurvePoint, FitDiagnostics};

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let row: Vec<String> = values.into_iter().map(fmt_float).collect();
    out.push_str(&row.join(","));
    out.push('\n');
}

/// Columns `x{i}_{j}` (particle `i`, coordinate `j`) followed by `eta{r}`.
pub fn features_csv(xs: &[ParticleConfiguration<f64>], features: &[FeatureVector<f64>]) -> String {
    assert_eq!(xs.len(), features.len(), "one feature vector per configuration");
    let mut out = String::new();
    if let (Some(x), Some(f)) = (xs.first(), features.first()) {
        let mut header: Vec<String> = Vec::new();
        for i in 0..x.n() {
            for j in 0..x.d() {
                header.push(format!("x{i}_{j}"));
            }
        }
        header.extend((0..f.len()).map(|r| format!("eta{r}")));
        out.push_str(&header.join(","));
        out.push('\n');
    }
    for (x, f) in xs.iter().zip(features) {
        push_row(&mut out, x.coords().iter().chain(&f.values).copied());
    }
    out
}

/// `eps,value,closed_form,rel_err`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("eps,value,closed_form,rel_err\n");
    for p in points {
        push_row(&mut out, [p.eps, p.value, p.closed_form, p.rel_err]);
    }
    out
}

pub fn diagnostics_csv(d: &FitDiagnostics) -> String {
    let mut out = String::from("samples,holdout_samples,train_rmse,holdout_rmse,condition_estimate,bandwidth\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        d.samples,
        d.holdout_samples,
        fmt_float(d.train_rmse),
        fmt_float(d.holdout_rmse),
        fmt_float(d.condition_estimate),
        fmt_float(d.bandwidth)
    );
    out
}

/// Jacobian, spectrum and rank verdict at one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub n: usize,
    pub d: usize,
    pub point: Vec<f64>,
    pub method: JacobianMethod,
    pub step: Option<f64>,
    /// Row-major, `m` rows of `n * d` entries.
    pub matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub rank_tolerance: f64,
    pub on_collision_locus: bool,
    pub verdict: String,
}

impl JacobianReport {
    pub fn new(x: &ParticleConfiguration<f64>, j: &JacobianResult<f64>) -> Self {
        let cols = j.cols();
        let on_collision_locus = x.colliding_pair(SING_DISTANCE).is_some();
        let rank = j.numerical_rank;
        let verdict = match (on_collision_locus, rank == cols) {
            (true, false) if rank + x.d() <= cols => {
                format!("rank {rank} of {cols} — column-rank-deficient on the collision locus")
            }
            (true, _) => format!("rank {rank} of {cols} — unexpectedly high rank on the collision locus"),
            (false, true) => format!("rank {rank} of {cols} — full column rank"),
            (false, false) => format!("rank {rank} of {cols} — rank-deficient off the collision locus"),
        };
        Self {
            n: x.n(),
            d: x.d(),
            point: x.coords().to_vec(),
            method: j.method,
            step: j.step,
            matrix: j.matrix.row_iter().map(|r| r.iter().copied().collect()).collect(),
            singular_values: j.singular_values.clone(),
            numerical_rank: rank,
            rank_tolerance: j.rank_tolerance,
            on_collision_locus,
            verdict,
        }
    }

    /// Expected rank behaviour: deficient by at least `d` on collisions, full otherwise.
    pub fn as_expected(&self) -> bool {
        let cols = self.n * self.d;
        if self.on_collision_locus {
            self.numerical_rank + self.d <= cols
        } else {
            self.numerical_rank == cols
        }
    }

    pub fn matrix_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.matrix {
            push_row(&mut out, row.iter().copied());
        }
        out
    }

    pub fn spectrum_csv(&self) -> String {
        let mut out = String::from("index,singular_value\n");
        for (i, s) in self.singular_values.iter().enumerate() {
            let _ = writeln!(out, "{i},{}", fmt_float(*s));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::jacobian;
    use crate::features::{eval_eta, FeatureMapSpec};
    use crate::geometry::ProjectionMode;

    #[test]
    fn floats_round_trip_through_text() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
        }
    }

    #[test]
    fn features_table_layout() {
        let spec = FeatureMapSpec::<f64>::new(2, 1, ProjectionMode::Paper).unwrap();
        let x = ParticleConfiguration::from_scalars(&[0.2, 0.0]).unwrap();
        let f = eval_eta(&spec, &x).unwrap();
        let csv = features_csv(&[x], &[f]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x0_0,x1_0,eta0,eta1,eta2"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row[2], 0.2);
    }

    #[test]
    fn verdicts() {
        let spec = FeatureMapSpec::<f64>::new(2, 1, ProjectionMode::Paper).unwrap();
        let at = |v: &[f64]| {
            let x = ParticleConfiguration::from_scalars(v).unwrap();
            JacobianReport::new(&x, &jacobian(&spec, &x, JacobianMethod::ExactPolynomial).unwrap())
        };
        let r = at(&[1.0, 1.0]);
        assert_eq!(r.verdict, "rank 1 of 2 — column-rank-deficient on the collision locus");
        assert!(r.as_expected());
        let r = at(&[1.0, 2.0]);
        assert_eq!(r.verdict, "rank 2 of 2 — full column rank");
        assert!(r.as_expected());
        assert_eq!(r.spectrum_csv().lines().count(), 3);
    }
}
