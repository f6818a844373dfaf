//! The versioned JSON report, its validator and the long-format CSV files.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::experiments::{NoisyToExtremes, OversampleRow};
use super::{median, IncrementalPoint, InterpretationImpact, PerformanceImpact, Recommendation};
use crate::discretize::{NoisyArea, NoisyAreaSpec, WindowScore};
use crate::error::{Error, Result};
use crate::evalstats::Measure;
use crate::learners::HyperParams;
use crate::preprocess::ReductionReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub source: String,
    pub target: String,
    pub n_rows: usize,
    pub n_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSummary {
    /// `median`, `ckmeans`, `cart`, or `expert` for a supplied cutpoint.
    pub method: String,
    pub threshold: f64,
    pub n_class1: usize,
    pub n_class2: usize,
    pub step_size_pct: f64,
    pub limit: Option<f64>,
    /// Share of rows inside the noisy area, in percent.
    pub noisy_pct: Option<f64>,
    pub noisy_area: Option<NoisyArea>,
    pub profile: Vec<WindowScore>,
    pub flags: Vec<String>,
}

impl DiscretizationSummary {
    pub fn new(method: String, threshold: f64, counts: (usize, usize), noisy: &NoisyAreaSpec) -> Self {
        DiscretizationSummary {
            method,
            threshold,
            n_class1: counts.0,
            n_class2: counts.1,
            step_size_pct: noisy.step_size_pct,
            limit: noisy.limit_pct(),
            noisy_pct: noisy.area.as_ref().map(|a| 100.0 * a.noisy_fraction),
            noisy_area: noisy.area.clone(),
            profile: noisy.profile.clone(),
            flags: noisy.flags.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub x_pct: f64,
    pub retained_n: usize,
    pub n_class1: usize,
    pub n_class2: usize,
    pub params: Option<HyperParams>,
    pub infeasible: Option<String>,
    /// Median of each measure over the bootstrap iterations.
    pub medians: BTreeMap<String, f64>,
    pub feature_ranks: BTreeMap<String, usize>,
    pub redraws: usize,
}

impl PointSummary {
    pub fn new(p: &IncrementalPoint, feature_names: &[String]) -> Self {
        let (medians, feature_ranks, redraws) = match &p.boot {
            Some(b) => (
                Measure::ALL
                    .iter()
                    .map(|&m| (m.name().to_string(), median(&b.measure(m))))
                    .collect(),
                feature_names.iter().cloned().zip(b.feature_ranks.iter().copied()).collect(),
                b.redraws,
            ),
            None => (BTreeMap::new(), BTreeMap::new(), 0),
        };
        PointSummary {
            x_pct: p.x_pct,
            retained_n: p.retained_n,
            n_class1: p.n_class1,
            n_class2: p.n_class2,
            params: p.params.clone(),
            infeasible: p.infeasible.clone(),
            medians,
            feature_ranks,
            redraws,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesSummary {
    pub fraction: f64,
    pub n_low: usize,
    pub n_high: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentsReport {
    pub extremes: Option<ExtremesSummary>,
    pub oversample: Option<Vec<OversampleRow>>,
    pub noisy_to_extremes: Option<NoisyToExtremes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    NoNoisyArea,
    NoFeasibleStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub schema: u32,
    pub status: RunStatus,
    pub dataset: DatasetSummary,
    pub classifier: String,
    pub preprocessing: ReductionReport,
    pub discretization: DiscretizationSummary,
    pub incremental: Vec<PointSummary>,
    pub performance_impacts: Vec<PerformanceImpact>,
    pub recommendation: Recommendation,
    pub interpretation: Option<InterpretationImpact>,
    pub experiments: ExperimentsReport,
    pub config_echo: Value,
    pub seed: u64,
}

impl ImpactReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One-screen text summary.
    pub fn summary(&self) -> String {
        let d = &self.discretization;
        let mut out = String::new();
        out.push_str(&format!(
            "dataset        {} ({} rows, {} features)\n",
            self.dataset.source, self.dataset.n_rows, self.dataset.n_features
        ));
        out.push_str(&format!("features kept  {}\n", self.preprocessing.retained.join(", ")));
        out.push_str(&format!(
            "cutpoint       {} ({}), class1 {} / class2 {}\n",
            d.threshold, d.method, d.n_class1, d.n_class2
        ));
        match (d.limit, d.noisy_pct) {
            (Some(l), Some(p)) => out.push_str(&format!("noisy area     ±{l}% of cutpoint, {p:.1}% of rows\n")),
            _ => out.push_str("noisy area     none found\n"),
        }
        out.push_str(&format!("classifier     {}\n", self.classifier));
        if !self.performance_impacts.is_empty() {
            out.push_str("measure      median@0  median@limit  change%   x_first  p        d\n");
            for i in &self.performance_impacts {
                out.push_str(&format!(
                    "{:<12} {:<9.4} {:<13.4} {:<9.2} {:<8} {:<8.4} {:.3}\n",
                    i.measure.name(),
                    i.median_at_0,
                    i.median_at_limit,
                    i.magnitude_pct,
                    i.x_first,
                    i.p_value,
                    i.cohens_d
                ));
            }
        }
        if let Some(interp) = &self.interpretation {
            out.push_str(&format!(
                "rank change    p = {:.4}, d = {:.3} ({:?})\n",
                interp.overall_p, interp.overall_d, interp.effect_label
            ));
            for (r, l) in &interp.rank_shift {
                out.push_str(&format!(
                    "rank {r} shift   {:.2} ({})\n",
                    l, interp.rank_shift_features[r]
                ));
            }
        }
        out.push_str(&format!("recommendation {}\n", self.recommendation.describe()));
        out
    }
}

fn fail(path: &str, msg: &str) -> Error {
    Error::invalid(format!("report {path}: {msg}"))
}

fn field<'a>(obj: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| fail(path, &format!("missing key `{key}`")))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| fail(path, "expected a number"))
}

fn opt_number(v: &Value, path: &str) -> Result<Option<f64>> {
    if v.is_null() {
        Ok(None)
    } else {
        number(v, path).map(Some)
    }
}

fn unit(v: &Value, path: &str) -> Result<()> {
    let x = number(v, path)?;
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(fail(path, "expected a value in [0, 1]"))
    }
}

fn one_of(v: &Value, path: &str, allowed: &[&str]) -> Result<()> {
    match v.as_str() {
        Some(s) if allowed.contains(&s) => Ok(()),
        _ => Err(fail(path, &format!("expected one of {allowed:?}"))),
    }
}

const EFFECTS: [&str; 4] = ["Negligible", "Small", "Medium", "Large"];

/// Structural check of a schema-1 report.
pub fn validate_report(v: &Value) -> Result<()> {
    if !v.is_object() {
        return Err(fail("$", "expected an object"));
    }
    match field(v, "$", "schema")?.as_u64() {
        Some(s) if s == u64::from(SCHEMA_VERSION) => {}
        _ => return Err(fail("schema", &format!("expected {SCHEMA_VERSION}"))),
    }
    one_of(field(v, "$", "status")?, "status", &["complete", "no_noisy_area", "no_feasible_step"])?;
    field(v, "$", "seed")?
        .as_u64()
        .ok_or_else(|| fail("seed", "expected an unsigned integer"))?;
    if !field(v, "$", "config_echo")?.is_object() {
        return Err(fail("config_echo", "expected an object"));
    }

    let pre = field(v, "$", "preprocessing")?;
    let retained = field(pre, "preprocessing", "retained")?
        .as_array()
        .ok_or_else(|| fail("preprocessing.retained", "expected an array"))?;
    if retained.is_empty() {
        return Err(fail("preprocessing.retained", "must not be empty"));
    }

    let disc = field(v, "$", "discretization")?;
    one_of(field(disc, "discretization", "method")?, "discretization.method", &["median", "ckmeans", "cart", "expert"])?;
    number(field(disc, "discretization", "threshold")?, "discretization.threshold")?;
    let limit = opt_number(field(disc, "discretization", "limit")?, "discretization.limit")?;
    let noisy_pct = opt_number(field(disc, "discretization", "noisy_pct")?, "discretization.noisy_pct")?;
    let area = field(disc, "discretization", "noisy_area")?;
    if limit.is_some() != noisy_pct.is_some() || limit.is_some() == area.is_null() {
        return Err(fail("discretization", "limit, noisy_pct and noisy_area must be all set or all null"));
    }
    if let Some(p) = noisy_pct {
        if !(0.0..=100.0).contains(&p) {
            return Err(fail("discretization.noisy_pct", "expected a percentage"));
        }
    }

    let points = field(v, "$", "incremental")?
        .as_array()
        .ok_or_else(|| fail("incremental", "expected an array"))?;
    if points.is_empty() {
        return Err(fail("incremental", "must hold the x = 0 point"));
    }
    let mut prev = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let path = format!("incremental[{i}]");
        let x = number(field(p, &path, "x_pct")?, &path)?;
        if x <= prev {
            return Err(fail(&path, "x_pct must increase"));
        }
        prev = x;
    }

    let measures: Vec<&str> = Measure::ALL.iter().map(|m| m.name()).collect();
    let impacts = field(v, "$", "performance_impacts")?
        .as_array()
        .ok_or_else(|| fail("performance_impacts", "expected an array"))?;
    for (i, imp) in impacts.iter().enumerate() {
        let path = format!("performance_impacts[{i}]");
        one_of(field(imp, &path, "measure")?, &path, &measures)?;
        number(field(imp, &path, "magnitude_pct")?, &path)?;
        if number(field(imp, &path, "x_first")?, &path)? < 0.0 {
            return Err(fail(&path, "x_first must be non-negative"));
        }
        unit(field(imp, &path, "p_value")?, &path)?;
        number(field(imp, &path, "cohens_d")?, &path)?;
        one_of(field(imp, &path, "effect_label")?, &path, &EFFECTS)?;
    }

    let rec = field(v, "$", "recommendation")?;
    one_of(field(rec, "recommendation", "action")?, "recommendation.action", &["use_whole_dataset", "discard"])?;

    let interp = field(v, "$", "interpretation")?;
    if !interp.is_null() {
        unit(field(interp, "interpretation", "overall_p")?, "interpretation.overall_p")?;
        number(field(interp, "interpretation", "overall_d")?, "interpretation.overall_d")?;
        let shift = field(interp, "interpretation", "rank_shift")?
            .as_object()
            .ok_or_else(|| fail("interpretation.rank_shift", "expected an object"))?;
        for (k, l) in shift {
            k.parse::<usize>()
                .map_err(|_| fail("interpretation.rank_shift", "keys must be ranks"))?;
            unit(l, "interpretation.rank_shift")?;
        }
    }
    if !field(v, "$", "experiments")?.is_object() {
        return Err(fail("experiments", "expected an object"));
    }
    Ok(())
}

/// `x_pct,iteration,measure,value` for every bootstrap iteration.
pub fn write_perf_curves(points: &[IncrementalPoint], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_pct", "iteration", "measure", "value"])?;
    for p in points {
        let Some(b) = &p.boot else { continue };
        for (i, perf) in b.perf.iter().enumerate() {
            for m in Measure::ALL {
                w.write_record([p.x_pct.to_string(), i.to_string(), m.name().to_string(), perf.get(m).to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: "perf_curves.csv".into(),
        source: e,
    })
}

/// `x_pct,feature,sk_rank,median_importance` per feature and step.
pub fn write_ranks(points: &[IncrementalPoint], feature_names: &[String], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_pct", "feature", "sk_rank", "median_importance"])?;
    for p in points {
        let Some(b) = &p.boot else { continue };
        for (f, name) in feature_names.iter().enumerate() {
            let imp: Vec<f64> = b.importance.iter().map(|v| v[f]).collect();
            w.write_record([
                p.x_pct.to_string(),
                name.clone(),
                b.feature_ranks[f].to_string(),
                median(&imp).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: "ranks.csv".into(),
        source: e,
    })
}

/// `x_pct,n_points,n4` of the noisy-area search; `n4` is empty for skipped
/// windows.
pub fn write_profile(profile: &[WindowScore], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_pct", "n_points", "n4"])?;
    for s in profile {
        w.write_record([
            s.x_pct.to_string(),
            s.n_points.to_string(),
            s.n4.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "noisy_profile.csv".into(),
        source: e,
    })
}
