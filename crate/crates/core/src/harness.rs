//! Seeded parameter sweeps over random contexts and least-squares fits of
//! the bound constants.
//!
//! A sweep is a list of grid cells (model specs without seeds) times a
//! number of trials. Trial `t` of cell `k` uses the seed
//! `derive_seed(derive_seed(base_seed, k), t)`, so adding cells never
//! changes existing data. Rows come out ordered by `(cell, trial)` and the
//! CSV is byte-identical for a given spec whatever the worker count, unless
//! wall-time columns are requested.
//!
//! CSV layout (schema 1): `#`-prefixed header comments, then a header row
//! and one record per trial. `kind` is `trial`, `error` or `mean`; each
//! cell ends with a `mean` row averaging its successful trials.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bases::{attribute_hypergraph, proper_base_from_premises, stem_base};
use crate::bounds::{
    almost_sure_lower_exponent, avg_pp_exponent, classify_regime, d_of_alpha,
    total_base_bound_log10, ContextParams, RegimeThresholds,
};
use crate::random::{derive_seed, ModelSpec};
use crate::set::AttributeSet;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("could not build a thread pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("fit needs at least 3 distinct single-parameter grid cells, found {0}")]
    TooFewCells(usize),
    #[error("singular fit: {0}")]
    Singular(String),
}

/// Attribute-count guards for the two base computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeLimits {
    pub max_proper_attributes: usize,
    pub max_stem_attributes: usize,
}

impl Default for SizeLimits {
    fn default() -> Self {
        SizeLimits {
            max_proper_attributes: 64,
            max_stem_attributes: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    /// Grid cells; their seeds are ignored.
    pub cells: Vec<ModelSpec>,
    pub trials: usize,
    pub base_seed: u64,
    pub stem: bool,
    /// Adds wall-time columns, which makes the output nondeterministic.
    pub timings: bool,
    pub limits: SizeLimits,
    /// Constant of the average-size exponent.
    pub c: f64,
    /// Constant of the almost-sure lower exponent.
    pub c2: f64,
    pub thresholds: RegimeThresholds,
}

impl SweepSpec {
    pub fn new(cells: Vec<ModelSpec>, trials: usize, base_seed: u64) -> Self {
        SweepSpec {
            cells,
            trials,
            base_seed,
            stem: false,
            timings: false,
            limits: SizeLimits::default(),
            c: 1.0,
            c2: 0.0,
            thresholds: RegimeThresholds::default(),
        }
    }

    pub fn trial_seed(&self, cell: usize, trial: usize) -> u64 {
        derive_seed(derive_seed(self.base_seed, cell as u64), trial as u64)
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.cells.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        if self.trials == 0 {
            return Err(HarnessError::NoTrials);
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub kind: String,
    pub cell: usize,
    pub trial: Option<usize>,
    pub seed: Option<u64>,
    pub model: String,
    pub objects: usize,
    pub attributes: usize,
    pub p: Option<f64>,
    pub u_size: Option<usize>,
    pub r_size: Option<usize>,
    pub x: Option<f64>,
    pub f_prob: Option<f64>,
    /// Smallest, mean and largest number of minimal transversals of an
    /// attribute hypergraph.
    pub mt_min: Option<f64>,
    pub mt_mean: Option<f64>,
    pub mt_max: Option<f64>,
    pub proper_premises: Option<f64>,
    pub proper_pairs: Option<f64>,
    pub stem: Option<f64>,
    pub t_gen_ms: Option<f64>,
    pub t_dual_ms: Option<f64>,
    pub t_stem_ms: Option<f64>,
    pub avg_exponent: Option<f64>,
    pub lower_exponent: Option<f64>,
    pub total_log10: Option<f64>,
    pub regime: Option<String>,
    pub error: Option<String>,
}

impl TrialRecord {
    fn blank(kind: &str, cell: usize, spec: &ModelSpec) -> Self {
        let (model, p, u, r, x, f) = match spec {
            ModelSpec::Single(s) => ("single", Some(s.p), None, None, None, None),
            ModelSpec::Multi(s) => (
                "multi",
                None,
                Some(s.u_size),
                Some(s.r_size),
                Some(s.x),
                Some(s.f_prob),
            ),
        };
        TrialRecord {
            kind: kind.to_string(),
            cell,
            trial: None,
            seed: None,
            model: model.to_string(),
            objects: spec.n_objects(),
            attributes: spec.n_attributes(),
            p,
            u_size: u,
            r_size: r,
            x,
            f_prob: f,
            mt_min: None,
            mt_mean: None,
            mt_max: None,
            proper_premises: None,
            proper_pairs: None,
            stem: None,
            t_gen_ms: None,
            t_dual_ms: None,
            t_stem_ms: None,
            avg_exponent: None,
            lower_exponent: None,
            total_log10: None,
            regime: None,
            error: None,
        }
    }

    pub fn is_trial(&self) -> bool {
        self.kind == "trial"
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_millis() as f64
}

/// Runs one trial of one cell.
pub fn run_trial(sweep: &SweepSpec, cell: usize, trial: usize) -> TrialRecord {
    let seed = sweep.trial_seed(cell, trial);
    let spec = sweep.cells[cell].clone().with_seed(seed);
    let mut rec = TrialRecord::blank("trial", cell, &spec);
    rec.trial = Some(trial);
    rec.seed = Some(seed);
    annotate_theory(&mut rec, &spec, sweep);

    let fail = |mut rec: TrialRecord, msg: String| {
        rec.kind = "error".to_string();
        rec.error = Some(msg);
        rec
    };
    let n = spec.n_attributes();
    if n > sweep.limits.max_proper_attributes {
        return fail(
            rec,
            format!(
                "{n} attributes exceed the proper-base limit of {}",
                sweep.limits.max_proper_attributes
            ),
        );
    }
    if sweep.stem && n > sweep.limits.max_stem_attributes {
        return fail(
            rec,
            format!(
                "{n} attributes exceed the stem-base limit of {}",
                sweep.limits.max_stem_attributes
            ),
        );
    }

    let start = Instant::now();
    let ctx = match spec.generate() {
        Ok(ctx) => ctx,
        Err(e) => return fail(rec, e.to_string()),
    };
    let t_gen = elapsed_ms(start);

    let start = Instant::now();
    let transversals: Vec<Vec<AttributeSet>> = (0..n)
        .into_par_iter()
        .map(|a| attribute_hypergraph(&ctx, a).minimal_transversals())
        .collect();
    let counts: Vec<f64> = transversals.iter().map(|t| t.len() as f64).collect();
    let premises: Vec<Vec<AttributeSet>> = transversals
        .into_iter()
        .enumerate()
        .map(|(a, mut tr)| {
            let trivial = AttributeSet::from_indices(n, [a]);
            tr.retain(|t| t != &trivial);
            tr
        })
        .collect();
    let proper = proper_base_from_premises(n, &premises);
    let t_dual = elapsed_ms(start);

    if !counts.is_empty() {
        rec.mt_min = Some(counts.iter().copied().fold(f64::INFINITY, f64::min));
        rec.mt_max = Some(counts.iter().copied().fold(0.0, f64::max));
        rec.mt_mean = Some(counts.iter().sum::<f64>() / counts.len() as f64);
    }
    rec.proper_premises = Some(proper.len() as f64);
    rec.proper_pairs = Some(proper.pair_count() as f64);

    let mut t_stem = None;
    if sweep.stem {
        let start = Instant::now();
        let stem = stem_base(&ctx);
        t_stem = Some(elapsed_ms(start));
        rec.stem = Some(stem.len() as f64);
        if stem.len() > proper.len() {
            return fail(
                rec,
                "stem base larger than base of proper premises".to_string(),
            );
        }
    }
    if sweep.timings {
        rec.t_gen_ms = Some(t_gen);
        rec.t_dual_ms = Some(t_dual);
        rec.t_stem_ms = t_stem;
    }
    rec
}

fn annotate_theory(rec: &mut TrialRecord, spec: &ModelSpec, sweep: &SweepSpec) {
    match spec {
        ModelSpec::Single(s) => {
            let params = ContextParams {
                n_attributes: s.n_attributes,
                n_objects: s.n_objects,
                p: s.p,
            };
            rec.avg_exponent = avg_pp_exponent(&params, sweep.c).ok();
            rec.lower_exponent = almost_sure_lower_exponent(&params, sweep.c2).ok();
            rec.total_log10 = total_base_bound_log10(&params, sweep.c).ok();
        }
        ModelSpec::Multi(s) => {
            rec.regime = Some(
                classify_regime(s, &sweep.thresholds)
                    .regime
                    .as_str()
                    .to_string(),
            );
        }
    }
}

fn mean_of<F: Fn(&TrialRecord) -> Option<f64>>(rows: &[&TrialRecord], field: F) -> Option<f64> {
    let values: Vec<f64> = rows.iter().filter_map(|r| field(r)).collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn cell_mean(
    cell: usize,
    spec: &ModelSpec,
    rows: &[TrialRecord],
    sweep: &SweepSpec,
) -> TrialRecord {
    let ok: Vec<&TrialRecord> = rows.iter().filter(|r| r.is_trial()).collect();
    let mut rec = TrialRecord::blank("mean", cell, spec);
    annotate_theory(&mut rec, spec, sweep);
    rec.mt_min = mean_of(&ok, |r| r.mt_min);
    rec.mt_mean = mean_of(&ok, |r| r.mt_mean);
    rec.mt_max = mean_of(&ok, |r| r.mt_max);
    rec.proper_premises = mean_of(&ok, |r| r.proper_premises);
    rec.proper_pairs = mean_of(&ok, |r| r.proper_pairs);
    rec.stem = mean_of(&ok, |r| r.stem);
    rec.t_gen_ms = mean_of(&ok, |r| r.t_gen_ms);
    rec.t_dual_ms = mean_of(&ok, |r| r.t_dual_ms);
    rec.t_stem_ms = mean_of(&ok, |r| r.t_stem_ms);
    rec
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    /// Trial and error rows for each cell followed by its mean row.
    pub records: Vec<TrialRecord>,
    pub has_errors: bool,
}

impl SweepOutput {
    pub fn trials(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.is_trial())
    }

    pub fn means(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.kind == "mean")
    }
}

/// Runs every trial of the sweep on `workers` threads (`0` means rayon's
/// default).
pub fn run_sweep(sweep: &SweepSpec, workers: usize) -> Result<SweepOutput, HarnessError> {
    sweep.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let jobs: Vec<(usize, usize)> = (0..sweep.cells.len())
        .flat_map(|c| (0..sweep.trials).map(move |t| (c, t)))
        .collect();
    let rows: Vec<TrialRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| run_trial(sweep, c, t))
            .collect()
    });

    let mut records = Vec::with_capacity(rows.len() + sweep.cells.len());
    for (cell, chunk) in rows.chunks(sweep.trials).enumerate() {
        records.extend(chunk.iter().cloned());
        records.push(cell_mean(cell, &sweep.cells[cell], chunk, sweep));
    }
    let has_errors = records.iter().any(|r| r.kind == "error");
    Ok(SweepOutput {
        records,
        has_errors,
    })
}

/// Renders sweep records as CSV with the schema header comments.
pub fn write_csv(sweep: &SweepSpec, records: &[TrialRecord]) -> Result<String, HarnessError> {
    let mut out = format!("# schema={SCHEMA_VERSION}\n");
    out.push_str(&format!(
        "# base_seed={} trials={} cells={} stem={} c={} c2={}\n",
        sweep.base_seed,
        sweep.trials,
        sweep.cells.len(),
        sweep.stem,
        sweep.c,
        sweep.c2
    ));
    for (k, cell) in sweep.cells.iter().enumerate() {
        let kv: Vec<String> = cell
            .to_kv()
            .into_iter()
            .filter(|l| !l.starts_with("seed="))
            .collect();
        out.push_str(&format!("# cell {k}: {}\n", kv.join(" ")));
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        writer.serialize(r)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    out.push_str(&String::from_utf8_lossy(&bytes));
    Ok(out)
}

/// Parses CSV written by [`write_csv`], skipping comment lines.
pub fn read_csv(text: &str) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for r in reader.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

/// A grid cell of the single-parameter model as seen by the fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitCell {
    pub attributes: usize,
    pub objects: usize,
    pub p: f64,
    pub trials: usize,
    pub observed_mean: f64,
    pub predicted: f64,
    /// `(predicted - observed) / observed`
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    /// Constant of the average exponent, least squares on `ln(mean count)`.
    pub c: f64,
    /// Largest `c2` for which every input row lies on or above the
    /// almost-sure lower curve.
    pub c2: f64,
    pub cells: Vec<FitCell>,
    /// Euclidean norm of the residuals in log space.
    pub log_residual_norm: f64,
    pub skipped_cells: usize,
}

impl FitReport {
    pub fn max_relative_residual(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.relative_residual.abs())
            .fold(0.0, f64::max)
    }
}

struct Terms {
    ln_n: f64,
    base: f64,
    lnln_m: f64,
    lower_base: f64,
}

fn exponent_terms(attributes: usize, objects: usize, p: f64) -> Option<Terms> {
    let params = ContextParams {
        n_attributes: attributes,
        n_objects: objects,
        p,
    };
    let query = params.hypergraph_query(0.0);
    let base = avg_pp_exponent(&params, 0.0).ok()?;
    let lower_base = almost_sure_lower_exponent(&params, 0.0).ok()?;
    d_of_alpha(query.alpha).ok()?;
    Some(Terms {
        ln_n: (attributes as f64).ln(),
        base,
        lnln_m: query.m.ln().ln(),
        lower_base,
    })
}

/// Fits `c` so that `n^E(n, m, p; c)` best matches the per-cell mean
/// transversal count in log space, and `c2` as the lower envelope of the
/// individual rows.
///
/// Rows with `kind` `trial` are used when present, otherwise `mean` rows.
/// Cells whose bound is undefined (`|O| q < 3`) are skipped.
pub fn fit_exponent(rows: &[TrialRecord]) -> Result<FitReport, HarnessError> {
    let use_trials = rows.iter().any(|r| r.is_trial());
    let wanted = if use_trials { "trial" } else { "mean" };
    let mut groups: BTreeMap<(usize, usize, u64), Vec<f64>> = BTreeMap::new();
    for r in rows
        .iter()
        .filter(|r| r.kind == wanted && r.model == "single")
    {
        if let (Some(p), Some(count)) = (r.p, r.mt_mean) {
            groups
                .entry((r.attributes, r.objects, p.to_bits()))
                .or_default()
                .push(count);
        }
    }

    let mut cells = Vec::new();
    let mut skipped = 0;
    for (&(attributes, objects, p_bits), counts) in &groups {
        let p = f64::from_bits(p_bits);
        match exponent_terms(attributes, objects, p) {
            Some(terms) if counts.iter().all(|&c| c > 0.0) => {
                cells.push((attributes, objects, p, terms, counts))
            }
            _ => skipped += 1,
        }
    }
    if cells.len() < 3 {
        return Err(HarnessError::TooFewCells(cells.len()));
    }

    // ln(obs) = ln n * base + c * ln n * lnln m
    let mut num = 0.0;
    let mut den = 0.0;
    for (_, _, _, t, counts) in &cells {
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let a = t.ln_n * t.lnln_m;
        num += a * (mean.ln() - t.ln_n * t.base);
        den += a * a;
    }
    if !(den > 1e-12) || !num.is_finite() {
        return Err(HarnessError::Singular(format!(
            "regressor sum of squares {den} leaves c undetermined"
        )));
    }
    let c = num / den;

    let mut c2 = f64::INFINITY;
    let mut report_cells = Vec::with_capacity(cells.len());
    let mut sq = 0.0;
    for (attributes, objects, p, t, counts) in &cells {
        for &count in counts.iter() {
            let slack = (count.ln() / t.ln_n - t.lower_base) / t.lnln_m;
            c2 = c2.min(slack);
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let log_pred = t.ln_n * (t.base + c * t.lnln_m);
        sq += (log_pred - mean.ln()).powi(2);
        let predicted = log_pred.exp();
        report_cells.push(FitCell {
            attributes: *attributes,
            objects: *objects,
            p: *p,
            trials: counts.len(),
            observed_mean: mean,
            predicted,
            relative_residual: (predicted - mean) / mean,
        });
    }
    Ok(FitReport {
        c,
        c2,
        cells: report_cells,
        log_residual_norm: sq.sqrt(),
        skipped_cells: skipped,
    })
}

/// Whether a trial row's mean transversal count exceeds
/// `n^(log_{1/p}(|O| q) + c2 ln ln(|O| q))`. `None` when the row has no
/// defined bound.
pub fn exceeds_lower_bound(row: &TrialRecord, c2: f64) -> Option<bool> {
    let p = row.p?;
    let count = row.mt_mean?;
    let params = ContextParams {
        n_attributes: row.attributes,
        n_objects: row.objects,
        p,
    };
    let e = almost_sure_lower_exponent(&params, c2).ok()?;
    Some(count.ln() > e * (row.attributes as f64).ln())
}
