//! Seeded random formal contexts.
//!
//! Two models: every cell independently present with one probability `p`,
//! and a multi-parametric model where each attribute has its own
//! probability determined by its class (ubiquitous, rare, or free).
//!
//! Randomness comes from ChaCha8, one stream per attribute column. The
//! stream for column `j` is seeded with `splitmix64(seed ^ splitmix64(j))`,
//! so a column's contents depend only on the seed, its index and its
//! probability, never on how columns are scheduled.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::context::FormalContext;
use crate::set::ObjectSet;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("probability {name}={value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("x={0} must be a finite non-negative number")]
    X(f64),
    #[error("u_size + r_size = {sum} exceeds the attribute count {n}")]
    Partition { sum: usize, n: usize },
    #[error("rare attributes need at least 3 attributes (got {0}): 1/ln n must be below 1")]
    RareNeedsThree(usize),
    #[error("bad spec line {line:?}: {reason}")]
    Spec { line: String, reason: String },
}

/// Finalizer of the SplitMix64 generator; a bijective 64-bit mixer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from a seed and an index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

fn column_rng(seed: u64, column: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, column as u64))
}

/// Samples a context whose column `j` has each cell set with
/// probability `probs[j]`.
pub fn generate_columns(n_objects: usize, probs: &[f64], seed: u64) -> FormalContext {
    let columns: Vec<ObjectSet> = probs
        .par_iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut rng = column_rng(seed, j);
            ObjectSet::from_indices(n_objects, (0..n_objects).filter(|_| rng.gen_bool(p)))
        })
        .collect();
    FormalContext::from_columns(n_objects, columns)
}

fn check_probability(name: &'static str, value: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::Probability { name, value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleParamSpec {
    pub n_objects: usize,
    pub n_attributes: usize,
    /// Probability that an object has an attribute.
    pub p: f64,
    pub seed: u64,
}

impl SingleParamSpec {
    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_probability("p", self.p)
    }
}

/// Attribute classes: indices `0..u_size` are ubiquitous, the next
/// `r_size` are rare, and the rest are free.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiParamSpec {
    pub n_objects: usize,
    pub n_attributes: usize,
    pub u_size: usize,
    pub r_size: usize,
    /// A ubiquitous attribute is missing from an object with probability `x / n_objects`.
    pub x: f64,
    pub f_prob: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AttributeClass {
    Ubiquitous,
    Rare,
    Free,
}

impl MultiParamSpec {
    pub fn f_size(&self) -> usize {
        self.n_attributes - self.u_size - self.r_size
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_probability("f_prob", self.f_prob)?;
        if !(self.x.is_finite() && self.x >= 0.0) {
            return Err(ModelError::X(self.x));
        }
        let sum = self.u_size + self.r_size;
        if sum > self.n_attributes {
            return Err(ModelError::Partition {
                sum,
                n: self.n_attributes,
            });
        }
        if self.r_size > 0 && self.n_attributes < 3 {
            return Err(ModelError::RareNeedsThree(self.n_attributes));
        }
        Ok(())
    }

    pub fn class_of(&self, attribute: usize) -> AttributeClass {
        if attribute < self.u_size {
            AttributeClass::Ubiquitous
        } else if attribute < self.u_size + self.r_size {
            AttributeClass::Rare
        } else {
            AttributeClass::Free
        }
    }

    pub fn ubiquitous_probability(&self) -> f64 {
        if self.n_objects == 0 {
            1.0
        } else {
            1.0 - (self.x / self.n_objects as f64).min(1.0)
        }
    }

    pub fn rare_probability(&self) -> f64 {
        1.0 / (self.n_attributes as f64).ln()
    }

    /// Per-attribute probability that an object has the attribute.
    pub fn effective_probabilities(&self) -> Result<Vec<f64>, ModelError> {
        self.validate()?;
        Ok((0..self.n_attributes)
            .map(|a| match self.class_of(a) {
                AttributeClass::Ubiquitous => self.ubiquitous_probability(),
                AttributeClass::Rare => self.rare_probability(),
                AttributeClass::Free => self.f_prob,
            })
            .collect())
    }
}

pub fn gen_single(spec: &SingleParamSpec) -> Result<FormalContext, ModelError> {
    spec.validate()?;
    Ok(generate_columns(
        spec.n_objects,
        &vec![spec.p; spec.n_attributes],
        spec.seed,
    ))
}

pub fn gen_multi(spec: &MultiParamSpec) -> Result<FormalContext, ModelError> {
    let probs = spec.effective_probabilities()?;
    Ok(generate_columns(spec.n_objects, &probs, spec.seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Single(SingleParamSpec),
    Multi(MultiParamSpec),
}

impl ModelSpec {
    pub fn n_objects(&self) -> usize {
        match self {
            ModelSpec::Single(s) => s.n_objects,
            ModelSpec::Multi(s) => s.n_objects,
        }
    }

    pub fn n_attributes(&self) -> usize {
        match self {
            ModelSpec::Single(s) => s.n_attributes,
            ModelSpec::Multi(s) => s.n_attributes,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelSpec::Single(s) => s.seed,
            ModelSpec::Multi(s) => s.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ModelSpec::Single(s) => s.seed = seed,
            ModelSpec::Multi(s) => s.seed = seed,
        }
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ModelSpec::Single(s) => s.validate(),
            ModelSpec::Multi(s) => s.validate(),
        }
    }

    pub fn probabilities(&self) -> Result<Vec<f64>, ModelError> {
        match self {
            ModelSpec::Single(s) => s.validate().map(|_| vec![s.p; s.n_attributes]),
            ModelSpec::Multi(s) => s.effective_probabilities(),
        }
    }

    pub fn generate(&self) -> Result<FormalContext, ModelError> {
        match self {
            ModelSpec::Single(s) => gen_single(s),
            ModelSpec::Multi(s) => gen_multi(s),
        }
    }

    /// Flat `key=value` lines. Multi-parametric specs also carry the
    /// resolved probabilities as a `p_j` line, which the reader ignores.
    pub fn to_kv(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            ModelSpec::Single(s) => {
                out.push("model=single".to_string());
                out.push(format!("objects={}", s.n_objects));
                out.push(format!("attributes={}", s.n_attributes));
                out.push(format!("p={}", s.p));
                out.push(format!("seed={}", s.seed));
            }
            ModelSpec::Multi(s) => {
                out.push("model=multi".to_string());
                out.push(format!("objects={}", s.n_objects));
                out.push(format!("attributes={}", s.n_attributes));
                out.push(format!("u_size={}", s.u_size));
                out.push(format!("r_size={}", s.r_size));
                out.push(format!("x={}", s.x));
                out.push(format!("f_prob={}", s.f_prob));
                out.push(format!("seed={}", s.seed));
                if let Ok(probs) = s.effective_probabilities() {
                    let mut line = String::from("p_j=");
                    for (j, p) in probs.iter().enumerate() {
                        if j > 0 {
                            line.push(',');
                        }
                        let _ = write!(line, "{p:.6}");
                    }
                    out.push(line);
                }
            }
        }
        out
    }

    /// Parses lines written by [`ModelSpec::to_kv`]. Blank lines are
    /// skipped; missing keys fall back to the CLI defaults.
    pub fn from_kv<S: AsRef<str>>(lines: &[S]) -> Result<Self, ModelError> {
        let mut model = None;
        let mut objects = 10usize;
        let mut attributes = 10usize;
        let mut p = 0.5f64;
        let mut seed = 0u64;
        let mut u_size = 0usize;
        let mut r_size = 0usize;
        let mut x = 1.0f64;
        let mut f_prob = 0.5f64;
        for raw in lines {
            let line = raw.as_ref().trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| ModelError::Spec {
                line: line.to_string(),
                reason: reason.to_string(),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad("expected an integer"))
            };
            let real = || value.parse::<f64>().map_err(|_| bad("expected a number"));
            match key {
                "model" => match value {
                    "single" | "multi" => model = Some(value.to_string()),
                    _ => return Err(bad("model must be single or multi")),
                },
                "objects" => objects = int()?,
                "attributes" => attributes = int()?,
                "p" => p = real()?,
                "seed" => seed = value.parse().map_err(|_| bad("expected a 64-bit seed"))?,
                "u_size" => u_size = int()?,
                "r_size" => r_size = int()?,
                "x" => x = real()?,
                "f_prob" => f_prob = real()?,
                "p_j" => {}
                _ => return Err(bad("unknown key")),
            }
        }
        let spec = match model.as_deref() {
            Some("multi") => ModelSpec::Multi(MultiParamSpec {
                n_objects: objects,
                n_attributes: attributes,
                u_size,
                r_size,
                x,
                f_prob,
                seed,
            }),
            Some(_) => ModelSpec::Single(SingleParamSpec {
                n_objects: objects,
                n_attributes: attributes,
                p,
                seed,
            }),
            None => {
                return Err(ModelError::Spec {
                    line: String::new(),
                    reason: "missing model key".into(),
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(n_objects: usize, n_attributes: usize, p: f64, seed: u64) -> SingleParamSpec {
        SingleParamSpec {
            n_objects,
            n_attributes,
            p,
            seed,
        }
    }

    fn multi(n: usize, m: usize, u: usize, r: usize, x: f64, f: f64, seed: u64) -> MultiParamSpec {
        MultiParamSpec {
            n_objects: m,
            n_attributes: n,
            u_size: u,
            r_size: r,
            x,
            f_prob: f,
            seed,
        }
    }

    #[test]
    fn extreme_probabilities() {
        let full = gen_single(&single(7, 9, 1.0, 3)).unwrap();
        assert_eq!(full.incidence_count(), 63);
        let empty = gen_single(&single(7, 9, 0.0, 3)).unwrap();
        assert_eq!(empty.incidence_count(), 0);
        let ubiquitous = gen_multi(&multi(6, 8, 6, 0, 0.0, 0.5, 1)).unwrap();
        assert_eq!(ubiquitous.incidence_count(), 48);
    }

    #[test]
    fn seed_determinism() {
        let a = gen_single(&single(40, 30, 0.3, 99)).unwrap();
        let b = gen_single(&single(40, 30, 0.3, 99)).unwrap();
        let c = gen_single(&single(40, 30, 0.3, 100)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn density_within_three_sigma() {
        let ctx = gen_single(&single(100, 100, 0.5, 2024)).unwrap();
        let n = 10_000.0;
        let sigma = (n * 0.25f64).sqrt();
        assert!((ctx.incidence_count() as f64 - n * 0.5).abs() <= 3.0 * sigma);

        let spec = multi(100, 100, 0, 100, 1.0, 0.5, 5);
        let p = 1.0 / 100f64.ln();
        assert!((p - 0.217).abs() < 1e-3);
        let ctx = gen_multi(&spec).unwrap();
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((ctx.incidence_count() as f64 - n * p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn multi_reduces_to_single() {
        let m = gen_multi(&multi(12, 30, 0, 0, 1.0, 0.5, 77)).unwrap();
        let s = gen_single(&single(30, 12, 0.5, 77)).unwrap();
        assert_eq!(m, s);
    }

    #[test]
    fn effective_probability_examples() {
        let all_f = multi(4, 10, 0, 0, 1.0, 0.3, 0)
            .effective_probabilities()
            .unwrap();
        assert_eq!(all_f, vec![0.3; 4]);
        let u = multi(4, 100, 1, 0, 5.0, 0.3, 0)
            .effective_probabilities()
            .unwrap();
        assert!((u[0] - 0.95).abs() < 1e-12);
        let spec = multi(8, 10, 0, 1, 1.0, 0.5, 0);
        // n = e^2 is not an integer; check the formula directly
        assert!((1.0 / std::f64::consts::E.powi(2).ln() - 0.5).abs() < 1e-12);
        assert!((spec.effective_probabilities().unwrap()[0] - 1.0 / 8f64.ln()).abs() < 1e-12);
        // x larger than m clamps to zero probability
        assert_eq!(multi(3, 2, 3, 0, 5.0, 0.5, 0).ubiquitous_probability(), 0.0);
    }

    #[test]
    fn partition_order() {
        let spec = multi(10, 20, 2, 5, 2.0, 0.4, 0);
        let probs = spec.effective_probabilities().unwrap();
        assert_eq!(spec.class_of(1), AttributeClass::Ubiquitous);
        assert_eq!(spec.class_of(2), AttributeClass::Rare);
        assert_eq!(spec.class_of(7), AttributeClass::Free);
        assert_eq!(spec.f_size(), 3);
        assert!((probs[0] - 0.9).abs() < 1e-12);
        assert!((probs[6] - 1.0 / 10f64.ln()).abs() < 1e-12);
        assert_eq!(probs[9], 0.4);
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(matches!(
            gen_single(&single(2, 2, 1.5, 0)),
            Err(ModelError::Probability { name: "p", .. })
        ));
        assert_eq!(
            gen_multi(&multi(2, 5, 0, 1, 1.0, 0.5, 0)),
            Err(ModelError::RareNeedsThree(2))
        );
        assert!(matches!(
            gen_multi(&multi(5, 5, 3, 3, 1.0, 0.5, 0)),
            Err(ModelError::Partition { sum: 6, n: 5 })
        ));
        assert_eq!(
            gen_multi(&multi(5, 5, 1, 0, -1.0, 0.5, 0)),
            Err(ModelError::X(-1.0))
        );
        assert!(gen_multi(&multi(5, 5, 1, 0, 1.0, f64::NAN, 0)).is_err());
    }

    #[test]
    fn kv_roundtrip() {
        let specs = [
            ModelSpec::Single(single(3, 4, 0.25, 9)),
            ModelSpec::Multi(multi(10, 20, 3, 5, 2.0, 0.4, u64::MAX)),
        ];
        for spec in specs {
            let kv = spec.to_kv();
            assert_eq!(ModelSpec::from_kv(&kv).unwrap(), spec);
        }
        let kv = ModelSpec::Multi(multi(4, 10, 1, 1, 2.0, 0.5, 0)).to_kv();
        assert!(kv.iter().any(|l| l.starts_with("p_j=0.800000,")));
        assert!(ModelSpec::from_kv(&["model=single", "colour=red"]).is_err());
        assert!(ModelSpec::from_kv(&["p=0.5"]).is_err());
        assert!(ModelSpec::from_kv(&["model=single", "p=2"]).is_err());
    }
}
