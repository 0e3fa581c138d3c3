//! Closed-form exponents for the average and almost-sure number of minimal
//! transversals, transported to proper premises of random contexts, plus a
//! regime classifier for the multi-parametric model.
//!
//! Bound magnitudes are returned as exponents of `n` or as `log10` values;
//! the raw numbers overflow `f64` at modest sizes.

use serde::Serialize;
use thiserror::Error;

use crate::random::MultiParamSpec;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("alpha must be positive, got {0}")]
    Alpha(f64),
    #[error("probability must lie strictly between 0 and 1, got {0}")]
    Probability(f64),
    #[error("vertex count must be at least 2, got {0}")]
    Vertices(f64),
    #[error("degenerate-dense: edge count {0} is below 3, so ln ln m is not positive")]
    DegenerateDense(f64),
    #[error("beta must be positive, got {0}")]
    Beta(f64),
}

/// `1` for `alpha <= 1`, `(alpha + 1)^2 / (4 alpha)` above.
pub fn d_of_alpha(alpha: f64) -> Result<f64, BoundError> {
    if !(alpha > 0.0) {
        return Err(BoundError::Alpha(alpha));
    }
    Ok(if alpha <= 1.0 {
        1.0
    } else {
        (alpha + 1.0).powi(2) / (4.0 * alpha)
    })
}

/// Parameters of a random hypergraph with `m = beta * n^alpha` edges on
/// `n` vertices, each vertex in each edge with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundQuery {
    pub n: f64,
    pub m: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl BoundQuery {
    /// Derives `alpha` from `m = n^alpha` (`beta = 1`).
    pub fn new(n: f64, m: f64, p: f64, c: f64) -> Self {
        Self::with_beta(n, m, p, 1.0, c)
    }

    pub fn with_beta(n: f64, m: f64, p: f64, beta: f64, c: f64) -> Self {
        BoundQuery {
            n,
            m,
            p,
            alpha: (m / beta).ln() / n.ln(),
            beta,
            c,
        }
    }

    /// Uses the given `alpha` as is.
    pub fn with_alpha(n: f64, m: f64, p: f64, alpha: f64, c: f64) -> Self {
        BoundQuery {
            n,
            m,
            p,
            alpha,
            beta: m / n.powf(alpha),
            c,
        }
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    fn validate(&self) -> Result<(), BoundError> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(BoundError::Probability(self.p));
        }
        if !(self.n >= 2.0) {
            return Err(BoundError::Vertices(self.n));
        }
        if !(self.beta > 0.0) {
            return Err(BoundError::Beta(self.beta));
        }
        if !(self.m >= 3.0) {
            return Err(BoundError::DegenerateDense(self.m));
        }
        Ok(())
    }
}

/// `d(alpha) * log_{1/q} m + c * ln ln m`; the average number of minimal
/// transversals is `O(n^E)`.
pub fn avg_mt_exponent(q: &BoundQuery) -> Result<f64, BoundError> {
    q.validate()?;
    let d = d_of_alpha(q.alpha)?;
    Ok(d * q.m.ln() / (1.0 / q.q()).ln() + q.c * q.m.ln().ln())
}

/// A random context: `n_objects x n_attributes`, each cell present with
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContextParams {
    pub n_attributes: usize,
    pub n_objects: usize,
    pub p: f64,
}

impl ContextParams {
    /// Expected number of edges of an attribute hypergraph, `|O| * q`.
    pub fn edge_count(&self) -> f64 {
        self.n_objects as f64 * (1.0 - self.p)
    }

    /// The hypergraph query for one attribute: `m = |O| q`, `n = |A|`, and
    /// a vertex lies in an edge exactly when the object lacks it, so the
    /// hypergraph's vertex probability is the context's `q`.
    pub fn hypergraph_query(&self, c: f64) -> BoundQuery {
        BoundQuery::new(self.n_attributes as f64, self.edge_count(), 1.0 - self.p, c)
    }

    fn validate(&self) -> Result<(), BoundError> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(BoundError::Probability(self.p));
        }
        Ok(())
    }
}

/// Exponent `E` such that one attribute has on average `O(|A|^E)` proper
/// premises.
pub fn avg_pp_exponent(params: &ContextParams, c: f64) -> Result<f64, BoundError> {
    params.validate()?;
    avg_mt_exponent(&params.hypergraph_query(c))
}

/// `log10 |A|^(E+1)`: the average-size bound for the whole base of proper
/// premises, which also bounds the number of pseudo-intents.
pub fn total_base_bound_log10(params: &ContextParams, c: f64) -> Result<f64, BoundError> {
    let e = avg_pp_exponent(params, c)?;
    Ok((e + 1.0) * (params.n_attributes as f64).log10())
}

/// `log_{1/p}(|O| q) + c2 * ln ln(|O| q)`: per attribute, the number of
/// proper premises almost surely exceeds `|A|` to this power. `c2` stands
/// in for the unspecified `O(ln ln m)` term and may be negative.
pub fn almost_sure_lower_exponent(params: &ContextParams, c2: f64) -> Result<f64, BoundError> {
    params.validate()?;
    let q = params.hypergraph_query(0.0);
    q.validate()?;
    Ok(q.m.ln() / (1.0 / params.p).ln() + c2 * q.m.ln().ln())
}

/// `log10 |A|^(L+1)` for the almost-sure lower exponent `L`, covering all
/// attributes.
pub fn almost_sure_total_log10(params: &ContextParams, c2: f64) -> Result<f64, BoundError> {
    let e = almost_sure_lower_exponent(params, c2)?;
    Ok((e + 1.0) * (params.n_attributes as f64).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Polynomial,
    QuasiPolynomial,
    Exponential,
    Unclassified,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Polynomial => "polynomial",
            Regime::QuasiPolynomial => "quasi-polynomial",
            Regime::Exponential => "exponential",
            Regime::Unclassified => "unclassified",
        }
    }
}

/// Which attribute classes the polynomial condition counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolynomialCount {
    /// `|U ∪ R|`
    UbiquitousAndRare,
    /// `|F ∪ R|`: few non-ubiquitous attributes.
    FreeAndRare,
}

/// Finite-size thresholds for the asymptotic regime conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeThresholds {
    /// polynomial when the counted set has at most `k1 * ln n` attributes
    pub k1: f64,
    /// quasi-polynomial when `|R| <= k2 * (ln n)^k3`
    pub k2: f64,
    pub k3: f64,
    /// exponential when `|R| >= k4 * n`
    pub k4: f64,
    pub polynomial_count: PolynomialCount,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            k1: 1.0,
            k2: 1.0,
            k3: 2.0,
            k4: 0.5,
            polynomial_count: PolynomialCount::UbiquitousAndRare,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// The condition that matched, with the numbers plugged in.
    pub witness: String,
    pub thresholds: RegimeThresholds,
}

/// Classifies a multi-parametric spec into the tightest matching growth
/// regime for its number of minimal transversals per attribute.
pub fn classify_regime(spec: &MultiParamSpec, thresholds: &RegimeThresholds) -> RegimeReport {
    let n = spec.n_attributes as f64;
    let ln_n = if spec.n_attributes > 1 { n.ln() } else { 0.0 };
    let r = spec.r_size as f64;
    let (counted, label) = match thresholds.polynomial_count {
        PolynomialCount::UbiquitousAndRare => ((spec.u_size + spec.r_size) as f64, "|U∪R|"),
        PolynomialCount::FreeAndRare => ((spec.f_size() + spec.r_size) as f64, "|F∪R|"),
    };
    let poly_limit = thresholds.k1 * ln_n;
    let quasi_limit = thresholds.k2 * ln_n.powf(thresholds.k3);
    let exp_limit = thresholds.k4 * n;
    let (regime, witness) = if counted <= poly_limit {
        (
            Regime::Polynomial,
            format!("{label}={counted} <= {poly_limit:.4}"),
        )
    } else if r <= quasi_limit {
        (
            Regime::QuasiPolynomial,
            format!("|R|={r} <= {quasi_limit:.4}"),
        )
    } else if r >= exp_limit {
        (Regime::Exponential, format!("|R|={r} >= {exp_limit:.4}"))
    } else {
        (
            Regime::Unclassified,
            format!(
                "{label}={counted} > {poly_limit:.4}, {quasi_limit:.4} < |R|={r} < {exp_limit:.4}"
            ),
        )
    };
    RegimeReport {
        regime,
        witness,
        thresholds: *thresholds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ctx(n_attributes: usize, n_objects: usize, p: f64) -> ContextParams {
        ContextParams {
            n_attributes,
            n_objects,
            p,
        }
    }

    fn multi(n: usize, u: usize, r: usize) -> MultiParamSpec {
        MultiParamSpec {
            n_objects: 30,
            n_attributes: n,
            u_size: u,
            r_size: r,
            x: 2.0,
            f_prob: 0.5,
            seed: 0,
        }
    }

    #[test]
    fn d_examples_and_shape() {
        assert_eq!(d_of_alpha(1.0).unwrap(), 1.0);
        assert_eq!(d_of_alpha(2.0).unwrap(), 9.0 / 8.0);
        assert_eq!(d_of_alpha(0.5).unwrap(), 1.0);
        assert_eq!(d_of_alpha(0.0), Err(BoundError::Alpha(0.0)));
        assert!(d_of_alpha(-1.0).is_err());
        assert!(d_of_alpha(f64::NAN).is_err());
        assert_abs_diff_eq!(d_of_alpha(1.0 + 1e-9).unwrap(), 1.0, epsilon = 1e-12);
        let mut prev = 1.0;
        for k in 1..=400 {
            let alpha = k as f64 * 0.025;
            let d = d_of_alpha(alpha).unwrap();
            assert!(d >= 1.0);
            if alpha > 1.0 {
                assert!(d > prev);
            }
            prev = d;
        }
    }

    #[test]
    fn avg_mt_examples() {
        let q = BoundQuery::with_alpha(100.0, 10.0, 0.5, 0.5, 1.0);
        // log2(10) + ln ln 10
        assert_abs_diff_eq!(
            avg_mt_exponent(&q).unwrap(),
            4.155_960_540_135_318,
            epsilon = 1e-12
        );
        let q = BoundQuery::new(100.0, 10.0, 0.5, 1.0);
        assert_abs_diff_eq!(q.alpha, 0.5, epsilon = 1e-12);
        let q = BoundQuery::new(50.0, 20.0, 0.3, 0.0);
        assert_abs_diff_eq!(
            avg_mt_exponent(&q).unwrap(),
            20f64.ln() / (1.0 / 0.7f64).ln(),
            epsilon = 1e-12
        );
        assert_eq!(
            avg_mt_exponent(&BoundQuery::new(10.0, 2.0, 0.5, 1.0)),
            Err(BoundError::DegenerateDense(2.0))
        );
    }

    #[test]
    fn avg_mt_monotonicity() {
        for n in [10.0, 50.0, 200.0] {
            let mut m = 3.0;
            let mut prev = avg_mt_exponent(&BoundQuery::new(n, m, 0.5, 1.0)).unwrap();
            for _ in 0..10 {
                m *= 2.0;
                let e = avg_mt_exponent(&BoundQuery::new(n, m, 0.5, 1.0)).unwrap();
                assert!(e > prev, "n={n} m={m}");
                prev = e;
            }
        }
        // denser edges give fewer minimal transversals: decreasing in p
        let mut prev = f64::INFINITY;
        for k in 1..20 {
            let e = avg_mt_exponent(&BoundQuery::new(40.0, 25.0, k as f64 * 0.05, 1.0)).unwrap();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn avg_pp_examples() {
        assert_abs_diff_eq!(
            avg_pp_exponent(&ctx(50, 50, 0.5), 1.0).unwrap(),
            4.643_856_189_774_724 + 1.169_032_175_887_056,
            epsilon = 1e-12
        );
        assert!(matches!(
            avg_pp_exponent(&ctx(50, 50, 0.99), 1.0),
            Err(BoundError::DegenerateDense(_))
        ));
        assert!(matches!(
            avg_pp_exponent(&ctx(50, 50, 1.0), 1.0),
            Err(BoundError::Probability(_))
        ));
        // swapping p and q at fixed m only changes the log base
        let a = ctx(50, 40, 0.3);
        let b = ctx(50, 40, 0.7);
        let ea = avg_pp_exponent(&a, 0.0).unwrap();
        let eb = avg_pp_exponent(&b, 0.0).unwrap();
        assert_abs_diff_eq!(
            ea * (1.0 / 0.3f64).ln() / a.edge_count().ln(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            eb * (1.0 / 0.7f64).ln() / b.edge_count().ln(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn variable_mapping_matches_direct_query() {
        for (na, no, p) in [(10, 20, 0.4), (30, 900, 0.5), (8, 100, 0.2)] {
            let params = ctx(na, no, p);
            let m = no as f64 * (1.0 - p);
            let direct = BoundQuery {
                n: na as f64,
                m,
                p: 1.0 - p,
                alpha: m.ln() / (na as f64).ln(),
                beta: 1.0,
                c: 0.7,
            };
            assert_abs_diff_eq!(
                avg_pp_exponent(&params, 0.7).unwrap(),
                avg_mt_exponent(&direct).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn total_bound_examples() {
        let p = ctx(5, 5, 0.4);
        let e = avg_pp_exponent(&p, 1.0).unwrap();
        assert_abs_diff_eq!(e, 1.293_025_674_332_489, epsilon = 1e-12);
        assert_abs_diff_eq!(
            total_base_bound_log10(&p, 1.0).unwrap(),
            (e + 1.0) * 5f64.log10(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            total_base_bound_log10(&p, 1.0).unwrap(),
            1.602_756_165_530_783,
            epsilon = 1e-12
        );
        let mut prev = 0.0;
        for no in 6..60 {
            let v = total_base_bound_log10(&ctx(20, no, 0.5), 1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn lower_exponent_examples() {
        let p = ctx(50, 50, 0.5);
        assert_abs_diff_eq!(
            almost_sure_lower_exponent(&p, 0.0).unwrap(),
            4.643_856_189_774_724,
            epsilon = 1e-12
        );
        let q = ctx(30, 40, 0.35);
        assert_abs_diff_eq!(
            almost_sure_lower_exponent(&q, 0.0).unwrap(),
            26f64.ln() / (1.0 / 0.35f64).ln(),
            epsilon = 1e-12
        );
        for (na, no, p) in [(20, 10, 0.5), (50, 50, 0.5), (30, 60, 0.4)] {
            let params = ctx(na, no, p);
            if params.hypergraph_query(1.0).alpha <= 1.0 {
                assert!(
                    almost_sure_lower_exponent(&params, 0.5).unwrap()
                        <= avg_pp_exponent(&params, 1.0).unwrap()
                );
            }
        }
        let total = almost_sure_total_log10(&p, 0.0).unwrap();
        assert_abs_diff_eq!(
            total,
            (4.643_856_189_774_724 + 1.0) * 50f64.log10(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn regime_examples() {
        let t = RegimeThresholds::default();
        let mut spec = multi(1000, 2, 3);
        assert_eq!(classify_regime(&spec, &t).regime, Regime::Polynomial);
        spec.u_size = 0;
        spec.r_size = 40;
        assert_eq!(classify_regime(&spec, &t).regime, Regime::QuasiPolynomial);
        let spec = multi(100, 0, 60);
        let report = classify_regime(&spec, &t);
        assert_eq!(report.regime, Regime::Exponential);
        assert_eq!(report.witness, "|R|=60 >= 50.0000");
        assert_eq!(
            classify_regime(&multi(100, 0, 40), &t).regime,
            Regime::Unclassified
        );
        assert_eq!(
            classify_regime(&multi(30, 0, 30), &t).regime,
            Regime::Exponential
        );
    }

    #[test]
    fn regime_reading_and_overlap() {
        let spec = multi(30, 27, 0);
        let default = RegimeThresholds::default();
        assert_eq!(
            classify_regime(&spec, &default).regime,
            Regime::QuasiPolynomial
        );
        let fr = RegimeThresholds {
            polynomial_count: PolynomialCount::FreeAndRare,
            ..default
        };
        assert_eq!(classify_regime(&spec, &fr).regime, Regime::Polynomial);
        // with k4 tiny both quasi and exponential match; the tighter wins
        let loose = RegimeThresholds {
            k4: 0.01,
            ..default
        };
        assert_eq!(
            classify_regime(&multi(100, 0, 10), &loose).regime,
            Regime::QuasiPolynomial
        );
        for n in 3..40 {
            for r in 0..=n {
                let a = classify_regime(&multi(n, 0, r), &default);
                assert_eq!(a, classify_regime(&multi(n, 0, r), &default));
            }
        }
    }
}
