//! Risk-ratio estimators: crude, outcome regression, G-computation and IPW.
//!
//! Every estimator first collapses the data to distinct rows over the columns
//! it reads, so the cost of a fit (and of each bootstrap replicate) depends on
//! the number of distinct covariate patterns rather than on `n`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bootstrap::{self, BootstrapError, BootstrapSpec};
use crate::dataset::{Dataset, DatasetError};
use crate::glm::{self, Family, GlmError, Link, ModelSpec};
use crate::scm::ScmError;

/// Propensities closer than this to 0 or 1 are refused.
pub const PROPENSITY_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Unadjusted,
    OutcomeRegression,
    GComputation,
    Ipw,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Unadjusted, Method::OutcomeRegression, Method::GComputation, Method::Ipw];

    pub fn keyword(self) -> &'static str {
        match self {
            Method::Unadjusted => "unadjusted",
            Method::OutcomeRegression => "outcome_regression",
            Method::GComputation => "g_computation",
            Method::Ipw => "ipw",
        }
    }

    /// Row label used in result tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Unadjusted => "No adjustment",
            Method::OutcomeRegression => "Outcome regression",
            Method::GComputation => "G-computation",
            Method::Ipw => "IPW",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL.into_iter().find(|m| m.keyword() == s).ok_or_else(|| alloc::format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CiMethod {
    Wald,
    BootstrapPercentile,
    None,
}

impl CiMethod {
    pub fn keyword(self) -> &'static str {
        match self {
            CiMethod::Wald => "wald",
            CiMethod::BootstrapPercentile => "bootstrap_percentile",
            CiMethod::None => "none",
        }
    }
}

/// Working model for outcome regression; both use the log link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OutcomeFamily {
    /// Log-binomial.
    Binomial,
    /// Poisson with log link (the "modified Poisson" relative-risk model).
    #[default]
    Poisson,
}

impl OutcomeFamily {
    fn family(self) -> Family {
        match self {
            OutcomeFamily::Binomial => Family::Binomial,
            OutcomeFamily::Poisson => Family::Poisson,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            OutcomeFamily::Binomial => "binomial",
            OutcomeFamily::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Diagnostics {
    /// Largest fitted mean of any log-binomial fit behind the estimate,
    /// bootstrap replicates included.
    pub max_log_binomial_mean: Option<f64>,
    /// Smallest and largest inverse-probability weight.
    pub weight_range: Option<(f64, f64)>,
    pub bootstrap_replicates: Option<usize>,
    pub bootstrap_failures: Option<usize>,
    /// IRLS iterations of the point-estimate fits.
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EffectEstimate {
    pub method: Method,
    pub treatment: String,
    pub outcome: String,
    pub adjustment: Vec<String>,
    pub risk_ratio: f64,
    pub ci: Option<(f64, f64)>,
    pub ci_method: CiMethod,
    pub n: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("treatment `{0}` has an empty arm")]
    DegenerateArm(String),
    #[error("outcome risk is zero in the untreated arm")]
    ZeroRiskControlArm,
    #[error("outcome risk is zero in the treated arm")]
    ZeroRiskTreatedArm,
    #[error("estimated propensity {0} is at the boundary of (0, 1)")]
    PropensityAtBound(f64),
    #[error("invalid analysis: {0}")]
    InvalidAnalysis(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Glm(#[from] GlmError),
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
    #[error(transparent)]
    Scm(#[from] ScmError),
}

/// One estimator applied to one treatment/outcome pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub method: Method,
    pub treatment: String,
    pub outcome: String,
    pub adjust: Vec<String>,
    /// Treatment × adjuster interactions in the G-computation outcome model.
    pub interactions: bool,
    pub family: OutcomeFamily,
    /// Replicates and seed for G-computation and IPW intervals; its level
    /// also sets the Wald level.
    pub bootstrap: BootstrapSpec,
}

/// A point estimate without an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub risk_ratio: f64,
    pub max_log_binomial_mean: Option<f64>,
    pub weight_range: Option<(f64, f64)>,
    pub iterations: usize,
}

impl Analysis {
    pub fn new(method: Method, treatment: &str, outcome: &str, adjust: &[&str]) -> Self {
        Analysis {
            method,
            treatment: treatment.to_string(),
            outcome: outcome.to_string(),
            adjust: adjust.iter().map(|s| s.to_string()).collect(),
            interactions: false,
            family: OutcomeFamily::default(),
            bootstrap: BootstrapSpec::default(),
        }
    }

    pub fn with_interactions(mut self, on: bool) -> Self {
        self.interactions = on;
        self
    }

    pub fn with_family(mut self, family: OutcomeFamily) -> Self {
        self.family = family;
        self
    }

    pub fn with_bootstrap(mut self, bs: BootstrapSpec) -> Self {
        self.bootstrap = bs;
        self
    }

    /// Columns the estimator reads: treatment, outcome, then the adjusters.
    pub fn columns(&self) -> Vec<&str> {
        let mut c = alloc::vec![self.treatment.as_str(), self.outcome.as_str()];
        c.extend(self.adjust.iter().map(String::as_str));
        c
    }

    fn check(&self) -> Result<(), EstimateError> {
        let bad = |m: String| Err(EstimateError::InvalidAnalysis(m));
        if self.treatment == self.outcome {
            return bad("treatment and outcome are the same column".into());
        }
        if self.method == Method::Unadjusted && !self.adjust.is_empty() {
            return bad("the unadjusted estimate takes no adjustment set".into());
        }
        let cols = self.columns();
        for (i, c) in cols.iter().enumerate().skip(2) {
            if cols[..i].contains(c) {
                return bad(alloc::format!("`{c}` appears twice among treatment, outcome and adjusters"));
            }
        }
        Ok(())
    }

    fn collapse(&self, d: &Dataset) -> Result<Dataset, EstimateError> {
        Ok(d.patterns(&self.columns())?.collapsed())
    }

    /// Point estimate only; also the statistic behind each bootstrap
    /// replicate and behind the population oracle.
    pub fn point(&self, d: &Dataset) -> Result<Point, EstimateError> {
        self.check()?;
        self.point_collapsed(&self.collapse(d)?)
    }

    fn point_collapsed(&self, c: &Dataset) -> Result<Point, EstimateError> {
        let risks = arm_risks(c, &self.treatment, &self.outcome)?;
        let t = self.treatment.as_str();
        let adjust: Vec<&str> = self.adjust.iter().map(String::as_str).collect();
        let mut terms = alloc::vec![t];
        terms.extend(&adjust);
        match self.method {
            Method::Unadjusted => {
                Ok(Point { risk_ratio: risks.ratio()?, max_log_binomial_mean: None, weight_range: None, iterations: 0 })
            }
            Method::OutcomeRegression => {
                let spec = ModelSpec::new(&self.outcome, &terms, self.family.family(), Link::Log);
                let fit = glm::fit(c, &spec)?;
                Ok(Point {
                    risk_ratio: libm::exp(fit.coefficient(t)?),
                    max_log_binomial_mean: (self.family == OutcomeFamily::Binomial).then_some(fit.max_fitted_mean),
                    weight_range: None,
                    iterations: fit.iterations,
                })
            }
            Method::GComputation => {
                let mut spec = ModelSpec::logistic(&self.outcome, &terms);
                if self.interactions {
                    for a in &adjust {
                        spec = spec.interaction(t, a);
                    }
                }
                let fit = glm::fit(c, &spec)?;
                let treated = fit.predict_with(c, &[(t, 1)])?;
                let control = fit.predict_with(c, &[(t, 0)])?;
                let (mut m1, mut m0) = (0.0, 0.0);
                for i in 0..c.n_rows() {
                    m1 += c.weight(i) * treated[i];
                    m0 += c.weight(i) * control[i];
                }
                Ok(Point {
                    risk_ratio: m1 / m0,
                    max_log_binomial_mean: None,
                    weight_range: None,
                    iterations: fit.iterations,
                })
            }
            Method::Ipw => {
                let ps = glm::fit(c, &ModelSpec::logistic(t, &adjust))?;
                let p = ps.predict(c)?;
                let ti = c.column_index(t)?;
                let mut w = Vec::with_capacity(c.n_rows());
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for (i, &pi) in p.iter().enumerate() {
                    if !(pi > PROPENSITY_BOUND && pi < 1.0 - PROPENSITY_BOUND) {
                        return Err(EstimateError::PropensityAtBound(pi));
                    }
                    let wi = if c.get(i, ti) == 1 { 1.0 / pi } else { 1.0 / (1.0 - pi) };
                    if c.weight(i) > 0.0 {
                        lo = lo.min(wi);
                        hi = hi.max(wi);
                    }
                    w.push(wi);
                }
                let fit = glm::fit(c, &ModelSpec::log_binomial(&self.outcome, &[t]).with_weights(w))?;
                Ok(Point {
                    risk_ratio: libm::exp(fit.coefficient(t)?),
                    max_log_binomial_mean: Some(fit.max_fitted_mean),
                    weight_range: Some((lo, hi)),
                    iterations: ps.iterations + fit.iterations,
                })
            }
        }
    }

    /// Point estimate with its interval: Wald for the crude ratio and outcome
    /// regression, bootstrap percentile for G-computation and IPW.
    pub fn run(&self, d: &Dataset) -> Result<EffectEstimate, EstimateError> {
        self.check()?;
        let c = self.collapse(d)?;
        let point = self.point_collapsed(&c)?;
        let level = self.bootstrap.level;
        let t = self.treatment.as_str();
        let mut diagnostics = Diagnostics {
            max_log_binomial_mean: point.max_log_binomial_mean,
            weight_range: point.weight_range,
            iterations: point.iterations,
            ..Diagnostics::default()
        };
        let (ci, ci_method) = match self.method {
            Method::Unadjusted => {
                // The saturated log-binomial fit reproduces the crude ratio
                // and supplies its standard error.
                let fit = glm::fit(&c, &ModelSpec::log_binomial(&self.outcome, &[t]))?;
                diagnostics.max_log_binomial_mean = Some(fit.max_fitted_mean);
                diagnostics.iterations = fit.iterations;
                (Some(fit.wald_interval(t, level)?), CiMethod::Wald)
            }
            Method::OutcomeRegression => {
                let mut terms = alloc::vec![t];
                terms.extend(self.adjust.iter().map(String::as_str));
                let spec = ModelSpec::new(&self.outcome, &terms, self.family.family(), Link::Log);
                let fit = glm::fit(&c, &spec)?;
                (Some(fit.wald_interval(t, level)?), CiMethod::Wald)
            }
            Method::GComputation | Method::Ipw => {
                self.bootstrap.check()?;
                let reps = bootstrap::replicate(d, &self.columns(), &self.bootstrap, |r| self.point_collapsed(r))?;
                let mut values = Vec::with_capacity(reps.len());
                for p in reps.into_iter().flatten() {
                    if let Some(m) = p.max_log_binomial_mean {
                        let cur = diagnostics.max_log_binomial_mean.get_or_insert(m);
                        *cur = cur.max(m);
                    }
                    values.push(p.risk_ratio);
                }
                let ci = bootstrap::summarize(&mut values, &self.bootstrap)?;
                diagnostics.bootstrap_replicates = Some(ci.replicates);
                diagnostics.bootstrap_failures = Some(ci.failures);
                (Some((ci.low, ci.high)), CiMethod::BootstrapPercentile)
            }
        };
        Ok(EffectEstimate {
            method: self.method,
            treatment: self.treatment.clone(),
            outcome: self.outcome.clone(),
            adjustment: self.adjust.clone(),
            risk_ratio: point.risk_ratio,
            ci,
            ci_method,
            n: d.n_rows(),
            diagnostics,
        })
    }
}

struct ArmRisks {
    treated: f64,
    control: f64,
}

impl ArmRisks {
    fn ratio(&self) -> Result<f64, EstimateError> {
        if self.control <= 0.0 {
            return Err(EstimateError::ZeroRiskControlArm);
        }
        if self.treated <= 0.0 {
            return Err(EstimateError::ZeroRiskTreatedArm);
        }
        Ok(self.treated / self.control)
    }
}

fn arm_risks(d: &Dataset, treatment: &str, outcome: &str) -> Result<ArmRisks, EstimateError> {
    let (t, y) = (d.column_index(treatment)?, d.column_index(outcome)?);
    let mut mass = [0.0f64; 2];
    let mut hits = [0.0f64; 2];
    for i in 0..d.n_rows() {
        let a = d.get(i, t) as usize;
        mass[a] += d.weight(i);
        hits[a] += d.weight(i) * d.get(i, y) as f64;
    }
    if mass[0] <= 0.0 || mass[1] <= 0.0 {
        return Err(EstimateError::DegenerateArm(treatment.to_string()));
    }
    Ok(ArmRisks { treated: hits[1] / mass[1], control: hits[0] / mass[0] })
}

/// Crude risk ratio with a Wald interval from the saturated log-binomial fit.
pub fn unadjusted_rr(d: &Dataset, treatment: &str, outcome: &str) -> Result<EffectEstimate, EstimateError> {
    Analysis::new(Method::Unadjusted, treatment, outcome, &[]).run(d)
}

/// `exp` of the treatment coefficient of a log-link outcome model.
pub fn outcome_regression_rr(
    d: &Dataset,
    treatment: &str,
    outcome: &str,
    adjust: &[&str],
    family: OutcomeFamily,
) -> Result<EffectEstimate, EstimateError> {
    Analysis::new(Method::OutcomeRegression, treatment, outcome, adjust).with_family(family).run(d)
}

/// Standardised risk ratio from a logistic outcome model.
pub fn g_computation_rr(
    d: &Dataset,
    treatment: &str,
    outcome: &str,
    adjust: &[&str],
    interactions: bool,
    bs: &BootstrapSpec,
) -> Result<EffectEstimate, EstimateError> {
    Analysis::new(Method::GComputation, treatment, outcome, adjust)
        .with_interactions(interactions)
        .with_bootstrap(bs.clone())
        .run(d)
}

/// Inverse-probability-weighted risk ratio with a logistic propensity model.
pub fn ipw_rr(
    d: &Dataset,
    treatment: &str,
    outcome: &str,
    adjust: &[&str],
    bs: &BootstrapSpec,
) -> Result<EffectEstimate, EstimateError> {
    Analysis::new(Method::Ipw, treatment, outcome, adjust).with_bootstrap(bs.clone()).run(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(rows: &[([u8; 3], f64)]) -> Dataset {
        let cols = vec!["T".to_string(), "Y".to_string(), "C".to_string()];
        let r: Vec<[u8; 3]> = rows.iter().map(|x| x.0).collect();
        Dataset::from_rows(cols, &r).unwrap().with_weights(rows.iter().map(|x| x.1).collect()).unwrap()
    }

    fn sample() -> Dataset {
        table(&[
            ([0, 0, 0], 40.0),
            ([0, 1, 0], 10.0),
            ([1, 0, 0], 15.0),
            ([1, 1, 0], 5.0),
            ([0, 0, 1], 10.0),
            ([0, 1, 1], 10.0),
            ([1, 0, 1], 20.0),
            ([1, 1, 1], 30.0),
        ])
    }

    #[test]
    fn crude_ratio_matches_log_binomial() {
        let d = sample();
        let e = unadjusted_rr(&d, "T", "Y").unwrap();
        let crude = (35.0 / 70.0) / (20.0 / 70.0);
        assert!((e.risk_ratio - crude).abs() < 1e-12);
        let fit = glm::fit(&d, &ModelSpec::log_binomial("Y", &["T"])).unwrap();
        assert!((libm::exp(fit.coefficient("T").unwrap()) - crude).abs() < 1e-8);
        let (lo, hi) = e.ci.unwrap();
        assert!(lo < crude && crude < hi);
        assert_eq!(e.ci_method, CiMethod::Wald);
    }

    #[test]
    fn identical_outcome_across_arms() {
        let d = table(&[([0, 1, 0], 3.0), ([0, 0, 0], 1.0), ([1, 1, 0], 6.0), ([1, 0, 0], 2.0)]);
        assert_eq!(unadjusted_rr(&d, "T", "Y").unwrap().risk_ratio, 1.0);
    }

    #[test]
    fn empty_adjustment_reduces_to_crude() {
        let d = sample();
        let crude = Analysis::new(Method::Unadjusted, "T", "Y", &[]).point(&d).unwrap().risk_ratio;
        for m in [Method::GComputation, Method::Ipw, Method::OutcomeRegression] {
            let rr = Analysis::new(m, "T", "Y", &[]).point(&d).unwrap().risk_ratio;
            assert!((rr - crude).abs() < 1e-8, "{m}: {rr} vs {crude}");
        }
    }

    #[test]
    fn saturated_g_computation_is_standardisation() {
        let d = sample();
        let rr =
            Analysis::new(Method::GComputation, "T", "Y", &["C"]).with_interactions(true).point(&d).unwrap().risk_ratio;
        // P(C=1) = 70/140; stratum risks read off the table.
        let (r10, r00, r11, r01) = (5.0 / 20.0, 10.0 / 50.0, 30.0 / 50.0, 10.0 / 20.0);
        let expect = (0.5 * r10 + 0.5 * r11) / (0.5 * r00 + 0.5 * r01);
        assert!((rr - expect).abs() < 1e-8);
    }

    #[test]
    fn ipw_weight_scale_invariance() {
        let d = sample();
        let a = Analysis::new(Method::Ipw, "T", "Y", &["C"]);
        let base = a.point(&d).unwrap();
        let w: Vec<f64> = d.weights().unwrap().iter().map(|w| w * 7.5).collect();
        let scaled = a.point(&d.clone().with_weights(w).unwrap()).unwrap();
        assert!((base.risk_ratio - scaled.risk_ratio).abs() < 1e-10);
        let (lo, hi) = base.weight_range.unwrap();
        assert!(lo >= 1.0 && hi > lo);
    }

    #[test]
    fn errors() {
        let one_arm = table(&[([1, 1, 0], 1.0), ([1, 0, 1], 1.0)]);
        assert_eq!(unadjusted_rr(&one_arm, "T", "Y").unwrap_err(), EstimateError::DegenerateArm("T".into()));
        let no_risk = table(&[([0, 0, 0], 1.0), ([1, 1, 0], 1.0), ([1, 0, 0], 1.0)]);
        assert_eq!(unadjusted_rr(&no_risk, "T", "Y").unwrap_err(), EstimateError::ZeroRiskControlArm);
        assert!(matches!(
            Analysis::new(Method::Ipw, "T", "Y", &["T"]).point(&sample()),
            Err(EstimateError::InvalidAnalysis(_))
        ));
        assert!(matches!(
            Analysis::new(Method::Ipw, "T", "Y", &["Q"]).point(&sample()),
            Err(EstimateError::Dataset(DatasetError::UnknownColumn(_)))
        ));
    }

    #[test]
    fn method_keywords_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.keyword().parse::<Method>().unwrap(), m);
        }
        assert!("ols".parse::<Method>().is_err());
    }
}
