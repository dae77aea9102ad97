//! Generalized linear models for binary responses, fitted by iteratively
//! reweighted least squares.
//!
//! Supported pairs: binomial/logit (logistic), binomial/log (log-binomial)
//! and Poisson/log. Rows are first collapsed to distinct covariate-response
//! patterns with summed weights, which gives the same estimates as fitting
//! the rows one by one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::linalg::Cholesky;
use crate::normal;

pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 50;
/// Relative deviance change and largest coefficient step both below this means converged.
pub const TOLERANCE: f64 = 1e-8;
/// Largest fitted mean a log-binomial fit may reach.
pub const LOG_BINOMIAL_CEILING: f64 = 1.0 - 1e-10;
/// Coefficients beyond this magnitude are taken as diverging.
pub const DIVERGENCE_BOUND: f64 = 30.0;
const EXTREME_PROBABILITY: f64 = 1e-10;
const MAX_TERMS: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Family {
    Binomial,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Link {
    Logit,
    Log,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlmError {
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("column `{0}` is missing")]
    MissingColumn(String),
    #[error("design matrix is rank deficient: `{0}` is collinear with earlier terms")]
    RankDeficient(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("coefficients diverging; the data look (quasi-)separated")]
    SeparationSuspected,
    #[error("step-halving could not keep the fitted means valid")]
    StepHalvingFailed,
    #[error("no rows with positive weight")]
    EmptyData,
    #[error("response mean is {0}; the model has no interior solution")]
    DegenerateResponse(f64),
    #[error("fit did not converge")]
    NotConverged,
    #[error("unknown term `{0}`")]
    UnknownTerm(String),
    #[error("{got} external weights for {rows} rows")]
    WeightLength { got: usize, rows: usize },
}

/// What to fit: response, main-effect terms, pairwise interactions, family and link.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub response: String,
    pub terms: Vec<String>,
    pub interactions: Vec<(String, String)>,
    pub family: Family,
    pub link: Link,
    /// Multiplies the dataset's own row weights.
    pub weights: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn new(response: &str, terms: &[&str], family: Family, link: Link) -> Self {
        ModelSpec {
            response: response.to_string(),
            terms: terms.iter().map(|s| s.to_string()).collect(),
            interactions: Vec::new(),
            family,
            link,
            weights: None,
        }
    }

    pub fn logistic(response: &str, terms: &[&str]) -> Self {
        Self::new(response, terms, Family::Binomial, Link::Logit)
    }

    pub fn log_binomial(response: &str, terms: &[&str]) -> Self {
        Self::new(response, terms, Family::Binomial, Link::Log)
    }

    pub fn poisson(response: &str, terms: &[&str]) -> Self {
        Self::new(response, terms, Family::Poisson, Link::Log)
    }

    pub fn interaction(mut self, a: &str, b: &str) -> Self {
        self.interactions.push((a.to_string(), b.to_string()));
        self
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    /// Coefficient names: `(Intercept)`, the terms, then `a:b` interactions.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names = vec![String::from(INTERCEPT)];
        names.extend(self.terms.iter().cloned());
        names.extend(self.interactions.iter().map(|(a, b)| format!("{a}:{b}")));
        names
    }

    fn check(&self) -> Result<Vec<(usize, usize)>, GlmError> {
        let bad = |m: String| Err(GlmError::InvalidSpec(m));
        if self.family == Family::Poisson && self.link == Link::Logit {
            return bad("the logit link needs the binomial family".into());
        }
        if self.terms.contains(&self.response) {
            return bad(format!("response `{}` is also a term", self.response));
        }
        if self.terms.len() > MAX_TERMS {
            return bad(format!("at most {MAX_TERMS} terms are supported"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if self.terms[..i].contains(t) {
                return bad(format!("term `{t}` listed twice"));
            }
        }
        let mut pairs = Vec::with_capacity(self.interactions.len());
        for (a, b) in &self.interactions {
            let pos = |n: &String| self.terms.iter().position(|t| t == n);
            match (pos(a), pos(b)) {
                (Some(i), Some(j)) if i != j => pairs.push((i, j)),
                (Some(_), Some(_)) => return bad(format!("interaction `{a}:{b}` repeats a term")),
                _ => return bad(format!("interaction `{a}:{b}` uses a column that is not a term")),
            }
        }
        Ok(pairs)
    }
}

pub const INTERCEPT: &str = "(Intercept)";

/// A converged fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GlmFit {
    pub family: Family,
    pub link: Link,
    pub response: String,
    /// Main-effect columns, in design order.
    pub terms: Vec<String>,
    pub interactions: Vec<(String, String)>,
    /// Coefficient names, parallel to `coefficients`.
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Inverse expected information, row-major `p × p`.
    pub covariance: Vec<f64>,
    pub deviance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_effective: f64,
    /// Largest fitted mean over rows with positive weight.
    pub max_fitted_mean: f64,
    /// Total number of step halvings taken.
    pub halvings: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    pairs: Vec<(usize, usize)>,
}

impl GlmFit {
    fn index(&self, name: &str) -> Result<usize, GlmError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| GlmError::UnknownTerm(name.to_string()))
    }

    pub fn coefficient(&self, name: &str) -> Result<f64, GlmError> {
        Ok(self.coefficients[self.index(name)?])
    }

    pub fn std_error(&self, name: &str) -> Result<f64, GlmError> {
        let i = self.index(name)?;
        let p = self.names.len();
        Ok(libm::sqrt(self.covariance[i * p + i].max(0.0)))
    }

    /// `exp(θ ± z·se)` for a central interval of coverage `level`.
    pub fn wald_interval(&self, name: &str, level: f64) -> Result<(f64, f64), GlmError> {
        if !self.converged {
            return Err(GlmError::NotConverged);
        }
        let (theta, se) = (self.coefficient(name)?, self.std_error(name)?);
        let z = normal::two_sided_critical(level);
        Ok((libm::exp(theta - z * se), libm::exp(theta + z * se)))
    }

    /// Fitted means for every row of `rows`.
    pub fn predict(&self, rows: &Dataset) -> Result<Vec<f64>, GlmError> {
        self.predict_with(rows, &[])
    }

    /// Fitted means with some columns held at fixed values, e.g. the
    /// treatment set to 1 for every row.
    pub fn predict_with(&self, rows: &Dataset, overrides: &[(&str, u8)]) -> Result<Vec<f64>, GlmError> {
        let cols: Vec<Option<usize>> = self
            .terms
            .iter()
            .map(|t| {
                if overrides.iter().any(|(n, _)| n == t) {
                    Ok(None)
                } else {
                    rows.column_index(t).map(Some).map_err(|_| GlmError::MissingColumn(t.clone()))
                }
            })
            .collect::<Result<_, _>>()?;
        let fixed: Vec<f64> =
            self.terms.iter().map(|t| overrides.iter().find(|(n, _)| n == t).map_or(0.0, |&(_, v)| v as f64)).collect();
        let mut x = vec![0.0; self.terms.len()];
        Ok((0..rows.n_rows())
            .map(|i| {
                for (j, c) in cols.iter().enumerate() {
                    x[j] = c.map_or(fixed[j], |c| rows.get(i, c) as f64);
                }
                inverse_link(self.link, self.eta(&x))
            })
            .collect())
    }

    fn eta(&self, x: &[f64]) -> f64 {
        let k = self.terms.len();
        let mut eta = self.coefficients[0];
        for (c, v) in self.coefficients[1..=k].iter().zip(x) {
            eta += c * v;
        }
        for (m, &(a, b)) in self.pairs.iter().enumerate() {
            eta += self.coefficients[1 + k + m] * x[a] * x[b];
        }
        eta
    }
}

#[inline]
fn inverse_link(link: Link, eta: f64) -> f64 {
    match link {
        Link::Logit => 1.0 / (1.0 + libm::exp(-eta)),
        Link::Log => libm::exp(eta),
    }
}

#[inline]
fn link_fn(link: Link, mu: f64) -> f64 {
    match link {
        Link::Logit => libm::log(mu / (1.0 - mu)),
        Link::Log => libm::log(mu),
    }
}

/// Collapsed design: one row per distinct (response, terms) pattern.
struct Design {
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl Design {
    fn build(d: &Dataset, spec: &ModelSpec, pairs: &[(usize, usize)]) -> Result<Self, GlmError> {
        let col = |n: &str| d.column_index(n).map_err(|_| GlmError::MissingColumn(n.to_string()));
        let ycol = col(&spec.response)?;
        let tcols: Vec<usize> = spec.terms.iter().map(|t| col(t)).collect::<Result<_, _>>()?;
        if let Some(w) = &spec.weights {
            if w.len() != d.n_rows() {
                return Err(GlmError::WeightLength { got: w.len(), rows: d.n_rows() });
            }
        }
        let k = tcols.len();
        let bits = k + 1;
        let code_of = |i: usize| {
            let mut c = d.get(i, ycol) as u64;
            for (j, &t) in tcols.iter().enumerate() {
                c |= (d.get(i, t) as u64) << (j + 1);
            }
            c
        };
        let weight_of = |i: usize| d.weight(i) * spec.weights.as_ref().map_or(1.0, |w| w[i]);

        let mut cells: Vec<(u64, f64)> = if bits <= 16 {
            let mut dense = vec![0.0f64; 1 << bits];
            for i in 0..d.n_rows() {
                dense[code_of(i) as usize] += weight_of(i);
            }
            dense.into_iter().enumerate().map(|(c, w)| (c as u64, w)).collect()
        } else {
            let mut sparse: BTreeMap<u64, f64> = BTreeMap::new();
            for i in 0..d.n_rows() {
                *sparse.entry(code_of(i)).or_insert(0.0) += weight_of(i);
            }
            sparse.into_iter().collect()
        };
        cells.retain(|&(_, w)| w > 0.0);
        if cells.is_empty() {
            return Err(GlmError::EmptyData);
        }

        let p = 1 + k + pairs.len();
        let mut x = Vec::with_capacity(cells.len() * p);
        let mut y = Vec::with_capacity(cells.len());
        let mut w = Vec::with_capacity(cells.len());
        for &(c, wt) in &cells {
            let bit = |j: usize| (c >> (j + 1) & 1) as f64;
            x.push(1.0);
            x.extend((0..k).map(bit));
            x.extend(pairs.iter().map(|&(a, b)| bit(a) * bit(b)));
            y.push((c & 1) as f64);
            w.push(wt);
        }
        Ok(Design { p, x, y, w })
    }

    fn rows(&self) -> usize {
        self.y.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }
}

struct Irls<'a> {
    design: &'a Design,
    family: Family,
    link: Link,
}

impl Irls<'_> {
    /// Fitted means and deviance, or `None` if some mean leaves the valid range.
    fn evaluate(&self, beta: &[f64]) -> Option<(Vec<f64>, f64)> {
        let d = self.design;
        let mut mu = Vec::with_capacity(d.rows());
        let mut dev = 0.0;
        for i in 0..d.rows() {
            let eta: f64 = d.row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
            let m = inverse_link(self.link, eta);
            let valid = match (self.family, self.link) {
                (Family::Binomial, Link::Log) => m > 0.0 && m <= LOG_BINOMIAL_CEILING,
                (Family::Binomial, Link::Logit) => m > 0.0 && m < 1.0,
                (Family::Poisson, _) => m > 0.0 && m.is_finite(),
            };
            if !valid {
                return None;
            }
            let y = d.y[i];
            let unit = match self.family {
                Family::Binomial => {
                    if y > 0.5 {
                        -2.0 * libm::log(m)
                    } else {
                        -2.0 * libm::log1p(-m)
                    }
                }
                Family::Poisson => {
                    if y > 0.5 {
                        2.0 * (-libm::log(m) - 1.0 + m)
                    } else {
                        2.0 * m
                    }
                }
            };
            dev += d.w[i] * unit;
            mu.push(m);
        }
        dev.is_finite().then_some((mu, dev))
    }

    /// `X'WX` and `X'Wz` at the current means.
    fn normal_equations(&self, beta: &[f64], mu: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.design;
        let p = d.p;
        let mut xtwx = vec![0.0; p * p];
        let mut xtwz = vec![0.0; p];
        for (i, &m) in mu.iter().enumerate() {
            let x = d.row(i);
            let dmu = match self.link {
                Link::Logit => m * (1.0 - m),
                Link::Log => m,
            };
            let var = match self.family {
                Family::Binomial => m * (1.0 - m),
                Family::Poisson => m,
            };
            let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
            let z = eta + (d.y[i] - m) / dmu;
            let wt = d.w[i] * dmu * dmu / var;
            for a in 0..p {
                let wa = wt * x[a];
                xtwz[a] += wa * z;
                for b in 0..=a {
                    xtwx[a * p + b] += wa * x[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                xtwx[b * p + a] = xtwx[a * p + b];
            }
        }
        (xtwx, xtwz)
    }
}

/// Maximum-likelihood fit by IRLS with step-halving.
pub fn fit(d: &Dataset, spec: &ModelSpec) -> Result<GlmFit, GlmError> {
    let pairs = spec.check()?;
    let design = Design::build(d, spec, &pairs)?;
    let names = spec.coefficient_names();
    let p = design.p;
    let irls = Irls { design: &design, family: spec.family, link: spec.link };

    let total: f64 = design.w.iter().sum();
    let ybar = design.y.iter().zip(&design.w).map(|(y, w)| y * w).sum::<f64>() / total;
    let upper_ok = spec.family == Family::Poisson || ybar < 1.0;
    if !(ybar > 0.0 && upper_ok) {
        return Err(GlmError::DegenerateResponse(ybar));
    }
    let mut beta = vec![0.0; p];
    beta[0] = link_fn(spec.link, ybar);
    let (mut mu, mut dev) = irls.evaluate(&beta).ok_or(GlmError::StepHalvingFailed)?;

    let mut converged = false;
    let mut iterations = 0;
    let mut halvings = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (xtwx, xtwz) = irls.normal_equations(&beta, &mu);
        let chol = Cholesky::new(&xtwx, p).map_err(|j| GlmError::RankDeficient(names[j].clone()))?;
        let mut cand = chol.solve(&xtwz);
        let mut tries = 0;
        let (mu_new, dev_new) = loop {
            match irls.evaluate(&cand) {
                Some((m, dv)) if dv <= dev + 1e-10 * (dev.abs() + 1.0) => break (m, dv),
                _ if tries == MAX_HALVINGS => return Err(GlmError::StepHalvingFailed),
                _ => {
                    for (c, b) in cand.iter_mut().zip(&beta) {
                        *c = 0.5 * (*c + b);
                    }
                    tries += 1;
                    halvings += 1;
                }
            }
        };
        if cand.iter().any(|b| b.abs() > DIVERGENCE_BOUND) {
            return Err(GlmError::SeparationSuspected);
        }
        if spec.link == Link::Logit
            && mu_new.iter().any(|&m| !(EXTREME_PROBABILITY..=1.0 - EXTREME_PROBABILITY).contains(&m))
        {
            return Err(GlmError::SeparationSuspected);
        }
        let step = cand.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let rel = (dev_new - dev).abs() / (dev_new.abs() + 0.1);
        beta = cand;
        mu = mu_new;
        dev = dev_new;
        if rel < TOLERANCE && step < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(GlmError::NoConvergence(MAX_ITERATIONS));
    }

    let (xtwx, _) = irls.normal_equations(&beta, &mu);
    let covariance = Cholesky::new(&xtwx, p).map_err(|j| GlmError::RankDeficient(names[j].clone()))?.inverse();
    let max_fitted_mean = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(GlmFit {
        family: spec.family,
        link: spec.link,
        response: spec.response.clone(),
        terms: spec.terms.clone(),
        interactions: spec.interactions.clone(),
        names,
        coefficients: beta,
        covariance,
        deviance: dev,
        iterations,
        converged,
        n_effective: total,
        max_fitted_mean,
        halvings,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn data(cols: &[&str], rows: &[&[u8]]) -> Dataset {
        Dataset::from_rows(cols.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn intercept_only_logistic_at_half() {
        let d = data(&["Y"], &[&[0], &[1], &[1], &[0]]);
        let f = fit(&d, &ModelSpec::logistic("Y", &[])).unwrap();
        assert!(f.coefficient(INTERCEPT).unwrap().abs() < 1e-8);
        assert!(f.predict(&d).unwrap().iter().all(|&m| (m - 0.5).abs() < 1e-12));
    }

    #[test]
    fn log_link_prediction_at_zero_is_exp_intercept() {
        let d = data(&["X", "Y"], &[&[0, 0], &[0, 1], &[1, 1], &[1, 1], &[0, 0], &[1, 0]]);
        let f = fit(&d, &ModelSpec::log_binomial("Y", &["X"])).unwrap();
        let zero = data(&["X"], &[&[0]]);
        let p = f.predict(&zero).unwrap()[0];
        assert!((p - libm::exp(f.coefficient(INTERCEPT).unwrap())).abs() < 1e-15);
        // Saturated in X: exp(θ_X) is the ratio of arm means.
        assert!((libm::exp(f.coefficient("X").unwrap()) - (2.0 / 3.0) / (1.0 / 3.0)).abs() < 1e-8);
    }

    #[test]
    fn separation_is_reported() {
        let d = data(&["X", "Y"], &[&[0, 0], &[0, 0], &[1, 1], &[1, 1]]);
        assert_eq!(fit(&d, &ModelSpec::logistic("Y", &["X"])).unwrap_err(), GlmError::SeparationSuspected);
    }

    #[test]
    fn collinear_terms_are_rank_deficient() {
        let d = data(&["A", "B", "Y"], &[&[0, 0, 0], &[1, 1, 1], &[1, 1, 0], &[0, 0, 1]]);
        assert_eq!(fit(&d, &ModelSpec::logistic("Y", &["A", "B"])).unwrap_err(), GlmError::RankDeficient("B".into()));
    }

    #[test]
    fn spec_errors() {
        let d = data(&["A", "Y"], &[&[0, 0], &[1, 1]]);
        let logit_poisson = ModelSpec::new("Y", &["A"], Family::Poisson, Link::Logit);
        assert!(matches!(fit(&d, &logit_poisson), Err(GlmError::InvalidSpec(_))));
        assert!(matches!(fit(&d, &ModelSpec::logistic("Y", &["Y"])), Err(GlmError::InvalidSpec(_))));
        assert!(matches!(
            fit(&d, &ModelSpec::logistic("Y", &["A"]).interaction("A", "Q")),
            Err(GlmError::InvalidSpec(_))
        ));
        assert!(matches!(fit(&d, &ModelSpec::logistic("Y", &["Q"])), Err(GlmError::MissingColumn(_))));
        let ones = data(&["Y"], &[&[1], &[1]]);
        assert!(matches!(fit(&ones, &ModelSpec::log_binomial("Y", &[])), Err(GlmError::DegenerateResponse(_))));
    }

    #[test]
    fn zero_variance_interval_collapses() {
        let d = data(&["Y"], &[&[0], &[1]]);
        let mut f = fit(&d, &ModelSpec::logistic("Y", &[])).unwrap();
        f.covariance = vec![0.0];
        let (lo, hi) = f.wald_interval(INTERCEPT, 0.95).unwrap();
        assert_eq!(lo, hi);
        assert!(matches!(f.wald_interval("Z", 0.95), Err(GlmError::UnknownTerm(_))));
    }

    #[test]
    fn wider_level_nests_narrower() {
        let d = data(&["X", "Y"], &[&[0, 0], &[0, 1], &[1, 1], &[1, 1], &[0, 0], &[1, 0], &[0, 0]]);
        let f = fit(&d, &ModelSpec::poisson("Y", &["X"])).unwrap();
        let (a, b) = f.wald_interval("X", 0.95).unwrap();
        let (c, e) = f.wald_interval("X", 0.90).unwrap();
        assert!(a < c && e < b);
    }
}
