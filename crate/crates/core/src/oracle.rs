//! Exact targets: an estimator run on the enumerated joint distribution.
//!
//! Feeding the probability-weighted population to the same code path that
//! handles samples gives the value each estimator converges to as `n` grows,
//! free of Monte Carlo noise.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dataset::SelectionRule;
use crate::estimate::{Analysis, EstimateError};
use crate::scm::{enumerate_population, ScmError, StructuralModel};

/// The risk ratio `analysis` estimates on the infinite population of `m`,
/// optionally restricted by `selection`.
pub fn population_estimand(
    m: &StructuralModel,
    analysis: &Analysis,
    selection: Option<&SelectionRule>,
) -> Result<f64, EstimateError> {
    let pop = enumerate_population(m, selection)?;
    Ok(analysis.point(&pop)?.risk_ratio)
}

/// Largest difference between `P(y=1 | x=1, z)` and `P(y=1 | x=0, z)` over
/// the strata `z` in which both arms have positive probability, computed on
/// the exact joint distribution. Zero iff `y` is independent of `x` given `z`.
pub fn conditional_independence_gap(m: &StructuralModel, x: &str, y: &str, z: &[&str]) -> Result<f64, ScmError> {
    let pop = enumerate_population(m, None)?;
    let xi = pop.column_index(x)?;
    let yi = pop.column_index(y)?;
    let zi: Vec<usize> = z.iter().map(|c| pop.column_index(c)).collect::<Result<_, _>>()?;
    // stratum -> [mass, hits] for x = 0 and x = 1
    let mut strata: BTreeMap<Vec<u8>, [[f64; 2]; 2]> = BTreeMap::new();
    for i in 0..pop.n_rows() {
        let key: Vec<u8> = zi.iter().map(|&j| pop.get(i, j)).collect();
        let cell = &mut strata.entry(key).or_default()[pop.get(i, xi) as usize];
        cell[0] += pop.weight(i);
        cell[1] += pop.weight(i) * pop.get(i, yi) as f64;
    }
    Ok(strata
        .values()
        .filter(|arms| arms[0][0] > 0.0 && arms[1][0] > 0.0)
        .map(|arms| (arms[1][1] / arms[1][0] - arms[0][1] / arms[0][0]).abs())
        .fold(0.0, f64::max))
}
