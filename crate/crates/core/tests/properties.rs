use std::collections::BTreeSet;

use causalkit_core::bootstrap::{bootstrap_ci, percentile_interval};
use causalkit_core::dataset::Dataset;
use causalkit_core::scm::{sample, sample_range};
use causalkit_core::*;
use proptest::prelude::*;

/// A random DAG on `n` nodes: edges only run from lower to higher index.
fn arb_dag() -> impl Strategy<Value = CausalDag> {
    (2usize..8).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut b = CausalDag::builder();
            for i in 0..n {
                b = b.node(format!("v{i}"));
            }
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        b = b.edge(format!("v{i}"), format!("v{j}"));
                    }
                    k += 1;
                }
            }
            b.build().unwrap()
        })
    })
}

fn arb_rows(cols: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    proptest::collection::vec(proptest::collection::vec(0u8..2, cols), 20..120)
}

fn dataset(names: &[&str], rows: &[Vec<u8>]) -> Dataset {
    Dataset::from_rows(names.iter().map(|s| s.to_string()).collect(), rows).unwrap()
}

proptest! {
    #[test]
    fn dsep_routes_agree_and_are_symmetric(dag in arb_dag(), x in 0usize..8, y in 0usize..8, mask in any::<u8>()) {
        let n = dag.node_count();
        let (x, y) = (NodeId(x % n), NodeId(y % n));
        prop_assume!(x != y);
        let z: BTreeSet<NodeId> = (0..n).filter(|&i| mask >> i & 1 == 1).map(NodeId).filter(|&v| v != x && v != y).collect();
        let a = d_separated_by_paths(&dag, x, y, &z).unwrap();
        prop_assert_eq!(a, d_separated_by_reachability(&dag, x, y, &z).unwrap());
        prop_assert_eq!(a, d_separated(&dag, y, x, &z).unwrap());
    }

    #[test]
    fn topological_order_respects_edges(dag in arb_dag()) {
        let order = dag.topological_order();
        let pos: Vec<usize> = {
            let mut p = vec![0; order.len()];
            for (i, v) in order.iter().enumerate() { p[v.index()] = i; }
            p
        };
        for &(a, b) in dag.edges() {
            prop_assert!(pos[a.index()] < pos[b.index()]);
        }
    }

    #[test]
    fn paths_are_open_or_blocked_consistently(dag in arb_dag(), mask in any::<u8>()) {
        let n = dag.node_count();
        let (x, y) = (NodeId(0), NodeId(n - 1));
        let z: BTreeSet<NodeId> = (1..n - 1).filter(|&i| mask >> i & 1 == 1).map(NodeId).collect();
        for p in enumerate_paths(&dag, x, y).unwrap() {
            prop_assert_eq!(path_open(&dag, &p, &z).unwrap(), path_open(&dag, &p.reversed(), &z).unwrap());
        }
    }

    #[test]
    fn split_sampling_matches_serial(seed in any::<u64>(), cut in 0usize..300) {
        let m = fixtures::case_study_model();
        let whole = sample(&m, 300, seed);
        let a = sample_range(&m, 0..cut, seed);
        let b = sample_range(&m, cut..300, seed);
        let joined: Vec<&[u8]> = a.rows().chain(b.rows()).collect();
        let whole_rows: Vec<&[u8]> = whole.rows().collect();
        prop_assert_eq!(joined, whole_rows);
    }

    #[test]
    fn selection_is_idempotent(rows in arb_rows(3), v in 0u8..2) {
        let d = dataset(&["A", "B", "C"], &rows);
        let rule = SelectionRule::new("C", v);
        let once = d.apply_selection(&rule).unwrap();
        prop_assert!(once.rows().all(|r| r[2] == v));
        prop_assert_eq!(once.apply_selection(&rule).unwrap(), once);
    }

    /// Duplicated rows and frequency weights give the same fit.
    #[test]
    fn frequency_weights_equal_duplication(rows in arb_rows(3), reps in proptest::collection::vec(1u8..4, 120)) {
        let names = ["Y", "A", "C"];
        let mut dup = Vec::new();
        let mut w = Vec::new();
        for (r, &k) in rows.iter().zip(&reps) {
            w.push(k as f64);
            for _ in 0..k { dup.push(r.clone()); }
        }
        let weighted = dataset(&names, &rows).with_weights(w).unwrap();
        let expanded = dataset(&names, &dup);
        let spec = ModelSpec::logistic("Y", &["A", "C"]);
        match (glm::fit(&weighted, &spec), glm::fit(&expanded, &spec)) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
                    prop_assert!((x - y).abs() < 1e-8);
                }
                prop_assert!((a.deviance - b.deviance).abs() < 1e-6 * (1.0 + b.deviance));
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    /// Canonical-link fits solve their score equations.
    #[test]
    fn score_equations_hold(rows in arb_rows(3), poisson in any::<bool>()) {
        let d = dataset(&["Y", "A", "C"], &rows);
        let spec = if poisson { ModelSpec::poisson("Y", &["A", "C"]) } else { ModelSpec::logistic("Y", &["A", "C"]) };
        if let Ok(fit) = glm::fit(&d, &spec) {
            let mu = fit.predict(&d).unwrap();
            let mut score = [0.0f64; 3];
            for (i, r) in d.rows().enumerate() {
                let e = r[0] as f64 - mu[i];
                score[0] += e;
                score[1] += e * r[1] as f64;
                score[2] += e * r[2] as f64;
            }
            for s in score {
                prop_assert!(s.abs() < 1e-6, "score {:?}", score);
            }
        }
    }

    #[test]
    fn ipw_is_invariant_to_weight_scale(rows in arb_rows(3), c in 0.01f64..100.0) {
        let d = dataset(&["T", "Y", "C"], &rows);
        let a = Analysis::new(Method::Ipw, "T", "Y", &["C"]);
        let base = a.point(&d);
        let scaled = a.point(&d.clone().with_weights(vec![c; d.n_rows()]).unwrap());
        if let (Ok(x), Ok(y)) = (base, scaled) {
            prop_assert!((x.risk_ratio - y.risk_ratio).abs() < 1e-10 * x.risk_ratio.max(1.0));
        }
    }

    #[test]
    fn percentile_interval_is_ordered(mut v in proptest::collection::vec(-1e6f64..1e6, 40..200)) {
        let (lo, hi) = percentile_interval(&mut v, 0.95);
        prop_assert!(lo <= hi);
        prop_assert!(v.contains(&lo) && v.contains(&hi));
    }
}

#[test]
fn bootstrap_of_mean_is_deterministic_and_sane() {
    let d = sample(&fixtures::confounder_model(), 2000, 99);
    let bs = BootstrapSpec::new(200, 7);
    let stat = |r: &Dataset| r.mean("B");
    let a = bootstrap_ci(&d, &["B"], &bs, stat).unwrap();
    assert_eq!(a, bootstrap_ci(&d, &["B"], &bs, stat).unwrap());
    let m = d.mean("B").unwrap();
    assert!(a.low < m && m < a.high && a.high - a.low < 0.06);
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_bootstrap_matches_serial() {
    let d = sample(&fixtures::case_study_model(), 5000, 3);
    let a = Analysis::new(Method::GComputation, "childcare", "conduct_school", &["conduct_entry"]);
    let serial = a.clone().with_bootstrap(BootstrapSpec::new(80, 5)).run(&d).unwrap();
    let parallel = a.with_bootstrap(BootstrapSpec::new(80, 5).parallel(true)).run(&d).unwrap();
    assert_eq!(serial, parallel);
}
