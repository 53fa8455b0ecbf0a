//! The solver against exhaustive enumeration on small random instances.

use moxp_core::bench::{brute_force_extreme_points, enumerable_spec, generate, separating_weight, Caps};
use moxp_core::linalg::max_abs_diff;
use moxp_core::model::TOL_FEAS;
use moxp_core::{dominates, solve_problem, BuiltinOracle, Problem, SolverConfig};
use proptest::prelude::*;

fn same_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| max_abs_diff(x, y) <= tol))
        && b.iter().all(|y| a.iter().any(|x| max_abs_diff(x, y) <= tol))
}

fn check(p: &Problem, normalize: bool) -> Result<(), String> {
    let truth = brute_force_extreme_points(p, Caps::default()).map_err(|e| e.to_string())?;
    let cfg = SolverConfig {
        normalize,
        ..Default::default()
    };
    let sol = solve_problem(p, &cfg, &BuiltinOracle::default()).map_err(|e| e.to_string())?;
    let got: Vec<Vec<f64>> = sol.points.iter().map(|r| r.y.clone()).collect();
    let want: Vec<Vec<f64>> = truth.points.iter().map(|o| o.y.clone()).collect();
    if !same_set(&got, &want, 1e-5) {
        return Err(format!("{}: solver {got:?} vs brute force {want:?}", p.name));
    }
    for r in &sol.points {
        if !p.is_feasible(&r.x, TOL_FEAS) {
            return Err(format!("{}: witness {:?} infeasible", p.name, r.x));
        }
        let others: Vec<&[f64]> = got.iter().filter(|y| **y != r.y).map(Vec::as_slice).collect();
        if separating_weight(&r.y, &others, 1e-7).is_none() {
            return Err(format!("{}: {:?} has no separating weight", p.name, r.y));
        }
        if got.iter().any(|y| *y != r.y && dominates(y, &r.y, 0.0)) {
            return Err(format!("{}: {:?} is dominated", p.name, r.y));
        }
    }
    let budget = sol.set.dual_vertices.len() + sol.set.dual_facets.len() + p.num_objectives() + 1;
    if sol.set.exact && sol.oracle_calls > budget {
        return Err(format!("{}: {} oracle calls exceed {budget}", p.name, sol.oracle_calls));
    }
    Ok(())
}

#[test]
fn first_forty_seeds() {
    let failures: Vec<String> = (0..40)
        .filter_map(|s| check(&generate(&enumerable_spec(s)).unwrap(), true).err())
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_seeds_match(seed in 1000u64..1_000_000, normalize in any::<bool>()) {
        let p = generate(&enumerable_spec(seed)).unwrap();
        prop_assert_eq!(check(&p, normalize), Ok(()));
    }
}
