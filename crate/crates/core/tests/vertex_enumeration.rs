//! Incremental cuts against offline enumeration of all `d`-subsets.

use moxp_core::bench::brute_force_vertices;
use moxp_core::linalg::max_abs_diff;
use moxp_core::vertexenum::{GeometryError, TOL_GEOM};
use moxp_core::{DualHalfspace, DualPolyhedron};
use proptest::prelude::*;

fn outcome(d: usize, integral: bool) -> impl Strategy<Value = Vec<f64>> {
    if integral {
        prop::collection::vec((-4i32..=4).prop_map(f64::from), d).boxed()
    } else {
        prop::collection::vec(-10.0f64..10.0, d).boxed()
    }
}

fn sequence() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (2usize..=4, any::<bool>()).prop_flat_map(|(d, integral)| {
        (Just(d), prop::collection::vec(outcome(d, integral), 1..=25 - d))
    })
}

/// Replays the cuts; returns the polyhedron and the number of rejected cuts.
fn replay(d: usize, ys: &[Vec<f64>]) -> (DualPolyhedron, usize) {
    let mut poly = DualPolyhedron::init(d, DualHalfspace::support(&ys[0])).unwrap();
    let mut rejected = 0;
    for y in &ys[1..] {
        match poly.cut(DualHalfspace::support(y)) {
            Ok(_) => {}
            Err(GeometryError::CutIsRedundant) => rejected += 1,
            Err(e) => panic!("cut failed: {e}"),
        }
    }
    (poly, rejected)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn vertices_match_subset_enumeration((d, ys) in sequence()) {
        let (poly, _) = replay(d, &ys);
        let truth = brute_force_vertices(d, poly.halfspaces(), TOL_GEOM);
        let got: Vec<&[f64]> = poly.vertices().map(|(_, v)| v.coords.as_slice()).collect();
        prop_assert_eq!(got.len(), truth.len(), "got {:?} want {:?}", got, truth);
        for t in &truth {
            prop_assert!(got.iter().any(|g| max_abs_diff(g, t) <= TOL_GEOM), "missing {:?}", t);
        }
        for (_, v) in poly.vertices() {
            // Incidence is exactly the set of tight halfspaces.
            for (h, hs) in poly.halfspaces().iter().enumerate() {
                let tight = hs.excess(&v.coords).abs() <= TOL_GEOM;
                prop_assert_eq!(tight, v.incident.contains(&h));
            }
            let corner = v.coords[..d - 1].iter().all(|&w| w.abs() <= TOL_GEOM)
                || v.coords[..d - 1].iter().any(|&w| (w - 1.0).abs() <= TOL_GEOM);
            prop_assert_eq!(v.has_ray, corner);
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_combinatorial((d, ys) in sequence()) {
        let (poly, _) = replay(d, &ys);
        for (id, v) in poly.vertices() {
            for &u in &v.neighbors {
                let other = poly.vertex(u).unwrap();
                prop_assert!(other.neighbors.contains(&id));
                let common = v.incident.intersection(&other.incident).count();
                prop_assert!(common >= d - 1);
            }
        }
    }
}
