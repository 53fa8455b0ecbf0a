//! Write/parse cycles and robustness of the readers.

use moxp_core::parser::{parse_bytes, parse_lp, parse_mps, serialize_problem, Format};
use moxp_core::{Constraint, ConstraintSense, Objective, ObjectiveSense, Problem, QuadraticForm, Variable};
use proptest::prelude::*;

fn coef() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => (-20i32..=20).prop_map(f64::from),
        2 => -1e6f64..1e6,
        1 => Just(0.0),
        1 => Just(1e-12),
    ]
}

fn bounds() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![
        Just((0.0, f64::INFINITY)),
        Just((f64::NEG_INFINITY, f64::INFINITY)),
        (-5.0f64..0.0, 0.0f64..5.0),
        (-3i32..3).prop_map(|v| (f64::from(v), f64::from(v))),
        (0.0f64..5.0).prop_map(|u| (f64::NEG_INFINITY, u)),
    ]
}

prop_compose! {
    fn problem(quadratic: bool, mixed_senses: bool)(n in 1usize..6, d in 2usize..4, m in 0usize..4)
        (vars in prop::collection::vec((bounds(), any::<bool>()), n),
         objs in prop::collection::vec((prop::collection::vec(coef(), n), any::<bool>()), d),
         cons in prop::collection::vec((prop::collection::vec(coef(), n), 0usize..3, coef()), m),
         quad in prop::collection::vec((0..n, 0..n, coef()), 0..4),
         max_all in any::<bool>(),
         n in Just(n))
        -> Problem
    {
        let variables = vars.iter().enumerate().map(|(j, &((lo, up), int))| Variable {
            name: format!("v{j}"),
            lower: lo,
            upper: up,
            integer: int,
        }).collect();
        let mut objectives: Vec<Objective> = objs.iter().enumerate().map(|(i, (c, max))| {
            let sense = if (mixed_senses && *max) || (!mixed_senses && max_all) {
                ObjectiveSense::Maximize
            } else {
                ObjectiveSense::Minimize
            };
            Objective { name: format!("f{i}"), sense, coefficients: c.clone(), quadratic: None }
        }).collect();
        let constraints = cons.iter().enumerate().map(|(k, (a, s, rhs))| {
            let sense = [ConstraintSense::Le, ConstraintSense::Eq, ConstraintSense::Ge][*s];
            Constraint::new(format!("c{k}"), a.clone(), sense, *rhs)
        }).collect();
        if quadratic && !quad.is_empty() {
            let mut q = QuadraticForm::new();
            for &(i, j, c) in &quad {
                q.add_term(i.min(n - 1), j.min(n - 1), c);
            }
            objectives[0].quadratic = Some(q);
        }
        Problem { name: "rt".into(), variables, objectives, constraints }
    }
}

proptest! {
    #[test]
    fn lp_round_trip(p in problem(true, true)) {
        let text = serialize_problem(&p, Format::Lp).unwrap();
        let q = parse_lp(&text).unwrap();
        prop_assert_eq!(&q, &p);
        // Idempotent on the second cycle as well.
        prop_assert_eq!(serialize_problem(&q, Format::Lp).unwrap(), text);
    }

    #[test]
    fn mps_round_trip(p in problem(false, false)) {
        let text = serialize_problem(&p, Format::Mps).unwrap();
        prop_assert_eq!(parse_mps(&text).unwrap(), p);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let _ = parse_bytes(&bytes, None);
        let _ = parse_bytes(&bytes, Some(Format::Lp));
        let _ = parse_bytes(&bytes, Some(Format::Mps));
    }

    #[test]
    fn mangled_lp_text_never_panics(p in problem(true, true), cut in 0usize..2000, junk in "[ -~\\n]{0,12}") {
        let mut text = serialize_problem(&p, Format::Lp).unwrap();
        let at = (0..=cut.min(text.len())).rev().find(|&i| text.is_char_boundary(i)).unwrap_or(0);
        text.insert_str(at, &junk);
        if let Err(e) = parse_lp(&text) {
            prop_assert!(e.location.line >= 1 && e.location.column >= 1);
        }
    }

    #[test]
    fn mangled_mps_text_never_panics(p in problem(false, false), cut in 0usize..2000, junk in "[ -~\\n]{0,12}") {
        let mut text = serialize_problem(&p, Format::Mps).unwrap();
        let at = cut.min(text.len());
        text.insert_str(at, &junk);
        if let Err(e) = parse_mps(&text) {
            prop_assert!(e.location.line >= 1 && e.location.column >= 1);
        }
    }
}

#[test]
fn lp_and_mps_agree() {
    let lp = "\\Problem name: e2
Minimize
 f1: x1
 f2: x2
Subject To
 c1: x1 + 2 x2 >= 2
 c2: 2 x1 + x2 >= 2
Bounds
 0 <= x1 <= 2
 0 <= x2 <= 2
Generals
 x1 x2
End
";
    let a = parse_lp(lp).unwrap();
    let b = parse_mps(&serialize_problem(&a, Format::Mps).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.num_integer(), 2);
}
