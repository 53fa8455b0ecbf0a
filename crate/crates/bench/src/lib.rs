//! Fixed instance sets shared by the benchmarks in `benches/`.

use moxp_core::bench::{generate, Family, GenSpec};
use moxp_core::Problem;

/// `(label, problem)` pairs: pure-integer and mixed instances of growing size.
pub fn instances() -> Vec<(String, Problem)> {
    let mut out = Vec::new();
    for (family, d, n) in [
        (Family::MoilpGeneral, 2, 6),
        (Family::MoilpGeneral, 3, 6),
        (Family::MomilpMixed, 3, 8),
        (Family::MomilpMixed, 4, 6),
    ] {
        let mut spec = GenSpec::new(family, d, n, 42);
        spec.upper = 3;
        let p = generate(&spec).expect("fixed specs are valid");
        out.push((format!("{family}/d{d}/n{n}"), p));
    }
    out
}
