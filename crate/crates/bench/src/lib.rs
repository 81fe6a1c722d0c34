//! Fixtures shared by the benchmarks.

use redistrib_core::{Problem, RuleSpec};

/// A deterministic problem with `n` agents and mixed-sign incomes.
pub fn fixture(n: usize) -> Problem {
    let incomes = (0..n).map(|i| ((i * 37) % 23) as f64 - 8.0).collect();
    let needs = (0..n).map(|i| ((i * 11) % 7) as f64 + 0.5).collect();
    Problem::from_profiles(incomes, needs).expect("fixture is valid")
}

/// One rule of each kind, with its display name.
pub fn catalog() -> Vec<(String, RuleSpec)> {
    [
        "lf",
        "full",
        "prop",
        "nafr",
        "ab:A=const:0.5,B=scale:0.5",
        "afam:A=poly:0.2,0.1",
        "bfam:B=poly:0,0,1",
        "lin:0.3,0.2",
        "lindual:0.3,0.2",
        "convex(lf;prop;0.5)",
        "dual(afam:A=id)",
    ]
    .iter()
    .map(|s| (s.to_string(), s.parse().expect("catalog rule parses")))
    .collect()
}
