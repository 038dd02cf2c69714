#![allow(dead_code)]

use wedge_bl::crocco_profile::{from_similarity, solve_integral_equation, CroccoProfile, IntegralOptions};
use wedge_bl::grid::EtaGrid;
use wedge_bl::line_method::CroccoField;
use wedge_bl::physical::PhysicalField;
use wedge_bl::pipeline::{compute, Artifacts, Stage};
use wedge_bl::scenario::{Poly, Scenario};
use wedge_bl::similarity::{solve, ProfileSolution, ShootingOptions, SimilarityProblem, Variant};

pub const MS: [f64; 4] = [0.2, 0.5, 1.0, 2.0];

/// Similarity-derived and integral-equation tip slices on an `n`-cell grid.
pub fn both_routes(variant: Variant, m: f64, n: usize) -> (ProfileSolution, CroccoProfile, CroccoProfile) {
    let grid = EtaGrid::graded(n, 2.0).unwrap();
    let prob = SimilarityProblem::new(variant, m, 1.0, 1.0).unwrap();
    let sol = solve(&prob, &ShootingOptions::default()).unwrap();
    let a = from_similarity(&sol, &prob, &grid).unwrap();
    let b = solve_integral_equation(variant, m, 1.0, 1.0, &grid, &IntegralOptions::default()).unwrap();
    (sol, a, b)
}

/// `a1 = 0.1 x`, `v1 = 0.05 x` (the stored polynomials multiply `x`).
pub fn perturbed(variant: Variant, m: f64) -> Scenario {
    let mut s = Scenario::self_similar(variant, m, 0.5);
    s.perturbation.a1 = Poly(vec![0.1]);
    s.perturbation.v1 = Poly(vec![0.05]);
    s
}

pub fn run(s: &Scenario, last: Stage) -> Artifacts {
    let (art, err) = compute(s, &last.through());
    if let Some(e) = err {
        panic!("{e}");
    }
    art
}

pub fn field(s: &Scenario) -> CroccoField {
    run(s, Stage::March).field.unwrap()
}

pub fn physical(s: &Scenario) -> (PhysicalField, ProfileSolution) {
    let art = run(s, Stage::Reconstruct);
    (art.physical.unwrap(), art.solution.unwrap())
}

/// Same scenario with `h` halved and twice the η-cells.
pub fn refined(s: &Scenario) -> Scenario {
    let mut r = s.clone();
    r.grid.h /= 2.0;
    r.grid.n *= 2;
    r
}
