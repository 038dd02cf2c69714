mod common;

use common::{both_routes, field, perturbed, MS};
use wedge_bl::grid::{default_mu, EtaGrid};
use wedge_bl::line_method::{
    assemble_slice_residual, coefficients, manufactured_error, march, mu_star, sandwich_check, slice_residual_norm,
    solve_slice, uniqueness_probe, Coefficients, LineOptions, SliceProblem,
};
use wedge_bl::scenario::{Poly, Scenario};
use wedge_bl::similarity::Variant;

#[test]
fn coefficients_at_the_tip_and_along_the_wall() {
    let s = Scenario::self_similar(Variant::Planar, 1.0, 0.5);
    let c = coefficients(&s, 0.0).unwrap();
    assert_eq!(c, Coefficients { a: 0.0, b: 1.0, c: 1.0, v1: 0.0 });

    let mut s = Scenario::self_similar(Variant::Planar, 0.5, 0.5);
    s.perturbation.a1 = Poly(vec![0.3]);
    for xi in [0.0, 0.1, 0.4] {
        let c = coefficients(&s, xi).unwrap();
        assert!((c.b - (0.5 + 1.5 * 0.3 * xi)).abs() < 1e-15);
        assert!((c.a - xi * (1.0 + 0.3 * xi)).abs() < 1e-15);
    }
    assert!(coefficients(&s, -0.1).is_err());

    let mut s = Scenario::self_similar(Variant::Axisymmetric, 0.5, 0.5);
    s.perturbation.c = 0.7;
    s.perturbation.a1 = Poly(vec![0.2]);
    for xi in [0.0, 0.25] {
        let c = coefficients(&s, xi).unwrap();
        let v = 1.0 + 0.2 * xi;
        assert!((c.c - (1.5 * (0.5 - 1.0) * v + xi * 0.2)).abs() < 1e-14);
    }
}

#[test]
fn residual_pieces() {
    let (_, y, _) = both_routes(Variant::Planar, 1.0, 256);
    let s = Scenario::self_similar(Variant::Planar, 1.0, 0.5);
    let mk = |coef| SliceProblem {
        grid: &y.grid,
        prev: &y.y,
        coef,
        nu: 1.0,
        h: 0.01,
        mu_k: 2.0,
        source: None,
        wall_source: 0.0,
    };
    let coef = coefficients(&s, 0.2).unwrap();
    // self-similar slice: the rows are those of the discrete profile equation
    let r = assemble_slice_residual(&mk(coef), &y.y, 0.0);
    let n = y.grid.intervals();
    let stop = (0.95 * n as f64).floor() as usize;
    let worst = (1..stop).map(|j| r[j].abs() / (y.y[j] + 1e-12)).fold(0.0, f64::max);
    assert!((worst - y.begin_residual()).abs() <= 1e-12 * worst);
    assert!(worst < 1e-3);
    assert_eq!(r[n], 0.0);
    assert!(r[0].abs() < 1e-3);
    assert!(slice_residual_norm(&mk(coef), &y.y, 0.0) < 1e-2);

    // a huge regularization dominates every interior row
    let small: Vec<f64> = y.y.iter().map(|v| 1e-3 * v).collect();
    let eps = 1e10;
    let r = assemble_slice_residual(&mk(coef), &small, eps);
    for j in [10, 100, 200] {
        let d2 = eps * y.grid.diff2(&small, j);
        assert!((r[j] - d2).abs() <= 1e-3 * d2.abs(), "row {j}");
    }

    // flipping C flips the −ηCω contribution exactly
    let flipped = Coefficients { c: -coef.c, ..coef };
    let zero = Coefficients { c: 0.0, ..coef };
    let r0 = assemble_slice_residual(&mk(zero), &y.y, 0.0);
    let rp = assemble_slice_residual(&mk(coef), &y.y, 0.0);
    let rm = assemble_slice_residual(&mk(flipped), &y.y, 0.0);
    for j in 1..256 {
        assert!(((rp[j] - r0[j]) + (rm[j] - r0[j])).abs() <= 1e-12 * (rp[j] - r0[j]).abs().max(1e-300));
    }
}

#[test]
fn first_slice_reproduces_the_tip_profile() {
    let s = Scenario::self_similar(Variant::Planar, 1.0, 0.5);
    let opts = LineOptions::default();
    let mut gaps = Vec::new();
    for n in [256, 512] {
        let (_, y, _) = both_routes(Variant::Planar, 1.0, n);
        let p = SliceProblem {
            grid: &y.grid,
            prev: &y.y,
            coef: coefficients(&s, 0.0).unwrap(),
            nu: 1.0,
            h: s.grid.h,
            mu_k: 0.0,
            source: None,
            wall_source: 0.0,
        };
        let warm: Vec<f64> = y.y.iter().map(|v| 1.05 * v).collect();
        let (w, diag) = solve_slice(&p, &warm, &opts).unwrap();
        assert!(diag.residual <= opts.newton_tol);
        gaps.push(w.iter().zip(&y.y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    // the discrete slice differs from the exact profile by the O(N^-2) truncation error
    assert!(gaps[1] < 1e-4);
    assert!(gaps[0] / gaps[1] > 3.0, "gaps {gaps:?}");
}

#[test]
fn manufactured_solutions() {
    let mut s = Scenario::self_similar(Variant::Planar, 1.0, 0.5);
    s.perturbation.a1 = Poly(vec![0.1]);
    s.perturbation.v1 = Poly(vec![0.05]);
    let coef = coefficients(&s, 0.1).unwrap();
    let opts = LineOptions::default();
    let quadratic = |e: f64| (1.0 - 0.5 * e - 0.5 * e * e, -0.5 - e, -1.0);
    let pi = std::f64::consts::PI;
    let wavy = |e: f64| {
        let (v, d1, d2) = quadratic(e);
        (v + 0.25 * (pi * e).sin(), d1 + 0.25 * pi * (pi * e).cos(), d2 - 0.25 * pi * pi * (pi * e).sin())
    };
    let grid = EtaGrid::graded(128, 2.0).unwrap();
    // three-point stencils are exact on quadratics
    assert!(manufactured_error(&grid, coef, 1.0, s.grid.h, quadratic, &opts).unwrap() < 1e-10);

    let errs: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| manufactured_error(&EtaGrid::graded(n, 2.0).unwrap(), coef, 1.0, s.grid.h, wavy, &opts).unwrap())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "errors {errs:?}");
    }
}

#[test]
fn self_similar_march_stays_on_the_profile() {
    for m in MS {
        let s = Scenario::self_similar(Variant::Planar, m, 0.5);
        let (_, y, _) = both_routes(Variant::Planar, m, 512);
        let f = field(&s);
        assert_eq!(f.slices(), 51);
        let dev = f.sup_deviation(&y.y);
        assert!(dev <= 1e-4 + 10.0 * s.tolerances.newton_tol, "m={m}: {dev:e}");
        for d in &f.diag[1..] {
            assert!(d.residual <= s.tolerances.newton_tol);
            assert!(d.robin_residual <= s.tolerances.newton_tol);
        }
    }
}

#[test]
fn self_similar_deviation_scales_like_n_squared() {
    let mut c = Vec::new();
    for n in [256, 512] {
        let mut s = Scenario::self_similar(Variant::Planar, 1.0, 0.2);
        s.grid.n = n;
        let (_, y, _) = both_routes(Variant::Planar, 1.0, n);
        c.push(field(&s).sup_deviation(&y.y) * (n * n) as f64);
    }
    let r = c[0] / c[1];
    assert!((0.5..=2.0).contains(&r), "scaled deviations {c:?}");
}

#[test]
fn perturbed_march_reaches_the_extent() {
    let s = perturbed(Variant::Planar, 0.5);
    let f = field(&s);
    assert!((f.attained_extent() - 0.5).abs() < 1e-12);
    let n = f.grid.intervals();
    for w in &f.omega {
        assert!(w[..n].iter().all(|v| *v > 0.0));
        assert_eq!(w[n], 0.0);
    }
}

#[test]
fn halving_the_step_shrinks_the_difference() {
    let mut s = perturbed(Variant::Planar, 0.5);
    let fields: Vec<_> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&h| {
            s.grid.h = h;
            field(&s)
        })
        .collect();
    let d1 = fields[0].sup_difference(&fields[1]);
    let d2 = fields[1].sup_difference(&fields[2]);
    assert!(d1 / d2 >= 1.8, "d1 {d1:e} d2 {d2:e}");
}

#[test]
fn restarts_land_on_the_same_slices() {
    for m in [0.5, 1.0] {
        let s = perturbed(Variant::Planar, m);
        let f = field(&s);
        let opts = LineOptions::from_tolerances(&s.tolerances);
        for seed in [1, 2] {
            let gap = uniqueness_probe(&s, &f, &opts, seed).unwrap();
            assert!(gap <= 10.0 * s.tolerances.newton_tol, "m={m} seed={seed}: {gap:e}");
        }
    }
}

#[test]
fn regularization_stages_settle() {
    let s = perturbed(Variant::Planar, 1.0);
    let f = field(&s);
    let opts = LineOptions::from_tolerances(&s.tolerances);
    for d in &f.diag[1..] {
        let eps0 = d.eps_path[0];
        let tail: Vec<f64> = d
            .eps_path
            .iter()
            .zip(&d.stage_diffs)
            .filter(|(e, _)| **e <= eps0 / 16.0)
            .map(|(_, v)| *v)
            .collect();
        assert!(tail.len() >= 2);
        for w in tail.windows(2) {
            assert!(w[1] <= w[0], "slice {}: {:?}", d.k, d.stage_diffs);
        }
        assert_eq!(*d.eps_path.last().unwrap(), 0.0);
        assert!(d.eps_path.len() <= opts.eps_schedule(1.0).len() + 16);
    }
}

#[test]
fn sandwich_bounds_hold() {
    let mu = default_mu();
    for variant in [Variant::Planar, Variant::Axisymmetric] {
        for m in MS {
            let s = perturbed(variant, m);
            let (_, y, _) = both_routes(variant, m, 512);
            let f = field(&s);
            let rep = sandwich_check(&f, &y.y, variant, m, mu);
            assert!(rep.flags.is_empty(), "{variant:?} m={m}: {:?}", rep.flags);
            assert!(rep.constants_finite());
            assert!(rep.m11 >= 0.0 && rep.m12 > 0.0 && rep.m13 > 0.0);
            assert!(rep.m11 * 0.5 <= 1.0 && rep.m12 * 0.5 <= 1.0);
            assert!(rep.m19 > 0.0 && rep.m19 <= rep.m18);
            let below = m < variant.regime_threshold();
            assert_eq!(rep.m16_m17.is_some(), below);
            assert_eq!(rep.m14_m15.is_some(), !below);
        }
    }
}

#[test]
fn stabilization_constant() {
    let opts = LineOptions::default();
    let s = perturbed(Variant::Planar, 0.5);
    assert_eq!(mu_star(&s, &opts, 50).unwrap(), 0.0);
    let s = perturbed(Variant::Planar, 2.0);
    // B = mV + ξV_ξ = 2 + 3·0.1ξ peaks at ξ = 0.5
    assert!((mu_star(&s, &opts, 50).unwrap() - 2.0 * (2.0 + 0.15)).abs() < 1e-12);
    let fixed = LineOptions { mu_star: Some(7.0), ..opts };
    assert_eq!(mu_star(&s, &fixed, 50).unwrap(), 7.0);
}

#[test]
fn separating_flow_stops_with_a_partial_field() {
    let mut s = Scenario::self_similar(Variant::Planar, 1.0, 0.5);
    s.perturbation.a1 = Poly(vec![-1.9]);
    let (_, y, _) = both_routes(Variant::Planar, 1.0, 512);
    let out = march(&s, &y, &LineOptions::default()).unwrap();
    let k = out.failure.as_ref().expect("march should stop").0;
    assert!(!out.completed());
    assert_eq!(out.field.slices(), k);
    assert!(out.field.attained_extent() < 0.5);
}
