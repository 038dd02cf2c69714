mod common;

use common::{both_routes, MS};
use wedge_bl::crocco_profile::{envelope_fit, CroccoError, IntegralOptions, ProfileSource};
use wedge_bl::grid::{default_mu, sigma, sigma_t, GridError};
use wedge_bl::similarity::Variant;

#[test]
fn sigma_reference_values() {
    assert!((sigma(0.0, 0.5).unwrap() - 2f64.ln().sqrt()).abs() < 1e-15);
    assert!((sigma(0.0, 0.5).unwrap() - 0.83255).abs() < 1e-5);
    assert!((sigma(0.0, (-1f64).exp()).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(sigma(1.0, 0.5), Err(GridError::Divergence));
    assert!(sigma(1.0 - 1e-15, 0.5).unwrap() > 5.8);
    assert!(sigma_t(1e-300, 0.5) > 26.0);
    assert!(matches!(sigma(0.0, 1.0), Err(GridError::Domain(_))));
}

#[test]
fn similarity_route_endpoints() {
    for variant in [Variant::Planar, Variant::Axisymmetric] {
        for m in MS {
            let (sol, y, _) = both_routes(variant, m, 256);
            assert_eq!(y.source, ProfileSource::Similarity);
            assert_eq!(*y.y.last().unwrap(), 0.0);
            assert!((y.y[0] - sol.wall_shear / sol.scale_length).abs() < 1e-12);
            assert!(y.robin_residual() <= 1e-6, "robin {}", y.robin_residual());
            y.check_invariants().unwrap();
        }
    }
}

#[test]
fn tip_value_follows_rk4_oracle_for_unit_stagnation() {
    // planar m = 1 is β = 1 with L = 1
    let (_, y, _) = both_routes(Variant::Planar, 1.0, 256);
    assert!((y.y[0] - 1.232588).abs() < 1e-5);
}

#[test]
fn integral_equation_is_a_fixed_point() {
    let fp_tol = IntegralOptions::default().fp_tol;
    for m in MS {
        let (_, _, y) = both_routes(Variant::Planar, m, 512);
        assert_eq!(y.source, ProfileSource::IntegralEquation);
        let r = y.integral_residual(default_mu());
        assert!(r <= 5.0 * fp_tol, "m={m}: residual {r:e}");
        y.check_invariants().unwrap();
    }
}

#[test]
fn both_routes_agree_and_converge() {
    for variant in [Variant::Planar, Variant::Axisymmetric] {
        for m in MS {
            let (_, a, b) = both_routes(variant, m, 512);
            let gap = a.sup_gap(&b);
            assert!(gap <= 5e-3, "{variant:?} m={m}: gap {gap:e}");
            let (_, a2, b2) = both_routes(variant, m, 256);
            assert!(a2.sup_gap(&b2) > 1.5 * gap, "{variant:?} m={m}: gap is not shrinking");
        }
    }
}

#[test]
fn wall_value_of_closed_form_derivative() {
    for m in MS {
        let (_, _, y) = both_routes(Variant::Planar, m, 512);
        let d = y.derivative_from_integral(default_mu());
        let expect = -m / y.y[0];
        assert!((d[0] - expect).abs() <= 1e-12 * expect.abs(), "m={m}: {} vs {expect}", d[0]);
        assert!((y.y[0] * d[0] + m).abs() <= 1e-6);
        assert!(d[..d.len() - 1].iter().all(|v| *v < 0.0));
    }
}

#[test]
fn closed_form_derivative_matches_differences() {
    for m in MS {
        let (_, _, y) = both_routes(Variant::Planar, m, 512);
        let d = y.derivative_from_integral(default_mu());
        let g = &y.grid;
        let mut worst: f64 = 0.0;
        for j in 1..g.intervals() {
            if g.eta[j] > 0.99 {
                break;
            }
            let fd = g.diff1(&y.y, j);
            worst = worst.max((fd - d[j]).abs() / d[j].abs());
        }
        assert!(worst <= 0.02, "m={m}: relative gap {worst}");
    }
}

#[test]
fn envelope_constants_are_ordered() {
    let mu = default_mu();
    for variant in [Variant::Planar, Variant::Axisymmetric] {
        for m in MS {
            let (_, a, b) = both_routes(variant, m, 512);
            for y in [&a, &b] {
                let e = envelope_fit(y, mu).unwrap();
                for v in [e.m5, e.m6, e.m7, e.m8, e.m9, e.m10] {
                    assert!(v > 0.0 && v.is_finite());
                }
                assert!(e.m5 <= e.m6 && e.m8 <= e.m7 && e.m10 <= e.m9);
                for (j, eta) in y.grid.eta.iter().enumerate() {
                    assert!(e.lower(*eta) <= y.y[j] * (1.0 + 1e-12) && y.y[j] <= e.upper(*eta) * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn envelope_rejects_mu_at_or_above_one() {
    let (_, y, _) = both_routes(Variant::Planar, 1.0, 64);
    for mu in [1.0, 1.5] {
        assert!(matches!(envelope_fit(&y, mu), Err(CroccoError::Grid(GridError::Domain(_)))));
    }
}

#[test]
fn profile_equation_and_tail_shape() {
    let mu = default_mu();
    for m in MS {
        let (_, a, b) = both_routes(Variant::Planar, m, 512);
        for y in [&a, &b] {
            assert!(y.begin_residual() <= 1e-3, "m={m}: begin residual {}", y.begin_residual());
            assert!(y.tail_ratio_oscillation(mu) <= 0.2);
        }
    }
}

#[test]
fn lower_amplitude_is_stable_under_refinement() {
    let mu = default_mu();
    for m in MS {
        let coarse = envelope_fit(&both_routes(Variant::Planar, m, 256).2, mu).unwrap();
        let fine = envelope_fit(&both_routes(Variant::Planar, m, 512).2, mu).unwrap();
        let r = coarse.m5 / fine.m5;
        assert!((0.8..=1.25).contains(&r), "m={m}: ratio {r}");
    }
}
