//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its PASS/FAIL line; exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{both_routes, field, perturbed, physical, refined, MS};
use wedge_bl::crocco_profile::envelope_fit;
use wedge_bl::grid::{default_mu, EtaGrid};
use wedge_bl::line_method::{coefficients, manufactured_error, sandwich_check, uniqueness_probe, LineOptions};
use wedge_bl::physical::{decay_check, reconstruct, residuals, wall_transpiration_error, PhysicalField, PhysicalOptions};
use wedge_bl::pipeline::physical_options;
use wedge_bl::scenario::{Poly, Scenario};
use wedge_bl::similarity::{asymptotic_fit_window, solve, solve_falkner_skan, ShootingOptions, SimilarityProblem, Variant};

/// Outcome of one criterion: verdict plus the measured values behind it.
struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new() -> Self {
        Self {
            ok: true,
            detail: String::new(),
        }
    }

    /// Record one measured quantity and whether it met its bound.
    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
        if !ok {
            self.detail.push_str(" [miss]");
            self.ok = false;
        }
    }
}

/// Fixed-step RK4 shooting with bisection on `f''(0)`, independent of the
/// library integrator. `h = 1e-4`, bracket closed to `1e-10`.
fn rk4_wall_shear(beta: f64) -> f64 {
    let h = 1e-4;
    let z_max = 10.0;
    let rhs = |y: [f64; 3]| [y[1], y[2], -y[0] * y[2] - beta * (1.0 - y[1] * y[1])];
    let over = |s: f64| -> bool {
        let mut y = [0.0, 0.0, s];
        for _ in 0..(z_max / h) as usize {
            let add = |y: [f64; 3], k: [f64; 3], c: f64| [y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2]];
            let k1 = rhs(y);
            let k2 = rhs(add(y, k1, h / 2.0));
            let k3 = rhs(add(y, k2, h / 2.0));
            let k4 = rhs(add(y, k3, h));
            for i in 0..3 {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if y[1] > 1.0 {
                return true;
            }
            if y[2] < 0.0 {
                return false;
            }
        }
        y[1] > 1.0
    };
    let (mut lo, mut hi) = (0.1, 2.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if over(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn wall_shear(v: &mut Verdict, variant: Variant, m: f64, target: f64) {
    let prob = SimilarityProblem::new(variant, m, 1.0, 1.0).unwrap();
    let sol = solve(&prob, &ShootingOptions::default()).unwrap();
    let oracle = rk4_wall_shear(sol.beta);
    v.check(
        (oracle - target).abs() <= 1e-3 && (sol.wall_shear - oracle).abs() <= 1e-3,
        format!("beta={:.4} f''(0)={:.6} oracle={oracle:.6}", sol.beta, sol.wall_shear),
    );
    let n = sol.len();
    let shape = sol.fpp.iter().all(|v| *v > 0.0) && sol.fp[1..n - 1].iter().all(|v| *v > 0.0 && *v < 1.0);
    v.check(shape, format!("beta={:.4} f''>0, 0<f'<1", sol.beta));
}

fn c1() -> Verdict {
    let mut v = Verdict::new();
    for (beta, target) in [(0.0, 0.46960), (0.5, 0.92768), (1.0, 1.23259)] {
        let sol = solve_falkner_skan(beta, 0.0, 0.0, &ShootingOptions::default()).unwrap();
        let oracle = rk4_wall_shear(beta);
        v.check(
            (oracle - target).abs() <= 1e-3 && (sol.wall_shear - oracle).abs() <= 1e-3,
            format!("beta={beta} f''(0)={:.6} oracle={oracle:.6}", sol.wall_shear),
        );
        let n = sol.len();
        let shape = sol.fpp.iter().all(|v| *v > 0.0) && sol.fp[1..n - 1].iter().all(|v| *v > 0.0 && *v < 1.0);
        v.check(shape, format!("beta={beta} f''>0, 0<f'<1"));
    }
    v
}

fn c2() -> Verdict {
    let mut v = Verdict::new();
    for beta in [0.0, 1.0] {
        let sol = solve_falkner_skan(beta, 0.0, 0.0, &ShootingOptions::default()).unwrap();
        let fit = asymptotic_fit_window(&sol, 1e-10, 1e-2).unwrap();
        v.check(fit.rms_residual <= 0.05, format!("beta={beta} rms={:.2e}", fit.rms_residual));
        v.check(fit.c1 > 0.0, format!("c1={:.4}", fit.c1));
    }
    v
}

fn route_equivalence(v: &mut Verdict, variant: Variant) {
    for m in MS {
        let (_, a, b) = both_routes(variant, m, 512);
        let gap = a.sup_gap(&b);
        let (_, a2, b2) = both_routes(variant, m, 256);
        let ratio = a2.sup_gap(&b2) / gap;
        v.check(gap <= 5e-3, format!("m={m} gap={gap:.2e}"));
        v.check((1.6..=2.4).contains(&ratio), format!("m={m} gap ratio 256/512={ratio:.3}"));
    }
}

fn c3() -> Verdict {
    let mut v = Verdict::new();
    route_equivalence(&mut v, Variant::Planar);
    v
}

fn c4() -> Verdict {
    let mut v = Verdict::new();
    let mu = default_mu();
    for m in MS {
        let (_, a, b) = both_routes(Variant::Planar, m, 512);
        for y in [&a, &b] {
            match envelope_fit(y, mu) {
                Ok(e) => {
                    let all = [e.m5, e.m6, e.m7, e.m8, e.m9, e.m10];
                    v.check(
                        all.iter().all(|c| *c > 0.0 && c.is_finite()),
                        format!("m={m} M5..M10={:.3},{:.3},{:.3},{:.3},{:.3},{:.3}", all[0], all[1], all[2], all[3], all[4], all[5]),
                    );
                }
                Err(e) => v.check(false, format!("m={m} {e}")),
            }
            v.check(y.robin_residual() <= 1e-6, format!("robin={:.1e}", y.robin_residual()));
        }
    }
    v
}

fn self_similar_fidelity(v: &mut Verdict, variant: Variant) {
    for m in [1.0, 0.2, 2.0] {
        let s = Scenario::self_similar(variant, m, 0.5);
        let (_, y, _) = both_routes(variant, m, 512);
        let dev = field(&s).sup_deviation(&y.y);
        let bound = 1e-4 + 10.0 * s.tolerances.newton_tol;
        v.check(dev <= bound, format!("m={m} sup|w-Y|={dev:.2e}"));
    }
}

fn c5() -> Verdict {
    let mut v = Verdict::new();
    self_similar_fidelity(&mut v, Variant::Planar);
    v
}

fn c6() -> Verdict {
    let mut v = Verdict::new();
    for m in MS {
        let s = perturbed(Variant::Planar, m);
        let (_, y, _) = both_routes(Variant::Planar, m, 512);
        let f = field(&s);
        let x = f.attained_extent();
        let r = sandwich_check(&f, &y.y, Variant::Planar, m, s.tolerances.mu);
        let finite = r.constants_finite() && r.m11 >= 0.0 && r.m12 > 0.0 && r.m13 > 0.0;
        v.check(
            finite && r.flags.is_empty(),
            format!("m={m} M11={:.3} M12={:.3} M13={:.3} flags={}", r.m11, r.m12, r.m13, r.flags.len()),
        );
        v.check(r.m11 * x <= 1.0 && r.m12 * x <= 1.0, format!("M11 X={:.3} M12 X={:.3}", r.m11 * x, r.m12 * x));
        v.check(r.m19 > 0.0, format!("M19={:.3}", r.m19));
    }
    v
}

fn c7() -> Verdict {
    let mut v = Verdict::new();
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
    v.check(d1 / d2 >= 1.8, format!("h-halving ratio={:.3}", d1 / d2));

    let s = perturbed(Variant::Planar, 1.0);
    let coef = coefficients(&s, 0.1).unwrap();
    let pi = std::f64::consts::PI;
    let exact = |e: f64| {
        (
            (1.0 - e) * (1.0 + 0.5 * e) + 0.25 * (pi * e).sin(),
            -0.5 - e + 0.25 * pi * (pi * e).cos(),
            -1.0 - 0.25 * pi * pi * (pi * e).sin(),
        )
    };
    let opts = LineOptions::default();
    let errs: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| manufactured_error(&EtaGrid::graded(n, 2.0).unwrap(), coef, 1.0, 0.01, exact, &opts).unwrap())
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        v.check(order >= 1.9, format!("manufactured order={order:.3}"));
    }
    v
}

fn on_stations(fine: PhysicalField, keep: &[f64]) -> PhysicalField {
    PhysicalField {
        stations: fine
            .stations
            .into_iter()
            .filter(|st| keep.iter().any(|x| (x - st.x).abs() < 1e-9))
            .collect(),
        ..fine
    }
}

fn reconstruction(v: &mut Verdict, s: &Scenario, tag: &str) {
    let (p, _) = physical(s);
    let slip = p.stations.iter().all(|st| st.u[0] == 0.0);
    v.check(slip, format!("{tag} u(x,0)=0"));
    let wall = wall_transpiration_error(&p, s);
    v.check(wall <= 1e-4, format!("{tag} v(x,0) rel={wall:.1e}"));
    let r1 = residuals(&p, s);
    v.check(
        r1.continuity_max <= 1e-2 && r1.momentum_max <= 1e-2,
        format!("{tag} cont={:.2e} mom={:.2e}", r1.continuity_max, r1.momentum_max),
    );
    let fine = refined(s);
    let opts = PhysicalOptions {
        layer_points: 2 * physical_options(s).layer_points,
        ..physical_options(&fine)
    };
    let p2 = reconstruct(&fine, &field(&fine), &opts).unwrap();
    let r2 = residuals(&on_stations(p2, &p.x_nodes()), &fine);
    let oc = (r1.continuity_max / r2.continuity_max).log2();
    let om = (r1.momentum_max / r2.momentum_max).log2();
    v.check(oc >= 0.9 && om >= 0.9, format!("{tag} orders cont={oc:.2} mom={om:.2}"));
}

fn c8() -> Verdict {
    let mut v = Verdict::new();
    for m in MS {
        reconstruction(&mut v, &perturbed(Variant::Planar, m), &format!("m={m}"));
    }
    v
}

fn c9() -> Verdict {
    let mut v = Verdict::new();
    for m in MS {
        let (p, _) = physical(&perturbed(Variant::Planar, m));
        let d = decay_check(&p, 1e-8, 0.1, 10);
        v.check(
            d.empty_windows.is_empty() && d.all_negative() && d.min_r_squared() >= 0.99,
            format!("m={m} slopes<0, min R2={:.5}", d.min_r_squared()),
        );
    }
    let (p, _) = physical(&Scenario::self_similar(Variant::Planar, 1.0, 0.5));
    let d = decay_check(&p, 1e-8, 0.1, 10);
    v.check(d.slope_spread() <= 0.05, format!("m=1 slope spread={:.2e}", d.slope_spread()));
    v
}

fn c10() -> Verdict {
    let mut v = Verdict::new();
    // β = 2m/(m+3): m = 1 is the Homann case, m = 3 gives β = 1
    wall_shear(&mut v, Variant::Axisymmetric, 1.0, 0.92768);
    wall_shear(&mut v, Variant::Axisymmetric, 3.0, 1.23259);
    route_equivalence(&mut v, Variant::Axisymmetric);
    self_similar_fidelity(&mut v, Variant::Axisymmetric);
    for m in MS {
        let mut s = perturbed(Variant::Axisymmetric, m);
        s.perturbation.c = 1.0;
        s.perturbation.r1 = Poly::default();
        reconstruction(&mut v, &s, &format!("cone m={m}"));
    }
    v
}

fn c11() -> Verdict {
    let mut v = Verdict::new();
    for m in MS {
        let s = perturbed(Variant::Planar, m);
        let f = field(&s);
        let opts = LineOptions::from_tolerances(&s.tolerances);
        let gap = uniqueness_probe(&s, &f, &opts, s.seed).unwrap();
        v.check(gap <= 10.0 * s.tolerances.newton_tol, format!("m={m} restart gap={gap:.1e}"));
    }
    v
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Falkner-Skan wall shear", c1),
        ("asymptotic tail law", c2),
        ("route equivalence for Y", c3),
        ("Y envelopes and Robin condition", c4),
        ("self-similar marching fidelity", c5),
        ("sandwich estimates", c6),
        ("self-convergence order", c7),
        ("physical reconstruction", c8),
        ("Gaussian decay", c9),
        ("axisymmetric variant", c10),
        ("uniqueness probe", c11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = run();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {:>2} {name} ({secs:.1}s): {}",
            if v.ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail
        );
        if !v.ok {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
