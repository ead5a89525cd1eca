//! Fixed, deterministic cross-checks between independent code paths.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::io::Write;

use nalgebra::Vector3;
use pairple::steady_state::evolve_with_retry;
use pairple::{
    build_liouvillian, gamma_12, green_contraction, intensity_factors, omega_12,
    oracle_schedule, product_basis_intensity, solve_steady, to_collective, total_intensity,
    Couplings64, DensityMatrix64, GeometryConfig64, PairParams64, Result,
};

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        pass: worst <= tol,
        detail: format!("max err {worst:.2e}, tol {tol:.0e}"),
    }
}

/// A small spread of pair configurations, from the strongly coupled
/// identical pair to a detuned, unequal pair at oblique incidence.
fn cases() -> Vec<(PairParams64, GeometryConfig64)> {
    let geom = |xi, theta, phi, r| GeometryConfig64::new(xi, theta, phi, FRAC_PI_2, r).unwrap();
    vec![
        (
            PairParams64::identical(2.0),
            geom(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0.15),
        ),
        (
            PairParams64::new(1.3, 4.0, 3.0).with_detuning(-2.0),
            geom(FRAC_PI_3, 1.2, 0.7, 0.25),
        ),
        (
            PairParams64::new(0.8, 1.0, 1.0).with_detuning(0.5),
            geom(1.0, 1.5, 2.5, 0.5),
        ),
    ]
}

fn closed_forms_vs_green() -> Result<Check> {
    let params = PairParams64::new(1.2, 0.0, 1.0);
    let mut worst = 0.0f64;
    for i in 0..13 {
        let x = 10f64.powf(-2.0 + i as f64 / 3.0);
        for j in 0..7 {
            let theta = PI * (j as f64 + 0.5) / 7.0;
            let r = Vector3::new(0.0, 0.0, x / (2.0 * PI));
            let nd = Vector3::new(theta.sin(), 0.0, theta.cos());
            let d = green_contraction(&params, &r, &nd)?;
            let g = gamma_12(&params, x, theta)?;
            let o = omega_12(&params, x, theta)?;
            // The tensor route sums near-field terms of size 1/x³ and loses
            // about eps/x² relative accuracy below x ~ 0.1.
            let conditioning = (0.1 / x).powi(2).max(1.0);
            let err = ((g - d.im).abs() / g.abs().max(1.0))
                .max((o - d.re).abs() / o.abs().max(1.0));
            worst = worst.max(err / conditioning);
        }
    }
    Ok(check("closed-form couplings vs Green tensor", worst, 1e-12))
}

fn steady_vs_time_evolution() -> Result<Check> {
    let mut worst = 0.0f64;
    for (p, cfg) in cases() {
        let c = Couplings64::compute(&p, &cfg.derive()?)?;
        let l = build_liouvillian(&p, &c)?;
        let rho = solve_steady(&l)?;
        let (t_max, dt) = oracle_schedule(&l);
        let ev = evolve_with_retry(&l, &DensityMatrix64::ground(), t_max, dt)?;
        let diff = ev.rho.matrix() - rho.matrix();
        worst = worst.max(diff.iter().fold(0.0, |m, z| m.max(z.norm())));
    }
    Ok(check("steady state vs RK4 evolution", worst, 1e-6))
}

fn decoupled_factorizes() -> Result<Check> {
    let mut worst = 0.0f64;
    for (p, cfg) in cases() {
        let c = Couplings64::decoupled(&p, &cfg.derive()?)?;
        let rho = solve_steady(&build_liouvillian(&p, &c)?)?;
        let pop = |i: usize, det: f64| {
            let d2 = c.drive(i).norm_sqr();
            let g = c.rate(i, i);
            d2 / (det * det + g * g + 2.0 * d2)
        };
        let (p1, p2) = (pop(0, p.detuning1()), pop(1, p.detuning2()));
        worst = worst
            .max((rho.excited_population(0) - p1).abs())
            .max((rho.excited_population(1) - p2).abs())
            .max((rho.matrix()[(3, 3)].re - p1 * p2).abs());
    }
    Ok(check("decoupled pair vs single-emitter formula", worst, 1e-12))
}

fn intensity_bases_agree() -> Result<Check> {
    let mut worst = 0.0f64;
    for (p, cfg) in cases() {
        let g = cfg.derive()?;
        let c = Couplings64::compute(&p, &g)?;
        let rho = solve_steady(&build_liouvillian(&p, &c)?)?;
        let f = intensity_factors(&p, &cfg, &g);
        let a = total_intensity(&to_collective(&rho), &f);
        let b = product_basis_intensity(&rho, &f);
        worst = worst.max((a - b).abs());
    }
    Ok(check("intensity in collective vs product basis", worst, 1e-12))
}

fn generator_is_dissipative() -> Result<Check> {
    let mut worst = f64::NEG_INFINITY;
    for (p, cfg) in cases() {
        let c = Couplings64::compute(&p, &cfg.derive()?)?;
        let l = build_liouvillian(&p, &c)?;
        match l.eigenvalues() {
            Some(ev) => worst = ev.iter().fold(worst, |m, z| m.max(z.re)),
            None => worst = f64::INFINITY,
        }
    }
    Ok(Check {
        name: "Liouvillian spectrum in closed left half-plane",
        pass: worst <= 1e-10,
        detail: format!("max Re eigenvalue {worst:.2e}"),
    })
}

/// Runs every check and reports one line each. Returns whether all passed.
pub fn run(out: &mut impl Write) -> std::io::Result<bool> {
    let suite: [fn() -> Result<Check>; 5] = [
        closed_forms_vs_green,
        steady_vs_time_evolution,
        decoupled_factorizes,
        intensity_bases_agree,
        generator_is_dissipative,
    ];
    let mut passed = 0;
    for f in suite {
        let c = f().unwrap_or_else(|e| Check {
            name: "check aborted",
            pass: false,
            detail: e.to_string(),
        });
        let tag = if c.pass { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", c.name, c.detail)?;
        passed += usize::from(c.pass);
    }
    writeln!(out, "selftest: {passed}/{} passed", suite.len())?;
    Ok(passed == suite.len())
}
