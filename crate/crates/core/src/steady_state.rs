//! Steady state of the pair: trace-constrained linear solve, plus a fixed-step
//! RK4 integrator used as an independent oracle.

use log::{debug, warn};
use nalgebra::{FullPivLU, SVD};

use crate::error::{Error, Result};
use crate::master_equation::{
    hermiticity_error, max_norm, unvectorize, vectorize, DensityMatrix, Liouvillian, Mat16, Mat4,
    Vec16,
};
use crate::scalar::{cabs, cr, Real, C};

/// Indices of the diagonal of a column-major vectorized 4×4 matrix.
const TRACE_ROW: [usize; 4] = [0, 5, 10, 15];

/// Largest `dt·‖L‖∞` accepted by the integrator (RK4 is stable on the
/// imaginary axis up to `2√2` and on the negative real axis up to `2.78`).
pub const RK4_STABILITY_LIMIT: f64 = 2.5;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 200.0;

fn nullity<T: Real>(m: &Mat16<T>) -> usize {
    let sv = SVD::new(*m, false, false).singular_values;
    let top = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    let cut = top * T::rank_tolerance().sqrt();
    sv.iter().filter(|&&s| s <= cut).count()
}

/// Solves `L·vec(ρ) = 0` with `Tr ρ = 1`.
///
/// The first row of `L` is replaced by the trace functional and the resulting
/// system is solved with a full-pivot LU plus one step of iterative refinement.
pub fn solve_steady<T: Real>(l: &Liouvillian<T>) -> Result<DensityMatrix<T>> {
    let mut a = l.matrix;
    let one = cr(T::one());
    for k in 0..16 {
        a[(0, k)] = cr(T::zero());
    }
    for k in TRACE_ROW {
        a[(0, k)] = one;
    }
    let mut b = Vec16::<T>::zeros();
    b[0] = one;

    let lu = FullPivLU::new(a);
    let u = lu.u();
    let diag: Vec<T> = (0..16).map(|k| cabs(u[(k, k)])).collect();
    let big = diag.iter().fold(T::zero(), |acc, &d| acc.max(d));
    let small = diag.iter().fold(big, |acc, &d| acc.min(d));
    if !(big > T::zero()) || small <= big * T::rank_tolerance() {
        let n = nullity(&l.matrix);
        return Err(if n > 1 {
            Error::DegenerateSteadyState { nullity: n }
        } else {
            Error::SingularSolve {
                detail: format!(
                    "pivot ratio {:e}",
                    small.to_f64_lossy() / big.to_f64_lossy()
                ),
            }
        });
    }

    let mut x = lu.solve(&b).ok_or_else(|| Error::SingularSolve {
        detail: "LU back-substitution failed".into(),
    })?;
    if let Some(dx) = lu.solve(&(b - a * x)) {
        x += dx;
    }

    let raw = unvectorize(&x);
    let residual = max_norm(&unvectorize(&(l.matrix * x)));
    if !(residual <= T::residual_tolerance()) {
        return Err(Error::SingularSolve {
            detail: format!("residual {:e}", residual.to_f64_lossy()),
        });
    }

    let herm = hermiticity_error(&raw);
    if herm > T::residual_tolerance() {
        warn!("steady state non-Hermitian by {:e} before correction", herm.to_f64_lossy());
    }
    let rho = (raw + raw.adjoint()) * cr(T::lit(0.5));
    let tr = rho.trace().re;
    debug!(
        "steady state: residual {:e}, hermiticity {:e}, trace {}",
        residual.to_f64_lossy(),
        herm.to_f64_lossy(),
        tr
    );
    Ok(DensityMatrix::from_raw(rho / cr(tr)))
}

/// Final state of a fixed-step integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution<T: Real> {
    pub rho: DensityMatrix<T>,
    /// `‖ρ(t_max) - ρ(t_max/2)‖_max`; zero for [`propagate`].
    pub metric: T,
    /// Largest `|Tr ρ(t) - 1|` seen along the run.
    pub trace_drift: T,
    pub steps: usize,
    pub t_max: T,
    pub dt: T,
}

/// One RK4 step of the linear system `v' = L v` is `v ← P v` with
/// `P = Σ_{k≤4} (dt L)^k / k!`.
fn rk4_propagator<T: Real>(l: &Mat16<T>, dt: T) -> Mat16<T> {
    let h = l * cr(dt);
    let mut term = Mat16::<T>::identity();
    let mut p = term;
    for k in 1..=4 {
        term = term * h * cr(T::one() / T::lit(k as f64));
        p += term;
    }
    p
}

fn check_step<T: Real>(l: &Liouvillian<T>, t: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::invalid("t_max", format!("must be positive, got {t}")));
    }
    let scale = dt * l.inf_norm();
    if scale > T::lit(RK4_STABILITY_LIMIT) {
        return Err(Error::invalid(
            "dt",
            format!(
                "dt·|L| = {} exceeds the RK4 stability limit {RK4_STABILITY_LIMIT}",
                scale
            ),
        ));
    }
    let steps = (t / dt).ceil().to_f64_lossy() as usize;
    Ok(steps.max(1))
}

fn run<T: Real>(p: &Mat16<T>, v: &mut Vec16<T>, steps: usize, drift: &mut T) {
    for _ in 0..steps {
        *v = p * *v;
        let tr: C<T> = TRACE_ROW.iter().map(|&k| v[k]).sum();
        *drift = drift.max(cabs(tr - cr(T::one())));
    }
}

/// Integrates from `rho0` for time `t` (rounded up to whole steps).
pub fn propagate<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t: T,
    dt: T,
) -> Result<Evolution<T>> {
    let steps = check_step(l, t, dt)?;
    let p = rk4_propagator(&l.matrix, dt);
    let mut v = vectorize(rho0.matrix());
    let mut drift = T::zero();
    run(&p, &mut v, steps, &mut drift);
    Ok(Evolution {
        rho: DensityMatrix::from_raw(unvectorize(&v)),
        metric: T::zero(),
        trace_drift: drift,
        steps,
        t_max: dt * T::lit(steps as f64),
        dt,
    })
}

fn convergence_tolerance<T: Real>() -> T {
    T::lit(1e-8).max(T::default_epsilon() * T::lit(100.0))
}

/// Integrates to `t_max` and checks that the state stopped moving over the
/// second half of the run.
pub fn evolve_to_steady<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t_max: T,
    dt: T,
) -> Result<Evolution<T>> {
    let steps = check_step(l, t_max, dt)?;
    let half = steps.div_ceil(2);
    let p = rk4_propagator(&l.matrix, dt);
    let mut v = vectorize(rho0.matrix());
    let mut drift = T::zero();
    run(&p, &mut v, half, &mut drift);
    let mid: Mat4<T> = unvectorize(&v);
    run(&p, &mut v, half, &mut drift);
    let end = unvectorize(&v);
    let metric = max_norm(&(end - mid));
    if !(metric <= convergence_tolerance::<T>()) {
        return Err(Error::NotConverged {
            metric: metric.to_f64_lossy(),
        });
    }
    Ok(Evolution {
        rho: DensityMatrix::from_raw(end),
        metric,
        trace_drift: drift,
        steps: 2 * half,
        t_max: dt * T::lit((2 * half) as f64),
        dt,
    })
}

/// [`evolve_to_steady`] that doubles `t_max` once if the first run has not
/// converged.
pub fn evolve_with_retry<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t_max: T,
    dt: T,
) -> Result<Evolution<T>> {
    match evolve_to_steady(l, rho0, t_max, dt) {
        Err(Error::NotConverged { metric }) => {
            debug!("not converged at t_max = {t_max} (metric {metric:e}), doubling");
            evolve_to_steady(l, rho0, t_max * T::lit(2.0), dt)
        }
        other => other,
    }
}

/// Step and horizon for the oracle on a given generator.
///
/// The step is the default or smaller if `‖L‖∞` demands it; the horizon is
/// the default or `50/g`, with `g` the slowest nonzero decay rate, whichever
/// is longer. Falls back to the defaults if the spectrum is unavailable.
pub fn oracle_schedule<T: Real>(l: &Liouvillian<T>) -> (T, T) {
    let dt = T::lit(DEFAULT_DT).min(T::lit(0.5) / l.inf_norm().max(T::one()));
    let t_max = match l.spectral_gap() {
        Some(g) if g > T::zero() => T::lit(DEFAULT_T_MAX).max(T::lit(50.0) / g),
        _ => T::lit(DEFAULT_T_MAX),
    };
    (t_max, dt)
}

/// [`evolve_with_retry`] from the ground state with the default step and horizon.
pub fn evolve_default<T: Real>(l: &Liouvillian<T>) -> Result<Evolution<T>> {
    evolve_with_retry(
        l,
        &DensityMatrix::ground(),
        T::lit(DEFAULT_T_MAX),
        T::lit(DEFAULT_DT),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{Couplings, PairParams};
    use crate::geometry::GeometryConfig;
    use crate::master_equation::build_liouvillian;
    use nalgebra::{Matrix2, Matrix4, Vector4};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn far_apart() -> crate::geometry::GeometryDerived<f64> {
        GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 10.0)
            .unwrap()
            .derive()
            .unwrap()
    }

    fn max_diff(a: &Mat4<f64>, b: &Mat4<f64>) -> f64 {
        max_norm(&(a - b))
    }

    /// Single emitter, built term by term on 2×2 matrices (basis {g, e}).
    fn single_atom_steady(delta: f64, drive: C<f64>, gamma: f64) -> Matrix2<C<f64>> {
        let z = cr(0.0);
        let one = cr(1.0);
        let sm = Matrix2::new(z, one, z, z);
        let sp = sm.adjoint();
        let h = sp * sm * cr(delta) - (sm * drive + sp * drive.conj());
        let i = C::new(0.0, 1.0);
        let rhs = |rho: &Matrix2<C<f64>>| {
            -(h * rho - rho * h) * i
                + (sm * rho * sp * cr(2.0) - sp * sm * rho - rho * sp * sm) * cr(gamma)
        };
        let mut a = Matrix4::<C<f64>>::zeros();
        for col in 0..4 {
            let mut e = Matrix2::<C<f64>>::zeros();
            e[(col % 2, col / 2)] = one;
            let out = rhs(&e);
            for row in 0..4 {
                a[(row, col)] = out[(row % 2, row / 2)];
            }
        }
        for col in 0..4 {
            a[(0, col)] = if col == 0 || col == 3 { one } else { z };
        }
        let mut b = Vector4::zeros();
        b[0] = one;
        let x = a.lu().solve(&b).unwrap();
        Matrix2::new(x[0], x[2], x[1], x[3])
    }

    #[test]
    fn drives_off_relaxes_to_ground() {
        let p = PairParams::new(1.3, 2.0, 0.0).with_detuning(0.7);
        let g = GeometryConfig::new(FRAC_PI_2, 1.0, 0.0, 0.0, 0.1)
            .unwrap()
            .derive()
            .unwrap();
        let c = Couplings::compute(&p, &g).unwrap();
        let l = build_liouvillian(&p, &c).unwrap();
        let rho = solve_steady(&l).unwrap();
        assert!(max_diff(rho.matrix(), DensityMatrix::ground().matrix()) < 1e-12);
        assert!(l.residual(rho.matrix()) <= 1e-12);
    }

    #[test]
    fn single_atom_saturation() {
        let p = PairParams::new(1.0, 0.0, 50.0).with_rabi2(0.0);
        let c = Couplings::decoupled(&p, &far_apart()).unwrap();
        let rho = solve_steady(&build_liouvillian(&p, &c).unwrap()).unwrap();
        let pe = rho.excited_population(0);
        assert!((0.49..=0.5).contains(&pe), "{pe}");
        // two-level result for this convention: Ω²/(Δ² + γ² + 2Ω²)
        assert!((pe - 2500.0 / 5001.0).abs() < 1e-12);
        assert!(rho.excited_population(1).abs() < 1e-14);
    }

    #[test]
    fn decoupled_pair_factorizes() {
        let p = PairParams::new(1.4, 3.0, 1.5).with_detuning(-1.2);
        let g = GeometryConfig::new(2.2, 1.3, 0.4, 0.2, 0.3)
            .unwrap()
            .derive()
            .unwrap();
        let c = Couplings::decoupled(&p, &g).unwrap();
        let rho = solve_steady(&build_liouvillian(&p, &c).unwrap()).unwrap();
        let r1 = single_atom_steady(p.detuning1(), c.drive1, p.gamma1);
        let r2 = single_atom_steady(p.detuning2(), c.drive2, p.gamma2);
        let product = r1.kronecker(&r2);
        assert!(max_diff(rho.matrix(), &product) < 1e-8);
    }

    #[test]
    fn exponential_decay_oracle() {
        let p = PairParams::new(1.0, 0.0, 0.0);
        let c = Couplings::decoupled(&p, &far_apart()).unwrap();
        let l = build_liouvillian(&p, &c).unwrap();
        let top = DensityMatrix::basis_state(3);
        let ev = propagate(&l, &top, 0.5, 1e-3).unwrap();
        assert_eq!(ev.steps, 500);
        let pe = ev.rho.excited_population(0);
        assert!((pe - (-1.0f64).exp()).abs() < 1e-6, "{pe}");
        assert!(ev.trace_drift < 1e-9);
    }

    fn close_pair() -> Liouvillian<f64> {
        let p = PairParams::identical(2.0).with_detuning(-3.0);
        let g = GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2, 0.0, 0.08)
            .unwrap()
            .derive()
            .unwrap();
        build_liouvillian(&p, &Couplings::compute(&p, &g).unwrap()).unwrap()
    }

    #[test]
    fn oracle_agrees_with_solve_close_pair() {
        let l = close_pair();
        let exact = solve_steady(&l).unwrap();
        let ev = evolve_default(&l).unwrap();
        assert!(max_diff(exact.matrix(), ev.rho.matrix()) < 1e-6);
        assert!(ev.trace_drift < 1e-9);
        assert!(l.residual(exact.matrix()) <= 1e-10);
    }

    #[test]
    fn oracle_agrees_with_solve_axial_pair() {
        let p = PairParams::new(1.5, 20.0, 2.0).with_detuning(5.0);
        let g = GeometryConfig::new(PI, FRAC_PI_2, 0.0, 0.0, 0.05)
            .unwrap()
            .derive()
            .unwrap();
        let l = build_liouvillian(&p, &Couplings::compute(&p, &g).unwrap()).unwrap();
        let exact = solve_steady(&l).unwrap();
        // the subradiant mode decays at 2(γ - γ12) ≈ 0.04, too slow for the default horizon
        assert!(matches!(
            evolve_default(&l),
            Err(Error::NotConverged { .. })
        ));
        let (t_max, dt) = oracle_schedule(&l);
        assert!(t_max > 1000.0);
        let ev = evolve_with_retry(&l, &DensityMatrix::ground(), t_max, dt).unwrap();
        assert!(max_diff(exact.matrix(), ev.rho.matrix()) < 1e-6);
    }

    #[test]
    fn unstable_step_rejected() {
        let l = close_pair();
        let err = propagate(&l, &DensityMatrix::ground(), 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "dt", .. }));
    }

    #[test]
    fn short_run_reports_not_converged() {
        let l = close_pair();
        let err = evolve_to_steady(&l, &DensityMatrix::ground(), 1.0, 1e-3).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. }));
    }

    #[test]
    fn f32_solve() {
        let p = PairParams::<f32>::identical(1.0);
        let g = GeometryConfig::<f32>::new(1.5707964, 1.5707964, 0.0, 0.0, 0.2)
            .unwrap()
            .derive()
            .unwrap();
        let l = build_liouvillian(&p, &Couplings::compute(&p, &g).unwrap()).unwrap();
        let rho = solve_steady(&l).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-5);
    }
}
