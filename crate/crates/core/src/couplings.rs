//! Single-emitter rates, collective damping `γ12` and dipole-dipole shift `Ω12`.
//!
//! All rates are in units of `γ1`; `x = k0 r12` is the dimensionless separation.
//! The closed forms assume collinear dipoles at angle `theta` to the pair axis
//! and the mean wavenumber `k0` for both emitters. The free-space Green's tensor
//! is provided as an independent route to the same numbers.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{k0, GeometryDerived};
use crate::scalar::{c, cis, cr, Real, C};

/// Physical parameters of the emitter pair and the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairParams<T> {
    /// Radiative rate of emitter 1 (the rate unit, normally 1).
    pub gamma1: T,
    /// Dipole moment ratio `d2/d1`.
    pub mu: T,
    /// Radiative rate of emitter 2.
    pub gamma2: T,
    /// Half the transition-frequency difference, `(ω1 - ω2)/2`.
    pub delta_omega: T,
    /// Drive amplitude on emitter 1.
    pub rabi1: T,
    /// Drive amplitude on emitter 2.
    pub rabi2: T,
    /// Laser detuning from the mean transition frequency, `ω0 - ωL`.
    pub detuning: T,
}

impl<T: Real> PairParams<T> {
    /// `γ1 = 1`, `γ2 = μ²`, `Ω2 = μ·Ω1`, zero detuning.
    pub fn new(mu: T, delta_omega: T, rabi1: T) -> Self {
        PairParams {
            gamma1: T::one(),
            mu,
            gamma2: mu * mu,
            delta_omega,
            rabi1,
            rabi2: mu * rabi1,
            detuning: T::zero(),
        }
    }

    pub fn identical(rabi: T) -> Self {
        Self::new(T::one(), T::zero(), rabi)
    }

    pub fn with_detuning(mut self, detuning: T) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_gamma2(mut self, gamma2: T) -> Self {
        self.gamma2 = gamma2;
        self
    }

    pub fn with_rabi2(mut self, rabi2: T) -> Self {
        self.rabi2 = rabi2;
        self
    }

    /// `Δ1 = Δ + Δω`.
    pub fn detuning1(&self) -> T {
        self.detuning + self.delta_omega
    }

    /// `Δ2 = Δ - Δω`.
    pub fn detuning2(&self) -> T {
        self.detuning - self.delta_omega
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("mu", self.mu),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        let finite = [
            ("delta_omega", self.delta_omega),
            ("rabi1", self.rabi1),
            ("rabi2", self.rabi2),
            ("detuning", self.detuning),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// Collective rates and complex drive amplitudes for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings<T> {
    pub gamma1: T,
    pub gamma2: T,
    /// Collective damping rate `γ12 = γ21`.
    pub gamma12: T,
    /// Dipole-dipole interaction parameter `Ω12 = Ω21`.
    pub omega12: T,
    /// `Ω1 e^{-i k_L·r1}`.
    pub drive1: C<T>,
    /// `Ω2 e^{-i k_L·r2}`.
    pub drive2: C<T>,
}

impl<T: Real> Couplings<T> {
    pub fn compute(params: &PairParams<T>, g: &GeometryDerived<T>) -> Result<Self> {
        params.validate()?;
        let theta = g.n_d.z.clamp(-T::one(), T::one()).acos();
        let (drive1, drive2) = drive_amplitudes(params, g);
        Ok(Couplings {
            gamma1: params.gamma1,
            gamma2: params.gamma2,
            gamma12: gamma_12(params, g.k0r12, theta)?,
            omega12: omega_12(params, g.k0r12, theta)?,
            drive1,
            drive2,
        })
    }

    /// Couplings of two independent emitters (`γ12 = Ω12 = 0`).
    pub fn decoupled(params: &PairParams<T>, g: &GeometryDerived<T>) -> Result<Self> {
        params.validate()?;
        let (drive1, drive2) = drive_amplitudes(params, g);
        Ok(Couplings {
            gamma1: params.gamma1,
            gamma2: params.gamma2,
            gamma12: T::zero(),
            omega12: T::zero(),
            drive1,
            drive2,
        })
    }

    /// Rate matrix `[[γ1, γ12], [γ12, γ2]]`.
    pub fn rate(&self, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.gamma1,
            (1, 1) => self.gamma2,
            _ => self.gamma12,
        }
    }

    pub fn drive(&self, i: usize) -> C<T> {
        if i == 0 {
            self.drive1
        } else {
            self.drive2
        }
    }
}

/// Below this separation the closed forms lose digits to cancellation and a
/// series is used instead.
const SERIES_BELOW: f64 = 1e-4;

fn check_separation<T: Real>(x: T) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("k0*r12 must be positive, got {x}")));
    }
    Ok(())
}

fn prefactor<T: Real>(params: &PairParams<T>) -> T {
    T::lit(1.5) * (params.gamma1 * params.gamma2).sqrt()
}

/// Collective damping rate `γ12(x, θ)`.
pub fn gamma_12<T: Real>(params: &PairParams<T>, x: T, theta: T) -> Result<T> {
    check_separation(x)?;
    let c2 = theta.cos().powi(2);
    let one = T::one();
    let three = T::lit(3.0);
    let bracket = if x < T::lit(SERIES_BELOW) {
        let x2 = x * x;
        T::lit(2.0 / 3.0) - (T::lit(2.0) - c2) * x2 / T::lit(15.0)
            + (three - T::lit(2.0) * c2) * x2 * x2 / T::lit(420.0)
    } else {
        // cos x (1 - 3c)/x + sin x (3c - 1)/x² regrouped as (3c - 1)(sin x - x cos x)/x²
        ((three * c2 - one) * sin_minus_x_cos(x) / (x * x) + (one - c2) * x.sin()) / x
    };
    Ok(prefactor(params) * bracket)
}

/// `sin x - x cos x` without the cancellation near `x = 0`.
fn sin_minus_x_cos<T: Real>(x: T) -> T {
    if x > T::one() {
        return x.sin() - x * x.cos();
    }
    // Σ_{k≥1} (-1)^{k+1} 2k x^{2k+1} / (2k+1)!
    let x2 = x * x;
    let mut power = x * x2; // x^{2k+1}
    let mut fact = T::lit(6.0); // (2k+1)!
    let mut sum = T::zero();
    for k in 1..40 {
        let kk = T::lit(k as f64);
        let term = T::lit(2.0) * kk * power / fact;
        sum += if k % 2 == 1 { term } else { -term };
        if term <= sum.abs() * T::default_epsilon() {
            break;
        }
        power *= x2;
        fact *= (T::lit(2.0) * kk + T::lit(2.0)) * (T::lit(2.0) * kk + T::lit(3.0));
    }
    sum
}

/// Dipole-dipole interaction parameter `Ω12(x, θ)`.
pub fn omega_12<T: Real>(params: &PairParams<T>, x: T, theta: T) -> Result<T> {
    check_separation(x)?;
    let c2 = theta.cos().powi(2);
    let one = T::one();
    let three = T::lit(3.0);
    let bracket = if x < T::lit(SERIES_BELOW) {
        let x2 = x * x;
        (three * c2 - one) / (x2 * x) + (one + c2) / (T::lit(2.0) * x)
            - (three - c2) * x / T::lit(8.0)
            + (T::lit(5.0) - three * c2) * x2 * x / T::lit(144.0)
    } else {
        (x.sin() * (three * c2 - one) / x
            + x.cos() * (one - c2 + (three * c2 - one) / (x * x)))
            / x
    };
    Ok(prefactor(params) * bracket)
}

/// Free-space dyadic Green's tensor `k² e^{ikr}/r (P(ikr) I + Q(ikr) n⊗n)`.
///
/// `r_vec` is in wavelengths and `k` in inverse wavelengths.
pub fn green_tensor<T: Real>(r_vec: &Vector3<T>, k: T) -> Result<Matrix3<C<T>>> {
    let r = r_vec.norm();
    if !(r > T::zero()) {
        return Err(Error::Domain("Green's tensor is singular at r = 0".into()));
    }
    let n = r_vec / r;
    let z = c(T::zero(), k * r);
    let one = cr(T::one());
    let three = cr(T::lit(3.0));
    let p = one - one / z + one / (z * z);
    let q = -one + three / z - three / (z * z);
    let pref = cis(k * r) * cr(k * k / r);
    let mut g = Matrix3::from_element(cr(T::zero()));
    for i in 0..3 {
        for j in 0..3 {
            let nn = cr(n[i] * n[j]);
            let id = if i == j { p } else { cr(T::zero()) };
            g[(i, j)] = pref * (id + q * nn);
        }
    }
    Ok(g)
}

/// `D12 = d1·G(r1 - r2)·d2 / ħ` in rate units; `Im D12 = γ12`, `Re D12 = Ω12`.
///
/// The dipole product `d1 d2/ħ` equals `(3/2)√(γ1γ2)/k0³` because
/// `γi = 2 dᵢ² k0³ / (3ħ)`.
pub fn green_contraction<T: Real>(
    params: &PairParams<T>,
    r_vec: &Vector3<T>,
    n_d: &Vector3<T>,
) -> Result<C<T>> {
    let k = k0::<T>();
    let g = green_tensor(r_vec, k)?;
    let mut acc = cr(T::zero());
    for i in 0..3 {
        for j in 0..3 {
            acc += g[(i, j)] * cr(n_d[i] * n_d[j]);
        }
    }
    Ok(acc * cr(prefactor(params) / (k * k * k)))
}

/// Position-dependent drive amplitudes `Ωᵢ e^{-i k_L·rᵢ}` with `r1,2 = ±(r12/2)ẑ`.
pub fn drive_amplitudes<T: Real>(params: &PairParams<T>, g: &GeometryDerived<T>) -> (C<T>, C<T>) {
    let half = g.laser_phase_delta / T::lit(2.0);
    (
        cis(-half) * cr(params.rabi1),
        cis(half) * cr(params.rabi2),
    )
}
