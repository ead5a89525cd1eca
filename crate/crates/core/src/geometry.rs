//! Excitation/detection arrangement of the emitter pair.
//!
//! Cartesian frame: the emitters sit on the Z axis at `±(r12/2)ẑ` (emitter 1
//! at `+z`). The laser wave vector lies in the ZY plane at polar angle `xi`,
//! the common dipole direction has polar angle `theta` and is orthogonal to
//! the wave vector, and the detector direction is given by polar `phi` and
//! azimuth `psi`. Lengths are in units of the resonance wavelength of
//! emitter 1, so `k0 = 2π`.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Optional far-field detector distance, enabling the `(k1 - k2)·r` phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorDistance<T> {
    /// Detector distance in wavelengths.
    pub r_lambda: T,
    /// Mean transition frequency in units of `γ1`; converts `Δω` into `k1 - k2`.
    pub omega0_over_gamma1: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig<T> {
    /// Polar angle of the laser wave vector.
    pub xi: T,
    /// Polar angle of the laser polarization and of the (collinear) dipoles.
    pub theta: T,
    /// Polar angle of the detector direction.
    pub phi: T,
    /// Azimuth of the detector direction.
    pub psi: T,
    /// Emitter separation in wavelengths.
    pub r12_lambda: T,
    pub detector: Option<DetectorDistance<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryDerived<T: Real> {
    /// Laser propagation direction.
    pub n_k: Vector3<T>,
    /// Common dipole direction.
    pub n_d: Vector3<T>,
    /// Detector direction.
    pub n_obs: Vector3<T>,
    /// Azimuth of `n_d`.
    pub dipole_azimuth: T,
    /// Angle between `n_obs` and `n_d`.
    pub beta: T,
    /// `k_L·(r1 - r2)`.
    pub laser_phase_delta: T,
    /// Observation phase `k0 r12 cos(phi)`.
    pub phi_12: T,
    /// `k0 r12`.
    pub k0r12: T,
}

/// `k0` in wavelength units.
pub fn k0<T: Real>() -> T {
    T::two_pi()
}

/// Inclusive range of polarization angles reachable for a given incidence angle.
pub fn admissible_theta_range<T: Real>(xi: T) -> (T, T) {
    let tilt = (T::frac_pi_2() - xi).abs();
    (tilt, T::pi() - tilt)
}

impl<T: Real> GeometryConfig<T> {
    /// Validated constructor; `psi` is reduced into `[0, 2π)`.
    pub fn new(xi: T, theta: T, phi: T, psi: T, r12_lambda: T) -> Result<Self> {
        let cfg = GeometryConfig {
            xi,
            theta,
            phi,
            psi,
            r12_lambda,
            detector: None,
        }
        .normalized();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_detector(mut self, r_lambda: T, omega0_over_gamma1: T) -> Result<Self> {
        if !(r_lambda > T::zero()) {
            return Err(Error::Geometry(format!(
                "detector distance must be positive, got {r_lambda}"
            )));
        }
        if !(omega0_over_gamma1 > T::zero()) {
            return Err(Error::Geometry(format!(
                "omega0/gamma1 must be positive, got {omega0_over_gamma1}"
            )));
        }
        self.detector = Some(DetectorDistance {
            r_lambda,
            omega0_over_gamma1,
        });
        Ok(self)
    }

    /// Same configuration with a different polarization angle (unvalidated).
    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self
    }

    fn normalized(mut self) -> Self {
        let two_pi = T::two_pi();
        let mut psi = self.psi - two_pi * (self.psi / two_pi).floor();
        if psi >= two_pi {
            psi = T::zero();
        }
        self.psi = psi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::angle_tolerance();
        let pi = T::pi();
        let polar = [("xi", self.xi), ("theta", self.theta), ("phi", self.phi)];
        for (name, v) in polar {
            if !v.is_finite() || v < -tol || v > pi + tol {
                return Err(Error::Geometry(format!(
                    "{name} = {v} outside [0, pi]"
                )));
            }
        }
        if !self.psi.is_finite() {
            return Err(Error::Geometry("psi is not finite".into()));
        }
        if !(self.r12_lambda > T::zero()) || !self.r12_lambda.is_finite() {
            return Err(Error::Geometry(format!(
                "r12_lambda must be positive, got {}",
                self.r12_lambda
            )));
        }
        let (lo, hi) = admissible_theta_range(self.xi);
        if self.theta < lo - tol || self.theta > hi + tol {
            return Err(Error::Geometry(format!(
                "theta = {} outside admissible range [{lo}, {hi}] for xi = {}",
                self.theta, self.xi
            )));
        }
        if self.xi.sin().abs() <= tol && (self.theta - T::frac_pi_2()).abs() > tol {
            return Err(Error::Geometry(format!(
                "incidence along the pair axis requires theta = pi/2, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<GeometryDerived<T>> {
        derive_geometry(self)
    }
}

/// Unit vectors, observation angle and phases for a configuration.
pub fn derive_geometry<T: Real>(cfg: &GeometryConfig<T>) -> Result<GeometryDerived<T>> {
    let cfg = cfg.normalized();
    cfg.validate()?;
    let tol = T::angle_tolerance();
    let (sx, cx) = (cfg.xi.sin(), cfg.xi.cos());
    let (st, ct) = (cfg.theta.sin(), cfg.theta.cos());

    let n_k = Vector3::new(T::zero(), sx, cx);

    // n_d·n_k = sinθ sinφd sinξ + cosθ cosξ = 0, taking cos φd ≥ 0.
    let dipole_azimuth = if sx.abs() <= tol || st.abs() <= tol {
        T::zero()
    } else {
        let s = -(ct * cx) / (st * sx);
        s.clamp(-T::one(), T::one()).asin()
    };
    let n_d = Vector3::new(
        st * dipole_azimuth.cos(),
        st * dipole_azimuth.sin(),
        ct,
    );

    let (sp, cp) = (cfg.phi.sin(), cfg.phi.cos());
    let n_obs = Vector3::new(sp * cfg.psi.cos(), sp * cfg.psi.sin(), cp);

    let beta = n_obs.dot(&n_d).clamp(-T::one(), T::one()).acos();
    let k0r12 = k0::<T>() * cfg.r12_lambda;

    Ok(GeometryDerived {
        n_k,
        n_d,
        n_obs,
        dipole_azimuth,
        beta,
        laser_phase_delta: k0r12 * cx,
        phi_12: k0r12 * cp,
        k0r12,
    })
}

/// `sin²β`; zero means the dipoles do not radiate towards the detector.
pub fn sin2_beta<T: Real>(g: &GeometryDerived<T>) -> T {
    // 1 - (n_obs·n_d)² avoids the acos/sin round trip.
    let c = g.n_obs.dot(&g.n_d).clamp(-T::one(), T::one());
    (T::one() - c * c).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: Vector3<f64>, b: [f64; 3]) -> bool {
        (a - Vector3::from(b)).amax() < 1e-12
    }

    #[test]
    fn orthogonal_axes() {
        let g = GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 0.08)
            .unwrap()
            .derive()
            .unwrap();
        assert!(close(g.n_k, [0.0, 1.0, 0.0]));
        assert!(close(g.n_d, [1.0, 0.0, 0.0]));
        assert!(close(g.n_obs, [0.0, 0.0, 1.0]));
        assert!((g.beta - FRAC_PI_2).abs() < 1e-12);
        assert!(g.laser_phase_delta.abs() < 1e-12);
        assert!((g.phi_12 - 2.0 * PI * 0.08).abs() < 1e-12);
    }

    #[test]
    fn incidence_along_pair_axis() {
        let g = GeometryConfig::new(PI, FRAC_PI_2, 0.0, 0.0, 0.08)
            .unwrap()
            .derive()
            .unwrap();
        assert!(close(g.n_k, [0.0, 0.0, -1.0]));
        assert!(close(g.n_d, [1.0, 0.0, 0.0]));
        assert!((g.beta - FRAC_PI_2).abs() < 1e-12);
        assert!((g.laser_phase_delta + 2.0 * PI * 0.08).abs() < 1e-12);
    }

    #[test]
    fn dipole_along_detector() {
        let g = GeometryConfig::new(FRAC_PI_2, FRAC_PI_4, FRAC_PI_4, 0.0, 0.1)
            .unwrap()
            .derive()
            .unwrap();
        let h = 0.5f64.sqrt();
        assert!(close(g.n_d, [h, 0.0, h]));
        assert!(close(g.n_obs, [h, 0.0, h]));
        // independent check of the two defining relations
        let nk = [0.0, 1.0, 0.0];
        let dot_k: f64 = (0..3).map(|i| g.n_d[i] * nk[i]).sum();
        assert!(dot_k.abs() < 1e-12);
        let dot_o: f64 = (0..3).map(|i| g.n_d[i] * g.n_obs[i]).sum();
        assert!((g.beta - dot_o.clamp(-1.0, 1.0).acos()).abs() < 1e-12);
        assert!(g.beta.abs() < 1e-6);
        assert!(sin2_beta(&g) < 1e-24);
    }

    #[test]
    fn sin2_beta_values() {
        let at = |phi: f64| {
            // dipoles along x, detector in the XZ plane at polar angle phi
            GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, phi, 0.0, 0.1)
                .unwrap()
                .derive()
                .unwrap()
        };
        assert!((sin2_beta(&at(0.0)) - 1.0).abs() < 1e-12);
        assert!(sin2_beta(&at(FRAC_PI_2)).abs() < 1e-12);
        // beta = pi/6 when the detector is 30 degrees off the x axis
        let g = at(FRAC_PI_2 - PI / 6.0);
        assert!((g.beta - PI / 6.0).abs() < 1e-12);
        assert!((sin2_beta(&g) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_theta_rejected() {
        // xi = pi/4 admits theta in [pi/4, 3pi/4]
        let err = GeometryConfig::new(FRAC_PI_4, 0.1, 0.0, 0.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::Geometry(_)));
        assert!(GeometryConfig::new(FRAC_PI_4, 3.0 * FRAC_PI_4, 0.0, 0.0, 0.1).is_ok());
    }

    #[test]
    fn axial_incidence_requires_perpendicular_polarization() {
        assert!(GeometryConfig::new(0.0, 1.2, 0.0, 0.0, 0.1).is_err());
        let g = GeometryConfig::new(0.0, FRAC_PI_2, 0.0, 0.0, 0.1)
            .unwrap()
            .derive()
            .unwrap();
        assert_eq!(g.dipole_azimuth, 0.0);
    }

    #[test]
    fn bad_separation_rejected() {
        assert!(GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 0.0).is_err());
        assert!(GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn f32_geometry() {
        let g = GeometryConfig::<f32>::new(
            std::f32::consts::FRAC_PI_2,
            1.0,
            0.3,
            0.2,
            0.08,
        )
        .unwrap()
        .derive()
        .unwrap();
        assert!(g.n_d.dot(&g.n_k).abs() < 1e-6);
    }
}
