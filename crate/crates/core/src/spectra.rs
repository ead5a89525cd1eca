//! Direction-resolved emission intensity, PLE and polarization scans, and
//! peak extraction.

use rayon::prelude::*;

use crate::couplings::{Couplings, PairParams};
use crate::error::{Error, Result};
use crate::geometry::{k0, sin2_beta, GeometryConfig, GeometryDerived};
use crate::master_equation::{collective, to_collective, DensityMatrix, LiouvillianParts, Mat4};
use crate::scalar::{cis, Real};
use crate::steady_state::solve_steady;

/// Extrema lower than this fraction of the global maximum are dropped.
pub const PEAK_THRESHOLD: f64 = 1e-6;
/// Trail peaks must sit at least this far (in `γ1`) from `Δ = 0`.
pub const TRAIL_EXCLUSION: f64 = 0.5;

/// Scalar intensity tensor components and the interference phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityFactors<T> {
    pub i11: T,
    pub i22: T,
    pub i12: T,
    /// `φ12 + (k1 - k2)·r`.
    pub alpha: T,
}

impl<T: Real> IntensityFactors<T> {
    /// Same factors with the interference term removed.
    pub fn without_interference(mut self) -> Self {
        self.i12 = T::zero();
        self
    }
}

/// `I11 = sin²β`, `I22 = μ² sin²β`, `I12 = μ sin²β`.
pub fn intensity_factors<T: Real>(
    params: &PairParams<T>,
    cfg: &GeometryConfig<T>,
    g: &GeometryDerived<T>,
) -> IntensityFactors<T> {
    let s2 = sin2_beta(g);
    let mu = params.mu;
    let detector_phase = cfg.detector.map_or(T::zero(), |d| {
        // k1 - k2 = k0 (ω1 - ω2)/ω0 with ω1 - ω2 = 2Δω
        k0::<T>() * d.r_lambda * T::lit(2.0) * params.delta_omega / d.omega0_over_gamma1
    });
    IntensityFactors {
        i11: s2,
        i22: mu * mu * s2,
        i12: mu * s2,
        alpha: g.phi_12 + detector_phase,
    }
}

/// Total intensity from a collective-basis density matrix.
pub fn total_intensity<T: Real>(rho_c: &Mat4<T>, f: &IntensityFactors<T>) -> T {
    use collective::{A, S, U};
    let two = T::lit(2.0);
    let pop = two * rho_c[(U, U)].re + rho_c[(S, S)].re + rho_c[(A, A)].re;
    let sa = rho_c[(S, A)];
    (f.i11 + f.i22) / two * pop - two * f.i12 * f.alpha.sin() * sa.im
        + f.i12 * f.alpha.cos() * (rho_c[(S, S)].re - rho_c[(A, A)].re)
        + (f.i11 - f.i22) * sa.re
}

/// `Re Σij ⟨σi⁺σj⁻⟩ Iij e^{iφij}` evaluated in the product basis.
pub fn product_basis_intensity<T: Real>(rho: &DensityMatrix<T>, f: &IntensityFactors<T>) -> T {
    let i = [[f.i11, f.i12], [f.i12, f.i22]];
    let phase = [[T::zero(), f.alpha], [-f.alpha, T::zero()]];
    let mut acc = T::zero();
    for a in 0..2 {
        for b in 0..2 {
            acc += (rho.correlation(a, b) * cis(phase[a][b])).re * i[a][b];
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeakKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub position: T,
    pub height: T,
    pub kind: PeakKind,
    /// Height above (maxima) or depth below (minima) the higher of the two
    /// surrounding saddles, measured on the raw samples.
    pub prominence: T,
}

fn parabola_vertex<T: Real>(x: [T; 3], y: [T; 3]) -> Option<(T, T)> {
    // Newton divided differences
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a == T::zero() || !a.is_finite() {
        return None;
    }
    let b = d1 - a * (x[0] + x[1]);
    let xv = (-b / (T::lit(2.0) * a)).clamp(x[0], x[2]);
    let yv = y[0] + (xv - x[0]) * (d1 + a * (xv - x[1]));
    Some((xv, yv))
}

fn prominence<T: Real>(y: &[T], i: usize) -> T {
    let h = y[i];
    let mut left = h;
    for &v in y[..i].iter().rev() {
        if v > h {
            break;
        }
        left = left.min(v);
    }
    let mut right = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right = right.min(v);
    }
    h - left.max(right)
}

/// Local extrema by 3-point comparison, refined by a parabola through the
/// bracketing samples. Extrema lower than `rel_threshold × max(y)` are dropped.
pub fn find_peaks_with<T: Real>(x: &[T], y: &[T], rel_threshold: T) -> Vec<Peak<T>> {
    assert_eq!(x.len(), y.len(), "grid and values differ in length");
    if y.len() < 3 {
        return Vec::new();
    }
    let top = y.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
    let floor = top * rel_threshold;
    let neg: Vec<T> = y.iter().map(|&v| -v).collect();
    let mut peaks = Vec::new();
    for i in 1..y.len() - 1 {
        let (l, c, r) = (y[i - 1], y[i], y[i + 1]);
        let kind = if c > l && c >= r {
            PeakKind::Maximum
        } else if c < l && c <= r {
            PeakKind::Minimum
        } else {
            continue;
        };
        let xs = [x[i - 1], x[i], x[i + 1]];
        let (position, height) = parabola_vertex(xs, [l, c, r]).unwrap_or((x[i], c));
        if height.abs() < floor {
            continue;
        }
        let prominence = match kind {
            PeakKind::Maximum => prominence(y, i),
            PeakKind::Minimum => prominence(&neg, i),
        };
        peaks.push(Peak {
            position,
            height,
            kind,
            prominence,
        });
    }
    peaks
}

/// [`find_peaks_with`] at the default threshold.
pub fn find_peaks<T: Real>(x: &[T], y: &[T]) -> Vec<Peak<T>> {
    find_peaks_with(x, y, T::lit(PEAK_THRESHOLD))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PleSpectrum<T> {
    pub detuning_grid: Vec<T>,
    pub intensity: Vec<T>,
    pub peaks: Vec<Peak<T>>,
}

impl<T: Real> PleSpectrum<T> {
    pub fn maxima(&self) -> impl Iterator<Item = &Peak<T>> {
        self.peaks.iter().filter(|p| p.kind == PeakKind::Maximum)
    }

    pub fn minima(&self) -> impl Iterator<Item = &Peak<T>> {
        self.peaks.iter().filter(|p| p.kind == PeakKind::Minimum)
    }

    pub fn max_intensity(&self) -> T {
        self.intensity.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Maxima whose prominence is at least `rel × max intensity`.
    pub fn distinct_maxima(&self, rel: T) -> Vec<Peak<T>> {
        let cut = rel * self.max_intensity();
        self.maxima().filter(|p| p.prominence >= cut).copied().collect()
    }

    /// Extremum of either kind closest to `position`.
    pub fn nearest(&self, position: T) -> Option<&Peak<T>> {
        self.peaks.iter().min_by(|a, b| {
            let da = (a.position - position).abs();
            let db = (b.position - position).abs();
            da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// Signed position of the brightest maximum outside `|Δ| ≤ exclusion`.
    pub fn side_peak(&self, exclusion: T) -> Option<T> {
        self.maxima()
            .filter(|p| p.position.abs() > exclusion)
            .max_by(|a, b| {
                a.height
                    .partial_cmp(&b.height)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|p| p.position)
    }
}

fn check_grid<T: Real>(name: &'static str, grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "grid must be strictly increasing"));
    }
    Ok(())
}

/// Everything that does not depend on the detuning.
struct ScanPoint<T: Real> {
    parts: LiouvillianParts<T>,
    factors: IntensityFactors<T>,
}

impl<T: Real> ScanPoint<T> {
    fn new(base: &PairParams<T>, cfg: &GeometryConfig<T>) -> Result<Self> {
        let g = cfg.derive()?;
        let coup = Couplings::compute(base, &g)?;
        Ok(ScanPoint {
            parts: LiouvillianParts::new(base, &coup)?,
            factors: intensity_factors(base, cfg, &g),
        })
    }

    fn intensity(&self, detuning: T) -> Result<T> {
        let rho = solve_steady(&self.parts.at(detuning)).map_err(|e| Error::AtDetuning {
            detuning: detuning.to_f64_lossy(),
            source: Box::new(e),
        })?;
        Ok(total_intensity(&to_collective(&rho), &self.factors))
    }

    fn spectrum(&self, grid: &[T]) -> Result<PleSpectrum<T>> {
        let intensity = grid
            .par_iter()
            .map(|&d| self.intensity(d))
            .collect::<Result<Vec<T>>>()?;
        let peaks = find_peaks(grid, &intensity);
        Ok(PleSpectrum {
            detuning_grid: grid.to_vec(),
            intensity,
            peaks,
        })
    }
}

/// Steady-state intensity along a detuning grid.
pub fn ple_scan<T: Real>(
    base: &PairParams<T>,
    geom: &GeometryConfig<T>,
    grid: &[T],
) -> Result<PleSpectrum<T>> {
    check_grid("detuning_grid", grid)?;
    ScanPoint::new(base, geom)?.spectrum(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationScan<T> {
    pub theta_grid: Vec<T>,
    pub detuning_grid: Vec<T>,
    /// One spectrum per polarization angle.
    pub spectra: Vec<PleSpectrum<T>>,
    /// Signed position of the brightest side peak per angle.
    pub trail: Vec<Option<T>>,
}

impl<T: Real> PolarizationScan<T> {
    /// `I(θ, Δ)` indexed `[theta][detuning]`.
    pub fn surface(&self) -> Vec<&[T]> {
        self.spectra.iter().map(|s| s.intensity.as_slice()).collect()
    }
}

/// PLE spectra over a grid of polarization angles.
pub fn polarization_scan<T: Real>(
    base: &PairParams<T>,
    geom: &GeometryConfig<T>,
    theta_grid: &[T],
    detuning_grid: &[T],
) -> Result<PolarizationScan<T>> {
    check_grid("theta_grid", theta_grid)?;
    check_grid("detuning_grid", detuning_grid)?;
    let spectra = theta_grid
        .par_iter()
        .map(|&theta| {
            ScanPoint::new(base, &geom.with_theta(theta))
                .and_then(|p| p.spectrum(detuning_grid))
                .map_err(|e| Error::AtTheta {
                    theta: theta.to_f64_lossy(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let exclusion = T::lit(TRAIL_EXCLUSION);
    let trail = spectra.iter().map(|s| s.side_peak(exclusion)).collect();
    Ok(PolarizationScan {
        theta_grid: theta_grid.to_vec(),
        detuning_grid: detuning_grid.to_vec(),
        spectra,
        trail,
    })
}
