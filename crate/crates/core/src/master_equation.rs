//! Two-emitter operators, the cooperative master-equation generator and the
//! collective (Dicke) basis.
//!
//! Product basis ordering is `{|g1g2⟩, |g1e2⟩, |e1g2⟩, |e1e2⟩}`, i.e. index
//! `2·e1 + e2`. Density matrices are vectorized column-major, so
//! `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{Schur, SMatrix, SVector, SymmetricEigen};

use crate::couplings::{Couplings, PairParams};
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

pub type Mat4<T> = SMatrix<C<T>, 4, 4>;
pub type Mat16<T> = SMatrix<C<T>, 16, 16>;
pub type Vec16<T> = SVector<C<T>, 16>;

/// Collective-basis indices.
pub mod collective {
    pub const G: usize = 0;
    pub const S: usize = 1;
    pub const A: usize = 2;
    pub const U: usize = 3;
}

/// `σᵢ⁻` for emitter `i ∈ {0, 1}`.
pub fn lowering<T: Real>(i: usize) -> Mat4<T> {
    assert!(i < 2, "emitter index out of range");
    let mut m = Mat4::<T>::zeros();
    for other in 0..2 {
        let (excited, ground) = if i == 0 {
            (2 + other, other)
        } else {
            (2 * other + 1, 2 * other)
        };
        m[(ground, excited)] = cr(T::one());
    }
    m
}

/// `σᵢ⁺`.
pub fn raising<T: Real>(i: usize) -> Mat4<T> {
    lowering::<T>(i).transpose()
}

/// `σᵢ⁺σᵢ⁻`.
pub fn excitation<T: Real>(i: usize) -> Mat4<T> {
    raising::<T>(i) * lowering::<T>(i)
}

pub fn vectorize<T: Real>(m: &Mat4<T>) -> Vec16<T> {
    Vec16::from_column_slice(m.as_slice())
}

pub fn unvectorize<T: Real>(v: &Vec16<T>) -> Mat4<T> {
    Mat4::from_column_slice(v.as_slice())
}

fn left<T: Real>(a: &Mat4<T>) -> Mat16<T> {
    Mat4::<T>::identity().kronecker(a)
}

fn right<T: Real>(b: &Mat4<T>) -> Mat16<T> {
    b.transpose().kronecker(&Mat4::<T>::identity())
}

fn sandwich<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat16<T> {
    b.transpose().kronecker(a)
}

fn commutator_super<T: Real>(h: &Mat4<T>) -> Mat16<T> {
    left(h) - right(h)
}

fn max_abs<T: Real, const R: usize, const K: usize>(m: &SMatrix<C<T>, R, K>) -> T {
    m.iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Max-norm of a 4×4 complex matrix (largest real or imaginary part).
pub fn max_norm<T: Real>(m: &Mat4<T>) -> T {
    max_abs(m)
}

/// Largest deviation from Hermiticity.
pub fn hermiticity_error<T: Real>(m: &Mat4<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

/// 4×4 density matrix over the product basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T: Real> {
    rho: Mat4<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks Hermiticity and unit trace (eigenvalues are not checked here).
    pub fn new(rho: Mat4<T>) -> Result<Self> {
        let tol = T::trace_tolerance();
        if hermiticity_error(&rho) > tol {
            return Err(Error::invalid("rho", "not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::invalid("rho", format!("trace {} != 1", tr.re)));
        }
        Ok(DensityMatrix { rho })
    }

    pub(crate) fn from_raw(rho: Mat4<T>) -> Self {
        DensityMatrix { rho }
    }

    /// `|k⟩⟨k|` for a product-basis index `k`.
    pub fn basis_state(k: usize) -> Self {
        let mut rho = Mat4::zeros();
        rho[(k, k)] = cr(T::one());
        DensityMatrix { rho }
    }

    /// `|g1g2⟩⟨g1g2|`.
    pub fn ground() -> Self {
        Self::basis_state(0)
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.rho
    }

    pub fn into_matrix(self) -> Mat4<T> {
        self.rho
    }

    pub fn trace(&self) -> C<T> {
        self.rho.trace()
    }

    /// `⟨σᵢ⁺σⱼ⁻⟩ = Tr(σᵢ⁺σⱼ⁻ ρ)`.
    pub fn correlation(&self, i: usize, j: usize) -> C<T> {
        (raising::<T>(i) * lowering::<T>(j) * self.rho).trace()
    }

    /// Excited-state population of emitter `i`.
    pub fn excited_population(&self, i: usize) -> T {
        self.correlation(i, i).re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [T; 4] {
        let h = (self.rho + self.rho.adjoint()) * cr(T::lit(0.5));
        let eig = SymmetricEigen::new(h);
        let mut vals = [T::zero(); 4];
        for (slot, v) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    pub fn collective(&self) -> Mat4<T> {
        to_collective(self)
    }
}

/// Unitary taking product-basis components to `{|G⟩, |S⟩, |A⟩, |U⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveBasis<T: Real> {
    pub u: Mat4<T>,
}

impl<T: Real> Default for CollectiveBasis<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CollectiveBasis<T> {
    pub fn new() -> Self {
        let h = cr(T::one() / T::lit(2.0).sqrt());
        let o = cr(T::zero());
        let l = cr(T::one());
        // rows: ⟨G|, ⟨S|, ⟨A|, ⟨U| in the product basis
        #[rustfmt::skip]
        let u = Mat4::new(
            l, o,  o, o,
            o, h,  h, o,
            o, -h, h, o,
            o, o,  o, l,
        );
        CollectiveBasis { u }
    }

    pub fn transform(&self, rho: &Mat4<T>) -> Mat4<T> {
        self.u * rho * self.u.adjoint()
    }
}

/// `U ρ U†`: the density matrix in the collective basis.
pub fn to_collective<T: Real>(rho: &DensityMatrix<T>) -> Mat4<T> {
    CollectiveBasis::new().transform(rho.matrix())
}

/// Generator of the cooperative master equation acting on `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian<T: Real> {
    pub matrix: Mat16<T>,
    pub params: PairParams<T>,
    pub couplings: Couplings<T>,
}

/// Detuning-independent part of the generator plus the generator of the
/// common detuning, so detuning scans reuse one build.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianParts<T: Real> {
    base: Mat16<T>,
    detuning_generator: Mat16<T>,
    params: PairParams<T>,
    couplings: Couplings<T>,
}

impl<T: Real> LiouvillianParts<T> {
    pub fn new(params: &PairParams<T>, coup: &Couplings<T>) -> Result<Self> {
        params.validate()?;
        let minus_i = C::new(T::zero(), -T::one());
        let n_total = excitation::<T>(0) + excitation::<T>(1);
        let detuning_generator = commutator_super(&n_total) * minus_i;
        let base_params = params.with_detuning(T::zero());
        Ok(LiouvillianParts {
            base: generator(&base_params, coup),
            detuning_generator,
            params: *params,
            couplings: *coup,
        })
    }

    pub fn at(&self, detuning: T) -> Liouvillian<T> {
        Liouvillian {
            matrix: self.base + self.detuning_generator * cr(detuning),
            params: self.params.with_detuning(detuning),
            couplings: self.couplings,
        }
    }
}

fn generator<T: Real>(params: &PairParams<T>, coup: &Couplings<T>) -> Mat16<T> {
    let minus_i = C::new(T::zero(), -T::one());
    let sm = [lowering::<T>(0), lowering::<T>(1)];
    let sp = [raising::<T>(0), raising::<T>(1)];
    let detunings = [params.detuning1(), params.detuning2()];

    // H = Σ Δᵢ σᵢ⁺σᵢ⁻ - Σ (Ωᵢ(rᵢ) σᵢ⁻ + h.c.) + Ω12 (σ1⁺σ2⁻ + σ2⁺σ1⁻).
    // The exchange term puts |S⟩ at +Ω12 and |A⟩ at -Ω12 relative to the
    // bare single-excitation level, so |S⟩ is excited at Δ = -Ω12.
    let mut h = Mat4::<T>::zeros();
    for i in 0..2 {
        h += sp[i] * sm[i] * cr(detunings[i]);
        let d = coup.drive(i);
        h -= sm[i] * d + sp[i] * d.conj();
    }
    h += (sp[0] * sm[1] + sp[1] * sm[0]) * cr(coup.omega12);

    let mut l = commutator_super(&h) * minus_i;

    // -Σ γij ([σi⁺, σj⁻ρ] + [ρσi⁺, σj⁻]) = Σ γij (2σj⁻ρσi⁺ - σi⁺σj⁻ρ - ρσi⁺σj⁻)
    let two = cr(T::lit(2.0));
    for i in 0..2 {
        for j in 0..2 {
            let g = coup.rate(i, j);
            if g == T::zero() {
                continue;
            }
            let pm = sp[i] * sm[j];
            let term = sandwich(&sm[j], &sp[i]) * two - left(&pm) - right(&pm);
            l += term * cr(g);
        }
    }
    l
}

/// Builds the 16×16 generator for one parameter point.
pub fn build_liouvillian<T: Real>(
    params: &PairParams<T>,
    coup: &Couplings<T>,
) -> Result<Liouvillian<T>> {
    params.validate()?;
    Ok(Liouvillian {
        matrix: generator(params, coup),
        params: *params,
        couplings: *coup,
    })
}

/// `dρ/dt = unvec(L·vec(ρ))`.
pub fn apply_liouvillian<T: Real>(l: &Liouvillian<T>, rho: &Mat4<T>) -> Mat4<T> {
    unvectorize(&(l.matrix * vectorize(rho)))
}

impl<T: Real> Liouvillian<T> {
    pub fn apply(&self, rho: &Mat4<T>) -> Mat4<T> {
        apply_liouvillian(self, rho)
    }

    /// Max-norm of `L·vec(ρ)`.
    pub fn residual(&self, rho: &Mat4<T>) -> T {
        max_norm(&self.apply(rho))
    }

    /// Row-sum norm; bounds the spectral radius.
    pub fn inf_norm(&self) -> T {
        self.matrix
            .row_iter()
            .map(|row| {
                row.iter()
                    .map(|z| (z.re * z.re + z.im * z.im).sqrt())
                    .fold(T::zero(), |a, b| a + b)
            })
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Eigenvalues from a complex Schur decomposition.
    pub fn eigenvalues(&self) -> Option<Vec<C<T>>> {
        let schur = Schur::try_new(self.matrix, T::default_epsilon(), 10_000)?;
        schur.eigenvalues().map(|v| v.iter().copied().collect())
    }

    /// Slowest nonzero decay rate, i.e. the smallest `|Re λ|` among eigenvalues
    /// that are not (numerically) zero.
    pub fn spectral_gap(&self) -> Option<T> {
        let eig = self.eigenvalues()?;
        let scale = self.inf_norm().max(T::one());
        let zero_tol = scale * T::lit(1e3) * T::default_epsilon();
        eig.iter()
            .filter(|z| (z.re * z.re + z.im * z.im).sqrt() > zero_tol)
            .map(|z| z.re.abs())
            .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryConfig;
    use std::f64::consts::FRAC_PI_2;

    type M4 = Mat4<f64>;

    fn commutator(a: &M4, b: &M4) -> M4 {
        a * b - b * a
    }

    /// Right-hand side written out term by term in operator form.
    fn rhs_direct(p: &PairParams<f64>, c: &Couplings<f64>, rho: &M4) -> M4 {
        let i = C::new(0.0, 1.0);
        let sm = [lowering::<f64>(0), lowering::<f64>(1)];
        let sp = [raising::<f64>(0), raising::<f64>(1)];
        let det = [p.detuning1(), p.detuning2()];
        let mut out = M4::zeros();
        for k in 0..2 {
            out -= commutator(&(sp[k] * sm[k]), rho) * i * cr(det[k]);
            let d = c.drive(k);
            out += commutator(&(sm[k] * d + sp[k] * d.conj()), rho) * i;
        }
        for (a, b) in [(0, 1), (1, 0)] {
            out -= commutator(&(sp[a] * sm[b]), rho) * i * cr(c.omega12);
        }
        for a in 0..2 {
            for b in 0..2 {
                let g = c.rate(a, b);
                out -= (commutator(&sp[a], &(sm[b] * rho)) + commutator(&(rho * sp[a]), &sm[b]))
                    * cr(g);
            }
        }
        out
    }

    fn sample_point() -> (PairParams<f64>, Couplings<f64>) {
        let p = PairParams::new(1.3, 4.0, 1.7).with_detuning(-2.5);
        let g = GeometryConfig::new(2.0, 1.1, 0.7, 0.3, 0.11)
            .unwrap()
            .derive()
            .unwrap();
        let c = Couplings::compute(&p, &g).unwrap();
        (p, c)
    }

    fn sample_rho() -> M4 {
        let mut m = M4::zeros();
        for r in 0..4 {
            for k in 0..4 {
                m[(r, k)] = C::new((r * 3 + k) as f64 * 0.1 - 0.4, (r as f64 - k as f64) * 0.07);
            }
        }
        let h = m * m.adjoint();
        h / h.trace()
    }

    #[test]
    fn operator_algebra() {
        let sm1 = lowering::<f64>(0);
        let sm2 = lowering::<f64>(1);
        // σ1⁻ |e1g2⟩ = |g1g2⟩, σ2⁻ |g1e2⟩ = |g1g2⟩
        assert_eq!(sm1[(0, 2)], cr(1.0));
        assert_eq!(sm2[(0, 1)], cr(1.0));
        assert_eq!(sm1[(1, 3)], cr(1.0));
        assert_eq!(sm2[(2, 3)], cr(1.0));
        // different emitters commute
        assert_eq!(sm1 * sm2, sm2 * sm1);
        // {σ⁻, σ⁺} = 1 on each emitter
        let ac = sm1 * raising::<f64>(0) + raising::<f64>(0) * sm1;
        assert_eq!(ac, M4::identity());
    }

    #[test]
    fn superoperator_matches_direct_rhs() {
        let (p, c) = sample_point();
        let l = build_liouvillian(&p, &c).unwrap();
        let rho = sample_rho();
        let diff = apply_liouvillian(&l, &rho) - rhs_direct(&p, &c, &rho);
        assert!(max_norm(&diff) < 1e-12);
    }

    #[test]
    fn parts_reassemble_full_generator() {
        let (p, c) = sample_point();
        let parts = LiouvillianParts::new(&p.with_detuning(0.0), &c).unwrap();
        let full = build_liouvillian(&p, &c).unwrap();
        let from_parts = parts.at(p.detuning);
        assert!(max_abs(&(full.matrix - from_parts.matrix)) < 1e-12);
    }

    #[test]
    fn pure_decay_cascade() {
        let p = PairParams::new(1.2, 0.0, 0.0);
        let g = GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 10.0)
            .unwrap()
            .derive()
            .unwrap();
        let c = Couplings::decoupled(&p, &g).unwrap();
        let l = build_liouvillian(&p, &c).unwrap();
        let ground = DensityMatrix::<f64>::ground();
        assert!(l.residual(ground.matrix()) < 1e-15);
        // |e1e2⟩⟨e1e2| is an eigenvector with eigenvalue -2(γ1 + γ2)
        let top = DensityMatrix::<f64>::basis_state(3);
        let d = l.apply(top.matrix());
        let rate = -(p.gamma1 + p.gamma2) * 2.0;
        assert!((d[(3, 3)].re - rate).abs() < 1e-12);
    }

    #[test]
    fn collective_decay_rates() {
        // identical resonant atoms, drives off: |S⟩ and |A⟩ populations decay
        // at 2(γ ± γ12)
        let p = PairParams::identical(0.0);
        let g = GeometryConfig::new(FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 0.05)
            .unwrap()
            .derive()
            .unwrap();
        let c = Couplings::compute(&p, &g).unwrap();
        let l = build_liouvillian(&p, &c).unwrap();
        let eig = l.eigenvalues().unwrap();
        for expected in [-2.0 * (1.0 + c.gamma12), -2.0 * (1.0 - c.gamma12)] {
            assert!(
                eig.iter().any(|z| (z.re - expected).abs() < 1e-9 && z.im.abs() < 1e-9),
                "missing {expected}: {eig:?}"
            );
        }
    }

    #[test]
    fn collective_transform_examples() {
        let ground = DensityMatrix::<f64>::ground().collective();
        assert!((ground[(collective::G, collective::G)].re - 1.0).abs() < 1e-15);
        assert!(max_norm(&(ground - DensityMatrix::<f64>::ground().into_matrix())) < 1e-15);

        let e1g2 = DensityMatrix::<f64>::basis_state(2).collective();
        use collective::{A, S};
        assert!((e1g2[(S, S)].re - 0.5).abs() < 1e-15);
        assert!((e1g2[(A, A)].re - 0.5).abs() < 1e-15);
        assert!((e1g2[(S, A)].re - 0.5).abs() < 1e-15);

        let u = CollectiveBasis::<f64>::new().u;
        assert!(max_norm(&(u * u.adjoint() - M4::identity())) < 1e-14);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(M4::identity()).is_err());
        let mut m = M4::zeros();
        m[(0, 0)] = cr(1.0);
        m[(0, 1)] = C::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        let rho = DensityMatrix::new(sample_rho()).unwrap();
        let ev = rho.eigenvalues();
        assert!(ev[0] >= -1e-12);
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
