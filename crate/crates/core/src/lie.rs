//! Certified numerics on SU(n) and its diagonal torus.
//!
//! Every [`GroupElement`] satisfies `‖U†U − I‖_F ≤ 1e−10` and `|det U − 1| ≤ 1e−10`
//! on construction; operations that return group elements re-establish this.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::alcove::{AlcovePoint, MultiplicityPattern};
use crate::error::{Error, Result};
use crate::io::MatrixRepr;

pub type CMat = DMatrix<Complex64>;

/// Constructor invariant tolerance.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance for comparing group elements and eigenvalues.
pub const EQ_TOL: f64 = 1e-8;
/// Relative singular value threshold for numerical ranks.
pub const RANK_REL_TOL: f64 = 1e-7;
/// Tolerance on skew-Hermitian / traceless conditions.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Products longer than this are re-projected onto SU(n).
pub const REPROJECT_EVERY: usize = 8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// An element of SU(n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct GroupElement {
    m: CMat,
}

impl GroupElement {
    /// Validates `m` against the SU(n) invariants without modifying it.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidInput("group elements are nonempty square matrices".into()));
        }
        let n = m.nrows();
        let unitarity = (m.adjoint() * &m - CMat::identity(n, n)).norm();
        let det = (m.determinant() - Complex64::new(1.0, 0.0)).norm();
        if !(unitarity <= UNITARY_TOL && det <= UNITARY_TOL) {
            return Err(Error::NotSpecialUnitary { unitarity, det });
        }
        Ok(Self { m })
    }

    /// Nearest unitary matrix (polar factor), rescaled to unit determinant.
    pub fn from_matrix_projected(m: CMat) -> Result<Self> {
        let n = m.nrows();
        if !m.is_square() || n == 0 {
            return Err(Error::InvalidInput("group elements are nonempty square matrices".into()));
        }
        let svd = m.svd(true, true);
        if svd.singular_values.iter().any(|&s| !(s > 1e-12)) {
            return Err(Error::InvalidInput("cannot project a singular matrix onto SU(n)".into()));
        }
        let mut u = svd.u.unwrap() * svd.v_t.unwrap();
        let det = u.determinant();
        let root = Complex64::from_polar(1.0, -det.arg() / n as f64);
        u *= root;
        Self::new(u)
    }

    pub fn identity(n: usize) -> Self {
        Self { m: CMat::identity(n, n) }
    }

    /// Diagonal matrix with the given unit-modulus entries of product one.
    pub fn diagonal(phases: &[Complex64]) -> Result<Self> {
        Self::new(CMat::from_diagonal(&nalgebra::DVector::from_column_slice(phases)))
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn inverse(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// `g X g⁻¹`.
    pub fn conjugate(&self, x: &GroupElement) -> Self {
        Self::reproject_if_needed(&self.m * &x.m * self.m.adjoint())
    }

    /// Frobenius distance between the underlying matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.m - &other.m).norm()
    }

    /// Ordered product, re-projected every [`REPROJECT_EVERY`] factors.
    pub fn product<'a, It>(n: usize, factors: It) -> Self
    where
        It: IntoIterator<Item = &'a GroupElement>,
    {
        let mut acc = CMat::identity(n, n);
        for (i, f) in factors.into_iter().enumerate() {
            acc *= &f.m;
            if (i + 1) % REPROJECT_EVERY == 0 {
                acc = polar(acc);
            }
        }
        Self::reproject_if_needed(acc)
    }

    fn reproject_if_needed(m: CMat) -> Self {
        let n = m.nrows();
        let unitarity = (m.adjoint() * &m - CMat::identity(n, n)).norm();
        let det = (m.determinant() - Complex64::new(1.0, 0.0)).norm();
        if unitarity <= 0.1 * UNITARY_TOL && det <= 0.1 * UNITARY_TOL {
            return Self { m };
        }
        let mut u = polar(m);
        let d = u.determinant();
        u *= Complex64::from_polar(1.0, -d.arg() / n as f64);
        Self { m: u }
    }

    /// Right multiplication by `exp(X)` followed by polar re-projection.
    pub fn retract(&self, x: &CMat) -> Self {
        let n = self.n();
        let step = &self.m * (CMat::identity(n, n) + x);
        let mut u = polar(step);
        let det = u.determinant();
        u *= Complex64::from_polar(1.0, -det.arg() / n as f64);
        Self { m: u }
    }
}

fn polar(m: CMat) -> CMat {
    let svd = m.svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

impl Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement::reproject_if_needed(&self.m * &rhs.m)
    }
}

impl TryFrom<MatrixRepr> for GroupElement {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        Self::new(r.into_matrix()?)
    }
}

impl From<GroupElement> for MatrixRepr {
    fn from(g: GroupElement) -> Self {
        MatrixRepr::from_matrix(&g.m)
    }
}

/// Element of the diagonal maximal torus T ⊂ SU(n).
#[derive(Clone, Debug, PartialEq)]
pub struct TorusElement {
    phases: Vec<Complex64>,
}

impl TorusElement {
    pub fn new(phases: Vec<Complex64>) -> Result<Self> {
        let prod: Complex64 = phases.iter().product();
        let unit = phases.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-12);
        if phases.is_empty() || !unit || (prod - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!("{phases:?} is not in the torus")));
        }
        Ok(Self { phases })
    }

    /// `diag(e^{iθ₁}, …, e^{iθₙ₋₁}, e^{−i Σθ})`.
    pub fn from_free_angles(angles: &[f64]) -> Self {
        let last = -angles.iter().sum::<f64>();
        let phases = angles
            .iter()
            .chain(std::iter::once(&last))
            .map(|&a| Complex64::from_polar(1.0, a))
            .collect();
        Self { phases }
    }

    pub fn identity(n: usize) -> Self {
        Self { phases: vec![Complex64::new(1.0, 0.0); n] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let angles: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-PI..PI)).collect();
        Self::from_free_angles(&angles)
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    pub fn to_group_element(&self) -> GroupElement {
        GroupElement { m: CMat::from_diagonal(&nalgebra::DVector::from_column_slice(&self.phases)) }
    }

    pub fn inverse(&self) -> Self {
        Self { phases: self.phases.iter().map(|z| z.conj()).collect() }
    }

    /// Entries in reverse order, `R(t)`.
    pub fn reversed(&self) -> Self {
        Self { phases: self.phases.iter().rev().copied().collect() }
    }
}

impl Mul for &TorusElement {
    type Output = TorusElement;
    fn mul(self, rhs: &TorusElement) -> TorusElement {
        TorusElement {
            phases: self.phases.iter().zip(&rhs.phases).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Traceless skew-Hermitian matrix, an element of su(n).
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraElement {
    m: CMat,
}

impl LieAlgebraElement {
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidInput("Lie algebra elements are square".into()));
        }
        let skew = (&m + m.adjoint()).norm();
        let trace = m.trace().norm();
        if skew > ALGEBRA_TOL || trace > ALGEBRA_TOL {
            return Err(Error::InvalidInput(format!(
                "not in su(n): ‖X + X†‖ = {skew:.3e}, |tr X| = {trace:.3e}"
            )));
        }
        Ok(Self { m })
    }

    pub fn zero(n: usize) -> Self {
        Self { m: CMat::zeros(n, n) }
    }

    /// `Σ cᵦ Eᵦ` in the orthonormal basis of [`su_basis`].
    pub fn from_coords(n: usize, coords: &[f64]) -> Self {
        let basis = su_basis(n);
        assert_eq!(coords.len(), basis.len());
        let mut m = CMat::zeros(n, n);
        for (c, b) in coords.iter().zip(&basis) {
            m += b * Complex64::new(*c, 0.0);
        }
        Self { m }
    }

    pub fn coords(&self) -> Vec<f64> {
        su_basis(self.m.nrows()).iter().map(|b| inner(b, &self.m)).collect()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }
}

/// Real inner product `Re tr(X†Y)`.
pub fn inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Orthonormal basis of su(n) for `Re tr(X†Y)`: generalised Gell-Mann matrices times i.
pub fn su_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(n * n - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for k in j + 1..n {
            let mut a = CMat::zeros(n, n);
            a[(j, k)] = Complex64::new(s, 0.0);
            a[(k, j)] = Complex64::new(-s, 0.0);
            basis.push(a);
            let mut b = CMat::zeros(n, n);
            b[(j, k)] = Complex64::new(0.0, s);
            b[(k, j)] = Complex64::new(0.0, s);
            basis.push(b);
        }
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut h = CMat::zeros(n, n);
        for m in 0..l {
            h[(m, m)] = Complex64::new(0.0, norm);
        }
        h[(l, l)] = Complex64::new(0.0, -(l as f64) * norm);
        basis.push(h);
    }
    basis
}

/// Matrix exponential on su(n) through the Hermitian eigendecomposition of `iX`.
pub fn exp_map(x: &LieAlgebraElement) -> GroupElement {
    GroupElement { m: exp_skew(x.matrix()) }
}

pub(crate) fn exp_skew(x: &CMat) -> CMat {
    let h = x * I;
    // Symmetrise away rounding so the eigensolver sees an exactly Hermitian input.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l)));
    v * d * v.adjoint()
}

/// Unitary eigenbasis of a normal matrix: eigenvectors of the Hermitian
/// `cos θ·(M + M†) + sin θ·i(M − M†)`, with θ stepped until `Q†MQ` is diagonal.
pub(crate) fn normal_eigen(m: &CMat) -> (CMat, Vec<Complex64>) {
    let n = m.nrows();
    let adj = m.adjoint();
    let sum = m + &adj;
    let diff = (m - &adj) * I;
    let scale = m.norm().max(1.0);
    let mut best: Option<(f64, CMat, Vec<Complex64>)> = None;
    for step in 0..16 {
        let theta = 0.3718 + 1.1393 * step as f64;
        let h = &sum * Complex64::new(theta.cos(), 0.0) + &diff * Complex64::new(theta.sin(), 0.0);
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let q = h.symmetric_eigen().eigenvectors;
        let d = q.adjoint() * m * &q;
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0.0, f64::max);
        let eig = (0..n).map(|i| d[(i, i)]).collect();
        if off <= 1e-12 * scale {
            return (q, eig);
        }
        if best.as_ref().is_none_or(|b| off < b.0) {
            best = Some((off, q, eig));
        }
    }
    let (_, q, eig) = best.expect("at least one attempt");
    (q, eig)
}

/// `A = exp(−2πi·diag α)`.
pub fn holonomy_of(alpha: &AlcovePoint) -> GroupElement {
    let phases: Vec<Complex64> =
        alpha.as_slice().iter().map(|a| Complex64::from_polar(1.0, -2.0 * PI * a)).collect();
    GroupElement { m: CMat::from_diagonal(&nalgebra::DVector::from_vec(phases)) }
}

/// Result of conjugating a group element into the fundamental alcove.
#[derive(Clone, Debug)]
pub struct AlcoveProjection {
    pub alpha: AlcovePoint,
    /// `U` with `U A U⁻¹ = exp(−2πi·diag α)`.
    pub conjugator: GroupElement,
    /// Some eigenphase sits within tolerance of the branch cut at eigenvalue 1.
    /// The representative is still the deterministic one; the flag reports
    /// that a perturbation of `A` would move the cut-off eigenvalue across it.
    pub ambiguous: bool,
}

/// Conjugates `A` into the diagonal torus and reads off its alcove point.
///
/// Eigenvalues `e^{−2πi xⱼ}` with `xⱼ ∈ [0, 1)` are sorted decreasingly (ties by
/// eigenvector index); since `det A = 1`, `S = Σ xⱼ` is an integer and the
/// alcove point is `(x_{S+1}, …, xₙ, x₁ − 1, …, x_S − 1)`.
pub fn project_to_alcove(a: &GroupElement) -> Result<AlcoveProjection> {
    let n = a.n();
    let (q, eig) = normal_eigen(a.matrix());
    let mut x: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let phase = -eig[j].arg() / (2.0 * PI);
            (phase.rem_euclid(1.0), j)
        })
        .collect();
    let ambiguous = x.iter().any(|&(v, _)| !(UNITARY_TOL..=1.0 - UNITARY_TOL).contains(&v))
        && x.iter().any(|&(v, _)| v > UNITARY_TOL);
    x.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let total: f64 = x.iter().map(|v| v.0).sum();
    let s = total.round();
    if (total - s).abs() > 1e-6 {
        return Err(Error::InvalidInput("eigenphases do not sum to an integer".into()));
    }
    let s = s as usize;
    let order: Vec<(f64, usize)> = x[s..]
        .iter()
        .copied()
        .chain(x[..s].iter().map(|&(v, j)| (v - 1.0, j)))
        .collect();
    let mut alpha: Vec<f64> = order.iter().map(|v| v.0).collect();
    let mean = alpha.iter().sum::<f64>() / n as f64;
    alpha.iter_mut().for_each(|v| *v -= mean);
    // Clamp rounding-level violations of the ordering.
    for i in 1..n {
        if alpha[i] > alpha[i - 1] {
            alpha[i] = alpha[i - 1];
        }
    }
    let alpha = AlcovePoint::new(alpha)?;

    // Rows of U are the eigenvectors in alcove order: U = P Q†.
    let mut u = CMat::zeros(n, n);
    for (row, &(_, j)) in order.iter().enumerate() {
        for c in 0..n {
            u[(row, c)] = q[(c, j)].conj();
        }
    }
    let conjugator = GroupElement::from_matrix_projected(u)?;
    Ok(AlcoveProjection { alpha, conjugator, ambiguous })
}

/// Face label of α, see [`AlcovePoint::pattern`].
pub fn stabilizer_pattern(alpha: &AlcovePoint, tol: f64) -> MultiplicityPattern {
    alpha.pattern(tol)
}

/// Dimension of `[Stab(A), Stab(A)] = ∏ SU(mⱼ)` over the eigenvalue blocks of A.
pub fn commutator_subgroup_dim(pattern: &MultiplicityPattern) -> usize {
    pattern.holonomy_blocks().iter().map(|m| m * m - 1).sum()
}

/// Index classes of equal eigenvalues of `exp(−2πi·diag α)`.
pub fn eigen_classes(alpha: &AlcovePoint, tol: f64) -> Vec<Vec<usize>> {
    let a = alpha.as_slice();
    let n = a.len();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'outer: for i in 0..n {
        for class in classes.iter_mut() {
            let d = (a[class[0]] - a[i]).abs();
            if d <= tol || (d - 1.0).abs() <= tol {
                class.push(i);
                continue 'outer;
            }
        }
        classes.push(vec![i]);
    }
    classes
}

fn block_algebra(n: usize, classes: &[Vec<usize>], include_cartan: bool) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::new();
    for class in classes {
        for (p, &j) in class.iter().enumerate() {
            for &k in &class[p + 1..] {
                let mut a = CMat::zeros(n, n);
                a[(j, k)] = Complex64::new(s, 0.0);
                a[(k, j)] = Complex64::new(-s, 0.0);
                basis.push(a);
                let mut b = CMat::zeros(n, n);
                b[(j, k)] = Complex64::new(0.0, s);
                b[(k, j)] = Complex64::new(0.0, s);
                basis.push(b);
            }
        }
        if !include_cartan {
            for w in class.windows(2) {
                let mut h = CMat::zeros(n, n);
                h[(w[0], w[0])] = Complex64::new(0.0, s);
                h[(w[1], w[1])] = Complex64::new(0.0, -s);
                basis.push(h);
            }
        }
    }
    if include_cartan {
        basis.extend(cartan_basis(n));
    }
    basis
}

/// Basis of the Lie algebra of the diagonal torus, `i·diag(eⱼ − eⱼ₊₁)`.
pub fn cartan_basis(n: usize) -> Vec<CMat> {
    (0..n - 1)
        .map(|j| {
            let mut h = CMat::zeros(n, n);
            h[(j, j)] = I;
            h[(j + 1, j + 1)] = -I;
            h
        })
        .collect()
}

/// Basis of Lie(Stab(A)) ⊂ su(n) for `A = exp(−2πi·diag α)`.
pub fn stabilizer_algebra(alpha: &AlcovePoint, tol: f64) -> Vec<CMat> {
    block_algebra(alpha.n(), &eigen_classes(alpha, tol), true)
}

/// Basis of Lie([Stab(A), Stab(A)]) = ⊕ su(mⱼ).
pub fn commutator_algebra(alpha: &AlcovePoint, tol: f64) -> Vec<CMat> {
    block_algebra(alpha.n(), &eigen_classes(alpha, tol), false)
}

/// Exponential of a random combination of `basis` with standard normal
/// coefficients scaled by `scale`.
pub fn random_in_span<R: Rng + ?Sized>(rng: &mut R, n: usize, basis: &[CMat], scale: f64) -> GroupElement {
    let mut x = CMat::zeros(n, n);
    for b in basis {
        let c: f64 = rng.sample(StandardNormal);
        x += b * Complex64::new(scale * c, 0.0);
    }
    GroupElement { m: exp_skew(&x) }
}

/// Haar-distributed element of SU(n) from a seed.
pub fn random_group_element(seed: u64, n: usize) -> GroupElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar(&mut rng, n)
}

/// Haar sample: QR of a complex Ginibre matrix with the phases of `diag R`
/// moved into `Q`, then rescaled to unit determinant.
pub fn haar<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElement {
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    q *= Complex64::from_polar(1.0, -det.arg() / n as f64);
    GroupElement::new(q).expect("Haar sample is special unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alcove::{enumerate_faces, PATTERN_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = exp_map(&LieAlgebraElement::zero(3));
        assert!(e.distance(&GroupElement::identity(3)) < 1e-15);
    }

    #[test]
    fn exp_of_diagonal_is_entrywise() {
        let w = 2.0 * PI / 3.0;
        let x = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, w), c(0.0, 0.0), c(0.0, -w)]));
        let e = exp_map(&LieAlgebraElement::new(x).unwrap());
        let expected = [Complex64::from_polar(1.0, w), c(1.0, 0.0), Complex64::from_polar(1.0, -w)];
        for (i, z) in expected.iter().enumerate() {
            assert!((e.matrix()[(i, i)] - z).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_inverse_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=5 {
            let coords: Vec<f64> = (0..n * n - 1).map(|_| rng.sample(StandardNormal)).collect();
            let x = LieAlgebraElement::from_coords(n, &coords);
            let neg = LieAlgebraElement::new(-x.matrix().clone()).unwrap();
            let prod = &exp_map(&x) * &exp_map(&neg);
            assert!(prod.distance(&GroupElement::identity(n)) < 1e-12);
        }
    }

    #[test]
    fn su_basis_is_orthonormal() {
        for n in 2..=4 {
            let b = su_basis(n);
            assert_eq!(b.len(), n * n - 1);
            for (i, x) in b.iter().enumerate() {
                LieAlgebraElement::new(x.clone()).unwrap();
                for (j, y) in b.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((inner(x, y) - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let x = LieAlgebraElement::from_coords(3, &[0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8]);
        let back = x.coords();
        assert!(back.iter().zip([0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.7, -0.8]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn project_identity_and_diagonal() {
        let p = project_to_alcove(&GroupElement::identity(3)).unwrap();
        assert!(p.alpha.as_slice().iter().all(|a| a.abs() < 1e-14));
        let w = 2.0 * PI / 3.0;
        let a = GroupElement::diagonal(&[Complex64::from_polar(1.0, -w), c(1.0, 0.0), Complex64::from_polar(1.0, w)])
            .unwrap();
        let p = project_to_alcove(&a).unwrap();
        let expected = [1.0 / 3.0, 0.0, -1.0 / 3.0];
        for (x, y) in p.alpha.as_slice().iter().zip(expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn project_recovers_conjugated_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=5 {
            for _ in 0..10 {
                let alpha = AlcovePoint::sample(&mut rng, n);
                let v = haar(&mut rng, n);
                let a = v.conjugate(&holonomy_of(&alpha));
                let p = project_to_alcove(&a).unwrap();
                for (x, y) in p.alpha.as_slice().iter().zip(alpha.as_slice()) {
                    assert!((x - y).abs() < 1e-10, "{:?} vs {:?}", p.alpha, alpha);
                }
                let lhs = p.conjugator.conjugate(&a);
                assert!(lhs.distance(&holonomy_of(&p.alpha)) < 1e-9);
            }
        }
    }

    #[test]
    fn project_on_faces() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=4 {
            for f in enumerate_faces(n).into_iter().filter(|f| f.is_attainable()) {
                let alpha = AlcovePoint::sample_in_face(&mut rng, &f).unwrap();
                let v = haar(&mut rng, n);
                let p = project_to_alcove(&v.conjugate(&holonomy_of(&alpha))).unwrap();
                assert_eq!(p.alpha.pattern(1e-7), f, "{:?}", p.alpha);
            }
        }
    }

    #[test]
    fn commutator_dims() {
        let pat = |sums: &[usize], k| MultiplicityPattern::from_partial_sums(sums, k).unwrap();
        assert_eq!(commutator_subgroup_dim(&pat(&[1, 2, 3], 0)), 0);
        assert_eq!(commutator_subgroup_dim(&pat(&[2, 3], 0)), 3);
        assert_eq!(commutator_subgroup_dim(&pat(&[2, 4], 0)), 6);
        assert_eq!(commutator_subgroup_dim(&pat(&[1, 2, 3], 1)), 3);
    }

    #[test]
    fn algebra_dims_match_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=5 {
            for f in enumerate_faces(n).into_iter().filter(|f| f.is_attainable()) {
                let alpha = AlcovePoint::sample_in_face(&mut rng, &f).unwrap();
                let comm = commutator_algebra(&alpha, PATTERN_TOL);
                assert_eq!(comm.len(), commutator_subgroup_dim(&f));
                let stab = stabilizer_algebra(&alpha, PATTERN_TOL);
                let blocks = f.holonomy_blocks();
                assert_eq!(stab.len(), blocks.iter().map(|m| m * m).sum::<usize>() - 1);
                let a = holonomy_of(&alpha);
                for x in &stab {
                    let comm_err = (x * a.matrix() - a.matrix() * x).norm();
                    assert!(comm_err < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_is_deterministic_and_valid() {
        let a = random_group_element(42, 4);
        let b = random_group_element(42, 4);
        assert_eq!(a, b);
        GroupElement::new(a.matrix().clone()).unwrap();
    }

    #[test]
    fn haar_second_moment() {
        // E|tr U|² = 1 on SU(2).
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 10_000;
        let mean: f64 =
            (0..samples).map(|_| haar(&mut rng, 2).matrix().trace().norm_sqr()).sum::<f64>() / samples as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean |tr U|² = {mean}");
    }

    #[test]
    fn rejects_non_unitary() {
        let mut m = CMat::identity(2, 2);
        m[(0, 0)] = c(2.0, 0.0);
        m[(1, 1)] = c(0.5, 0.0);
        assert!(matches!(GroupElement::new(m.clone()), Err(Error::NotSpecialUnitary { .. })));
        let p = GroupElement::from_matrix_projected(m).unwrap();
        assert!(p.distance(&GroupElement::identity(2)) < 1e-12);
    }

    #[test]
    fn torus_validation() {
        assert!(TorusElement::new(vec![c(0.0, 1.0), c(0.0, 1.0)]).is_err());
        let t = TorusElement::new(vec![c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        assert_eq!((&t * &t.inverse()).phases(), TorusElement::identity(2).phases());
    }
}
