//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use moduli_lab::alcove::AlcovePoint;
use moduli_lab::lie::{haar, GroupElement};
use moduli_lab::rep_variety::{RepPoint, Topology};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMat = DMatrix<Complex64>;

/// `exp(−2πi·s·diag α)` built entrywise.
pub fn diag_exp(alpha: &[f64], turns: f64) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        alpha.len(),
        alpha.iter().map(|a| Complex64::from_polar(1.0, -2.0 * PI * turns * a)),
    ))
}

pub fn max_entry(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn inv(m: &CMat) -> CMat {
    m.adjoint()
}

/// `(∏[Cᵢ,Dᵢ])·B₁AB₁⁻¹·B₂A⁻¹B₂⁻¹` multiplied out directly.
pub fn relation_product(a: &CMat, b1: &CMat, b2: &CMat, handles: &[(CMat, CMat)]) -> CMat {
    let n = a.nrows();
    let mut w = CMat::identity(n, n);
    for (c, d) in handles {
        w = w * c * d * inv(c) * inv(d);
    }
    w * b1 * a * inv(b1) * b2 * inv(a) * inv(b2)
}

/// Eigenbasis of a unitary matrix from the commuting Hermitian pair `Re X`, `Im X`:
/// diagonalise a generic real combination and read eigenvalues off `Q†XQ`.
pub fn unitary_eigen(x: &CMat) -> (CMat, Vec<Complex64>) {
    let n = x.nrows();
    let re = (x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let im = (x - x.adjoint()) * Complex64::new(0.0, -0.5);
    for w in [0.618_034, 1.324_718, 2.236_068, 0.271_828] {
        let h = &re + &im * Complex64::new(w, 0.0);
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let q = h.symmetric_eigen().eigenvectors;
        let d = q.adjoint() * x * &q;
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| d[(i, j)].norm()).fold(0.0, f64::max);
        if off < 1e-11 {
            return (q, (0..n).map(|i| d[(i, i)]).collect());
        }
    }
    panic!("no separating combination found");
}

/// `C, D ∈ SU(n)` with `C D C⁻¹ D⁻¹ = X` for a special unitary `X`:
/// `X = V diag(x) V†`, `C = V diag(c) V†` with `cᵢ = xᵢ c_{i−1}` and `D = V P V†`
/// for the cyclic shift `P`, up to central phases.
pub fn commutator_preimage(x: &CMat) -> (CMat, CMat) {
    let n = x.nrows();
    let (q, eig) = unitary_eigen(x);
    // P e_i = e_{i+1} gives (P C⁻¹ P⁻¹)_{ii} = c_{i−1}⁻¹, so [C, P] = diag(cᵢ / c_{i−1}).
    let mut c = vec![Complex64::new(1.0, 0.0); n];
    for i in 1..n {
        c[i] = eig[i] * c[i - 1];
    }
    let det: Complex64 = c.iter().product();
    let root = Complex64::from_polar(1.0, -det.arg() / n as f64);
    let cm = CMat::from_diagonal(&DVector::from_iterator(n, c.iter().map(|z| z * root)));
    let mut p = CMat::zeros(n, n);
    for i in 0..n {
        p[((i + 1) % n, i)] = Complex64::new(1.0, 0.0);
    }
    let pd = p.determinant();
    p *= Complex64::from_polar(1.0, -pd.arg() / n as f64);
    // The first ratio c₀ / c_{n−1} equals x₀ because ∏ xᵢ = 1.
    let qa = q.adjoint();
    (&q * cm * &qa, &q * p * &qa)
}

/// A genus-2 solution of the connected relation built without any solver:
/// Haar `B₁, B₂` and a single handle solving `[C, D] = (B₁AB₁⁻¹B₂A⁻¹B₂⁻¹)⁻¹`.
pub fn constructed_genus_two<R: Rng + ?Sized>(rng: &mut R, alpha: &AlcovePoint, t: f64) -> RepPoint {
    let n = alpha.n();
    let a = diag_exp(alpha.as_slice(), 1.0);
    let b1 = haar(rng, n);
    let b2 = haar(rng, n);
    let tail = b1.matrix() * &a * inv(b1.matrix()) * b2.matrix() * inv(&a) * inv(b2.matrix());
    let (c, d) = commutator_preimage(&inv(&tail));
    RepPoint {
        alpha: alpha.clone(),
        b1,
        b2,
        handles: vec![(
            GroupElement::from_matrix_projected(c).unwrap(),
            GroupElement::from_matrix_projected(d).unwrap(),
        )],
        t: Complex64::new(t, 0.0),
        topology: Topology::Connected,
    }
}

/// Alcove point with prescribed partial sums `I` (k = 0) and random distinct block values.
pub fn alpha_with_blocks<R: Rng + ?Sized>(rng: &mut R, blocks: &[usize]) -> AlcovePoint {
    loop {
        let mut vals: Vec<f64> = (0..blocks.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        let mut a: Vec<f64> = blocks.iter().zip(&vals).flat_map(|(&m, &v)| std::iter::repeat_n(v, m)).collect();
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        a.iter_mut().for_each(|x| *x -= mean);
        let gaps_ok = vals.windows(2).all(|w| w[0] - w[1] > 1e-3);
        if gaps_ok && a[0] - a[a.len() - 1] < 1.0 - 1e-3 {
            return AlcovePoint::new(a).unwrap();
        }
    }
}

/// Shifted flag dimensions on a k = 1 face with partial sums `I₁ < ⋯ < I_ℓ = n`,
/// read off directly: `I_j + t¹` at x₁ and `I_ℓ − I_{ℓ−j} + t²` at x₂, for
/// `j = 1, …, ℓ − 2`, with `t¹ = n − I_{ℓ−1}`, `t² = I₁`.
pub fn shifted_dims(sums: &[usize]) -> (usize, usize, Vec<usize>, Vec<usize>) {
    let ell = sums.len();
    let n = sums[ell - 1];
    let t1 = n - sums[ell - 2];
    let t2 = sums[0];
    let x1 = (1..=ell - 2).map(|j| sums[j - 1] + t1).collect();
    let x2 = (1..=ell - 2).map(|j| sums[ell - 1] - sums[ell - 1 - j] + t2).collect();
    (t1, t2, x1, x2)
}

/// Rank-2 admissible labellings of a trivalent graph by exhaustive enumeration
/// over all `(k+1)^E` labellings.
pub fn brute_force_count(vertices: usize, edges: &[(usize, usize)], k: usize) -> u64 {
    let e = edges.len();
    let mut labels = vec![0usize; e];
    let mut count = 0;
    loop {
        let mut at: Vec<Vec<usize>> = vec![Vec::new(); vertices];
        for (i, &(u, v)) in edges.iter().enumerate() {
            at[u].push(labels[i]);
            at[v].push(labels[i]);
        }
        let ok = at.iter().all(|l| {
            let (a, b, c) = (l[0], l[1], l[2]);
            (a + b + c) % 2 == 0 && a + b >= c && b + c >= a && c + a >= b && a + b + c <= 2 * k
        });
        count += u64::from(ok);
        let mut i = 0;
        loop {
            if i == e {
                return count;
            }
            labels[i] += 1;
            if labels[i] <= k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Rank-2 Verlinde number from the quantum dimensions at level `k`.
pub fn verlinde_oracle(g: usize, k: usize) -> u64 {
    let m = (k + 2) as f64;
    let s: f64 = (1..=k + 1).map(|j| ((j as f64) * PI / m).sin().powf(2.0 - 2.0 * g as f64)).sum();
    ((m / 2.0).powf(g as f64 - 1.0) * s).round() as u64
}
