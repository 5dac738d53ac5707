//! Combinatorics of the weight simplex
//!
//! ```text
//! Δ = { α ∈ ℝⁿ : α₁ ≥ α₂ ≥ ⋯ ≥ αₙ ≥ α₁ − 1, Σ αᵢ = 0 }
//! ```
//!
//! which parametrises conjugacy classes of SU(n) through `A = exp(−2πi·diag α)`.
//!
//! Δ is itself a simplex whose barycentric coordinates are the *gaps*
//! `dᵢ = αᵢ − αᵢ₊₁` (i < n) and `dₙ = αₙ − α₁ + 1`, which sum to one. A face is
//! the set of points where a chosen subset of the gaps vanishes; it is labelled
//! by the multiplicity blocks of α and the flag `k` recording `dₙ = 0`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the defining inequalities of Δ.
pub const ALCOVE_TOL: f64 = 1e-12;

/// Tolerance used when reading a multiplicity pattern off a weight vector.
pub const PATTERN_TOL: f64 = 1e-9;

/// A weight vector α in the simplex Δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AlcovePoint {
    alpha: Vec<f64>,
}

impl AlcovePoint {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        if n < 1 {
            return Err(Error::InvalidInput("empty weight vector".into()));
        }
        let sum: f64 = alpha.iter().sum();
        let ordered = alpha.windows(2).all(|w| w[0] >= w[1] - ALCOVE_TOL);
        let spread = alpha[n - 1] >= alpha[0] - 1.0 - ALCOVE_TOL;
        if !ordered || !spread || sum.abs() > ALCOVE_TOL || alpha.iter().any(|a| !a.is_finite())
        {
            return Err(Error::NotInAlcove(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn zero(n: usize) -> Self {
        Self { alpha: vec![0.0; n] }
    }

    /// Builds α from its `n` barycentric gaps (nonnegative, summing to one).
    pub fn from_gaps(gaps: &[f64]) -> Result<Self> {
        let n = gaps.len();
        if n < 2 {
            return Err(Error::InvalidInput("need at least two gaps".into()));
        }
        let total: f64 = gaps.iter().sum();
        if gaps.iter().any(|&d| d < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("gaps {gaps:?} are not barycentric")));
        }
        // α₁ = c, αᵢ₊₁ = αᵢ − dᵢ, and Σ α = 0 fixes c.
        let mut alpha = vec![0.0; n];
        let mut acc = 0.0;
        for i in 1..n {
            acc += gaps[i - 1];
            alpha[i] = -acc;
        }
        let c = -alpha.iter().sum::<f64>() / n as f64;
        for a in alpha.iter_mut() {
            *a += c;
        }
        Self::new(alpha)
    }

    /// Uniform sample from Δ (flat Dirichlet on the gaps).
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mask = vec![true; n];
        Self::sample_gaps(rng, &mask)
    }

    /// Sample from the relative interior of a face.
    pub fn sample_in_face<R: Rng + ?Sized>(
        rng: &mut R,
        pattern: &MultiplicityPattern,
    ) -> Result<Self> {
        if !pattern.is_attainable() {
            return Err(Error::InvalidInput(format!("face {pattern} is empty")));
        }
        let n = pattern.n();
        let mut live = vec![false; n];
        for &cut in &pattern.partial_sums()[..pattern.len() - 1] {
            live[cut - 1] = true;
        }
        live[n - 1] = pattern.k() == 0;
        Ok(Self::sample_gaps(rng, &live))
    }

    fn sample_gaps<R: Rng + ?Sized>(rng: &mut R, live: &[bool]) -> Self {
        // Resample when a live gap is tiny.
        loop {
            let mut gaps: Vec<f64> = live
                .iter()
                .map(|&on| if on { Exp1.sample(rng) } else { 0.0 })
                .collect();
            let total: f64 = gaps.iter().sum();
            gaps.iter_mut().for_each(|d| *d /= total);
            if live.iter().zip(&gaps).all(|(&on, &d)| !on || d > 1e-6) {
                return Self::from_gaps(&gaps).expect("sampled gaps are barycentric");
            }
        }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    /// Barycentric gaps `(α₁−α₂, …, αₙ₋₁−αₙ, αₙ−α₁+1)`.
    pub fn gaps(&self) -> Vec<f64> {
        let n = self.n();
        let mut gaps: Vec<f64> = self.alpha.windows(2).map(|w| w[0] - w[1]).collect();
        gaps.push(self.alpha[n - 1] - self.alpha[0] + 1.0);
        gaps
    }

    /// Face label of α, reading gaps below `tol` as zero.
    pub fn pattern(&self, tol: f64) -> MultiplicityPattern {
        let n = self.n();
        let mut partial_sums: Vec<usize> = (0..n - 1)
            .filter(|&i| self.alpha[i] - self.alpha[i + 1] > tol)
            .map(|i| i + 1)
            .collect();
        partial_sums.push(n);
        let k = u8::from((self.alpha[0] - self.alpha[n - 1] - 1.0).abs() <= tol);
        MultiplicityPattern::from_partial_sums(&partial_sums, k)
            .expect("partial sums read off α are strictly increasing")
    }

    /// `−R(α)`: negate and reverse. Corresponds to `A ↦ R(A⁻¹)` on holonomies.
    pub fn reversal(&self) -> Self {
        // `0.0 - a` maps 0 to +0.
        let alpha = self.alpha.iter().rev().map(|a| 0.0 - a).collect();
        Self { alpha }
    }
}

impl TryFrom<Vec<f64>> for AlcovePoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AlcovePoint> for Vec<f64> {
    fn from(p: AlcovePoint) -> Self {
        p.alpha
    }
}

/// Label `(I, k)` of a face of Δ, stored as multiplicity block sizes.
///
/// `I` is the list of partial sums `I₁ < ⋯ < I_ℓ = n`; `k = 1` marks the
/// boundary `α₁ = αₙ + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PatternRepr", into = "PatternRepr")]
pub struct MultiplicityPattern {
    blocks: Vec<usize>,
    k: u8,
}

#[derive(Serialize, Deserialize)]
struct PatternRepr {
    #[serde(rename = "I")]
    partial_sums: Vec<usize>,
    k: u8,
}

impl TryFrom<PatternRepr> for MultiplicityPattern {
    type Error = Error;
    fn try_from(r: PatternRepr) -> Result<Self> {
        Self::from_partial_sums(&r.partial_sums, r.k)
    }
}

impl From<MultiplicityPattern> for PatternRepr {
    fn from(p: MultiplicityPattern) -> Self {
        PatternRepr { partial_sums: p.partial_sums(), k: p.k }
    }
}

impl MultiplicityPattern {
    pub fn from_blocks(blocks: Vec<usize>, k: u8) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) || k > 1 {
            return Err(Error::InvalidInput(format!("bad pattern blocks {blocks:?}, k = {k}")));
        }
        Ok(Self { blocks, k })
    }

    pub fn from_partial_sums(partial_sums: &[usize], k: u8) -> Result<Self> {
        let mut prev = 0;
        let mut blocks = Vec::with_capacity(partial_sums.len());
        for &s in partial_sums {
            if s <= prev {
                return Err(Error::InvalidInput(format!(
                    "partial sums {partial_sums:?} are not strictly increasing"
                )));
            }
            blocks.push(s - prev);
            prev = s;
        }
        Self::from_blocks(blocks, k)
    }

    /// The generic face: distinct weights, `k = 0`.
    pub fn full_flag(n: usize) -> Self {
        Self { blocks: vec![1; n], k: 0 }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    /// Number of blocks ℓ.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().sum()
    }

    /// `(I₁, …, I_ℓ)`.
    pub fn partial_sums(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    pub fn is_generic(&self) -> bool {
        self.k == 0 && self.blocks.iter().all(|&m| m == 1)
    }

    /// Whether some α ∈ Δ carries this label. Only `ℓ = 1, k = 1` is empty:
    /// constant α with `Σα = 0` is the origin, where `α₁ − αₙ = 0 ≠ 1`.
    pub fn is_attainable(&self) -> bool {
        !(self.k == 1 && self.len() == 1)
    }

    /// Block sizes reversed; `k` unchanged.
    pub fn reversed(&self) -> Self {
        Self { blocks: self.blocks.iter().rev().copied().collect(), k: self.k }
    }

    /// Block sizes of the eigenvalue multiplicities of `A = exp(−2πi·diag α)`:
    /// for `k = 1` the first and last blocks carry the same eigenvalue.
    pub fn holonomy_blocks(&self) -> Vec<usize> {
        let mut blocks = self.blocks.clone();
        if self.k == 1 && blocks.len() >= 2 {
            let last = blocks.pop().unwrap();
            blocks[0] += last;
        }
        blocks
    }

    /// Contains `α` exactly (up to `tol`).
    pub fn contains(&self, alpha: &AlcovePoint, tol: f64) -> bool {
        alpha.pattern(tol) == *self
    }
}

impl std::fmt::Display for MultiplicityPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(I={:?}, k={})", self.partial_sums(), self.k)
    }
}

/// All face labels for rank `n`: every composition of `n` with `k ∈ {0, 1}`.
///
/// The list has `2ⁿ` entries. Labels are closed-stratum names; the single
/// empty one (`ℓ = 1, k = 1`) is kept and flagged by
/// [`MultiplicityPattern::is_attainable`].
pub fn enumerate_faces(n: usize) -> Vec<MultiplicityPattern> {
    assert!(n >= 2, "faces are enumerated for n ≥ 2");
    let mut faces = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << (n - 1)) {
        let mut partial_sums: Vec<usize> =
            (0..n - 1).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
        partial_sums.push(n);
        for k in 0..=1 {
            faces.push(MultiplicityPattern::from_partial_sums(&partial_sums, k).unwrap());
        }
    }
    faces
}

/// A stratum of `Δ × Δ` of the form `Δ^(I,k) × Δ^(R̂(I),k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricStratum {
    pub at_x1: MultiplicityPattern,
    pub at_x2: MultiplicityPattern,
}

pub fn symmetric_strata(n: usize) -> Vec<SymmetricStratum> {
    enumerate_faces(n)
        .into_iter()
        .map(|p| SymmetricStratum { at_x2: p.reversed(), at_x1: p })
        .collect()
}

/// Degree, flag and weight bookkeeping on a `k = 1` face, where the bundle
/// acquires torsion of length `t¹ = n − I_{ℓ−1}` at x₁ and `t² = I₁` at x₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionShift {
    pub t1: usize,
    pub t2: usize,
    pub shifted_degree: i64,
    /// Proper flag dimensions on `E/torsion` at x₁ (the full space is omitted).
    pub flag_dims1: Vec<usize>,
    pub flag_dims2: Vec<usize>,
    pub shifted_pattern1: MultiplicityPattern,
    pub shifted_pattern2: MultiplicityPattern,
    pub shifted_weights1: Vec<f64>,
    pub shifted_weights2: Vec<f64>,
}

/// Torsion shift for a face and a weight vector lying on it.
///
/// On `k = 0` faces the shift is zero: `t¹ = t² = 0` and the flags and
/// distinct weights are returned unchanged.
pub fn torsion_shift(pattern: &MultiplicityPattern, alpha: &AlcovePoint) -> Result<TorsionShift> {
    if pattern.n() != alpha.n() {
        return Err(Error::InvalidInput("pattern and weights have different rank".into()));
    }
    if pattern.k() == 1 && pattern.len() < 2 {
        return Err(Error::PatternTooCoarse);
    }
    if !pattern.contains(alpha, PATTERN_TOL) {
        return Err(Error::InvalidInput(format!("α = {:?} is not on face {pattern}", alpha.as_slice())));
    }
    let n = pattern.n();
    let ell = pattern.len();
    let sums = pattern.partial_sums();
    // α_{I_j}, j = 1..ℓ (1-based I).
    let w = |j: usize| alpha.as_slice()[sums[j - 1] - 1];

    if pattern.k() == 0 {
        let reversed = pattern.reversed();
        return Ok(TorsionShift {
            t1: 0,
            t2: 0,
            shifted_degree: 0,
            flag_dims1: sums[..ell - 1].to_vec(),
            flag_dims2: reversed.partial_sums()[..ell - 1].to_vec(),
            shifted_pattern1: pattern.clone(),
            shifted_pattern2: reversed,
            shifted_weights1: (1..=ell).map(w).collect(),
            shifted_weights2: (1..=ell).rev().map(|j| -w(j)).collect(),
        });
    }
    let t1 = n - sums[ell - 2];
    let t2 = sums[0];
    let flag_dims1: Vec<usize> = (1..=ell - 2).map(|j| sums[j - 1] + t1).collect();
    let flag_dims2: Vec<usize> = (1..=ell - 2).map(|j| n - sums[ell - j - 1] + t2).collect();
    let with_top = |dims: &[usize]| {
        let mut s = dims.to_vec();
        s.push(n);
        MultiplicityPattern::from_partial_sums(&s, 0)
    };
    Ok(TorsionShift {
        t1,
        t2,
        shifted_degree: -((t1 + t2) as i64),
        shifted_pattern1: with_top(&flag_dims1)?,
        shifted_pattern2: with_top(&flag_dims2)?,
        flag_dims1,
        flag_dims2,
        // α_{I₁} > α_{I₂} > ⋯ > α_{I_{ℓ−1}}, with α_{I₁} = αₙ + 1.
        shifted_weights1: (1..ell).map(w).collect(),
        // −α_{I_ℓ} > −α_{I_{ℓ−1}} > ⋯ > −α_{I₂}, with −α_{I_ℓ} = −α_{I₁} + 1.
        shifted_weights2: (2..=ell).rev().map(|j| -w(j)).collect(),
    })
}
