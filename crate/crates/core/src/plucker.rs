//! Decomposable framing forms at the two marked fibres.
//!
//! A nonzero `β_j` is stored as `c·f₁∧⋯∧f_j`: `j` covector rows `F` and a scale
//! `c`. Then `β_j(v₁,…,v_j) = c·det(F·[v₁ … v_j])` and `Ann(β_j) = ker F`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alcove::MultiplicityPattern;
use crate::error::{Error, Result};
use crate::lie::{CMat, TorusElement};

/// Modulus below which a contraction counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
const SPAN_TOL: f64 = 1e-9;

/// `β_j`: zero, or a decomposable `j`-form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EntryRepr", into = "EntryRepr")]
pub enum BetaEntry {
    Zero,
    Form { covectors: CMat, scale: Complex64 },
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zero: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    covectors: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<[f64; 2]>,
}

impl TryFrom<EntryRepr> for BetaEntry {
    type Error = Error;
    fn try_from(r: EntryRepr) -> Result<Self> {
        match (r.zero, r.covectors, r.scale) {
            (Some(true), None, None) => Ok(BetaEntry::Zero),
            (None | Some(false), Some(rows), Some([re, im])) => {
                let j = rows.len();
                let n = rows.first().map_or(0, Vec::len);
                if j == 0 || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidInput("covector rows must be nonempty and equally long".into()));
                }
                let m = CMat::from_fn(j, n, |a, b| Complex64::new(rows[a][b][0], rows[a][b][1]));
                BetaEntry::form(m, Complex64::new(re, im))
            }
            _ => Err(Error::InvalidInput("expected {\"zero\": true} or {\"covectors\", \"scale\"}".into())),
        }
    }
}

impl From<BetaEntry> for EntryRepr {
    fn from(e: BetaEntry) -> Self {
        match e {
            BetaEntry::Zero => EntryRepr { zero: Some(true), covectors: None, scale: None },
            BetaEntry::Form { covectors, scale } => EntryRepr {
                zero: None,
                covectors: Some(
                    (0..covectors.nrows())
                        .map(|i| (0..covectors.ncols()).map(|k| [covectors[(i, k)].re, covectors[(i, k)].im]).collect())
                        .collect(),
                ),
                scale: Some([scale.re, scale.im]),
            },
        }
    }
}

impl BetaEntry {
    /// Validates independence of the covectors and a nonzero scale.
    pub fn form(covectors: CMat, scale: Complex64) -> Result<Self> {
        if scale.norm() == 0.0 || !scale.is_finite() {
            return Err(Error::InvalidInput("framing scales are nonzero".into()));
        }
        let sv = covectors.clone().svd(false, false).singular_values;
        if sv.iter().any(|&s| s <= SPAN_TOL * sv.max().max(1.0)) {
            return Err(Error::InvalidInput("covectors of a decomposable form are independent".into()));
        }
        Ok(BetaEntry::Form { covectors, scale })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BetaEntry::Zero)
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            BetaEntry::Zero => None,
            BetaEntry::Form { covectors, .. } => Some(covectors.nrows()),
        }
    }

    /// `β(v₁,…,v_j)` for the columns of `v`.
    pub fn evaluate(&self, v: &CMat) -> Complex64 {
        match self {
            BetaEntry::Zero => Complex64::default(),
            BetaEntry::Form { covectors, scale } => scale * (covectors * v).determinant(),
        }
    }

    /// Orthonormal basis of `Ann(β)` as columns; `None` for zero forms.
    pub fn annihilator(&self) -> Option<CMat> {
        match self {
            BetaEntry::Zero => None,
            BetaEntry::Form { covectors, .. } => {
                let j = covectors.nrows();
                let full = complete_basis(&covectors.adjoint());
                Some(full.columns(j, full.ncols() - j).into_owned())
            }
        }
    }

    /// All `j × j` minors of `c·F`, columns in lexicographic order.
    pub fn plucker_coordinates(&self, n: usize, j: usize) -> Vec<Complex64> {
        subsets(n, j)
            .iter()
            .map(|cols| match self {
                BetaEntry::Zero => Complex64::default(),
                BetaEntry::Form { covectors, scale } => {
                    scale * DMatrix::from_fn(j, j, |a, b| covectors[(a, cols[b])]).determinant()
                }
            })
            .collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        match self {
            BetaEntry::Zero => BetaEntry::Zero,
            BetaEntry::Form { covectors, scale } => BetaEntry::Form { covectors: covectors.clone(), scale: scale * factor },
        }
    }
}

fn subsets(n: usize, j: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, j, &mut Vec::new(), &mut out);
    out
}

/// Orthonormal basis of `ℂⁿ` whose leading columns span the columns of `a`
/// (assumed independent), by two passes of modified Gram–Schmidt.
pub fn complete_basis(a: &CMat) -> CMat {
    let n = a.nrows();
    let mut cols: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(n);
    let candidates = (0..a.ncols())
        .map(|k| a.column(k).into_owned())
        .chain((0..n).map(|k| {
            let mut e = nalgebra::DVector::zeros(n);
            e[k] = Complex64::new(1.0, 0.0);
            e
        }));
    for mut v in candidates {
        if cols.len() == n {
            break;
        }
        for _ in 0..2 {
            for q in &cols {
                let c = q.dotc(&v);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    CMat::from_columns(&cols)
}

/// Framing data at both points, `points[i][j − 1] = β^{i+1}_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaData {
    pub n: usize,
    pub points: [Vec<BetaEntry>; 2],
}

/// Nested subspaces (orthonormal column bases) of increasing dimension.
#[derive(Clone, Debug)]
pub struct Flag {
    pub steps: Vec<CMat>,
}

impl Flag {
    pub fn dims(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.ncols()).collect()
    }

    /// Largest Frobenius distance between corresponding orthogonal projectors.
    pub fn distance(&self, other: &Flag) -> f64 {
        if self.dims() != other.dims() {
            return f64::INFINITY;
        }
        self.steps
            .iter()
            .zip(&other.steps)
            .map(|(a, b)| (a * a.adjoint() - b * b.adjoint()).norm())
            .fold(0.0, f64::max)
    }

    /// Flag cut out by `e₁*, e₁*∧e₂*, …`: `E_d = ⟨e_{n−d+1}, …, e_n⟩`, restricted to `dims`.
    pub fn standard(n: usize, dims: &[usize]) -> Self {
        Self::from_frame(&CMat::identity(n, n), dims)
    }

    /// `E_d` spanned by the last `d` columns of the unitary `frame`, the flag of
    /// the forms built by [`BetaData::from_frames`].
    pub fn from_frame(frame: &CMat, dims: &[usize]) -> Self {
        let n = frame.ncols();
        Self { steps: dims.iter().map(|&d| frame.columns(n - d, d).into_owned()).collect() }
    }
}

/// Framing forms with unit scales whose annihilators are the steps of `flag`;
/// `β_{n−d}` is zero unless `d` is a step dimension (`β_n` is the volume form
/// unless `with_volume` is false).
pub fn betas_from_flag(n: usize, flag: &Flag, with_volume: bool) -> Vec<BetaEntry> {
    let mut entries = vec![BetaEntry::Zero; n];
    for step in &flag.steps {
        let d = step.ncols();
        if d == n || d == 0 {
            continue;
        }
        let full = complete_basis(step);
        let perp = full.columns(d, n - d).into_owned();
        entries[n - d - 1] = BetaEntry::Form { covectors: perp.adjoint(), scale: Complex64::new(1.0, 0.0) };
    }
    if with_volume {
        entries[n - 1] = BetaEntry::Form { covectors: CMat::identity(n, n), scale: Complex64::new(1.0, 0.0) };
    }
    entries
}

fn row_span_contains(big: &CMat, small: &CMat) -> bool {
    // Rows of `small` lie in the row span of `big` iff projecting them leaves nothing.
    let q = complete_basis(&big.adjoint()).columns(0, big.nrows()).into_owned();
    let proj = small * &q * q.adjoint();
    (small - proj).norm() <= SPAN_TOL * small.norm().max(1.0)
}

impl BetaData {
    pub fn new(n: usize, points: [Vec<BetaEntry>; 2]) -> Result<Self> {
        for entries in &points {
            if entries.len() != n {
                return Err(Error::InvalidInput(format!("expected {n} forms per point")));
            }
            for (j, e) in entries.iter().enumerate() {
                if let BetaEntry::Form { covectors, .. } = e {
                    if covectors.nrows() != j + 1 || covectors.ncols() != n {
                        return Err(Error::InvalidInput(format!("β_{} must have {} covectors in ℂ^{n}", j + 1, j + 1)));
                    }
                }
            }
        }
        Ok(Self { n, points })
    }

    /// Standard-basis forms `e₁*∧⋯∧e_j*` on the pattern's nonvanishing set.
    pub fn standard(pattern: &MultiplicityPattern) -> Self {
        let n = pattern.n();
        let id = CMat::identity(n, n);
        Self::from_frames(pattern, &id, &id, |_, _| Complex64::new(1.0, 0.0))
    }

    /// Forms `c·(rows 1..j of frameᵢ†)` on the nonvanishing set of `pattern`:
    /// at `x₁` the `β_{n−I_s}` (`s < ℓ`), at `x₂` the `β_{I_s}`, and `β_n` at both when `k = 0`.
    pub fn from_frames(
        pattern: &MultiplicityPattern,
        frame1: &CMat,
        frame2: &CMat,
        mut scale: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let n = pattern.n();
        let sums = pattern.partial_sums();
        let inner = &sums[..sums.len() - 1];
        let mut points = [vec![BetaEntry::Zero; n], vec![BetaEntry::Zero; n]];
        let mut nonzero: [Vec<usize>; 2] = [inner.iter().map(|i| n - i).collect(), inner.to_vec()];
        if pattern.k() == 0 {
            nonzero[0].push(n);
            nonzero[1].push(n);
        }
        for (i, frame) in [frame1, frame2].into_iter().enumerate() {
            let dual = frame.adjoint();
            for &j in &nonzero[i] {
                points[i][j - 1] =
                    BetaEntry::Form { covectors: dual.rows(0, j).into_owned(), scale: scale(i, j) };
            }
        }
        Self { n, points }
    }

    fn nonzero(&self, point: usize) -> Vec<usize> {
        self.points[point].iter().enumerate().filter(|(_, e)| !e.is_zero()).map(|(j, _)| j + 1).collect()
    }

    /// Flag `E_d = Ann(β_{n−d})` at each point, over the nonzero `β_j` with
    /// `j < n`, followed by the whole fibre.
    pub fn flags(&self) -> Result<[Flag; 2]> {
        let mut out = Vec::new();
        for i in 0..2 {
            let nz = self.nonzero(i);
            for w in nz.windows(2) {
                let (a, b) = (w[0], w[1]);
                if let (BetaEntry::Form { covectors: fa, .. }, BetaEntry::Form { covectors: fb, .. }) =
                    (&self.points[i][a - 1], &self.points[i][b - 1])
                {
                    if !row_span_contains(fb, fa) {
                        return Err(Error::NotNested(a, b));
                    }
                }
            }
            let mut steps: Vec<CMat> = nz
                .iter()
                .rev()
                .filter(|&&j| j < self.n)
                .map(|&j| self.points[i][j - 1].annihilator().expect("nonzero"))
                .collect();
            steps.push(CMat::identity(self.n, self.n));
            out.push(Flag { steps });
        }
        let second = out.pop().unwrap();
        Ok([out.pop().unwrap(), second])
    }

    /// Label `(I, k)` read from the vanishing pattern: `I` from the flag at `x₁`,
    /// `k = 1` iff `β_n` vanishes. The flag at `x₂` must carry `R̂(I)`.
    pub fn stratum(&self) -> Result<MultiplicityPattern> {
        let n = self.n;
        let vol = [self.points[0][n - 1].is_zero(), self.points[1][n - 1].is_zero()];
        if vol[0] != vol[1] {
            return Err(Error::IllegalPattern("β_n vanishes at one point only".into()));
        }
        let k = u8::from(vol[0]);
        let read = |point: usize| -> Result<MultiplicityPattern> {
            let mut dims: Vec<usize> = self.nonzero(point).iter().filter(|&&j| j < n).map(|&j| n - j).collect();
            dims.sort_unstable();
            dims.push(n);
            MultiplicityPattern::from_partial_sums(&dims, k)
        };
        let (p1, p2) = (read(0)?, read(1)?);
        if !p1.is_attainable() {
            return Err(Error::IllegalPattern(format!("{p1} carries no weights")));
        }
        if p2 != p1.reversed() {
            return Err(Error::IllegalPattern(format!("x₂ carries {p2}, expected {}", p1.reversed())));
        }
        Ok(p1)
    }

    /// `γ_{j,j′}` between consecutive nonzero forms at each point, starting from `β₀ = 1`.
    pub fn compatibility_quotients(&self) -> Result<[SubquotientFrame; 2]> {
        let frame = |i: usize| -> Result<SubquotientFrame> {
            let mut steps = Vec::new();
            let mut prev: Option<(usize, &CMat, Complex64)> = None;
            for j in self.nonzero(i) {
                let BetaEntry::Form { covectors: fj, scale: cj } = &self.points[i][j - 1] else { unreachable!() };
                let step = match prev {
                    None => GammaStep { from: 0, to: j, covectors: fj.clone(), scale: *cj },
                    Some((a, fa, ca)) => gamma(a, fa, ca, j, fj, *cj)?,
                };
                steps.push(step);
                prev = Some((j, fj, *cj));
            }
            Ok(SubquotientFrame { point: i + 1, steps })
        };
        Ok([frame(0)?, frame(1)?])
    }
}

/// `γ` with `β_{j′} = β_j ∧ γ`, its covectors orthogonal to those of `β_j`.
fn gamma(j: usize, f: &CMat, c: Complex64, jp: usize, fp: &CMat, cp: Complex64) -> Result<GammaStep> {
    if !row_span_contains(fp, f) {
        return Err(Error::Incompatible(j, jp));
    }
    let n = f.ncols();
    // Orthonormal basis of span(F′) with span(F) first.
    let q_f = complete_basis(&f.adjoint()).columns(0, j).into_owned();
    let q_fp = complete_basis(&fp.adjoint()).columns(0, jp).into_owned();
    let mut joined = CMat::zeros(n, j + jp);
    joined.columns_mut(0, j).copy_from(&q_f);
    joined.columns_mut(j, jp).copy_from(&q_fp);
    let basis = complete_basis(&joined);
    let g = basis.columns(j, jp - j).adjoint();
    let mut stacked = CMat::zeros(jp, n);
    stacked.rows_mut(0, j).copy_from(f);
    stacked.rows_mut(j, jp - j).copy_from(&g);
    // V with [F; G]·V = I, so (β_j∧γ)(V) = c_j·s.
    let v = stacked.adjoint() * (&stacked * stacked.adjoint()).try_inverse().ok_or(Error::Incompatible(j, jp))?;
    let scale = cp * (fp * &v).determinant() / c;
    Ok(GammaStep { from: j, to: jp, covectors: g, scale })
}

/// Wedge `β ∧ γ` of two decomposable forms.
pub fn wedge(gamma: &GammaStep, beta: &BetaEntry) -> BetaEntry {
    match beta {
        BetaEntry::Zero => BetaEntry::Zero,
        BetaEntry::Form { covectors, scale } => {
            let (a, b) = (gamma.covectors.nrows(), covectors.nrows());
            let mut m = CMat::zeros(a + b, covectors.ncols());
            m.rows_mut(0, b).copy_from(covectors);
            m.rows_mut(b, a).copy_from(&gamma.covectors);
            BetaEntry::Form { covectors: m, scale: gamma.scale * scale }
        }
    }
}

/// Volume element on `E_{n−j}/E_{n−j′}`, the quotient `γ_{j,j′}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaStep {
    pub from: usize,
    pub to: usize,
    pub covectors: CMat,
    pub scale: Complex64,
}

impl GammaStep {
    pub fn as_entry(&self) -> BetaEntry {
        BetaEntry::Form { covectors: self.covectors.clone(), scale: self.scale }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubquotientFrame {
    pub point: usize,
    pub steps: Vec<GammaStep>,
}

/// `μ_j(t) = t¹⋯tʲ`.
pub fn mu_character(t: &TorusElement, j: usize) -> Complex64 {
    t.phases()[..j].iter().product()
}

/// `ν_{s,s′}(t) = t^{s+1}⋯t^{s′}`.
pub fn nu_character(t: &TorusElement, s: usize, sp: usize) -> Complex64 {
    t.phases()[s..sp].iter().product()
}

/// `(t₁, t₂)·(β¹_j, β²_j) = (μ_j(t₁)β¹_j, μ_j(t₂)β²_j)`; annihilators are untouched.
pub fn torus_act_betas(b: &BetaData, t1: &TorusElement, t2: &TorusElement) -> BetaData {
    let mut out = b.clone();
    for (entries, t) in out.points.iter_mut().zip([t1, t2]) {
        for (j, e) in entries.iter_mut().enumerate() {
            *e = e.scaled(mu_character(t, j + 1));
        }
    }
    out
}

/// Ratio of the volume elements on block `s` at the two points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pairing {
    pub block: usize,
    /// `γ¹` step `(j, j′)` at `x₁`.
    pub step1: (usize, usize),
    /// `γ²` step at `x₂`.
    pub step2: (usize, usize),
    pub value: Complex64,
}

/// Pairs the volume on `E¹_{I_s}/E¹_{I_{s−1}}` (the `γ¹` step `n−I_s → n−I_{s−1}`)
/// with the one on the matching subquotient at `x₂` (the `γ²` step
/// `I_{s−1} → I_s`). Both transform by the same character under `(t, R(t))`,
/// so the ratio `γ¹/γ²` is invariant. For `k = 1` only blocks present at both
/// points are paired.
pub fn antidiagonal_identify(b: &BetaData) -> Result<Vec<Pairing>> {
    let pattern = b.stratum().map_err(|e| match e {
        Error::IllegalPattern(_) => Error::AsymmetricStrata,
        other => other,
    })?;
    let n = b.n;
    let [q1, q2] = b.compatibility_quotients()?;
    let mut sums = vec![0];
    sums.extend(pattern.partial_sums());
    let mut out = Vec::new();
    for s in 1..=pattern.len() {
        let want1 = (n - sums[s], n - sums[s - 1]);
        let want2 = (sums[s - 1], sums[s]);
        let g1 = q1.steps.iter().find(|g| (g.from, g.to) == want1);
        let g2 = q2.steps.iter().find(|g| (g.from, g.to) == want2);
        if let (Some(g1), Some(g2)) = (g1, g2) {
            out.push(Pairing { block: s, step1: want1, step2: want2, value: g1.scale / g2.scale });
        }
    }
    Ok(out)
}

/// Contracted forms on the quotient of the fibre by the torsion generators.
#[derive(Clone, Debug)]
pub struct TorsionBetas {
    /// Orthonormal basis of `span(S)^⊥`, the coordinates on the quotient fibre.
    pub quotient_basis: CMat,
    /// `β_t(s₁,…,s_t)`.
    pub contraction: Complex64,
    /// `β̃_{j−t}` for `j = t+1, …, n`.
    pub entries: Vec<BetaEntry>,
}

impl TorsionBetas {
    /// Dimensions in the original fibre of the shifted flag, `dim Ann(β̃) + t`.
    pub fn lifted_flag_dims(&self) -> Vec<usize> {
        let t = self.quotient_basis.nrows() - self.quotient_basis.ncols();
        let mut dims: Vec<usize> = self
            .entries
            .iter()
            .filter_map(|e| e.annihilator().map(|a| a.ncols() + t))
            .filter(|&d| d > t)
            .collect();
        dims.sort_unstable();
        dims
    }
}

/// `β̃_{j−t}(v₁,…) = β_j(s₁,…,s_t, v₁,…)` at point `point` (1 or 2), with the
/// generators as the columns of `s`.
pub fn torsion_betas(b: &BetaData, point: usize, s: &CMat) -> Result<TorsionBetas> {
    let n = b.n;
    let t = s.ncols();
    if !(1..n).contains(&t) || s.nrows() != n || !(1..=2).contains(&point) {
        return Err(Error::InvalidInput("need 1 ≤ t < n generators in the fibre".into()));
    }
    let entries = &b.points[point - 1];
    let contraction = entries[t - 1].evaluate(s);
    let size = match &entries[t - 1] {
        BetaEntry::Form { scale, .. } => scale.norm(),
        BetaEntry::Zero => 1.0,
    } * s.norm().max(1.0).powi(t as i32);
    if contraction.norm() <= DEGENERACY_TOL * size {
        return Err(Error::DegenerateTorsion(contraction.norm()));
    }
    let w = complete_basis(s).columns(t, n - t).into_owned();
    let mut out = Vec::with_capacity(n - t);
    for e in &entries[t..] {
        out.push(match e {
            BetaEntry::Zero => BetaEntry::Zero,
            BetaEntry::Form { covectors, scale } => {
                let j = covectors.nrows();
                let m = covectors * s;
                // P = U† for M = UΣV†, completed to a j × j unitary.
                let svd = m.clone().svd(true, false);
                let p = complete_basis(&svd.u.expect("requested")).adjoint();
                let pf = &p * covectors;
                let pm = &p * &m;
                let nblock = pm.rows(0, t).into_owned();
                let det_n = nblock.determinant();
                let det_p = p.determinant();
                if det_n.norm() <= DEGENERACY_TOL {
                    return Err(Error::DegenerateTorsion(det_n.norm()));
                }
                let rest = pf.rows(t, j - t) * &w;
                BetaEntry::Form { covectors: rest, scale: scale * det_n / det_p }
            }
        });
    }
    Ok(TorsionBetas { quotient_basis: w, contraction, entries: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::haar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pat(sums: &[usize], k: u8) -> MultiplicityPattern {
        MultiplicityPattern::from_partial_sums(sums, k).unwrap()
    }

    #[test]
    fn standard_flag() {
        let b = BetaData::standard(&MultiplicityPattern::full_flag(3));
        let [f1, f2] = b.flags().unwrap();
        assert_eq!(f1.dims(), vec![1, 2, 3]);
        assert!(f1.distance(&Flag::standard(3, &[1, 2, 3])) < 1e-14);
        assert_eq!(f2.dims(), vec![1, 2, 3]);
    }

    #[test]
    fn zero_entries_drop_steps() {
        let b = BetaData::standard(&pat(&[1, 3], 0));
        let [f1, f2] = b.flags().unwrap();
        assert_eq!(f1.dims(), vec![1, 3]);
        assert_eq!(f2.dims(), vec![2, 3]);
        assert!(b.points[0][0].is_zero());
    }

    #[test]
    fn strata_from_vanishing() {
        assert_eq!(BetaData::standard(&MultiplicityPattern::full_flag(3)).stratum().unwrap(), pat(&[1, 2, 3], 0));
        let b = BetaData::standard(&pat(&[1, 2, 3], 1));
        assert!(b.points[0][2].is_zero() && b.points[1][2].is_zero());
        assert_eq!(b.stratum().unwrap(), pat(&[1, 2, 3], 1));
        let mut bad = b.clone();
        bad.points[0][2] = BetaEntry::Form { covectors: CMat::identity(3, 3), scale: Complex64::new(1.0, 0.0) };
        assert!(matches!(bad.stratum(), Err(Error::IllegalPattern(_))));
    }

    #[test]
    fn not_nested_detected() {
        let mut b = BetaData::standard(&MultiplicityPattern::full_flag(3));
        let mut f = CMat::zeros(1, 3);
        f[(0, 2)] = Complex64::new(1.0, 0.0);
        b.points[0][0] = BetaEntry::Form { covectors: f, scale: Complex64::new(1.0, 0.0) };
        let mut f2 = CMat::zeros(2, 3);
        f2[(0, 0)] = Complex64::new(1.0, 0.0);
        f2[(1, 1)] = Complex64::new(1.0, 0.0);
        b.points[0][1] = BetaEntry::Form { covectors: f2, scale: Complex64::new(1.0, 0.0) };
        assert!(matches!(b.flags(), Err(Error::NotNested(1, 2))));
        assert!(matches!(b.compatibility_quotients(), Err(Error::Incompatible(1, 2))));
    }

    #[test]
    fn gamma_reconstructs_and_rescales() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4;
        let f1 = haar(&mut rng, n).into_matrix();
        let f2 = haar(&mut rng, n).into_matrix();
        let b = BetaData::from_frames(&MultiplicityPattern::full_flag(n), &f1, &f2, |_, _| {
            Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0))
        });
        let [q1, _] = b.compatibility_quotients().unwrap();
        for step in &q1.steps[1..] {
            let rebuilt = wedge(step, &b.points[0][step.from - 1]);
            let target = &b.points[0][step.to - 1];
            let (x, y) = (rebuilt.plucker_coordinates(n, step.to), target.plucker_coordinates(n, step.to));
            let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10);
        }
        let c = Complex64::new(0.3, -1.2);
        let mut scaled = b.clone();
        scaled.points[0][1] = scaled.points[0][1].scaled(c);
        let [s1, _] = scaled.compatibility_quotients().unwrap();
        assert!((s1.steps[2].scale - q1.steps[2].scale / c).norm() < 1e-12);
        assert!((s1.steps[1].scale - q1.steps[1].scale * c).norm() < 1e-12);
    }

    #[test]
    fn unit_standard_gammas() {
        let b = BetaData::standard(&MultiplicityPattern::full_flag(3));
        let [q1, q2] = b.compatibility_quotients().unwrap();
        for g in q1.steps.iter().chain(&q2.steps) {
            assert!((g.scale - Complex64::new(1.0, 0.0)).norm() < 1e-14, "{g:?}");
        }
        let p = antidiagonal_identify(&b).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.iter().all(|x| (x.value - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn pairings_invariant_under_antidiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (sums, k) in [(vec![1, 2, 3, 4], 0), (vec![1, 3, 4], 0), (vec![1, 2, 4], 1)] {
            let p = pat(&sums, k);
            let f1 = haar(&mut rng, 4).into_matrix();
            let f2 = haar(&mut rng, 4).into_matrix();
            let b = BetaData::from_frames(&p, &f1, &f2, |_, _| Complex64::new(1.3, 0.4));
            let base = antidiagonal_identify(&b).unwrap();
            let t = TorusElement::random(&mut rng, 4);
            let moved = antidiagonal_identify(&torus_act_betas(&b, &t, &t.reversed())).unwrap();
            for (a, c) in base.iter().zip(&moved) {
                assert!((a.value - c.value).norm() < 1e-12);
            }
            let s = TorusElement::random(&mut rng, 4);
            let off = antidiagonal_identify(&torus_act_betas(&b, &t, &s)).unwrap();
            assert!(base.iter().zip(&off).any(|(a, c)| (a.value - c.value).norm() > 1e-6));
        }
    }

    #[test]
    fn asymmetric_rejected() {
        let mut b = BetaData::standard(&pat(&[1, 3], 0));
        b.points[1] = BetaData::standard(&pat(&[1, 3], 0)).points[0].clone();
        assert!(matches!(antidiagonal_identify(&b), Err(Error::AsymmetricStrata)));
    }

    #[test]
    fn torsion_minimal_case() {
        let b = BetaData::standard(&pat(&[1, 2], 1));
        let s = CMat::from_column_slice(2, 1, &[Complex64::new(1.0, 0.0), Complex64::default()]);
        let tb = torsion_betas(&b, 1, &s).unwrap();
        assert!((tb.contraction - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(tb.lifted_flag_dims().is_empty());
        let bad = CMat::from_column_slice(2, 1, &[Complex64::default(), Complex64::new(1.0, 0.0)]);
        assert!(matches!(torsion_betas(&b, 1, &bad), Err(Error::DegenerateTorsion(_))));
    }

    #[test]
    fn torsion_shifted_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = pat(&[1, 3, 4], 1);
        let f1 = haar(&mut rng, 4).into_matrix();
        let b = BetaData::from_frames(&p, &f1, &f1, |_, _| Complex64::new(0.7, 0.2));
        let t1 = 4 - 3;
        let s = CMat::from_fn(4, t1, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let tb = torsion_betas(&b, 1, &s).unwrap();
        assert_eq!(tb.lifted_flag_dims(), vec![1 + t1]);
        // β̃ evaluated on quotient vectors equals β contracted with s.
        let v = CMat::from_fn(3, 2, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        let mut full = CMat::zeros(4, 3);
        full.columns_mut(0, 1).copy_from(&s);
        full.columns_mut(1, 2).copy_from(&(&tb.quotient_basis * &v));
        let lhs = tb.entries[1].evaluate(&v);
        let rhs = b.points[0][2].evaluate(&full);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn serde_shape() {
        let b = BetaData::standard(&pat(&[1, 2], 1));
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.contains("{\"zero\":true}"));
        assert!(s.contains("\"covectors\""));
        let back: BetaData = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}
