//! Representation varieties cut out by the relation
//! `(∏[Cᵢ,Dᵢ]) B₁ A B₁⁻¹ B₂ A⁻¹ B₂⁻¹ = 1`, `A = exp(−2πi·diag α)`,
//! and by its disconnected variant
//! `(∏_{i≤h}[Cᵢ,Dᵢ]) B₁ A B₁⁻¹ = 1`, `(∏_{i>h}[Cᵢ,Dᵢ]) B₂ A⁻¹ B₂⁻¹ = 1`.
//!
//! Tangent vectors are right-trivialised: a variable `U` moves as `U·exp(X)`
//! with `X ∈ su(n)`, and α moves inside the Cartan.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alcove::{AlcovePoint, MultiplicityPattern, PATTERN_TOL};
use crate::error::{Error, Result};
use crate::lie::{
    cartan_basis, commutator_algebra, eigen_classes, exp_skew, haar, holonomy_of, inner, project_to_alcove,
    random_in_span, stabilizer_algebra, su_basis, CMat, GroupElement, TorusElement, EQ_TOL, RANK_REL_TOL,
};

/// Residual reached by a successful solve.
pub const SOLVE_TOL: f64 = 1e-10;
/// Default multi-start budget.
pub const MAX_STARTS: usize = 50;
/// Orbit distance below which two points are reported equivalent.
pub const IMPLODE_TOL: f64 = 1e-7;
/// Modulus below which an entry is skipped during canonicalisation.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// One relation, `g − 1` handles.
    Connected,
    /// Two relations; handles `1..=h` sit on the first component, the rest on the second.
    Disconnected { h: usize },
}

/// A point `(α, B₁, B₂, (Cᵢ, Dᵢ), t)` of the family before quotienting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepPoint {
    pub alpha: AlcovePoint,
    pub b1: GroupElement,
    pub b2: GroupElement,
    pub handles: Vec<(GroupElement, GroupElement)>,
    pub t: Complex64,
    pub topology: Topology,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Letter {
    Var(usize),
    VarInv(usize),
    Hol,
    HolInv,
}

impl RepPoint {
    /// All factors equal to the identity.
    pub fn trivial(g: usize, alpha: AlcovePoint, t: Complex64, topology: Topology) -> Result<Self> {
        let n = alpha.n();
        let handles = match topology {
            Topology::Connected => g.checked_sub(1),
            Topology::Disconnected { h } => (h >= 1 && h < g).then_some(g),
        }
        .ok_or_else(|| Error::InvalidInput(format!("genus {g} does not fit {topology:?}")))?;
        let id = GroupElement::identity(n);
        let p = Self {
            alpha,
            b1: id.clone(),
            b2: id.clone(),
            handles: vec![(id.clone(), id); handles],
            t,
            topology,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.alpha.n()
    }

    pub fn genus(&self) -> usize {
        match self.topology {
            Topology::Connected => self.handles.len() + 1,
            Topology::Disconnected { .. } => self.handles.len(),
        }
    }

    /// Checks dimensions and the handle count against the topology.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let all_n = self.b1.n() == n
            && self.b2.n() == n
            && self.handles.iter().all(|(c, d)| c.n() == n && d.n() == n);
        if !all_n {
            return Err(Error::InvalidInput("matrix sizes disagree with α".into()));
        }
        match self.topology {
            Topology::Connected if self.handles.is_empty() => {
                Err(Error::InvalidInput("the connected presentation needs g ≥ 2".into()))
            }
            Topology::Disconnected { h } if h == 0 || h >= self.handles.len() => {
                Err(Error::InvalidInput(format!("split {h} of {} handles", self.handles.len())))
            }
            _ => Ok(()),
        }
    }

    fn variables(&self) -> Vec<&GroupElement> {
        let mut v = vec![&self.b1, &self.b2];
        for (c, d) in &self.handles {
            v.push(c);
            v.push(d);
        }
        v
    }

    fn variables_mut(&mut self) -> Vec<&mut GroupElement> {
        let mut v = vec![&mut self.b1, &mut self.b2];
        for (c, d) in self.handles.iter_mut() {
            v.push(c);
            v.push(d);
        }
        v
    }

    fn words(&self) -> Vec<Vec<Letter>> {
        let commutators = |range: std::ops::Range<usize>| {
            range.flat_map(|i| {
                let (c, d) = (2 + 2 * i, 3 + 2 * i);
                [Letter::Var(c), Letter::Var(d), Letter::VarInv(c), Letter::VarInv(d)]
            })
        };
        let g = self.handles.len();
        match self.topology {
            Topology::Connected => {
                let mut w: Vec<Letter> = commutators(0..g).collect();
                w.extend([Letter::Var(0), Letter::Hol, Letter::VarInv(0), Letter::Var(1), Letter::HolInv, Letter::VarInv(1)]);
                vec![w]
            }
            Topology::Disconnected { h } => {
                let mut w1: Vec<Letter> = commutators(0..h).collect();
                w1.extend([Letter::Var(0), Letter::Hol, Letter::VarInv(0)]);
                let mut w2: Vec<Letter> = commutators(h..g).collect();
                w2.extend([Letter::Var(1), Letter::HolInv, Letter::VarInv(1)]);
                vec![w1, w2]
            }
        }
    }

    /// Values of the relation words.
    pub fn relation_values(&self) -> Vec<GroupElement> {
        let n = self.n();
        let a = holonomy_of(&self.alpha);
        let a_inv = a.inverse();
        let vars = self.variables();
        let inverses: Vec<GroupElement> = vars.iter().map(|v| v.inverse()).collect();
        self.words()
            .iter()
            .map(|w| {
                let factors: Vec<&GroupElement> = w
                    .iter()
                    .map(|l| match *l {
                        Letter::Var(i) => vars[i],
                        Letter::VarInv(i) => &inverses[i],
                        Letter::Hol => &a,
                        Letter::HolInv => &a_inv,
                    })
                    .collect();
                GroupElement::product(n, factors)
            })
            .collect()
    }

    /// Per-word residuals `‖W − I‖_F`.
    pub fn component_residuals(&self) -> Vec<f64> {
        let n = self.n();
        self.relation_values().iter().map(|w| (w.matrix() - CMat::identity(n, n)).norm()).collect()
    }
}

/// `‖W − I‖_F`, combined in quadrature over the relation words.
pub fn relation_residual(p: &RepPoint) -> f64 {
    p.component_residuals().iter().map(|r| r * r).sum::<f64>().sqrt()
}

/// Word values together with `δW` for every tangent direction.
struct Linearisation {
    values: Vec<CMat>,
    /// `derivs[word][column]`.
    derivs: Vec<Vec<CMat>>,
    /// `W⁻¹δW` in the same layout.
    log_derivs: Vec<Vec<CMat>>,
}

fn alpha_directions(n: usize) -> Vec<DVector<f64>> {
    su_basis(n)
        .into_iter()
        .skip(n * (n - 1))
        .map(|h| DVector::from_iterator(n, (0..n).map(|i| h[(i, i)].im)))
        .collect()
}

fn linearise(p: &RepPoint, include_alpha: bool) -> Linearisation {
    let n = p.n();
    let basis = su_basis(n);
    let dim = basis.len();
    let vars = p.variables();
    let inverses: Vec<CMat> = vars.iter().map(|v| v.matrix().adjoint()).collect();
    let a = holonomy_of(&p.alpha).into_matrix();
    let a_inv = a.adjoint();
    let alpha_dirs = if include_alpha { alpha_directions(n) } else { Vec::new() };
    let ncols = vars.len() * dim + alpha_dirs.len();

    let mut values = Vec::new();
    let mut derivs = Vec::new();
    let mut log_derivs = Vec::new();
    for word in p.words() {
        let mats: Vec<&CMat> = word
            .iter()
            .map(|l| match *l {
                Letter::Var(i) => vars[i].matrix(),
                Letter::VarInv(i) => &inverses[i],
                Letter::Hol => &a,
                Letter::HolInv => &a_inv,
            })
            .collect();
        let m = mats.len();
        // prefix[k] = L₀⋯L_{k−1}, suffix[k] = L_{k+1}⋯L_{m−1}.
        let mut prefix = vec![CMat::identity(n, n)];
        for k in 0..m {
            let next = &prefix[k] * mats[k];
            prefix.push(next);
        }
        let mut suffix = vec![CMat::identity(n, n); m];
        for k in (0..m.saturating_sub(1)).rev() {
            suffix[k] = mats[k + 1] * &suffix[k + 1];
        }
        let w = prefix[m].clone();
        let w_inv = w.adjoint();
        let mut d = vec![CMat::zeros(n, n); ncols];
        for (k, letter) in word.iter().enumerate() {
            let left = &prefix[k + 1];
            match *letter {
                Letter::Var(i) | Letter::VarInv(i) => {
                    for (b, x) in basis.iter().enumerate() {
                        let y = if let Letter::Var(_) = letter {
                            x.clone()
                        } else {
                            -(vars[i].matrix() * x * &inverses[i])
                        };
                        d[i * dim + b] += left * y * &suffix[k];
                    }
                }
                Letter::Hol | Letter::HolInv => {
                    let sign = if *letter == Letter::Hol { -1.0 } else { 1.0 };
                    for (j, da) in alpha_dirs.iter().enumerate() {
                        let y = CMat::from_diagonal(&DVector::from_iterator(
                            n,
                            da.iter().map(|&v| Complex64::new(0.0, sign * 2.0 * PI * v)),
                        ));
                        d[vars.len() * dim + j] += left * y * &suffix[k];
                    }
                }
            }
        }
        log_derivs.push(d.iter().map(|x| &w_inv * x).collect());
        derivs.push(d);
        values.push(w);
    }
    Linearisation { values, derivs, log_derivs }
}

/// Derivative of the relation map at `p` in su(n) coordinates: one block of
/// `n² − 1` rows per word, columns for every variable direction and, if
/// requested, the `n − 1` Cartan directions of α.
pub fn relation_jacobian(p: &RepPoint, include_alpha: bool) -> DMatrix<f64> {
    let n = p.n();
    let basis = su_basis(n);
    let lin = linearise(p, include_alpha);
    let dim = basis.len();
    let rows = dim * lin.values.len();
    let cols = lin.log_derivs[0].len();
    let mut j = DMatrix::zeros(rows, cols);
    for (w, cols_w) in lin.log_derivs.iter().enumerate() {
        for (c, z) in cols_w.iter().enumerate() {
            for (b, e) in basis.iter().enumerate() {
                j[(w * dim + b, c)] = inner(e, z);
            }
        }
    }
    j
}

// ---------------------------------------------------------------------------
// Levenberg–Marquardt on products of groups.

pub(crate) trait LeastSquares {
    type State: Clone;
    fn residual(&self, s: &Self::State) -> DVector<f64>;
    fn jacobian(&self, s: &Self::State) -> DMatrix<f64>;
    fn retract(&self, s: &Self::State, step: &DVector<f64>) -> Self::State;
}

pub(crate) struct LmOutcome<S> {
    pub state: S,
    pub residual: f64,
}

pub(crate) fn levenberg_marquardt<P: LeastSquares>(
    problem: &P,
    start: P::State,
    target: f64,
    max_iter: usize,
) -> LmOutcome<P::State> {
    let mut state = start;
    let mut r = problem.residual(&state);
    let mut norm = r.norm();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if norm <= target {
            break;
        }
        let j = problem.jacobian(&state);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let grad = &jt * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut lhs = jtj.clone();
            let scale = jtj.diagonal().max().max(1.0);
            for i in 0..lhs.nrows() {
                lhs[(i, i)] += lambda * scale;
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = -chol.solve(&grad);
            let candidate = problem.retract(&state, &step);
            let rc = problem.residual(&candidate);
            let nc = rc.norm();
            if nc < norm {
                state = candidate;
                r = rc;
                let gain = norm - nc;
                norm = nc;
                lambda = (lambda / 3.0).max(1e-15);
                improved = gain > 1e-10 * norm || norm <= target;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    LmOutcome { state, residual: norm }
}

fn flatten(m: &CMat, out: &mut Vec<f64>) {
    for z in m.iter() {
        out.push(z.re);
        out.push(z.im);
    }
}

struct RelationProblem {
    basis: Vec<CMat>,
}

impl LeastSquares for RelationProblem {
    type State = RepPoint;

    fn residual(&self, s: &RepPoint) -> DVector<f64> {
        let n = s.n();
        let mut out = Vec::new();
        for w in s.relation_values() {
            flatten(&(w.matrix() - CMat::identity(n, n)), &mut out);
        }
        DVector::from_vec(out)
    }

    fn jacobian(&self, s: &RepPoint) -> DMatrix<f64> {
        let lin = linearise(s, false);
        let cols = lin.derivs[0].len();
        let n = s.n();
        let rows = 2 * n * n * lin.derivs.len();
        let mut j = DMatrix::zeros(rows, cols);
        for (w, dw) in lin.derivs.iter().enumerate() {
            for (c, d) in dw.iter().enumerate() {
                for (k, z) in d.iter().enumerate() {
                    j[(w * 2 * n * n + 2 * k, c)] = z.re;
                    j[(w * 2 * n * n + 2 * k + 1, c)] = z.im;
                }
            }
        }
        j
    }

    fn retract(&self, s: &RepPoint, step: &DVector<f64>) -> RepPoint {
        let mut next = s.clone();
        let dim = self.basis.len();
        let n = s.n();
        for (i, v) in next.variables_mut().into_iter().enumerate() {
            let mut x = CMat::zeros(n, n);
            for (b, e) in self.basis.iter().enumerate() {
                x += e * Complex64::new(step[i * dim + b], 0.0);
            }
            *v = v.retract(&x);
        }
        next
    }
}

/// Options for [`solve_point`].
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_starts: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_starts: MAX_STARTS, tol: SOLVE_TOL, max_iter: 400 }
    }
}

/// Multi-start Levenberg–Marquardt on the relation with α and `t` fixed.
/// Each start is Haar-random; converged points are polished towards machine
/// precision before being returned.
pub fn solve_point(
    seed: u64,
    g: usize,
    alpha: &AlcovePoint,
    t: Complex64,
    topology: Topology,
    opts: SolveOptions,
) -> Result<RepPoint> {
    let template = RepPoint::trivial(g, alpha.clone(), t, topology)?;
    let n = alpha.n();
    let problem = RelationProblem { basis: su_basis(n) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..opts.max_starts {
        let mut start = template.clone();
        for v in start.variables_mut() {
            *v = haar(&mut rng, n);
        }
        let out = levenberg_marquardt(&problem, start, 1e-14, opts.max_iter);
        if relation_residual(&out.state) <= opts.tol {
            return Ok(out.state);
        }
        best = best.min(out.residual);
    }
    Err(Error::NoConvergence { starts: opts.max_starts, best_residual: best })
}

/// Solves the connected relation for genus `g`.
pub fn solve_relation(seed: u64, g: usize, n: usize, alpha: &AlcovePoint, t: Complex64) -> Result<RepPoint> {
    if alpha.n() != n {
        return Err(Error::InvalidInput(format!("α has length {}, expected {n}", alpha.n())));
    }
    solve_point(seed, g, alpha, t, Topology::Connected, SolveOptions::default())
}

/// Solves the two one-puncture relations of the disconnected presentation at `t = 0`.
pub fn build_disconnected(seed: u64, h: usize, g: usize, n: usize, alpha: &AlcovePoint) -> Result<RepPoint> {
    if alpha.n() != n {
        return Err(Error::InvalidInput(format!("α has length {}, expected {n}", alpha.n())));
    }
    solve_point(seed, g, alpha, Complex64::default(), Topology::Disconnected { h }, SolveOptions::default())
}

// ---------------------------------------------------------------------------
// Symmetries.

/// The group acting on points of a given stratum and `t`.
#[derive(Clone, Debug)]
pub struct SymmetryDescriptor {
    pub t_is_zero: bool,
    pub pattern: MultiplicityPattern,
    /// Number of SU(n) conjugation factors (one per connected component).
    pub conjugations: usize,
    /// Algebra acting by right multiplication on both `B₁` and `B₂` at once.
    pub right_both: Vec<CMat>,
    /// Algebra acting on `B₁` alone.
    pub right_b1: Vec<CMat>,
    /// Algebra acting on `B₂` alone.
    pub right_b2: Vec<CMat>,
}

impl SymmetryDescriptor {
    /// `Stab(A)` on both `B`'s for `t ≠ 0`; `T × [Stab, Stab] × [Stab, Stab]` at `t = 0`.
    pub fn for_point(p: &RepPoint) -> Self {
        let n = p.n();
        let t_is_zero = p.t.norm() == 0.0;
        let conjugations = match p.topology {
            Topology::Connected => 1,
            Topology::Disconnected { .. } => 2,
        };
        let pattern = p.alpha.pattern(PATTERN_TOL);
        if t_is_zero {
            let comm = commutator_algebra(&p.alpha, PATTERN_TOL);
            Self {
                t_is_zero,
                pattern,
                conjugations,
                right_both: cartan_basis(n),
                right_b1: comm.clone(),
                right_b2: comm,
            }
        } else {
            Self {
                t_is_zero,
                pattern,
                conjugations,
                right_both: stabilizer_algebra(&p.alpha, PATTERN_TOL),
                right_b1: Vec::new(),
                right_b2: Vec::new(),
            }
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn group_dim(&self) -> usize {
        let n = self.n();
        self.conjugations * (n * n - 1) + self.right_both.len() + self.right_b1.len() + self.right_b2.len()
    }
}

fn numerical_rank(m: &DMatrix<f64>, what: &str) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(0);
    }
    let thr = RANK_REL_TOL * smax;
    if let Some(s) = sv.iter().find(|&&s| s > thr / 10.0 && s < thr * 10.0) {
        return Err(Error::RankAmbiguous(format!(
            "{what}: singular value {:.3e} within a decade of the threshold {thr:.3e}",
            s
        )));
    }
    Ok(sv.iter().filter(|&&s| s > thr).count())
}

/// Infinitesimal action of the symmetry group in the column layout of
/// [`relation_jacobian`] (with the α columns, which the action leaves fixed).
pub fn orbit_generators(p: &RepPoint, sym: &SymmetryDescriptor) -> DMatrix<f64> {
    let n = p.n();
    let basis = su_basis(n);
    let dim = basis.len();
    let vars = p.variables();
    let nvars = vars.len();
    let ncols = nvars * dim + (n - 1);
    let coords = |x: &CMat| -> Vec<f64> { basis.iter().map(|e| inner(e, x)).collect() };
    let mut gens: Vec<Vec<f64>> = Vec::new();
    let component_of = |var: usize| -> usize {
        match p.topology {
            Topology::Connected => 0,
            Topology::Disconnected { h } => match var {
                0 => 0,
                1 => 1,
                v => usize::from((v - 2) / 2 >= h),
            },
        }
    };
    // Conjugation U ↦ gUg⁻¹ on handles and B ↦ gB on base-point changes.
    for comp in 0..sym.conjugations {
        for xi in &basis {
            let mut col = vec![0.0; ncols];
            for (i, v) in vars.iter().enumerate() {
                if component_of(i) != comp {
                    continue;
                }
                let conj = v.matrix().adjoint() * xi * v.matrix();
                let x = if i < 2 { conj } else { conj - xi };
                col[i * dim..(i + 1) * dim].copy_from_slice(&coords(&x));
            }
            gens.push(col);
        }
    }
    let mut push_right = |alg: &[CMat], which: &[usize]| {
        for eta in alg {
            let mut col = vec![0.0; ncols];
            for &i in which {
                col[i * dim..(i + 1) * dim].copy_from_slice(&coords(eta));
            }
            gens.push(col);
        }
    };
    push_right(&sym.right_both, &[0, 1]);
    push_right(&sym.right_b1, &[0]);
    push_right(&sym.right_b2, &[1]);
    let mut m = DMatrix::zeros(ncols, gens.len());
    for (c, g) in gens.iter().enumerate() {
        for (r, v) in g.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    m
}

/// Breakdown of a tangent dimension count.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub kernel: usize,
    pub orbit: usize,
    pub group_dim: usize,
    pub quotient: usize,
}

/// `dim ker D(relation) − dim(orbit)` at a solved point with generic α.
pub fn tangent_dimension(p: &RepPoint) -> Result<usize> {
    tangent_dimension_report(p).map(|r| r.quotient)
}

pub fn tangent_dimension_report(p: &RepPoint) -> Result<DimensionReport> {
    p.validate()?;
    if !p.alpha.pattern(PATTERN_TOL).is_generic() {
        return Err(Error::RankAmbiguous(format!(
            "α = {:?} lies on a wall of the alcove; the count is stated for generic holonomy",
            p.alpha.as_slice()
        )));
    }
    let residual = relation_residual(p);
    if residual > SOLVE_TOL {
        return Err(Error::InvalidInput(format!("point is not solved (residual {residual:.3e})")));
    }
    let j = relation_jacobian(p, true);
    let kernel = j.ncols() - numerical_rank(&j, "relation differential")?;
    let sym = SymmetryDescriptor::for_point(p);
    let orbit = numerical_rank(&orbit_generators(p, &sym), "orbit map")?;
    Ok(DimensionReport { kernel, orbit, group_dim: sym.group_dim(), quotient: kernel - orbit })
}

fn block_dets(m: &CMat, classes: &[Vec<usize>]) -> Vec<Complex64> {
    classes
        .iter()
        .map(|c| {
            let k = c.len();
            DMatrix::from_fn(k, k, |i, j| m[(c[i], c[j])]).determinant()
        })
        .collect()
}

fn in_stabilizer(m: &GroupElement, a: &GroupElement) -> bool {
    (m.matrix() * a.matrix() - a.matrix() * m.matrix()).norm() <= EQ_TOL
}

/// Checks that `μ, ν` may act on `(B₁, B₂)` at the point's `t`.
pub fn check_legal(p: &RepPoint, mu: &GroupElement, nu: &GroupElement) -> Result<()> {
    let a = holonomy_of(&p.alpha);
    if !in_stabilizer(mu, &a) || !in_stabilizer(nu, &a) {
        return Err(Error::IllegalSymmetry("μ and ν must commute with A".into()));
    }
    if p.t.norm() != 0.0 {
        if mu.distance(nu) > EQ_TOL {
            return Err(Error::IllegalSymmetry("for t ≠ 0 the same element of Stab(A) acts on both B's".into()));
        }
    } else {
        // μ = τμ′, ν = τν′ with μ′, ν′ ∈ [Stab, Stab] iff the block determinants agree.
        let classes = eigen_classes(&p.alpha, PATTERN_TOL);
        let dm = block_dets(mu.matrix(), &classes);
        let dn = block_dets(nu.matrix(), &classes);
        if dm.iter().zip(&dn).any(|(x, y)| (x - y).norm() > EQ_TOL) {
            return Err(Error::IllegalSymmetry(
                "at t = 0, μ and ν must differ by an element of [Stab(A), Stab(A)]".into(),
            ));
        }
    }
    Ok(())
}

/// `(A, gB₁μτ, gB₂ντ, (gCᵢg⁻¹, gDᵢg⁻¹), t)` after a legality check on `μ, ν`.
pub fn gauge_act(
    p: &RepPoint,
    g: &GroupElement,
    mu: &GroupElement,
    nu: &GroupElement,
    tau: &TorusElement,
) -> Result<RepPoint> {
    gauge_act_split(p, g, g, mu, nu, tau)
}

/// As [`gauge_act`], with independent conjugators on the two components of
/// the disconnected presentation. For connected points `g₂` must equal `g₁`.
pub fn gauge_act_split(
    p: &RepPoint,
    g1: &GroupElement,
    g2: &GroupElement,
    mu: &GroupElement,
    nu: &GroupElement,
    tau: &TorusElement,
) -> Result<RepPoint> {
    check_legal(p, mu, nu)?;
    if p.topology == Topology::Connected && g1.distance(g2) > EQ_TOL {
        return Err(Error::IllegalSymmetry("a connected point has a single conjugator".into()));
    }
    let t = tau.to_group_element();
    let mut q = p.clone();
    q.b1 = &(&(g1 * &p.b1) * mu) * &t;
    q.b2 = &(&(g2 * &p.b2) * nu) * &t;
    let h = match p.topology {
        Topology::Connected => usize::MAX,
        Topology::Disconnected { h } => h,
    };
    for (i, (c, d)) in q.handles.iter_mut().enumerate() {
        let g = if i < h { g1 } else { g2 };
        *c = g.conjugate(c);
        *d = g.conjugate(d);
    }
    Ok(q)
}

/// Right multiplication `B₁ ↦ B₁t₁`, `B₂ ↦ B₂t₂`.
pub fn torus_act(p: &RepPoint, t1: &TorusElement, t2: &TorusElement) -> RepPoint {
    let mut q = p.clone();
    q.b1 = &p.b1 * &t1.to_group_element();
    q.b2 = &p.b2 * &t2.to_group_element();
    q
}

/// `(α, −R(α))`.
pub fn moment_map(p: &RepPoint) -> (AlcovePoint, AlcovePoint) {
    (p.alpha.clone(), p.alpha.reversal())
}

/// Representative of the orbit under `τ ↦ (B₁τ, B₂τ)`: for each of the first
/// `n − 1` columns, the entry in the first row of `B₁` is made real positive,
/// falling through to the first row of `B₂` and then to lower rows when an
/// entry has modulus below [`PIVOT_TOL`]; the last phase follows from `det τ = 1`.
pub fn antidiagonal_reduce(p: &RepPoint) -> RepPoint {
    let n = p.n();
    let mut angles = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let pivot = (0..n)
            .flat_map(|i| [p.b1.matrix()[(i, j)], p.b2.matrix()[(i, j)]])
            .find(|z| z.norm() > PIVOT_TOL)
            .unwrap_or(Complex64::new(1.0, 0.0));
        angles.push(-pivot.arg());
    }
    let tau = TorusElement::from_free_angles(&angles);
    torus_act(p, &tau, &tau)
}

// ---------------------------------------------------------------------------
// Implosion equivalence.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    /// A witness with orbit distance below the tolerance was found.
    Certified,
    /// No witness within the budget; not a proof of inequivalence.
    SearchExhausted,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplosionReport {
    pub equivalent: bool,
    pub distance: f64,
    pub starts_used: usize,
    pub confidence: Confidence,
}

#[derive(Clone)]
struct OrbitState {
    conj: Vec<GroupElement>,
    both: GroupElement,
    s1: GroupElement,
    s2: GroupElement,
}

struct OrbitProblem<'a> {
    p: &'a RepPoint,
    q: &'a RepPoint,
    sym: SymmetryDescriptor,
    basis: Vec<CMat>,
}

impl OrbitProblem<'_> {
    fn apply(&self, s: &OrbitState) -> RepPoint {
        let p = self.p;
        let mut out = p.clone();
        let g2 = s.conj.last().unwrap();
        out.b1 = &(&(&s.conj[0] * &p.b1) * &s.both) * &s.s1;
        out.b2 = &(&(g2 * &p.b2) * &s.both) * &s.s2;
        let h = match p.topology {
            Topology::Connected => usize::MAX,
            Topology::Disconnected { h } => h,
        };
        for (i, (c, d)) in out.handles.iter_mut().enumerate() {
            let g = if i < h { &s.conj[0] } else { g2 };
            *c = g.conjugate(c);
            *d = g.conjugate(d);
        }
        out
    }

    fn dim(&self) -> usize {
        self.sym.conjugations * self.basis.len()
            + self.sym.right_both.len()
            + self.sym.right_b1.len()
            + self.sym.right_b2.len()
    }
}

fn point_difference(a: &RepPoint, b: &RepPoint) -> DVector<f64> {
    let mut out = Vec::new();
    for (x, y) in a.variables().iter().zip(b.variables()) {
        flatten(&(x.matrix() - y.matrix()), &mut out);
    }
    DVector::from_vec(out)
}

fn span_exp(alg: &[CMat], coeffs: &[f64], n: usize) -> CMat {
    let mut x = CMat::zeros(n, n);
    for (e, c) in alg.iter().zip(coeffs) {
        x += e * Complex64::new(*c, 0.0);
    }
    exp_skew(&x)
}

impl LeastSquares for OrbitProblem<'_> {
    type State = OrbitState;

    fn residual(&self, s: &OrbitState) -> DVector<f64> {
        point_difference(&self.apply(s), self.q)
    }

    fn jacobian(&self, s: &OrbitState) -> DMatrix<f64> {
        let d = self.dim();
        let h = 1e-6;
        let r0 = self.residual(s);
        let mut j = DMatrix::zeros(r0.len(), d);
        for k in 0..d {
            let mut e = DVector::zeros(d);
            e[k] = h;
            let plus = self.residual(&self.retract(s, &e));
            e[k] = -h;
            let minus = self.residual(&self.retract(s, &e));
            j.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        j
    }

    fn retract(&self, s: &OrbitState, step: &DVector<f64>) -> OrbitState {
        let n = self.p.n();
        let dim = self.basis.len();
        let mut next = s.clone();
        let mut off = 0;
        for g in next.conj.iter_mut() {
            let e = span_exp(&self.basis, &step.as_slice()[off..off + dim], n);
            *g = GroupElement::from_matrix_projected(g.matrix() * e).expect("unitary update");
            off += dim;
        }
        let mut update = |m: &mut GroupElement, alg: &[CMat]| {
            let e = span_exp(alg, &step.as_slice()[off..off + alg.len()], n);
            *m = GroupElement::from_matrix_projected(m.matrix() * e).expect("unitary update");
            off += alg.len();
        };
        update(&mut next.both, &self.sym.right_both);
        update(&mut next.s1, &self.sym.right_b1);
        update(&mut next.s2, &self.sym.right_b2);
        next
    }
}

/// Semi-decision of whether `q` lies in the orbit of `p` under the symmetry
/// group of `p`'s stratum: multi-start Levenberg–Marquardt over
/// `(g, τ, μ′, ν′)` (or `(g, μ)` with `μ ∈ Stab(A)` for `t ≠ 0`).
///
/// The first start aligns the first handle `C₁` of both points through their
/// alcove conjugators; later starts add a random torus twist or are fully random.
pub fn implode_equivalent(p: &RepPoint, q: &RepPoint, budget: usize, seed: u64) -> Result<ImplosionReport> {
    p.validate()?;
    q.validate()?;
    if p.topology != q.topology || p.handles.len() != q.handles.len() || p.n() != q.n() {
        return Err(Error::InvalidInput("points live on different presentations".into()));
    }
    let same_alpha = p.alpha.as_slice().iter().zip(q.alpha.as_slice()).all(|(a, b)| (a - b).abs() <= EQ_TOL);
    if !same_alpha || (p.t - q.t).norm() > EQ_TOL {
        return Err(Error::InvalidInput("points have different alcove data or t".into()));
    }
    let n = p.n();
    let sym = SymmetryDescriptor::for_point(p);
    let problem = OrbitProblem { p, q, sym: sym.clone(), basis: su_basis(n) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Alignment of the first handle of each component.
    let first_handles: Vec<usize> = match p.topology {
        Topology::Connected => vec![0],
        Topology::Disconnected { h } => vec![0, h],
    };
    let mut aligners = Vec::new();
    for &i in &first_handles {
        let up = project_to_alcove(&p.handles[i].0)?.conjugator;
        let uq = project_to_alcove(&q.handles[i].0)?.conjugator;
        aligners.push((uq.inverse(), up));
    }

    let mut best = f64::INFINITY;
    let mut used = 0;
    for start in 0..budget.max(1) {
        used = start + 1;
        let conj: Vec<GroupElement> = aligners
            .iter()
            .map(|(uq_inv, up)| match start {
                0 => uq_inv * up,
                s if s % 2 == 1 => {
                    let phi = TorusElement::random(&mut rng, n).to_group_element();
                    &(uq_inv * &phi) * up
                }
                _ => haar(&mut rng, n),
            })
            .collect();
        let random_in = |rng: &mut ChaCha8Rng, alg: &[CMat]| {
            if start == 0 || alg.is_empty() {
                GroupElement::identity(n)
            } else {
                random_in_span(rng, n, alg, 1.0)
            }
        };
        let state = OrbitState {
            conj,
            both: random_in(&mut rng, &sym.right_both),
            s1: random_in(&mut rng, &sym.right_b1),
            s2: random_in(&mut rng, &sym.right_b2),
        };
        let out = levenberg_marquardt(&problem, state, 1e-13, 200);
        best = best.min(out.residual);
        if best < IMPLODE_TOL {
            break;
        }
    }
    let equivalent = best < IMPLODE_TOL;
    Ok(ImplosionReport {
        equivalent,
        distance: best,
        starts_used: used,
        confidence: if equivalent { Confidence::Certified } else { Confidence::SearchExhausted },
    })
}

/// A random legal `(μ, ν, τ)` for [`gauge_act`] at the point's `t`.
pub fn random_legal_symmetry<R: Rng + ?Sized>(
    rng: &mut R,
    p: &RepPoint,
) -> (GroupElement, GroupElement, TorusElement) {
    let n = p.n();
    let tau = TorusElement::random(rng, n);
    if p.t.norm() != 0.0 {
        let mu = random_in_span(rng, n, &stabilizer_algebra(&p.alpha, PATTERN_TOL), 1.0);
        (mu.clone(), mu, tau)
    } else {
        let comm = commutator_algebra(&p.alpha, PATTERN_TOL);
        let sigma = TorusElement::random(rng, n).to_group_element();
        let mu = &sigma * &random_in_span(rng, n, &comm, 1.0);
        let nu = &sigma * &random_in_span(rng, n, &comm, 1.0);
        (mu, nu, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::random_group_element;

    fn generic_alpha(seed: u64, n: usize) -> AlcovePoint {
        AlcovePoint::sample(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }

    #[test]
    fn trivial_residuals() {
        let p = RepPoint::trivial(2, AlcovePoint::zero(2), Complex64::default(), Topology::Connected).unwrap();
        assert_eq!(relation_residual(&p), 0.0);
        let mut q = RepPoint::trivial(3, generic_alpha(1, 3), Complex64::new(0.1, 0.0), Topology::Connected).unwrap();
        assert!(relation_residual(&q) < 1e-15);
        q.b1 = random_group_element(3, 3);
        let r = relation_residual(&q);
        assert!(r > 1e-3);
        assert_eq!(r, relation_residual(&q.clone()));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut p = RepPoint::trivial(2, generic_alpha(2, 3), Complex64::new(0.3, 0.0), Topology::Connected).unwrap();
        for v in p.variables_mut() {
            *v = haar(&mut rng, 3);
        }
        let problem = RelationProblem { basis: su_basis(3) };
        let j = problem.jacobian(&p);
        let h = 1e-6;
        for c in [0, 5, 9, 17, 31] {
            let mut e = DVector::zeros(j.ncols());
            e[c] = h;
            let plus = problem.residual(&problem.retract(&p, &e));
            e[c] = -h;
            let minus = problem.residual(&problem.retract(&p, &e));
            let fd = (plus - minus) / (2.0 * h);
            assert!((fd - j.column(c)).norm() < 1e-6, "column {c}");
        }
    }

    #[test]
    fn solver_converges_and_counts() {
        let alpha = generic_alpha(3, 2);
        let p = solve_relation(7, 2, 2, &alpha, Complex64::new(0.5, 0.0)).unwrap();
        assert!(relation_residual(&p) <= SOLVE_TOL);
        let rep = tangent_dimension_report(&p).unwrap();
        assert_eq!(rep.quotient, 6, "{rep:?}");
        let mut p0 = p.clone();
        p0.t = Complex64::default();
        assert_eq!(tangent_dimension(&p0).unwrap(), 6);
    }

    #[test]
    fn disconnected_counts() {
        let alpha = generic_alpha(5, 2);
        let p = build_disconnected(1, 1, 2, 2, &alpha).unwrap();
        assert!(p.component_residuals().iter().all(|r| *r <= SOLVE_TOL));
        assert_eq!(tangent_dimension(&p).unwrap(), 6);
    }

    #[test]
    fn refuses_walls() {
        let alpha = AlcovePoint::new(vec![0.25, 0.25, -0.5]).unwrap();
        let p = solve_relation(2, 2, 3, &alpha, Complex64::new(0.5, 0.0)).unwrap();
        assert!(matches!(tangent_dimension(&p), Err(Error::RankAmbiguous(_))));
    }

    #[test]
    fn symmetry_bookkeeping() {
        for (sums, n) in [(vec![1, 2, 3], 3), (vec![2, 3], 3), (vec![2, 4], 4)] {
            let pattern = MultiplicityPattern::from_partial_sums(&sums, 0).unwrap();
            let alpha = AlcovePoint::sample_in_face(&mut ChaCha8Rng::seed_from_u64(1), &pattern).unwrap();
            let mut p = RepPoint::trivial(2, alpha, Complex64::new(0.2, 0.0), Topology::Connected).unwrap();
            let nonzero = SymmetryDescriptor::for_point(&p).group_dim();
            p.t = Complex64::default();
            let zero = SymmetryDescriptor::for_point(&p).group_dim();
            let c = crate::lie::commutator_subgroup_dim(&pattern);
            let stab: usize = pattern.holonomy_blocks().iter().map(|m| m * m).sum::<usize>() - 1;
            assert_eq!(zero + stab, nonzero + 2 * c + (n - 1));
            assert_eq!(zero, (n * n - 1) + (n - 1) + 2 * c);
        }
    }

    #[test]
    fn actions_preserve_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alpha = generic_alpha(9, 3);
        for t in [Complex64::new(0.2, 0.0), Complex64::default()] {
            let p = solve_relation(3, 2, 3, &alpha, t).unwrap();
            let r0 = relation_residual(&p);
            let (mu, nu, tau) = random_legal_symmetry(&mut rng, &p);
            let q = gauge_act(&p, &haar(&mut rng, 3), &mu, &nu, &tau).unwrap();
            assert!((relation_residual(&q) - r0).abs() < 1e-12);
            let s = TorusElement::random(&mut rng, 3);
            let q2 = torus_act(&p, &tau, &s);
            assert!((relation_residual(&q2) - r0).abs() < 1e-12);
            assert_eq!(moment_map(&q2), moment_map(&p));
        }
    }

    #[test]
    fn illegal_actions_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let alpha = generic_alpha(4, 3);
        let p = RepPoint::trivial(2, alpha, Complex64::new(0.3, 0.0), Topology::Connected).unwrap();
        let id = GroupElement::identity(3);
        let tau = TorusElement::identity(3);
        let h = haar(&mut rng, 3);
        assert!(matches!(gauge_act(&p, &id, &h, &h, &tau), Err(Error::IllegalSymmetry(_))));
        let s = TorusElement::random(&mut rng, 3).to_group_element();
        assert!(matches!(gauge_act(&p, &id, &s, &id, &tau), Err(Error::IllegalSymmetry(_))));
        let mut p0 = p.clone();
        p0.t = Complex64::default();
        assert!(matches!(gauge_act(&p0, &id, &s, &id, &tau), Err(Error::IllegalSymmetry(_))));
        assert!(gauge_act(&p0, &id, &s, &s, &tau).is_ok());
    }

    #[test]
    fn canonical_form_is_orbit_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = solve_relation(5, 2, 3, &generic_alpha(6, 3), Complex64::default()).unwrap();
        let c = antidiagonal_reduce(&p);
        let tau = TorusElement::random(&mut rng, 3);
        let c2 = antidiagonal_reduce(&torus_act(&p, &tau, &tau));
        assert!(c.b1.distance(&c2.b1) < 1e-10 && c.b2.distance(&c2.b2) < 1e-10);
        let cc = antidiagonal_reduce(&c);
        assert!(cc.b1.distance(&c.b1) < 1e-12);
        assert!((relation_residual(&c) - relation_residual(&p)).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let p = solve_relation(1, 2, 2, &generic_alpha(1, 2), Complex64::new(0.5, 0.0)).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: RepPoint = serde_json::from_str(&s).unwrap();
        assert!(relation_residual(&back) <= SOLVE_TOL);
        assert_eq!(back.topology, Topology::Connected);
    }
}
