//! The model flat connection near a node `xy = t`.
//!
//! Paths are chains of [`Arc`]s along which each coordinate moves log-linearly,
//! `u(s) = u₀·exp(s·λ)`. Circles, the vanishing cycle `γ_t` and spirals on `Q_t`
//! are all of this form, and the connection forms below only involve
//! `du/u`, `dv/v` and their imaginary parts.
//!
//! In the unitary and holomorphic gauges `(u, v) = (x, y)`; in the blow-up
//! gauges `(u, v)` are the chart coordinates `(x̃, ỹ)` with `x = x̃, y = x̃ỹ`,
//! respectively `(x̂, ŷ)` with `x = x̂ŷ, y = ŷ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alcove::AlcovePoint;
use crate::error::{Error, Result};
use crate::lie::{exp_skew, CMat, GroupElement};

/// Default RK4 steps for a full turn.
pub const DEFAULT_STEPS: usize = 4096;
/// Minimal distance to a polar divisor along a transport path.
pub const SINGULAR_TOL: f64 = 1e-6;
/// Radius of the polydisk containing the quadrics.
pub const POLYDISK: f64 = 2.0;

/// A point of `Q_t = {xy = t}` inside the polydisk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadricPoint {
    pub x: Complex64,
    pub y: Complex64,
    pub t: Complex64,
}

impl QuadricPoint {
    pub fn new(x: Complex64, y: Complex64, t: Complex64) -> Result<Self> {
        if (x * y - t).norm() > 1e-12 {
            return Err(Error::InvalidInput(format!("({x}, {y}) is not on xy = {t}")));
        }
        if x.norm() >= POLYDISK || y.norm() >= POLYDISK {
            return Err(Error::InvalidInput(format!("({x}, {y}) leaves the polydisk")));
        }
        Ok(Self { x, y, t })
    }
}

/// Segment along which `u = u₀·e^{s·du}` and `v = v₀·e^{s·dv}` for `s ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub u0: Complex64,
    pub v0: Complex64,
    pub du: Complex64,
    pub dv: Complex64,
}

impl Arc {
    pub fn at(&self, s: f64) -> (Complex64, Complex64) {
        (self.u0 * (self.du * s).exp(), self.v0 * (self.dv * s).exp())
    }

    pub fn end(&self) -> (Complex64, Complex64) {
        self.at(1.0)
    }

    pub fn reversed(&self) -> Self {
        let (u1, v1) = self.end();
        Self { u0: u1, v0: v1, du: -self.du, dv: -self.dv }
    }

    fn min_modulus(z0: Complex64, dz: Complex64) -> f64 {
        z0.norm().min(z0.norm() * dz.re.exp())
    }
}

/// A piecewise log-linear path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathOnQuadric {
    pub arcs: Vec<Arc>,
}

fn polar_c(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

impl PathOnQuadric {
    /// `γ_t`: `x = r e^{iθ}`, `y = (t/r) e^{−iθ}`, one positive turn.
    pub fn gamma(t: f64, r: f64) -> Self {
        let l = Complex64::new(0.0, 2.0 * PI);
        Self { arcs: vec![Arc { u0: polar_c(r, 0.0), v0: polar_c(t / r, 0.0), du: l, dv: -l }] }
    }

    /// One positive turn of `x` around `0` starting at `(r, t/r)`, with `y` held fixed.
    pub fn x_loop(t: f64, r: f64) -> Self {
        let l = Complex64::new(0.0, 2.0 * PI);
        Self { arcs: vec![Arc { u0: polar_c(r, 0.0), v0: polar_c(t / r, 0.0), du: l, dv: Complex64::default() }] }
    }

    /// One positive turn of `y` around `0` starting at `(t/r, r)`, with `x` held fixed.
    pub fn y_loop(t: f64, r: f64) -> Self {
        let l = Complex64::new(0.0, 2.0 * PI);
        Self { arcs: vec![Arc { u0: polar_c(t / r, 0.0), v0: polar_c(r, 0.0), du: Complex64::default(), dv: l }] }
    }

    /// Spiral on `Q_t` from `x = r₀e^{iθ₀}` to `x = r₁e^{iθ₁}` with `y = t/x`.
    pub fn spiral(t: f64, r0: f64, r1: f64, theta0: f64, theta1: f64) -> Self {
        let l = Complex64::new((r1 / r0).ln(), theta1 - theta0);
        let x0 = polar_c(r0, theta0);
        Self { arcs: vec![Arc { u0: x0, v0: t / x0, du: l, dv: -l }] }
    }

    /// Polyline through sampled points, interpolated log-linearly in each coordinate
    /// along the shortest angular branch.
    pub fn from_samples(points: &[(Complex64, Complex64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a sampled path needs two points".into()));
        }
        let mut arcs = Vec::with_capacity(points.len() - 1);
        for w in points.windows(2) {
            let (u0, v0) = w[0];
            let (u1, v1) = w[1];
            if u0.norm() == 0.0 || v0.norm() == 0.0 || u1.norm() == 0.0 || v1.norm() == 0.0 {
                return Err(Error::PathTooCloseToSingularity { distance: 0.0 });
            }
            arcs.push(Arc { u0, v0, du: (u1 / u0).ln(), dv: (v1 / v0).ln() });
        }
        Ok(Self { arcs })
    }

    pub fn then(mut self, other: &PathOnQuadric) -> Result<Self> {
        if let (Some(last), Some(first)) = (self.arcs.last(), other.arcs.first()) {
            let (u, v) = last.end();
            if (u - first.u0).norm() > 1e-10 || (v - first.v0).norm() > 1e-10 {
                return Err(Error::InvalidInput("paths do not join".into()));
            }
        }
        self.arcs.extend_from_slice(&other.arcs);
        Ok(self)
    }

    pub fn reversed(&self) -> Self {
        Self { arcs: self.arcs.iter().rev().map(Arc::reversed).collect() }
    }

    /// `m + 1` equally spaced samples per arc (shared endpoints listed once).
    pub fn samples(&self, m: usize) -> Vec<(Complex64, Complex64)> {
        let mut out = Vec::new();
        for (i, arc) in self.arcs.iter().enumerate() {
            let start = if i == 0 { 0 } else { 1 };
            out.extend((start..=m).map(|k| arc.at(k as f64 / m as f64)));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    Unitary,
    Holomorphic,
    #[serde(rename = "blowup1")]
    BlowupPatch1,
    #[serde(rename = "blowup2")]
    BlowupPatch2,
}

impl Gauge {
    fn poles(self) -> (bool, bool) {
        match self {
            Gauge::Unitary | Gauge::Holomorphic => (true, true),
            Gauge::BlowupPatch1 => (false, true),
            Gauge::BlowupPatch2 => (true, false),
        }
    }
}

/// `d + ω` with `ω` one of the four model forms, coefficient `M = V·diag(α)·V†`.
#[derive(Clone, Debug)]
pub struct ModelConnection {
    pub alpha: AlcovePoint,
    pub gauge: Gauge,
    frame: Option<GroupElement>,
}

impl ModelConnection {
    pub fn new(alpha: AlcovePoint, gauge: Gauge) -> Self {
        Self { alpha, gauge, frame: None }
    }

    /// Same connection written in the frame `V`, so its coefficient is `V diag(α) V†`.
    pub fn with_frame(mut self, v: GroupElement) -> Self {
        self.frame = Some(v);
        self
    }

    pub fn coefficient(&self) -> CMat {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.alpha.n(),
            self.alpha.as_slice().iter().map(|&a| Complex64::new(a, 0.0)),
        ));
        match &self.frame {
            Some(v) => v.matrix() * d * v.matrix().adjoint(),
            None => d,
        }
    }

    /// Scalar `c` with `ω = c·M` on a tangent vector with logarithmic
    /// components `du/u`, `dv/v`.
    fn scalar_form(&self, du: Complex64, dv: Complex64) -> Complex64 {
        match self.gauge {
            Gauge::Unitary => Complex64::new(0.0, 0.5 * (du.im - dv.im)),
            Gauge::Holomorphic => 0.5 * (du - dv),
            Gauge::BlowupPatch1 => -0.5 * dv,
            Gauge::BlowupPatch2 => 0.5 * du,
        }
    }

    fn check_arc(&self, arc: &Arc) -> Result<()> {
        let (pu, pv) = self.gauge.poles();
        let zero = Complex64::default();
        let mut distance = f64::INFINITY;
        // A coordinate held constant contributes nothing, so branches of X₀ are allowed.
        if pu && arc.du != zero {
            distance = distance.min(Arc::min_modulus(arc.u0, arc.du));
        }
        if pv && arc.dv != zero {
            distance = distance.min(Arc::min_modulus(arc.v0, arc.dv));
        }
        if distance < SINGULAR_TOL {
            return Err(Error::PathTooCloseToSingularity { distance });
        }
        if matches!(self.gauge, Gauge::Unitary | Gauge::Holomorphic) {
            let (u1, v1) = arc.end();
            if arc.u0.norm().max(u1.norm()) >= POLYDISK || arc.v0.norm().max(v1.norm()) >= POLYDISK {
                return Err(Error::InvalidInput("path leaves the polydisk".into()));
            }
        }
        Ok(())
    }

    /// Path-ordered solution of `dv = −ω v`, `v(0) = I`, by RK4 with
    /// `steps` steps per full turn. In the unitary gauge every step is followed
    /// by a Newton–Schulz polar correction.
    pub fn transport(&self, path: &PathOnQuadric, steps: usize) -> Result<Transport> {
        let n = self.alpha.n();
        let m = self.coefficient();
        let mut total = CMat::identity(n, n);
        let unitary = self.gauge == Gauge::Unitary;
        for arc in &path.arcs {
            self.check_arc(arc)?;
            let c = self.scalar_form(arc.du, arc.dv);
            let k = &m * (-c);
            let length = arc.du.norm().max(arc.dv.norm());
            let count = ((steps as f64) * length / (2.0 * PI)).ceil().max(16.0) as usize;
            let h = Complex64::new(1.0 / count as f64, 0.0);
            let mut v = CMat::identity(n, n);
            for _ in 0..count {
                // Autonomous along an arc: k1..k4 share the coefficient.
                let k1 = &k * &v;
                let k2 = &k * (&v + &k1 * (h * 0.5));
                let k3 = &k * (&v + &k2 * (h * 0.5));
                let k4 = &k * (&v + &k3 * h);
                let two = Complex64::new(2.0, 0.0);
                v += (k1 + k2 * two + k3 * two + k4) * (h / 6.0);
                if unitary {
                    v = newton_schulz(v);
                }
            }
            total = v * total;
        }
        if unitary {
            Ok(Transport::Unitary(GroupElement::from_matrix_projected(total)?))
        } else {
            Ok(Transport::General(total))
        }
    }

    /// `(1/2πi)∮ω` around `center` by the trapezoid rule with `points` nodes.
    /// The loop moves one coordinate on the circle of radius `radius`, the other
    /// coordinate is held at `base`; [`LoopCenter::Node`] moves both on a line
    /// `v = base·u` through the origin.
    pub fn residue(&self, center: LoopCenter, radius: f64, base: Complex64, points: usize) -> Result<CMat> {
        let (pu, pv) = self.gauge.poles();
        let l = Complex64::new(0.0, 2.0 * PI);
        let arc = match center {
            LoopCenter::U => Arc { u0: Complex64::new(radius, 0.0), v0: base, du: l, dv: Complex64::default() },
            LoopCenter::V => Arc { u0: base, v0: Complex64::new(radius, 0.0), du: Complex64::default(), dv: l },
            LoopCenter::Node => {
                if pu && pv {
                    return Err(Error::LoopEnclosesBothDivisors);
                }
                Arc { u0: Complex64::new(radius, 0.0), v0: base * radius, du: l, dv: l }
            }
        };
        self.check_arc(&arc)?;
        // Trapezoid rule in θ for (1/2πi)∮ c(θ) dθ, with du/u = u'(θ)/u(θ).
        let zero = Complex64::default();
        let mut sum = zero;
        for k in 0..points {
            let theta = 2.0 * PI * k as f64 / points as f64;
            let (u, v) = arc.at(theta / (2.0 * PI));
            let dlog = |z: Complex64, dz: Complex64| if dz == zero { zero } else { z * dz / (2.0 * PI) / z };
            sum += self.scalar_form(dlog(u, arc.du), dlog(v, arc.dv)) * (2.0 * PI / points as f64);
        }
        Ok(self.coefficient() * (sum / Complex64::new(0.0, 2.0 * PI)))
    }
}

/// Which coordinate the residue loop encircles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopCenter {
    /// `u = 0`: `x = 0`, `x̃ = 0` or `x̂ = 0` depending on the gauge.
    U,
    /// `v = 0`: `y = 0`, `ỹ = 0` or `ŷ = 0`.
    V,
    /// A small loop around the node in a line through the origin.
    Node,
}

fn newton_schulz(v: CMat) -> CMat {
    let n = v.nrows();
    let g = v.adjoint() * &v;
    &v * (CMat::identity(n, n) * Complex64::new(1.5, 0.0) - g * Complex64::new(0.5, 0.0))
}

/// Result of parallel transport.
#[derive(Clone, Debug)]
pub enum Transport {
    Unitary(GroupElement),
    General(CMat),
}

impl Transport {
    pub fn matrix(&self) -> &CMat {
        match self {
            Transport::Unitary(g) => g.matrix(),
            Transport::General(m) => m,
        }
    }
}

/// `exp(−2πi·s·diag α)`, the closed-form holonomy oracle for `s` turns.
pub fn closed_form_holonomy(alpha: &AlcovePoint, turns: f64) -> CMat {
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        alpha.n(),
        alpha.as_slice().iter().map(|&a| Complex64::new(0.0, -2.0 * PI * turns * a)),
    ));
    exp_skew(&d)
}

/// `G = r_x^{−α/2} r_y^{α/2}` as a diagonal matrix.
pub fn gauge_matrix(alpha: &AlcovePoint, rx: f64, ry: f64) -> CMat {
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        alpha.n(),
        alpha.as_slice().iter().map(|&a| Complex64::new(rx.powf(-a / 2.0) * ry.powf(a / 2.0), 0.0)),
    ))
}

/// Sample grid for [`gauge_transform_check`]: `size × size` values of `x` in the
/// annulus `r_min ≤ |x| ≤ r_max`, with `y = t/x`.
#[derive(Clone, Copy, Debug)]
pub struct GaugeGrid {
    pub size: usize,
    pub t: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Finite-difference step.
    pub h: f64,
}

impl Default for GaugeGrid {
    fn default() -> Self {
        Self { size: 50, t: 0.25, r_min: 0.3, r_max: 1.5, h: 1e-4 }
    }
}

/// Maximal discrepancy between `GωG⁻¹ − (dG)G⁻¹` (with `dG` by central
/// differences) and the holomorphic-gauge form, over the grid and the four real
/// directions `∂/∂r_x, ∂/∂θ_x, ∂/∂r_y, ∂/∂θ_y`.
pub fn gauge_transform_check(alpha: &AlcovePoint, grid: &GaugeGrid) -> f64 {
    let a = alpha.as_slice();
    let mut worst: f64 = 0.0;
    for i in 0..grid.size {
        let s = if grid.size > 1 { i as f64 / (grid.size - 1) as f64 } else { 0.0 };
        let rx = grid.r_min * (grid.r_max / grid.r_min).powf(s);
        let ry = grid.t / rx;
        for j in 0..grid.size {
            let thx = 2.0 * PI * j as f64 / grid.size as f64;
            let x = Complex64::from_polar(rx, thx);
            let y = Complex64::from_polar(ry, -thx);
            // Tangent vectors (dx, dy) of the four directions.
            let dirs = [
                (x / rx, Complex64::default(), 0),
                (x * Complex64::i(), Complex64::default(), 1),
                (Complex64::default(), y / ry, 2),
                (Complex64::default(), y * Complex64::i(), 3),
            ];
            for (dx, dy, kind) in dirs {
                for &al in a {
                    let g = |rxx: f64, ryy: f64| rxx.powf(-al / 2.0) * ryy.powf(al / 2.0);
                    let fd = match kind {
                        0 => (g(rx + grid.h, ry) - g(rx - grid.h, ry)) / (2.0 * grid.h),
                        2 => (g(rx, ry + grid.h) - g(rx, ry - grid.h)) / (2.0 * grid.h),
                        _ => 0.0,
                    };
                    let minus_dg_ginv = -fd / g(rx, ry);
                    let dthx = (dx / x).im;
                    let dthy = (dy / y).im;
                    let unitary = Complex64::new(0.0, 0.5 * al * (dthx - dthy));
                    let holo = 0.5 * al * (dx / x - dy / y);
                    worst = worst.max((unitary + minus_dg_ginv - holo).norm());
                }
            }
        }
    }
    worst
}

/// Compares holomorphic-gauge transport with `G(end)·P_unitary·G(start)⁻¹`
/// along a spiral on `Q_t`; returns the Frobenius discrepancy.
pub fn gauge_covariance_check(alpha: &AlcovePoint, t: f64, r0: f64, r1: f64, steps: usize) -> Result<f64> {
    let path = PathOnQuadric::spiral(t, r0, r1, 0.0, 2.0 * PI);
    let pu = ModelConnection::new(alpha.clone(), Gauge::Unitary).transport(&path, steps)?;
    let ph = ModelConnection::new(alpha.clone(), Gauge::Holomorphic).transport(&path, steps)?;
    let g0 = gauge_matrix(alpha, r0, t / r0);
    let g1 = gauge_matrix(alpha, r1, t / r1);
    let g0_inv = g0.try_inverse().expect("diagonal with positive entries");
    Ok((ph.matrix() - g1 * pu.matrix() * g0_inv).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    X,
    Y,
}

/// Coefficient of the partial connection on a branch of `X₀`.
#[derive(Clone, Debug)]
pub struct PartialConnection {
    /// Matrix `K` with `∇^p = d + K dθ` on the branch.
    pub coefficient: CMat,
    /// Largest deviation of the coefficient over the sampled `t → 0`.
    pub t_deviation: f64,
    /// `t` values at which the coefficient was read off.
    pub t_values: Vec<f64>,
}

impl PartialConnection {
    /// Holonomy of `d + K dθ` around one positive turn, `exp(−2πK)`.
    pub fn holonomy(&self) -> CMat {
        exp_skew(&(&self.coefficient * Complex64::new(-2.0 * PI, 0.0)))
    }
}

/// Reads off the unitary-gauge form along the circles `|x| = r` (branch x) or
/// `|y| = r` (branch y) on `Q_t` for `t → 0`, per unit angle on that branch.
pub fn partial_connection_limit(alpha: &AlcovePoint, branch: Branch, r: f64) -> Result<PartialConnection> {
    if !(r > 0.0 && r < POLYDISK) {
        return Err(Error::InvalidInput(format!("radius {r} outside (0, 2)")));
    }
    let conn = ModelConnection::new(alpha.clone(), Gauge::Unitary);
    let t_values = vec![0.5_f64.min(r * r * 0.9), 1e-2, 1e-4, 1e-8, 1e-12];
    let mut coefficients = Vec::new();
    for &t in &t_values {
        let path = match branch {
            Branch::X => PathOnQuadric::spiral(t, r, r, 0.0, 1.0),
            Branch::Y => PathOnQuadric::spiral(t, t / r, t / r, 0.0, -1.0),
        };
        let arc = path.arcs[0];
        coefficients.push(conn.coefficient() * conn.scalar_form(arc.du, arc.dv));
    }
    let last = coefficients.last().unwrap().clone();
    let t_deviation = coefficients.iter().map(|c| (c - &last).norm()).fold(0.0, f64::max);
    Ok(PartialConnection { coefficient: last, t_deviation, t_values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::haar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alpha(v: &[f64]) -> AlcovePoint {
        AlcovePoint::new(v.to_vec()).unwrap()
    }

    fn max_entry(a: &CMat, b: &CMat) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gamma_gives_a() {
        let al = alpha(&[0.3, 0.1, -0.4]);
        let conn = ModelConnection::new(al.clone(), Gauge::Unitary);
        let h = conn.transport(&PathOnQuadric::gamma(0.25, 0.5), DEFAULT_STEPS).unwrap();
        assert!(max_entry(h.matrix(), &closed_form_holonomy(&al, 1.0)) < 1e-8);
    }

    #[test]
    fn half_loops() {
        let al = alpha(&[0.45, -0.45]);
        let conn = ModelConnection::new(al.clone(), Gauge::Unitary);
        let x = conn.transport(&PathOnQuadric::x_loop(0.1, 0.5), DEFAULT_STEPS).unwrap();
        let y = conn.transport(&PathOnQuadric::y_loop(0.1, 0.5), DEFAULT_STEPS).unwrap();
        assert!(max_entry(x.matrix(), &closed_form_holonomy(&al, 0.5)) < 1e-8);
        assert!(max_entry(y.matrix(), &closed_form_holonomy(&al, -0.5)) < 1e-8);
        let prod = x.matrix() * y.matrix().adjoint();
        assert!(max_entry(&prod, &closed_form_holonomy(&al, 1.0)) < 1e-8);
    }

    #[test]
    fn trivial_alpha_is_flat() {
        let conn = ModelConnection::new(AlcovePoint::zero(3), Gauge::Holomorphic);
        let path = PathOnQuadric::spiral(0.2, 0.3, 1.2, 0.0, 5.0);
        let h = conn.transport(&path, 256).unwrap();
        assert!(max_entry(h.matrix(), &CMat::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn framed_connection_is_conjugated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let al = alpha(&[0.4, 0.1, -0.5]);
        let v = haar(&mut rng, 3);
        let conn = ModelConnection::new(al.clone(), Gauge::Unitary).with_frame(v.clone());
        let h = conn.transport(&PathOnQuadric::gamma(0.1, 0.4), DEFAULT_STEPS).unwrap();
        let expected = v.matrix() * closed_form_holonomy(&al, 1.0) * v.matrix().adjoint();
        assert!(max_entry(h.matrix(), &expected) < 1e-8);
    }

    #[test]
    fn concatenation_and_reversal() {
        let al = alpha(&[0.2, -0.2]);
        let conn = ModelConnection::new(al, Gauge::Holomorphic);
        let a = PathOnQuadric::spiral(0.1, 0.3, 0.6, 0.0, 1.0);
        let b = PathOnQuadric::spiral(0.1, 0.6, 0.9, 1.0, -2.0);
        let ab = a.clone().then(&b).unwrap();
        let pa = conn.transport(&a, 1024).unwrap();
        let pb = conn.transport(&b, 1024).unwrap();
        let pab = conn.transport(&ab, 1024).unwrap();
        assert!(max_entry(pab.matrix(), &(pb.matrix() * pa.matrix())) < 1e-12);
        let back = conn.transport(&a.reversed(), 1024).unwrap();
        assert!(max_entry(&(back.matrix() * pa.matrix()), &CMat::identity(2, 2)) < 1e-12);
    }

    #[test]
    fn rejects_paths_through_axes() {
        let conn = ModelConnection::new(alpha(&[0.2, -0.2]), Gauge::Unitary);
        let err = conn.transport(&PathOnQuadric::gamma(1e-14, 1.0), 64).unwrap_err();
        assert!(matches!(err, Error::PathTooCloseToSingularity { .. }));
        let err = conn.transport(&PathOnQuadric::gamma(0.1, 1.9), 64);
        assert!(err.is_ok());
        assert!(conn.transport(&PathOnQuadric::gamma(0.1, 2.5), 64).is_err());
    }

    #[test]
    fn gauge_residual_small() {
        assert_eq!(gauge_transform_check(&AlcovePoint::zero(2), &GaugeGrid::default()), 0.0);
        let r = gauge_transform_check(&alpha(&[0.5, -0.5]), &GaugeGrid::default());
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn gauge_covariance() {
        let d = gauge_covariance_check(&alpha(&[0.3, 0.0, -0.3]), 0.2, 0.3, 0.9, DEFAULT_STEPS).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn residues() {
        let al = alpha(&[0.4, -0.1, -0.3]);
        let half = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            al.as_slice().iter().map(|&a| Complex64::new(a / 2.0, 0.0)),
        ));
        let p1 = ModelConnection::new(al.clone(), Gauge::BlowupPatch1);
        let r1 = p1.residue(LoopCenter::V, 0.1, Complex64::new(0.5, 0.0), 64).unwrap();
        assert!(max_entry(&r1, &-half.clone()) < 1e-12);
        let p2 = ModelConnection::new(al.clone(), Gauge::BlowupPatch2);
        let r2 = p2.residue(LoopCenter::U, 0.1, Complex64::new(0.0, 0.0), 64).unwrap();
        assert!(max_entry(&r2, &half) < 1e-12);
        let holo = ModelConnection::new(al, Gauge::Holomorphic);
        let r3 = holo.residue(LoopCenter::U, 0.5, Complex64::default(), 64).unwrap();
        assert!(max_entry(&r3, &half) < 1e-12);
        assert!(matches!(
            holo.residue(LoopCenter::Node, 0.1, Complex64::new(1.0, 0.0), 64),
            Err(Error::LoopEnclosesBothDivisors)
        ));
    }

    #[test]
    fn partial_connection() {
        let al = alpha(&[0.3, -0.3]);
        let px = partial_connection_limit(&al, Branch::X, 0.7).unwrap();
        assert!(px.t_deviation == 0.0);
        assert!((px.coefficient[(0, 0)] - Complex64::new(0.0, 0.3)).norm() < 1e-15);
        let py = partial_connection_limit(&al, Branch::Y, 0.7).unwrap();
        assert!((py.coefficient[(0, 0)] - Complex64::new(0.0, -0.3)).norm() < 1e-15);
        assert!(max_entry(&px.holonomy(), &closed_form_holonomy(&al, 1.0)) < 1e-12);
    }

    #[test]
    fn quadric_point_validation() {
        let one = Complex64::new(1.0, 0.0);
        assert!(QuadricPoint::new(one, one * 0.5, one * 0.5).is_ok());
        assert!(QuadricPoint::new(one, one, one * 0.5).is_err());
        assert!(QuadricPoint::new(one * 3.0, one / 3.0, one).is_err());
    }
}
