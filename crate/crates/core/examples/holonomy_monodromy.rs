//! Parallel transport of the model connection on the quadric `xy = t` and
//! its degeneration to the node.

use moduli_lab::alcove::AlcovePoint;
use moduli_lab::local_model::{
    closed_form_holonomy, partial_connection_limit, Branch, Gauge, ModelConnection, PathOnQuadric, DEFAULT_STEPS,
};

fn max_diff(a: &nalgebra::DMatrix<num_complex::Complex64>, b: &nalgebra::DMatrix<num_complex::Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn main() -> moduli_lab::Result<()> {
    let alpha = AlcovePoint::new(vec![0.35, 0.1, -0.45])?;
    let conn = ModelConnection::new(alpha.clone(), Gauge::Unitary);
    for t in [0.5_f64, 0.1, 0.01] {
        let r = t.sqrt();
        let gamma = conn.transport(&PathOnQuadric::gamma(t, r), DEFAULT_STEPS)?;
        let x = conn.transport(&PathOnQuadric::x_loop(t, 1.0), DEFAULT_STEPS)?;
        let y = conn.transport(&PathOnQuadric::y_loop(t, 1.0), DEFAULT_STEPS)?;
        println!(
            "t = {t:<5} |γ − exp(−2πiα)| = {:.2e}  |x − exp(−πiα)| = {:.2e}  |y − exp(πiα)| = {:.2e}",
            max_diff(gamma.matrix(), &closed_form_holonomy(&alpha, 1.0)),
            max_diff(x.matrix(), &closed_form_holonomy(&alpha, 0.5)),
            max_diff(y.matrix(), &closed_form_holonomy(&alpha, -0.5)),
        );
    }
    for (branch, turns) in [(Branch::X, 1.0), (Branch::Y, -1.0)] {
        let limit = partial_connection_limit(&alpha, branch, 0.8)?;
        println!(
            "{branch:?} branch: limiting holonomy off by {:.2e}, drift in t {:.2e}",
            max_diff(&limit.holonomy(), &closed_form_holonomy(&alpha, turns)),
            limit.t_deviation
        );
    }
    Ok(())
}
