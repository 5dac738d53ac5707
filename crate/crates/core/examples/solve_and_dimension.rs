//! Solving the surface-group relation and counting tangent directions
//! modulo the symmetry orbit.

use moduli_lab::alcove::AlcovePoint;
use moduli_lab::rep_variety::{
    antidiagonal_reduce, moment_map, relation_residual, solve_point, tangent_dimension_report, SolveOptions, Topology,
};
use num_complex::Complex64;

fn main() -> moduli_lab::Result<()> {
    for (g, alpha) in [(2, vec![0.3, -0.3]), (2, vec![0.4, 0.05, -0.45]), (3, vec![0.2, -0.2])] {
        let alpha = AlcovePoint::new(alpha)?;
        let n = alpha.n();
        for t in [0.1, 0.0] {
            let p = solve_point(5, g, &alpha, Complex64::new(t, 0.0), Topology::Connected, SolveOptions::default())?;
            let report = tangent_dimension_report(&p)?;
            let expected = (2 * g - 2) * (n * n - 1);
            println!(
                "g={g} n={n} t={t}: residual {:.1e}, kernel {} − orbit {} = {} (expected {expected})",
                relation_residual(&p),
                report.kernel,
                report.orbit,
                report.quotient
            );
        }
    }
    let alpha = AlcovePoint::new(vec![0.25, -0.25])?;
    let p = solve_point(9, 2, &alpha, Complex64::new(0.0, 0.0), Topology::Connected, SolveOptions::default())?;
    let reduced = antidiagonal_reduce(&p);
    println!("moment map {:?}", moment_map(&p));
    println!("reduced B₁ row 0: {:.4?}", reduced.b1.matrix().row(0).iter().collect::<Vec<_>>());
    Ok(())
}
