//! The `t = 0` fibre in the disconnected presentation: two surfaces of genus
//! `h` and `g − h` glued at a node.

use moduli_lab::alcove::AlcovePoint;
use moduli_lab::rep_variety::{build_disconnected, relation_residual, tangent_dimension_report};

fn main() -> moduli_lab::Result<()> {
    for (g, h, alpha) in [(2, 1, vec![0.3, -0.3]), (3, 1, vec![0.2, -0.2]), (2, 1, vec![0.4, 0.05, -0.45])] {
        let alpha = AlcovePoint::new(alpha)?;
        let n = alpha.n();
        let p = build_disconnected(3, h, g, n, &alpha)?;
        let report = tangent_dimension_report(&p)?;
        println!(
            "g={g} h={h} n={n}: residual {:.1e}, dimension {} (expected {})",
            relation_residual(&p),
            report.quotient,
            (2 * g - 2) * (n * n - 1)
        );
    }
    Ok(())
}
