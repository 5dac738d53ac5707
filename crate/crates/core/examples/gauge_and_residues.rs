//! The unitary and holomorphic gauges agree after the diagonal change of
//! frame, and the blow-up patches have residues `∓α/2` at their poles.

use moduli_lab::alcove::AlcovePoint;
use moduli_lab::local_model::{gauge_transform_check, Gauge, GaugeGrid, LoopCenter, ModelConnection};
use num_complex::Complex64;

fn main() -> moduli_lab::Result<()> {
    let alpha = AlcovePoint::new(vec![0.3, 0.05, -0.35])?;
    let residual = gauge_transform_check(&alpha, &GaugeGrid::default());
    println!("gauge transformation residual on a 50×50 grid: {residual:.2e}");
    for (gauge, center) in [(Gauge::BlowupPatch1, LoopCenter::V), (Gauge::BlowupPatch2, LoopCenter::U)] {
        let res = ModelConnection::new(alpha.clone(), gauge).residue(center, 0.5, Complex64::new(0.3, 0.0), 64)?;
        let diag: Vec<f64> = (0..alpha.n()).map(|i| res[(i, i)].re).collect();
        println!("{gauge:?} around {center:?}: residue diagonal {diag:.6?}");
    }
    println!("α/2 = {:.6?}", alpha.as_slice().iter().map(|a| a / 2.0).collect::<Vec<_>>());
    Ok(())
}
