//! Orbit equivalence on a stratum with a repeated eigenvalue, and a
//! non-equivalent translate on the generic stratum.

use std::time::Instant;

use moduli_lab::alcove::{AlcovePoint, MultiplicityPattern};
use moduli_lab::lie::haar;
use moduli_lab::rep_variety::{gauge_act, implode_equivalent, random_legal_symmetry, solve_point, SolveOptions, Topology};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> moduli_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let face = MultiplicityPattern::from_blocks(vec![2, 1], 0)?;
    for t in [0.1, 0.0] {
        let alpha = AlcovePoint::sample_in_face(&mut rng, &face)?;
        let p = solve_point(1, 2, &alpha, Complex64::new(t, 0.0), Topology::Connected, SolveOptions::default())?;
        let (mu, nu, tau) = random_legal_symmetry(&mut rng, &p);
        let q = gauge_act(&p, &haar(&mut rng, 3), &mu, &nu, &tau)?;
        let clock = Instant::now();
        let report = implode_equivalent(&p, &q, 50, 7)?;
        println!("t = {t}: translate by a legal symmetry -> {report:?} in {:.2?}", clock.elapsed());

        let generic = AlcovePoint::new(vec![0.4, 0.05, -0.45])?;
        let p = solve_point(2, 2, &generic, Complex64::new(t, 0.0), Topology::Connected, SolveOptions::default())?;
        let b = haar(&mut rng, 3);
        let mut q = p.clone();
        q.b1 = &p.b1 * &b;
        q.b2 = &p.b2 * &b;
        let clock = Instant::now();
        let report = implode_equivalent(&p, &q, 50, 7)?;
        println!("t = {t}: B's translated by a non-torus element -> {report:?} in {:.2?}", clock.elapsed());
    }
    Ok(())
}
