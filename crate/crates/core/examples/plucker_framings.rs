//! Flags encoded as decomposable forms, the stratum they determine, and the
//! antidiagonal pairings that survive the torus action `(t, R(t))`.

use moduli_lab::alcove::MultiplicityPattern;
use moduli_lab::lie::{haar, TorusElement};
use moduli_lab::plucker::{antidiagonal_identify, betas_from_flag, torus_act_betas, BetaData, Flag};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> moduli_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 4;
    let frame = haar(&mut rng, n).into_matrix();
    let flag = Flag::from_frame(&frame, &[1, 3, 4]);
    let entries = betas_from_flag(n, &flag, true);
    let b = BetaData::new(n, [entries.clone(), entries])?;
    let [back, _] = b.flags()?;
    println!("flag dims {:?}, round trip distance {:.1e}", flag.dims(), back.distance(&flag));

    let pattern = MultiplicityPattern::from_blocks(vec![1, 2, 1], 0)?;
    let b = BetaData::from_frames(&pattern, &haar(&mut rng, n).into_matrix(), &haar(&mut rng, n).into_matrix(), |_, _| {
        Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.0..3.0))
    });
    println!("stratum read back: {}", b.stratum()?);
    let before = antidiagonal_identify(&b)?;
    let t = TorusElement::random(&mut rng, n);
    let paired = antidiagonal_identify(&torus_act_betas(&b, &t, &t.reversed()))?;
    let generic = antidiagonal_identify(&torus_act_betas(&b, &t, &TorusElement::random(&mut rng, n)))?;
    for ((p0, p1), p2) in before.iter().zip(&paired).zip(&generic) {
        println!(
            "block {}: steps {:?}/{:?}, drift under (t, R(t)) {:.1e}, under a generic pair {:.1e}",
            p0.block,
            p0.step1,
            p0.step2,
            (p1.value - p0.value).norm(),
            (p2.value - p0.value).norm()
        );
    }
    Ok(())
}
