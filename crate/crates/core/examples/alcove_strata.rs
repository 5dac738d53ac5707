//! Faces of the alcove, the reversal involution and the torsion shift on
//! `k = 1` faces.

use moduli_lab::alcove::{enumerate_faces, symmetric_strata, torsion_shift, AlcovePoint, PATTERN_TOL};
use moduli_lab::lie::{commutator_subgroup_dim, holonomy_of, project_to_alcove};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> moduli_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 4;
    for face in enumerate_faces(n) {
        let line = format!("{:<14} attainable={:<5} reversed={:<14}", face.to_string(), face.is_attainable(), face.reversed().to_string());
        if !face.is_attainable() {
            println!("{line}");
            continue;
        }
        let alpha = AlcovePoint::sample_in_face(&mut rng, &face)?;
        let back = project_to_alcove(&holonomy_of(&alpha))?;
        let mut extra = format!(
            "dim[Stab,Stab]={} pattern round trip={}",
            commutator_subgroup_dim(&face),
            back.alpha.pattern(PATTERN_TOL) == face
        );
        if face.k() == 1 && face.len() >= 2 {
            let shift = torsion_shift(&face, &alpha)?;
            extra += &format!(" torsion=({}, {}) flags {:?}/{:?}", shift.t1, shift.t2, shift.flag_dims1, shift.flag_dims2);
        }
        println!("{line} {extra}");
    }
    println!("{} symmetric strata for n = {n}", symmetric_strata(n).len());
    Ok(())
}
