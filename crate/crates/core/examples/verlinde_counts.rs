//! Admissible labellings of trivalent graphs against the closed-form
//! rank-2 Verlinde numbers.

use moduli_lab::trinion::{count_lattice_points, standard_graphs, verlinde_crosscheck};

fn main() -> moduli_lab::Result<()> {
    for g in 2..=4 {
        for k in 1..=4 {
            let r = verlinde_crosscheck(g, k)?;
            println!(
                "g={g} k={k}: count {} closed form {} over {} graphs, graph independent {}",
                r.count,
                r.closed_form,
                r.per_graph.len(),
                r.graph_independent
            );
        }
    }
    for graph in standard_graphs(2)? {
        println!("{}: level 2 gives {}", graph.name(), count_lattice_points(&graph, 2));
    }
    Ok(())
}
