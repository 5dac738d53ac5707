//! Parameter count for a pants decomposition: trinion contributions, node
//! tori, and the expected dimension.

use moduli_lab::trinion::quotient_dimension_bookkeeping;

fn main() -> moduli_lab::Result<()> {
    for (g, n) in [(2, 2), (2, 3), (3, 2), (4, 3)] {
        let ledger = quotient_dimension_bookkeeping(g, n)?;
        println!("g={g} n={n}: {} trinions, {} nodes, torus dim {}", ledger.trinions, ledger.nodes, ledger.torus_dim);
        for entry in &ledger.per_trinion {
            println!("    {:<28} {:>5}", entry.label, entry.amount);
        }
        println!("    total {} target {} balanced {}", ledger.total, ledger.target, ledger.balanced);
    }
    Ok(())
}
