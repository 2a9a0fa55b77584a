//! Entropy density and excess entropy of regular, random and
//! self-organized channel allocations.

use fivegsim::selforg_entropy::{excess_entropy, generate_random, generate_regular, self_organize, TemplateSequence};

fn main() -> fivegsim::Result<()> {
    let template = TemplateSequence::default();
    let organized = self_organize(6, 256, 256, 1000, 0)?;
    println!("self-organization converged: {} after {} epochs", organized.converged, organized.epochs);
    let grids = [
        ("regular", generate_regular(6, 1024, 1024)?),
        ("random", generate_random(6, 2048, 2048, 0)?),
        ("selforg", organized.grid),
    ];
    for (name, grid) in &grids {
        let e = excess_entropy(grid, 6, &template, true)?;
        let h: Vec<String> = e.h_of_m.iter().map(|h| format!("{h:.3}")).collect();
        println!("{name:<8} h(1..6) = [{}]  E_C = {:.3}", h.join(", "), e.excess_entropy);
    }
    Ok(())
}
