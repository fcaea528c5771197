//! Rough-set attribute reduction on a small hand-written decision table.
//!
//! ```bash
//! cargo run --release -p mfir --example rough_reduct
//! ```

use mfir::{
    dependency, exhaustive_reduct, greedy_reduct, indiscernibility_partition, InformationSystem,
};

fn main() -> anyhow::Result<()> {
    // Attribute 2 duplicates attribute 0; attribute 3 is noise.
    let columns = vec![
        vec![0, 0, 1, 1, 2, 2, 0, 1],
        vec![0, 1, 0, 1, 0, 1, 1, 0],
        vec![0, 0, 1, 1, 2, 2, 0, 1],
        vec![3, 1, 2, 0, 1, 3, 2, 2],
    ];
    let decision = vec![0, 1, 1, 1, 2, 2, 1, 1];
    let sys = InformationSystem::from_columns(&columns, decision)?;

    for attrs in [vec![], vec![0], vec![1], vec![0, 1], vec![0, 1, 2, 3]] {
        let blocks = indiscernibility_partition(&sys, &attrs)?;
        println!(
            "P={attrs:?}\tblocks={}\tgamma={:.3}",
            blocks.len(),
            dependency(&sys, &attrs)?
        );
    }
    let greedy = greedy_reduct(&sys);
    println!(
        "greedy reduct {:?}: gamma_full={:.3} gamma_reduct={:.3}",
        greedy.retained, greedy.gamma_full, greedy.gamma_reduct
    );
    println!("exhaustive minimum {:?}", exhaustive_reduct(&sys)?);
    Ok(())
}
