// The Brownian bridge plan for eight steps, and one path built both ways
// from the same Gaussian vector.

use hlv_qmc::path::{bridge_path, incremental_path};
use hlv_qmc::{BridgePlan, TimeGrid};

pub fn run_example() -> hlv_qmc::Result<()> {
    let grid = TimeGrid::new(1.0, 8)?;
    let plan = BridgePlan::new(&grid);
    for e in plan.entries() {
        match e.right {
            Some(r) => println!(
                "W({}) | W({}), W({r}): gamma {:.3}, sd {:.4}",
                e.target, e.left, e.gamma, e.stddev
            ),
            None => println!("W({}) terminal: sd {:.4}", e.target, e.stddev),
        }
    }

    let z = [0.3, -1.1, 0.4, 0.0, 2.0, -0.5, 0.7, -0.2];
    let inc = incremental_path(&z, &grid)?;
    let bb = bridge_path(&z, &plan, &grid)?;
    println!("incremental: {:?}", inc.values);
    println!("bridge:      {:?}", bb.values);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
