// The hyperbolic local volatility and one simulated asset path.

use hlv_qmc::hlv::{euler_log_path, local_vol};
use hlv_qmc::path::incremental_path;
use hlv_qmc::{HlvParams, TimeGrid};

pub fn run_example() -> hlv_qmc::Result<()> {
    println!("  S/S0   beta=1.0  beta=0.5  beta=0.2   (sigma(S)/S)");
    for s in [0.5, 0.75, 1.0, 1.25, 1.5] {
        let row: Vec<String> = [1.0, 0.5, 0.2]
            .iter()
            .map(|&b| local_vol(s, 0.3, b).map(|v| format!("{:8.4}", v / s)))
            .collect::<hlv_qmc::Result<_>>()?;
        println!("{s:6.2}  {}", row.join("  "));
    }

    let grid = TimeGrid::new(1.0, 8)?;
    let z = [0.3, -1.1, 0.4, 0.0, 2.0, -0.5, 0.7, -0.2];
    let w = incremental_path(&z, &grid)?;
    let s = euler_log_path(&w, &HlvParams::study_defaults(), &grid)?;
    println!("path: {:.3?}", s.values);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
