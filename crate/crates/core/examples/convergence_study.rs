// A scaled-down RMSE convergence study, written as CSV to a temporary directory.
//
// `cargo run --release -- converge --config configs/study.json` runs the
// full-size version.

use hlv_qmc::harness::{emit_report, run_study};
use hlv_qmc::{ExperimentConfig, Method, Quantity};

pub fn run_example() -> hlv_qmc::Result<()> {
    let config = ExperimentConfig {
        steps: 16,
        strikes: vec![100.0],
        quantities: vec![Quantity::Price, Quantity::Delta],
        methods: vec![
            Method::MC_INCREMENTAL,
            Method::QMC_INCREMENTAL,
            Method::QMC_BRIDGE,
        ],
        path_grid: vec![64, 128, 256, 512, 1024],
        runs: 4,
        reference_paths: 1 << 13,
        ..ExperimentConfig::default()
    };
    let report = run_study(&config)?;
    for c in &report.curves {
        let alpha = c.fit.map_or(f64::NAN, |f| f.alpha);
        println!(
            "{:<6} {:<16} alpha {alpha:.3}",
            c.quantity,
            c.method.to_string()
        );
    }
    let dir = std::env::temp_dir().join("hlv-qmc-convergence-example");
    for path in emit_report(&report, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
