// Implied-volatility smile of European calls under HLV for several skews.

use hlv_qmc::pricing::implied_vol_curve;
use hlv_qmc::{Construction, DirectionNumbers, HlvParams, TimeGrid, UniformStream};

pub fn run_example() -> hlv_qmc::Result<()> {
    let grid = TimeGrid::new(1.0, 32)?;
    let strikes = [50.0, 75.0, 100.0, 125.0, 150.0];
    for beta in [1.0, 0.5, 0.2] {
        let params = HlvParams::new(0.3, beta, 0.03, 100.0)?;
        let mut stream = UniformStream::sobol(&DirectionNumbers::builtin(), grid.steps())?;
        let curve = implied_vol_curve(
            &params,
            &strikes,
            grid,
            &mut stream,
            Construction::BrownianBridge,
            1 << 13,
        )?;
        let vols: Vec<String> = curve
            .iter()
            .map(|p| p.implied_vol.map_or("   NaN".into(), |v| format!("{v:.4}")))
            .collect();
        println!("beta={beta:.1}: {}", vols.join("  "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
