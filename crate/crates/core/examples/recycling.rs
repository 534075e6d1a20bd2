// Spread of Delta across replications, with and without path recycling.

use hlv_qmc::greeks::{greeks_with, Recycling};
use hlv_qmc::{Construction, GreekShifts, HlvParams, OptionSpec, UniformStream};

fn spread(recycling: Recycling) -> hlv_qmc::Result<f64> {
    let params = HlvParams::study_defaults();
    let spec = OptionSpec::geometric_asian(100.0, 1.0, 32);
    let base = UniformStream::mersenne(7, spec.fixings)?;
    let deltas = (0..8)
        .map(|run| {
            let mut s = base.partition(run, 7 << 10)?;
            let shifts = GreekShifts::default_for(&params);
            greeks_with(
                &spec,
                &params,
                &mut s,
                Construction::Incremental,
                1 << 10,
                shifts,
                recycling,
            )
            .map(|g| g.delta)
        })
        .collect::<hlv_qmc::Result<Vec<_>>>()?;
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (deltas.len() - 1) as f64;
    Ok(var.sqrt())
}

pub fn run_example() -> hlv_qmc::Result<()> {
    let recycled = spread(Recycling::Recycled)?;
    let independent = spread(Recycling::Independent)?;
    println!("delta std: recycled {recycled:.5}, independent {independent:.5}");
    assert!(recycled < independent);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
