// Prices an at-the-money geometric Asian call with every sampling method and
// checks the β = 1 case against the Black–Scholes closed form.

use hlv_qmc::pricing::bs_geometric_asian_closed_form;
use hlv_qmc::{mc_price, Construction, DirectionNumbers, HlvParams, OptionSpec, UniformStream};

pub fn run_example() -> hlv_qmc::Result<()> {
    let spec = OptionSpec::geometric_asian(100.0, 1.0, 64);
    let paths = 1 << 13;
    let table = DirectionNumbers::builtin();

    let hlv = HlvParams::study_defaults();
    for construction in [Construction::Incremental, Construction::BrownianBridge] {
        let mut mt = UniformStream::mersenne(42, spec.fixings)?;
        let est = mc_price(&spec, &hlv, &mut mt, construction, paths)?;
        println!(
            "mt    {construction:<11} {:.6} ± {:.6}",
            est.value,
            est.std_error.unwrap_or_default()
        );
        let mut sobol = UniformStream::sobol(&table, spec.fixings)?;
        let est = mc_price(&spec, &hlv, &mut sobol, construction, paths)?;
        println!("sobol {construction:<11} {:.6}", est.value);
    }

    let bs = HlvParams { beta: 1.0, ..hlv };
    let exact = bs_geometric_asian_closed_form(&bs, &spec)?;
    let mut sobol = UniformStream::sobol(&table, spec.fixings)?;
    let est = mc_price(&spec, &bs, &mut sobol, Construction::BrownianBridge, paths)?;
    println!("beta=1: simulated {:.6}, closed form {exact:.6}", est.value);
    assert!((est.value - exact).abs() / exact < 5e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
