// Finite-difference Greeks on recycled Sobol + Brownian bridge paths.

use hlv_qmc::{
    greeks, Construction, DirectionNumbers, GreekShifts, HlvParams, OptionSpec, UniformStream,
};

pub fn run_example() -> hlv_qmc::Result<()> {
    let params = HlvParams::study_defaults();
    let shifts = GreekShifts::default_for(&params);
    for strike in [80.0, 100.0, 120.0] {
        let spec = OptionSpec::geometric_asian(strike, 1.0, 64);
        let mut stream = UniformStream::sobol(&DirectionNumbers::builtin(), spec.fixings)?;
        let g = greeks(
            &spec,
            &params,
            &mut stream,
            Construction::BrownianBridge,
            1 << 12,
            shifts,
        )?;
        println!(
            "K={strike:>5}: price {:8.4}  delta {:.4}  gamma {:.5}  vega_nu {:8.4}  vega_beta {:8.4}",
            g.price, g.delta, g.gamma, g.vega_nu, g.vega_beta
        );
        assert!(g.delta > 0.0 && g.delta < 1.0);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> hlv_qmc::Result<()> {
    run_example()
}
