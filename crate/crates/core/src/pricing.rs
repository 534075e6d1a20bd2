//! Geometric Asian and European call pricing by simulation, plus the
//! Black–Scholes formulas used for implied volatility and as a β = 1 oracle.

use serde::{Deserialize, Serialize};

use crate::engine::{RunningStats, Simulation};
use crate::error::{Error, Result};
use crate::hlv::{AssetPath, HlvParams, PathSummary};
use crate::normal::{norm_cdf, norm_pdf};
use crate::path::{Construction, TimeGrid};
use crate::uniform::{SequenceKind, UniformStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionStyle {
    GeometricAsianCall,
    EuropeanCall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    /// Equally spaced fixings, identical to the simulation grid.
    pub fixings: usize,
    pub style: OptionStyle,
}

impl OptionSpec {
    pub fn geometric_asian(strike: f64, maturity: f64, fixings: usize) -> Self {
        OptionSpec {
            strike,
            maturity,
            fixings,
            style: OptionStyle::GeometricAsianCall,
        }
    }

    pub fn european(strike: f64, maturity: f64, steps: usize) -> Self {
        OptionSpec {
            strike,
            maturity,
            fixings: steps,
            style: OptionStyle::EuropeanCall,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(Error::domain(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.maturity, self.fixings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub value: f64,
    /// Standard error of the mean; pseudo-random streams only.
    pub std_error: Option<f64>,
    pub paths: u64,
    pub discount: f64,
}

/// `(Π S_i)^{1/n}`, computed as the exponential of the mean log.
pub fn geometric_average(path: &AssetPath) -> Result<f64> {
    if path.values.is_empty() {
        return Err(Error::domain("geometric average of an empty path"));
    }
    if path.values.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::domain("geometric average needs positive prices"));
    }
    let mean_log = path.values.iter().map(|s| s.ln()).sum::<f64>() / path.values.len() as f64;
    Ok(mean_log.exp())
}

pub fn asian_payoff(path: &AssetPath, strike: f64) -> Result<f64> {
    Ok((geometric_average(path)? - strike).max(0.0))
}

/// Undiscounted call payoff at spot `spot` from a normalized path summary.
#[inline]
pub(crate) fn call_payoff(
    style: OptionStyle,
    summary: &PathSummary,
    spot: f64,
    strike: f64,
) -> f64 {
    let log_x = match style {
        OptionStyle::GeometricAsianCall => summary.log_average,
        OptionStyle::EuropeanCall => summary.log_terminal,
    };
    (spot * log_x.exp() - strike).max(0.0)
}

/// Discounted simulation price `e^{-rT} (1/N) Σ payoff`.
///
/// Consumes exactly `paths` points from `stream`, whose dimension must equal
/// the number of fixings.
pub fn mc_price(
    spec: &OptionSpec,
    params: &HlvParams,
    stream: &mut UniformStream,
    construction: Construction,
    paths: u64,
) -> Result<PriceEstimate> {
    spec.validate()?;
    if paths == 0 {
        return Err(Error::domain("at least one path is required"));
    }
    let sim = Simulation::new(spec.grid()?, construction, std::slice::from_ref(params))?;
    let discount = (-params.rate * spec.maturity).exp();
    let mut stats = RunningStats::default();
    sim.run(stream, paths, |s| {
        stats.push(discount * call_payoff(spec.style, &s[0], params.spot, spec.strike))
    })?;
    Ok(PriceEstimate {
        value: stats.mean(),
        std_error: (stream.kind() == SequenceKind::MersenneTwister).then(|| stats.std_error()),
        paths,
        discount,
    })
}

/// Closed form for the discrete geometric Asian call under Black–Scholes
/// (β = 1), fixings at `t_i = i T / n`.
pub fn bs_geometric_asian_closed_form(params: &HlvParams, spec: &OptionSpec) -> Result<f64> {
    if params.beta != 1.0 {
        return Err(Error::domain(format!(
            "closed form needs beta = 1, got {}",
            params.beta
        )));
    }
    if spec.style != OptionStyle::GeometricAsianCall {
        return Err(Error::domain("closed form is for geometric Asian calls"));
    }
    spec.validate()?;
    params.validate_degenerate()?;
    let n = spec.fixings as f64;
    let t = spec.maturity;
    let nu = params.nu;
    let mean = params.spot.ln() + (params.rate - 0.5 * nu * nu) * t * (n + 1.0) / (2.0 * n);
    let var = nu * nu * t * (n + 1.0) * (2.0 * n + 1.0) / (6.0 * n * n);
    let discount = (-params.rate * t).exp();
    if var == 0.0 {
        return Ok(discount * (mean.exp() - spec.strike).max(0.0));
    }
    let sd = var.sqrt();
    let d1 = (mean - spec.strike.ln() + var) / sd;
    let d2 = d1 - sd;
    Ok(discount * ((mean + 0.5 * var).exp() * norm_cdf(d1) - spec.strike * norm_cdf(d2)))
}

fn bs_d1(spot: f64, strike: f64, rate: f64, sigma: f64, maturity: f64) -> f64 {
    ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * maturity) / (sigma * maturity.sqrt())
}

pub fn bs_european_call(
    spot: f64,
    strike: f64,
    rate: f64,
    sigma: f64,
    maturity: f64,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!(
            "volatility must be positive, got {sigma}"
        )));
    }
    if !(spot > 0.0 && strike > 0.0 && maturity > 0.0) {
        return Err(Error::domain("spot, strike and maturity must be positive"));
    }
    Ok(bs_call_unchecked(spot, strike, rate, sigma, maturity))
}

fn bs_call_unchecked(spot: f64, strike: f64, rate: f64, sigma: f64, maturity: f64) -> f64 {
    let d1 = bs_d1(spot, strike, rate, sigma, maturity);
    let d2 = d1 - sigma * maturity.sqrt();
    spot * norm_cdf(d1) - strike * (-rate * maturity).exp() * norm_cdf(d2)
}

/// `∂C/∂S`, the Black–Scholes call delta.
pub fn bs_call_delta(spot: f64, strike: f64, rate: f64, sigma: f64, maturity: f64) -> f64 {
    norm_cdf(bs_d1(spot, strike, rate, sigma, maturity))
}

fn bs_vega(spot: f64, strike: f64, rate: f64, sigma: f64, maturity: f64) -> f64 {
    spot * norm_pdf(bs_d1(spot, strike, rate, sigma, maturity)) * maturity.sqrt()
}

const IV_LOW: f64 = 1e-6;
const IV_HIGH: f64 = 5.0;

/// Black–Scholes implied volatility by bracketed bisection on
/// `[1e-6, 5]` with safeguarded Newton steps.
///
/// Converges once the repriced call is within `1e-10 · S0` of `price`.
pub fn implied_vol(price: f64, spot: f64, strike: f64, rate: f64, maturity: f64) -> Result<f64> {
    if !(spot > 0.0 && strike > 0.0 && maturity > 0.0) {
        return Err(Error::domain("spot, strike and maturity must be positive"));
    }
    let lower = (spot - strike * (-rate * maturity).exp()).max(0.0);
    if !(price > lower && price < spot) {
        return Err(Error::NoSolution(format!(
            "price {price} outside the no-arbitrage band ({lower}, {spot})"
        )));
    }
    let tol = 1e-10 * spot;
    let f = |s: f64| bs_call_unchecked(spot, strike, rate, s, maturity) - price;
    let (mut lo, mut hi) = (IV_LOW, IV_HIGH);
    if f(lo) > tol || f(hi) < -tol {
        return Err(Error::NoSolution(format!(
            "price {price} not bracketed by volatilities [{IV_LOW}, {IV_HIGH}]"
        )));
    }
    let mut sigma = 0.5 * (lo + hi);
    for _ in 0..300 {
        let diff = f(sigma);
        if diff > 0.0 {
            hi = sigma;
        } else {
            lo = sigma;
        }
        let vega = bs_vega(spot, strike, rate, sigma, maturity);
        let newton = sigma - diff / vega;
        if diff.abs() < tol {
            // one polishing step while it stays inside the bracket
            return Ok(if newton > lo && newton < hi {
                newton
            } else {
                sigma
            });
        }
        sigma = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < f64::EPSILON * hi {
            return Ok(sigma);
        }
    }
    Err(Error::NoSolution(format!(
        "no convergence for price {price}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmilePoint {
    pub strike: f64,
    pub price: f64,
    /// `None` when the simulated price falls outside the no-arbitrage band.
    pub implied_vol: Option<f64>,
}

/// Prices European calls under HLV for every strike from one set of
/// simulated paths and inverts each price to a Black–Scholes volatility.
pub fn implied_vol_curve(
    params: &HlvParams,
    strikes: &[f64],
    grid: TimeGrid,
    stream: &mut UniformStream,
    construction: Construction,
    paths: u64,
) -> Result<Vec<SmilePoint>> {
    if paths < 1 << 12 {
        return Err(Error::domain(format!(
            "implied vol curve needs at least 4096 paths, got {paths}"
        )));
    }
    if let Some(k) = strikes.iter().find(|&&k| !(k > 0.0)) {
        return Err(Error::domain(format!("strikes must be positive, got {k}")));
    }
    let sim = Simulation::new(grid, construction, std::slice::from_ref(params))?;
    let discount = (-params.rate * grid.maturity()).exp();
    let mut sums = vec![RunningStats::default(); strikes.len()];
    sim.run(stream, paths, |s| {
        for (acc, &k) in sums.iter_mut().zip(strikes) {
            acc.push(discount * call_payoff(OptionStyle::EuropeanCall, &s[0], params.spot, k));
        }
    })?;
    Ok(strikes
        .iter()
        .zip(&sums)
        .map(|(&strike, acc)| {
            let price = acc.mean();
            SmilePoint {
                strike,
                price,
                implied_vol: implied_vol(price, params.spot, strike, params.rate, grid.maturity())
                    .ok(),
            }
        })
        .collect())
}
