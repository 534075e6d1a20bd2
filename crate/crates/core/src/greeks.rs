//! Central finite-difference Greeks with path recycling.
//!
//! With the normalized-spot convention a spot bump only rescales the payoff
//! (`S0' · max(X̄ - K/S0', 0)`), so Delta and Gamma come from the base paths.
//! The ν and β bumps re-run the Euler walk on the same Wiener paths. In
//! recycled mode one sweep over `N` uniform points therefore evaluates all
//! seven parameter sets.

use serde::{Deserialize, Serialize};

use crate::engine::Simulation;
use crate::error::{Error, Result};
use crate::hlv::HlvParams;
use crate::path::{Construction, TimeGrid};
use crate::pricing::{call_payoff, OptionSpec, OptionStyle};
use crate::uniform::UniformStream;

/// Absolute bump sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreekShifts {
    pub spot: f64,
    pub nu: f64,
    pub beta: f64,
}

impl GreekShifts {
    /// Shifts as fractions of the current spot, ν and β.
    pub fn relative(params: &HlvParams, spot_fraction: f64, param_fraction: f64) -> Self {
        GreekShifts {
            spot: spot_fraction * params.spot,
            nu: param_fraction * params.nu,
            beta: param_fraction * params.beta,
        }
    }

    /// 1% of each.
    pub fn default_for(params: &HlvParams) -> Self {
        Self::relative(params, 0.01, 0.01)
    }

    fn check(&self, params: &HlvParams, vegas: bool) -> Result<()> {
        if !(self.spot > 0.0) {
            return Err(Error::ShiftDomain(format!(
                "spot shift must be positive, got {}",
                self.spot
            )));
        }
        if params.spot - self.spot <= 0.0 {
            return Err(Error::ShiftDomain(format!(
                "spot shift {} leaves a non-positive spot",
                self.spot
            )));
        }
        if !vegas {
            return Ok(());
        }
        if !(self.nu > 0.0 && self.beta > 0.0) {
            return Err(Error::ShiftDomain(
                "parameter shifts must be positive".into(),
            ));
        }
        if params.nu - self.nu <= 0.0 {
            return Err(Error::ShiftDomain(format!(
                "nu shift {} leaves a non-positive nu",
                self.nu
            )));
        }
        if params.beta - self.beta <= 0.0 {
            return Err(Error::ShiftDomain(format!(
                "beta shift {} leaves a non-positive beta",
                self.beta
            )));
        }
        if params.beta + self.beta > 1.0 {
            return Err(Error::ShiftDomain(format!(
                "beta + shift = {} exceeds 1; use a shift of at most {}",
                params.beta + self.beta,
                1.0 - params.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreekReport {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
    pub vega_nu: f64,
    pub vega_beta: f64,
}

/// Price, Delta and Gamma only (no parameter bumps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpotGreeks {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recycling {
    /// Every bumped price uses the same uniform points.
    Recycled,
    /// Every bumped price draws its own block of points from the stream.
    Independent,
}

// Slots of the seven priced scenarios.
const BASE: usize = 0;
const SPOT_UP: usize = 1;
const SPOT_DOWN: usize = 2;
const NU_UP: usize = 3;
const NU_DOWN: usize = 4;
const BETA_UP: usize = 5;
const BETA_DOWN: usize = 6;
const SCENARIOS: usize = 7;

/// A priced scenario: which simulated model to read and at what spot.
#[derive(Debug, Clone, Copy)]
struct Scenario {
    model: usize,
    spot: f64,
}

/// Central differences over a batch of strikes sharing one simulation.
#[derive(Debug, Clone)]
pub(crate) struct GreekBatch {
    pub style: OptionStyle,
    pub grid: TimeGrid,
    pub params: HlvParams,
    pub shifts: GreekShifts,
    pub vegas: bool,
}

impl GreekBatch {
    fn models(&self) -> Vec<HlvParams> {
        let p = self.params;
        let mut models = vec![p];
        if self.vegas {
            models.extend([
                HlvParams {
                    nu: p.nu + self.shifts.nu,
                    ..p
                },
                HlvParams {
                    nu: p.nu - self.shifts.nu,
                    ..p
                },
                HlvParams {
                    beta: p.beta + self.shifts.beta,
                    ..p
                },
                HlvParams {
                    beta: p.beta - self.shifts.beta,
                    ..p
                },
            ]);
        }
        models
    }

    fn scenarios(&self) -> Vec<Scenario> {
        let s = self.params.spot;
        let e = self.shifts.spot;
        let mut out = vec![
            Scenario { model: 0, spot: s },
            Scenario {
                model: 0,
                spot: s + e,
            },
            Scenario {
                model: 0,
                spot: s - e,
            },
        ];
        if self.vegas {
            out.extend((1..=4).map(|model| Scenario { model, spot: s }));
        }
        out
    }

    /// Discounted mean payoff for each `[strike][scenario]`.
    pub fn scenario_prices(
        &self,
        strikes: &[f64],
        stream: &mut UniformStream,
        construction: Construction,
        paths: u64,
        recycling: Recycling,
    ) -> Result<Vec<[f64; SCENARIOS]>> {
        self.shifts.check(&self.params, self.vegas)?;
        let discount = (-self.params.rate * self.grid.maturity()).exp();
        let models = self.models();
        let scenarios = self.scenarios();
        let mut sums = vec![[0.0; SCENARIOS]; strikes.len()];
        match recycling {
            Recycling::Recycled => {
                let sim = Simulation::new(self.grid, construction, &models)?;
                sim.run(stream, paths, |summaries| {
                    for (row, &k) in sums.iter_mut().zip(strikes) {
                        for (slot, sc) in row.iter_mut().zip(&scenarios) {
                            *slot += call_payoff(self.style, &summaries[sc.model], sc.spot, k);
                        }
                    }
                })?;
            }
            Recycling::Independent => {
                for (idx, sc) in scenarios.iter().enumerate() {
                    let sim =
                        Simulation::new(self.grid, construction, &models[sc.model..=sc.model])?;
                    sim.run(stream, paths, |summaries| {
                        for (row, &k) in sums.iter_mut().zip(strikes) {
                            row[idx] += call_payoff(self.style, &summaries[0], sc.spot, k);
                        }
                    })?;
                }
            }
        }
        let scale = discount / paths as f64;
        for row in &mut sums {
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        Ok(sums)
    }

    pub fn report(&self, prices: &[f64; SCENARIOS]) -> GreekReport {
        let es = self.shifts.spot;
        let (vega_nu, vega_beta) = if self.vegas {
            (
                (prices[NU_UP] - prices[NU_DOWN]) / (2.0 * self.shifts.nu),
                (prices[BETA_UP] - prices[BETA_DOWN]) / (2.0 * self.shifts.beta),
            )
        } else {
            (f64::NAN, f64::NAN)
        };
        GreekReport {
            price: prices[BASE],
            delta: (prices[SPOT_UP] - prices[SPOT_DOWN]) / (2.0 * es),
            gamma: (prices[SPOT_UP] + prices[SPOT_DOWN] - 2.0 * prices[BASE]) / (es * es),
            vega_nu,
            vega_beta,
        }
    }
}

fn batch(
    spec: &OptionSpec,
    params: &HlvParams,
    shifts: GreekShifts,
    vegas: bool,
) -> Result<GreekBatch> {
    spec.validate()?;
    params.validate_degenerate()?;
    Ok(GreekBatch {
        style: spec.style,
        grid: spec.grid()?,
        params: *params,
        shifts,
        vegas,
    })
}

/// Delta, Gamma, ν-Vega and β-Vega by central differences on recycled paths.
///
/// Consumes `paths` points from `stream`.
pub fn greeks(
    spec: &OptionSpec,
    params: &HlvParams,
    stream: &mut UniformStream,
    construction: Construction,
    paths: u64,
    shifts: GreekShifts,
) -> Result<GreekReport> {
    greeks_with(
        spec,
        params,
        stream,
        construction,
        paths,
        shifts,
        Recycling::Recycled,
    )
}

/// As [`greeks`], choosing whether bumped prices share uniform points.
/// Independent mode consumes `7 · paths` points.
pub fn greeks_with(
    spec: &OptionSpec,
    params: &HlvParams,
    stream: &mut UniformStream,
    construction: Construction,
    paths: u64,
    shifts: GreekShifts,
    recycling: Recycling,
) -> Result<GreekReport> {
    let b = batch(spec, params, shifts, true)?;
    let prices = b.scenario_prices(&[spec.strike], stream, construction, paths, recycling)?;
    Ok(b.report(&prices[0]))
}

/// Price, Delta and Gamma without parameter bumps; valid at β = 1.
pub fn spot_greeks(
    spec: &OptionSpec,
    params: &HlvParams,
    stream: &mut UniformStream,
    construction: Construction,
    paths: u64,
    shifts: GreekShifts,
    recycling: Recycling,
) -> Result<SpotGreeks> {
    let b = batch(spec, params, shifts, false)?;
    let prices = b.scenario_prices(&[spec.strike], stream, construction, paths, recycling)?;
    let r = b.report(&prices[0]);
    Ok(SpotGreeks {
        price: r.price,
        delta: r.delta,
        gamma: r.gamma,
    })
}
