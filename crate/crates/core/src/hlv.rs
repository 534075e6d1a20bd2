//! Hyperbolic local volatility model and its log-space Euler scheme.
//!
//! The model is simulated on the normalized spot `X = S / S0` (so `X0 = 1`,
//! where the hyperbola's kink sits at the money) and reported as `S = S0 X`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{TimeGrid, WienerPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlvParams {
    /// Volatility level ν.
    pub nu: f64,
    /// Skew β in (0, 1]; β = 1 is Black–Scholes.
    pub beta: f64,
    /// Continuously compounded risk-free rate.
    pub rate: f64,
    /// Initial spot S0.
    pub spot: f64,
}

impl HlvParams {
    pub fn new(nu: f64, beta: f64, rate: f64, spot: f64) -> Result<Self> {
        let p = HlvParams {
            nu,
            beta,
            rate,
            spot,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::domain(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        self.validate_degenerate()
    }

    /// Accepts ν = 0 (deterministic paths), otherwise as [`validate`](Self::validate).
    pub(crate) fn validate_degenerate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::domain(format!(
                "nu must be non-negative, got {}",
                self.nu
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::domain(format!(
                "beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.spot > 0.0 && self.spot.is_finite()) {
            return Err(Error::domain(format!(
                "spot must be positive, got {}",
                self.spot
            )));
        }
        if !self.rate.is_finite() {
            return Err(Error::domain("rate must be finite"));
        }
        Ok(())
    }

    /// Standard study parameters: S0 = 100, r = 3%, ν = 30%, β = 0.5.
    pub fn study_defaults() -> Self {
        HlvParams {
            nu: 0.3,
            beta: 0.5,
            rate: 0.03,
            spot: 100.0,
        }
    }
}

/// `σ̃(S) = ν [ (1-β+β²)/β · S + (β-1)/β · (√(S² + β²(1-S)²) - β) ]`.
///
/// Evaluated as `ν [βS + (1-β)(1 - β(1-S)²/(R+S))]` with `R = √(S² + β²(1-S)²)`,
/// which is algebraically identical but avoids cancelling `1/β`-sized terms.
pub fn local_vol(s: f64, nu: f64, beta: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("local vol needs s > 0, got {s}")));
    }
    let d = 1.0 - s;
    let root = (s * s + beta * beta * d * d).sqrt();
    Ok(nu * (beta * s + (1.0 - beta) * (1.0 - beta * d * d / (root + s))))
}

/// `σ(y) = σ̃(e^y) / e^y`, the diffusion coefficient of `Y = ln X`.
pub fn log_local_vol(y: f64, nu: f64, beta: f64) -> f64 {
    LogVolatility::new(nu, beta).at(y)
}

/// `σ(y)` in terms of `u = e^{-y}`: `ν [β + (1-β)(u - β(u-1)²/(√(1 + β²(u-1)²) + 1))]`.
#[derive(Debug, Clone, Copy)]
pub struct LogVolatility {
    nu: f64,
    beta: f64,
}

impl LogVolatility {
    pub fn new(nu: f64, beta: f64) -> Self {
        LogVolatility { nu, beta }
    }

    #[inline]
    pub fn at(&self, y: f64) -> f64 {
        let b = self.beta;
        if b == 1.0 {
            return self.nu;
        }
        let u = (-y).exp();
        let d2 = (u - 1.0) * (u - 1.0);
        let q = (1.0 + b * b * d2).sqrt();
        self.nu * (b + (1.0 - b) * (u - b * d2 / (q + 1.0)))
    }
}

/// Summary statistics of one simulated log-path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PathSummary {
    /// `(1/n) Σ Y(t_i)`, i = 1..n: log of the normalized geometric average.
    pub log_average: f64,
    /// `Y(t_n)`.
    pub log_terminal: f64,
}

/// Log-space Euler–Maruyama stepper for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct LogEuler {
    vol: LogVolatility,
    rate: f64,
    dt: f64,
}

impl LogEuler {
    pub fn new(params: &HlvParams, grid: &TimeGrid) -> Self {
        LogEuler {
            vol: LogVolatility::new(params.nu, params.beta),
            rate: params.rate,
            dt: grid.dt(),
        }
    }

    /// `Y(t_{i+1}) = Y(t_i) + (r - σ²/2) Δt + σ (W(t_{i+1}) - W(t_i))`, `Y(0) = 0`.
    ///
    /// `w` holds `W(t_0..=t_n)`. Calls `visit(i, Y(t_i))` for i = 1..n.
    #[inline]
    pub fn walk(&self, w: &[f64], mut visit: impl FnMut(usize, f64)) {
        let mut y = 0.0;
        for (i, pair) in w.windows(2).enumerate() {
            let s = self.vol.at(y);
            y += (self.rate - 0.5 * s * s) * self.dt + s * (pair[1] - pair[0]);
            visit(i + 1, y);
        }
    }

    #[inline]
    pub fn summarize(&self, w: &[f64]) -> PathSummary {
        let mut sum = 0.0;
        let mut last = 0.0;
        self.walk(w, |_, y| {
            sum += y;
            last = y;
        });
        PathSummary {
            log_average: sum / (w.len() - 1) as f64,
            log_terminal: last,
        }
    }
}

/// Runs every model over every path in lockstep; the chains are independent,
/// so their `exp`/`sqrt` latencies overlap. Each chain performs exactly the
/// operations of [`LogEuler::summarize`], so results are bit-identical.
///
/// `paths` holds `g` consecutive Wiener paths of length `n + 1`; `out[p * m + k]`
/// receives path `p` under model `k`. `state` is scratch space.
pub fn summarize_lockstep(
    models: &[LogEuler],
    paths: &[f64],
    n: usize,
    out: &mut [PathSummary],
    state: &mut Vec<(f64, f64)>,
) {
    let m = models.len();
    let g = paths.len() / (n + 1);
    debug_assert_eq!(out.len(), g * m);
    state.clear();
    state.resize(g * m, (0.0, 0.0));
    for i in 0..n {
        for (p, chains) in state.chunks_exact_mut(m).enumerate() {
            let dw = paths[p * (n + 1) + i + 1] - paths[p * (n + 1) + i];
            for ((y, sum), model) in chains.iter_mut().zip(models) {
                let s = model.vol.at(*y);
                *y += (model.rate - 0.5 * s * s) * model.dt + s * dw;
                *sum += *y;
            }
        }
    }
    for (o, &(y, sum)) in out.iter_mut().zip(state.iter()) {
        *o = PathSummary {
            log_average: sum / n as f64,
            log_terminal: y,
        };
    }
}

/// `S(t_1) .. S(t_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetPath {
    pub values: Vec<f64>,
}

pub fn euler_log_path(w: &WienerPath, params: &HlvParams, grid: &TimeGrid) -> Result<AssetPath> {
    if w.len() != grid.steps() {
        return Err(Error::Dimension {
            expected: grid.steps(),
            actual: w.len(),
        });
    }
    params.validate_degenerate()?;
    let mut full = Vec::with_capacity(w.len() + 1);
    full.push(0.0);
    full.extend_from_slice(&w.values);
    let stepper = LogEuler::new(params, grid);
    let mut values = Vec::with_capacity(w.len());
    stepper.walk(&full, |_, y| values.push(params.spot * y.exp()));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite asset value"));
    }
    Ok(AssetPath { values })
}
