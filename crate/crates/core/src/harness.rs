//! RMSE convergence studies.
//!
//! For every method and path count `N` the harness runs `L` replications,
//! compares them with a reference obtained from `L` Sobol + Brownian bridge
//! runs of `m` paths each, and fits `RMSE ∝ N^{-α}` on a log-log scale.
//!
//! Replication `l` of a Sobol method reads block `l` of size `m` of the
//! sequence (indices `1 + l m ..= (l + 1) m`); smaller `N` use a prefix of
//! that block. Mersenne replications use generators keyed by `(seed, l)`.
//! All quantities and strikes of a replication come from one simulation sweep.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greeks::{GreekBatch, GreekShifts, Recycling};
use crate::hlv::HlvParams;
use crate::path::{Construction, TimeGrid};
use crate::pricing::OptionStyle;
use crate::uniform::{DirectionNumbers, SequenceKind, UniformStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Price,
    Delta,
    Gamma,
    VegaNu,
    VegaBeta,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [
        Quantity::Price,
        Quantity::Delta,
        Quantity::Gamma,
        Quantity::VegaNu,
        Quantity::VegaBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Price => "price",
            Quantity::Delta => "delta",
            Quantity::Gamma => "gamma",
            Quantity::VegaNu => "vega_nu",
            Quantity::VegaBeta => "vega_beta",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    fn is_vega(self) -> bool {
        matches!(self, Quantity::VegaNu | Quantity::VegaBeta)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity {s:?}")))
    }
}

/// Sampling method: uniform source plus path construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Method {
    pub sequence: SequenceKind,
    pub construction: Construction,
}

impl Method {
    pub const MC_INCREMENTAL: Method = Method {
        sequence: SequenceKind::MersenneTwister,
        construction: Construction::Incremental,
    };
    pub const MC_BRIDGE: Method = Method {
        sequence: SequenceKind::MersenneTwister,
        construction: Construction::BrownianBridge,
    };
    pub const QMC_INCREMENTAL: Method = Method {
        sequence: SequenceKind::Sobol,
        construction: Construction::Incremental,
    };
    pub const QMC_BRIDGE: Method = Method {
        sequence: SequenceKind::Sobol,
        construction: Construction::BrownianBridge,
    };
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let seq = match self.sequence {
            SequenceKind::MersenneTwister => "mc",
            SequenceKind::Sobol => "qmc",
        };
        write!(f, "{seq}_{}", self.construction)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mc_incremental" => Method::MC_INCREMENTAL,
            "mc_bridge" => Method::MC_BRIDGE,
            "qmc_incremental" => Method::QMC_INCREMENTAL,
            "qmc_bridge" => Method::QMC_BRIDGE,
            _ => return Err(Error::Config(format!("unknown method {s:?}"))),
        })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// One convergence study. Unspecified fields take the standard study defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: HlvParams,
    pub maturity: f64,
    pub steps: usize,
    pub strikes: Vec<f64>,
    pub quantities: Vec<Quantity>,
    pub methods: Vec<Method>,
    pub path_grid: Vec<u64>,
    /// Replications L.
    pub runs: usize,
    /// Paths m per reference replication.
    pub reference_paths: u64,
    pub seed: u64,
    /// Spot bump as a percentage of spot.
    pub shift_spot_pct: f64,
    /// ν and β bumps as a percentage of their values.
    pub shift_param_pct: f64,
    /// Direction-number file; the built-in table when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dirnums: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: HlvParams::study_defaults(),
            maturity: 1.0,
            steps: 256,
            strikes: vec![80.0, 100.0, 120.0],
            quantities: Quantity::ALL.to_vec(),
            methods: vec![Method::MC_INCREMENTAL, Method::QMC_BRIDGE],
            path_grid: (7..=14).map(|p| 1u64 << p).collect(),
            runs: 10,
            reference_paths: 1 << 18,
            seed: 2_718_281,
            shift_spot_pct: 1.0,
            shift_param_pct: 1.0,
            dirnums: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate_degenerate()?;
        TimeGrid::new(self.maturity, self.steps)?;
        if self.runs < 2 {
            return Err(Error::Config(format!(
                "runs must be at least 2, got {}",
                self.runs
            )));
        }
        if self.path_grid.is_empty() || self.path_grid[0] == 0 {
            return Err(Error::Config(
                "path grid must hold positive path counts".into(),
            ));
        }
        if self.path_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "path grid must be strictly increasing".into(),
            ));
        }
        let largest = *self.path_grid.last().unwrap();
        if self.reference_paths <= largest {
            return Err(Error::Config(format!(
                "reference paths {} must exceed the largest grid size {largest}",
                self.reference_paths
            )));
        }
        if let Some(k) = self.strikes.iter().find(|&&k| !(k > 0.0)) {
            return Err(Error::Config(format!("strikes must be positive, got {k}")));
        }
        if !(self.shift_spot_pct > 0.0 && self.shift_param_pct > 0.0) {
            return Err(Error::Config("shift percentages must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::new(self.maturity, self.steps).expect("validated grid")
    }

    pub fn shifts(&self) -> GreekShifts {
        GreekShifts::relative(
            &self.params,
            self.shift_spot_pct / 100.0,
            self.shift_param_pct / 100.0,
        )
    }

    fn needs_vegas(&self) -> bool {
        self.quantities.iter().any(|q| q.is_vega())
    }

    fn needs_greeks(&self) -> bool {
        self.quantities.iter().any(|&q| q != Quantity::Price)
    }
}

/// OLS fit of `ln ε = intercept - α ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points dropped because their RMSE was zero.
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub paths: u64,
    pub mean_estimate: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub quantity: Quantity,
    pub strike: f64,
    pub method: Method,
    pub reference: f64,
    pub points: Vec<CurvePoint>,
    /// `None` when fewer than three points have positive RMSE.
    pub fit: Option<RateFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub runs: usize,
    pub curves: Vec<ConvergenceCurve>,
}

impl ConvergenceReport {
    pub fn curve(
        &self,
        quantity: Quantity,
        strike: f64,
        method: Method,
    ) -> Option<&ConvergenceCurve> {
        self.curves
            .iter()
            .find(|c| c.quantity == quantity && c.strike == strike && c.method == method)
    }
}

/// `ε = sqrt( (1/L) Σ (Q_ref - Q^{(l)})² )`.
pub fn rmse(values: &[f64], reference: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("RMSE of an empty set"));
    }
    let ss: f64 = values.iter().map(|v| (reference - v).powi(2)).sum();
    Ok((ss / values.len() as f64).sqrt())
}

pub fn fit_convergence_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(n, e)| (n.ln(), e.ln()))
        .collect();
    let excluded = points.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points (of {}), need 3",
            usable.len(),
            points.len()
        )));
    }
    let k = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / k;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = usable.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all path counts are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        alpha: -slope,
        intercept,
        r_squared,
        excluded,
    })
}

/// Values of every quantity for every strike of one replication: `[strike][quantity]`.
type CellValues = Vec<[f64; 5]>;

/// Resolved study: config plus Sobol table and stream prototypes.
#[derive(Debug, Clone)]
pub struct Study {
    config: ExperimentConfig,
    sobol: UniformStream,
}

impl Study {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let table: Arc<DirectionNumbers> = match &config.dirnums {
            Some(path) => Arc::new(DirectionNumbers::load(path)?),
            None => DirectionNumbers::builtin(),
        };
        let sobol = UniformStream::sobol(&table, config.steps)?;
        Ok(Study { config, sobol })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    /// Stream for replication `run` of `sequence`; every block holds `m` points.
    pub fn run_stream(&self, sequence: SequenceKind, run: usize) -> Result<UniformStream> {
        let block = self.config.reference_paths;
        match sequence {
            SequenceKind::Sobol => self.sobol.partition(run as u64, block),
            SequenceKind::MersenneTwister => {
                UniformStream::mersenne(self.config.seed, self.config.steps)?
                    .partition(run as u64, block)
            }
        }
    }

    fn cell(&self, method: Method, paths: u64, run: usize) -> Result<CellValues> {
        let cfg = &self.config;
        let mut stream = self.run_stream(method.sequence, run)?;
        let batch = GreekBatch {
            style: OptionStyle::GeometricAsianCall,
            grid: cfg.grid(),
            params: cfg.params,
            shifts: cfg.shifts(),
            vegas: cfg.needs_vegas(),
        };
        let prices = batch.scenario_prices(
            &cfg.strikes,
            &mut stream,
            method.construction,
            paths,
            Recycling::Recycled,
        )?;
        let greeks = cfg.needs_greeks();
        Ok(prices
            .iter()
            .map(|p| {
                let r = batch.report(p);
                if greeks {
                    [r.price, r.delta, r.gamma, r.vega_nu, r.vega_beta]
                } else {
                    [r.price, f64::NAN, f64::NAN, f64::NAN, f64::NAN]
                }
            })
            .collect())
    }

    fn strike_index(&self, strike: f64) -> Result<usize> {
        self.config
            .strikes
            .iter()
            .position(|&k| k == strike)
            .ok_or_else(|| Error::Config(format!("strike {strike} is not part of the study")))
    }

    /// `Q_N^{(l)}` for `l = 0..L`.
    pub fn run_replications(
        &self,
        quantity: Quantity,
        strike: f64,
        method: Method,
        paths: u64,
    ) -> Result<Vec<f64>> {
        let k = self.strike_index(strike)?;
        (0..self.config.runs)
            .map(|run| Ok(self.cell(method, paths, run)?[k][quantity.index()]))
            .collect()
    }

    /// Reference values for every `[strike][quantity]`.
    fn references(&self) -> Result<CellValues> {
        let runs = self.config.runs;
        let mut acc = vec![[0.0; 5]; self.config.strikes.len()];
        for run in 0..runs {
            let cell = self.cell(Method::QMC_BRIDGE, self.config.reference_paths, run)?;
            for (a, c) in acc.iter_mut().zip(&cell) {
                for (x, y) in a.iter_mut().zip(c) {
                    *x += y;
                }
            }
        }
        for a in &mut acc {
            for x in a.iter_mut() {
                *x /= runs as f64;
            }
        }
        Ok(acc)
    }

    /// `Q_ref = (1/L) Σ Q_m^{(l)}` from Sobol + Brownian bridge.
    pub fn reference_value(&self, quantity: Quantity, strike: f64) -> Result<f64> {
        let k = self.strike_index(strike)?;
        Ok(self.references()?[k][quantity.index()])
    }

    pub fn run(&self) -> Result<ConvergenceReport> {
        let cfg = &self.config;
        let reference = self.references()?;
        let mut curves = Vec::new();
        for &method in &cfg.methods {
            // estimates[n][run][strike][quantity]
            let mut estimates = Vec::with_capacity(cfg.path_grid.len());
            for &n in &cfg.path_grid {
                let per_run = (0..cfg.runs)
                    .map(|run| self.cell(method, n, run))
                    .collect::<Result<Vec<_>>>()?;
                estimates.push(per_run);
            }
            for &quantity in &cfg.quantities {
                for (k, &strike) in cfg.strikes.iter().enumerate() {
                    let q_ref = reference[k][quantity.index()];
                    let points = cfg
                        .path_grid
                        .iter()
                        .zip(&estimates)
                        .map(|(&paths, per_run)| {
                            let values: Vec<f64> =
                                per_run.iter().map(|c| c[k][quantity.index()]).collect();
                            Ok(CurvePoint {
                                paths,
                                mean_estimate: values.iter().sum::<f64>() / values.len() as f64,
                                rmse: rmse(&values, q_ref)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let xy: Vec<(f64, f64)> =
                        points.iter().map(|p| (p.paths as f64, p.rmse)).collect();
                    curves.push(ConvergenceCurve {
                        quantity,
                        strike,
                        method,
                        reference: q_ref,
                        points,
                        fit: fit_convergence_rate(&xy).ok(),
                    });
                }
            }
        }
        Ok(ConvergenceReport {
            runs: cfg.runs,
            curves,
        })
    }
}

pub fn run_replications(
    config: &ExperimentConfig,
    quantity: Quantity,
    strike: f64,
    method: Method,
    paths: u64,
) -> Result<Vec<f64>> {
    Study::new(config.clone())?.run_replications(quantity, strike, method, paths)
}

pub fn reference_value(config: &ExperimentConfig, quantity: Quantity, strike: f64) -> Result<f64> {
    Study::new(config.clone())?.reference_value(quantity, strike)
}

pub fn run_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    Study::new(config.clone())?.run()
}

/// 17 significant digits: lossless for f64.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn curve_file_name(quantity: Quantity, strike: f64) -> String {
    format!("{}_K{}.csv", quantity.name(), strike)
}

pub const CURVE_HEADER: [&str; 4] = ["method", "N", "mean_estimate", "rmse"];
pub const SUMMARY_HEADER: [&str; 6] = [
    "quantity",
    "strike",
    "method",
    "alpha",
    "r_squared",
    "reference_value",
];
pub const SUMMARY_FILE: &str = "summary.csv";

/// Writes one CSV per (quantity, strike) and `summary.csv` into `dir`.
///
/// Curve files: `method,N,mean_estimate,rmse`. Summary:
/// `quantity,strike,method,alpha,r_squared,reference_value`; `alpha` and
/// `r_squared` are empty when no fit was possible. Returns the written paths.
pub fn emit_report(report: &ConvergenceReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut written = Vec::new();

    let mut keys: Vec<(Quantity, f64)> = Vec::new();
    for c in &report.curves {
        if !keys.contains(&(c.quantity, c.strike)) {
            keys.push((c.quantity, c.strike));
        }
    }
    for (quantity, strike) in keys {
        let path = dir.join(curve_file_name(quantity, strike));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(CURVE_HEADER)?;
        for c in report
            .curves
            .iter()
            .filter(|c| c.quantity == quantity && c.strike == strike)
        {
            for p in &c.points {
                w.write_record([
                    c.method.to_string(),
                    p.paths.to_string(),
                    format_value(p.mean_estimate),
                    format_value(p.rmse),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::file(&path, e))?;
        written.push(path);
    }

    let path = dir.join(SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(SUMMARY_HEADER)?;
    for c in &report.curves {
        let (alpha, r2) = match c.fit {
            Some(f) => (format_value(f.alpha), format_value(f.r_squared)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            c.quantity.name().to_string(),
            c.strike.to_string(),
            c.method.to_string(),
            alpha,
            r2,
            format_value(c.reference),
        ])?;
    }
    w.flush().map_err(|e| Error::file(&path, e))?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CurveRow {
    pub method: Method,
    #[serde(rename = "N")]
    pub paths: u64,
    pub mean_estimate: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub quantity: Quantity,
    pub strike: f64,
    pub method: Method,
    pub alpha: Option<f64>,
    pub r_squared: Option<f64>,
    pub reference_value: f64,
}

pub fn read_curve_csv(path: impl AsRef<Path>) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn read_summary_csv(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
