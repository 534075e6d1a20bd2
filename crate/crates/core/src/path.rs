//! Wiener path constructions on an equally spaced time grid.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equally spaced knots `t_i = i T / n`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    maturity: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(maturity: f64, steps: usize) -> Result<Self> {
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::domain(format!(
                "maturity must be positive, got {maturity}"
            )));
        }
        if steps == 0 {
            return Err(Error::domain("time grid needs at least one step"));
        }
        Ok(TimeGrid { maturity, steps })
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.maturity / self.steps as f64
    }

    /// Knot `t_i`; `t_n` is exactly the maturity.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.maturity
        } else {
            i as f64 * self.dt()
        }
    }
}

/// `W(t_1) .. W(t_n)`; `W(t_0) = 0` is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    pub values: Vec<f64>,
}

impl WienerPath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Incremental,
    #[serde(rename = "bridge")]
    BrownianBridge,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Incremental => "incremental",
            Construction::BrownianBridge => "bridge",
        })
    }
}

/// One conditional draw of the bridge:
/// `W(t_i) = (1-γ) W(t_l) + γ W(t_m) + stddev · z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeEntry {
    pub target: usize,
    pub left: usize,
    /// `None` for the terminal draw, which only conditions on `W(t_0) = 0`.
    pub right: Option<usize>,
    pub gamma: f64,
    pub stddev: f64,
}

/// Order in which the bridge resolves the knots. Entry `k` consumes `z_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePlan {
    steps: usize,
    entries: Vec<BridgeEntry>,
}

impl BridgePlan {
    /// Terminal point first, then breadth-first bisection with floor midpoints.
    pub fn new(grid: &TimeGrid) -> Self {
        let n = grid.steps();
        let dt = grid.dt();
        let mut entries = Vec::with_capacity(n);
        entries.push(BridgeEntry {
            target: n,
            left: 0,
            right: None,
            gamma: 0.0,
            stddev: grid.maturity().sqrt(),
        });
        let mut queue = VecDeque::from([(0usize, n)]);
        while let Some((l, m)) = queue.pop_front() {
            if m - l < 2 {
                continue;
            }
            let i = (l + m) / 2;
            let gamma = (i - l) as f64 / (m - l) as f64;
            entries.push(BridgeEntry {
                target: i,
                left: l,
                right: Some(m),
                gamma,
                stddev: (gamma * (1.0 - gamma) * (m - l) as f64 * dt).sqrt(),
            });
            queue.push_back((l, i));
            queue.push_back((i, m));
        }
        BridgePlan { steps: n, entries }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn entries(&self) -> &[BridgeEntry] {
        &self.entries
    }

    /// Writes `W(t_0..=t_n)` into `w` (length `n + 1`).
    #[inline]
    fn fill(&self, z: &[f64], w: &mut [f64]) {
        w[0] = 0.0;
        for (e, &zk) in self.entries.iter().zip(z) {
            let mean = match e.right {
                Some(m) => (1.0 - e.gamma) * w[e.left] + e.gamma * w[m],
                None => w[e.left],
            };
            w[e.target] = mean + e.stddev * zk;
        }
    }
}

pub fn build_bridge_plan(grid: &TimeGrid) -> BridgePlan {
    BridgePlan::new(grid)
}

fn check_len(z: &[f64], n: usize) -> Result<()> {
    if z.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: z.len(),
        });
    }
    Ok(())
}

/// `W(t_i) = W(t_{i-1}) + √Δt z_i`.
pub fn incremental_path(z: &[f64], grid: &TimeGrid) -> Result<WienerPath> {
    check_len(z, grid.steps())?;
    let mut w = vec![0.0; grid.steps() + 1];
    fill_incremental(z, grid.dt().sqrt(), &mut w);
    w.remove(0);
    Ok(WienerPath { values: w })
}

pub fn bridge_path(z: &[f64], plan: &BridgePlan, grid: &TimeGrid) -> Result<WienerPath> {
    if plan.steps() != grid.steps() {
        return Err(Error::Dimension {
            expected: grid.steps(),
            actual: plan.steps(),
        });
    }
    check_len(z, grid.steps())?;
    let mut w = vec![0.0; grid.steps() + 1];
    plan.fill(z, &mut w);
    w.remove(0);
    Ok(WienerPath { values: w })
}

#[inline]
fn fill_incremental(z: &[f64], sqrt_dt: f64, w: &mut [f64]) {
    w[0] = 0.0;
    let mut acc = 0.0;
    for (wi, &zi) in w[1..].iter_mut().zip(z) {
        acc += sqrt_dt * zi;
        *wi = acc;
    }
}

/// Reusable builder for the simulation loop.
#[derive(Debug, Clone)]
pub enum PathBuilder {
    Incremental { sqrt_dt: f64, steps: usize },
    Bridge(BridgePlan),
}

impl PathBuilder {
    pub fn new(construction: Construction, grid: &TimeGrid) -> Self {
        match construction {
            Construction::Incremental => PathBuilder::Incremental {
                sqrt_dt: grid.dt().sqrt(),
                steps: grid.steps(),
            },
            Construction::BrownianBridge => PathBuilder::Bridge(BridgePlan::new(grid)),
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            PathBuilder::Incremental { steps, .. } => *steps,
            PathBuilder::Bridge(plan) => plan.steps(),
        }
    }

    /// Writes `W(t_0..=t_n)` into `w`; `z` has length `n`, `w` length `n + 1`.
    #[inline]
    pub fn fill(&self, z: &[f64], w: &mut [f64]) {
        debug_assert_eq!(z.len() + 1, w.len());
        match self {
            PathBuilder::Incremental { sqrt_dt, .. } => fill_incremental(z, *sqrt_dt, w),
            PathBuilder::Bridge(plan) => plan.fill(z, w),
        }
    }
}
