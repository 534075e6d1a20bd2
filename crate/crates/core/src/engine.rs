//! Path simulation driver shared by pricing, Greeks and the study harness.
//!
//! Uniform points are drawn sequentially in fixed-size chunks; the per-path
//! work (Gaussian transform, Wiener path, Euler walk for every parameter set)
//! runs in parallel, and results are handed to the caller strictly in path
//! order. Any reduction done by the caller therefore has a fixed summation
//! order, and results are bit-identical for every thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hlv::{summarize_lockstep, HlvParams, LogEuler, PathSummary};
use crate::normal::uniforms_to_gaussians_into;
use crate::path::{Construction, PathBuilder, TimeGrid};
use crate::uniform::UniformStream;

/// Paths per chunk. Fixed so that chunking never depends on the thread pool.
const CHUNK_PATHS: usize = 1024;
/// Paths stepped together by one worker.
const GROUP_PATHS: usize = 4;

/// Simulates several parameter sets on the same Wiener paths.
#[derive(Debug, Clone)]
pub struct Simulation {
    grid: TimeGrid,
    builder: PathBuilder,
    models: Vec<LogEuler>,
}

impl Simulation {
    pub fn new(grid: TimeGrid, construction: Construction, params: &[HlvParams]) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::domain("simulation needs at least one parameter set"));
        }
        for p in params {
            p.validate_degenerate()?;
        }
        Ok(Simulation {
            grid,
            builder: PathBuilder::new(construction, &grid),
            models: params.iter().map(|p| LogEuler::new(p, &grid)).collect(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn model_count(&self) -> usize {
        self.models.len()
    }

    /// Consumes exactly `paths` points from `stream`, calling `sink` once per
    /// path (in stream order) with one summary per parameter set.
    pub fn run(
        &self,
        stream: &mut UniformStream,
        paths: u64,
        mut sink: impl FnMut(&[PathSummary]),
    ) -> Result<()> {
        let dim = self.grid.steps();
        if stream.dimension() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: stream.dimension(),
            });
        }
        if paths > stream.remaining() {
            return Err(Error::Exhausted(format!(
                "{paths} paths requested, {} points left at cursor {}",
                stream.remaining(),
                stream.cursor()
            )));
        }
        let m = self.models.len();
        let chunk = CHUNK_PATHS.min(paths as usize).max(1);
        let mut uniforms = vec![0.0; chunk * dim];
        let mut summaries = vec![PathSummary::default(); chunk * m];
        let mut left = paths as usize;
        while left > 0 {
            let count = left.min(chunk);
            stream.fill_points(&mut uniforms[..count * dim])?;
            uniforms[..count * dim]
                .par_chunks(dim * GROUP_PATHS)
                .zip(summaries[..count * m].par_chunks_mut(m * GROUP_PATHS))
                .with_min_len(4)
                .for_each_init(
                    || {
                        (
                            vec![0.0; dim],
                            vec![0.0; (dim + 1) * GROUP_PATHS],
                            Vec::new(),
                        )
                    },
                    |(z, w, state), (u, out)| {
                        let g = u.len() / dim;
                        for (u, w) in u.chunks_exact(dim).zip(w.chunks_exact_mut(dim + 1)) {
                            uniforms_to_gaussians_into(u, z);
                            self.builder.fill(z, w);
                        }
                        summarize_lockstep(&self.models, &w[..g * (dim + 1)], dim, out, state);
                    },
                );
            for s in summaries[..count * m].chunks_exact(m) {
                sink(s);
            }
            left -= count;
        }
        Ok(())
    }
}

/// Running mean and variance (Welford), accumulated in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}
