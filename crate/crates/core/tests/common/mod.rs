//! Checks shared by the property and acceptance suites.
#![allow(dead_code)]

use hlv_qmc::normal::{inv_normal_cdf, uniforms_to_gaussians};
use hlv_qmc::path::{bridge_path, incremental_path, PathBuilder};
use hlv_qmc::uniform::SobolGenerator;
use hlv_qmc::{BridgePlan, Construction, DirectionNumbers, TimeGrid, UniformStream};
use statrs::distribution::{ContinuousCDF, Normal};

/// Cells `[k/2^q, (k+1)/2^q)` with `2^q <= N` that do not hold exactly
/// `N/2^q` of the Sobol points `0..N`, over `N = 2^p <= 2^max_p` and the
/// first `dims` coordinates.
pub fn dyadic_defects(max_p: u32, dims: usize) -> usize {
    let gen = SobolGenerator::new(&DirectionNumbers::builtin(), dims).unwrap();
    let n_max = 1u64 << max_p;
    let points: Vec<Vec<u32>> = (0..n_max)
        .map(|i| {
            let mut bits = vec![0u32; dims];
            gen.point_bits(i, &mut bits);
            bits
        })
        .collect();
    let mut defects = 0;
    for p in 0..=max_p {
        let n = 1usize << p;
        for j in 0..dims {
            for q in 0..=p {
                let mut counts = vec![0usize; 1 << q];
                for pt in &points[..n] {
                    let cell = if q == 0 {
                        0
                    } else {
                        (pt[j] >> (32 - q)) as usize
                    };
                    counts[cell] += 1;
                }
                defects += counts.iter().filter(|&&c| c != n >> q).count();
            }
        }
    }
    defects
}

/// `A` with `W = A z` for the given construction, rows `t_1..t_n`.
pub fn linear_map(construction: Construction, n: usize) -> Vec<Vec<f64>> {
    let grid = TimeGrid::new(1.0, n).unwrap();
    let builder = PathBuilder::new(construction, &grid);
    let mut a = vec![vec![0.0; n]; n];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n + 1];
    for k in 0..n {
        z.fill(0.0);
        z[k] = 1.0;
        builder.fill(&z, &mut w);
        for i in 0..n {
            a[i][k] = w[i + 1];
        }
    }
    a
}

/// Largest `|Σ_k A_ik A_jk - min(t_i, t_j)|`.
pub fn exact_covariance_error(construction: Construction, n: usize) -> f64 {
    let grid = TimeGrid::new(1.0, n).unwrap();
    let a = linear_map(construction, n);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let cov: f64 = a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum();
            worst = worst.max((cov - grid.time(i.min(j) + 1)).abs());
        }
    }
    worst
}

/// Largest `|Ĉov - min(t_i,t_j)| / σ̂` over all pairs, from `paths` pseudo-random paths.
pub fn sampled_covariance_zscore(
    construction: Construction,
    n: usize,
    paths: usize,
    seed: u64,
) -> f64 {
    let grid = TimeGrid::new(1.0, n).unwrap();
    let plan = BridgePlan::new(&grid);
    let mut stream = UniformStream::mersenne(seed, n).unwrap();
    let samples: Vec<Vec<f64>> = (0..paths)
        .map(|_| {
            let z = uniforms_to_gaussians(&stream.next_point().unwrap()).unwrap();
            match construction {
                Construction::Incremental => incremental_path(&z, &grid).unwrap().values,
                Construction::BrownianBridge => bridge_path(&z, &plan, &grid).unwrap().values,
            }
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let prods: Vec<f64> = samples.iter().map(|w| w[i] * w[j]).collect();
            let mean = prods.iter().sum::<f64>() / paths as f64;
            let var = prods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (paths - 1) as f64;
            let sigma = (var / paths as f64).sqrt();
            worst = worst.max((mean - grid.time(i + 1)).abs() / sigma);
        }
    }
    worst
}

/// Largest `|Φ(Φ⁻¹(u)) - u|` over a log-spaced sweep of both tails and a uniform grid.
pub fn inverse_normal_round_trip_error() -> f64 {
    let n = Normal::standard();
    let mut us: Vec<f64> = (1..10_000).map(|i| i as f64 / 10_000.0).collect();
    for e in 1..=300 {
        let u = 10f64.powi(-e);
        us.push(u);
        us.push(1.0 - u);
    }
    us.into_iter()
        .filter(|&u| u > 0.0 && u < 1.0)
        .map(|u| (n.cdf(inv_normal_cdf(u).unwrap()) - u).abs())
        .fold(0.0, f64::max)
}
