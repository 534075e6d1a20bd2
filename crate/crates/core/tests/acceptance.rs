//! One test per acceptance criterion. Each prints a PASS/FAIL line with the
//! measured values before asserting.

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use hlv_qmc::greeks::{greeks_with, Recycling};
use hlv_qmc::harness::{emit_report, fit_convergence_rate, rmse, run_study, ConvergenceCurve};
use hlv_qmc::hlv::local_vol;
use hlv_qmc::pricing::{bs_geometric_asian_closed_form, implied_vol_curve};
use hlv_qmc::{
    mc_price, Construction, ConvergenceReport, DirectionNumbers, ExperimentConfig, GreekShifts,
    HlvParams, Method, OptionSpec, Quantity, TimeGrid, UniformStream,
};

const STRIKES: [f64; 3] = [80.0, 100.0, 120.0];

fn verdict(criterion: u32, ok: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// The standard study: MC + incremental and QMC + bridge, L = 10, N = 2^7..2^14,
/// reference from 10 × 2^18 Sobol + bridge paths.
fn study() -> &'static ConvergenceReport {
    static REPORT: OnceLock<ConvergenceReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        let config = ExperimentConfig::default();
        assert_eq!(config.runs, 10);
        assert_eq!(config.reference_paths, 262_144);
        assert_eq!(
            config.path_grid,
            (7..=14).map(|p| 1u64 << p).collect::<Vec<_>>()
        );
        run_study(&config).expect("study runs")
    })
}

fn curve(q: Quantity, k: f64, m: Method) -> &'static ConvergenceCurve {
    study().curve(q, k, m).expect("curve present")
}

fn alpha(q: Quantity, k: f64, m: Method) -> f64 {
    curve(q, k, m).fit.expect("rate fitted").alpha
}

fn alphas_in(q: Quantity, m: Method, lo: f64, hi: f64) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for k in STRIKES {
        let a = alpha(q, k, m);
        ok &= (lo..=hi).contains(&a);
        parts.push(format!("K={k}: {a:.3}"));
    }
    (
        ok,
        format!("{q} {m} alpha in [{lo}, {hi}]: {}", parts.join(", ")),
    )
}

#[test]
fn criterion_1_black_scholes_oracle() {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let params = HlvParams::new(0.3, 1.0, 0.03, 100.0).unwrap();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for k in STRIKES {
        let spec = OptionSpec::geometric_asian(k, 1.0, 256);
        let exact = bs_geometric_asian_closed_form(&params, &spec).unwrap();
        let mut stream = UniformStream::sobol(&DirectionNumbers::builtin(), 256).unwrap();
        let est = pool
            .install(|| {
                mc_price(
                    &spec,
                    &params,
                    &mut stream,
                    Construction::BrownianBridge,
                    1 << 16,
                )
            })
            .unwrap();
        let rel = (est.value - exact).abs() / exact;
        ok &= rel < 2e-3;
        parts.push(format!("K={k}: {:.6} vs {exact:.6} ({rel:.1e})", est.value));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    verdict(
        1,
        ok,
        &format!("{}; {secs:.1}s single-threaded", parts.join(", ")),
    );
}

#[test]
fn criterion_2_mc_price_rate() {
    let (ok, detail) = alphas_in(Quantity::Price, Method::MC_INCREMENTAL, 0.4, 0.6);
    verdict(2, ok, &detail);
}

#[test]
fn criterion_3_qmc_bridge_price_rate() {
    let (wide, a) = alphas_in(Quantity::Price, Method::QMC_BRIDGE, 0.7, 1.1);
    // The reference already uses the full 262,144 paths, so the tighter band applies to the same run.
    let (tight, b) = alphas_in(Quantity::Price, Method::QMC_BRIDGE, 0.78, 1.05);
    verdict(3, wide && tight, &format!("{a}; {b}"));
}

#[test]
fn criterion_4_greek_rates() {
    let m = Method::QMC_BRIDGE;
    let checks = [
        alphas_in(Quantity::Delta, m, 0.55, 0.85),
        alphas_in(Quantity::Gamma, m, 0.35, 0.65),
        alphas_in(Quantity::VegaNu, m, 0.6, 0.95),
        alphas_in(Quantity::VegaBeta, m, 0.6, 0.95),
    ];
    let ok = checks.iter().all(|c| c.0);
    let detail: Vec<&str> = checks.iter().map(|c| c.1.as_str()).collect();
    verdict(4, ok, &detail.join("; "));
}

#[test]
fn criterion_5_qmc_bridge_dominates_at_8192() {
    let at = |m: Method, k: f64| {
        curve(Quantity::Price, k, m)
            .points
            .iter()
            .find(|p| p.paths == 8192)
            .expect("N = 2^13 on the grid")
            .rmse
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for k in STRIKES {
        let (q, mc) = (at(Method::QMC_BRIDGE, k), at(Method::MC_INCREMENTAL, k));
        ok &= q < mc;
        parts.push(format!("K={k}: {q:.2e} < {mc:.2e}"));
    }
    verdict(5, ok, &parts.join(", "));
}

fn smile(beta: f64, strikes: &[f64]) -> Vec<f64> {
    let params = HlvParams::new(0.3, beta, 0.03, 100.0).unwrap();
    let grid = TimeGrid::new(1.0, 256).unwrap();
    let mut stream = UniformStream::sobol(&DirectionNumbers::builtin(), 256).unwrap();
    implied_vol_curve(
        &params,
        strikes,
        grid,
        &mut stream,
        Construction::BrownianBridge,
        1 << 16,
    )
    .unwrap()
    .iter()
    .map(|p| p.implied_vol.unwrap_or(f64::NAN))
    .collect()
}

#[test]
fn criterion_6_skew_reproduction() {
    let v = smile(0.2, &[50.0, 100.0]);
    let skew = v[0] - v[1];
    let skew_ok = (skew - 0.15).abs() <= 0.03;

    let flat = smile(1.0, &[50.0, 75.0, 100.0, 125.0, 150.0]);
    let worst = flat.iter().map(|s| (s - 0.3).abs()).fold(0.0, f64::max);
    let flat_ok = worst <= 0.005;
    verdict(
        6,
        skew_ok && flat_ok,
        &format!(
            "beta=0.2: vol(50) - vol(100) = {:.4} - {:.4} = {skew:.4} (target 0.15 ± 0.03); beta=1: max |vol - 0.3| = {worst:.4} (≤ 0.005)",
            v[0], v[1]
        ),
    );
}

fn small_study_bytes(threads: usize) -> Vec<(String, Vec<u8>)> {
    let config = ExperimentConfig {
        steps: 16,
        strikes: vec![90.0, 110.0],
        methods: vec![
            Method::MC_INCREMENTAL,
            Method::QMC_INCREMENTAL,
            Method::QMC_BRIDGE,
            Method::MC_BRIDGE,
        ],
        path_grid: vec![64, 128, 256, 512, 1024, 2048],
        runs: 4,
        reference_paths: 1 << 13,
        ..ExperimentConfig::default()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    let report = pool.install(|| run_study(&config)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut files: Vec<_> = emit_report(&report, dir.path())
        .unwrap()
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_7_property_suites() {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("  {} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            failures.push(name.to_string());
        }
    };

    let defects = common::dyadic_defects(12, 16);
    check(
        "sobol dyadic equidistribution (N ≤ 2^12, 16 coordinates)",
        defects == 0,
        format!("{defects} defective cells"),
    );

    let mut worst_z: f64 = 0.0;
    for n in [4, 16] {
        for c in [Construction::Incremental, Construction::BrownianBridge] {
            worst_z = worst_z.max(common::sampled_covariance_zscore(
                c,
                n,
                1 << 13,
                77 + n as u64,
            ));
        }
    }
    check(
        "path covariance within 5 sigma",
        worst_z <= 5.0,
        format!("worst {worst_z:.2} sigma"),
    );

    let mut worst_var: f64 = 0.0;
    for n in [1, 2, 3, 5, 8, 16, 100, 256] {
        for c in [Construction::Incremental, Construction::BrownianBridge] {
            worst_var = worst_var.max(common::exact_covariance_error(c, n));
        }
    }
    check(
        "exact linear-map variance",
        worst_var <= 1e-12,
        format!("max error {worst_var:.1e}"),
    );

    let mut lv_err: f64 = 0.0;
    for beta in [0.01, 0.1, 0.2, 0.5, 0.9, 1.0] {
        lv_err = lv_err.max((local_vol(1.0, 0.3, beta).unwrap() - 0.3).abs());
    }
    for s in [0.01, 0.3, 1.0, 2.5, 40.0] {
        lv_err = lv_err.max((local_vol(s, 0.3, 1.0).unwrap() - 0.3 * s).abs() / s);
    }
    check(
        "local vol identities",
        lv_err <= 1e-15,
        format!("max error {lv_err:.1e}"),
    );

    let rt = common::inverse_normal_round_trip_error();
    check(
        "inverse normal round trip",
        rt <= 1e-9,
        format!("max error {rt:.1e}"),
    );

    let rmse_ok =
        rmse(&[2.0, 2.0, 2.0], 2.0).unwrap() == 0.0 && rmse(&[6.0, 4.0], 5.0).unwrap() == 1.0;
    let grid: Vec<(f64, f64)> = (7..=14)
        .map(|p| ((1u64 << p) as f64, ((1u64 << p) as f64).powf(-0.5)))
        .collect();
    let fit = fit_convergence_rate(&grid).unwrap();
    let fit_ok = (fit.alpha - 0.5).abs() < 1e-12 && (fit.r_squared - 1.0).abs() < 1e-12;
    check(
        "rmse and regression examples",
        rmse_ok && fit_ok,
        format!("alpha {:.15}", fit.alpha),
    );

    let one = small_study_bytes(1);
    let three = small_study_bytes(3);
    check(
        "converge bit-exact across thread counts",
        one == three && !one.is_empty(),
        format!("{} files compared", one.len()),
    );

    verdict(7, failures.is_empty(), &format!("failed: {failures:?}"));
}

#[test]
fn criterion_8_recycling_reduces_delta_spread() {
    let params = HlvParams::study_defaults();
    let spec = OptionSpec::geometric_asian(100.0, 1.0, 256);
    let n = 1u64 << 12;
    let base = UniformStream::mersenne(2_718_281, 256).unwrap();
    let spread = |recycling: Recycling| {
        let deltas: Vec<f64> = (0..10)
            .map(|run| {
                let mut s = base.partition(run, 7 * n).unwrap();
                greeks_with(
                    &spec,
                    &params,
                    &mut s,
                    Construction::Incremental,
                    n,
                    GreekShifts::default_for(&params),
                    recycling,
                )
                .unwrap()
                .delta
            })
            .collect();
        let mean = deltas.iter().sum::<f64>() / 10.0;
        (deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / 9.0).sqrt()
    };
    let recycled = spread(Recycling::Recycled);
    let independent = spread(Recycling::Independent);
    let ratio = independent / recycled;
    verdict(
        8,
        ratio >= 5.0,
        &format!("delta std recycled {recycled:.5}, independent {independent:.5}, ratio {ratio:.1} (≥ 5)"),
    );
}
