mod price_asian {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/price_asian.rs"
    ));
}

mod greeks {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/greeks.rs"));
}

mod recycling {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/recycling.rs"
    ));
}

mod smile {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/smile.rs"));
}

mod convergence_study {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/convergence_study.rs"
    ));
}

mod sobol_points {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/sobol_points.rs"
    ));
}

mod brownian_bridge {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/brownian_bridge.rs"
    ));
}

mod local_vol {
    include!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/examples/local_vol.rs"
    ));
}

#[test]
fn price_asian_example_runs() {
    price_asian::run_example().expect("price_asian example should run");
}

#[test]
fn greeks_example_runs() {
    greeks::run_example().expect("greeks example should run");
}

#[test]
fn recycling_example_runs() {
    recycling::run_example().expect("recycling example should run");
}

#[test]
fn smile_example_runs() {
    smile::run_example().expect("smile example should run");
}

#[test]
fn convergence_study_example_runs() {
    convergence_study::run_example().expect("convergence_study example should run");
}

#[test]
fn sobol_points_example_runs() {
    sobol_points::run_example().expect("sobol_points example should run");
}

#[test]
fn brownian_bridge_example_runs() {
    brownian_bridge::run_example().expect("brownian_bridge example should run");
}

#[test]
fn local_vol_example_runs() {
    local_vol::run_example().expect("local_vol example should run");
}
