mod acceptance_criterion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/acceptance_criterion.rs"));
}

#[test]
fn acceptance_criterion_runs() {
    acceptance_criterion::run_example().expect("acceptance_criterion example should run");
}

mod defect_measure {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/defect_measure.rs"));
}

#[test]
fn defect_measure_runs() {
    defect_measure::run_example().expect("defect_measure example should run");
}

mod eigen_square {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/eigen_square.rs"));
}

#[test]
fn eigen_square_runs() {
    eigen_square::run_example().expect("eigen_square example should run");
}

mod green_columns {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/green_columns.rs"));
}

#[test]
fn green_columns_runs() {
    green_columns::run_example().expect("green_columns example should run");
}

mod ground_state {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ground_state.rs"));
}

#[test]
fn ground_state_runs() {
    ground_state::run_example().expect("ground_state example should run");
}

mod hardy_family {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/hardy_family.rs"));
}

#[test]
fn hardy_family_runs() {
    hardy_family::run_example().expect("hardy_family example should run");
}

mod kato_modulus {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/kato_modulus.rs"));
}

#[test]
fn kato_modulus_runs() {
    kato_modulus::run_example().expect("kato_modulus example should run");
}

mod localization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/localization.rs"));
}

#[test]
fn localization_runs() {
    localization::run_example().expect("localization example should run");
}

mod monotone_scheme {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/monotone_scheme.rs"));
}

#[test]
fn monotone_scheme_runs() {
    monotone_scheme::run_example().expect("monotone_scheme example should run");
}

mod poincare_weight {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/poincare_weight.rs"));
}

#[test]
fn poincare_weight_runs() {
    poincare_weight::run_example().expect("poincare_weight example should run");
}

mod run_config {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/run_config.rs"));
}

#[test]
fn run_config_runs() {
    run_config::run_example().expect("run_config example should run");
}

mod torsion_disk {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/torsion_disk.rs"));
}

#[test]
fn torsion_disk_runs() {
    torsion_disk::run_example().expect("torsion_disk example should run");
}

mod zero_set {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/zero_set.rs"));
}

#[test]
fn zero_set_runs() {
    zero_set::run_example().expect("zero_set example should run");
}
