//! Pinned outputs of the seeded samplers and the CLI. A change here means a
//! change to the random streams or to the output format.

mod common;

use std::process::Command;

use common::assert_golden;
use relclock::harness::{equispaced, tomography_csv};
use relclock::optics_mc::{sample_shots, Mode, PlateSource, ShotConfig};
use relclock::paw::singlet_ket;
use relclock::qcore::DensityMatrix;
use relclock::tomography::{simulate_counts, standard_16_settings, CountModel};

fn tables() -> String {
    let configs = [
        (Mode::PawObserver, PlateSource::List(vec![0.3]), 0.0),
        (Mode::PawObserver, PlateSource::List(equispaced(15)), 0.0),
        (Mode::Gppt, PlateSource::ContinuousUniform, 0.7),
        (Mode::GpptWithPbs1, PlateSource::List(equispaced(64)), 1.1),
        (Mode::GpptWithPbs1, PlateSource::ContinuousUniform, 0.0),
    ];
    let mut out = String::from("mode,n31,n32,n41,n42,discarded\n");
    for (mode, plates, delta_b) in configs {
        let t = sample_shots(&ShotConfig {
            n_shots: 10_000,
            seed: 2024,
            mode,
            plates,
            delta_b,
        })
        .unwrap();
        out.push_str(&format!(
            "{mode:?},{},{},{},{},{}\n",
            t.n31, t.n32, t.n41, t.n42, t.discarded
        ));
    }
    out
}

#[test]
fn coincidence_tables_pinned() {
    assert_golden("coincidence_tables.csv", &tables());
}

#[test]
fn tomography_counts_pinned() {
    let rho = DensityMatrix::from_ket(&singlet_ket()).unwrap();
    let settings = standard_16_settings();
    let mut out =
        tomography_csv(&simulate_counts(&rho, &settings, 10_000, 7, CountModel::Binomial).unwrap());
    out.push_str(&tomography_csv(
        &simulate_counts(&rho, &settings, 10_000, 7, CountModel::Poisson).unwrap(),
    ));
    assert_golden("tomography_counts.csv", &out);
}

fn cli(args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_relclock"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn cli_observer_csv_pinned() {
    assert_golden(
        "paw_observer.csv",
        &cli(&[
            "paw-observer",
            "--equispaced",
            "5",
            "--shots",
            "1000",
            "--seed",
            "11",
        ]),
    );
}

#[test]
fn cli_superobserver_csv_pinned() {
    assert_golden(
        "paw_superobserver.csv",
        &cli(&[
            "paw-superobserver",
            "--equispaced",
            "4",
            "--exposure",
            "2000",
            "--seed",
            "11",
        ]),
    );
}
