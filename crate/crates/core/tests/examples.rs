#[allow(dead_code)]
#[path = "../examples/capacity.rs"]
mod capacity;
#[allow(dead_code)]
#[path = "../examples/drift_session.rs"]
mod drift_session;
#[allow(dead_code)]
#[path = "../examples/figure2.rs"]
mod figure2;
#[allow(dead_code)]
#[path = "../examples/iterate_dichotomy.rs"]
mod iterate_dichotomy;
#[allow(dead_code)]
#[path = "../examples/ml_decoding.rs"]
mod ml_decoding;
#[allow(dead_code)]
#[path = "../examples/scenario_file.rs"]
mod scenario_file;
#[allow(dead_code)]
#[path = "../examples/type_concentration.rs"]
mod type_concentration;
#[allow(dead_code)]
#[path = "../examples/update_exponent.rs"]
mod update_exponent;

use channel_nts::nts::RunStatus;

#[test]
fn capacity_example_runs() {
    let rows = capacity::run_example().unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[3].1 - 4f64.ln()).abs() < 1e-9);
}

#[test]
fn update_exponent_example_agrees_with_direct_search() {
    for (_, dual, direct) in update_exponent::run_example().unwrap() {
        assert!((dual - direct).abs() < 1e-6);
    }
}

#[test]
fn iterate_dichotomy_example_runs() {
    let rows = iterate_dichotomy::run_example().unwrap();
    let statuses: Vec<RunStatus> = rows.iter().map(|r| r.1).collect();
    assert_eq!(
        statuses,
        [
            RunStatus::ConvergedToZero,
            RunStatus::ConvergedToZero,
            RunStatus::Stalled,
            RunStatus::Stalled
        ]
    );
}

#[test]
fn figure2_example_runs() {
    let crossings = figure2::run_example().unwrap();
    assert!(crossings.windows(2).all(|w| w[1] >= w[0] - 1e-6));
}

#[test]
fn drift_example_keeps_exponent_positive() {
    let segments = drift_session::run_example().unwrap();
    assert_eq!(segments.len(), 5);
    assert!(segments.iter().all(|s| s.min_e_r_settled > 0.0));
}

#[test]
fn concentration_example_runs() {
    let r = type_concentration::run_example().unwrap();
    assert!(r.accepted >= 2000);
    assert!(r.l1_to_u_star < 0.05);
}

#[test]
fn ml_decoding_example_runs() {
    let (rate, bound) = ml_decoding::run_example().unwrap();
    assert!(rate <= bound);
}

#[test]
fn scenario_file_example_runs() {
    let report = scenario_file::run_example(None).unwrap();
    assert_eq!(report.outcome.status, RunStatus::Stalled);
}
