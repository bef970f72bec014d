use qnet_alloc::report::{read_rows, sweep_csv};
use qnet_alloc_core::experiments::{grid, run_probability_sweep, SweepRow};
use qnet_alloc_core::milp::SolveOptions;
use qnet_alloc_core::Instance;

#[test]
fn sweep_table_round_trips() {
    let rows = run_probability_sweep(&Instance::case_study(), &grid(0.0, 1.0, 0.05).unwrap(), &SolveOptions::default());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    std::fs::write(&path, sweep_csv(&rows)).unwrap();
    let back: Vec<Option<SweepRow>> = read_rows(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.len(), 21);
    for (a, b) in rows.iter().zip(back) {
        let (a, b) = (a.as_ref().unwrap(), b.unwrap());
        for (x, y) in [
            (a.p1, b.p1),
            (a.reservation_cost, b.reservation_cost),
            (a.expected_on_demand_cost, b.expected_on_demand_cost),
            (a.expected_qubit_cost, b.expected_qubit_cost),
            (a.expected_bell_cost, b.expected_bell_cost),
            (a.total, b.total),
        ] {
            assert!((x - y).abs() <= 1e-9);
        }
        assert_eq!((a.reserved_count, a.on_demand_used), (b.reserved_count, b.on_demand_used));
    }
}
