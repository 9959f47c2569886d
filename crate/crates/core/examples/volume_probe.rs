use reachguide_core::dynamics::VerticalDrone;
use reachguide_core::gridsolver::{default_snapshot_times, solve_vi, Grid, GridAxis};

fn main() {
    let sys = VerticalDrone::<f64>::new();
    for (nz, nk) in [(401usize, 13usize)] {
        let t0 = std::time::Instant::now();
        let grid = Grid::new(vec![
            GridAxis { lo: -0.5, hi: 3.5, count: nz },
            GridAxis { lo: -4.0, hi: 4.0, count: nz },
            GridAxis { lo: 0.0, hi: 12.0, count: nk },
        ])
        .with_snapshots(default_snapshot_times(1.2, 13));
        let vf = solve_vi(&sys, &grid).unwrap();
        let vol = vf.safe_volume(0.0).unwrap();
        println!(
            "{nz}x{nz}x{nk}: safe volume {:.4}% ({:.1}s)",
            100.0 * vol,
            t0.elapsed().as_secs_f64()
        );
    }
}
