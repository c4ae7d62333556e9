use degregorio::linear::{evolve_linear, LinearRunConfig};
use degregorio::series::TildeSeries;

fn main() {
    for t_final in [1.0, 1.5, 2.0, 3.0] {
        let n = 128usize;
        let traj = evolve_linear(
            &TildeSeries::unit(1, 4),
            &LinearRunConfig { t_final, dt: 1e-3, n, snapshot_every: 20 },
        )
        .unwrap();
        let mut max_abs = vec![0.0_f64; n + 1];
        for (_, snap) in &traj.snapshots {
            for k in 1..=n as u32 {
                max_abs[k as usize] = max_abs[k as usize].max(snap.coeff(k).abs());
            }
        }
        let c = max_abs[15] * 15f64.powi(4);
        print!("T = {t_final}: ");
        for k in [31usize, 63, 95, 127] {
            print!("k={k}: r={:8.2e}  ", max_abs[k] / (c / (k as f64).powi(4)));
        }
        println!();
    }
}
