//! Sweeps the user count and prints mean energy with 95% half-widths for the
//! three scenarios.
//!
//! cargo run --release --example monte_carlo_sweep -- [trials]

use supercell::harness::{sweep_users, SweepScenario};
use supercell::SimConfig;

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let config = SimConfig { trials, user_counts: vec![50, 150, 300, 500], ..SimConfig::default() };
    let report = sweep_users(&config).unwrap();
    println!("{:>5}  {:>22}  {:>18}  {:>18}", "users", "macro", "phantom", "supercell");
    for p in &report.points {
        let cols: Vec<String> = SweepScenario::ALL
            .iter()
            .map(|&s| {
                let st = p.stats(s);
                format!("{:9.1} ± {:7.1}", st.mean, st.ci95)
            })
            .collect();
        println!("{:>5}  {:>22}  {:>18}  {:>18}", p.users, cols[0], cols[1], cols[2]);
    }
}
