//! Compares greedy clustering with the exhaustive optimum and with serving
//! everyone directly, over small random cells.
//!
//! cargo run --release --example brute_force_oracle -- [instances] [max_users]

use supercell::harness::oracle_study;
use supercell::SimConfig;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let instances = args.next().unwrap_or(200);
    let max_users = args.next().unwrap_or(6) as usize;
    let study = oracle_study(&SimConfig::default(), instances, max_users).unwrap();

    let optimal = study.instances.iter().filter(|i| i.greedy <= i.optimum * (1.0 + 1e-12)).count();
    let worse_than_direct = study.instances.iter().filter(|i| i.greedy > i.all_direct * (1.0 + 1e-12)).count();
    println!("{} cells, {} skipped", study.instances.len(), study.skipped);
    println!("greedy optimal in {optimal}, mean greedy/optimal {:.4}", study.mean_ratio());
    println!("greedy above all-direct in {worse_than_direct}");
    for i in study.instances.iter().take(8) {
        println!("  #{:<3} {} users  greedy {:8.1}  optimum {:8.1}  direct {:8.1}", i.index, i.users, i.greedy, i.optimum, i.all_direct);
    }
}
