//! Builds the greedy serving plan for one random trial and prints the
//! clustering trace of the busiest cell.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supercell::energy::energy_hybrid;
use supercell::planner::{build_plan_traced, Designation};
use supercell::topology::generate_topology;
use supercell::{ChannelSnapshot, PlanOptions, SimConfig};

fn main() {
    let config = SimConfig { users_per_cell: 12, ..SimConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let topology = generate_topology(&config, &mut rng).unwrap();
    let snapshot = ChannelSnapshot::from_config(&topology, &config, &mut rng);
    let profile = config.power_profile();
    let outcome = build_plan_traced(&snapshot, &profile, &PlanOptions::from_config(&config)).unwrap();

    let on_macro = outcome.designation.iter().filter(|d| **d == Designation::Macro).count();
    println!("{} users: {on_macro} on the macro link, {} direct, {} clusters", snapshot.user_count(), outcome.plan.direct_phantom_users.len(), outcome.plan.clusters.len());

    if let Some((cell, clustering)) = outcome.cells.iter().max_by_key(|(_, c)| c.trace.len()) {
        println!("\ntrace of cell {cell}:");
        for step in &clustering.trace {
            let joined: Vec<String> = step.joined.iter().map(|u| u.to_string()).collect();
            println!("  head {} at {:9.3e} bit/s, {} of {} joined: {}", step.head, step.head_rate_bps, joined.len(), step.candidates.len(), joined.join(" "));
        }
    }
    let report = energy_hybrid(&snapshot, &outcome.plan, &profile, config.phantom_min_rule()).unwrap();
    println!("\nplan energy {:.1} J", report.total);
}
