//! Lays out the reference network and prints where every cell and user landed.
//!
//! cargo run --example topology_layout -- [seed]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supercell::topology::generate_topology;
use supercell::SimConfig;

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let config = SimConfig { users_per_cell: 4, ..SimConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topology = generate_topology(&config, &mut rng).expect("ten 50 m cells fit in a 500 m macrocell");

    println!("macro BTS at ({:.1}, {:.1}), radius {} m", topology.macro_bts.position.x, topology.macro_bts.position.y, topology.macro_bts.radius_m);
    for bts in &topology.phantom_bts {
        let users: Vec<String> = topology.cell_users(bts.id).iter().map(|u| u.to_string()).collect();
        let dist = bts.position.euclidean(&topology.macro_bts.position);
        println!("  {}  center ({:7.1}, {:7.1})  {dist:5.1} m from macro  users {}", bts.id, bts.position.x, bts.position.y, users.join(" "));
    }
    topology.validate(config.allow_overlap).expect("generated layouts are valid");

    // Eleven 300 m cells cannot be packed.
    let crowded = SimConfig { phantom_radius_m: 300.0, phantom_count: 11, placement_retries: 500, ..config };
    match generate_topology(&crowded, &mut rng) {
        Ok(_) => println!("unexpected: crowded layout fit"),
        Err(e) => println!("crowded layout: {e}"),
    }
}
