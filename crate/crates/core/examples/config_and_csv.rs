//! Loads a config from TOML text, runs a short sweep and writes the
//! plot-ready CSV and the run manifest into a temporary directory.

use supercell::harness::sweep_users;
use supercell::io::{check_plot_data, parse_config, write_sweep_outputs};

fn main() {
    let config = parse_config(
        r#"
        phantom_count = 4
        user_counts = [20, 40]
        trials = 10
        seed = 3
        "#,
    )
    .expect("valid config");

    let report = sweep_users(&config).unwrap();
    let dir = std::env::temp_dir().join("supercell-example");
    let manifest = write_sweep_outputs(&dir, &config, &report).unwrap();
    for out in &manifest.outputs {
        println!("{}  {}", out.sha256, dir.join(&out.file).display());
    }
    print!("{}", std::fs::read_to_string(dir.join("sweep.csv")).unwrap());
    let rows = check_plot_data(&dir.join("sweep.csv")).unwrap();
    println!("{} rows pass the plot-data check", rows.len());

    println!("\nunknown keys are rejected: {}", parse_config("trails = 5").unwrap_err());
}
