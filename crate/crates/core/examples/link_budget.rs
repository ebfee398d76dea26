//! Walks one link budget by hand and then draws a few random ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use supercell::{ChannelParams, LinkType, SimConfig};

fn main() {
    let params = ChannelParams::from_config(&SimConfig::default());

    // Cell-edge macro user, no shadowing, unit fading.
    let edge = params.budget_from_draws(LinkType::MLink, 500.0, 0.0, 1.0);
    println!("macro user at 500 m");
    println!("  path loss   {:8.2} dB", edge.path_loss_db);
    println!("  rx power    {:8.2} dBm", edge.rx_power_dbm);
    println!("  noise       {:8.2} dBm", params.noise_power_dbm(LinkType::MLink));
    println!("  snr         {:8.2} dB", 10.0 * edge.snr.log10());
    println!("  rate        {:8.3e} bit/s", edge.rate_bps);

    println!("\npath loss at 1, 10, 100 m:");
    for link in LinkType::ALL {
        let pl: Vec<String> = [1.0, 10.0, 100.0].iter().map(|&d| format!("{:6.1}", params.path_loss_db(link, d))).collect();
        println!("  {:8} {}", link.as_str(), pl.join(" "));
    }

    println!("\nrandom draws at 30 m:");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for link in LinkType::ALL {
        let b = params.link_budget(link, 30.0, &mut rng);
        println!(
            "  {:8} shadowing {:6.2} dB  fading {:5.3}  rate {:9.3e}{}",
            link.as_str(),
            b.shadowing_db,
            b.fading_gain,
            b.rate_bps,
            if b.outage { "  (outage)" } else { "" }
        );
    }
}
