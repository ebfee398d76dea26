//! Evaluates the macro-only, phantom-only and clustered situations on one
//! small hand-rated snapshot so every term can be checked on paper.

use supercell::energy::{energy_hybrid, energy_situation1, energy_situation3};
use supercell::{CellId, ChannelParams, Cluster, EnergyReport, PhantomMinRule, Point2D, PowerProfile, ServingPlan, SimConfig, SnapshotBuilder};

fn show(label: &str, r: &EnergyReport) {
    println!(
        "{label:<14} total {:9.1} J = macro {:8.1} + phantom {:7.1} + d2d {:6.1} + rx {:7.1}",
        r.total, r.tx_macro, r.tx_phantom, r.tx_d2d, r.rx_total
    );
}

fn main() {
    let profile = PowerProfile::default();
    let mut b = SnapshotBuilder::new(ChannelParams::from_config(&SimConfig::default()));
    // Four users in one phantom cell: (macro rate, phantom rate).
    let users: Vec<_> = [(2e6, 9e7), (1e6, 6e7), (1.5e6, 2e7), (8e5, 1e7)]
        .into_iter()
        .map(|(m, ph)| {
            let u = b.user(Point2D::new(0.0, 0.0), Some(CellId(0)), m);
            b.phantom_rate(u, CellId(0), ph);
            u
        })
        .collect();
    b.d_rate(users[0], users[2], 5e7).d_rate(users[0], users[3], 4e7);
    let snapshot = b.build();

    show("macro only", &energy_situation1(&snapshot, &profile).unwrap());
    let direct = ServingPlan::all_direct(&snapshot);
    show("phantom only", &energy_hybrid(&snapshot, &direct, &profile, PhantomMinRule::ServedUsers).unwrap());

    let clustered = ServingPlan {
        direct_phantom_users: vec![supercell::planner::DirectUser { cell: CellId(0), user: users[1] }],
        clusters: vec![Cluster { cell_id: CellId(0), head: users[0], members: vec![users[2], users[3]] }],
        ..ServingPlan::default()
    };
    // The phantom BTS pays for its slowest served user; under the all-users
    // rule that includes the members it does not actually serve.
    for (label, rule) in [("clustered", PhantomMinRule::ServedUsers), ("strict min", PhantomMinRule::AllCellUsers)] {
        show(label, &energy_situation3(&snapshot, &clustered, &profile, rule).unwrap());
    }
}
