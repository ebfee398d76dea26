//! Total-energy evaluators for the three delivery situations and for mixed
//! serving plans.
//!
//! Every broadcast transmitter is charged for `S_T / min R` seconds at its
//! transmit power, where the minimum runs over the receivers it must reach.
//! Every receiver is charged for `S_T / R` seconds at the receive power of its
//! serving link, `R` being its own rate on that link.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelError, ChannelSnapshot, LinkBudget, LinkType};
use crate::planner::{Cluster, PlanError, ServingPlan};
use crate::topology::{CellId, Topology, UserId};

/// Transmit and receive powers (W, i.e. J/s) of the three link types, plus the
/// service volume in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub tx_m: f64,
    pub tx_ph: f64,
    pub tx_d: f64,
    pub rx_m: f64,
    pub rx_ph: f64,
    pub rx_d: f64,
    pub service_bits: f64,
}

impl PowerProfile {
    pub fn tx(&self, link: LinkType) -> f64 {
        match link {
            LinkType::MLink => self.tx_m,
            LinkType::PhLink => self.tx_ph,
            LinkType::DLink => self.tx_d,
        }
    }

    pub fn rx(&self, link: LinkType) -> f64 {
        match link {
            LinkType::MLink => self.rx_m,
            LinkType::PhLink => self.rx_ph,
            LinkType::DLink => self.rx_d,
        }
    }
}

impl Default for PowerProfile {
    fn default() -> Self {
        crate::config::SimConfig::default().power_profile()
    }
}

/// Which users set the phantom BTS's transmit duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomMinRule {
    /// Minimum PH-Link rate over the users the phantom BTS actually serves:
    /// cluster heads and direct users.
    ServedUsers,
    /// Minimum PH-Link rate over every user of the cell, cluster members
    /// included.
    AllCellUsers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Everyone served by the macro BTS.
    Macro,
    /// Everyone served directly by their phantom BTS.
    Phantom,
    /// Phantom BTSs plus D2D clusters, no macro designation.
    SuperCell,
    /// The full greedy plan: macro, direct phantom and D2D users mixed.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEnergy {
    pub cell: CellId,
    pub joules: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub scenario: Scenario,
    pub total: f64,
    pub tx_macro: f64,
    pub tx_phantom: f64,
    pub tx_d2d: f64,
    pub rx_total: f64,
    /// Energy attributed to each phantom cell: its BTS, its D2D heads and the
    /// receivers of its phantom-tier users.
    pub per_cell: Vec<CellEnergy>,
    /// Users with at least one candidate link in outage in the snapshot.
    pub outage_users: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnergyError {
    #[error("{scenario:?}: user {user} has its {} in outage", link.as_str())]
    OutageInScenario { scenario: Scenario, user: UserId, link: LinkType },
    #[error("user {0} has no phantom cell; only the hybrid evaluator can serve it")]
    NotInPhantomCell(UserId),
    #[error("malformed plan: {0}")]
    MalformedPlan(#[from] PlanError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Marginal energy of serving one user alone over a link:
/// `S_T (P_T + P_R) / rate`.
pub fn per_user_cost(
    link: LinkType,
    rate_bps: f64,
    profile: &PowerProfile,
    rate_floor_bps: f64,
) -> Result<f64, ChannelError> {
    if rate_bps.is_nan() || rate_bps < rate_floor_bps {
        return Err(ChannelError::OutageRate { rate_bps, floor_bps: rate_floor_bps });
    }
    Ok(profile.service_bits * (profile.tx(link) + profile.rx(link)) / rate_bps)
}

/// Cost of a budget, or `None` if it is in outage.
pub fn budget_cost(budget: &LinkBudget, profile: &PowerProfile) -> Option<f64> {
    budget
        .usable_rate()
        .map(|rate| profile.service_bits * (profile.tx(budget.link_type) + profile.rx(budget.link_type)) / rate)
}

#[derive(Default)]
struct Tally {
    tx_macro: f64,
    tx_phantom: f64,
    tx_d2d: f64,
    rx_total: f64,
    per_cell: BTreeMap<CellId, f64>,
}

impl Tally {
    fn into_report(self, scenario: Scenario, snapshot: &ChannelSnapshot) -> EnergyReport {
        EnergyReport {
            scenario,
            total: self.tx_macro + self.tx_phantom + self.tx_d2d + self.rx_total,
            tx_macro: self.tx_macro,
            tx_phantom: self.tx_phantom,
            tx_d2d: self.tx_d2d,
            rx_total: self.rx_total,
            per_cell: self.per_cell.into_iter().map(|(cell, joules)| CellEnergy { cell, joules }).collect(),
            outage_users: snapshot.outage_users(),
        }
    }
}

fn usable(budget: &LinkBudget, scenario: Scenario, user: UserId) -> Result<f64, EnergyError> {
    budget
        .usable_rate()
        .ok_or(EnergyError::OutageInScenario { scenario, user, link: budget.link_type })
}

/// Energy terms of one phantom cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellTerms {
    pub tx_phantom: f64,
    pub tx_d2d: f64,
    pub rx: f64,
}

impl CellTerms {
    pub fn total(&self) -> f64 {
        self.tx_phantom + self.tx_d2d + self.rx
    }
}

/// Energy of one phantom cell given its direct users and clusters. Heads and
/// direct users receive over the PH-Link, members over the D-Link from their
/// head. The cell BTS transmits for `S_T / min R_ph` (minimum per `rule`);
/// each head transmits for `S_T / min R_d` over its members.
pub fn cell_terms(
    snapshot: &ChannelSnapshot,
    cell: CellId,
    directs: &[UserId],
    clusters: &[&Cluster],
    profile: &PowerProfile,
    rule: PhantomMinRule,
    scenario: Scenario,
) -> Result<CellTerms, EnergyError> {
    let s = profile.service_bits;
    let mut terms = CellTerms::default();
    let mut min_ph = f64::INFINITY;

    let ph_receivers = directs.iter().copied().chain(clusters.iter().map(|c| c.head));
    for user in ph_receivers {
        let rate = usable(snapshot.phantom_link(user, cell)?, scenario, user)?;
        min_ph = min_ph.min(rate);
        terms.rx += s * profile.rx_ph / rate;
    }
    for cluster in clusters {
        let mut min_d = f64::INFINITY;
        for &member in &cluster.members {
            let rate = usable(&snapshot.d_link(cluster.head, member)?, scenario, member)?;
            min_d = min_d.min(rate);
            terms.rx += s * profile.rx_d / rate;
            if rule == PhantomMinRule::AllCellUsers {
                min_ph = min_ph.min(usable(snapshot.phantom_link(member, cell)?, scenario, member)?);
            }
        }
        if min_d.is_finite() {
            terms.tx_d2d += s * profile.tx_d / min_d;
        }
    }
    if min_ph.is_finite() {
        terms.tx_phantom = s * profile.tx_ph / min_ph;
    }
    Ok(terms)
}

/// Situation 1: the macro BTS serves every user.
pub fn energy_situation1(snapshot: &ChannelSnapshot, profile: &PowerProfile) -> Result<EnergyReport, EnergyError> {
    let scenario = Scenario::Macro;
    let s = profile.service_bits;
    let mut tally = Tally::default();
    let mut min_rate = f64::INFINITY;
    for user in snapshot.users() {
        let rate = usable(snapshot.macro_link(user)?, scenario, user)?;
        min_rate = min_rate.min(rate);
        tally.rx_total += s * profile.rx_m / rate;
    }
    if min_rate.is_finite() {
        tally.tx_macro = s * profile.tx_m / min_rate;
    }
    Ok(tally.into_report(scenario, snapshot))
}

/// Situation 2: each phantom BTS serves every user of its cell directly.
/// Cells without users contribute zero.
pub fn energy_situation2(
    snapshot: &ChannelSnapshot,
    topology: &Topology,
    profile: &PowerProfile,
) -> Result<EnergyReport, EnergyError> {
    let scenario = Scenario::Phantom;
    if let Some(user) = snapshot.users().find(|&u| snapshot.home_cell(u).is_none()) {
        return Err(EnergyError::NotInPhantomCell(user));
    }
    let mut tally = Tally::default();
    for bts in &topology.phantom_bts {
        let members = topology.cell_users(bts.id);
        let terms = cell_terms(snapshot, bts.id, &members, &[], profile, PhantomMinRule::ServedUsers, scenario)?;
        tally.tx_phantom += terms.tx_phantom;
        tally.rx_total += terms.rx;
        tally.per_cell.insert(bts.id, terms.total());
    }
    Ok(tally.into_report(scenario, snapshot))
}

fn group_by_cell(plan: &ServingPlan) -> BTreeMap<CellId, (Vec<UserId>, Vec<&Cluster>)> {
    let mut cells: BTreeMap<CellId, (Vec<UserId>, Vec<&Cluster>)> = BTreeMap::new();
    for &crate::planner::DirectUser { cell, user } in &plan.direct_phantom_users {
        cells.entry(cell).or_default().0.push(user);
    }
    for cluster in &plan.clusters {
        cells.entry(cluster.cell_id).or_default().1.push(cluster);
    }
    cells
}

fn phantom_tier(
    snapshot: &ChannelSnapshot,
    plan: &ServingPlan,
    profile: &PowerProfile,
    rule: PhantomMinRule,
    scenario: Scenario,
    tally: &mut Tally,
) -> Result<(), EnergyError> {
    for (cell, (directs, clusters)) in group_by_cell(plan) {
        let terms = cell_terms(snapshot, cell, &directs, &clusters, profile, rule, scenario)?;
        tally.tx_phantom += terms.tx_phantom;
        tally.tx_d2d += terms.tx_d2d;
        tally.rx_total += terms.rx;
        tally.per_cell.insert(cell, terms.total());
    }
    Ok(())
}

/// Situation 3: phantom BTSs serve cluster heads and direct users, heads
/// relay to their members over D-Links. The plan must not contain macro users.
pub fn energy_situation3(
    snapshot: &ChannelSnapshot,
    plan: &ServingPlan,
    profile: &PowerProfile,
    rule: PhantomMinRule,
) -> Result<EnergyReport, EnergyError> {
    let scenario = Scenario::SuperCell;
    if let Some(&user) = plan.macro_users.first() {
        return Err(PlanError::UnexpectedMacroUser(user).into());
    }
    plan.validate(snapshot)?;
    let mut tally = Tally::default();
    phantom_tier(snapshot, plan, profile, rule, scenario, &mut tally)?;
    Ok(tally.into_report(scenario, snapshot))
}

/// Energy of an arbitrary serving plan: macro users as in situation 1
/// (restricted to them, zero if none), phantom-tier users as in situation 3.
pub fn energy_hybrid(
    snapshot: &ChannelSnapshot,
    plan: &ServingPlan,
    profile: &PowerProfile,
    rule: PhantomMinRule,
) -> Result<EnergyReport, EnergyError> {
    let scenario = Scenario::Hybrid;
    plan.validate(snapshot)?;
    let s = profile.service_bits;
    let mut tally = Tally::default();
    let mut min_macro = f64::INFINITY;
    for &user in &plan.macro_users {
        let rate = usable(snapshot.macro_link(user)?, scenario, user)?;
        min_macro = min_macro.min(rate);
        tally.rx_total += s * profile.rx_m / rate;
    }
    if min_macro.is_finite() {
        tally.tx_macro = s * profile.tx_m / min_macro;
    }
    phantom_tier(snapshot, plan, profile, rule, scenario, &mut tally)?;
    Ok(tally.into_report(scenario, snapshot))
}
