//! Greedy serving-plan construction and an exhaustive single-cell oracle.
//!
//! The planner runs in two stages. BTS designation compares, per user, the
//! marginal cost of its macro link with that of its phantom link and keeps the
//! cheaper tier. Clustering then works cell by cell: the unassigned user with
//! the best phantom rate becomes a candidate head, every other unassigned user
//! whose D-Link cost to that head beats its own direct phantom cost joins it,
//! and the loop repeats on whoever is left. A candidate nobody joins is served
//! directly by the phantom BTS.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelError, ChannelSnapshot};
use crate::config::{SimConfig, TieBreak};
use crate::energy::{budget_cost, cell_terms, CellTerms, EnergyError, PhantomMinRule, PowerProfile, Scenario};
use crate::topology::{CellId, Topology, UserId};

/// Largest cell the exhaustive oracle accepts.
pub const MAX_BRUTE_FORCE_USERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub cell_id: CellId,
    pub head: UserId,
    /// Never empty; a head without members is a direct user.
    pub members: Vec<UserId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DirectUser {
    pub cell: CellId,
    pub user: UserId,
}

/// Serving decision for every user: macro, direct phantom, or a cluster role.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServingPlan {
    pub macro_users: Vec<UserId>,
    pub direct_phantom_users: Vec<DirectUser>,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("user {0} is not served by the plan")]
    Uncovered(UserId),
    #[error("user {0} appears more than once in the plan")]
    DuplicateUser(UserId),
    #[error("plan refers to unknown user {0}")]
    UnknownUser(UserId),
    #[error("user {user} has no phantom link to cell {cell}")]
    NotInCell { user: UserId, cell: CellId },
    #[error("cluster headed by {0} has no members")]
    EmptyCluster(UserId),
    #[error("user {0} is macro-served, which this evaluator does not allow")]
    UnexpectedMacroUser(UserId),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("user {0} has no usable macro or phantom link")]
    NoFeasibleLink(UserId),
    #[error("exhaustive search supports at most {max} users, got {users}")]
    TooLarge { users: usize, max: usize },
    #[error("no feasible clustering exists for cell {0}")]
    NoFeasibleClustering(CellId),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

impl ServingPlan {
    /// Users in the plan, in the order they appear.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.macro_users
            .iter()
            .copied()
            .chain(self.direct_phantom_users.iter().map(|d| d.user))
            .chain(self.clusters.iter().flat_map(|c| std::iter::once(c.head).chain(c.members.iter().copied())))
    }

    /// Checks that the plan partitions the snapshot's users and that every
    /// phantom-tier user has a phantom budget for the cell it is placed in.
    pub fn validate(&self, snapshot: &ChannelSnapshot) -> Result<(), PlanError> {
        let n = snapshot.user_count();
        let mut seen = vec![false; n];
        for user in self.users() {
            let slot = seen.get_mut(user.index()).ok_or(PlanError::UnknownUser(user))?;
            if *slot {
                return Err(PlanError::DuplicateUser(user));
            }
            *slot = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(PlanError::Uncovered(UserId(i as u32)));
        }
        let in_cell = |user: UserId, cell: CellId| {
            snapshot
                .phantom_link(user, cell)
                .map(|_| ())
                .map_err(|_| PlanError::NotInCell { user, cell })
        };
        for d in &self.direct_phantom_users {
            in_cell(d.user, d.cell)?;
        }
        for cluster in &self.clusters {
            if cluster.members.is_empty() {
                return Err(PlanError::EmptyCluster(cluster.head));
            }
            in_cell(cluster.head, cluster.cell_id)?;
            for &member in &cluster.members {
                in_cell(member, cluster.cell_id)?;
            }
        }
        Ok(())
    }

    /// Plan with every user on the macro link.
    pub fn all_macro(snapshot: &ChannelSnapshot) -> Self {
        Self { macro_users: snapshot.users().collect(), ..Self::default() }
    }

    /// Plan with every in-cell user served directly by its home phantom BTS and
    /// every user without a home cell on the macro link.
    pub fn all_direct(snapshot: &ChannelSnapshot) -> Self {
        let mut plan = Self::default();
        for user in snapshot.users() {
            match snapshot.home_cell(user) {
                Some(cell) => plan.direct_phantom_users.push(DirectUser { cell, user }),
                None => plan.macro_users.push(user),
            }
        }
        plan.direct_phantom_users.sort();
        plan
    }

    pub fn user_count(&self) -> usize {
        self.users().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub tie_break: TieBreak,
    /// Compare against every phantom BTS with a budget in the snapshot, not
    /// only the home cell.
    pub candidate_all_phantoms: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { tie_break: TieBreak::WiderTier, candidate_all_phantoms: false }
    }
}

impl PlanOptions {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self { tie_break: cfg.tie_break, candidate_all_phantoms: cfg.candidate_all_phantoms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Designation {
    Macro,
    Phantom(CellId),
}

/// Cheapest usable phantom candidate of `user`, ties to the lowest cell id.
fn best_phantom(
    snapshot: &ChannelSnapshot,
    user: UserId,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Option<(CellId, f64)> {
    let home = snapshot.home_cell(user);
    snapshot
        .phantom_links(user)
        .iter()
        .filter(|(cell, _)| opts.candidate_all_phantoms || Some(*cell) == home)
        .filter_map(|(cell, budget)| budget_cost(budget, profile).map(|cost| (*cell, cost)))
        .fold(None, |best: Option<(CellId, f64)>, (cell, cost)| match best {
            Some((_, best_cost)) if best_cost <= cost => best,
            _ => Some((cell, cost)),
        })
}

/// Macro-or-phantom decision for every user, indexed by user id.
pub fn designate_bts(
    snapshot: &ChannelSnapshot,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Result<Vec<Designation>, PlannerError> {
    snapshot
        .users()
        .map(|user| {
            let macro_cost = budget_cost(snapshot.macro_link(user)?, profile);
            let phantom = best_phantom(snapshot, user, profile, opts);
            match (macro_cost, phantom) {
                (None, None) => Err(PlannerError::NoFeasibleLink(user)),
                (Some(_), None) => Ok(Designation::Macro),
                (None, Some((cell, _))) => Ok(Designation::Phantom(cell)),
                (Some(m), Some((cell, ph))) => Ok(if opts.tie_break.prefers_narrower(ph, m) {
                    Designation::Phantom(cell)
                } else {
                    Designation::Macro
                }),
            }
        })
        .collect()
}

/// One pass of the clustering loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStep {
    pub head: UserId,
    pub head_rate_bps: f64,
    /// Every user still unassigned when the head was picked, head excluded.
    pub candidates: Vec<UserId>,
    pub joined: Vec<UserId>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellClustering {
    pub clusters: Vec<Cluster>,
    pub direct: Vec<UserId>,
    pub trace: Vec<ClusterStep>,
}

/// Greedy clustering of one phantom cell's users.
pub fn cluster_cell(
    cell: CellId,
    cell_users: &[UserId],
    snapshot: &ChannelSnapshot,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Result<CellClustering, PlannerError> {
    struct Entry {
        user: UserId,
        rate: f64,
        cost: f64,
    }
    let mut remaining = cell_users
        .iter()
        .map(|&user| {
            let budget = snapshot.phantom_link(user, cell)?;
            Ok(Entry {
                user,
                rate: budget.usable_rate().unwrap_or(0.0),
                cost: budget_cost(budget, profile).unwrap_or(f64::INFINITY),
            })
        })
        .collect::<Result<Vec<_>, ChannelError>>()?;
    // Best rate first, lowest id on ties.
    remaining.sort_by(|a, b| b.rate.total_cmp(&a.rate).then(a.user.cmp(&b.user)));

    let mut out = CellClustering::default();
    while !remaining.is_empty() {
        let head = remaining.remove(0);
        let mut joined = Vec::new();
        let mut candidates = Vec::with_capacity(remaining.len());
        let mut kept = Vec::with_capacity(remaining.len());
        for entry in remaining {
            candidates.push(entry.user);
            let d_cost = budget_cost(&snapshot.d_link(head.user, entry.user)?, profile);
            match d_cost {
                Some(d) if opts.tie_break.prefers_narrower(d, entry.cost) => joined.push(entry.user),
                _ => kept.push(entry),
            }
        }
        remaining = kept;
        out.trace.push(ClusterStep {
            head: head.user,
            head_rate_bps: head.rate,
            candidates,
            joined: joined.clone(),
        });
        if joined.is_empty() {
            out.direct.push(head.user);
        } else {
            out.clusters.push(Cluster { cell_id: cell, head: head.user, members: joined });
        }
    }
    Ok(out)
}

fn assemble(cells: BTreeMap<CellId, Vec<UserId>>, macro_users: Vec<UserId>, snapshot: &ChannelSnapshot, profile: &PowerProfile, opts: &PlanOptions) -> Result<(ServingPlan, Vec<(CellId, CellClustering)>), PlannerError> {
    let mut plan = ServingPlan { macro_users, ..ServingPlan::default() };
    let mut details = Vec::with_capacity(cells.len());
    for (cell, users) in cells {
        let clustering = cluster_cell(cell, &users, snapshot, profile, opts)?;
        plan.direct_phantom_users
            .extend(clustering.direct.iter().map(|&user| DirectUser { cell, user }));
        plan.clusters.extend(clustering.clusters.iter().cloned());
        details.push((cell, clustering));
    }
    Ok((plan, details))
}

/// Full greedy plan together with the designation and per-cell traces.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub plan: ServingPlan,
    pub designation: Vec<Designation>,
    pub cells: Vec<(CellId, CellClustering)>,
}

/// BTS designation followed by clustering of each phantom cell in id order.
pub fn build_plan_traced(
    snapshot: &ChannelSnapshot,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Result<PlanOutcome, PlannerError> {
    let designation = designate_bts(snapshot, profile, opts)?;
    let mut macro_users = Vec::new();
    let mut cells: BTreeMap<CellId, Vec<UserId>> = BTreeMap::new();
    for (user, d) in snapshot.users().zip(&designation) {
        match d {
            Designation::Macro => macro_users.push(user),
            Designation::Phantom(cell) => cells.entry(*cell).or_default().push(user),
        }
    }
    let (plan, cells) = assemble(cells, macro_users, snapshot, profile, opts)?;
    Ok(PlanOutcome { plan, designation, cells })
}

pub fn build_plan(
    snapshot: &ChannelSnapshot,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Result<ServingPlan, PlannerError> {
    build_plan_traced(snapshot, profile, opts).map(|o| o.plan)
}

/// Clusters every in-cell user of its home cell without BTS designation;
/// users without a home cell go to the macro list.
pub fn cluster_all_cells(
    snapshot: &ChannelSnapshot,
    topology: &Topology,
    profile: &PowerProfile,
    opts: &PlanOptions,
) -> Result<ServingPlan, PlannerError> {
    let mut cells = BTreeMap::new();
    for bts in &topology.phantom_bts {
        let users = topology.cell_users(bts.id);
        if !users.is_empty() {
            cells.insert(bts.id, users);
        }
    }
    let macro_users = topology.users.iter().filter(|u| u.home_cell.is_none()).map(|u| u.id).collect();
    assemble(cells, macro_users, snapshot, profile, opts).map(|(plan, _)| plan)
}

/// Result of the exhaustive single-cell search.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOptimum {
    pub clusters: Vec<Cluster>,
    pub direct: Vec<UserId>,
    pub terms: CellTerms,
}

impl CellOptimum {
    pub fn energy(&self) -> f64 {
        self.terms.total()
    }
}

/// Minimum-energy clustering of one cell by exhaustive search.
///
/// Enumerates every choice of a non-empty head set `H` and every assignment of
/// the remaining users to a head in `H`. A head that receives no members is a
/// direct user. This covers every partition of the users into direct users and
/// one-hop clusters with a designated head. Candidates touching an outage
/// link are skipped.
pub fn brute_force_plan(
    cell: CellId,
    cell_users: &[UserId],
    snapshot: &ChannelSnapshot,
    profile: &PowerProfile,
    rule: PhantomMinRule,
) -> Result<CellOptimum, PlannerError> {
    let n = cell_users.len();
    if n > MAX_BRUTE_FORCE_USERS {
        return Err(PlannerError::TooLarge { users: n, max: MAX_BRUTE_FORCE_USERS });
    }
    if n == 0 {
        return Ok(CellOptimum { clusters: Vec::new(), direct: Vec::new(), terms: CellTerms::default() });
    }
    let mut best: Option<CellOptimum> = None;
    for head_mask in 1u32..(1 << n) {
        let heads: Vec<usize> = (0..n).filter(|i| head_mask & (1 << i) != 0).collect();
        let others: Vec<usize> = (0..n).filter(|i| head_mask & (1 << i) == 0).collect();
        // Mixed-radix counter over the head chosen by each non-head.
        let mut choice = vec![0usize; others.len()];
        loop {
            let mut members: Vec<Vec<UserId>> = vec![Vec::new(); heads.len()];
            for (slot, &other) in others.iter().enumerate() {
                members[choice[slot]].push(cell_users[other]);
            }
            let mut direct = Vec::new();
            let mut clusters = Vec::new();
            for (h, m) in heads.iter().zip(members) {
                if m.is_empty() {
                    direct.push(cell_users[*h]);
                } else {
                    clusters.push(Cluster { cell_id: cell, head: cell_users[*h], members: m });
                }
            }
            let refs: Vec<&Cluster> = clusters.iter().collect();
            match cell_terms(snapshot, cell, &direct, &refs, profile, rule, Scenario::SuperCell) {
                Ok(terms) => {
                    if best.as_ref().is_none_or(|b| terms.total() < b.energy()) {
                        best = Some(CellOptimum { clusters, direct, terms });
                    }
                }
                Err(EnergyError::OutageInScenario { .. }) => {}
                Err(EnergyError::Channel(e)) => return Err(e.into()),
                Err(other) => unreachable!("cell evaluation cannot fail with {other}"),
            }

            let mut slot = 0;
            loop {
                if slot == choice.len() {
                    break;
                }
                choice[slot] += 1;
                if choice[slot] < heads.len() {
                    break;
                }
                choice[slot] = 0;
                slot += 1;
            }
            if slot == choice.len() {
                break;
            }
        }
    }
    best.ok_or(PlannerError::NoFeasibleClustering(cell))
}
