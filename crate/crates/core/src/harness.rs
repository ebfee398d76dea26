//! Seeded Monte Carlo engine.
//!
//! A trial is fully determined by `(config, user_count, trial_index)`: its
//! seed comes from [`crate::seed::trial_seed`] and drives one ChaCha8 stream
//! that draws the topology and then the channel snapshot. All scenarios of a
//! trial are evaluated on that same snapshot unless `paired_snapshots` is off.
//! Trials may run on any number of workers; results are merged in trial-index
//! order and aggregated over sorted samples, so the output never depends on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSnapshot;
use crate::config::{SimConfig, ValidationError};
use crate::energy::{
    cell_terms, energy_hybrid, energy_situation1, energy_situation2, energy_situation3, EnergyReport, Scenario,
};
use crate::planner::{brute_force_plan, build_plan, cluster_all_cells, cluster_cell, PlanOptions, ServingPlan};
use crate::seed::{sub_seed, trial_seed};
use crate::topology::{generate_topology_with_counts, CellId, Topology};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("no usable trials at {users} users: all {trials} trials were rejected")]
    InsufficientTrials { users: usize, trials: usize },
    #[error("cannot aggregate an empty sample")]
    EmptySample,
    #[error(transparent)]
    Config(#[from] ValidationError),
    #[error("could not build a worker pool: {0}")]
    Pool(String),
}

/// Scenarios reported by sweeps, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScenario {
    /// Every user on the macro link.
    Macro,
    /// Every in-cell user served directly by its phantom BTS.
    Phantom,
    /// The greedy plan (macro designation plus D2D clustering).
    #[serde(rename = "supercell")]
    SuperCell,
}

impl SweepScenario {
    pub const ALL: [SweepScenario; 3] = [SweepScenario::Macro, SweepScenario::Phantom, SweepScenario::SuperCell];

    pub fn name(self) -> &'static str {
        match self {
            SweepScenario::Macro => "macro",
            SweepScenario::Phantom => "phantom",
            SweepScenario::SuperCell => "supercell",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_index: u64,
    pub seed: u64,
    pub user_count: usize,
    /// Situation 1: macro BTS only.
    pub macro_only: Option<EnergyReport>,
    /// Situation 2: phantom BTSs only.
    pub phantom: Option<EnergyReport>,
    /// The greedy serving plan.
    pub super_cell: Option<EnergyReport>,
    /// Situation 3 on a clustering of every in-cell user (no macro
    /// designation). Absent when the topology has macro-only users or the
    /// evaluation hits an outage.
    pub situation3: Option<EnergyReport>,
    pub rejected: bool,
    pub rejection: Option<String>,
}

impl TrialReport {
    pub fn total(&self, scenario: SweepScenario) -> Option<f64> {
        let report = match scenario {
            SweepScenario::Macro => &self.macro_only,
            SweepScenario::Phantom => &self.phantom,
            SweepScenario::SuperCell => &self.super_cell,
        };
        report.as_ref().map(|r| r.total)
    }

    fn rejected(trial_index: u64, seed: u64, user_count: usize, reason: String) -> Self {
        Self {
            trial_index,
            seed,
            user_count,
            macro_only: None,
            phantom: None,
            super_cell: None,
            situation3: None,
            rejected: true,
            rejection: Some(reason),
        }
    }
}

/// Everything a trial produced, for inspection and dumps.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub report: TrialReport,
    pub topology: Option<Topology>,
    pub snapshot: Option<ChannelSnapshot>,
    pub plan: Option<ServingPlan>,
}

/// Runs one trial with `cell_counts[i]` users in phantom cell `i`. The seed is
/// derived from the total user count (cells plus macro-only users).
pub fn run_trial_detailed(config: &SimConfig, cell_counts: &[usize], trial_index: u64) -> TrialArtifacts {
    let user_count = cell_counts.iter().sum::<usize>() + config.macro_only_users;
    let seed = trial_seed(config.seed, user_count as u64, trial_index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = config.power_profile();
    let rule = config.phantom_min_rule();
    let opts = PlanOptions::from_config(config);

    let reject = |reason: String, topology: Option<Topology>, snapshot: Option<ChannelSnapshot>| TrialArtifacts {
        report: TrialReport::rejected(trial_index, seed, user_count, reason),
        topology,
        snapshot,
        plan: None,
    };

    let topology = match generate_topology_with_counts(config, cell_counts, &mut rng) {
        Ok(t) => t,
        Err(e) => return reject(e.to_string(), None, None),
    };
    let snapshot = ChannelSnapshot::from_config(&topology, config, &mut rng);
    let independent = |stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, stream));
        ChannelSnapshot::from_config(&topology, config, &mut rng)
    };
    let (phantom_snap, hybrid_snap) = if config.paired_snapshots {
        (None, None)
    } else {
        (Some(independent(1)), Some(independent(2)))
    };
    let phantom_snap = phantom_snap.as_ref().unwrap_or(&snapshot);
    let hybrid_snap = hybrid_snap.as_ref().unwrap_or(&snapshot);

    let macro_only = match energy_situation1(&snapshot, &profile) {
        Ok(r) => r,
        Err(e) => return reject(e.to_string(), Some(topology), Some(snapshot)),
    };
    let phantom = if config.macro_only_users == 0 {
        energy_situation2(phantom_snap, &topology, &profile)
    } else {
        energy_hybrid(phantom_snap, &ServingPlan::all_direct(phantom_snap), &profile, rule).map(|mut r| {
            r.scenario = Scenario::Phantom;
            r
        })
    };
    let phantom = match phantom {
        Ok(r) => r,
        Err(e) => return reject(e.to_string(), Some(topology), Some(snapshot)),
    };
    let plan = match build_plan(hybrid_snap, &profile, &opts) {
        Ok(p) => p,
        Err(e) => return reject(e.to_string(), Some(topology), Some(snapshot)),
    };
    let super_cell = match energy_hybrid(hybrid_snap, &plan, &profile, rule) {
        Ok(r) => r,
        Err(e) => return reject(e.to_string(), Some(topology), Some(snapshot)),
    };
    let situation3 = if config.macro_only_users == 0 {
        cluster_all_cells(hybrid_snap, &topology, &profile, &opts)
            .ok()
            .and_then(|p| energy_situation3(hybrid_snap, &p, &profile, rule).ok())
    } else {
        None
    };

    TrialArtifacts {
        report: TrialReport {
            trial_index,
            seed,
            user_count,
            macro_only: Some(macro_only),
            phantom: Some(phantom),
            super_cell: Some(super_cell),
            situation3,
            rejected: false,
            rejection: None,
        },
        topology: Some(topology),
        // The snapshot the plan was built on.
        snapshot: Some(if config.paired_snapshots { snapshot } else { hybrid_snap.clone() }),
        plan: Some(plan),
    }
}

/// One trial of the single-run layout (`users_per_cell` in every cell).
pub fn run_trial(config: &SimConfig, trial_index: u64) -> TrialReport {
    run_trial_detailed(config, &config.uniform_cell_counts(), trial_index).report
}

/// One trial at sweep point `total_users` (split evenly over the cells).
pub fn run_sweep_trial(config: &SimConfig, total_users: usize, trial_index: u64) -> TrialReport {
    run_trial_detailed(config, &config.split_users(total_users), trial_index).report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator), 0 for a single value.
    pub std: f64,
    /// 95% normal-approximation half-width, `1.96 std / sqrt(n)`.
    pub ci95: f64,
    pub n: usize,
}

/// Mean, sample standard deviation and 95% half-width. Values are sorted
/// before summation so the result does not depend on input order.
pub fn sample_stats(values: &[f64]) -> Result<SampleStats, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let mut sq: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
        sq.sort_by(f64::total_cmp);
        (sq.iter().sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampleStats { mean, std, ci95: 1.96 * std / (n as f64).sqrt(), n })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStats {
    pub scenario: SweepScenario,
    pub stats: SampleStats,
}

/// Aggregate of all trials at one user count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub users: usize,
    pub trials: usize,
    pub rejected: usize,
    pub scenarios: Vec<ScenarioStats>,
}

impl SweepPoint {
    pub fn stats(&self, scenario: SweepScenario) -> &SampleStats {
        &self.scenarios.iter().find(|s| s.scenario == scenario).expect("every scenario is aggregated").stats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

/// Aggregates the non-rejected trials of one sweep point.
pub fn aggregate(users: usize, trials: &[TrialReport]) -> Result<SweepPoint, HarnessError> {
    let kept: Vec<&TrialReport> = trials.iter().filter(|t| !t.rejected).collect();
    if kept.is_empty() {
        return Err(HarnessError::InsufficientTrials { users, trials: trials.len() });
    }
    let scenarios = SweepScenario::ALL
        .iter()
        .map(|&scenario| {
            let values: Vec<f64> = kept.iter().filter_map(|t| t.total(scenario)).collect();
            sample_stats(&values).map(|stats| ScenarioStats { scenario, stats })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepPoint { users, trials: trials.len(), rejected: trials.len() - kept.len(), scenarios })
}

/// Worker count for trial execution; `None` uses rayon's default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    pub workers: Option<usize>,
}

fn with_pool<T: Send>(opts: SweepOptions, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match opts.workers {
        None => Ok(f()),
        Some(workers) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build()
                .map_err(|e| HarnessError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs `config.trials` trials at `users` total users, in trial-index order.
pub fn run_point(config: &SimConfig, users: usize, opts: SweepOptions) -> Result<Vec<TrialReport>, HarnessError> {
    with_pool(opts, || {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| run_sweep_trial(config, users, i))
            .collect()
    })
}

/// Full user-count sweep.
pub fn sweep_users_with(config: &SimConfig, opts: SweepOptions) -> Result<SweepReport, HarnessError> {
    config.validate()?;
    let points = config
        .user_counts
        .iter()
        .map(|&users| run_point(config, users, opts).and_then(|trials| aggregate(users, &trials)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepReport { points })
}

pub fn sweep_users(config: &SimConfig) -> Result<SweepReport, HarnessError> {
    sweep_users_with(config, SweepOptions::default())
}

/// Greedy versus exhaustive clustering on one random single-cell instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleInstance {
    pub index: u64,
    pub users: usize,
    /// Cell energy of the greedy clustering of every user.
    pub greedy: f64,
    /// Minimum cell energy over all clusterings.
    pub optimum: f64,
    /// Cell energy with every user served directly.
    pub all_direct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStudy {
    pub instances: Vec<OracleInstance>,
    /// Instances dropped because some user's phantom link was in outage.
    pub skipped: usize,
}

impl OracleStudy {
    pub fn mean_ratio(&self) -> f64 {
        let ratios: Vec<f64> = self.instances.iter().map(|i| i.greedy / i.optimum).collect();
        sample_stats(&ratios).map(|s| s.mean).unwrap_or(f64::NAN)
    }
}

/// Draws `instances` random single-cell layouts of 1..=`max_users` users
/// under `config`'s channel and compares greedy, optimal and all-direct
/// cell energies.
pub fn oracle_study(config: &SimConfig, instances: u64, max_users: usize) -> Result<OracleStudy, HarnessError> {
    let max_users = max_users.clamp(1, crate::planner::MAX_BRUTE_FORCE_USERS);
    let cell_cfg = SimConfig { phantom_count: 1, macro_only_users: 0, ..config.clone() };
    cell_cfg.validate()?;
    let profile = cell_cfg.power_profile();
    let rule = cell_cfg.phantom_min_rule();
    let opts = PlanOptions::from_config(&cell_cfg);
    let cell = CellId(0);

    let results: Vec<Option<OracleInstance>> = (0..instances)
        .into_par_iter()
        .map(|index| {
            let seed = trial_seed(cell_cfg.seed ^ 0x6F72_6163_6C65, max_users as u64, index);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let users = 1 + (rand::Rng::random_range(&mut rng, 0..max_users as u64) as usize);
            let topology = generate_topology_with_counts(&cell_cfg, &[users], &mut rng).ok()?;
            let snapshot = ChannelSnapshot::from_config(&topology, &cell_cfg, &mut rng);
            let cell_users = topology.cell_users(cell);
            if cell_users.iter().any(|&u| snapshot.home_phantom_link(u).map_or(true, |b| b.outage)) {
                return None;
            }
            let evaluate = |direct: &[crate::topology::UserId], clusters: &[crate::planner::Cluster]| {
                let refs: Vec<_> = clusters.iter().collect();
                cell_terms(&snapshot, cell, direct, &refs, &profile, rule, Scenario::SuperCell).map(|t| t.total())
            };
            let all_direct = evaluate(&cell_users, &[]).ok()?;
            let greedy_plan = cluster_cell(cell, &cell_users, &snapshot, &profile, &opts).ok()?;
            let greedy = evaluate(&greedy_plan.direct, &greedy_plan.clusters).ok()?;
            let optimum = brute_force_plan(cell, &cell_users, &snapshot, &profile, rule).ok()?.energy();
            Some(OracleInstance { index, users, greedy, optimum, all_direct })
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    Ok(OracleStudy { instances: results.into_iter().flatten().collect(), skipped })
}
