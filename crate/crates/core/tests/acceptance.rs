//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

// Negated comparisons are deliberate: NaN must count as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use supercell::channel::{draw_fading_gain, draw_shadowing, noise_power_dbm, received_power_dbm, shannon_rate};
use supercell::energy::{energy_hybrid, energy_situation1, energy_situation2, energy_situation3, EnergyError};
use supercell::harness::{oracle_study, run_trial_detailed, sweep_users, SweepScenario};
use supercell::planner::{build_plan_traced, DirectUser, Designation};
use supercell::topology::{BaseStation, Tier, UserTerminal};
use supercell::{
    CellId, ChannelParams, ChannelSnapshot, Cluster, LinkBudget, LinkType, PhantomMinRule, PlanOptions, Point2D,
    PowerProfile, ServingPlan, SimConfig, SnapshotBuilder, Topology, UserId,
};

const REL_TOL: f64 = 1e-12;

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * b.abs().max(f64::MIN_POSITIVE)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("A1 oracle equivalence", a1_oracle_equivalence, Some(Duration::from_secs(10))),
        ("A2 scenario ordering", a2_scenario_ordering, Some(Duration::from_secs(60))),
        ("A3 greedy audit", a3_greedy_audit, None),
        ("A4 closed forms", a4_closed_forms, None),
        ("A5 determinism", a5_determinism, None),
        ("A6 brute-force sanity", a6_brute_force, None),
        ("A7 invariants", a7_invariants, Some(Duration::from_secs(30))),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit {
                outcome.pass = false;
                outcome.detail += &format!("; over the {} s budget", limit.as_secs());
            }
        }
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {name} ({:.2} s): {}", elapsed.as_secs_f64(), outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    if failed == 0 {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------------------
// A1

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    Macro,
    Direct(u32),
    Head(u32),
    Member(usize),
}

/// Rates of one random instance, kept outside the snapshot so the oracle never
/// reads library state.
struct Instance {
    home: Vec<Option<u32>>,
    cells: u32,
    m: Vec<f64>,
    ph: Vec<f64>,
    d: BTreeMap<(usize, usize), f64>,
}

impl Instance {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(1..=6usize);
        let cells = rng.random_range(1..=2u32);
        let rate = |rng: &mut ChaCha8Rng| 10f64.powf(rng.random_range(5.0..9.0));
        let home: Vec<Option<u32>> = (0..n)
            .map(|_| if rng.random_bool(0.2) { None } else { Some(rng.random_range(0..cells)) })
            .collect();
        let m = (0..n).map(|_| rate(rng)).collect();
        let ph = (0..n).map(|_| rate(rng)).collect();
        let mut d = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                if home[a].is_some() && home[a] == home[b] {
                    d.insert((a, b), rate(rng));
                }
            }
        }
        Self { home, cells, m, ph, d }
    }

    fn d_rate(&self, a: usize, b: usize) -> f64 {
        self.d[&(a.min(b), a.max(b))]
    }

    fn snapshot(&self) -> ChannelSnapshot {
        let mut b = SnapshotBuilder::new(ChannelParams::from_config(&SimConfig::default()));
        for (i, home) in self.home.iter().enumerate() {
            let u = b.user(Point2D::new(i as f64, 0.0), home.map(CellId), self.m[i]);
            if let Some(c) = home {
                b.phantom_rate(u, CellId(*c), self.ph[i]);
            }
        }
        for (&(x, y), &r) in &self.d {
            b.d_rate(UserId(x as u32), UserId(y as u32), r);
        }
        b.build()
    }

    fn topology(&self) -> Topology {
        let bts = |id: u32, tier| BaseStation {
            id: CellId(id),
            tier,
            position: Point2D::new(0.0, 0.0),
            tx_power_w: 1.0,
            radius_m: 50.0,
        };
        Topology {
            macro_bts: bts(0, Tier::Macro),
            phantom_bts: (0..self.cells).map(|c| bts(c, Tier::Phantom)).collect(),
            users: self
                .home
                .iter()
                .enumerate()
                .map(|(i, h)| UserTerminal {
                    id: UserId(i as u32),
                    position: Point2D::new(i as f64, 0.0),
                    home_cell: h.map(CellId),
                })
                .collect(),
        }
    }

    /// Random roles: macro-only users stay macro, in-cell users are macro
    /// with probability `p_macro`, otherwise grouped into random clusters.
    fn random_roles(&self, rng: &mut ChaCha8Rng, p_macro: f64) -> Vec<Role> {
        let n = self.home.len();
        let mut roles = vec![Role::Macro; n];
        for c in 0..self.cells {
            let mut pool: Vec<usize> =
                (0..n).filter(|&i| self.home[i] == Some(c) && !rng.random_bool(p_macro)).collect();
            while !pool.is_empty() {
                let head = pool.swap_remove(rng.random_range(0..pool.len()));
                let size = rng.random_range(0..=pool.len());
                let members: Vec<usize> = (0..size).map(|_| pool.swap_remove(rng.random_range(0..pool.len()))).collect();
                if members.is_empty() {
                    roles[head] = Role::Direct(c);
                } else {
                    roles[head] = Role::Head(c);
                    for m in members {
                        roles[m] = Role::Member(head);
                    }
                }
            }
        }
        roles
    }
}

fn roles_to_plan(roles: &[Role]) -> ServingPlan {
    let mut plan = ServingPlan::default();
    for (i, role) in roles.iter().enumerate() {
        let user = UserId(i as u32);
        match *role {
            Role::Macro => plan.macro_users.push(user),
            Role::Direct(c) => plan.direct_phantom_users.push(DirectUser { cell: CellId(c), user }),
            Role::Head(c) => {
                let members = roles
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| **r == Role::Member(i))
                    .map(|(j, _)| UserId(j as u32))
                    .collect();
                plan.clusters.push(Cluster { cell_id: CellId(c), head: user, members });
            }
            Role::Member(_) => {}
        }
    }
    plan
}

/// Direct summation over the roles.
fn oracle_energy(inst: &Instance, roles: &[Role], p: &PowerProfile, all_cell_min: bool) -> f64 {
    let s = p.service_bits;
    let mut total = 0.0;
    let macro_rates: Vec<f64> = (0..roles.len()).filter(|&i| roles[i] == Role::Macro).map(|i| inst.m[i]).collect();
    if !macro_rates.is_empty() {
        total += s * p.tx_m / macro_rates.iter().cloned().fold(f64::INFINITY, f64::min);
        total += macro_rates.iter().map(|r| s * p.rx_m / r).sum::<f64>();
    }
    for c in 0..inst.cells {
        let mut min_ph = f64::INFINITY;
        for (i, role) in roles.iter().enumerate() {
            match *role {
                Role::Direct(cc) | Role::Head(cc) if cc == c => {
                    min_ph = min_ph.min(inst.ph[i]);
                    total += s * p.rx_ph / inst.ph[i];
                }
                Role::Member(h) if all_cell_min && inst.home[h] == Some(c) => min_ph = min_ph.min(inst.ph[i]),
                _ => {}
            }
        }
        if min_ph.is_finite() {
            total += s * p.tx_ph / min_ph;
        }
    }
    for (h, role) in roles.iter().enumerate() {
        if !matches!(role, Role::Head(_)) {
            continue;
        }
        let members: Vec<usize> = (0..roles.len()).filter(|&j| roles[j] == Role::Member(h)).collect();
        let min_d = members.iter().map(|&j| inst.d_rate(h, j)).fold(f64::INFINITY, f64::min);
        total += s * p.tx_d / min_d;
        total += members.iter().map(|&j| s * p.rx_d / inst.d_rate(h, j)).sum::<f64>();
    }
    total
}

#[derive(Default)]
struct Comparisons {
    checked: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Comparisons {
    fn note(&mut self, label: &str, index: usize, got: Result<f64, EnergyError>, want: f64) {
        match got {
            Ok(got) => {
                self.checked += 1;
                self.worst = self.worst.max((got - want).abs() / want);
                if !close(got, want) {
                    self.failures.push(format!("#{index} {label}: {got} vs {want}"));
                }
            }
            Err(e) => self.failures.push(format!("#{index} {label}: {e}")),
        }
    }
}

fn a1_oracle_equivalence() -> Outcome {
    let profile = PowerProfile::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut cmp = Comparisons::default();
    for index in 0..500 {
        let inst = Instance::random(&mut rng);
        let snapshot = inst.snapshot();
        let topology = inst.topology();
        let n = inst.home.len();
        let in_cells = inst.home.iter().all(Option::is_some);

        let all_macro = vec![Role::Macro; n];
        cmp.note("eq1", index, energy_situation1(&snapshot, &profile).map(|r| r.total), oracle_energy(&inst, &all_macro, &profile, false));

        if in_cells {
            let direct: Vec<Role> = inst.home.iter().map(|h| Role::Direct(h.unwrap())).collect();
            cmp.note(
                "eq2",
                index,
                energy_situation2(&snapshot, &topology, &profile).map(|r| r.total),
                oracle_energy(&inst, &direct, &profile, false),
            );
            let roles = inst.random_roles(&mut rng, 0.0);
            let plan = roles_to_plan(&roles);
            for (rule, strict) in [(PhantomMinRule::ServedUsers, false), (PhantomMinRule::AllCellUsers, true)] {
                cmp.note(
                    "eq3",
                    index,
                    energy_situation3(&snapshot, &plan, &profile, rule).map(|r| r.total),
                    oracle_energy(&inst, &roles, &profile, strict),
                );
            }
        } else if !matches!(energy_situation2(&snapshot, &topology, &profile), Err(EnergyError::NotInPhantomCell(_))) {
            cmp.failures.push(format!("#{index} eq2 accepted a user outside every cell"));
        }

        let roles = inst.random_roles(&mut rng, 0.3);
        let plan = roles_to_plan(&roles);
        cmp.note(
            "hybrid",
            index,
            energy_hybrid(&snapshot, &plan, &profile, PhantomMinRule::ServedUsers).map(|r| r.total),
            oracle_energy(&inst, &roles, &profile, false),
        );
    }
    let detail = format!("{} evaluations on 500 instances, worst relative error {:.2e}", cmp.checked, cmp.worst);
    match cmp.failures.first() {
        None => Outcome::new(true, detail),
        Some(first) => Outcome::new(false, format!("{detail}; {} mismatches, first {first}", cmp.failures.len())),
    }
}

// ---------------------------------------------------------------------------
// A2

fn a2_scenario_ordering() -> Outcome {
    let config = SimConfig::default();
    let report = match sweep_users(&config) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let mut broken = Vec::new();
    for p in &report.points {
        let [m, ph, sc] = SweepScenario::ALL.map(|s| p.stats(s));
        let macro_gap = m.mean - ph.mean;
        let super_gap = ph.mean - sc.mean;
        if !(macro_gap > m.ci95 + ph.ci95) {
            broken.push(format!("{}u macro-phantom gap {macro_gap:.4e} vs ci {:.4e}", p.users, m.ci95 + ph.ci95));
        }
        if !(super_gap > ph.ci95 + sc.ci95) {
            broken.push(format!(
                "{}u phantom {:.1} vs supercell {:.1} (ci {:.1})",
                p.users,
                ph.mean,
                sc.mean,
                ph.ci95 + sc.ci95
            ));
        }
    }
    let detail = format!("{} points x {} trials", report.points.len(), config.trials);
    if broken.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}; {} violations: {}", broken.len(), broken.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// A3

fn cost(budget: &LinkBudget, p: &PowerProfile) -> f64 {
    if budget.outage {
        return f64::INFINITY;
    }
    let (tx, rx) = match budget.link_type {
        LinkType::MLink => (p.tx_m, p.rx_m),
        LinkType::PhLink => (p.tx_ph, p.rx_ph),
        LinkType::DLink => (p.tx_d, p.rx_d),
    };
    p.service_bits * (tx + rx) / budget.rate_bps
}

fn a3_greedy_audit() -> Outcome {
    let config = SimConfig::default();
    let profile = config.power_profile();
    let counts = config.uniform_cell_counts();
    // (members, member violations, phantom users, phantom violations, rejected)
    let tallies: Vec<[usize; 5]> = (0..1000u64)
        .into_par_iter()
        .map(|trial| {
            let art = run_trial_detailed(&config, &counts, trial);
            let (Some(snapshot), Some(plan)) = (art.snapshot, art.plan) else {
                return [0, 0, 0, 0, 1];
            };
            let mut t = [0usize; 5];
            let phantom_user = |user: UserId, cell: CellId, t: &mut [usize; 5]| {
                let ph = cost(snapshot.phantom_link(user, cell).unwrap(), &profile);
                let m = cost(snapshot.macro_link(user).unwrap(), &profile);
                t[2] += 1;
                t[3] += usize::from(!(ph < m));
                ph
            };
            for d in &plan.direct_phantom_users {
                phantom_user(d.user, d.cell, &mut t);
            }
            for c in &plan.clusters {
                phantom_user(c.head, c.cell_id, &mut t);
                for &member in &c.members {
                    let ph = phantom_user(member, c.cell_id, &mut t);
                    let d = cost(&snapshot.d_link(c.head, member).unwrap(), &profile);
                    t[0] += 1;
                    t[1] += usize::from(!(d < ph));
                }
            }
            t
        })
        .collect();
    let sum = tallies.iter().fold([0usize; 5], |mut acc, t| {
        for (a, b) in acc.iter_mut().zip(t) {
            *a += b;
        }
        acc
    });
    let [members, bad_members, phantom, bad_phantom, rejected] = sum;
    Outcome::new(
        bad_members == 0 && bad_phantom == 0 && members > 0 && rejected < 1000,
        format!(
            "1000 trials ({rejected} rejected): {members} members, {bad_members} not strictly cheaper on D-Link; \
             {phantom} phantom users, {bad_phantom} not strictly cheaper than macro"
        ),
    )
}

// ---------------------------------------------------------------------------
// A4

/// Independent link budget with no shadowing and unit fading.
fn hand_rate(tx_w: f64, pl_db: f64) -> f64 {
    let b: f64 = 10e6;
    let noise = -147.0 + 10.0 * b.log10();
    let rx = 10.0 * (tx_w * 1000.0).log10() - pl_db;
    b * (1.0 + 10f64.powf((rx - noise) / 10.0)).log2()
}

fn ring_topology(n: usize, radius: f64, head_at_center: bool) -> Topology {
    let phantom = BaseStation {
        id: CellId(0),
        tier: Tier::Phantom,
        position: Point2D::new(0.0, 0.0),
        tx_power_w: 10.0,
        radius_m: 50.0,
    };
    let mut users: Vec<UserTerminal> = (0..n)
        .map(|k| {
            let a = TAU * k as f64 / n as f64;
            UserTerminal {
                id: UserId(k as u32),
                position: Point2D::new(radius * a.cos(), radius * a.sin()),
                home_cell: Some(CellId(0)),
            }
        })
        .collect();
    if head_at_center {
        users.push(UserTerminal { id: UserId(n as u32), position: Point2D::new(0.0, 0.0), home_cell: Some(CellId(0)) });
    }
    Topology {
        macro_bts: BaseStation { id: CellId(0), tier: Tier::Macro, position: Point2D::new(0.0, 0.0), tx_power_w: 40.0, radius_m: 500.0 },
        phantom_bts: vec![phantom],
        users,
    }
}

fn a4_closed_forms() -> Outcome {
    let config = SimConfig { shadowing_enabled: false, fading_enabled: false, ..SimConfig::default() };
    let params = ChannelParams::from_config(&config);
    let p = config.power_profile();
    let s = p.service_bits;
    let rule = PhantomMinRule::ServedUsers;
    let mut checks: Vec<(String, f64, f64)> = Vec::new();

    for (n, r) in [(1usize, 20.0), (4, 30.0), (9, 45.0)] {
        let topology = ring_topology(n, r, false);
        let snapshot = ChannelSnapshot::build(&topology, params.clone(), false, &mut ChaCha8Rng::seed_from_u64(1));
        let rm = hand_rate(40.0, 128.0 + 37.6 * (r / 1000.0).log10());
        let rph = hand_rate(10.0, 37.0 + 20.0 * r.log10());
        let e1 = energy_situation1(&snapshot, &p).map_or(f64::NAN, |e| e.total);
        checks.push((format!("eq1 n={n}"), e1, s * (p.tx_m + n as f64 * p.rx_m) / rm));
        let e2 = energy_situation2(&snapshot, &topology, &p).map_or(f64::NAN, |e| e.total);
        checks.push((format!("eq2 n={n}"), e2, s * (p.tx_ph + n as f64 * p.rx_ph) / rph));

        // Head at the phantom BTS (clamped to 1 m), members on the ring.
        let topology = ring_topology(n, r, true);
        let snapshot = ChannelSnapshot::build(&topology, params.clone(), false, &mut ChaCha8Rng::seed_from_u64(1));
        let plan = ServingPlan {
            clusters: vec![Cluster { cell_id: CellId(0), head: UserId(n as u32), members: (0..n as u32).map(UserId).collect() }],
            ..ServingPlan::default()
        };
        let rh = hand_rate(10.0, 37.0);
        let rd = hand_rate(0.125, 42.0 + 16.9 * r.log10());
        let e3 = energy_situation3(&snapshot, &plan, &p, rule).map_or(f64::NAN, |e| e.total);
        checks.push((format!("eq3 cluster n={n}"), e3, s * ((p.tx_ph + p.rx_ph) / rh + (p.tx_d + n as f64 * p.rx_d) / rd)));
    }

    // Hand-rated examples.
    let mut b = SnapshotBuilder::new(params.clone());
    for r in [1e6, 2e6, 4e6] {
        b.user(Point2D::new(0.0, 0.0), None, r);
    }
    let e1 = energy_situation1(&b.build(), &p).map_or(f64::NAN, |e| e.total);
    checks.push(("eq1 {1,2,4}e6".into(), e1, 1e9 * (40.0 / 1e6 + 1.8 * (1.0 / 1e6 + 1.0 / 2e6 + 1.0 / 4e6))));

    let inst = Instance {
        home: vec![Some(0), Some(0), Some(1)],
        cells: 2,
        m: vec![1e6; 3],
        ph: vec![2e6, 4e6, 1e6],
        d: BTreeMap::from([((0, 1), 1e6)]),
    };
    let e2 = energy_situation2(&inst.snapshot(), &inst.topology(), &p).map_or(f64::NAN, |e| e.total);
    checks.push((
        "eq2 {2,4}+{1}e6".into(),
        e2,
        1e9 * (10.0 / 2e6 + 10.0 / 1e6 + 1.2 * (1.0 / 2e6 + 1.0 / 4e6 + 1.0 / 1e6)),
    ));

    let mut b = SnapshotBuilder::new(params);
    let ids: Vec<UserId> = (0..3).map(|_| b.user(Point2D::new(0.0, 0.0), Some(CellId(0)), 1e6)).collect();
    b.phantom_rate(ids[0], CellId(0), 5e6).phantom_rate(ids[1], CellId(0), 1e6).phantom_rate(ids[2], CellId(0), 1e6);
    b.d_rate(ids[0], ids[1], 1e6).d_rate(ids[0], ids[2], 3e6);
    let plan = ServingPlan {
        clusters: vec![Cluster { cell_id: CellId(0), head: ids[0], members: vec![ids[1], ids[2]] }],
        ..ServingPlan::default()
    };
    let d2d = energy_situation3(&b.build(), &plan, &p, rule).map_or(f64::NAN, |e| e.tx_d2d);
    checks.push(("eq3 d2d term".into(), d2d, 1e9 * 0.125 / 1e6));

    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| !close(*got, *want))
        .map(|(label, got, want)| format!("{label}: {got} vs {want}"))
        .collect();
    let worst = checks.iter().map(|(_, g, w)| (g - w).abs() / w).fold(0.0, f64::max);
    let detail = format!("{} closed forms, worst relative error {worst:.2e}", checks.len());
    if bad.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}; {}", bad.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// A5

fn sweep_cli(dir: &Path, workers: usize) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_supercell"))
        .args(["sweep", "--users", "50,150,300", "--trials", "40", "--seed", "2024", "--workers"])
        .arg(workers.to_string())
        .arg("--out")
        .arg(dir)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("SUPERCELL_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn a5_determinism() -> Outcome {
    let root = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let runs = [("one-a", 1), ("one-b", 1), ("many", 8)];
    for (name, workers) in runs {
        if let Err(e) = sweep_cli(&root.path().join(name), workers) {
            return Outcome::new(false, format!("sweep with {workers} workers failed: {e}"));
        }
    }
    let mut mismatches = Vec::new();
    for file in ["sweep.csv", "sweep.json", "manifest.json"] {
        let read = |run: &str| std::fs::read(root.path().join(run).join(file)).unwrap_or_default();
        let reference = read("one-a");
        if reference.is_empty() {
            mismatches.push(format!("{file} missing"));
        }
        for (run, _) in &runs[1..] {
            if read(run) != reference {
                mismatches.push(format!("{file} differs in {run}"));
            }
        }
    }
    if mismatches.is_empty() {
        Outcome::new(true, "sweep.csv, sweep.json and manifest.json identical across 2x1 and 1x8 workers")
    } else {
        Outcome::new(false, mismatches.join("; "))
    }
}

// ---------------------------------------------------------------------------
// A6

fn a6_brute_force() -> Outcome {
    let study = match oracle_study(&SimConfig::default(), 500, 6) {
        Ok(s) => s,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let n = study.instances.len();
    let below = study.instances.iter().filter(|i| i.greedy < i.optimum * (1.0 - REL_TOL)).count();
    let above = study.instances.iter().filter(|i| i.greedy > i.all_direct * (1.0 + REL_TOL)).count();
    let worst_above = study.instances.iter().map(|i| i.greedy / i.all_direct).fold(0.0, f64::max);
    Outcome::new(
        below == 0 && above == 0 && n > 0,
        format!(
            "{n} cells ({} skipped for outage), mean greedy/optimal {:.6}; greedy below optimum in {below}, \
             above all-direct in {above} (worst greedy/all-direct {worst_above:.4})",
            study.skipped,
            study.mean_ratio()
        ),
    )
}

// ---------------------------------------------------------------------------
// A7

fn prop_run<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig { cases, failure_persistence: None, ..PropConfig::default() });
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn small_config() -> impl Strategy<Value = (SimConfig, u64)> {
    (1usize..=4, 1usize..=12, 0usize..=3, any::<u64>(), 0u64..1000).prop_map(|(cells, per_cell, macro_only, seed, trial)| {
        let cfg = SimConfig {
            phantom_count: cells,
            users_per_cell: per_cell,
            macro_only_users: macro_only,
            seed,
            ..SimConfig::default()
        };
        (cfg, trial)
    })
}

fn a7_invariants() -> Outcome {
    let params = ChannelParams::from_config(&SimConfig::default());
    let mut failures = Vec::new();
    let mut record = |r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(e);
        }
    };

    record(prop_run("path loss monotone", 512, (0usize..3, 1.0f64..5000.0, 1e-3f64..5000.0), |(k, d, step)| {
        let link = LinkType::ALL[k];
        prop_assert!(params.path_loss_db(link, d) < params.path_loss_db(link, d + step));
        Ok(())
    }));

    record(prop_run(
        "rate monotone",
        512,
        (40.0f64..160.0, 0.01f64..20.0, 0.01f64..100.0, 1.01f64..10.0),
        |(pl, dpl, tx, scale)| {
            let noise = noise_power_dbm(-147.0, 10e6);
            let rate = |tx: f64, pl: f64| shannon_rate(10e6, 10f64.powf((received_power_dbm(tx, pl, 0.0, 1.0) - noise) / 10.0));
            prop_assert!(rate(tx, pl) > rate(tx, pl + dpl));
            prop_assert!(rate(tx * scale, pl) > rate(tx, pl));
            Ok(())
        },
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let draws = 1_000_000;
    let shadow: Vec<f64> = (0..draws).map(|_| draw_shadowing(&mut rng, 8.0)).collect();
    let mean = shadow.iter().sum::<f64>() / draws as f64;
    let std = (shadow.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64).sqrt();
    let fades: Vec<f64> = (0..draws).map(|_| draw_fading_gain(&mut rng)).collect();
    let fade_mean = fades.iter().sum::<f64>() / draws as f64;
    if mean.abs() > 0.03 || (std - 8.0).abs() > 0.03 {
        record(Err(format!("shadowing mean {mean:.4} std {std:.4}")));
    }
    if (fade_mean - 1.0).abs() > 0.01 || fades.iter().any(|&g| !(g > 0.0)) {
        record(Err(format!("fading mean {fade_mean:.4}")));
    }

    record(prop_run("plan partition and termination", 48, small_config(), |(cfg, trial)| {
        let art = run_trial_detailed(&cfg, &cfg.uniform_cell_counts(), trial);
        let (Some(snapshot), Some(plan)) = (art.snapshot, art.plan) else {
            return Ok(());
        };
        let mut seen = vec![0usize; snapshot.user_count()];
        for u in plan.users() {
            seen[u.index()] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1), "coverage {:?}", seen);
        let outcome = build_plan_traced(&snapshot, &cfg.power_profile(), &PlanOptions::from_config(&cfg)).unwrap();
        for (cell, clustering) in &outcome.cells {
            let n = outcome.designation.iter().filter(|d| **d == Designation::Phantom(*cell)).count();
            prop_assert!(clustering.trace.len() <= n);
            prop_assert!(!clustering.trace.is_empty());
        }
        Ok(())
    }));

    record(prop_run("component sum", 48, small_config(), |(cfg, trial)| {
        let art = run_trial_detailed(&cfg, &cfg.uniform_cell_counts(), trial);
        let r = art.report;
        for e in [&r.macro_only, &r.phantom, &r.super_cell, &r.situation3].into_iter().flatten() {
            let parts = [e.tx_macro, e.tx_phantom, e.tx_d2d, e.rx_total];
            prop_assert!(parts.iter().all(|&x| x >= 0.0));
            prop_assert!(close(parts.iter().sum::<f64>(), e.total), "{:?}", e);
        }
        Ok(())
    }));

    let detail = format!(
        "path loss, rate, 1e6-draw statistics (shadowing mean {mean:.4} std {std:.4}, fading mean {fade_mean:.4}), \
         partition, termination, component sum"
    );
    if failures.is_empty() {
        Outcome::new(true, detail)
    } else {
        Outcome::new(false, format!("{detail}; {}", failures.join("; ")))
    }
}
