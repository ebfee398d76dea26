//! Link budgets for the three link types.
//!
//! A link's achievable rate is its single-link Shannon capacity:
//!
//! ```text
//! rx_dbm = 10 log10(1000 P_tx) - PL(d) + shadowing_db + 10 log10(fading_gain)
//! snr    = 10^((rx_dbm - noise_dbm) / 10),   noise_dbm = N0 + 10 log10(B)
//! rate   = B log2(1 + snr)
//! ```
//!
//! Shadowing is a zero-mean Gaussian in dB, fading is the exponentially
//! distributed power gain of a Rayleigh amplitude. Each link gets one draw of
//! each per snapshot (block fading). No interference term is modeled.

use std::collections::BTreeMap;
use std::sync::Mutex;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{DistanceUnit, SimConfig};
use crate::seed::{mix_pair, splitmix64};
use crate::topology::{distance, CellId, Point2D, Topology, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkType {
    /// Macro BTS to user.
    #[serde(rename = "m_link")]
    MLink,
    /// Phantom BTS to user.
    #[serde(rename = "ph_link")]
    PhLink,
    /// Cluster head to cluster member.
    #[serde(rename = "d_link")]
    DLink,
}

impl LinkType {
    pub const ALL: [LinkType; 3] = [LinkType::MLink, LinkType::PhLink, LinkType::DLink];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkType::MLink => "m_link",
            LinkType::PhLink => "ph_link",
            LinkType::DLink => "d_link",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("rate {rate_bps} bit/s is below the outage floor {floor_bps} bit/s")]
    OutageRate { rate_bps: f64, floor_bps: f64 },
    #[error("no {link} budget for user {user}{}", cell.map(|c| format!(" and cell {c}")).unwrap_or_default())]
    MissingLink { link: &'static str, user: UserId, cell: Option<CellId> },
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("a D-Link needs two distinct users, got {0} twice")]
    SelfLink(UserId),
    #[error("invalid snapshot: {0}")]
    Invalid(String),
}

/// Log-distance path loss `const + slope * log10(d)` with `d` in `unit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub const_db: f64,
    pub slope_db: f64,
    pub unit: DistanceUnit,
}

impl PathLossModel {
    pub fn loss_db(&self, d_m: f64) -> f64 {
        self.const_db + self.slope_db * self.unit.from_meters(d_m).log10()
    }
}

/// Noise power over `bandwidth_hz` for a noise density in dBm/Hz.
pub fn noise_power_dbm(noise_density_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    noise_density_dbm_hz + 10.0 * bandwidth_hz.log10()
}

/// Zero-mean Gaussian shadowing in dB.
pub fn draw_shadowing<R: Rng + ?Sized>(rng: &mut R, std_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    std_db * z
}

/// Unit-mean exponential power gain (|h|^2 for a unit-power Rayleigh h).
pub fn draw_fading_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let g: f64 = Exp1.sample(rng);
    g.max(f64::MIN_POSITIVE)
}

/// Received power in dBm after path loss, shadowing and fading.
pub fn received_power_dbm(tx_power_w: f64, path_loss_db: f64, shadowing_db: f64, fading_gain: f64) -> f64 {
    10.0 * (tx_power_w * 1000.0).log10() - path_loss_db + shadowing_db + 10.0 * fading_gain.log10()
}

/// Linear SNR to Shannon rate.
pub fn shannon_rate(bandwidth_hz: f64, snr: f64) -> f64 {
    bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

/// Channel parameters shared by every link of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub macro_path_loss: PathLossModel,
    pub phantom_path_loss: PathLossModel,
    pub d2d_path_loss: PathLossModel,
    pub tx_m_w: f64,
    pub tx_ph_w: f64,
    pub tx_d_w: f64,
    pub bandwidth_m_hz: f64,
    pub bandwidth_ph_hz: f64,
    pub bandwidth_d_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub shadowing_std_db: f64,
    pub shadowing_enabled: bool,
    pub fading_enabled: bool,
    pub min_distance_m: f64,
    pub rate_floor_bps: f64,
}

impl ChannelParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            macro_path_loss: PathLossModel {
                const_db: cfg.pl_macro_const_db,
                slope_db: cfg.pl_macro_slope_db,
                unit: cfg.pl_macro_unit,
            },
            phantom_path_loss: PathLossModel {
                const_db: cfg.pl_phantom_const_db,
                slope_db: cfg.pl_phantom_slope_db,
                unit: cfg.pl_phantom_unit,
            },
            d2d_path_loss: PathLossModel {
                const_db: cfg.pl_d2d_const_db,
                slope_db: cfg.pl_d2d_slope_db,
                unit: cfg.pl_d2d_unit,
            },
            tx_m_w: cfg.tx_m_w,
            tx_ph_w: cfg.tx_ph_w,
            tx_d_w: cfg.tx_d_w,
            bandwidth_m_hz: cfg.bandwidth_hz * cfg.bandwidth_fraction_m,
            bandwidth_ph_hz: cfg.bandwidth_hz * cfg.bandwidth_fraction_ph,
            bandwidth_d_hz: cfg.bandwidth_hz * cfg.bandwidth_fraction_d,
            noise_density_dbm_hz: cfg.noise_density_dbm_hz,
            shadowing_std_db: cfg.shadowing_std_db(),
            shadowing_enabled: cfg.shadowing_enabled,
            fading_enabled: cfg.fading_enabled,
            min_distance_m: cfg.min_distance_m,
            rate_floor_bps: cfg.rate_floor_bps,
        }
    }

    pub fn path_loss_model(&self, link: LinkType) -> &PathLossModel {
        match link {
            LinkType::MLink => &self.macro_path_loss,
            LinkType::PhLink => &self.phantom_path_loss,
            LinkType::DLink => &self.d2d_path_loss,
        }
    }

    /// Path loss in dB; `d_m` is clamped to the minimum distance first.
    pub fn path_loss_db(&self, link: LinkType, d_m: f64) -> f64 {
        self.path_loss_model(link).loss_db(d_m.max(self.min_distance_m))
    }

    pub fn tx_power_w(&self, link: LinkType) -> f64 {
        match link {
            LinkType::MLink => self.tx_m_w,
            LinkType::PhLink => self.tx_ph_w,
            LinkType::DLink => self.tx_d_w,
        }
    }

    pub fn bandwidth_hz(&self, link: LinkType) -> f64 {
        match link {
            LinkType::MLink => self.bandwidth_m_hz,
            LinkType::PhLink => self.bandwidth_ph_hz,
            LinkType::DLink => self.bandwidth_d_hz,
        }
    }

    pub fn noise_power_dbm(&self, link: LinkType) -> f64 {
        noise_power_dbm(self.noise_density_dbm_hz, self.bandwidth_hz(link))
    }

    /// Shadowing draw, or exactly 0 dB when shadowing is disabled (no draw is
    /// consumed in that case).
    pub fn draw_shadowing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.shadowing_enabled {
            draw_shadowing(rng, self.shadowing_std_db)
        } else {
            0.0
        }
    }

    /// Fading draw, or exactly 1 when fading is disabled.
    pub fn draw_fading_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.fading_enabled {
            draw_fading_gain(rng)
        } else {
            1.0
        }
    }

    /// Shannon rate of a link with the given budget terms, erroring with
    /// `OutageRate` below the rate floor.
    pub fn achievable_rate(
        &self,
        tx_power_w: f64,
        path_loss_db: f64,
        shadowing_db: f64,
        fading_gain: f64,
        bandwidth_hz: f64,
    ) -> Result<f64, ChannelError> {
        let rx = received_power_dbm(tx_power_w, path_loss_db, shadowing_db, fading_gain);
        let snr = snr_from_dbm(rx, noise_power_dbm(self.noise_density_dbm_hz, bandwidth_hz));
        let rate = shannon_rate(bandwidth_hz, snr);
        if rate < self.rate_floor_bps {
            Err(ChannelError::OutageRate { rate_bps: rate, floor_bps: self.rate_floor_bps })
        } else {
            Ok(rate)
        }
    }

    /// Full budget for a link of `link` type over `d_m` meters, drawing
    /// shadowing then fading from `rng`.
    pub fn link_budget<R: Rng + ?Sized>(&self, link: LinkType, d_m: f64, rng: &mut R) -> LinkBudget {
        let shadowing_db = self.draw_shadowing(rng);
        let fading_gain = self.draw_fading_gain(rng);
        self.budget_from_draws(link, d_m, shadowing_db, fading_gain)
    }

    pub fn budget_from_draws(&self, link: LinkType, d_m: f64, shadowing_db: f64, fading_gain: f64) -> LinkBudget {
        let distance_m = d_m.max(self.min_distance_m);
        let path_loss_db = self.path_loss_db(link, distance_m);
        let rx_power_dbm = received_power_dbm(self.tx_power_w(link), path_loss_db, shadowing_db, fading_gain);
        let snr = snr_from_dbm(rx_power_dbm, self.noise_power_dbm(link));
        let rate_bps = shannon_rate(self.bandwidth_hz(link), snr);
        LinkBudget {
            link_type: link,
            distance_m,
            path_loss_db,
            shadowing_db,
            fading_gain,
            rx_power_dbm,
            snr,
            rate_bps,
            outage: rate_bps < self.rate_floor_bps,
        }
    }
}

fn snr_from_dbm(rx_dbm: f64, noise_dbm: f64) -> f64 {
    10f64.powf((rx_dbm - noise_dbm) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub link_type: LinkType,
    pub distance_m: f64,
    pub path_loss_db: f64,
    pub shadowing_db: f64,
    pub fading_gain: f64,
    pub rx_power_dbm: f64,
    pub snr: f64,
    pub rate_bps: f64,
    pub outage: bool,
}

impl LinkBudget {
    /// Rate if the link is usable.
    pub fn usable_rate(&self) -> Option<f64> {
        (!self.outage).then_some(self.rate_bps)
    }
}

/// One channel realization for a topology.
///
/// Macro and phantom budgets are drawn eagerly. D-Link budgets are drawn on
/// first request from a per-pair stream derived from the snapshot's D2D seed
/// and the unordered user pair, so their values do not depend on the order in
/// which they are requested. Channels are reciprocal: `(a, b)` and `(b, a)`
/// share one budget.
#[derive(Debug)]
pub struct ChannelSnapshot {
    params: ChannelParams,
    positions: Vec<Point2D>,
    home_cells: Vec<Option<CellId>>,
    macro_links: Vec<LinkBudget>,
    phantom_links: Vec<Vec<(CellId, LinkBudget)>>,
    d2d_seed: u64,
    d2d_cache: Mutex<BTreeMap<(UserId, UserId), LinkBudget>>,
}

impl ChannelSnapshot {
    /// Draws one snapshot. Per user, in id order: the macro link, then the
    /// phantom links (home cell only, or every phantom cell in id order when
    /// `all_phantoms` is set). Each link draws shadowing then fading. The D2D
    /// seed is the next `u64` of the stream.
    pub fn build<R: RngCore + ?Sized>(
        topology: &Topology,
        params: ChannelParams,
        all_phantoms: bool,
        rng: &mut R,
    ) -> Self {
        let mut macro_links = Vec::with_capacity(topology.users.len());
        let mut phantom_links = Vec::with_capacity(topology.users.len());
        for user in &topology.users {
            let d = distance(user.position, topology.macro_bts.position, params.min_distance_m);
            macro_links.push(params.link_budget(LinkType::MLink, d, rng));

            let cells: Vec<CellId> = if all_phantoms {
                topology.phantom_bts.iter().map(|b| b.id).collect()
            } else {
                user.home_cell.into_iter().collect()
            };
            let links = cells
                .into_iter()
                .map(|cell| {
                    let bts = &topology.phantom_bts[cell.index()];
                    let d = distance(user.position, bts.position, params.min_distance_m);
                    (cell, params.link_budget(LinkType::PhLink, d, rng))
                })
                .collect();
            phantom_links.push(links);
        }
        let d2d_seed = rng.next_u64();
        Self {
            params,
            positions: topology.users.iter().map(|u| u.position).collect(),
            home_cells: topology.users.iter().map(|u| u.home_cell).collect(),
            macro_links,
            phantom_links,
            d2d_seed,
            d2d_cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn from_config<R: RngCore + ?Sized>(topology: &Topology, cfg: &SimConfig, rng: &mut R) -> Self {
        Self::build(topology, ChannelParams::from_config(cfg), cfg.candidate_all_phantoms, rng)
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn user_count(&self) -> usize {
        self.macro_links.len()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.user_count()).map(|i| UserId(i as u32))
    }

    pub fn home_cell(&self, user: UserId) -> Option<CellId> {
        self.home_cells.get(user.index()).copied().flatten()
    }

    pub fn d2d_seed(&self) -> u64 {
        self.d2d_seed
    }

    fn check_user(&self, user: UserId) -> Result<(), ChannelError> {
        if user.index() < self.user_count() {
            Ok(())
        } else {
            Err(ChannelError::UnknownUser(user))
        }
    }

    pub fn macro_link(&self, user: UserId) -> Result<&LinkBudget, ChannelError> {
        self.check_user(user)?;
        Ok(&self.macro_links[user.index()])
    }

    pub fn phantom_link(&self, user: UserId, cell: CellId) -> Result<&LinkBudget, ChannelError> {
        self.check_user(user)?;
        self.phantom_links[user.index()]
            .iter()
            .find(|(c, _)| *c == cell)
            .map(|(_, b)| b)
            .ok_or(ChannelError::MissingLink { link: "ph_link", user, cell: Some(cell) })
    }

    /// All phantom budgets available for `user`, in cell-id order.
    pub fn phantom_links(&self, user: UserId) -> &[(CellId, LinkBudget)] {
        self.phantom_links.get(user.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn home_phantom_link(&self, user: UserId) -> Result<&LinkBudget, ChannelError> {
        let cell = self
            .home_cell(user)
            .ok_or(ChannelError::MissingLink { link: "ph_link", user, cell: None })?;
        self.phantom_link(user, cell)
    }

    /// D-Link budget between two users, drawn and cached on first use.
    pub fn d_link(&self, a: UserId, b: UserId) -> Result<LinkBudget, ChannelError> {
        self.check_user(a)?;
        self.check_user(b)?;
        if a == b {
            return Err(ChannelError::SelfLink(a));
        }
        let key = (a.min(b), a.max(b));
        let mut cache = self.d2d_cache.lock().unwrap_or_else(|e| e.into_inner());
        let budget = *cache.entry(key).or_insert_with(|| self.draw_d_link(key.0, key.1));
        Ok(budget)
    }

    fn draw_d_link(&self, lo: UserId, hi: UserId) -> LinkBudget {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.d2d_seed ^ mix_pair(lo.0 as u64, hi.0 as u64)));
        let d = distance(self.positions[lo.index()], self.positions[hi.index()], self.params.min_distance_m);
        self.params.link_budget(LinkType::DLink, d, &mut rng)
    }

    /// D-Link budgets drawn so far, keyed by (lower id, higher id).
    pub fn cached_d_links(&self) -> Vec<((UserId, UserId), LinkBudget)> {
        let cache = self.d2d_cache.lock().unwrap_or_else(|e| e.into_inner());
        cache.iter().map(|(k, v)| (*k, *v)).collect()
    }

    /// Users with at least one candidate (macro or phantom) link in outage.
    pub fn outage_users(&self) -> usize {
        self.users()
            .filter(|&u| {
                self.macro_links[u.index()].outage || self.phantom_links[u.index()].iter().any(|(_, b)| b.outage)
            })
            .count()
    }

    /// Whether `user` has at least one non-outage macro or phantom link.
    pub fn has_feasible_link(&self, user: UserId) -> bool {
        !self.macro_links[user.index()].outage || self.phantom_links[user.index()].iter().any(|(_, b)| !b.outage)
    }
}

impl Clone for ChannelSnapshot {
    fn clone(&self) -> Self {
        let cache = self.d2d_cache.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Self {
            params: self.params.clone(),
            positions: self.positions.clone(),
            home_cells: self.home_cells.clone(),
            macro_links: self.macro_links.clone(),
            phantom_links: self.phantom_links.clone(),
            d2d_seed: self.d2d_seed,
            d2d_cache: Mutex::new(cache),
        }
    }
}

/// Equality over the eagerly drawn state and the D2D seed. Cached D-Link
/// budgets are a pure function of those, so they are not compared.
impl PartialEq for ChannelSnapshot {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.positions == other.positions
            && self.home_cells == other.home_cells
            && self.macro_links == other.macro_links
            && self.phantom_links == other.phantom_links
            && self.d2d_seed == other.d2d_seed
    }
}

impl ChannelParams {
    /// A budget whose stored rate is exactly `rate_bps`: distance at the clamp,
    /// no shadowing, and the fading gain that yields the matching SNR.
    pub fn budget_for_rate(&self, link: LinkType, rate_bps: f64) -> LinkBudget {
        let bandwidth = self.bandwidth_hz(link);
        let snr = (rate_bps / bandwidth).exp2() - 1.0;
        let rx_power_dbm = self.noise_power_dbm(link) + 10.0 * snr.log10();
        let distance_m = self.min_distance_m;
        let path_loss_db = self.path_loss_db(link, distance_m);
        let unfaded = received_power_dbm(self.tx_power_w(link), path_loss_db, 0.0, 1.0);
        LinkBudget {
            link_type: link,
            distance_m,
            path_loss_db,
            shadowing_db: 0.0,
            fading_gain: 10f64.powf((rx_power_dbm - unfaded) / 10.0),
            rx_power_dbm,
            snr,
            rate_bps,
            outage: rate_bps < self.rate_floor_bps,
        }
    }
}

/// Hand-built snapshot with prescribed rates, for tests, examples and
/// standalone planner inputs. D-Links without a prescribed rate are drawn
/// lazily from the user positions like in a generated snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotBuilder {
    params: ChannelParams,
    positions: Vec<Point2D>,
    home_cells: Vec<Option<CellId>>,
    macro_links: Vec<LinkBudget>,
    phantom_links: Vec<Vec<(CellId, LinkBudget)>>,
    d_links: BTreeMap<(UserId, UserId), LinkBudget>,
    d2d_seed: u64,
}

impl SnapshotBuilder {
    pub fn new(params: ChannelParams) -> Self {
        Self {
            params,
            positions: Vec::new(),
            home_cells: Vec::new(),
            macro_links: Vec::new(),
            phantom_links: Vec::new(),
            d_links: BTreeMap::new(),
            d2d_seed: 0,
        }
    }

    /// Adds a user with the given macro-link rate and returns its id.
    pub fn user(&mut self, position: Point2D, home_cell: Option<CellId>, macro_rate_bps: f64) -> UserId {
        let id = UserId(self.positions.len() as u32);
        self.positions.push(position);
        self.home_cells.push(home_cell);
        self.macro_links.push(self.params.budget_for_rate(LinkType::MLink, macro_rate_bps));
        self.phantom_links.push(Vec::new());
        id
    }

    pub fn phantom_rate(&mut self, user: UserId, cell: CellId, rate_bps: f64) -> &mut Self {
        let budget = self.params.budget_for_rate(LinkType::PhLink, rate_bps);
        let links = &mut self.phantom_links[user.index()];
        links.retain(|(c, _)| *c != cell);
        links.push((cell, budget));
        links.sort_by_key(|(c, _)| *c);
        self
    }

    pub fn d_rate(&mut self, a: UserId, b: UserId, rate_bps: f64) -> &mut Self {
        assert_ne!(a, b, "a D-Link needs two distinct users");
        let budget = self.params.budget_for_rate(LinkType::DLink, rate_bps);
        self.d_links.insert((a.min(b), a.max(b)), budget);
        self
    }

    pub fn d2d_seed(&mut self, seed: u64) -> &mut Self {
        self.d2d_seed = seed;
        self
    }

    pub fn build(self) -> ChannelSnapshot {
        ChannelSnapshot {
            params: self.params,
            positions: self.positions,
            home_cells: self.home_cells,
            macro_links: self.macro_links,
            phantom_links: self.phantom_links,
            d2d_seed: self.d2d_seed,
            d2d_cache: Mutex::new(self.d_links),
        }
    }

    /// Like [`build`](Self::build) but with shadowing and fading switched off,
    /// so lazily drawn D-Links depend on geometry only.
    pub fn build_without_randomness(mut self) -> ChannelSnapshot {
        self.params.shadowing_enabled = false;
        self.params.fading_enabled = false;
        self.build()
    }
}

#[derive(Serialize, Deserialize)]
struct PhantomLinkEntry {
    user: UserId,
    cell: CellId,
    budget: LinkBudget,
}

#[derive(Serialize, Deserialize)]
struct DLinkEntry {
    a: UserId,
    b: UserId,
    budget: LinkBudget,
}

#[derive(Serialize, Deserialize)]
struct UserEntry {
    user: UserId,
    position: Point2D,
    home_cell: Option<CellId>,
    macro_link: LinkBudget,
}

/// On-disk form of a snapshot.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDoc {
    params: ChannelParams,
    d2d_seed: u64,
    users: Vec<UserEntry>,
    phantom_links: Vec<PhantomLinkEntry>,
    #[serde(default)]
    d_links: Vec<DLinkEntry>,
}

impl Serialize for ChannelSnapshot {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = SnapshotDoc {
            params: self.params.clone(),
            d2d_seed: self.d2d_seed,
            users: self
                .users()
                .map(|u| UserEntry {
                    user: u,
                    position: self.positions[u.index()],
                    home_cell: self.home_cells[u.index()],
                    macro_link: self.macro_links[u.index()],
                })
                .collect(),
            phantom_links: self
                .users()
                .flat_map(|u| {
                    self.phantom_links[u.index()]
                        .iter()
                        .map(move |(cell, budget)| PhantomLinkEntry { user: u, cell: *cell, budget: *budget })
                })
                .collect(),
            d_links: self
                .cached_d_links()
                .into_iter()
                .map(|((a, b), budget)| DLinkEntry { a, b, budget })
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ChannelSnapshot {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = SnapshotDoc::deserialize(deserializer)?;
        Self::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<SnapshotDoc> for ChannelSnapshot {
    type Error = ChannelError;

    fn try_from(doc: SnapshotDoc) -> Result<Self, Self::Error> {
        let n = doc.users.len();
        let mut positions = Vec::with_capacity(n);
        let mut home_cells = Vec::with_capacity(n);
        let mut macro_links = Vec::with_capacity(n);
        for (i, entry) in doc.users.into_iter().enumerate() {
            if entry.user != UserId(i as u32) {
                return Err(ChannelError::Invalid(format!("user entry {i} has id {}", entry.user)));
            }
            if entry.macro_link.link_type != LinkType::MLink {
                return Err(ChannelError::Invalid(format!("macro link of {} has the wrong type", entry.user)));
            }
            positions.push(entry.position);
            home_cells.push(entry.home_cell);
            macro_links.push(entry.macro_link);
        }
        let mut phantom_links: Vec<Vec<(CellId, LinkBudget)>> = vec![Vec::new(); n];
        for entry in doc.phantom_links {
            if entry.user.index() >= n || entry.budget.link_type != LinkType::PhLink {
                return Err(ChannelError::Invalid(format!("bad phantom link entry for {}", entry.user)));
            }
            phantom_links[entry.user.index()].push((entry.cell, entry.budget));
        }
        for links in &mut phantom_links {
            links.sort_by_key(|(c, _)| *c);
        }
        let mut cache = BTreeMap::new();
        for entry in doc.d_links {
            if entry.a.index() >= n || entry.b.index() >= n || entry.a == entry.b {
                return Err(ChannelError::Invalid(format!("bad D-Link entry {}-{}", entry.a, entry.b)));
            }
            cache.insert((entry.a.min(entry.b), entry.a.max(entry.b)), entry.budget);
        }
        Ok(Self {
            params: doc.params,
            positions,
            home_cells,
            macro_links,
            phantom_links,
            d2d_seed: doc.d2d_seed,
            d2d_cache: Mutex::new(cache),
        })
    }
}
