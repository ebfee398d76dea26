//! Geometric layout of one super cell: a macrocell disk containing
//! non-overlapping phantom-cell disks, each holding its users.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unclamped Euclidean distance.
    pub fn euclidean(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance clamped below at `min_distance_m`, keeping the
/// logarithmic path-loss formulas finite for coincident points.
pub fn distance(a: Point2D, b: Point2D, min_distance_m: f64) -> f64 {
    a.euclidean(&b).max(min_distance_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Macro,
    Phantom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: CellId,
    pub tier: Tier,
    pub position: Point2D,
    pub tx_power_w: f64,
    pub radius_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTerminal {
    pub id: UserId,
    pub position: Point2D,
    pub home_cell: Option<CellId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub macro_bts: BaseStation,
    pub phantom_bts: Vec<BaseStation>,
    pub users: Vec<UserTerminal>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("could not place phantom cell {cell} without overlap after {attempts} attempts")]
    PlacementExhausted { cell: usize, attempts: usize },
    #[error("could not place a macro-only user outside every phantom disk after {attempts} attempts")]
    MacroUserPlacementExhausted { attempts: usize },
    #[error("invalid topology: {0}")]
    Invalid(String),
}

/// Uniform draw inside a disk.
fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, center: Point2D, radius: f64) -> Point2D {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point2D::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}

/// Generates a topology with `cell_counts[i]` users in phantom cell `i` plus
/// `config.macro_only_users` users outside every phantom disk.
///
/// The macro BTS sits at the origin. Phantom centers are drawn uniformly in the
/// disk of radius `macro_radius - phantom_radius` and, unless
/// `allow_overlap` is set, redrawn until they are at least two radii from every
/// phantom already placed. Each cell gets `placement_retries` attempts.
pub fn generate_topology_with_counts<R: Rng + ?Sized>(
    config: &SimConfig,
    cell_counts: &[usize],
    rng: &mut R,
) -> Result<Topology, TopologyError> {
    let macro_bts = BaseStation {
        id: CellId(0),
        tier: Tier::Macro,
        position: Point2D::ORIGIN,
        tx_power_w: config.tx_m_w,
        radius_m: config.macro_radius_m,
    };
    let placement_radius = config.macro_radius_m - config.phantom_radius_m;
    let min_separation = 2.0 * config.phantom_radius_m;

    let mut phantom_bts: Vec<BaseStation> = Vec::with_capacity(cell_counts.len());
    for cell in 0..cell_counts.len() {
        let mut placed = None;
        for _ in 0..config.placement_retries {
            let candidate = uniform_in_disk(rng, Point2D::ORIGIN, placement_radius);
            let clear = config.allow_overlap
                || phantom_bts
                    .iter()
                    .all(|bts| bts.position.euclidean(&candidate) >= min_separation);
            if clear {
                placed = Some(candidate);
                break;
            }
        }
        let position = placed.ok_or(TopologyError::PlacementExhausted {
            cell,
            attempts: config.placement_retries,
        })?;
        phantom_bts.push(BaseStation {
            id: CellId(cell as u32),
            tier: Tier::Phantom,
            position,
            tx_power_w: config.tx_ph_w,
            radius_m: config.phantom_radius_m,
        });
    }

    let mut users = Vec::with_capacity(cell_counts.iter().sum::<usize>() + config.macro_only_users);
    for (bts, &count) in phantom_bts.iter().zip(cell_counts) {
        for _ in 0..count {
            let mut position = uniform_in_disk(rng, bts.position, bts.radius_m);
            // Guard against rounding placing a user a hair outside its disk.
            if position.euclidean(&bts.position) > bts.radius_m {
                position = bts.position;
            }
            users.push(UserTerminal {
                id: UserId(users.len() as u32),
                position,
                home_cell: Some(bts.id),
            });
        }
    }
    for _ in 0..config.macro_only_users {
        let mut placed = None;
        for _ in 0..config.placement_retries {
            let candidate = uniform_in_disk(rng, Point2D::ORIGIN, config.macro_radius_m);
            if phantom_bts
                .iter()
                .all(|bts| bts.position.euclidean(&candidate) > bts.radius_m)
            {
                placed = Some(candidate);
                break;
            }
        }
        let position = placed.ok_or(TopologyError::MacroUserPlacementExhausted {
            attempts: config.placement_retries,
        })?;
        users.push(UserTerminal { id: UserId(users.len() as u32), position, home_cell: None });
    }

    Ok(Topology { macro_bts, phantom_bts, users })
}

/// Generates the single-trial layout: `users_per_cell` users in each of the
/// `phantom_count` phantom cells.
pub fn generate_topology<R: Rng + ?Sized>(
    config: &SimConfig,
    rng: &mut R,
) -> Result<Topology, TopologyError> {
    generate_topology_with_counts(config, &config.uniform_cell_counts(), rng)
}

impl Topology {
    pub fn user(&self, id: UserId) -> &UserTerminal {
        &self.users[id.index()]
    }

    pub fn phantom(&self, id: CellId) -> Option<&BaseStation> {
        self.phantom_bts.get(id.index())
    }

    /// Users whose home cell is `cell`, in id order.
    pub fn cell_users(&self, cell: CellId) -> Vec<UserId> {
        self.users
            .iter()
            .filter(|u| u.home_cell == Some(cell))
            .map(|u| u.id)
            .collect()
    }

    pub fn cell_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.phantom_bts.len()];
        for cell in self.users.iter().filter_map(|u| u.home_cell) {
            counts[cell.index()] += 1;
        }
        counts
    }

    /// Checks structural and geometric invariants. `allow_overlap` relaxes the
    /// phantom disjointness check.
    pub fn validate(&self, allow_overlap: bool) -> Result<(), TopologyError> {
        let bad = |msg: String| Err(TopologyError::Invalid(msg));
        if self.macro_bts.tier != Tier::Macro {
            return bad("macro_bts must have tier macro".into());
        }
        let stations = std::iter::once(&self.macro_bts).chain(&self.phantom_bts);
        for bts in stations {
            if !(bts.tx_power_w > 0.0 && bts.radius_m > 0.0 && bts.position.is_finite()) {
                return bad(format!("base station {} has invalid power, radius or position", bts.id));
            }
        }
        for (i, bts) in self.phantom_bts.iter().enumerate() {
            if bts.tier != Tier::Phantom || bts.id != CellId(i as u32) {
                return bad(format!("phantom station at index {i} must be tier phantom with id c{i}"));
            }
            let reach = self.macro_bts.radius_m - bts.radius_m;
            if bts.position.euclidean(&self.macro_bts.position) > reach + 1e-9 {
                return bad(format!("phantom cell {} extends beyond the macro disk", bts.id));
            }
            if !allow_overlap {
                for other in &self.phantom_bts[..i] {
                    if bts.position.euclidean(&other.position) < bts.radius_m + other.radius_m {
                        return bad(format!("phantom cells {} and {} overlap", other.id, bts.id));
                    }
                }
            }
        }
        for (i, user) in self.users.iter().enumerate() {
            if user.id != UserId(i as u32) {
                return bad(format!("user at index {i} must have id u{i}"));
            }
            if !user.position.is_finite() {
                return bad(format!("user {} has a non-finite position", user.id));
            }
            if let Some(cell) = user.home_cell {
                let Some(bts) = self.phantom(cell) else {
                    return bad(format!("user {} refers to unknown cell {cell}", user.id));
                };
                if user.position.euclidean(&bts.position) > bts.radius_m + 1e-9 {
                    return bad(format!("user {} lies outside its home cell {cell}", user.id));
                }
            }
        }
        Ok(())
    }
}
