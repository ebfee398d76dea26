//! Simulation configuration.
//!
//! Every physical parameter of the reference scenario maps to exactly one flat
//! key. The defaults reproduce the reference parameter table: a 500 m macrocell
//! with ten 50 m phantom cells, 10 MHz of bandwidth, a 1 Gbit service and the
//! six transmit/receive powers of the three link types.

use serde::{Deserialize, Serialize};

use crate::energy::{PhantomMinRule, PowerProfile};

/// Distance unit a path-loss formula expects for its `log10(d)` argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceUnit {
    #[serde(rename = "m")]
    Meters,
    #[serde(rename = "km")]
    Kilometers,
}

impl DistanceUnit {
    pub fn from_meters(self, d_m: f64) -> f64 {
        match self {
            DistanceUnit::Meters => d_m,
            DistanceUnit::Kilometers => d_m / 1000.0,
        }
    }
}

/// How cost ties are resolved by the greedy planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Ties go to the wider tier: macro over phantom, direct over cluster.
    WiderTier,
    /// Ties go to the narrower tier: phantom over macro, cluster over direct.
    NarrowerTier,
}

impl TieBreak {
    /// Whether a candidate with cost `candidate` should replace the incumbent
    /// wider-tier option with cost `incumbent`.
    pub fn prefers_narrower(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            TieBreak::WiderTier => candidate < incumbent,
            TieBreak::NarrowerTier => candidate <= incumbent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    // geometry
    pub macro_radius_m: f64,
    pub phantom_radius_m: f64,
    pub phantom_count: usize,
    pub users_per_cell: usize,
    pub macro_only_users: usize,
    pub allow_overlap: bool,
    pub placement_retries: usize,
    pub min_distance_m: f64,

    // radio
    pub bandwidth_hz: f64,
    pub bandwidth_fraction_m: f64,
    pub bandwidth_fraction_ph: f64,
    pub bandwidth_fraction_d: f64,
    pub noise_density_dbm_hz: f64,
    pub shadowing_db: f64,
    pub shadowing_is_variance: bool,
    pub shadowing_enabled: bool,
    pub fading_enabled: bool,
    pub rate_floor_bps: f64,
    pub pl_macro_const_db: f64,
    pub pl_macro_slope_db: f64,
    pub pl_macro_unit: DistanceUnit,
    pub pl_phantom_const_db: f64,
    pub pl_phantom_slope_db: f64,
    pub pl_phantom_unit: DistanceUnit,
    pub pl_d2d_const_db: f64,
    pub pl_d2d_slope_db: f64,
    pub pl_d2d_unit: DistanceUnit,

    // energy
    pub service_bits: f64,
    pub tx_m_w: f64,
    pub tx_ph_w: f64,
    pub tx_d_w: f64,
    pub rx_m_w: f64,
    pub rx_ph_w: f64,
    pub rx_d_w: f64,
    pub strict_eq3_min: bool,

    // planner
    pub tie_break: TieBreak,
    pub candidate_all_phantoms: bool,

    // experiment
    pub user_counts: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub paired_snapshots: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            macro_radius_m: 500.0,
            phantom_radius_m: 50.0,
            phantom_count: 10,
            users_per_cell: 10,
            macro_only_users: 0,
            allow_overlap: false,
            placement_retries: 10_000,
            min_distance_m: 1.0,

            bandwidth_hz: 10e6,
            bandwidth_fraction_m: 1.0,
            bandwidth_fraction_ph: 1.0,
            bandwidth_fraction_d: 1.0,
            noise_density_dbm_hz: -147.0,
            shadowing_db: 8.0,
            shadowing_is_variance: false,
            shadowing_enabled: true,
            fading_enabled: true,
            rate_floor_bps: 1e3,
            pl_macro_const_db: 128.0,
            pl_macro_slope_db: 37.6,
            pl_macro_unit: DistanceUnit::Kilometers,
            pl_phantom_const_db: 37.0,
            pl_phantom_slope_db: 20.0,
            pl_phantom_unit: DistanceUnit::Meters,
            pl_d2d_const_db: 42.0,
            pl_d2d_slope_db: 16.9,
            pl_d2d_unit: DistanceUnit::Meters,

            service_bits: 1e9,
            tx_m_w: 40.0,
            tx_ph_w: 10.0,
            tx_d_w: 0.125,
            rx_m_w: 1.8,
            rx_ph_w: 1.2,
            rx_d_w: 0.9,
            strict_eq3_min: false,

            tie_break: TieBreak::WiderTier,
            candidate_all_phantoms: false,

            user_counts: (1..=10).map(|k| 50 * k).collect(),
            trials: 200,
            seed: 0,
            paired_snapshots: true,
        }
    }
}

/// A SimConfig field holding a value outside its admissible range.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid value for `{field}`: {reason}")]
pub struct ValidationError {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ValidationError {
    ValidationError { field, reason: reason.into() }
}

impl SimConfig {
    /// Every key accepted in a configuration file.
    pub const KEYS: &'static [&'static str] = &[
        "macro_radius_m",
        "phantom_radius_m",
        "phantom_count",
        "users_per_cell",
        "macro_only_users",
        "allow_overlap",
        "placement_retries",
        "min_distance_m",
        "bandwidth_hz",
        "bandwidth_fraction_m",
        "bandwidth_fraction_ph",
        "bandwidth_fraction_d",
        "noise_density_dbm_hz",
        "shadowing_db",
        "shadowing_is_variance",
        "shadowing_enabled",
        "fading_enabled",
        "rate_floor_bps",
        "pl_macro_const_db",
        "pl_macro_slope_db",
        "pl_macro_unit",
        "pl_phantom_const_db",
        "pl_phantom_slope_db",
        "pl_phantom_unit",
        "pl_d2d_const_db",
        "pl_d2d_slope_db",
        "pl_d2d_unit",
        "service_bits",
        "tx_m_w",
        "tx_ph_w",
        "tx_d_w",
        "rx_m_w",
        "rx_ph_w",
        "rx_d_w",
        "strict_eq3_min",
        "tie_break",
        "candidate_all_phantoms",
        "user_counts",
        "trials",
        "seed",
        "paired_snapshots",
    ];

    pub fn validate(&self) -> Result<(), ValidationError> {
        let positive = [
            ("macro_radius_m", self.macro_radius_m),
            ("phantom_radius_m", self.phantom_radius_m),
            ("min_distance_m", self.min_distance_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("bandwidth_fraction_m", self.bandwidth_fraction_m),
            ("bandwidth_fraction_ph", self.bandwidth_fraction_ph),
            ("bandwidth_fraction_d", self.bandwidth_fraction_d),
            ("rate_floor_bps", self.rate_floor_bps),
            ("service_bits", self.service_bits),
            ("tx_m_w", self.tx_m_w),
            ("tx_ph_w", self.tx_ph_w),
            ("tx_d_w", self.tx_d_w),
            ("rx_m_w", self.rx_m_w),
            ("rx_ph_w", self.rx_ph_w),
            ("rx_d_w", self.rx_d_w),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(field, format!("must be finite and > 0, got {value}")));
            }
        }
        let finite = [
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("pl_macro_const_db", self.pl_macro_const_db),
            ("pl_macro_slope_db", self.pl_macro_slope_db),
            ("pl_phantom_const_db", self.pl_phantom_const_db),
            ("pl_phantom_slope_db", self.pl_phantom_slope_db),
            ("pl_d2d_const_db", self.pl_d2d_const_db),
            ("pl_d2d_slope_db", self.pl_d2d_slope_db),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(invalid(field, format!("must be finite, got {value}")));
            }
        }
        for (field, value) in [
            ("pl_macro_slope_db", self.pl_macro_slope_db),
            ("pl_phantom_slope_db", self.pl_phantom_slope_db),
            ("pl_d2d_slope_db", self.pl_d2d_slope_db),
        ] {
            if value <= 0.0 {
                return Err(invalid(field, "path-loss slope must be > 0"));
            }
        }
        if !(self.shadowing_db.is_finite() && self.shadowing_db >= 0.0) {
            return Err(invalid("shadowing_db", "must be finite and >= 0"));
        }
        if self.phantom_radius_m > self.macro_radius_m {
            return Err(invalid(
                "phantom_radius_m",
                "phantom radius cannot exceed the macro radius",
            ));
        }
        if self.placement_retries == 0 {
            return Err(invalid("placement_retries", "must be >= 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        if self.user_counts.is_empty() {
            return Err(invalid("user_counts", "sweep list must not be empty"));
        }
        if self.user_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("user_counts", "sweep list must be strictly increasing"));
        }
        Ok(())
    }

    pub fn power_profile(&self) -> PowerProfile {
        PowerProfile {
            tx_m: self.tx_m_w,
            tx_ph: self.tx_ph_w,
            tx_d: self.tx_d_w,
            rx_m: self.rx_m_w,
            rx_ph: self.rx_ph_w,
            rx_d: self.rx_d_w,
            service_bits: self.service_bits,
        }
    }

    pub fn phantom_min_rule(&self) -> PhantomMinRule {
        if self.strict_eq3_min {
            PhantomMinRule::AllCellUsers
        } else {
            PhantomMinRule::ServedUsers
        }
    }

    /// Shadowing standard deviation in dB after applying the variance knob.
    pub fn shadowing_std_db(&self) -> f64 {
        if self.shadowing_is_variance {
            self.shadowing_db.sqrt()
        } else {
            self.shadowing_db
        }
    }

    /// Per-cell user counts for a total of `total_users` users spread over the
    /// phantom cells, remainder going to the lowest cell ids.
    pub fn split_users(&self, total_users: usize) -> Vec<usize> {
        let cells = self.phantom_count;
        if cells == 0 {
            return Vec::new();
        }
        let base = total_users / cells;
        let extra = total_users % cells;
        (0..cells).map(|i| base + usize::from(i < extra)).collect()
    }

    /// Per-cell user counts for the single-trial layout (`users_per_cell`).
    pub fn uniform_cell_counts(&self) -> Vec<usize> {
        vec![self.users_per_cell; self.phantom_count]
    }
}
