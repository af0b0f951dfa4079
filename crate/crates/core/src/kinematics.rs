//! Truck-trailer model with on-axle hitching.
//!
//! Each vehicle is a truck of wheelbase `l0` followed by `N` trailers of
//! wheelbase `l1..lN`. The dynamic state is the truck's rear virtual axle plus
//! one heading per segment; every other axle position follows from the
//! headings, so link lengths are exact by construction.
//!
//! Axle indexing follows the vehicle from front to back: index 0 is the
//! truck's front axle, 1 its rear axle, and `j + 1` the axle of trailer `j`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;

use crate::angle::wrap;
use crate::geometry::{polylines_intersect, Vec2};

/// Default steering limit (48 degrees).
pub const DEFAULT_STEERING_LIMIT: f64 = 48.0 * PI / 180.0;
/// Default maximum articulation angle (90 degrees).
pub const DEFAULT_ARTICULATION_LIMIT: f64 = FRAC_PI_2;
/// Default articulation threshold beta (75 degrees).
pub const DEFAULT_ARTICULATION_THRESHOLD: f64 = 75.0 * core::f64::consts::PI / 180.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    NoTrailers,
    NonPositiveLength { segment: usize, value: f64 },
    SteeringLimitOutOfRange(f64),
    ArticulationLimitOutOfRange(f64),
    ThresholdNotBelowLimit { threshold: f64, limit: f64 },
    StateShape { expected: usize, found: usize },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoTrailers => write!(f, "a vehicle needs at least one trailer"),
            Self::NonPositiveLength { segment, value } => {
                write!(f, "segment {segment} has non-positive length {value}")
            }
            Self::SteeringLimitOutOfRange(v) => {
                write!(f, "steering limit {v} outside (0, pi/2)")
            }
            Self::ArticulationLimitOutOfRange(v) => {
                write!(f, "articulation limit {v} outside (0, pi]")
            }
            Self::ThresholdNotBelowLimit { threshold, limit } => {
                write!(f, "articulation threshold {threshold} must be below limit {limit}")
            }
            Self::StateShape { expected, found } => {
                write!(f, "expected {expected} headings, found {found}")
            }
        }
    }
}

impl core::error::Error for ConfigError {}

/// Immutable vehicle description.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "RawConfig", into = "RawConfig")
)]
pub struct HavConfig {
    truck_length: f64,
    trailer_lengths: Vec<f64>,
    steering_limit: f64,
    articulation_limit: f64,
    articulation_threshold: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RawConfig {
    truck_length: f64,
    trailer_lengths: Vec<f64>,
    #[serde(default = "default_steering")]
    steering_limit: f64,
    #[serde(default = "default_articulation_limit")]
    articulation_limit: f64,
    #[serde(default = "default_articulation_threshold")]
    articulation_threshold: f64,
}

#[cfg(feature = "serde")]
fn default_steering() -> f64 {
    DEFAULT_STEERING_LIMIT
}
#[cfg(feature = "serde")]
fn default_articulation_limit() -> f64 {
    DEFAULT_ARTICULATION_LIMIT
}
#[cfg(feature = "serde")]
fn default_articulation_threshold() -> f64 {
    DEFAULT_ARTICULATION_THRESHOLD
}

#[cfg(feature = "serde")]
impl TryFrom<RawConfig> for HavConfig {
    type Error = ConfigError;
    fn try_from(raw: RawConfig) -> Result<Self, ConfigError> {
        HavConfig::new(
            raw.truck_length,
            raw.trailer_lengths,
            raw.steering_limit,
            raw.articulation_limit,
            raw.articulation_threshold,
        )
    }
}

#[cfg(feature = "serde")]
impl From<HavConfig> for RawConfig {
    fn from(c: HavConfig) -> Self {
        RawConfig {
            truck_length: c.truck_length,
            trailer_lengths: c.trailer_lengths,
            steering_limit: c.steering_limit,
            articulation_limit: c.articulation_limit,
            articulation_threshold: c.articulation_threshold,
        }
    }
}

impl HavConfig {
    pub fn new(
        truck_length: f64,
        trailer_lengths: Vec<f64>,
        steering_limit: f64,
        articulation_limit: f64,
        articulation_threshold: f64,
    ) -> Result<Self, ConfigError> {
        if trailer_lengths.is_empty() {
            return Err(ConfigError::NoTrailers);
        }
        // `!(x > 0)` also rejects NaN.
        if !(truck_length > 0.0) || !truck_length.is_finite() {
            return Err(ConfigError::NonPositiveLength {
                segment: 0,
                value: truck_length,
            });
        }
        for (j, &l) in trailer_lengths.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(ConfigError::NonPositiveLength {
                    segment: j + 1,
                    value: l,
                });
            }
        }
        if !(steering_limit > 0.0 && steering_limit < FRAC_PI_2) {
            return Err(ConfigError::SteeringLimitOutOfRange(steering_limit));
        }
        if !(articulation_limit > 0.0 && articulation_limit <= core::f64::consts::PI) {
            return Err(ConfigError::ArticulationLimitOutOfRange(articulation_limit));
        }
        if !(articulation_threshold < articulation_limit) {
            return Err(ConfigError::ThresholdNotBelowLimit {
                threshold: articulation_threshold,
                limit: articulation_limit,
            });
        }
        Ok(Self {
            truck_length,
            trailer_lengths,
            steering_limit,
            articulation_limit,
            articulation_threshold,
        })
    }

    /// Vehicle with the default steering limit (48 deg), articulation limit
    /// (90 deg) and articulation threshold (75 deg).
    pub fn with_lengths(truck_length: f64, trailer_lengths: Vec<f64>) -> Result<Self, ConfigError> {
        Self::new(
            truck_length,
            trailer_lengths,
            DEFAULT_STEERING_LIMIT,
            DEFAULT_ARTICULATION_LIMIT,
            DEFAULT_ARTICULATION_THRESHOLD,
        )
    }

    /// Copy of this vehicle with a different steering limit.
    pub fn with_steering_limit(&self, steering_limit: f64) -> Result<Self, ConfigError> {
        Self::new(
            self.truck_length,
            self.trailer_lengths.clone(),
            steering_limit,
            self.articulation_limit,
            self.articulation_threshold,
        )
    }

    #[inline]
    pub fn trailer_count(&self) -> usize {
        self.trailer_lengths.len()
    }

    #[inline]
    pub fn truck_length(&self) -> f64 {
        self.truck_length
    }

    #[inline]
    pub fn trailer_lengths(&self) -> &[f64] {
        &self.trailer_lengths
    }

    #[inline]
    pub fn steering_limit(&self) -> f64 {
        self.steering_limit
    }

    #[inline]
    pub fn articulation_limit(&self) -> f64 {
        self.articulation_limit
    }

    #[inline]
    pub fn articulation_threshold(&self) -> f64 {
        self.articulation_threshold
    }

    /// Wheelbase of segment `k`, where 0 is the truck.
    #[inline]
    pub fn segment_length(&self, k: usize) -> f64 {
        if k == 0 {
            self.truck_length
        } else {
            self.trailer_lengths[k - 1]
        }
    }

    /// Truck plus all trailers.
    pub fn total_length(&self) -> f64 {
        self.truck_length + self.trailer_lengths.iter().sum::<f64>()
    }
}

/// Planar pose of the truck's rear axle. The heading is kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap(heading),
        }
    }

    #[inline]
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Dynamic state: rear truck axle and headings `theta0..thetaN`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HavState {
    pub rear_axle: Vec2,
    pub headings: Vec<f64>,
}

impl HavState {
    /// Unarticulated vehicle whose truck rear axle sits at `pose`.
    pub fn straight(pose: Pose, trailer_count: usize) -> Self {
        Self {
            rear_axle: pose.position(),
            headings: alloc::vec![pose.heading; trailer_count + 1],
        }
    }

    pub fn new(rear_axle: Vec2, headings: Vec<f64>) -> Self {
        Self {
            rear_axle,
            headings: headings.into_iter().map(wrap).collect(),
        }
    }

    pub fn check_shape(&self, config: &HavConfig) -> Result<(), ConfigError> {
        let expected = config.trailer_count() + 1;
        if self.headings.len() == expected {
            Ok(())
        } else {
            Err(ConfigError::StateShape {
                expected,
                found: self.headings.len(),
            })
        }
    }

    #[inline]
    pub fn truck_heading(&self) -> f64 {
        self.headings[0]
    }

    /// Heading of the first trailer.
    #[inline]
    pub fn first_trailer_heading(&self) -> f64 {
        self.headings[1]
    }

    /// Truck rear-axle pose.
    pub fn pose(&self) -> Pose {
        Pose {
            x: self.rear_axle.x,
            y: self.rear_axle.y,
            heading: self.headings[0],
        }
    }
}

/// Ackermann command for the truck.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Control {
    pub speed: f64,
    pub steering: f64,
}

/// Front truck axle, rear truck axle, then each trailer axle.
pub fn axle_positions(config: &HavConfig, state: &HavState) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(config.trailer_count() + 2);
    out.push(state.rear_axle + Vec2::from_angle(state.headings[0]) * config.truck_length());
    out.push(state.rear_axle);
    let mut prev = state.rear_axle;
    for (j, &l) in config.trailer_lengths().iter().enumerate() {
        let axle = prev - Vec2::from_angle(state.headings[j + 1]) * l;
        out.push(axle);
        prev = axle;
    }
    out
}

/// Longitudinal speed of every segment, `v0..vN`, for truck speed `speed`.
pub fn segment_speeds(state: &HavState, speed: f64) -> Vec<f64> {
    let mut speeds = Vec::with_capacity(state.headings.len());
    speeds.push(speed);
    for j in 1..state.headings.len() {
        let v_prev = speeds[j - 1];
        speeds.push(v_prev * libm::cos(state.headings[j] - state.headings[j - 1]));
    }
    speeds
}

/// One explicit Euler step of length `dt`. All derivatives use the pre-step
/// state; headings are re-wrapped afterwards.
pub fn step(config: &HavConfig, state: &HavState, control: Control, dt: f64) -> HavState {
    let h = &state.headings;
    let v0 = control.speed;
    let theta0 = h[0];

    let rear_axle = state.rear_axle + Vec2::from_angle(theta0) * (v0 * dt);
    let mut headings = Vec::with_capacity(h.len());
    headings.push(wrap(
        theta0 + v0 / config.truck_length() * libm::tan(control.steering) * dt,
    ));

    let mut v_prev = v0;
    for j in 1..h.len() {
        let d = h[j] - h[j - 1];
        let rate = -v_prev / config.segment_length(j) * libm::sin(d);
        headings.push(wrap(h[j] + rate * dt));
        v_prev *= libm::cos(d);
    }

    HavState {
        rear_axle,
        headings,
    }
}

/// Articulation angles `delta_j = theta_j - theta_{j-1}`, wrapped.
pub fn articulation_angles(state: &HavState) -> Vec<f64> {
    state.headings.windows(2).map(|w| wrap(w[1] - w[0])).collect()
}

/// Whether `delta` exceeds `limit` in magnitude, evaluated as
/// `cos(delta) < cos(limit)` so that `|delta| == limit` stays admissible.
#[inline]
pub fn exceeds_articulation(delta: f64, limit: f64) -> bool {
    libm::cos(delta) < libm::cos(limit)
}

pub fn is_jackknifed(state: &HavState, articulation_limit: f64) -> bool {
    state
        .headings
        .windows(2)
        .any(|w| exceeds_articulation(w[1] - w[0], articulation_limit))
}

/// 1-based indices of the joints currently past `articulation_limit`.
pub fn jackknifed_joints(state: &HavState, articulation_limit: f64) -> impl Iterator<Item = usize> + '_ {
    state
        .headings
        .windows(2)
        .enumerate()
        .filter(move |(_, w)| exceeds_articulation(w[1] - w[0], articulation_limit))
        .map(|(j, _)| j + 1)
}

/// Radius of the circular footprint around the rear truck axle: the summed
/// trailer lengths. The truck itself is not included.
pub fn collision_radius(config: &HavConfig) -> f64 {
    config.trailer_lengths().iter().sum()
}

/// Footprint overlap test; `collision_distance` is the sum of both radii.
/// Touching circles count as overlapping.
pub fn in_potential_collision(a: &HavState, b: &HavState, collision_distance: f64) -> bool {
    a.rear_axle.distance(b.rear_axle) <= collision_distance
}

/// Intersection of the axle chains (front truck axle through last trailer
/// axle) of two vehicles.
pub fn in_actual_collision(
    config_a: &HavConfig,
    state_a: &HavState,
    config_b: &HavConfig,
    state_b: &HavState,
) -> bool {
    let chain_a = axle_positions(config_a, state_a);
    let chain_b = axle_positions(config_b, state_b);
    polylines_intersect(&chain_a, &chain_b)
}

/// Radius of the smallest circle the front axle can follow indefinitely:
/// `sqrt(l0^2 + sum lj^2)`, reached when the last axle sits on the centre of
/// rotation.
pub fn min_stable_radius(config: &HavConfig) -> f64 {
    let sum_sq = config.truck_length() * config.truck_length()
        + config.trailer_lengths().iter().map(|l| l * l).sum::<f64>();
    libm::sqrt(sum_sq)
}

/// Largest truck speed for which one step of length `dt` cannot carry the
/// first joint from the articulation threshold past the articulation limit.
pub fn max_safe_speed(config: &HavConfig, dt: f64) -> f64 {
    let beta = config.articulation_threshold();
    let per_meter = libm::fabs(
        libm::sin(beta) / config.trailer_lengths()[0]
            + libm::tan(config.steering_limit()) / config.truck_length(),
    );
    (config.articulation_limit() - beta) / (dt * per_meter)
}

/// Instantaneous rate of the first articulation angle,
/// `-(v/l1) sin(delta1) - (v/l0) tan(phi)`.
pub fn articulation_rate(config: &HavConfig, state: &HavState, control: Control) -> f64 {
    let delta1 = wrap(state.headings[1] - state.headings[0]);
    -control.speed / config.trailer_lengths()[0] * libm::sin(delta1)
        - control.speed / config.truck_length() * libm::tan(control.steering)
}

/// Steady-state first articulation angle on a constant-steering circle,
/// if one exists.
pub fn steady_articulation(config: &HavConfig, steering: f64) -> Option<f64> {
    let s = -config.trailer_lengths()[0] / config.truck_length() * libm::tan(steering);
    (libm::fabs(s) <= 1.0).then(|| libm::asin(s))
}
