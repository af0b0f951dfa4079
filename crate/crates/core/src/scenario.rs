//! Randomized scenario generation.
//!
//! A scenario fixes every vehicle and all three pose sets (starts, first
//! goals, second goals) up front, so a run is a pure function of
//! `(seed, experiment index)`. Randomness comes from PCG-64 generators, one
//! independent stream per purpose, keyed by the master seed, the experiment
//! index and the generation attempt.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2, TAU};
use core::fmt;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand_distr::{Normal, Weibull};
use rand_pcg::Pcg64;

use crate::angle::heading_error;
use crate::behavior::WeightParams;
use crate::kinematics::{
    collision_radius, ConfigError, HavConfig, HavState, Pose, DEFAULT_ARTICULATION_LIMIT,
    DEFAULT_ARTICULATION_THRESHOLD, DEFAULT_STEERING_LIMIT,
};

/// Two-component Gaussian mixture for truck lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TruckMix {
    pub mean_short: f64,
    pub std_short: f64,
    pub mean_long: f64,
    pub std_long: f64,
    /// Probability of drawing from the short component.
    pub weight_short: f64,
}

impl Default for TruckMix {
    fn default() -> Self {
        Self {
            mean_short: 4.0,
            std_short: 0.6,
            mean_long: 10.7,
            std_long: 1.2,
            weight_short: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ScenarioParams {
    pub hav_count: usize,
    pub rayleigh_sigma: f64,
    /// Largest trailer count kept when sampling; draws above it are redrawn.
    pub max_trailers: usize,
    pub truck_mix: TruckMix,
    /// Half-open `[min, max)` interval for every segment length.
    pub length_bounds: (f64, f64),
    pub steering_limit: f64,
    pub articulation_limit: f64,
    pub articulation_threshold: f64,
    pub goal_distance_tol: f64,
    pub goal_heading_tol: f64,
    pub dt: f64,
    pub speed_cap: f64,
    pub max_steps: u32,
    pub pose_attempts: u32,
    pub weights: WeightParams,
    pub seed: u64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            hav_count: 1,
            rayleigh_sigma: 3.0,
            max_trailers: 10,
            truck_mix: TruckMix::default(),
            length_bounds: (2.0, 12.0),
            steering_limit: DEFAULT_STEERING_LIMIT,
            articulation_limit: DEFAULT_ARTICULATION_LIMIT,
            articulation_threshold: DEFAULT_ARTICULATION_THRESHOLD,
            goal_distance_tol: 0.5,
            goal_heading_tol: 0.1,
            dt: 0.2,
            speed_cap: 1.0,
            max_steps: 20_000,
            pose_attempts: 100_000,
            weights: WeightParams::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    InvalidParams(&'static str),
    Config(ConfigError),
    /// No admissible pose found for vehicle `hav` within the attempt budget.
    PlacementBudget { hav: usize, attempts: u32 },
    /// Every generation attempt for an experiment ran out of placements.
    GenerationExhausted { index: u64, attempts: u32 },
    ShapeMismatch,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidParams(what) => write!(f, "invalid scenario parameters: {what}"),
            Self::Config(e) => write!(f, "invalid vehicle: {e}"),
            Self::PlacementBudget { hav, attempts } => {
                write!(f, "no free pose for vehicle {hav} after {attempts} attempts")
            }
            Self::GenerationExhausted { index, attempts } => {
                write!(f, "experiment {index}: no scenario after {attempts} generation attempts")
            }
            Self::ShapeMismatch => write!(f, "pose lists do not match the vehicle count"),
        }
    }
}

impl core::error::Error for ScenarioError {}

impl From<ConfigError> for ScenarioError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = ScenarioError::InvalidParams;
        if self.hav_count == 0 {
            return Err(bad("hav_count must be at least 1"));
        }
        if !(self.rayleigh_sigma > 0.0) {
            return Err(bad("rayleigh_sigma must be positive"));
        }
        if self.max_trailers == 0 {
            return Err(bad("max_trailers must be at least 1"));
        }
        let (lo, hi) = self.length_bounds;
        if !(lo > 0.0 && hi > lo) {
            return Err(bad("length_bounds must satisfy 0 < min < max"));
        }
        let m = &self.truck_mix;
        if !(m.std_short > 0.0 && m.std_long > 0.0 && (0.0..=1.0).contains(&m.weight_short)) {
            return Err(bad("truck_mix needs positive deviations and a weight in [0, 1]"));
        }
        if !(self.goal_distance_tol > 0.0 && self.goal_heading_tol > 0.0) {
            return Err(bad("goal tolerances must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(bad("dt must be positive"));
        }
        if !(self.speed_cap > 0.0) {
            return Err(bad("speed_cap must be positive"));
        }
        if !(self.weights.c > 0.0) {
            return Err(bad("weights.c must be positive"));
        }
        if self.pose_attempts == 0 {
            return Err(bad("pose_attempts must be at least 1"));
        }
        // steering and articulation limits are checked by HavConfig::new
        HavConfig::new(
            lo,
            alloc::vec![lo],
            self.steering_limit,
            self.articulation_limit,
            self.articulation_threshold,
        )?;
        Ok(())
    }
}

/// Everything needed to replay one experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub seed: u64,
    pub index: u64,
    pub configs: Vec<HavConfig>,
    pub starts: Vec<Pose>,
    pub first_goals: Vec<Pose>,
    pub second_goals: Vec<Pose>,
    pub area_side: f64,
}

impl Scenario {
    pub fn hav_count(&self) -> usize {
        self.configs.len()
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        let m = self.configs.len();
        if m == 0
            || self.starts.len() != m
            || self.first_goals.len() != m
            || self.second_goals.len() != m
        {
            return Err(ScenarioError::ShapeMismatch);
        }
        Ok(())
    }
}

/// Stream tags; each purpose gets its own PCG stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Vehicle(u32),
    Starts,
    FirstGoals,
    SecondGoals,
}

impl Stream {
    fn tag(self) -> u128 {
        match self {
            Stream::Vehicle(i) => 0x100 + u128::from(i),
            Stream::Starts => 1,
            Stream::FirstGoals => 2,
            Stream::SecondGoals => 3,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one purpose of one generation attempt of one experiment.
pub fn substream(seed: u64, experiment: u64, attempt: u32, stream: Stream) -> Pcg64 {
    let hi = mix64(seed ^ mix64(experiment));
    let lo = mix64(hi ^ mix64(u64::from(attempt) ^ 0xA5A5_A5A5_0000_0000));
    let state = (u128::from(hi) << 64) | u128::from(lo);
    Pcg64::new(state, stream.tag())
}

/// Draws from `sample` until the value lies in `[lo, hi)`.
fn truncated<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, mut sample: impl FnMut(&mut R) -> f64) -> f64 {
    loop {
        let v = sample(rng);
        if v >= lo && v < hi {
            return v;
        }
    }
}

/// Trailer count: ceiling of a Rayleigh draw, redrawn until it falls in
/// `1..=max_trailers`.
pub fn sample_trailer_count<R: Rng + ?Sized>(rng: &mut R, params: &ScenarioParams) -> usize {
    // Rayleigh(sigma) is Weibull with scale sigma * sqrt(2) and shape 2.
    let rayleigh = Weibull::new(params.rayleigh_sigma * SQRT_2, 2.0)
        .expect("positive sigma");
    loop {
        let n = libm::ceil(rayleigh.sample(rng));
        if n >= 1.0 && n <= params.max_trailers as f64 {
            return n as usize;
        }
    }
}

pub fn sample_truck_length<R: Rng + ?Sized>(rng: &mut R, params: &ScenarioParams) -> f64 {
    let m = params.truck_mix;
    let short = Normal::new(m.mean_short, m.std_short).expect("positive deviation");
    let long = Normal::new(m.mean_long, m.std_long).expect("positive deviation");
    let (lo, hi) = params.length_bounds;
    truncated(rng, lo, hi, |r| {
        if r.gen_bool(m.weight_short) {
            short.sample(r)
        } else {
            long.sample(r)
        }
    })
}

pub fn sample_hav_config<R: Rng + ?Sized>(rng: &mut R, params: &ScenarioParams) -> Result<HavConfig, ConfigError> {
    let trailers = sample_trailer_count(rng, params);
    let truck = sample_truck_length(rng, params);
    let (lo, hi) = params.length_bounds;
    let uniform = Uniform::new(lo, hi);
    let lengths = (0..trailers).map(|_| uniform.sample(rng)).collect();
    HavConfig::new(
        truck,
        lengths,
        params.steering_limit,
        params.articulation_limit,
        params.articulation_threshold,
    )
}

/// Side length `A` of the square arena with `A^2 = 4 * sum(pi * d_i^2)`.
pub fn area_side(configs: &[HavConfig]) -> f64 {
    let footprint: f64 = configs
        .iter()
        .map(|c| {
            let d = collision_radius(c);
            PI * d * d
        })
        .sum();
    libm::sqrt(4.0 * footprint)
}

/// Places one pose per vehicle, uniformly in `[0, A]^2` with a uniform
/// heading, redrawing any candidate whose footprint touches an already
/// placed one.
pub fn sample_poses<R: Rng + ?Sized>(
    rng: &mut R,
    configs: &[HavConfig],
    side: f64,
    attempts: u32,
) -> Result<Vec<Pose>, ScenarioError> {
    let coord = Uniform::new_inclusive(0.0, side);
    let angle = Uniform::new(0.0, TAU);
    let radii: Vec<f64> = configs.iter().map(collision_radius).collect();
    place(
        configs.len(),
        attempts,
        |_| {
            let x = coord.sample(rng);
            let y = coord.sample(rng);
            Pose::new(x, y, angle.sample(rng))
        },
        &radii,
    )
}

fn place(
    count: usize,
    attempts: u32,
    mut candidate: impl FnMut(usize) -> Pose,
    radii: &[f64],
) -> Result<Vec<Pose>, ScenarioError> {
    let mut placed: Vec<Pose> = Vec::with_capacity(count);
    for i in 0..count {
        let mut found = None;
        for _ in 0..attempts {
            let p = candidate(i);
            let free = placed.iter().enumerate().all(|(h, q)| {
                p.position().distance(q.position()) > radii[i] + radii[h]
            });
            if free {
                found = Some(p);
                break;
            }
        }
        match found {
            Some(p) => placed.push(p),
            None => return Err(ScenarioError::PlacementBudget { hav: i, attempts }),
        }
    }
    Ok(placed)
}

/// Goal hit: rear truck axle strictly closer than `distance_tol` and truck
/// heading strictly within `heading_tol`.
pub fn goal_reached(state: &HavState, goal: Pose, distance_tol: f64, heading_tol: f64) -> bool {
    let (dist, head) = goal_offsets(state, goal);
    dist < distance_tol && head < heading_tol
}

/// Euclidean distance and absolute heading difference to `goal`.
pub fn goal_offsets(state: &HavState, goal: Pose) -> (f64, f64) {
    (
        state.rear_axle.distance(goal.position()),
        heading_error(goal.heading, state.truck_heading()),
    )
}

/// Generates scenario `index` for the given attempt.
pub fn generate(params: &ScenarioParams, index: u64, attempt: u32) -> Result<Scenario, ScenarioError> {
    params.validate()?;
    let configs = (0..params.hav_count)
        .map(|i| {
            let mut rng = substream(params.seed, index, attempt, Stream::Vehicle(i as u32));
            sample_hav_config(&mut rng, params)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let side = area_side(&configs);
    let phase = |stream| {
        let mut rng = substream(params.seed, index, attempt, stream);
        sample_poses(&mut rng, &configs, side, params.pose_attempts)
    };
    let starts = phase(Stream::Starts)?;
    let first_goals = phase(Stream::FirstGoals)?;
    let second_goals = phase(Stream::SecondGoals)?;
    Ok(Scenario {
        seed: params.seed,
        index,
        configs,
        starts,
        first_goals,
        second_goals,
        area_side: side,
    })
}
