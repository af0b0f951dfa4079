//! Reaction-based steering.
//!
//! Every step each vehicle builds a unit base vector (goal attraction, or
//! evasion while a neighbour's footprint overlaps its own), adds a repulsion
//! along its first trailer weighted by the articulation of every joint,
//! rescales to the speed limit and converts the result to an Ackermann
//! command. Nothing is remembered between steps.

use crate::angle::wrap;
use crate::dubins::{shortest_path, Turn};
use crate::geometry::Vec2;
use crate::kinematics::{
    collision_radius, in_potential_collision, min_stable_radius, Control, HavConfig, HavState, Pose,
};

/// Below this norm the summed vector is treated as zero.
const DEGENERATE_NORM: f64 = 1e-12;

/// Distance to the goal, in truck lengths, at which goal attraction stops
/// aiming at the approach point and aims at the goal with tighter turns.
pub const NEAR_GOAL_TRUCK_LENGTHS: f64 = 1.0;

/// Shape of the jackknife weight `1 + tanh(b - c cos(delta))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightParams {
    pub b: f64,
    pub c: f64,
}

impl Default for WeightParams {
    /// `b = 0.5`, `c = 2`: the weight crosses 1 near 75 degrees and tends to
    /// 2 for a fully folded joint.
    fn default() -> Self {
        Self { b: 0.5, c: 2.0 }
    }
}

impl WeightParams {
    /// Articulation at which the weight equals exactly one, when defined.
    pub fn unit_weight_angle(&self) -> Option<f64> {
        let r = self.b / self.c;
        (libm::fabs(r) <= 1.0).then(|| libm::acos(r))
    }
}

/// Desired planar velocity.
pub type MovementVector = Vec2;

pub fn jackknife_weight(delta: f64, params: WeightParams) -> f64 {
    1.0 + libm::tanh(params.b - params.c * libm::cos(delta))
}

/// Pose one truck length before `goal`, along the goal heading.
pub fn approach_point(goal: Pose, truck_length: f64) -> Pose {
    Pose {
        x: goal.x - truck_length * libm::cos(goal.heading),
        y: goal.y - truck_length * libm::sin(goal.heading),
        heading: goal.heading,
    }
}

/// Unit vector steering the truck into the first turn of a Dubins path.
///
/// Far from the goal the path targets the approach point with the minimal
/// stable radius; within [`NEAR_GOAL_TRUCK_LENGTHS`] truck lengths it targets
/// the goal itself with a radius of one truck length.
pub fn goal_attraction(config: &HavConfig, state: &HavState, goal: Pose) -> MovementVector {
    let here = state.pose();
    let l0 = config.truck_length();
    let near = here.position().distance(goal.position()) <= NEAR_GOAL_TRUCK_LENGTHS * l0;
    let (target, radius) = if near {
        (goal, l0)
    } else {
        (approach_point(goal, l0), min_stable_radius(config))
    };
    let steer = match shortest_path(here, target, radius).initial_turn() {
        Turn::Left => config.steering_limit(),
        Turn::Right => -config.steering_limit(),
        Turn::Straight => 0.0,
    };
    Vec2::from_angle(here.heading + steer)
}

/// Unit vector from `other`'s rear axle towards `this` one. Coincident axles
/// fall back to the own truck heading.
pub fn evasion_vector(this: &HavState, other: &HavState) -> MovementVector {
    let away = this.rear_axle - other.rear_axle;
    let n = away.norm();
    if n > 0.0 {
        away * (1.0 / n)
    } else {
        Vec2::from_angle(this.truck_heading())
    }
}

/// Adds the summed jackknife repulsion along the first trailer to
/// `base` and rescales to `speed_limit`.
pub fn combine(
    base: MovementVector,
    state: &HavState,
    params: WeightParams,
    speed_limit: f64,
) -> MovementVector {
    let weight: f64 = state
        .headings
        .windows(2)
        .map(|w| jackknife_weight(w[1] - w[0], params))
        .sum();
    let trailer_dir = Vec2::from_angle(state.first_trailer_heading());
    let u = base + trailer_dir * weight;
    let n = u.norm();
    if n < DEGENERATE_NORM {
        trailer_dir * speed_limit
    } else {
        u * (speed_limit / n)
    }
}

/// Speed is the vector length; steering is the vector's angle relative to
/// the truck heading, wrapped to `(-pi, pi]` and clipped to the limit.
pub fn to_ackermann(m: MovementVector, truck_heading: f64, steering_limit: f64) -> Control {
    let speed = m.norm();
    if speed == 0.0 {
        return Control::default();
    }
    let steering = wrap(m.angle() - truck_heading).clamp(-steering_limit, steering_limit);
    Control { speed, steering }
}

/// Another vehicle as seen by the deciding one.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub config: &'a HavConfig,
    pub state: &'a HavState,
}

/// Full reaction stack for one vehicle and one step.
///
/// If any neighbour is in potential collision, the nearest one (first in
/// slice order on ties) replaces goal attraction with an evasion vector.
pub fn decide(
    config: &HavConfig,
    state: &HavState,
    goal: Pose,
    neighbors: &[Neighbor<'_>],
    params: WeightParams,
    speed_limit: f64,
) -> Control {
    let own_radius = collision_radius(config);
    let mut threat: Option<(f64, &HavState)> = None;
    for n in neighbors {
        if in_potential_collision(state, n.state, own_radius + collision_radius(n.config)) {
            let dist = state.rear_axle.distance(n.state.rear_axle);
            if threat.is_none_or(|(best, _)| dist < best) {
                threat = Some((dist, n.state));
            }
        }
    }
    let base = match threat {
        Some((_, other)) => evasion_vector(state, other),
        None => goal_attraction(config, state, goal),
    };
    let m = combine(base, state, params, speed_limit);
    to_ackermann(m, state.truck_heading(), config.steering_limit())
}
