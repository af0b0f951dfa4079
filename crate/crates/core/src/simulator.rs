//! Synchronous two-phase experiment loop.
//!
//! Each step every vehicle decides from the same pre-step snapshot, then all
//! vehicles are integrated. A vehicle that hits its current goal has its
//! speed limit set to zero until every vehicle has hit its first goal; at
//! that step all vehicles switch to their second goals. A run ends when all
//! second goals are hit or after `max_steps` steps.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{classify_close_miss, CloseMiss};
use crate::behavior::{decide, Neighbor};
use crate::geometry::Vec2;
use crate::kinematics::{
    collision_radius, in_actual_collision, in_potential_collision, jackknifed_joints,
    max_safe_speed, step, Control, HavState,
};
use crate::scenario::{generate, goal_offsets, Scenario, ScenarioError, ScenarioParams};

/// Version of the [`ExperimentRecord`] layout.
pub const RECORD_VERSION: u32 = 1;

/// Generation attempts per experiment before giving up.
pub const MAX_GENERATION_ATTEMPTS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    First,
    Second,
}

impl Phase {
    fn index(self) -> usize {
        match self {
            Phase::First => 0,
            Phase::Second => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EventKind {
    /// Joint index is 1-based.
    JackknifeViolation { joint: usize },
    PotentialCollision { other: usize },
    ActualCollision { other: usize },
    GoalHit { phase: Phase, distance: f64, heading_error: f64 },
    CloseMissState { phase: Phase, close_miss: CloseMiss },
}

/// Events are emitted on onset: a condition that persists over several steps
/// is reported once, at the first step it holds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimEvent {
    pub time_step: u32,
    pub hav_index: usize,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Termination {
    AllSecondGoals,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoalOutcome {
    pub hit: bool,
    pub hit_step: Option<u32>,
    pub hit_distance: Option<f64>,
    pub hit_heading_error: Option<f64>,
    /// Steps spent in a heading close miss while this goal was active.
    pub heading_close_miss_steps: u32,
    pub euclidean_close_miss_steps: u32,
}

impl GoalOutcome {
    pub fn close_miss(&self) -> bool {
        self.heading_close_miss_steps > 0 || self.euclidean_close_miss_steps > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HavOutcome {
    pub truck_length: f64,
    pub trailer_lengths: Vec<f64>,
    pub jackknifed: bool,
    /// 1-based joints that exceeded the articulation limit at least once.
    pub jackknife_joints: Vec<usize>,
    pub first_jackknife_step: Option<u32>,
    pub potential_collision: bool,
    pub actual_collision: bool,
    pub goals: [GoalOutcome; 2],
}

impl HavOutcome {
    pub fn trailer_count(&self) -> usize {
        self.trailer_lengths.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentRecord {
    pub version: u32,
    pub seed: u64,
    pub index: u64,
    pub generation_attempts: u32,
    pub dt: f64,
    pub max_steps: u32,
    pub goal_distance_tol: f64,
    pub goal_heading_tol: f64,
    pub havs: Vec<HavOutcome>,
    pub termination: Termination,
    pub final_step: u32,
}

impl ExperimentRecord {
    pub fn hav_count(&self) -> usize {
        self.havs.len()
    }
}

/// Post-step state of one vehicle together with the command that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u32,
    pub hav: usize,
    pub rear_axle: Vec2,
    pub headings: Vec<f64>,
    pub control: Control,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub record: ExperimentRecord,
    pub events: Vec<SimEvent>,
    pub trace: Option<Vec<TraceRow>>,
}

struct Tracker<'a> {
    scenario: &'a Scenario,
    params: &'a ScenarioParams,
    phase: Phase,
    hit: Vec<bool>,
    outcomes: Vec<HavOutcome>,
    events: Vec<SimEvent>,
    joint_active: Vec<Vec<bool>>,
    potential_active: Vec<bool>,
    actual_active: Vec<bool>,
    close_miss: Vec<CloseMiss>,
}

impl<'a> Tracker<'a> {
    fn new(scenario: &'a Scenario, params: &'a ScenarioParams) -> Self {
        let m = scenario.hav_count();
        let outcomes = scenario
            .configs
            .iter()
            .map(|c| HavOutcome {
                truck_length: c.truck_length(),
                trailer_lengths: c.trailer_lengths().to_vec(),
                jackknifed: false,
                jackknife_joints: Vec::new(),
                first_jackknife_step: None,
                potential_collision: false,
                actual_collision: false,
                goals: Default::default(),
            })
            .collect();
        Self {
            scenario,
            params,
            phase: Phase::First,
            hit: vec![false; m],
            outcomes,
            events: Vec::new(),
            joint_active: scenario
                .configs
                .iter()
                .map(|c| vec![false; c.trailer_count()])
                .collect(),
            potential_active: vec![false; m * m],
            actual_active: vec![false; m * m],
            close_miss: vec![CloseMiss::None; m],
        }
    }

    fn goals(&self) -> &'a [crate::kinematics::Pose] {
        match self.phase {
            Phase::First => &self.scenario.first_goals,
            Phase::Second => &self.scenario.second_goals,
        }
    }

    fn emit(&mut self, time_step: u32, hav_index: usize, kind: EventKind) {
        self.events.push(SimEvent {
            time_step,
            hav_index,
            kind,
        });
    }

    fn observe_safety(&mut self, t: u32, states: &[HavState]) {
        let configs = &self.scenario.configs;
        for (i, state) in states.iter().enumerate() {
            let limit = configs[i].articulation_limit();
            let mut now = vec![false; configs[i].trailer_count()];
            for joint in jackknifed_joints(state, limit) {
                now[joint - 1] = true;
            }
            for (j, &active) in now.iter().enumerate() {
                if active && !self.joint_active[i][j] {
                    let out = &mut self.outcomes[i];
                    out.jackknifed = true;
                    out.first_jackknife_step.get_or_insert(t);
                    if !out.jackknife_joints.contains(&(j + 1)) {
                        out.jackknife_joints.push(j + 1);
                        out.jackknife_joints.sort_unstable();
                    }
                    self.emit(t, i, EventKind::JackknifeViolation { joint: j + 1 });
                }
            }
            self.joint_active[i] = now;
        }

        let m = states.len();
        for i in 0..m {
            for h in (i + 1)..m {
                let d = collision_radius(&configs[i]) + collision_radius(&configs[h]);
                let potential = in_potential_collision(&states[i], &states[h], d);
                let actual = in_actual_collision(&configs[i], &states[i], &configs[h], &states[h]);
                let key = i * m + h;
                if potential && !self.potential_active[key] {
                    self.outcomes[i].potential_collision = true;
                    self.outcomes[h].potential_collision = true;
                    self.emit(t, i, EventKind::PotentialCollision { other: h });
                    self.emit(t, h, EventKind::PotentialCollision { other: i });
                }
                if actual && !self.actual_active[key] {
                    self.outcomes[i].actual_collision = true;
                    self.outcomes[h].actual_collision = true;
                    self.emit(t, i, EventKind::ActualCollision { other: h });
                    self.emit(t, h, EventKind::ActualCollision { other: i });
                }
                self.potential_active[key] = potential;
                self.actual_active[key] = actual;
            }
        }
    }

    fn observe_goals(&mut self, t: u32, states: &[HavState]) {
        let goals = self.goals();
        let phase = self.phase;
        let d_e = self.params.goal_distance_tol;
        let d_h = self.params.goal_heading_tol;
        for (i, state) in states.iter().enumerate() {
            if self.hit[i] {
                continue;
            }
            let (distance, heading_error) = goal_offsets(state, goals[i]);
            let outcome = &mut self.outcomes[i].goals[phase.index()];
            if distance < d_e && heading_error < d_h {
                self.hit[i] = true;
                outcome.hit = true;
                outcome.hit_step = Some(t);
                outcome.hit_distance = Some(distance);
                outcome.hit_heading_error = Some(heading_error);
                self.close_miss[i] = CloseMiss::None;
                self.emit(
                    t,
                    i,
                    EventKind::GoalHit {
                        phase,
                        distance,
                        heading_error,
                    },
                );
                continue;
            }
            let kind = classify_close_miss(distance, heading_error, d_e, d_h);
            match kind {
                CloseMiss::Heading => outcome.heading_close_miss_steps += 1,
                CloseMiss::Euclidean => outcome.euclidean_close_miss_steps += 1,
                CloseMiss::None => {}
            }
            if kind != CloseMiss::None && kind != self.close_miss[i] {
                self.emit(t, i, EventKind::CloseMissState { phase, close_miss: kind });
            }
            self.close_miss[i] = kind;
        }
    }

    /// Goal bookkeeping plus phase switching; returns true once every
    /// second goal is hit.
    fn advance_phase(&mut self, t: u32, states: &[HavState]) -> bool {
        self.observe_goals(t, states);
        if self.hit.iter().all(|&h| h) {
            match self.phase {
                Phase::First => {
                    self.phase = Phase::Second;
                    self.hit.iter_mut().for_each(|h| *h = false);
                    self.close_miss.iter_mut().for_each(|c| *c = CloseMiss::None);
                    self.observe_goals(t, states);
                    return self.hit.iter().all(|&h| h);
                }
                Phase::Second => return true,
            }
        }
        false
    }
}

/// Runs one experiment. `trace` keeps every post-step state.
pub fn run(scenario: &Scenario, params: &ScenarioParams, trace: bool) -> Result<RunOutput, ScenarioError> {
    scenario.check()?;
    params.validate()?;
    let configs = &scenario.configs;
    let m = configs.len();
    let mut states: Vec<HavState> = scenario
        .starts
        .iter()
        .zip(configs)
        .map(|(p, c)| HavState::straight(*p, c.trailer_count()))
        .collect();
    let speed_limits: Vec<f64> = configs
        .iter()
        .map(|c| params.speed_cap.min(max_safe_speed(c, params.dt)))
        .collect();

    let mut rows = trace.then(Vec::new);
    if let Some(rows) = rows.as_mut() {
        record_rows(rows, 0, &states, &vec![Control::default(); m]);
    }

    let mut tracker = Tracker::new(scenario, params);
    tracker.observe_safety(0, &states);
    let mut done = tracker.advance_phase(0, &states);
    let mut final_step = 0;

    let mut controls = vec![Control::default(); m];
    let mut t = 0;
    while !done && t < params.max_steps {
        t += 1;
        let goals = tracker.goals();
        for i in 0..m {
            controls[i] = if tracker.hit[i] {
                Control::default()
            } else {
                let neighbors: Vec<Neighbor<'_>> = (0..m)
                    .filter(|&h| h != i)
                    .map(|h| Neighbor {
                        config: &configs[h],
                        state: &states[h],
                    })
                    .collect();
                decide(
                    &configs[i],
                    &states[i],
                    goals[i],
                    &neighbors,
                    params.weights,
                    speed_limits[i],
                )
            };
        }
        states = states
            .iter()
            .zip(configs)
            .zip(&controls)
            .map(|((s, c), u)| step(c, s, *u, params.dt))
            .collect();
        if let Some(rows) = rows.as_mut() {
            record_rows(rows, t, &states, &controls);
        }
        tracker.observe_safety(t, &states);
        done = tracker.advance_phase(t, &states);
        final_step = t;
    }

    let record = ExperimentRecord {
        version: RECORD_VERSION,
        seed: scenario.seed,
        index: scenario.index,
        generation_attempts: 1,
        dt: params.dt,
        max_steps: params.max_steps,
        goal_distance_tol: params.goal_distance_tol,
        goal_heading_tol: params.goal_heading_tol,
        havs: tracker.outcomes,
        termination: if done {
            Termination::AllSecondGoals
        } else {
            Termination::StepLimit
        },
        final_step,
    };
    Ok(RunOutput {
        record,
        events: tracker.events,
        trace: rows,
    })
}

fn record_rows(rows: &mut Vec<TraceRow>, t: u32, states: &[HavState], controls: &[Control]) {
    for (i, (s, u)) in states.iter().zip(controls).enumerate() {
        rows.push(TraceRow {
            step: t,
            hav: i,
            rear_axle: s.rear_axle,
            headings: s.headings.clone(),
            control: *u,
        });
    }
}

/// Generates and runs experiment `index`. Scenarios whose placement budget
/// runs out are regenerated from the next attempt's streams.
pub fn run_experiment(params: &ScenarioParams, index: u64) -> Result<ExperimentRecord, ScenarioError> {
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        match generate(params, index, attempt) {
            Ok(scenario) => {
                let mut record = run(&scenario, params, false)?.record;
                record.generation_attempts = attempt + 1;
                return Ok(record);
            }
            Err(ScenarioError::PlacementBudget { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ScenarioError::GenerationExhausted {
        index,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

/// Sequential batch of `count` experiments with `hav_count` vehicles each,
/// ordered by experiment index.
pub fn run_batch(
    params: &ScenarioParams,
    count: u64,
    hav_count: usize,
) -> Result<Vec<ExperimentRecord>, ScenarioError> {
    let params = ScenarioParams {
        hav_count,
        ..params.clone()
    };
    (0..count).map(|i| run_experiment(&params, i)).collect()
}
