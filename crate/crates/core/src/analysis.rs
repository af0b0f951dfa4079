//! Post-hoc statistics over experiment records.

use alloc::string::String;
use alloc::vec::Vec;

use crate::kinematics::HavConfig;
use crate::simulator::{ExperimentRecord, HavOutcome};

/// Near-goal state that met one tolerance and missed the other by less
/// than one more tolerance width. Hits are never close misses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CloseMiss {
    /// Distance below `d_e`, heading in `[d_h, 2 d_h)`.
    Heading,
    /// Heading below `d_h`, distance in `[d_e, 2 d_e)`.
    Euclidean,
    #[default]
    None,
}

pub fn classify_close_miss(distance: f64, heading_diff: f64, d_e: f64, d_h: f64) -> CloseMiss {
    let near = distance < d_e;
    let aligned = heading_diff < d_h;
    if near && heading_diff >= d_h && heading_diff < 2.0 * d_h {
        CloseMiss::Heading
    } else if aligned && distance >= d_e && distance < 2.0 * d_e {
        CloseMiss::Euclidean
    } else {
        CloseMiss::None
    }
}

fn joint_position_of(truck: f64, trailers: &[f64], joint: usize) -> f64 {
    let total = truck + trailers.iter().sum::<f64>();
    let ahead = truck + trailers[..joint - 1].iter().sum::<f64>();
    ahead / total
}

fn length_difference_of(truck: f64, trailers: &[f64]) -> f64 {
    let total = truck + trailers.iter().sum::<f64>();
    let mut prev = truck;
    let mut diff = 0.0;
    for &l in trailers {
        diff += libm::fabs(l - prev);
        prev = l;
    }
    diff / total
}

/// Where joint `joint` (1-based) sits along the vehicle: segment length ahead
/// of the joint over total length, measured from the truck's front axle.
///
/// # Panics
/// If `joint` is not in `1..=trailer_count`.
pub fn joint_position_metric(config: &HavConfig, joint: usize) -> f64 {
    assert!(joint >= 1 && joint <= config.trailer_count(), "joint {joint} out of range");
    joint_position_of(config.truck_length(), config.trailer_lengths(), joint)
}

/// Sum of absolute length changes between consecutive segments, starting at
/// the truck, over total vehicle length. Order sensitive; zero for equal
/// segments and below 2 for any vehicle.
pub fn length_difference_metric(config: &HavConfig) -> f64 {
    length_difference_of(config.truck_length(), config.trailer_lengths())
}

/// Binned counts. Values outside `[edges[0], edges[last])` are clamped into
/// the first or last bin so counts always add up to the number of samples.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub name: String,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn uniform(name: &str, lo: f64, hi: f64, bins: usize) -> Self {
        let width = (hi - lo) / bins as f64;
        Self {
            name: name.into(),
            edges: (0..=bins).map(|k| lo + width * k as f64).collect(),
            counts: alloc::vec![0; bins],
        }
    }

    /// Unit-width bins centred on the integers `lo..=hi`.
    pub fn integer(name: &str, lo: i64, hi: i64) -> Self {
        Self {
            name: name.into(),
            edges: (lo..=hi + 1).map(|k| k as f64 - 0.5).collect(),
            counts: alloc::vec![0; (hi - lo + 1) as usize],
        }
    }

    pub fn add(&mut self, value: f64) {
        let bins = self.counts.len();
        let idx = self.edges[1..bins]
            .iter()
            .position(|&e| value < e)
            .unwrap_or(bins - 1);
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloseMissSummary {
    /// Vehicles with at least one close-miss state while this goal was active.
    pub havs_with_close_miss: u64,
    /// Of those, vehicles that never hit the goal.
    pub missed_with_close_miss: u64,
    pub heading_steps: u64,
    pub euclidean_steps: u64,
    /// Share of close-miss states that were heading close misses.
    pub heading_fraction: f64,
    pub euclidean_fraction: f64,
}

/// Rates are per vehicle, not per experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CohortSummary {
    pub hav_count: usize,
    pub experiments: u64,
    pub havs: u64,
    pub jackknife_rate: f64,
    pub first_goal_rate: f64,
    pub second_goal_rate: f64,
    pub potential_collision_rate: f64,
    pub actual_collision_rate: f64,
    pub close_miss: [CloseMissSummary; 2],
    pub histograms: Vec<Histogram>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryReport {
    /// One cohort per vehicle count, ascending.
    pub cohorts: Vec<CohortSummary>,
}

fn rate(n: u64, of: u64) -> f64 {
    if of == 0 {
        0.0
    } else {
        n as f64 / of as f64
    }
}

fn summarize(hav_count: usize, records: &[&ExperimentRecord]) -> CohortSummary {
    let max_steps = records.iter().map(|r| r.max_steps).max().unwrap_or(0);
    let d_e = records[0].goal_distance_tol;
    let d_h = records[0].goal_heading_tol;

    let mut h_trailers = Histogram::integer("trailer_count_all", 1, 10);
    let mut h_trailers_jk = Histogram::integer("trailer_count_jackknifed", 1, 10);
    let mut h_ld = Histogram::uniform("length_difference_all", 0.0, 1.0, 10);
    let mut h_ld_jk = Histogram::uniform("length_difference_jackknifed", 0.0, 1.0, 10);
    let mut h_joint = Histogram::uniform("joint_position_jackknifed", 0.0, 1.0, 10);
    let mut h_time = [
        Histogram::uniform("goal_time_first", 0.0, f64::from(max_steps), 20),
        Histogram::uniform("goal_time_second", 0.0, f64::from(max_steps), 20),
    ];
    let mut h_dist = [
        Histogram::uniform("goal_distance_first", 0.0, d_e, 10),
        Histogram::uniform("goal_distance_second", 0.0, d_e, 10),
    ];
    let mut h_head = [
        Histogram::uniform("goal_heading_first", 0.0, d_h, 10),
        Histogram::uniform("goal_heading_second", 0.0, d_h, 10),
    ];

    let mut havs = 0u64;
    let (mut jk, mut pot, mut act) = (0u64, 0u64, 0u64);
    let mut goal_hits = [0u64; 2];
    let mut cm = [CloseMissSummary::default(), CloseMissSummary::default()];

    let all: Vec<&HavOutcome> = records.iter().flat_map(|r| r.havs.iter()).collect();
    for h in all {
        havs += 1;
        let ld = length_difference_of(h.truck_length, &h.trailer_lengths);
        h_trailers.add(h.trailer_count() as f64);
        h_ld.add(ld);
        if h.jackknifed {
            jk += 1;
            h_trailers_jk.add(h.trailer_count() as f64);
            h_ld_jk.add(ld);
            for &j in &h.jackknife_joints {
                h_joint.add(joint_position_of(h.truck_length, &h.trailer_lengths, j));
            }
        }
        pot += u64::from(h.potential_collision);
        act += u64::from(h.actual_collision);
        for (g, goal) in h.goals.iter().enumerate() {
            if goal.hit {
                goal_hits[g] += 1;
                if let Some(s) = goal.hit_step {
                    h_time[g].add(f64::from(s));
                }
                if let (Some(d), Some(e)) = (goal.hit_distance, goal.hit_heading_error) {
                    h_dist[g].add(d);
                    h_head[g].add(e);
                }
            }
            if goal.close_miss() {
                cm[g].havs_with_close_miss += 1;
                if !goal.hit {
                    cm[g].missed_with_close_miss += 1;
                }
            }
            cm[g].heading_steps += u64::from(goal.heading_close_miss_steps);
            cm[g].euclidean_steps += u64::from(goal.euclidean_close_miss_steps);
        }
    }
    for c in &mut cm {
        let total = c.heading_steps + c.euclidean_steps;
        c.heading_fraction = rate(c.heading_steps, total);
        c.euclidean_fraction = rate(c.euclidean_steps, total);
    }

    let [t1, t2] = h_time;
    let [d1, d2] = h_dist;
    let [e1, e2] = h_head;
    CohortSummary {
        hav_count,
        experiments: records.len() as u64,
        havs,
        jackknife_rate: rate(jk, havs),
        first_goal_rate: rate(goal_hits[0], havs),
        second_goal_rate: rate(goal_hits[1], havs),
        potential_collision_rate: rate(pot, havs),
        actual_collision_rate: rate(act, havs),
        close_miss: cm,
        histograms: alloc::vec![
            h_trailers, h_trailers_jk, h_ld, h_ld_jk, h_joint, t1, t2, d1, d2, e1, e2,
        ],
    }
}

/// Groups records by vehicle count and computes per-vehicle rates and
/// histograms for each group. Record order does not matter.
pub fn aggregate(records: &[ExperimentRecord]) -> SummaryReport {
    let mut counts: Vec<usize> = records.iter().map(|r| r.hav_count()).collect();
    counts.sort_unstable();
    counts.dedup();
    let cohorts = counts
        .into_iter()
        .map(|m| {
            let group: Vec<&ExperimentRecord> =
                records.iter().filter(|r| r.hav_count() == m).collect();
            summarize(m, &group)
        })
        .collect();
    SummaryReport { cohorts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn close_miss_examples() {
        assert_eq!(classify_close_miss(0.3, 0.15, 0.5, 0.1), CloseMiss::Heading);
        assert_eq!(classify_close_miss(0.7, 0.05, 0.5, 0.1), CloseMiss::Euclidean);
        assert_eq!(classify_close_miss(0.3, 0.05, 0.5, 0.1), CloseMiss::None);
        assert_eq!(classify_close_miss(0.7, 0.15, 0.5, 0.1), CloseMiss::None);
    }

    #[test]
    fn joint_position_examples() {
        let c = HavConfig::with_lengths(4.0, vec![3.0, 3.0]).unwrap();
        assert!((joint_position_metric(&c, 1) - 0.4).abs() < 1e-12);
        assert!((joint_position_metric(&c, 2) - 0.7).abs() < 1e-12);
        let eq = HavConfig::with_lengths(2.0, vec![2.0; 5]).unwrap();
        assert!((joint_position_metric(&eq, 5) - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn joint_position_out_of_range() {
        let c = HavConfig::with_lengths(4.0, vec![3.0]).unwrap();
        joint_position_metric(&c, 2);
    }

    #[test]
    fn length_difference_examples() {
        let eq = HavConfig::with_lengths(3.0, vec![3.0; 4]).unwrap();
        assert_eq!(length_difference_metric(&eq), 0.0);
        let c = HavConfig::with_lengths(2.0, vec![12.0]).unwrap();
        assert!((length_difference_metric(&c) - 10.0 / 14.0).abs() < 1e-12);
        let a = HavConfig::with_lengths(2.0, vec![2.0, 10.0]).unwrap();
        let b = HavConfig::with_lengths(2.0, vec![10.0, 2.0]).unwrap();
        assert_ne!(length_difference_metric(&a), length_difference_metric(&b));
    }

    #[test]
    fn histogram_binning() {
        let mut h = Histogram::uniform("x", 0.0, 1.0, 10);
        for v in [-0.5, 0.0, 0.05, 0.1, 0.95, 1.0, 1.7] {
            h.add(v);
        }
        assert_eq!(h.counts[0], 3);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[9], 3);
        assert_eq!(h.total(), 7);
        let mut n = Histogram::integer("n", 1, 10);
        n.add(1.0);
        n.add(10.0);
        assert_eq!(n.counts[0], 1);
        assert_eq!(n.counts[9], 1);
        assert_eq!(n.edges.len(), 11);
    }
}
