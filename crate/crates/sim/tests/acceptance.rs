//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::process::Command;

use hav_core::analysis::CohortSummary;
use hav_core::behavior::jackknife_weight;
use hav_core::dubins::{shortest_path, word_path, DubinsWord};
use hav_core::kinematics::{articulation_angles, axle_positions, is_jackknifed, step};
use hav_core::scenario::{sample_hav_config, substream, Stream};
use hav_core::{
    aggregate, classify_close_miss, CloseMiss, Control, HavConfig, HavState, Pose, ScenarioParams,
    Vec2, WeightParams,
};
use hav_sim::run_batch_parallel;
use rand::Rng;

const SEED: u64 = 42;
const RUNS: u64 = 500;

// Criterion thresholds.
const SINGLE_JACKKNIFE_MAX: f64 = 0.01;
const SINGLE_FIRST_GOAL: (f64, f64) = (0.75, 0.95);
const SINGLE_SECOND_GOAL: (f64, f64) = (0.70, 0.93);
const PAIR_JACKKNIFE_MAX: f64 = 0.03;
const PAIR_FIRST_GOAL_MIN: f64 = 0.65;
const PAIR_SECOND_GOAL_MIN: f64 = 0.50;
const PAIR_ACTUAL_MAX: f64 = 0.015;
const PAIR_POTENTIAL_MIN: f64 = 0.85;
const WEIGHT_AT_LIMIT: f64 = 1.4621;
const WEIGHT_AT_LIMIT_TOL: f64 = 1e-4;
const WEIGHT_UNIT_TOL: f64 = 1e-9;
const WEIGHT_GRID: f64 = 1e-3;
const DUBINS_PAIRS: usize = 1000;
const DUBINS_TOL: f64 = 1e-9;
const CIRCLE_CASES: usize = 50;
const CIRCLE_STEPS: usize = 50_000;
const CIRCLE_DT: f64 = 0.01;
const CIRCLE_RATIO_MAX: f64 = 0.9;
const CIRCLE_TOL: f64 = 1e-3;
const RMIN_CASES: usize = 20;
const RMIN_STEPS: usize = 100_000;
const RMIN_REL_TOL: f64 = 0.01;
const CLI_EXPERIMENTS: &str = "50";

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {:>2} {:<34} {}", if ok { "PASS" } else { "FAIL" }, id, name, detail);
    }
}

fn cohort(max_trailers: usize, havs: usize) -> CohortSummary {
    let params = ScenarioParams {
        seed: SEED,
        max_trailers,
        ..ScenarioParams::default()
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let records = run_batch_parallel(&params, RUNS, havs, workers).expect("batch");
    aggregate(&records).cohorts.remove(0)
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn weights() -> (bool, String) {
    let p = WeightParams { b: 0.5, c: 2.0 };
    let at_limit = jackknife_weight(FRAC_PI_2, p);
    let unit = jackknife_weight(0.25f64.acos(), p);
    let n = (PI / WEIGHT_GRID) as i64;
    let mut even = true;
    let mut monotone = true;
    let mut prev = jackknife_weight(0.0, p);
    for k in 1..=n {
        let d = k as f64 * WEIGHT_GRID;
        let w = jackknife_weight(d, p);
        even &= w == jackknife_weight(-d, p);
        monotone &= w > prev;
        prev = w;
    }
    let ok = (at_limit - WEIGHT_AT_LIMIT).abs() <= WEIGHT_AT_LIMIT_TOL
        && (unit - 1.0).abs() <= WEIGHT_UNIT_TOL
        && even
        && monotone;
    (
        ok,
        format!("w(pi/2)={at_limit:.6} w(acos .25)-1={:.1e} even={even} monotone={monotone}", unit - 1.0),
    )
}

fn dubins() -> (bool, String) {
    let mut rng = substream(SEED, 0, 0, Stream::Starts);
    let mut worst_len = 0.0f64;
    let mut worst_end = 0.0f64;
    for _ in 0..DUBINS_PAIRS {
        let mut pose = || Pose::new(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0), rng.gen_range(-PI..PI));
        let (a, b) = (pose(), pose());
        let r = rng.gen_range(1.0..=20.0);
        let best = shortest_path(a, b, r);
        let min = DubinsWord::ALL
            .iter()
            .filter_map(|&w| word_path(a, b, r, w))
            .map(|p| p.length())
            .fold(f64::INFINITY, f64::min);
        worst_len = worst_len.max((best.length() - min).abs());
        let end = best.endpoint(a);
        let dh = (end.heading - b.heading).rem_euclid(2.0 * PI);
        worst_end = worst_end
            .max(end.position().distance(b.position()))
            .max(dh.min(2.0 * PI - dh));
    }
    (
        worst_len <= DUBINS_TOL && worst_end <= DUBINS_TOL,
        format!("max |len - min_word|={worst_len:.1e} max endpoint error={worst_end:.1e}"),
    )
}

fn sampled_config(i: u64) -> HavConfig {
    let mut rng = substream(SEED, i, 0, Stream::Vehicle(0));
    sample_hav_config(&mut rng, &ScenarioParams::default()).unwrap()
}

fn circle_fixed_point() -> (bool, String) {
    let mut rng = substream(SEED, 1, 0, Stream::FirstGoals);
    let mut worst = 0.0f64;
    for i in 0..CIRCLE_CASES {
        let c = sampled_config(1000 + i as u64);
        let ratio = c.trailer_lengths()[0] / c.truck_length();
        let phi = loop {
            let phi = rng.gen_range(-c.steering_limit()..=c.steering_limit());
            if (ratio * phi.tan()).abs() <= CIRCLE_RATIO_MAX {
                break phi;
            }
        };
        let expect = (-ratio * phi.tan()).asin();
        let mut s = HavState::straight(Pose::new(0.0, 0.0, 0.0), c.trailer_count());
        let u = Control { speed: 1.0, steering: phi };
        for _ in 0..CIRCLE_STEPS {
            s = step(&c, &s, u, CIRCLE_DT);
        }
        worst = worst.max((articulation_angles(&s)[0] - expect).abs());
    }
    (worst < CIRCLE_TOL, format!("max |delta1 - delta*|={worst:.2e} over {CIRCLE_CASES} cases"))
}

/// Algebraic least-squares circle fit; returns the radius.
fn fit_radius(points: &[Vec2]) -> f64 {
    let (mut sxx, mut sxy, mut syy, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    let n = points.len() as f64;
    for p in points {
        let z = p.x * p.x + p.y * p.y;
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
        sx += p.x;
        sy += p.y;
        sxz += p.x * z;
        syz += p.y * z;
        sz += z;
    }
    // [sxx sxy sx; sxy syy sy; sx sy n] [D E F]^T = -[sxz syz sz]^T
    let m = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n]];
    let rhs = [-sxz, -syz, -sz];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(m);
    let solve = |col: usize| {
        let mut mm = m;
        for r in 0..3 {
            mm[r][col] = rhs[r];
        }
        det(mm) / d
    };
    let (a, b, f) = (solve(0), solve(1), solve(2));
    (a * a / 4.0 + b * b / 4.0 - f).sqrt()
}

fn minimal_circle() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut jackknifed = 0;
    for i in 0..RMIN_CASES {
        let c = sampled_config(2000 + i as u64);
        let tail: f64 = c.trailer_lengths().iter().map(|l| l * l).sum();
        let phi = (c.truck_length() / tail.sqrt()).atan();
        let u = Control { speed: 1.0, steering: phi };
        let mut s = HavState::straight(Pose::new(0.0, 0.0, 0.0), c.trailer_count());
        let mut front = Vec::new();
        for k in 0..RMIN_STEPS {
            s = step(&c, &s, u, CIRCLE_DT);
            if is_jackknifed(&s, c.articulation_limit()) {
                jackknifed += 1;
                break;
            }
            if k >= RMIN_STEPS - 20_000 && k % 10 == 0 {
                front.push(axle_positions(&c, &s)[0]);
            }
        }
        let sum_sq = tail + c.truck_length().powi(2);
        if front.is_empty() {
            continue;
        }
        let r = fit_radius(&front);
        worst = worst.max((r * r - sum_sq).abs() / sum_sq);
    }
    (
        jackknifed == 0 && worst <= RMIN_REL_TOL,
        format!("jackknifed={jackknifed} max |R^2 - sum l^2|/sum l^2={worst:.2e}"),
    )
}

fn cli_determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_hav-sim"))
            .args(["batch", "--seed", "42", "--experiments", CLI_EXPERIMENTS, "--havs", "2"])
            .args(["--workers", workers, "--out"])
            .arg(&out)
            .status()
            .expect("spawn hav-sim");
        assert!(status.success(), "hav-sim batch failed");
        fs::read(out).expect("read output")
    };
    let a = run("a.jsonl", "4");
    let b = run("b.jsonl", "4");
    let one = run("one.jsonl", "1");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    (
        a == b && a == one && lines == 50,
        format!("repeat identical={} 1 vs 4 workers identical={} lines={lines}", a == b, a == one),
    )
}

fn close_miss_boundaries() -> (bool, String) {
    let (d_e, d_h) = (0.5, 0.1);
    let cases = [
        (0.3, d_h, CloseMiss::Heading),
        (0.3, 2.0 * d_h, CloseMiss::None),
        (d_e, 0.05, CloseMiss::Euclidean),
        (2.0 * d_e, 0.05, CloseMiss::None),
        (0.3, 0.05, CloseMiss::None),
        (0.3, 0.15, CloseMiss::Heading),
        (0.7, 0.05, CloseMiss::Euclidean),
    ];
    let bad: Vec<_> = cases
        .iter()
        .filter(|&&(d, h, want)| classify_close_miss(d, h, d_e, d_h) != want)
        .collect();
    (bad.is_empty(), format!("{} of {} cases match", cases.len() - bad.len(), cases.len()))
}

fn main() {
    let mut r = Report { failed: 0 };

    let single = cohort(10, 1);
    r.line(
        1,
        "single-HAV jackknife rate",
        single.jackknife_rate <= SINGLE_JACKKNIFE_MAX,
        format!("{:.4} <= {SINGLE_JACKKNIFE_MAX} ({} HAVs)", single.jackknife_rate, single.havs),
    );
    r.line(
        2,
        "single-HAV goal rates",
        within(single.first_goal_rate, SINGLE_FIRST_GOAL) && within(single.second_goal_rate, SINGLE_SECOND_GOAL),
        format!(
            "first {:.3} in {SINGLE_FIRST_GOAL:?}, second {:.3} in {SINGLE_SECOND_GOAL:?}",
            single.first_goal_rate, single.second_goal_rate
        ),
    );

    let pair = cohort(10, 2);
    let pair_ok = pair.jackknife_rate <= PAIR_JACKKNIFE_MAX
        && pair.first_goal_rate >= PAIR_FIRST_GOAL_MIN
        && pair.second_goal_rate >= PAIR_SECOND_GOAL_MIN
        && pair.actual_collision_rate <= PAIR_ACTUAL_MAX
        && pair.potential_collision_rate >= PAIR_POTENTIAL_MIN;
    r.line(
        3,
        "two-HAV rates",
        pair_ok,
        format!(
            "jackknife {:.4} <= {PAIR_JACKKNIFE_MAX}, first {:.3} >= {PAIR_FIRST_GOAL_MIN}, second {:.3} >= {PAIR_SECOND_GOAL_MIN}, actual {:.4} <= {PAIR_ACTUAL_MAX}, potential {:.3} >= {PAIR_POTENTIAL_MIN}",
            pair.jackknife_rate, pair.first_goal_rate, pair.second_goal_rate, pair.actual_collision_rate, pair.potential_collision_rate
        ),
    );

    let few = cohort(3, 1);
    let events = few.histograms.iter().find(|h| h.name == "trailer_count_jackknifed").map_or(u64::MAX, |h| h.total());
    r.line(
        4,
        "no jackknifing with <= 3 trailers",
        events == 0 && few.jackknife_rate == 0.0,
        format!("{events} jackknifed HAVs of {}", few.havs),
    );

    let (ok, detail) = weights();
    r.line(5, "jackknife weight values", ok, detail);
    let (ok, detail) = dubins();
    r.line(6, "Dubins shortest path", ok, detail);
    let (ok, detail) = circle_fixed_point();
    r.line(7, "constant-steering fixed point", ok, detail);
    let (ok, detail) = minimal_circle();
    r.line(8, "minimal stable circle", ok, detail);
    let (ok, detail) = cli_determinism();
    r.line(9, "batch determinism", ok, detail);
    let (ok, detail) = close_miss_boundaries();
    r.line(10, "close-miss interval boundaries", ok, detail);

    println!("{} of 10 criteria passed", 10 - r.failed);
    if r.failed > 0 {
        std::process::exit(1);
    }
}
