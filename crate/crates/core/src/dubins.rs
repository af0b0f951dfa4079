//! Shortest forward-only paths with bounded curvature between two poses.
//!
//! Every shortest path is one of six words built from left arcs (L), right
//! arcs (R) and straights (S). Each word has a closed-form solution in
//! coordinates normalized by the turn radius; the shortest feasible word wins.

use core::f64::consts::TAU;

use crate::angle::wrap;
use crate::geometry::Vec2;
use crate::kinematics::Pose;

/// Arc parameters this close to zero (or to a full turn) are treated as zero.
const ARC_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

impl DubinsWord {
    /// Tie-break order.
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::Lsl,
        DubinsWord::Rsr,
        DubinsWord::Lsr,
        DubinsWord::Rsl,
        DubinsWord::Rlr,
        DubinsWord::Lrl,
    ];

    pub fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            DubinsWord::Lsl => [Left, Straight, Left],
            DubinsWord::Rsr => [Right, Straight, Right],
            DubinsWord::Lsr => [Left, Straight, Right],
            DubinsWord::Rsl => [Right, Straight, Left],
            DubinsWord::Rlr => [Right, Left, Right],
            DubinsWord::Lrl => [Left, Right, Left],
        }
    }
}

/// Direction of the first non-degenerate segment of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Left,
    Right,
    Straight,
}

/// A Dubins path. `params` are in normalized units: arc angles in radians,
/// and the straight's length divided by `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DubinsPath {
    pub word: DubinsWord,
    pub params: [f64; 3],
    pub radius: f64,
}

impl DubinsPath {
    /// Length in meters.
    pub fn length(&self) -> f64 {
        (self.params[0] + self.params[1] + self.params[2]) * self.radius
    }

    /// Length of segment `i` in meters.
    pub fn segment_length(&self, i: usize) -> f64 {
        self.params[i] * self.radius
    }

    /// Pose reached after travelling `distance` meters along the path from
    /// `start`. Distances past the end are clamped.
    pub fn sample(&self, start: Pose, distance: f64) -> Pose {
        let mut remaining = distance.clamp(0.0, self.length());
        let mut pos = start.position();
        let mut heading = start.heading;
        for (i, seg) in self.word.segments().into_iter().enumerate() {
            let len = self.segment_length(i).min(remaining);
            advance(&mut pos, &mut heading, seg, len, self.radius);
            remaining -= len;
        }
        Pose::new(pos.x, pos.y, heading)
    }

    /// End pose of the full path.
    pub fn endpoint(&self, start: Pose) -> Pose {
        let mut pos = start.position();
        let mut heading = start.heading;
        for (i, seg) in self.word.segments().into_iter().enumerate() {
            advance(&mut pos, &mut heading, seg, self.segment_length(i), self.radius);
        }
        Pose::new(pos.x, pos.y, heading)
    }

    /// Direction the path starts with. A zero-angle first arc defers to the
    /// next segment, so a degenerate `LSL` with no initial arc is `Straight`.
    pub fn initial_turn(&self) -> Turn {
        for (i, seg) in self.word.segments().into_iter().enumerate() {
            if self.params[i] > ARC_EPS {
                return match seg {
                    Segment::Left => Turn::Left,
                    Segment::Right => Turn::Right,
                    Segment::Straight => Turn::Straight,
                };
            }
        }
        Turn::Straight
    }
}

/// Exact motion along one segment.
fn advance(pos: &mut Vec2, heading: &mut f64, seg: Segment, len: f64, radius: f64) {
    match seg {
        Segment::Straight => {
            *pos = *pos + Vec2::from_angle(*heading) * len;
        }
        Segment::Left | Segment::Right => {
            let sign = if seg == Segment::Left { 1.0 } else { -1.0 };
            let angle = len / radius;
            // centre of the turning circle lies on the side we turn towards
            let normal = Vec2::new(-libm::sin(*heading), libm::cos(*heading)) * (sign * radius);
            let centre = *pos + normal;
            let new_heading = *heading + sign * angle;
            let new_normal =
                Vec2::new(-libm::sin(new_heading), libm::cos(new_heading)) * (sign * radius);
            *pos = centre - new_normal;
            *heading = wrap(new_heading);
        }
    }
}

fn mod2pi(a: f64) -> f64 {
    let r = libm::fmod(a, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    // snap values numerically equal to a full turn
    if !(ARC_EPS..=TAU - ARC_EPS).contains(&r) {
        0.0
    } else {
        r
    }
}

/// Normalized pose pair: distance `d` in radii and headings `alpha`, `beta`
/// relative to the start-goal line.
#[derive(Debug, Clone, Copy)]
struct Normalized {
    d: f64,
    alpha: f64,
    beta: f64,
    sa: f64,
    ca: f64,
    sb: f64,
    cb: f64,
    c_ab: f64,
}

impl Normalized {
    fn new(start: Pose, goal: Pose, radius: f64) -> Self {
        let dx = goal.x - start.x;
        let dy = goal.y - start.y;
        let d = libm::hypot(dx, dy) / radius;
        let theta = if d > 0.0 { mod2pi(libm::atan2(dy, dx)) } else { 0.0 };
        let alpha = mod2pi(start.heading - theta);
        let beta = mod2pi(goal.heading - theta);
        Self {
            d,
            alpha,
            beta,
            sa: libm::sin(alpha),
            ca: libm::cos(alpha),
            sb: libm::sin(beta),
            cb: libm::cos(beta),
            c_ab: libm::cos(alpha - beta),
        }
    }
}

fn solve_word(word: DubinsWord, n: &Normalized) -> Option<[f64; 3]> {
    let Normalized {
        d,
        alpha,
        beta,
        sa,
        ca,
        sb,
        cb,
        c_ab,
    } = *n;
    match word {
        DubinsWord::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = libm::atan2(cb - ca, d + sa - sb);
            Some([mod2pi(tmp - alpha), libm::sqrt(p_sq), mod2pi(beta - tmp)])
        }
        DubinsWord::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = libm::atan2(ca - cb, d - sa + sb);
            Some([mod2pi(alpha - tmp), libm::sqrt(p_sq), mod2pi(tmp - beta)])
        }
        DubinsWord::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = libm::sqrt(p_sq);
            let tmp = libm::atan2(-ca - cb, d + sa + sb) - libm::atan2(-2.0, p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
        }
        DubinsWord::Rsl => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab - 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = libm::sqrt(p_sq);
            let tmp = libm::atan2(ca + cb, d - sa - sb) - libm::atan2(2.0, p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if libm::fabs(tmp) > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - libm::acos(tmp));
            let t = mod2pi(alpha - libm::atan2(ca - cb, d - sa + sb) + p / 2.0);
            Some([t, p, mod2pi(alpha - beta - t + p)])
        }
        DubinsWord::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if libm::fabs(tmp) > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - libm::acos(tmp));
            let t = mod2pi(-alpha + libm::atan2(cb - ca, d + sa - sb) + p / 2.0);
            Some([t, p, mod2pi(beta - alpha - t + p)])
        }
    }
}

/// Path of a single word, if that word can connect the poses.
pub fn word_path(start: Pose, goal: Pose, radius: f64, word: DubinsWord) -> Option<DubinsPath> {
    let n = Normalized::new(start, goal, radius);
    solve_word(word, &n).map(|params| DubinsPath {
        word,
        params,
        radius,
    })
}

/// Shortest path from `start` to `goal` with turn radius `radius`.
///
/// Coincident poses give the zero-length `LSL` path. Ties go to the word that
/// comes first in [`DubinsWord::ALL`].
pub fn shortest_path(start: Pose, goal: Pose, radius: f64) -> DubinsPath {
    debug_assert!(radius > 0.0);
    let zero = DubinsPath {
        word: DubinsWord::Lsl,
        params: [0.0; 3],
        radius,
    };
    if start.x == goal.x
        && start.y == goal.y
        && libm::fabs(wrap(start.heading - goal.heading)) < ARC_EPS
    {
        return zero;
    }

    let n = Normalized::new(start, goal, radius);
    let mut best: Option<DubinsPath> = None;
    for word in DubinsWord::ALL {
        if let Some(params) = solve_word(word, &n) {
            let cand = DubinsPath {
                word,
                params,
                radius,
            };
            if best.is_none_or(|b| cand.length() < b.length()) {
                best = Some(cand);
            }
        }
    }
    // LSL and RSR are feasible for every pose pair
    best.unwrap_or(zero)
}

/// Initial turn direction of the shortest path.
pub fn initial_turn(path: &DubinsPath) -> Turn {
    path.initial_turn()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn straight_ahead() {
        let p = shortest_path(Pose::new(0.0, 0.0, 0.0), Pose::new(10.0, 0.0, 0.0), 1.0);
        assert_eq!(p.word, DubinsWord::Lsl);
        assert_eq!(p.params[0], 0.0);
        assert!((p.length() - 10.0).abs() < 1e-12);
        assert_eq!(p.initial_turn(), Turn::Straight);
    }

    #[test]
    fn half_turn() {
        let r = 3.0;
        let p = shortest_path(Pose::new(0.0, 0.0, 0.0), Pose::new(0.0, 2.0 * r, PI), r);
        assert!((p.length() - PI * r).abs() < 1e-9, "{p:?}");
        assert_eq!(p.initial_turn(), Turn::Left);
    }

    #[test]
    fn coincident_poses() {
        let a = Pose::new(1.0, 2.0, 0.3);
        let p = shortest_path(a, a, 2.0);
        assert_eq!(p.word, DubinsWord::Lsl);
        assert_eq!(p.params, [0.0; 3]);
    }

    #[test]
    fn initial_turn_examples() {
        let mk = |word, params| DubinsPath {
            word,
            params,
            radius: 1.0,
        };
        assert_eq!(mk(DubinsWord::Lsl, [0.5, 1.0, 0.2]).initial_turn(), Turn::Left);
        assert_eq!(mk(DubinsWord::Rsr, [1.2, 1.0, 0.2]).initial_turn(), Turn::Right);
        assert_eq!(mk(DubinsWord::Lsl, [0.0, 1.0, 0.0]).initial_turn(), Turn::Straight);
    }

    #[test]
    fn endpoint_reaches_goal() {
        let start = Pose::new(1.0, -2.0, 0.4);
        let goal = Pose::new(-7.0, 5.0, -2.2);
        let p = shortest_path(start, goal, 2.5);
        let end = p.endpoint(start);
        assert!((end.x - goal.x).abs() < 1e-9);
        assert!((end.y - goal.y).abs() < 1e-9);
        assert!(crate::angle::heading_error(end.heading, goal.heading) < 1e-9);
    }
}
