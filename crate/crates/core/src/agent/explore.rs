use crate::error::{Error, Result};
use crate::rng::Xoshiro256;

/// Piecewise-linear exploration schedule over 1-based episode indices:
/// 1 up to `hold_until`, linear down to 0.2 at `fast_until`, linear down to 0
/// at `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub hold_until: f64,
    pub fast_until: f64,
    pub end: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self {
            hold_until: 90.0,
            fast_until: 210.0,
            end: 300.0,
        }
    }
}

impl EpsilonSchedule {
    /// Default breakpoints stretched to a run of `episodes` episodes. Whole
    /// breakpoints are used when they stay strictly ordered.
    pub fn scaled_to(episodes: usize) -> Self {
        let n = episodes as f64;
        let (hold, fast) = (libm::round(n * 0.3), libm::round(n * 0.7));
        if hold < fast && fast < n {
            Self {
                hold_until: hold,
                fast_until: fast,
                end: n,
            }
        } else {
            Self {
                hold_until: n * 0.3,
                fast_until: n * 0.7,
                end: n,
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.hold_until && self.hold_until < self.fast_until && self.fast_until < self.end) {
            return Err(Error::InvalidConfig(alloc::format!(
                "epsilon breakpoints must satisfy 0 <= {} < {} < {}",
                self.hold_until, self.fast_until, self.end
            )));
        }
        Ok(())
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        let e = episode as f64;
        let eps = if e <= self.hold_until {
            1.0
        } else if e <= self.fast_until {
            1.0 - (0.8 / (self.fast_until - self.hold_until)) * (e - self.hold_until)
        } else {
            0.2 - (0.2 / (self.end - self.fast_until)) * (e - self.fast_until)
        };
        eps.clamp(0.0, 1.0)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy choice over `q_values`.
pub fn select_action(q_values: &[f64], epsilon: f64, rng: &mut Xoshiro256) -> usize {
    assert!(!q_values.is_empty(), "no actions to choose from");
    if rng.next_f64() < epsilon {
        rng.index(q_values.len())
    } else {
        argmax(q_values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_breakpoints() {
        let s = EpsilonSchedule::default();
        assert_eq!(s.epsilon(1), 1.0);
        assert_eq!(s.epsilon(90), 1.0);
        assert!((s.epsilon(210) - 0.2).abs() < 1e-12);
        assert!(s.epsilon(300).abs() < 1e-12);
        // Branches meet at the breakpoints.
        assert!((s.epsilon(91) - (1.0 - 0.8 / 120.0)).abs() < 1e-12);
        assert!((s.epsilon(211) - (0.2 - 0.2 / 90.0)).abs() < 1e-12);
    }

    #[test]
    fn scaled_schedule_for_short_runs() {
        let s = EpsilonSchedule::scaled_to(80);
        assert_eq!((s.hold_until, s.fast_until, s.end), (24.0, 56.0, 80.0));
        assert_eq!(EpsilonSchedule::scaled_to(300), EpsilonSchedule::default());
        for n in 1..40 {
            EpsilonSchedule::scaled_to(n).validate().unwrap();
        }
        assert!(EpsilonSchedule { hold_until: 5.0, fast_until: 5.0, end: 9.0 }.validate().is_err());
    }

    #[test]
    fn greedy_choice_and_ties() {
        let mut rng = Xoshiro256::seed_from_u64(0);
        assert_eq!(select_action(&[1.0, 3.0, 2.0, 0.0], 0.0, &mut rng), 1);
        assert_eq!(select_action(&[5.0, 5.0, 0.0, 0.0], 0.0, &mut rng), 0);
    }
}
