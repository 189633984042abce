use super::Direction;
use crate::error::{Error, Result};

pub const PHASE_COUNT: u8 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Light {
    Green,
    Yellow,
    Red,
}

/// Eight-phase program: odd phases give one approach green, the following
/// even phase shows yellow on that same approach. Approaches are served in
/// N, W, E, S order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseProgram {
    pub green: f64,
    pub yellow: f64,
}

impl Default for PhaseProgram {
    fn default() -> Self {
        Self {
            green: 15.0,
            yellow: 4.0,
        }
    }
}

impl PhaseProgram {
    pub fn check(phase: u8) -> Result<u8> {
        if (1..=PHASE_COUNT).contains(&phase) {
            Ok(phase)
        } else {
            Err(Error::InvalidPhase(phase))
        }
    }

    /// Approach that is not red during `phase`.
    pub fn served(phase: u8) -> Result<Direction> {
        let phase = Self::check(phase)?;
        Ok(Direction::ALL[usize::from((phase - 1) / 2)])
    }

    pub fn is_yellow(phase: u8) -> bool {
        phase % 2 == 0
    }

    pub fn green_phase(approach: Direction) -> u8 {
        approach.index() as u8 * 2 + 1
    }

    pub fn yellow_phase(approach: Direction) -> u8 {
        approach.index() as u8 * 2 + 2
    }

    pub fn light(phase: u8, approach: Direction) -> Result<Light> {
        let served = Self::served(phase)?;
        Ok(if served != approach {
            Light::Red
        } else if Self::is_yellow(phase) {
            Light::Yellow
        } else {
            Light::Green
        })
    }

    pub fn duration(&self, phase: u8) -> Result<f64> {
        let phase = Self::check(phase)?;
        Ok(if Self::is_yellow(phase) {
            self.yellow
        } else {
            self.green
        })
    }

    /// Sum of all eight phase durations.
    pub fn cycle_length(&self) -> f64 {
        4.0 * (self.green + self.yellow)
    }

    pub fn next(phase: u8) -> u8 {
        phase % PHASE_COUNT + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let p = PhaseProgram::default();
        assert_eq!(PhaseProgram::light(1, Direction::North).unwrap(), Light::Green);
        for d in [Direction::West, Direction::East, Direction::South] {
            assert_eq!(PhaseProgram::light(1, d).unwrap(), Light::Red);
        }
        assert_eq!(PhaseProgram::light(2, Direction::North).unwrap(), Light::Yellow);
        assert_eq!(p.duration(2).unwrap(), 4.0);
        assert_eq!(p.duration(7).unwrap(), 15.0);
        assert_eq!(PhaseProgram::served(7).unwrap(), Direction::South);
        assert_eq!(p.cycle_length(), 76.0);
        assert!(PhaseProgram::light(9, Direction::North).is_err());
        assert!(PhaseProgram::light(0, Direction::North).is_err());
    }

    #[test]
    fn exactly_one_approach_is_not_red_and_yellow_follows_green() {
        for phase in 1..=PHASE_COUNT {
            let lit = Direction::ALL
                .iter()
                .filter(|&&d| PhaseProgram::light(phase, d).unwrap() != Light::Red)
                .count();
            assert_eq!(lit, 1);
            if PhaseProgram::is_yellow(phase) {
                assert_eq!(
                    PhaseProgram::served(phase).unwrap(),
                    PhaseProgram::served(phase - 1).unwrap()
                );
            }
        }
        assert_eq!(PhaseProgram::next(8), 1);
        assert_eq!(PhaseProgram::green_phase(Direction::East), 5);
        assert_eq!(PhaseProgram::yellow_phase(Direction::East), 6);
    }
}
