//! Per-bit mutation-rate schedules.
//!
//! * `Constant(p0)`: `p0` at every generation.
//! * `LinearDecay(p0, cut)`: `p0` at g = 0, `p0 / g` up to `cut`, then `p0 / cut`.
//! * `QuadraticDecay(p0, cut)`: as above with `g²` and `cut²`.
//! * `BackHyperbolic(p0, n, T)`: `1 / (1/p0 + g (n - 1/p0) / (T - 1))`, which
//!   runs from `p0` at g = 0 down to `1/n` at g = T - 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_P0: f64 = 0.15;
pub const DEFAULT_CUT: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MutationSchedule {
    Constant { p0: f64 },
    LinearDecay { p0: f64, cut: u32 },
    QuadraticDecay { p0: f64, cut: u32 },
    BackHyperbolic { p0: f64, n_bits: usize, horizon: usize },
}

impl MutationSchedule {
    pub fn constant(p0: f64) -> Result<Self> {
        check_p0(p0)?;
        Ok(Self::Constant { p0 })
    }

    pub fn linear(p0: f64, cut: u32) -> Result<Self> {
        check_p0(p0)?;
        check_cut(cut)?;
        Ok(Self::LinearDecay { p0, cut })
    }

    pub fn quadratic(p0: f64, cut: u32) -> Result<Self> {
        check_p0(p0)?;
        check_cut(cut)?;
        Ok(Self::QuadraticDecay { p0, cut })
    }

    /// `horizon` is T, the number of generations the rate must span.
    pub fn back(p0: f64, n_bits: usize, horizon: usize) -> Result<Self> {
        check_p0(p0)?;
        if n_bits < 2 {
            return Err(Error::arg(format!("hyperbolic schedule needs n_bits >= 2, got {n_bits}")));
        }
        if horizon < 2 {
            return Err(Error::arg(format!("hyperbolic schedule needs T >= 2, got {horizon}")));
        }
        if p0 < 1.0 / n_bits as f64 {
            return Err(Error::arg(format!(
                "hyperbolic schedule start {p0} is below its end rate 1/{n_bits}"
            )));
        }
        Ok(Self::BackHyperbolic {
            p0,
            n_bits,
            horizon,
        })
    }

    /// Last generation the schedule is defined for, if it is bounded.
    pub fn last_generation(&self) -> Option<usize> {
        match *self {
            Self::BackHyperbolic { horizon, .. } => Some(horizon - 1),
            _ => None,
        }
    }

    pub fn rate(&self, g: usize) -> Result<f64> {
        Ok(match *self {
            Self::Constant { p0 } => p0,
            Self::LinearDecay { p0, cut } => match g {
                0 => p0,
                _ => p0 / g.min(cut as usize) as f64,
            },
            Self::QuadraticDecay { p0, cut } => match g {
                0 => p0,
                _ => {
                    let g = g.min(cut as usize) as f64;
                    p0 / (g * g)
                }
            },
            Self::BackHyperbolic {
                p0,
                n_bits,
                horizon,
            } => {
                if g > horizon - 1 {
                    return Err(Error::arg(format!(
                        "generation {g} beyond hyperbolic schedule horizon T-1 = {}",
                        horizon - 1
                    )));
                }
                let inv0 = 1.0 / p0;
                let slope = (n_bits as f64 - inv0) / (horizon - 1) as f64;
                1.0 / (inv0 + g as f64 * slope)
            }
        })
    }

    /// Like [`rate`](Self::rate) but holds the final value past a bounded horizon.
    pub fn rate_saturating(&self, g: usize) -> f64 {
        let g = self.last_generation().map_or(g, |last| g.min(last));
        self.rate(g).expect("generation clamped into range")
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::arg(format!("initial mutation rate {p0} outside (0, 1]")));
    }
    Ok(())
}

fn check_cut(cut: u32) -> Result<()> {
    if cut == 0 {
        return Err(Error::arg("decay cut-off generation must be >= 1"));
    }
    Ok(())
}

/// Textual schedule description, bound to a chromosome length and horizon
/// only when a run is configured.
///
/// Grammar: `c[:p0]`, `ld[:p0[:cut]]`, `qd[:p0[:cut]]`, `back[:p0]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleSpec {
    Constant { p0: f64 },
    Linear { p0: f64, cut: u32 },
    Quadratic { p0: f64, cut: u32 },
    Back { p0: f64 },
}

impl ScheduleSpec {
    pub fn bind(&self, n_bits: usize, horizon: usize) -> Result<MutationSchedule> {
        match *self {
            Self::Constant { p0 } => MutationSchedule::constant(p0),
            Self::Linear { p0, cut } => MutationSchedule::linear(p0, cut),
            Self::Quadratic { p0, cut } => MutationSchedule::quadratic(p0, cut),
            Self::Back { p0 } => MutationSchedule::back(p0, n_bits, horizon),
        }
    }
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::arg(format!("unrecognised mutation schedule {s:?}"));
        let mut parts = s.trim().split(':');
        let kind = parts.next().ok_or_else(bad)?.to_ascii_lowercase();
        let args: Vec<&str> = parts.collect();
        let p0 = match args.first() {
            Some(v) => v.parse::<f64>().map_err(|_| bad())?,
            None => DEFAULT_P0,
        };
        let cut = match args.get(1) {
            Some(v) => v.parse::<u32>().map_err(|_| bad())?,
            None => DEFAULT_CUT,
        };
        let max_args = match kind.as_str() {
            "ld" | "qd" => 2,
            _ => 1,
        };
        if args.len() > max_args {
            return Err(bad());
        }
        let spec = match kind.as_str() {
            "c" => Self::Constant { p0 },
            "ld" => Self::Linear { p0, cut },
            "qd" => Self::Quadratic { p0, cut },
            "back" => Self::Back {
                p0: if args.is_empty() { 0.5 } else { p0 },
            },
            _ => return Err(bad()),
        };
        match spec {
            Self::Linear { p0, cut } | Self::Quadratic { p0, cut } => {
                check_p0(p0)?;
                check_cut(cut)?;
            }
            Self::Constant { p0 } | Self::Back { p0 } => check_p0(p0)?,
        }
        Ok(spec)
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Constant { p0 } => write!(f, "c:{p0}"),
            Self::Linear { p0, cut } => write!(f, "ld:{p0}:{cut}"),
            Self::Quadratic { p0, cut } => write!(f, "qd:{p0}:{cut}"),
            Self::Back { p0 } => write!(f, "back:{p0}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12
    }

    #[test]
    fn linear_decay_values() {
        let ld = MutationSchedule::linear(0.15, 100).unwrap();
        assert!(close(ld.rate(0).unwrap(), 0.15));
        assert!(close(ld.rate(1).unwrap(), 0.15));
        assert!(close(ld.rate(10).unwrap(), 0.015));
        assert!(close(ld.rate(2000).unwrap(), 0.0015));
    }

    #[test]
    fn quadratic_decay_values() {
        let qd = MutationSchedule::quadratic(0.15, 100).unwrap();
        assert!(close(qd.rate(0).unwrap(), 0.15));
        assert!(close(qd.rate(10).unwrap(), 0.0015));
        assert!(close(qd.rate(200).unwrap(), 0.000015));
    }

    #[test]
    fn hyperbolic_endpoints() {
        let b = MutationSchedule::back(0.5, 531, 3000).unwrap();
        assert!(close(b.rate(0).unwrap(), 0.5));
        assert!(close(b.rate(2999).unwrap(), 1.0 / 531.0));
        assert!(b.rate(3000).is_err());
        assert!(close(b.rate_saturating(5000), 1.0 / 531.0));
        let b = MutationSchedule::back(0.15, 531, 3000).unwrap();
        assert!(close(b.rate(0).unwrap(), 0.15));
    }

    #[test]
    fn constant_is_flat() {
        let c = MutationSchedule::constant(0.15).unwrap();
        assert!((0..5000).all(|g| c.rate(g).unwrap() == 0.15));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MutationSchedule::constant(0.0).is_err());
        assert!(MutationSchedule::constant(1.5).is_err());
        assert!(MutationSchedule::linear(0.1, 0).is_err());
        assert!(MutationSchedule::back(0.5, 1, 10).is_err());
        assert!(MutationSchedule::back(0.5, 10, 1).is_err());
        assert!(MutationSchedule::back(0.01, 10, 100).is_err());
    }

    #[test]
    fn parses_grammar() {
        let p = |s: &str| s.parse::<ScheduleSpec>().unwrap();
        assert_eq!(p("c:0.15"), ScheduleSpec::Constant { p0: 0.15 });
        assert_eq!(p("c"), ScheduleSpec::Constant { p0: 0.15 });
        assert_eq!(p("ld"), ScheduleSpec::Linear { p0: 0.15, cut: 100 });
        assert_eq!(p("ld:0.2:50"), ScheduleSpec::Linear { p0: 0.2, cut: 50 });
        assert_eq!(p("qd"), ScheduleSpec::Quadratic { p0: 0.15, cut: 100 });
        assert_eq!(p("QD:0.15:100"), ScheduleSpec::Quadratic { p0: 0.15, cut: 100 });
        assert_eq!(p("back"), ScheduleSpec::Back { p0: 0.5 });
        assert_eq!(p("back:0.15"), ScheduleSpec::Back { p0: 0.15 });
        for bad in ["", "x", "c:abc", "c:0", "ld:0.1:0", "back:0.5:3", "c:0.1:2", "ld:0.1:2:3"] {
            assert!(bad.parse::<ScheduleSpec>().is_err(), "{bad}");
        }
        for s in ["c:0.15", "ld:0.15:100", "qd:0.3:20", "back:0.5"] {
            assert_eq!(p(s).to_string(), s);
        }
        let bound = p("back:0.5").bind(531, 3000).unwrap();
        assert_eq!(bound, MutationSchedule::back(0.5, 531, 3000).unwrap());
    }

    fn schedule() -> impl Strategy<Value = MutationSchedule> {
        (0.001f64..=1.0, 1u32..300, 1000usize..3000, 2usize..4000).prop_flat_map(|(p0, cut, n, t)| {
            prop_oneof![
                Just(MutationSchedule::constant(p0).unwrap()),
                Just(MutationSchedule::linear(p0, cut).unwrap()),
                Just(MutationSchedule::quadratic(p0, cut).unwrap()),
                Just(MutationSchedule::back(p0, n, t).unwrap()),
            ]
        })
    }

    proptest! {
        #[test]
        fn rates_in_unit_interval_and_non_increasing(s in schedule()) {
            let last = s.last_generation().unwrap_or(3000);
            let mut prev = f64::INFINITY;
            for g in 0..=last {
                let r = s.rate(g).unwrap();
                prop_assert!(r > 0.0 && r <= 1.0, "rate {} at {}", r, g);
                prop_assert!(r <= prev);
                prev = r;
            }
        }

        #[test]
        fn decays_continuous_at_cut(p0 in 0.001f64..=1.0, cut in 1u32..1000) {
            let ld = MutationSchedule::linear(p0, cut).unwrap();
            let qd = MutationSchedule::quadratic(p0, cut).unwrap();
            let c = cut as usize;
            prop_assert!((ld.rate(c).unwrap() - p0 / f64::from(cut)).abs() <= 1e-15);
            prop_assert!((ld.rate(c + 1).unwrap() - ld.rate(c).unwrap()).abs() <= 1e-15);
            prop_assert!((qd.rate(c).unwrap() - p0 / f64::from(cut).powi(2)).abs() <= 1e-15);
            prop_assert!((qd.rate(c + 1).unwrap() - qd.rate(c).unwrap()).abs() <= 1e-15);
            for g in 1..(c + 50) {
                prop_assert!(qd.rate(g).unwrap() <= ld.rate(g).unwrap());
            }
        }

        #[test]
        fn hyperbolic_hits_both_ends(p0 in 0.001f64..=1.0, n in 1000usize..5000, t in 2usize..5000) {
            let b = MutationSchedule::back(p0, n, t).unwrap();
            prop_assert!((b.rate(0).unwrap() - p0).abs() <= 1e-12);
            prop_assert!((b.rate(t - 1).unwrap() - 1.0 / n as f64).abs() <= 1e-12);
        }
    }
}
