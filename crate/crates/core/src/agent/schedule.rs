use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Exponentially decaying infidelity threshold `T_F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub initial: f64,
    /// Floor; the accuracy actually wanted.
    pub target: f64,
    pub decay: f64,
    /// Success rate over the window that triggers a decay.
    pub success_rate: f64,
    /// Episodes in the rolling window.
    pub window: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            initial: 0.5,
            target: 0.01,
            decay: 0.8,
            success_rate: 0.9,
            window: 100,
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target > 0.0 && self.target <= self.initial && self.initial <= 1.0) {
            return invalid("threshold needs 0 < target <= initial <= 1");
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return invalid("threshold decay must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.success_rate) {
            return invalid("success_rate must lie in [0, 1]");
        }
        if self.window == 0 {
            return invalid("threshold window must be positive");
        }
        Ok(())
    }
}

/// `max(T_F · decay, target)` when the success rate meets the criterion.
pub fn schedule_threshold(t_f: f64, success_rate: f64, cfg: &ThresholdConfig) -> f64 {
    if success_rate >= cfg.success_rate {
        (t_f * cfg.decay).max(cfg.target).min(t_f)
    } else {
        t_f
    }
}

/// History-weight reduction, applied once the threshold sits at its floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CinConfig {
    pub initial: f64,
    /// Multiplier per step, in `[0, 1)`.
    pub factor: f64,
    /// Episodes at the floor between steps; 0 disables the schedule.
    pub every: usize,
}

impl Default for CinConfig {
    fn default() -> Self {
        Self {
            initial: 1.0,
            factor: 0.5,
            every: 500,
        }
    }
}

impl CinConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial >= 0.0 && self.initial.is_finite()) {
            return invalid("c_in must be a non-negative number");
        }
        if !(0.0..1.0).contains(&self.factor) {
            return invalid("c_in factor must lie in [0, 1)");
        }
        Ok(())
    }
}

/// `episodes_at_target` counts episodes finished since `T_F` first reached
/// its floor (`None` before that).
pub fn schedule_cin(c_in: f64, episodes_at_target: Option<usize>, cfg: &CinConfig) -> f64 {
    match episodes_at_target {
        Some(e) if cfg.every > 0 && e > 0 && e % cfg.every == 0 => (c_in * cfg.factor).max(0.0),
        _ => c_in,
    }
}

/// Rolling success window, threshold and history weight during training.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    pub t_f: f64,
    pub c_in: f64,
    window: VecDeque<bool>,
    episodes_at_target: Option<usize>,
}

impl ScheduleState {
    pub fn new(threshold: &ThresholdConfig, cin: &CinConfig) -> Self {
        Self {
            t_f: threshold.initial,
            c_in: cin.initial,
            window: VecDeque::with_capacity(threshold.window),
            episodes_at_target: None,
        }
    }

    /// Fraction of successes in the window, or `None` until it is full.
    pub fn success_rate(&self, window: usize) -> Option<f64> {
        (self.window.len() >= window)
            .then(|| self.window.iter().filter(|&&s| s).count() as f64 / self.window.len() as f64)
    }

    /// Record one finished episode and advance both schedules. The window
    /// restarts after every decay so each threshold is judged on its own
    /// episodes.
    pub fn record(&mut self, success: bool, threshold: &ThresholdConfig, cin: &CinConfig) {
        if self.window.len() == threshold.window {
            self.window.pop_front();
        }
        self.window.push_back(success);
        if let Some(rate) = self.success_rate(threshold.window) {
            let next = schedule_threshold(self.t_f, rate, threshold);
            if next < self.t_f {
                self.t_f = next;
                self.window.clear();
            }
        }
        if let Some(e) = self.episodes_at_target.as_mut() {
            *e += 1;
        } else if self.t_f <= threshold.target {
            self.episodes_at_target = Some(0);
        }
        self.c_in = schedule_cin(self.c_in, self.episodes_at_target, cin);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th() -> ThresholdConfig {
        ThresholdConfig {
            initial: 0.5,
            target: 0.1,
            decay: 0.8,
            success_rate: 0.9,
            window: 10,
        }
    }

    #[test]
    fn threshold_rule() {
        let cfg = th();
        assert!((schedule_threshold(0.5, 0.95, &cfg) - 0.4).abs() < 1e-15);
        assert_eq!(schedule_threshold(0.5, 0.5, &cfg), 0.5);
        assert_eq!(schedule_threshold(0.1, 1.0, &cfg), 0.1);
        assert_eq!(schedule_threshold(0.11, 1.0, &cfg), 0.1);
    }

    #[test]
    fn cin_rule() {
        let cfg = CinConfig {
            initial: 1.0,
            factor: 0.5,
            every: 3,
        };
        assert_eq!(schedule_cin(1.0, None, &cfg), 1.0);
        assert_eq!(schedule_cin(1.0, Some(2), &cfg), 1.0);
        assert_eq!(schedule_cin(1.0, Some(3), &cfg), 0.5);
        let mut c = 1.0;
        for e in 1..=300 {
            c = schedule_cin(c, Some(e), &cfg);
        }
        assert!(c < 1e-20 && c >= 0.0);
    }

    #[test]
    fn state_is_monotone_and_resets_window() {
        let (t, c) = (th(), CinConfig { every: 5, ..Default::default() });
        let mut s = ScheduleState::new(&t, &c);
        let mut trace = vec![];
        for i in 0..200 {
            s.record(i % 20 != 0, &t, &c);
            trace.push((s.t_f, s.c_in));
        }
        assert!(trace.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1));
        assert_eq!(s.t_f, 0.1);
        assert!(s.c_in < 1.0);
        // The first decay needs a full window of 10 episodes.
        assert_eq!(trace[8].0, 0.5);
        assert!((trace[9].0 - 0.4).abs() < 1e-15);
        assert!((trace[10].0 - 0.4).abs() < 1e-15);
    }
}
