use alloc::string::String;
use alloc::vec::Vec;

use crate::math::log;

/// A point in a student's event stream: time in seconds plus the ordinal of
/// the session the event belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub time: f64,
    pub session: u32,
}

/// Assigns session ordinals along one student's event stream.
///
/// With session ids, a new session starts whenever the id changes; without
/// them, whenever the gap to the previous event exceeds `gap` seconds.
#[derive(Debug, Clone)]
pub struct SessionClock {
    gap: f64,
    last: Option<(f64, Option<String>)>,
    ordinal: u32,
}

impl SessionClock {
    pub fn new(gap: f64) -> Self {
        SessionClock {
            gap,
            last: None,
            ordinal: 0,
        }
    }

    pub fn tick(&mut self, time: f64, session_id: Option<&str>) -> Moment {
        if let Some((t, id)) = &self.last {
            let boundary = match (id.as_deref(), session_id) {
                (Some(a), Some(b)) => a != b,
                _ => time - t > self.gap,
            };
            if boundary {
                self.ordinal += 1;
            }
        }
        self.last = Some((time, session_id.map(String::from)));
        Moment {
            time,
            session: self.ordinal,
        }
    }
}

/// One prior opportunity on a component level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opportunity {
    pub time: f64,
    pub outcome: u8,
}

/// Exponentially decayed running counts at a fixed rate `d`:
/// each opportunity multiplies every count by `d` before adding its own mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayedCounts {
    pub rate: f64,
    pub all: f64,
    pub suc: f64,
    pub fail: f64,
    /// Weight left on ghost seeds, `d^N`.
    pub ghost: f64,
}

impl DecayedCounts {
    pub fn new(rate: f64) -> Self {
        DecayedCounts {
            rate,
            all: 0.0,
            suc: 0.0,
            fail: 0.0,
            ghost: 1.0,
        }
    }

    pub fn push(&mut self, outcome: u8) {
        let d = self.rate;
        let y = outcome as f64;
        self.all = self.all * d + 1.0;
        self.suc = self.suc * d + y;
        self.fail = self.fail * d + (1.0 - y);
        self.ghost *= d;
    }

    pub fn replay(rate: f64, history: &[Opportunity]) -> Self {
        let mut c = DecayedCounts::new(rate);
        for o in history {
            c.push(o.outcome);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("opportunity at t={time} precedes the last one at t={last}")]
pub struct SequencingError {
    pub time: f64,
    pub last: f64,
}

/// Accumulators for one (student, component level) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentState {
    n_suc: u32,
    n_fail: u32,
    t_first: f64,
    t_last: f64,
    last_session: u32,
    intrasession: f64,
    /// Σ over successive lags of 1 / ln(e + lag).
    lag_stabilizer: f64,
    history: Vec<Opportunity>,
    decayed: DecayedCounts,
}

impl Default for ComponentState {
    fn default() -> Self {
        ComponentState::new(1.0)
    }
}

impl ComponentState {
    /// Fresh state whose decayed counts run at `decay`.
    pub fn new(decay: f64) -> Self {
        ComponentState {
            n_suc: 0,
            n_fail: 0,
            t_first: 0.0,
            t_last: 0.0,
            last_session: 0,
            intrasession: 0.0,
            lag_stabilizer: 0.0,
            history: Vec::new(),
            decayed: DecayedCounts::new(decay),
        }
    }

    /// Empties the state, keeping its allocation and decay rate.
    pub fn reset(&mut self) {
        let rate = self.decayed.rate;
        self.n_suc = 0;
        self.n_fail = 0;
        self.t_first = 0.0;
        self.t_last = 0.0;
        self.last_session = 0;
        self.intrasession = 0.0;
        self.lag_stabilizer = 0.0;
        self.history.clear();
        self.decayed = DecayedCounts::new(rate);
    }

    pub fn n_opp(&self) -> u32 {
        self.n_suc + self.n_fail
    }

    pub fn n_suc(&self) -> u32 {
        self.n_suc
    }

    pub fn n_fail(&self) -> u32 {
        self.n_fail
    }

    pub fn t_first(&self) -> Option<f64> {
        (self.n_opp() > 0).then_some(self.t_first)
    }

    pub fn t_last(&self) -> Option<f64> {
        (self.n_opp() > 0).then_some(self.t_last)
    }

    pub fn last_session(&self) -> u32 {
        self.last_session
    }

    pub fn intrasession_elapsed(&self) -> f64 {
        self.intrasession
    }

    pub fn lag_stabilizer(&self) -> f64 {
        self.lag_stabilizer
    }

    pub fn history(&self) -> &[Opportunity] {
        &self.history
    }

    pub fn decayed(&self) -> &DecayedCounts {
        &self.decayed
    }

    /// Records an opportunity. Call only after the trial's features have been
    /// evaluated.
    pub fn update(&mut self, at: Moment, outcome: u8) -> Result<(), SequencingError> {
        if self.n_opp() == 0 {
            self.t_first = at.time;
        } else {
            if at.time < self.t_last {
                return Err(SequencingError {
                    time: at.time,
                    last: self.t_last,
                });
            }
            let lag = at.time - self.t_last;
            if at.session == self.last_session {
                self.intrasession += lag;
            }
            self.lag_stabilizer += 1.0 / log(core::f64::consts::E + lag);
        }
        self.t_last = at.time;
        self.last_session = at.session;
        if outcome == 1 {
            self.n_suc += 1;
        } else {
            self.n_fail += 1;
        }
        self.history.push(Opportunity {
            time: at.time,
            outcome,
        });
        self.decayed.push(outcome);
        Ok(())
    }

    /// Within-session time extended by the gap to `now` when `now` falls in
    /// the same session as the last opportunity.
    pub(crate) fn intrasession_at(&self, now: Moment) -> f64 {
        if self.n_opp() > 0 && now.session == self.last_session {
            self.intrasession + (now.time - self.t_last).max(0.0)
        } else {
            self.intrasession
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(t: f64, s: u32) -> Moment {
        Moment {
            time: t,
            session: s,
        }
    }

    #[test]
    fn first_event_bootstraps_state() {
        let mut st = ComponentState::default();
        st.update(at(10.0, 0), 1).unwrap();
        assert_eq!((st.n_opp(), st.n_suc(), st.n_fail()), (1, 1, 0));
        assert_eq!(st.t_first(), Some(10.0));
        assert_eq!(st.t_last(), Some(10.0));
    }

    #[test]
    fn gap_within_threshold_accumulates() {
        let mut clock = SessionClock::new(1800.0);
        let mut st = ComponentState::default();
        st.update(clock.tick(10.0, None), 1).unwrap();
        st.update(clock.tick(70.0, None), 0).unwrap();
        assert_eq!(st.n_opp(), 2);
        assert_eq!(st.n_fail(), 1);
        assert_eq!(st.intrasession_elapsed(), 60.0);
    }

    #[test]
    fn gap_across_session_boundary_adds_nothing() {
        let mut clock = SessionClock::new(1800.0);
        let mut st = ComponentState::default();
        st.update(clock.tick(10.0, None), 1).unwrap();
        st.update(clock.tick(10_000.0, None), 1).unwrap();
        assert_eq!(st.intrasession_elapsed(), 0.0);
    }

    #[test]
    fn session_ids_override_the_gap_rule() {
        let mut clock = SessionClock::new(1800.0);
        assert_eq!(clock.tick(0.0, Some("a")).session, 0);
        assert_eq!(clock.tick(5000.0, Some("a")).session, 0);
        assert_eq!(clock.tick(5001.0, Some("b")).session, 1);
    }

    #[test]
    fn out_of_order_update_is_rejected() {
        let mut st = ComponentState::default();
        st.update(at(10.0, 0), 1).unwrap();
        assert!(st.update(at(9.0, 0), 1).is_err());
        assert_eq!(st.n_opp(), 1);
    }
}
