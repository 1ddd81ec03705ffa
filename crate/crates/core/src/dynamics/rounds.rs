use serde::{Deserialize, Serialize};

/// One infection round of the root: infected at `start`, recovered at
/// `recovered`, susceptible again at `susceptible`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub start: f64,
    pub recovered: Option<f64>,
    pub susceptible: Option<f64>,
}

/// Root rounds in order. A round is epsilon-good when its infected phase lasts
/// longer than `epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub epsilon: f64,
    pub rounds: Vec<Round>,
}

impl RoundLog {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, rounds: Vec::new() }
    }

    pub fn clear(&mut self) {
        self.rounds.clear();
    }

    pub(crate) fn start_round(&mut self, t: f64) {
        self.rounds.push(Round { start: t, recovered: None, susceptible: None });
    }

    /// In SIS mode recovery and susceptibility coincide.
    pub(crate) fn mark_recovered(&mut self, t: f64, sis: bool) {
        if let Some(r) = self.rounds.last_mut() {
            r.recovered = Some(t);
            if sis {
                r.susceptible = Some(t);
            }
        }
    }

    pub(crate) fn mark_susceptible(&mut self, t: f64) {
        if let Some(r) = self.rounds.last_mut() {
            r.susceptible = Some(t);
        }
    }

    /// Rounds after the first.
    pub fn reinfections(&self) -> usize {
        self.rounds.len().saturating_sub(1)
    }

    /// Rounds whose recovery has been observed.
    pub fn completed(&self) -> usize {
        self.rounds.iter().filter(|r| r.recovered.is_some()).count()
    }

    pub fn is_good(&self, i: usize) -> bool {
        let r = &self.rounds[i];
        r.recovered.is_some_and(|rec| rec - r.start > self.epsilon)
    }

    /// Indices of the epsilon-good rounds.
    pub fn good_rounds(&self) -> Vec<usize> {
        (0..self.rounds.len()).filter(|&i| self.is_good(i)).collect()
    }

    /// Checks `start < recovered <= susceptible < next start`, with equality
    /// of the middle pair only allowed in SIS mode.
    pub fn check_order(&self, sis: bool) -> Result<(), usize> {
        for (i, r) in self.rounds.iter().enumerate() {
            let next = self.rounds.get(i + 1).map(|n| n.start);
            let ok = match (r.recovered, r.susceptible) {
                (Some(rec), Some(sus)) => {
                    r.start < rec && (if sis { rec == sus } else { rec < sus }) && next.is_none_or(|n| sus < n)
                }
                (Some(rec), None) => r.start < rec && next.is_none(),
                (None, None) => next.is_none(),
                (None, Some(_)) => false,
            };
            if !ok {
                return Err(i);
            }
        }
        Ok(())
    }

    /// True when the root was infected at some moment of `[a, b]`.
    pub fn infected_during(&self, a: f64, b: f64) -> bool {
        self.rounds.iter().any(|r| r.start <= b && r.recovered.is_none_or(|rec| rec >= a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping() {
        let mut log = RoundLog::new(0.5);
        log.start_round(0.0);
        log.mark_recovered(1.0, false);
        log.mark_susceptible(1.2);
        log.start_round(2.0);
        log.mark_recovered(2.3, false);
        assert_eq!(log.reinfections(), 1);
        assert_eq!(log.completed(), 2);
        assert_eq!(log.good_rounds(), vec![0]);
        assert_eq!(log.check_order(false), Ok(()));
        assert!(log.infected_during(1.5, 2.1));
        assert!(!log.infected_during(1.1, 1.9));
        log.rounds[1].start = 1.1;
        assert_eq!(log.check_order(false), Err(0));
    }
}
