//! Classical comparison policies: Exp3.P, UCB1, and epsilon-greedy.

use rand::RngCore;

use crate::amp::measure;
use crate::policies::{check_loss, Policy, PolicyError, PolicyTrace};

/// Exp3.P constants, following the high-probability tuning
/// eta = 0.95 sqrt(ln K / (T K)), beta = sqrt(ln(K / delta) / (T K)),
/// mixing gamma = 1.05 sqrt(K ln K / T), with delta the confidence level.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Exp3pParams {
    pub eta_scale: f64,
    pub mix_scale: f64,
    pub delta: f64,
}

impl Default for Exp3pParams {
    fn default() -> Self {
        Self {
            eta_scale: 0.95,
            mix_scale: 1.05,
            delta: 0.05,
        }
    }
}

/// Exp3.P: exponential weights on optimistically biased gain estimates plus
/// uniform mixing.
pub struct Exp3p {
    cum_gains: Vec<f64>,
    t: usize,
    eta: f64,
    beta: f64,
    mix: f64,
}

impl Exp3p {
    pub fn new(arms: usize, horizon: usize, params: Exp3pParams) -> Self {
        let k = arms as f64;
        let n = horizon.max(1) as f64;
        Self {
            cum_gains: vec![0.0; arms],
            t: 0,
            eta: (params.eta_scale * (k.ln() / (n * k)).sqrt()).min(1.0),
            beta: ((k / params.delta).ln() / (n * k)).sqrt().min(1.0),
            mix: (params.mix_scale * (k * k.ln() / n).sqrt()).min(1.0),
        }
    }

    fn distribution(&self) -> Vec<f64> {
        let k = self.cum_gains.len() as f64;
        let max = self
            .cum_gains
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = self
            .cum_gains
            .iter()
            .map(|&g| (self.eta * (g - max)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        weights
            .into_iter()
            .map(|w| (1.0 - self.mix) * w / total + self.mix / k)
            .collect()
    }
}

impl Policy for Exp3p {
    fn id(&self) -> &'static str {
        "exp3p"
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<PolicyTrace, PolicyError> {
        let p = self.distribution();
        let chosen = measure(&p, rng)?;
        let target = crate::amp::TargetSelection::from_probabilities(&p).m;
        Ok(PolicyTrace {
            t: self.t + 1,
            p: p.clone(),
            target,
            dbar: 1.0,
            phi: 0.0,
            rho: 1.0,
            sigma: 1.0,
            p_amp: p,
            chosen,
            loss: f64::NAN,
            estimate: f64::NAN,
        })
    }

    fn observe(&mut self, trace: &mut PolicyTrace, loss: f64) -> Result<(), PolicyError> {
        check_loss(loss)?;
        let gain = 1.0 - loss;
        for (k, g) in self.cum_gains.iter_mut().enumerate() {
            let observed = if k == trace.chosen { gain } else { 0.0 };
            *g += (observed + self.beta) / trace.p_amp[k];
        }
        self.t += 1;
        trace.loss = loss;
        trace.estimate = gain / trace.p_amp[trace.chosen];
        Ok(())
    }
}

/// UCB1 on losses: after playing each arm once in index order, plays the
/// argmin of mean loss minus the confidence radius sqrt(2 ln t / n_k).
pub struct Ucb1 {
    counts: Vec<u64>,
    sums: Vec<f64>,
    t: usize,
}

impl Ucb1 {
    pub fn new(arms: usize) -> Self {
        Self {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
            t: 0,
        }
    }

    fn pick(&self) -> usize {
        if let Some(unplayed) = self.counts.iter().position(|&n| n == 0) {
            return unplayed;
        }
        let t = (self.t + 1) as f64;
        let mut best = 0;
        let mut best_idx = f64::INFINITY;
        for k in 0..self.counts.len() {
            let mean = self.sums[k] / self.counts[k] as f64;
            let idx = mean - (2.0 * t.ln() / self.counts[k] as f64).sqrt();
            if idx < best_idx {
                best_idx = idx;
                best = k;
            }
        }
        best
    }
}

impl Policy for Ucb1 {
    fn id(&self) -> &'static str {
        "ucb1"
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> Result<PolicyTrace, PolicyError> {
        let chosen = self.pick();
        let mut p = vec![0.0; self.counts.len()];
        p[chosen] = 1.0;
        Ok(PolicyTrace {
            t: self.t + 1,
            p: p.clone(),
            target: chosen,
            dbar: 1.0,
            phi: 0.0,
            rho: 1.0,
            sigma: 1.0,
            p_amp: p,
            chosen,
            loss: f64::NAN,
            estimate: f64::NAN,
        })
    }

    fn observe(&mut self, trace: &mut PolicyTrace, loss: f64) -> Result<(), PolicyError> {
        check_loss(loss)?;
        self.counts[trace.chosen] += 1;
        self.sums[trace.chosen] += loss;
        self.t += 1;
        trace.loss = loss;
        trace.estimate = loss;
        Ok(())
    }
}

/// Epsilon-greedy: explores uniformly with probability epsilon, otherwise
/// plays the arm with the lowest empirical mean loss (unplayed arms count
/// as zero-mean, so each gets tried early).
pub struct EpsGreedy {
    counts: Vec<u64>,
    sums: Vec<f64>,
    epsilon: f64,
    t: usize,
}

impl EpsGreedy {
    pub fn new(arms: usize, epsilon: f64) -> Self {
        Self {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
            epsilon,
            t: 0,
        }
    }

    fn greedy_arm(&self) -> usize {
        let mut best = 0;
        let mut best_mean = f64::INFINITY;
        for k in 0..self.counts.len() {
            let mean = if self.counts[k] == 0 {
                0.0
            } else {
                self.sums[k] / self.counts[k] as f64
            };
            if mean < best_mean {
                best_mean = mean;
                best = k;
            }
        }
        best
    }
}

impl Policy for EpsGreedy {
    fn id(&self) -> &'static str {
        "eps-greedy"
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<PolicyTrace, PolicyError> {
        let k = self.counts.len();
        let greedy = self.greedy_arm();
        let mut p = vec![self.epsilon / k as f64; k];
        p[greedy] += 1.0 - self.epsilon;
        let chosen = measure(&p, rng)?;
        Ok(PolicyTrace {
            t: self.t + 1,
            p: p.clone(),
            target: greedy,
            dbar: 1.0,
            phi: 0.0,
            rho: 1.0,
            sigma: 1.0,
            p_amp: p,
            chosen,
            loss: f64::NAN,
            estimate: f64::NAN,
        })
    }

    fn observe(&mut self, trace: &mut PolicyTrace, loss: f64) -> Result<(), PolicyError> {
        check_loss(loss)?;
        self.counts[trace.chosen] += 1;
        self.sums[trace.chosen] += loss;
        self.t += 1;
        trace.loss = loss;
        trace.estimate = loss;
        Ok(())
    }
}
