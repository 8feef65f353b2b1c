//! Bandit policies over a common select/observe interface: the
//! quantum-amplification policy, its sole-ratio variant, and the classical
//! baselines (Exp3, Exp3-IX, Exp3.P, UCB1, epsilon-greedy).

mod baselines;
mod qb;

pub use baselines::{EpsGreedy, Exp3p, Exp3pParams, Ucb1};
pub use qb::{AmpVariant, PhiMode, QbPolicy};

use rand::RngCore;
use thiserror::Error;

use crate::amp::AmpError;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("loss {0} outside [0, 1]; the environment must normalize")]
    LossOutOfRange(f64),
    #[error("unknown policy id `{0}`")]
    UnknownPolicy(String),
    #[error(transparent)]
    Amp(#[from] AmpError),
}

/// Per-arm cumulative weighted loss estimates and the round counter.
#[derive(Debug, Clone)]
pub struct ScoreState {
    lhat: Vec<f64>,
    t: usize,
}

impl ScoreState {
    pub fn new(arms: usize) -> Self {
        Self {
            lhat: vec![0.0; arms],
            t: 0,
        }
    }

    pub fn arms(&self) -> usize {
        self.lhat.len()
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn lhat(&self) -> &[f64] {
        &self.lhat
    }

    pub fn add(&mut self, arm: usize, increment: f64) {
        self.lhat[arm] += increment;
    }

    pub fn advance(&mut self) {
        self.t += 1;
    }
}

/// Everything one round produces: the pre- and post-amplification
/// distributions, the chosen phase and ratios, the sampled arm, and (after
/// observe) the realized loss and its estimate.
#[derive(Debug, Clone)]
pub struct PolicyTrace {
    pub t: usize,
    pub p: Vec<f64>,
    pub target: usize,
    pub dbar: f64,
    pub phi: f64,
    pub rho: f64,
    pub sigma: f64,
    pub p_amp: Vec<f64>,
    pub chosen: usize,
    pub loss: f64,
    pub estimate: f64,
}

/// Which arms enter the disparity average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisparityMode {
    /// Average over all arms except the target (default).
    #[default]
    ExcludeTarget,
    /// Average over every arm, target included.
    AllArms,
}

/// Learning-rate and implicit-exploration schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// eta_t = 2 gamma_t = sqrt(2 ln K / (K t)), capped at 1.
    Anytime,
    /// Fixed eta = sqrt(2 ln K / (T K)), gamma = 0 (plain Exp3).
    FixedHorizon,
}

#[derive(Debug, Clone, Copy)]
pub struct ScheduleParams {
    pub arms: usize,
    pub horizon: usize,
    pub kind: ScheduleKind,
}

impl ScheduleParams {
    pub fn new(arms: usize, horizon: usize, kind: ScheduleKind) -> Self {
        Self {
            arms,
            horizon,
            kind,
        }
    }

    /// Default anytime schedule shared by QB and Exp3-IX.
    pub fn anytime(arms: usize, horizon: usize) -> Self {
        Self::new(arms, horizon, ScheduleKind::Anytime)
    }

    /// Learning rate at round t (1-based), capped at 1.
    pub fn eta(&self, t: usize) -> f64 {
        let k = self.arms as f64;
        let raw = match self.kind {
            ScheduleKind::Anytime => (2.0 * k.ln() / (k * t.max(1) as f64)).sqrt(),
            ScheduleKind::FixedHorizon => {
                (2.0 * k.ln() / (self.horizon.max(1) as f64 * k)).sqrt()
            }
        };
        raw.min(1.0)
    }

    /// Implicit-exploration rate at round t; zero for the fixed-horizon
    /// (plain Exp3) schedule.
    pub fn gamma(&self, t: usize) -> f64 {
        match self.kind {
            ScheduleKind::Anytime => self.eta(t) / 2.0,
            ScheduleKind::FixedHorizon => 0.0,
        }
    }

    /// Rounds where the regret-improvement conditions eta_t > 1/t and
    /// gamma_t > 1/(2t) fail. Returned for warning output, never an error.
    pub fn condition_violations(&self) -> Vec<usize> {
        (1..=self.horizon)
            .filter(|&t| {
                let inv = 1.0 / t as f64;
                self.eta(t) <= inv || self.gamma(t) <= inv / 2.0
            })
            .collect()
    }
}

/// Gibbs probabilities from scores: p_k = e^{-Lhat_k} / sum, computed with a
/// min shift so large scores cannot underflow every weight.
pub fn probabilities_from_scores(scores: &ScoreState) -> Vec<f64> {
    let min = scores
        .lhat
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = scores.lhat.iter().map(|&l| (-(l - min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Per-arm relative disparity D_k = e^{-(Lhat_k - min Lhat)} and its average
/// over the configured arm set.
pub fn relative_disparity(
    scores: &ScoreState,
    target: usize,
    mode: DisparityMode,
) -> (Vec<f64>, f64) {
    let min = scores
        .lhat
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let d: Vec<f64> = scores.lhat.iter().map(|&l| (-(l - min)).exp()).collect();
    let dbar = match mode {
        DisparityMode::ExcludeTarget if d.len() > 1 => {
            let sum: f64 = d
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != target)
                .map(|(_, &v)| v)
                .sum();
            sum / (d.len() - 1) as f64
        }
        _ => d.iter().sum::<f64>() / d.len() as f64,
    };
    (d, dbar)
}

/// Implicit-exploration loss estimate: l / (p + gamma) when the arm was
/// chosen, 0 otherwise.
pub fn ix_estimate(loss: f64, chosen: bool, p_used: f64, gamma: f64) -> f64 {
    if chosen {
        loss / (p_used + gamma)
    } else {
        0.0
    }
}

/// One bandit policy bound to a single run.
pub trait Policy {
    fn id(&self) -> &'static str;

    /// Draws an arm and returns the full round trace (loss fields unset).
    fn select(&mut self, rng: &mut dyn RngCore) -> Result<PolicyTrace, PolicyError>;

    /// Feeds back the realized loss for the trace's round.
    fn observe(&mut self, trace: &mut PolicyTrace, loss: f64) -> Result<(), PolicyError>;
}

/// Policy identifiers accepted by the CLI and config.
pub const POLICY_IDS: [&str; 7] = [
    "qb", "qb-sole", "exp3ix", "exp3p", "exp3", "ucb1", "eps-greedy",
];

/// Per-run knobs shared across policy construction.
#[derive(Debug, Clone)]
pub struct PolicyConfig {
    pub epsilon: f64,
    pub disparity_mode: DisparityMode,
    pub exp3p: Exp3pParams,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            disparity_mode: DisparityMode::default(),
            exp3p: Exp3pParams::default(),
        }
    }
}

pub fn make_policy(
    id: &str,
    arms: usize,
    horizon: usize,
    cfg: &PolicyConfig,
) -> Result<Box<dyn Policy>, PolicyError> {
    let anytime = ScheduleParams::anytime(arms, horizon);
    let fixed = ScheduleParams::new(arms, horizon, ScheduleKind::FixedHorizon);
    match id {
        "qb" => Ok(Box::new(QbPolicy::new(
            "qb",
            anytime,
            PhiMode::Disparity,
            AmpVariant::Full,
            cfg.disparity_mode,
        ))),
        "qb-sole" => Ok(Box::new(QbPolicy::new(
            "qb-sole",
            anytime,
            PhiMode::Disparity,
            AmpVariant::Sole,
            cfg.disparity_mode,
        ))),
        "exp3ix" => Ok(Box::new(QbPolicy::new(
            "exp3ix",
            anytime,
            PhiMode::Zero,
            AmpVariant::Full,
            cfg.disparity_mode,
        ))),
        "exp3" => Ok(Box::new(QbPolicy::new(
            "exp3",
            fixed,
            PhiMode::Zero,
            AmpVariant::Full,
            cfg.disparity_mode,
        ))),
        "exp3p" => Ok(Box::new(Exp3p::new(arms, horizon, cfg.exp3p))),
        "ucb1" => Ok(Box::new(Ucb1::new(arms))),
        "eps-greedy" => Ok(Box::new(EpsGreedy::new(arms, cfg.epsilon))),
        other => Err(PolicyError::UnknownPolicy(other.to_string())),
    }
}

pub(crate) fn check_loss(loss: f64) -> Result<(), PolicyError> {
    if !(0.0..=1.0).contains(&loss) {
        return Err(PolicyError::LossOutOfRange(loss));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-12;

    fn scores_from(lhat: &[f64]) -> ScoreState {
        let mut s = ScoreState::new(lhat.len());
        for (k, &v) in lhat.iter().enumerate() {
            s.add(k, v);
        }
        s
    }

    #[test]
    fn probabilities_uniform_on_zero_scores() {
        let p = probabilities_from_scores(&ScoreState::new(3));
        for &v in &p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = TOL);
        }
    }

    #[test]
    fn probabilities_two_arm_example() {
        let p = probabilities_from_scores(&scores_from(&[0.0, 2f64.ln()]));
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = TOL);
        assert_abs_diff_eq!(p[1], 1.0 / 3.0, epsilon = TOL);
    }

    #[test]
    fn probabilities_shift_invariant() {
        let p = probabilities_from_scores(&scores_from(&[5.0, 5.0 + 4f64.ln(), 5.0 + 4f64.ln()]));
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = TOL);
        assert_abs_diff_eq!(p[1], 1.0 / 6.0, epsilon = TOL);
        assert_abs_diff_eq!(p[2], 1.0 / 6.0, epsilon = TOL);
    }

    #[test]
    fn probabilities_survive_huge_scores() {
        let p = probabilities_from_scores(&scores_from(&[5000.0, 5001.0]));
        assert!(p[0] > p[1]);
        assert!(p.iter().all(|&v| v > 0.0));
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = TOL);
    }

    #[test]
    fn disparity_constant_scores() {
        let (d, dbar) = relative_disparity(&scores_from(&[3.0, 3.0, 3.0]), 0, DisparityMode::ExcludeTarget);
        assert_eq!(d, vec![1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(dbar, 1.0, epsilon = TOL);
    }

    #[test]
    fn disparity_exclude_target() {
        let s = scores_from(&[0.0, 2f64.ln(), 4f64.ln()]);
        let (d, dbar) = relative_disparity(&s, 0, DisparityMode::ExcludeTarget);
        assert_abs_diff_eq!(d[0], 1.0, epsilon = TOL);
        assert_abs_diff_eq!(d[1], 0.5, epsilon = TOL);
        assert_abs_diff_eq!(d[2], 0.25, epsilon = TOL);
        assert_abs_diff_eq!(dbar, 0.375, epsilon = TOL);
    }

    #[test]
    fn disparity_all_arms() {
        let s = scores_from(&[0.0, 2f64.ln(), 4f64.ln()]);
        let (_, dbar) = relative_disparity(&s, 0, DisparityMode::AllArms);
        assert_abs_diff_eq!(dbar, 1.75 / 3.0, epsilon = TOL);
    }

    #[test]
    fn ix_estimate_examples() {
        assert_abs_diff_eq!(ix_estimate(0.6, true, 0.3, 0.1), 1.5, epsilon = TOL);
        assert_abs_diff_eq!(ix_estimate(0.9, false, 0.2, 0.3), 0.0, epsilon = TOL);
        assert_abs_diff_eq!(ix_estimate(1.0, true, 1.0, 0.0), 1.0, epsilon = TOL);
    }

    #[test]
    fn anytime_schedule_values() {
        let s = ScheduleParams::anytime(5, 3000);
        assert_abs_diff_eq!(
            s.eta(3000),
            (2.0 * 5f64.ln() / 15000.0).sqrt(),
            epsilon = TOL
        );
        assert!((s.eta(3000) - 0.01465).abs() < 1e-4);
        for t in [1, 10, 100, 3000] {
            assert_abs_diff_eq!(s.gamma(t), s.eta(t) / 2.0, epsilon = TOL);
        }
    }

    #[test]
    fn schedule_caps_at_one() {
        let s = ScheduleParams::anytime(2, 10);
        // sqrt(2 ln 2 / 2) < 1 already, so force an extreme case via K=2, t=1
        assert!(s.eta(1) <= 1.0);
        let tiny = ScheduleParams::new(2, 1, ScheduleKind::FixedHorizon);
        assert!(tiny.eta(1) <= 1.0);
    }

    #[test]
    fn unknown_policy_rejected() {
        assert!(make_policy("nope", 3, 10, &PolicyConfig::default()).is_err());
    }
}
