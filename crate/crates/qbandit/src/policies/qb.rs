//! The quantum-amplification policy and the Exp3 family it reduces to.
//!
//! One struct covers four policy ids: `qb` (disparity-driven phase, full
//! two-ratio update), `qb-sole` (target-only update with renormalization),
//! `exp3ix` (phase forced to zero, anytime IX schedule), and `exp3` (phase
//! zero, fixed-horizon schedule, gamma = 0). The reductions are exact: with
//! the phase at zero the Grover step is the identity, so the sampling
//! distribution is the Gibbs distribution itself.

use rand::RngCore;

use crate::amp::{
    amplified_distribution, measure, phi_from_disparity, update_ratios, PhaseParams,
    TargetSelection,
};
use crate::policies::{
    check_loss, ix_estimate, probabilities_from_scores, relative_disparity, DisparityMode,
    Policy, PolicyError, PolicyTrace, ScheduleParams, ScoreState,
};

/// How the phase is chosen each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiMode {
    /// Solve phi from the average relative disparity (the QB rule).
    Disparity,
    /// Force phi = 0: the Grover step degenerates to the identity.
    Zero,
}

/// Which probability update the chosen ratios drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmpVariant {
    /// p'_m = rho p_m and p'_k = sigma p_k; sums to 1 by construction.
    Full,
    /// p'_m = min(rho p_m, 1) with other arms untouched, then renormalize.
    Sole,
}

pub struct QbPolicy {
    id: &'static str,
    scores: ScoreState,
    schedules: ScheduleParams,
    phi_mode: PhiMode,
    variant: AmpVariant,
    disparity_mode: DisparityMode,
}

impl QbPolicy {
    pub fn new(
        id: &'static str,
        schedules: ScheduleParams,
        phi_mode: PhiMode,
        variant: AmpVariant,
        disparity_mode: DisparityMode,
    ) -> Self {
        Self {
            id,
            scores: ScoreState::new(schedules.arms),
            schedules,
            phi_mode,
            variant,
            disparity_mode,
        }
    }

    pub fn scores(&self) -> &ScoreState {
        &self.scores
    }
}

impl Policy for QbPolicy {
    fn id(&self) -> &'static str {
        self.id
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Result<PolicyTrace, PolicyError> {
        let t = self.scores.round() + 1;
        let p = probabilities_from_scores(&self.scores);
        let target = TargetSelection::from_probabilities(&p);
        let p_m = p[target.m];

        let (dbar, phi) = match self.phi_mode {
            PhiMode::Disparity if p_m > 0.0 && p_m < 1.0 => {
                let (_, dbar) = relative_disparity(&self.scores, target.m, self.disparity_mode);
                (dbar, phi_from_disparity(p_m, dbar)?)
            }
            PhiMode::Disparity => (1.0, 0.0),
            PhiMode::Zero => (1.0, 0.0),
        };

        let (rho, sigma) = if p_m > 0.0 && p_m < 1.0 {
            let r = update_ratios(p_m, PhaseParams::matched(phi)?)?;
            (r.rho, r.sigma)
        } else {
            (1.0, 1.0)
        };

        let p_amp = match self.variant {
            AmpVariant::Full => amplified_distribution(&p, target, phi)?,
            AmpVariant::Sole => {
                let mut out = p.clone();
                out[target.m] = (rho * p[target.m]).min(1.0);
                let total: f64 = out.iter().sum();
                for v in &mut out {
                    *v /= total;
                }
                out
            }
        };

        let chosen = measure(&p_amp, rng)?;
        Ok(PolicyTrace {
            t,
            p,
            target: target.m,
            dbar,
            phi,
            rho,
            sigma,
            p_amp,
            chosen,
            loss: f64::NAN,
            estimate: f64::NAN,
        })
    }

    fn observe(&mut self, trace: &mut PolicyTrace, loss: f64) -> Result<(), PolicyError> {
        check_loss(loss)?;
        let gamma = self.schedules.gamma(trace.t);
        let eta = self.schedules.eta(trace.t);
        // The IX denominator uses the post-amplification probability, the
        // distribution the arm was actually drawn from.
        let estimate = ix_estimate(loss, true, trace.p_amp[trace.chosen], gamma);
        self.scores.add(trace.chosen, eta * estimate);
        self.scores.advance();
        trace.loss = loss;
        trace.estimate = estimate;
        Ok(())
    }
}
