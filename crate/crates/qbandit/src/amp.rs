//! Classical simulation of a single Grover iteration over a K-dimensional
//! amplitude vector: the ratio algebra for the targeted/untargeted arms, the
//! phase solving that maps a score disparity onto a non-target ratio, the
//! closed-form probability update, and measurement (collapse) sampling.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

/// Tolerance used for normalization checks throughout this module.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AmpError {
    #[error("amplitude vector must have at least 2 entries, got {0}")]
    TooFewArms(usize),
    #[error("squared magnitudes sum to {0}, expected 1 within {NORM_TOL}")]
    NotNormalized(f64),
    #[error("target index {index} out of range for {arms} arms")]
    TargetOutOfRange { index: usize, arms: usize },
    #[error("p_m = {0} outside the open interval (0, 1)")]
    DegenerateProbability(f64),
    #[error("phase {0} is not finite")]
    NonFinitePhase(f64),
    #[error("sigma target {target} below the attainable minimum {min}")]
    SigmaBelowMin { target: f64, min: f64 },
    #[error("sigma target {0} exceeds 1")]
    SigmaAboveOne(f64),
    #[error("probability vector sums to {0}, expected 1 within {NORM_TOL}")]
    ProbNotNormalized(f64),
}

/// A K-dimensional superposition: complex amplitudes with unit total
/// squared magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    amps: Vec<Complex64>,
}

impl AmplitudeState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self, AmpError> {
        if amps.len() < 2 {
            return Err(AmpError::TooFewArms(amps.len()));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(AmpError::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Builds the real, nonnegative amplitude vector `sqrt(p_k)` from a
    /// probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Result<Self, AmpError> {
        let amps = probs
            .iter()
            .map(|&p| Complex64::new(p.max(0.0).sqrt(), 0.0))
            .collect();
        Self::new(amps)
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Squared magnitudes `|g_k|^2`, the collapse probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Oracle and diffusion phases. Phase-matched mode sets both equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub phi1: f64,
    pub phi2: f64,
}

impl PhaseParams {
    pub fn new(phi1: f64, phi2: f64) -> Result<Self, AmpError> {
        if !phi1.is_finite() {
            return Err(AmpError::NonFinitePhase(phi1));
        }
        if !phi2.is_finite() {
            return Err(AmpError::NonFinitePhase(phi2));
        }
        Ok(Self { phi1, phi2 })
    }

    /// Phase-matched parameters: phi1 = phi2 = phi.
    pub fn matched(phi: f64) -> Result<Self, AmpError> {
        Self::new(phi, phi)
    }
}

/// Squared-magnitude multipliers applied by one Grover step to the target
/// arm (`rho`) and every other arm (`sigma`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRatios {
    pub rho: f64,
    pub sigma: f64,
}

/// Index of the arm targeted by the oracle: the maximal entry of the
/// probability vector, ties broken by lowest index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetSelection {
    pub m: usize,
}

impl TargetSelection {
    pub fn from_probabilities(probs: &[f64]) -> Self {
        let mut m = 0;
        for (k, &p) in probs.iter().enumerate().skip(1) {
            if p > probs[m] {
                m = k;
            }
        }
        Self { m }
    }
}

/// Applies one Grover iteration `G = -U_(phi2,psi0) . U_(phi1,m)` to the
/// state, where the oracle shifts the target arm's phase by phi1 and the
/// diffusion rotates about the input state by phi2.
pub fn grover_apply(
    state: &AmplitudeState,
    target: TargetSelection,
    phases: PhaseParams,
) -> Result<AmplitudeState, AmpError> {
    let k = state.len();
    if target.m >= k {
        return Err(AmpError::TargetOutOfRange {
            index: target.m,
            arms: k,
        });
    }
    let e1 = Complex64::from_polar(1.0, phases.phi1);
    let e2 = Complex64::from_polar(1.0, phases.phi2);
    let one = Complex64::new(1.0, 0.0);

    // Oracle: multiply the target amplitude by e^{j phi1}.
    let mut oracled: Vec<Complex64> = state.amps.to_vec();
    oracled[target.m] *= e1;

    // Diffusion about |psi0>: w = u - (1 - e^{j phi2}) <psi0|u> |psi0>,
    // then the global minus sign of G.
    let overlap: Complex64 = state
        .amps
        .iter()
        .zip(&oracled)
        .map(|(g, u)| g.conj() * u)
        .sum();
    let coeff = (one - e2) * overlap;
    let amps = oracled
        .iter()
        .zip(&state.amps)
        .map(|(u, g)| -(u - coeff * g))
        .collect();
    AmplitudeState::new(amps)
}

/// Closed-form amplification/attenuation ratios for one Grover step:
/// `rho = |(1 - e^{j phi1} - e^{j phi2}) - (1 - e^{j phi1})(1 - e^{j phi2}) p_m|^2`,
/// `sigma = |-e^{j phi2} - (1 - e^{j phi1})(1 - e^{j phi2}) p_m|^2`.
pub fn update_ratios(p_m: f64, phases: PhaseParams) -> Result<UpdateRatios, AmpError> {
    check_open_unit(p_m)?;
    let e1 = Complex64::from_polar(1.0, phases.phi1);
    let e2 = Complex64::from_polar(1.0, phases.phi2);
    let one = Complex64::new(1.0, 0.0);
    let cross = (one - e1) * (one - e2) * p_m;
    let rho = ((one - e1 - e2) - cross).norm_sqr();
    let sigma = (-e2 - cross).norm_sqr();
    Ok(UpdateRatios { rho, sigma })
}

/// The common factor kappa of the phase-matched sign law:
/// `1 - rho = (p_m - 1) kappa` and `1 - sigma = p_m kappa`.
pub fn kappa(p_m: f64, phi: f64) -> Result<f64, AmpError> {
    check_open_unit(p_m)?;
    let half = (phi / 2.0).sin();
    Ok(4.0 * (2.0 * p_m - 1.0) * half * half * (phi.cos() - 1.0) + 2.0 * phi.sin() * phi.sin())
}

/// Smallest non-target ratio attainable in phase-matched mode:
/// `(max(1 - 4 p_m, 0))^2`.
pub fn sigma_min(p_m: f64) -> Result<f64, AmpError> {
    check_open_unit(p_m)?;
    let w = (1.0 - 4.0 * p_m).max(0.0);
    Ok(w * w)
}

/// Left endpoint of the phase range on which sigma increases monotonically:
/// `-min(arccos(W_0), pi)` with `W_0 = 1 - 1/(2 p_m)`.
pub fn phi_min(p_m: f64) -> Result<f64, AmpError> {
    check_open_unit(p_m)?;
    let w0 = 1.0 - 1.0 / (2.0 * p_m);
    Ok(-(w0.clamp(-1.0, 1.0).acos().min(std::f64::consts::PI)))
}

/// Convenience: sigma of the phase-matched iteration at phase `phi`.
pub fn sigma_of_phi(p_m: f64, phi: f64) -> Result<f64, AmpError> {
    Ok(update_ratios(p_m, PhaseParams::matched(phi)?)?.sigma)
}

/// Inverts sigma(phi) on the monotone range: the phase achieving the given
/// non-target ratio, `phi = -arccos(W_x)` with `W_x = 1 - (1 - sqrt(x))/(2 p_m)`.
pub fn solve_phi(p_m: f64, sigma_target: f64) -> Result<f64, AmpError> {
    check_open_unit(p_m)?;
    if sigma_target > 1.0 {
        return Err(AmpError::SigmaAboveOne(sigma_target));
    }
    let min = sigma_min(p_m)?;
    if sigma_target < min - NORM_TOL {
        return Err(AmpError::SigmaBelowMin {
            target: sigma_target,
            min,
        });
    }
    let wx = 1.0 - (1.0 - sigma_target.max(0.0).sqrt()) / (2.0 * p_m);
    Ok(-wx.clamp(-1.0, 1.0).acos())
}

/// Maps an average relative disparity in [0, 1] onto the feasible sigma
/// range and solves for the phase.
pub fn phi_from_disparity(p_m: f64, dbar: f64) -> Result<f64, AmpError> {
    let min = sigma_min(p_m)?;
    solve_phi(p_m, (1.0 - min) * dbar + min)
}

/// Closed-form probability update of one phase-matched Grover step:
/// `p'_m = rho p_m`, `p'_k = sigma p_k` for k != m. Degenerate targets
/// (p_m of 0 or 1) pass through unchanged.
pub fn amplified_distribution(
    probs: &[f64],
    target: TargetSelection,
    phi: f64,
) -> Result<Vec<f64>, AmpError> {
    if target.m >= probs.len() {
        return Err(AmpError::TargetOutOfRange {
            index: target.m,
            arms: probs.len(),
        });
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(AmpError::ProbNotNormalized(total));
    }
    let p_m = probs[target.m];
    if p_m <= 0.0 || p_m >= 1.0 {
        return Ok(probs.to_vec());
    }
    let ratios = update_ratios(p_m, PhaseParams::matched(phi)?)?;
    Ok(probs
        .iter()
        .enumerate()
        .map(|(k, &p)| if k == target.m { ratios.rho * p } else { ratios.sigma * p })
        .collect())
}

/// Collapse: samples an arm index by inverse CDF over ascending indices.
pub fn measure<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize, AmpError> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > NORM_TOL {
        return Err(AmpError::ProbNotNormalized(total));
    }
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = k;
        }
        cum += p;
        if u < cum {
            return Ok(k);
        }
    }
    // u landed in the rounding slack past the last cumulative step.
    Ok(last_positive)
}

fn check_open_unit(p_m: f64) -> Result<(), AmpError> {
    if !(p_m > 0.0 && p_m < 1.0) {
        return Err(AmpError::DegenerateProbability(p_m));
    }
    Ok(())
}
