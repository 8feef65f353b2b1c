//! Property-based checks over the public API: randomized inputs instead of
//! the fixed grids the acceptance suite uses.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qbandit::amp::{
    amplified_distribution, measure, phi_from_disparity, phi_min, sigma_min, sigma_of_phi,
    solve_phi, update_ratios, PhaseParams, TargetSelection,
};
use qbandit::policies::{ix_estimate, probabilities_from_scores, ScoreState};

fn open_unit() -> impl Strategy<Value = f64> {
    1e-6..(1.0 - 1e-6)
}

fn distribution(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-6..1.0f64, k).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    })
}

proptest! {
    #[test]
    fn ratios_preserve_normalization(p_m in open_unit(),
                                     phi1 in -PI..PI,
                                     phi2 in -PI..PI) {
        let r = update_ratios(p_m, PhaseParams::new(phi1, phi2).unwrap()).unwrap();
        prop_assert!((r.rho * p_m + r.sigma * (1.0 - p_m) - 1.0).abs() < 1e-9);
        prop_assert!(r.rho >= 0.0 && r.sigma >= 0.0);
    }

    #[test]
    fn matched_ratios_move_in_opposite_directions(p_m in open_unit(),
                                                  phi in -PI..PI) {
        let r = update_ratios(p_m, PhaseParams::matched(phi).unwrap()).unwrap();
        prop_assert!((1.0 - r.rho) * (1.0 - r.sigma) <= 1e-9);
    }

    #[test]
    fn solve_phi_round_trips(p_m in open_unit(), x01 in 0.0..1.0f64) {
        let lo = sigma_min(p_m).unwrap();
        let target = lo + (1.0 - lo) * x01;
        let phi = solve_phi(p_m, target).unwrap();
        prop_assert!(phi >= phi_min(p_m).unwrap() - 1e-12 && phi <= 0.0);
        prop_assert!((sigma_of_phi(p_m, phi).unwrap() - target).abs() < 1e-9);
    }

    #[test]
    fn disparity_phase_stays_in_range(p_m in open_unit(), dbar in 0.0..=1.0f64) {
        let phi = phi_from_disparity(p_m, dbar).unwrap();
        let sigma = sigma_of_phi(p_m, phi).unwrap();
        prop_assert!(phi >= phi_min(p_m).unwrap() - 1e-12 && phi <= 0.0);
        prop_assert!(sigma >= sigma_min(p_m).unwrap() - 1e-9 && sigma <= 1.0 + 1e-9);
    }

    #[test]
    fn amplified_distribution_is_normalized(probs in distribution(6),
                                            phi in -PI..0.0f64) {
        let target = TargetSelection::from_probabilities(&probs);
        let p_m = probs[target.m];
        // keep the phase inside the monotone range for this target mass
        let phi = phi.max(phi_min(p_m).unwrap());
        let amp = amplified_distribution(&probs, target, phi).unwrap();
        let total: f64 = amp.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(amp.iter().all(|&p| p >= -1e-12));
        prop_assert!(amp[target.m] >= probs[target.m] - 1e-12);
    }

    #[test]
    fn measure_returns_supported_arm(probs in distribution(5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arm = measure(&probs, &mut rng).unwrap();
        prop_assert!(arm < probs.len());
        prop_assert!(probs[arm] > 0.0);
    }

    #[test]
    fn score_probabilities_form_distribution(
        lhat in proptest::collection::vec(0.0..200.0f64, 2..12),
    ) {
        let mut scores = ScoreState::new(lhat.len());
        for (arm, &v) in lhat.iter().enumerate() {
            scores.add(arm, v);
        }
        let p = probabilities_from_scores(&scores);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| x > 0.0));
        // lower cumulative estimate never gets lower probability
        for a in 0..p.len() {
            for b in 0..p.len() {
                if lhat[a] < lhat[b] {
                    prop_assert!(p[a] >= p[b] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn ix_estimate_bounded_by_importance_weight(loss in 0.0..=1.0f64,
                                                p in 1e-6..1.0f64,
                                                gamma in 0.0..0.5f64) {
        let est = ix_estimate(loss, true, p, gamma);
        prop_assert!(est >= 0.0);
        prop_assert!(est <= loss / (p + gamma) + 1e-12);
        prop_assert!(est <= loss / gamma.max(1e-300));
        prop_assert!(ix_estimate(loss, false, p, gamma) == 0.0);
    }
}
