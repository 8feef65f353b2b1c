//! Experiment orchestration: seeded single runs, regret computation,
//! cross-seed aggregation, K-sweeps, and phase-trace extraction, plus the
//! CSV writers behind the CLI outputs.
//!
//! Repetitions are independent: each owns its environment, policy, and rng,
//! so they may run in parallel; aggregation always reduces over run indices
//! in ascending order, making concurrent and sequential execution
//! byte-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{EnvSection, ExperimentConfig};
use crate::env::{synthetic_env, EnvError, FogEnv, LossMatrix};
use crate::policies::{make_policy, Policy, PolicyError, PolicyTrace};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("csv write error: {0}")]
    Io(#[from] std::io::Error),
}

/// One full interaction: the per-round traces and the realized losses.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub traces: Vec<PolicyTrace>,
}

impl Trajectory {
    pub fn arms_played(&self) -> Vec<usize> {
        self.traces.iter().map(|t| t.chosen).collect()
    }
}

/// Per-policy cross-seed statistics of cumulative regret.
#[derive(Debug, Clone)]
pub struct PolicyAggregate {
    pub policy: String,
    /// Mean cumulative regret per round across repetitions.
    pub mean: Vec<f64>,
    /// Sample standard deviation per round (0 when R = 1).
    pub std: Vec<f64>,
    pub repetitions: usize,
}

impl PolicyAggregate {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_std(&self) -> f64 {
        self.std.last().copied().unwrap_or(0.0)
    }

    /// Standard error of the final mean.
    pub fn final_sem(&self) -> f64 {
        self.final_std() / (self.repetitions as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct AggregateResult {
    pub policies: Vec<PolicyAggregate>,
}

impl AggregateResult {
    pub fn get(&self, policy: &str) -> Option<&PolicyAggregate> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

/// Fig. 3c-style scatter row.
#[derive(Debug, Clone, Copy)]
pub struct PhaseTraceRow {
    pub t: usize,
    pub p_m: f64,
    pub dbar: f64,
    pub phi: f64,
    pub sigma: f64,
}

/// Counter-based seed derivation: run i of a policy depends only on
/// (base, label, i), so adding policies never perturbs existing runs.
pub fn derive_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(base ^ splitmix64(h ^ splitmix64(index)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Builds the oblivious loss matrix for one repetition. The environment
/// seed does not involve the policy id, so every policy in a repetition
/// faces the identical loss sequence.
pub fn build_loss_matrix(env: &EnvSection, base_seed: u64, rep: u64) -> Result<LossMatrix, EnvError> {
    let seed = derive_seed(base_seed, "env", rep);
    match env {
        EnvSection::Fog(config) => Ok(FogEnv::new(config.clone(), seed)?.losses().clone()),
        EnvSection::Synthetic(config) => synthetic_env(config, seed),
    }
}

/// Cumulative regret after each round against the best fixed arm over the
/// full horizon.
pub fn regret_series(arms_played: &[usize], losses: &LossMatrix) -> Vec<f64> {
    let best = losses.best_fixed_arm();
    let mut cum = 0.0;
    arms_played
        .iter()
        .enumerate()
        .map(|(t, &arm)| {
            cum += losses.loss(t, arm) - losses.loss(t, best);
            cum
        })
        .collect()
}

/// Plays one policy against one loss matrix with the given rng.
pub fn run_on_matrix(
    policy: &mut dyn Policy,
    losses: &LossMatrix,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, PolicyError> {
    let mut traces = Vec::with_capacity(losses.rounds());
    for t in 0..losses.rounds() {
        let mut trace = policy.select(rng)?;
        let loss = losses.loss(t, trace.chosen);
        policy.observe(&mut trace, loss)?;
        traces.push(trace);
    }
    Ok(Trajectory { traces })
}

/// One seeded repetition of one policy: environment and rng both derived
/// from (config.seed, rep).
pub fn run_single(
    policy_id: &str,
    config: &ExperimentConfig,
    rep: u64,
) -> Result<(Trajectory, LossMatrix), HarnessError> {
    let losses = build_loss_matrix(&config.environment, config.seed, rep)?;
    let mut policy = make_policy(
        policy_id,
        config.environment.arms(),
        config.environment.horizon(),
        &config.policy_config(),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, policy_id, rep));
    let trajectory = run_on_matrix(policy.as_mut(), &losses, &mut rng)?;
    Ok((trajectory, losses))
}

fn aggregate(policy: &str, series: Vec<Vec<f64>>) -> PolicyAggregate {
    let reps = series.len();
    let rounds = series.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; rounds];
    let mut m2 = vec![0.0; rounds];
    // Welford over repetitions, visited in ascending index order
    for (i, run) in series.iter().enumerate() {
        let n = (i + 1) as f64;
        for (t, &x) in run.iter().enumerate() {
            let delta = x - mean[t];
            mean[t] += delta / n;
            m2[t] += delta * (x - mean[t]);
        }
    }
    let std = m2
        .into_iter()
        .map(|v| if reps > 1 { (v / (reps - 1) as f64).sqrt() } else { 0.0 })
        .collect();
    PolicyAggregate {
        policy: policy.to_string(),
        mean,
        std,
        repetitions: reps,
    }
}

/// Runs every configured policy for R repetitions and aggregates regret.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult, HarnessError> {
    let reps: Vec<u64> = (0..config.repetitions as u64).collect();
    let mut policies = Vec::with_capacity(config.policies.len());
    for policy_id in &config.policies {
        let series: Vec<Vec<f64>> = reps
            .par_iter()
            .map(|&rep| {
                let (trajectory, losses) = run_single(policy_id, config, rep)?;
                Ok(regret_series(&trajectory.arms_played(), &losses))
            })
            .collect::<Result<_, HarnessError>>()?;
        policies.push(aggregate(policy_id, series));
    }
    Ok(AggregateResult { policies })
}

/// Final-regret statistics per policy for each arm count, extending the CPU
/// list cyclically.
pub fn sweep_k(
    config: &ExperimentConfig,
    k_values: &[usize],
) -> Result<Vec<(usize, AggregateResult)>, HarnessError> {
    let mut out = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut c = config.clone();
        c.environment.set_arms(k);
        out.push((k, run_experiment(&c)?));
    }
    Ok(out)
}

/// Per-round (p_m, dbar, phi, sigma) rows from QB runs across all
/// configured repetitions.
pub fn phase_trace(config: &ExperimentConfig) -> Result<Vec<PhaseTraceRow>, HarnessError> {
    let mut rows = Vec::new();
    for rep in 0..config.repetitions as u64 {
        let (trajectory, _) = run_single("qb", config, rep)?;
        for trace in &trajectory.traces {
            rows.push(PhaseTraceRow {
                t: trace.t,
                p_m: trace.p[trace.target],
                dbar: trace.dbar,
                phi: trace.phi,
                sigma: trace.sigma,
            });
        }
    }
    Ok(rows)
}

/// `regret.csv`: policy,t,mean_cum_regret,std_cum_regret.
pub fn write_regret_csv<W: std::io::Write>(
    result: &AggregateResult,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "policy,t,mean_cum_regret,std_cum_regret")?;
    for agg in &result.policies {
        for t in 0..agg.mean.len() {
            writeln!(w, "{},{},{:.6},{:.6}", agg.policy, t + 1, agg.mean[t], agg.std[t])?;
        }
    }
    Ok(())
}

/// `final.csv`: policy,K,mean,std.
pub fn write_final_csv<W: std::io::Write>(
    sweeps: &[(usize, AggregateResult)],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "policy,K,mean,std")?;
    for (k, result) in sweeps {
        for agg in &result.policies {
            writeln!(w, "{},{},{:.6},{:.6}", agg.policy, k, agg.final_mean(), agg.final_std())?;
        }
    }
    Ok(())
}

/// `phase_trace.csv`: t,p_m,dbar,phi,sigma.
pub fn write_phase_csv<W: std::io::Write>(
    rows: &[PhaseTraceRow],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t,p_m,dbar,phi,sigma")?;
    for r in rows {
        writeln!(
            w,
            "{},{:.9},{:.9},{:.9},{:.9}",
            r.t, r.p_m, r.dbar, r.phi, r.sigma
        )?;
    }
    Ok(())
}
