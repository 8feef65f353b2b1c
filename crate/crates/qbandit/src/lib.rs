//! Quantum-amplification bandit simulator.
//!
//! A single Grover iteration, simulated classically over a K-dimensional
//! amplitude vector, drives the exploration step of an adversarial bandit
//! policy: the phase is solved each round from the relative disparity of the
//! cumulative loss scores, amplifying the dominant arm while attenuating the
//! rest, and the drawn arm's loss feeds an implicit-exploration estimator.
//! Classical baselines (Exp3, Exp3-IX, Exp3.P, UCB1, epsilon-greedy) and a
//! fog task-offloading cost environment round out the experiment harness.

pub mod amp;
pub mod config;
pub mod env;
pub mod harness;
pub mod policies;
pub mod selftest;
