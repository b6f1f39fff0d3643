//! Capacity-constrained incentive-based demand response.
//!
//! A service provider learns hourly per-household incentive rates with a
//! Double-DQN agent. Households answer through appliance-level energy
//! management (curtailment of power-controllable loads, rescheduling of
//! time-shiftable loads); an elasticity-based response model serves as the
//! benchmark, and LSTM one-step forecasters supply the agent's view of the
//! coming day.

pub mod agent;
pub mod benchmark;
pub mod cli;
pub mod config;
pub mod data;
pub mod exec;
pub mod forecast;
pub mod household;
pub mod market_env;
pub mod metrics;
pub mod neural;
pub mod pipeline;
