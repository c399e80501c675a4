//! Order-driven market simulator with daily price limits.
//!
//! The book ([`lob`]) matches by price-time priority and protects the last
//! two resting orders on each side. Order flow ([`orderflow`]) combines
//! long-memory directions and relative prices with size and cancellation
//! models; [`simulator`] chains trading days and rolls the price band from
//! each close. [`stats`] holds the estimators used to analyse the output and
//! [`calibration`] inverts the pipeline on event data.

pub mod calibration;
pub mod lob;
pub mod orderflow;
pub mod pricing;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod stats;
pub mod stochproc;

pub use lob::{MidPrice, Order, OrderBook, Side, Ticks, Trade};
pub use orderflow::{ModelParams, SizeCurve};
pub use scalar::Real;
pub use simulator::{run_simulation, SimConfig, SimulationResult};

/// Double-precision instantiations.
pub type Cdf = stochproc::EmpiricalCdf<f64>;
pub type Dma = stats::DmaResult<f64>;
pub type Tail = stats::TailFit<f64>;
pub type Ols = stats::OlsFit<f64>;
pub type Fgn = stochproc::FgnGenerator<f64>;
