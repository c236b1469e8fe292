//! Antenna coding and transmit beamforming for MIMO wireless power transfer
//! with reconfigurable pixel antennas.
//!
//! The pipeline runs from a pixel antenna's multiport description
//! ([`multiport`]) through the beamspace MIMO channel ([`channel`]) and the
//! nonlinear rectenna model ([`rectenna`]) to joint beamformer and coder
//! optimization ([`optimizer`]) and Monte Carlo sweeps ([`simulation`]).
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common `f64` case.

pub mod channel;
pub mod error;
pub mod io;
pub mod multiport;
pub mod optimizer;
pub mod oracle;
pub mod rectenna;
pub mod scalar;
pub mod selftest;
pub mod simulation;

pub use error::{Error, Result};
pub use multiport::{AntennaCoder, Side};
pub use scalar::Real;

pub type Network = multiport::MultiportNetwork<f64>;
pub type Basis = multiport::BeamspaceBasis<f64>;
pub type Currents = multiport::PortCurrents<f64>;
pub type Bank = channel::CoderBank<f64>;
pub type Geometry = channel::ArrayGeometry<f64>;
pub type Channels = channel::ChannelSet<f64>;
pub type Rectenna = rectenna::RectennaParams<f64>;
pub type Harvest = rectenna::HarvestResult<f64>;
pub type Beamformer = optimizer::Beamformer<f64>;
pub type Report = optimizer::SolveReport<f64>;
pub type Matrix = scalar::CMatrix<f64>;
pub type Vector = scalar::CVector<f64>;

pub type NetworkF32 = multiport::MultiportNetwork<f32>;
pub type BasisF32 = multiport::BeamspaceBasis<f32>;
pub type RectennaF32 = rectenna::RectennaParams<f32>;
