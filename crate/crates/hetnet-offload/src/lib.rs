//! Joint computation offloading, clock-speed selection and OFDMA subchannel
//! allocation for a two-tier heterogeneous cellular network.
//!
//! The library minimizes the maximum weighted per-user energy (compute plus
//! transmit) over binary task-placement, DVFS clock-level and subchannel
//! decisions. The optimal solver runs a bisection search on the energy level
//! and verifies feasibility at each level through a linearized binary
//! program; a low-complexity variant decouples the macro and small-cell
//! tiers. An exhaustive oracle provides ground truth on tiny instances.

pub mod energy;
pub mod ilp;
pub mod linearize;
pub mod model;
pub mod oracle;
pub mod radio;
pub mod scenario;
pub mod solver;

pub use model::{Allocation, RadioConfig, Scenario, Task, Topology, User};
