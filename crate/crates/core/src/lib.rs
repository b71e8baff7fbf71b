//! Target-grid planning for medium-voltage distribution grids.
//!
//! The crate takes a grid model and a set of planning principles and
//! synthesizes cost-minimal target grids for three concepts: radial open
//! rings, rings through a switching station, and closed rings. Candidates
//! are checked for supply, radiality, contingency supply, voltage band,
//! thermal loading and reliability before they are costed and compared.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod economics;
pub mod exec;
pub mod fixtures;
pub mod grid;
pub mod pipeline;
pub mod planner;
pub mod power_flow;
pub mod principles;
pub mod reliability;
pub mod topology;
