pub mod analysis;
pub mod arith;
pub mod cli;
pub mod counting;
pub mod group;
pub mod lattice;
pub mod laurent;
pub mod power_sum;
