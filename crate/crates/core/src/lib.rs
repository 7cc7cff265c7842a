//! CRC-aided polar codes with successive-cancellation list decoding,
//! partitioned list decoding, decoding enhancements and adaptive list size
//! selection, plus the Monte-Carlo harness used to evaluate them.

pub mod channel;
pub mod code_spec;
pub mod cost;
pub mod enhance;
pub mod fixedpoint;
pub mod gpscl;
pub mod ida;
pub mod sc_kernel;
pub mod scl;
pub mod sim;
