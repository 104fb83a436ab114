//! Decoding toolkit for binary linear block codes: classical sum-product
//! belief propagation, an autoregressive hypernetwork decoder with its
//! training pipeline, brute-force reference decoders, and a Monte Carlo
//! bit-error-rate harness.

pub mod alist;
pub mod ar;
pub mod bp;
pub mod catalog;
pub mod channel;
pub mod code;
pub mod error;
pub mod gf2;
pub mod graph;
pub mod harness;
pub mod nn;
pub mod oracles;

pub use code::ParityCheckCode;
pub use error::{Error, Result};
pub use gf2::BinaryMatrix;
pub use graph::EdgeGraph;
