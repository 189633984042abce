#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod agent;
pub mod encoding;
pub mod error;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
