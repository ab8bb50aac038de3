#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod domain;
pub mod duality;
pub mod error;
pub mod measure;
pub mod numerics;
pub mod operator;
pub mod spectrum;

pub use error::{Endpoint, Error, Result};
