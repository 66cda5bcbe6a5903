#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod linalg;

pub use error::{Error, Result};
pub mod demo;
pub mod graph;
pub mod modes;
pub mod panel;
pub mod pose;
pub mod recovery;
pub mod wave;
