pub mod config;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod io;
pub mod lp;
pub mod partition;
pub mod polyflow;
pub mod rational;
pub mod retraction;
pub mod rng;
pub mod thinround;
pub mod treeembed;

pub use error::{Error, Result};
pub use rational::Q;
