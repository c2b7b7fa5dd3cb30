pub mod error;
pub mod rational;
pub mod jetlin;
pub mod ring;

pub use error::{Error, Result};
pub use rational::Rational;
pub mod germ;
pub mod tangent;
pub mod weights;
pub mod invariants;
pub mod criteria;
pub mod volforms;
pub mod atlas;
pub mod report;
pub mod cli;
