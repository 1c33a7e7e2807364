pub mod error;
pub mod tree;

pub use error::{Error, Result};
pub use tree::{LeafPermutation, TreeShape, TruncatedAutomorphism, Vertex};
pub mod ggs;
pub mod group;
pub mod pcgs;
pub mod words;
pub mod classes;
pub mod beauville;
pub mod properties;
pub mod sweep;
