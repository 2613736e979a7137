//! Bi-directional recurrent entity network with semantically supervised
//! memory chains, for choosing the coherent ending of a short story.
//!
//! The crate is self-contained: a small reverse-mode tape ([`tape`]) drives
//! the model ([`model`]), which is trained with FTRL ([`training`]) on cloze
//! corpora ([`data`]) whose gate supervision comes from lexicon-based trigger
//! labels ([`labeler`]).

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod labeler;
pub mod model;
pub mod tape;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use tensor::Tensor;
