pub mod cache;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod morphology;
pub mod names;
pub mod params;
pub mod segmenter;
pub mod translit;
pub mod wfst;

pub use error::{Error, Result};
