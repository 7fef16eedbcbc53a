pub mod afp;
pub mod codec;
pub mod error;
pub mod experiment;
pub mod fixed;
pub mod lut;
pub mod media;
pub mod pre;
pub mod protocol;

pub use error::{Error, Result};
