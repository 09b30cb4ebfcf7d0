pub use qpip_core as core;

pub mod error;
pub mod experiments;
pub mod format;
pub mod net;
pub mod record;
pub mod transcript;
