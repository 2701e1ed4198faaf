//! Standard-library side of the nested WFC engine: JSON documents, PPM
//! rendering, world persistence, the runtime experiment, the HTTP server
//! and the command line. The algorithms live in `nwfc-core`.

pub mod assets;
pub mod bench;
pub mod cli;
pub mod clock;
pub mod doc;
pub mod persist;
pub mod render;
pub mod server;

pub use nwfc_core as core;
