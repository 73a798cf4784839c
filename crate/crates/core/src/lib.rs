pub mod batch;
pub mod cli;
pub mod error;
pub mod integrate;
mod interp;
pub mod model;
pub mod oracle;
pub mod profile;
pub mod shoot;
pub mod verify;
