pub mod channel;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod pauli;
pub mod propagator;
pub mod separability;
pub mod sweep;
pub mod verify;
