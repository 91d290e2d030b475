pub mod alignment;
pub mod analysis;
pub mod corpus;
pub mod dynamics;
pub mod error;
pub mod irp;
pub mod lexicon;
pub mod personality;
pub mod prob;
pub mod simulator;
pub mod textdist;
