pub mod align;
pub mod build_db;
pub mod classifier;
pub mod detector;
pub mod evaluate;
pub mod features;
pub mod transfer;
pub mod viz;
