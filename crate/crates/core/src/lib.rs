pub mod model;
pub mod adsl;
pub mod engine;
pub mod checker;
pub mod explorer;
mod par;
