pub mod cli;
pub mod estimator;
pub mod model;
pub mod reference;
pub mod sampling;
pub mod special;
pub mod walker;
