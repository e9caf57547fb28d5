pub mod constants;
pub mod pointvortex;
pub mod validate;
pub mod vstate;
