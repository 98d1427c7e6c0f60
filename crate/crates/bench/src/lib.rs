//! Task generators, fixtures, the experiment harness and reporting for
//! `counterplan`.

pub mod domains;
pub mod fixture;
pub mod generators;
pub mod report;
pub mod suite;
