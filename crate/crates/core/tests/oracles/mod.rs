//! Independent oracles shared by the integration tests and the acceptance
//! harness. Every `check_*` function returns `Err` with a short reason.
#![allow(dead_code)]

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub mod cost;
pub mod cv;
pub mod lexical;
pub mod metrics;
pub mod pipeline;

pub type Check = Result<(), String>;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures")).join(name)
}
