#![allow(dead_code)]

pub mod oracles;
pub mod readability_fixtures;
pub mod synth;
