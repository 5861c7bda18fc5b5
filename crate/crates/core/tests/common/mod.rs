#![allow(dead_code)]

pub mod elastic_ref;
pub mod oracles;
