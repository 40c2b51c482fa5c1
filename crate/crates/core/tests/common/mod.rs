#![allow(dead_code)]

pub mod dip_lp;
pub mod pair_count;
