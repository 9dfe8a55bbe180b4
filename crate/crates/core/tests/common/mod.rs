// Shared helpers for the integration tests. Reference values come from the
// construction factors of each ensemble member and scalar formulas below.
#![allow(dead_code)]

use hpbp::{CVec, C64};

pub fn ln1m(l: C64) -> C64 {
    (C64::new(1.0, 0.0) - l).ln()
}

pub fn neg_pow(l: C64, p: f64) -> C64 {
    (-l).powf(p)
}

pub fn cv(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&r| C64::new(r, 0.0)))
}

pub fn dist(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm()
}
