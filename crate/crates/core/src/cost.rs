//! Operation counters threaded through the metered stage functions.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Arithmetic operations performed by a stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ops {
    pub mul: u64,
    pub div: u64,
    pub add: u64,
    pub cmp: u64,
    pub distance_evals: u64,
}

impl Ops {
    /// One squared-distance evaluation: two subtractions, two squares, one sum.
    pub fn distance(&mut self) {
        self.distance_evals += 1;
        self.mul += 2;
        self.add += 3;
    }

    pub fn mul(&mut self, n: u64) {
        self.mul += n;
    }

    pub fn div(&mut self, n: u64) {
        self.div += n;
    }

    pub fn add(&mut self, n: u64) {
        self.add += n;
    }

    pub fn cmp(&mut self, n: u64) {
        self.cmp += n;
    }
}

impl AddAssign for Ops {
    fn add_assign(&mut self, o: Ops) {
        self.mul += o.mul;
        self.div += o.div;
        self.add += o.add;
        self.cmp += o.cmp;
        self.distance_evals += o.distance_evals;
    }
}
