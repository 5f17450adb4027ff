use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four classes of the interference decision problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Interference-free.
    H0,
    /// Multipath.
    H1,
    /// Spoofing.
    H2,
    /// Jamming.
    H3,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 4] = [Hypothesis::H0, Hypothesis::H1, Hypothesis::H2, Hypothesis::H3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::H0 => "H0",
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Hypothesis::H0 => "interference-free",
            Hypothesis::H1 => "multipath",
            Hypothesis::H2 => "spoofing",
            Hypothesis::H3 => "jamming",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H0" | "h0" | "0" => Ok(Hypothesis::H0),
            "H1" | "h1" | "1" => Ok(Hypothesis::H1),
            "H2" | "h2" | "2" => Ok(Hypothesis::H2),
            "H3" | "h3" | "3" => Ok(Hypothesis::H3),
            other => Err(Error::InvalidParameter(format!("unknown hypothesis '{other}'"))),
        }
    }
}
