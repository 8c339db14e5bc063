use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::EdgeType;

/// Occupied subset of the three edges at a vertex, written as the digit
/// string `abc` (a-edge first). Index 0 is `000`, index 7 is `111`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LocalConfig(u8);

impl LocalConfig {
    pub const EMPTY: LocalConfig = LocalConfig(0);
    pub const FULL: LocalConfig = LocalConfig(7);

    pub fn new(bits: u8) -> Result<Self> {
        if bits > 7 {
            return Err(Error::InvalidInput(format!("local configuration index {bits} > 7")));
        }
        Ok(LocalConfig(bits))
    }

    pub fn from_index(i: usize) -> Self {
        assert!(i < 8, "local configuration index {i} out of range");
        LocalConfig(i as u8)
    }

    pub fn all() -> impl Iterator<Item = LocalConfig> {
        (0..8).map(LocalConfig)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn contains(self, t: EdgeType) -> bool {
        self.0 & t.bit() != 0
    }

    pub fn with(self, t: EdgeType, on: bool) -> Self {
        if on {
            LocalConfig(self.0 | t.bit())
        } else {
            LocalConfig(self.0 & !t.bit())
        }
    }

    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_odd(self) -> bool {
        self.degree() % 2 == 1
    }

    pub fn complement(self) -> Self {
        LocalConfig(7 - self.0)
    }
}

impl fmt::Display for LocalConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:03b}", self.0)
    }
}

impl FromStr for LocalConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        if s.len() != 3 || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidInput(format!(
                "local configuration must be three binary digits, got {s:?}"
            )));
        }
        Ok(LocalConfig(u8::from_str_radix(s, 2).expect("validated")))
    }
}

impl TryFrom<String> for LocalConfig {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LocalConfig> for String {
    fn from(c: LocalConfig) -> String {
        c.to_string()
    }
}
