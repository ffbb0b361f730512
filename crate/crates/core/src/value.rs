use std::fmt;

use serde::{Serialize, Serializer};

/// A real value that may be infinite, e.g. Kemeny's constant of a chain
/// that became reducible, or the removal measure of a cut-edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{x}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            Extended::Finite(x) => serializer.serialize_f64(x),
            Extended::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_serializes_as_string() {
        assert_eq!(
            serde_json::to_string(&Extended::Infinite).unwrap(),
            "\"inf\""
        );
        assert_eq!(
            serde_json::to_string(&Extended::Finite(2.5)).unwrap(),
            "2.5"
        );
        assert_eq!(Extended::Infinite.to_string(), "inf");
    }
}
