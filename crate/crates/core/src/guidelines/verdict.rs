use std::fmt;

use serde::{Deserialize, Serialize};

pub const DEFAULT_THRESHOLD: f64 = 1.10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GuidelineId {
    G1Contig,
    G2PackSend,
    G3RecvUnpack,
    G4Normalize,
    G4AltDescription,
}

impl GuidelineId {
    pub fn name(self) -> &'static str {
        match self {
            GuidelineId::G1Contig => "G1_CONTIG",
            GuidelineId::G2PackSend => "G2_PACK_SEND",
            GuidelineId::G3RecvUnpack => "G3_RECV_UNPACK",
            GuidelineId::G4Normalize => "G4_NORMALIZE",
            GuidelineId::G4AltDescription => "G4_ALT_DESCRIPTION",
        }
    }

    pub fn is_g4(self) -> bool {
        matches!(
            self,
            GuidelineId::G4Normalize | GuidelineId::G4AltDescription
        )
    }
}

impl fmt::Display for GuidelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Both sides within the threshold of each other.
    Similar,
    /// The left side at most the threshold times slower than the right.
    NoSlower,
}

/// The pure part of a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Judgement {
    pub ratio: f64,
    pub severity: f64,
    pub violated: bool,
}

/// Compare two mean-of-median times under `relation`.
pub fn judge(lhs_mean: f64, rhs_mean: f64, relation: Relation, threshold: f64) -> Judgement {
    let ratio = if lhs_mean == rhs_mean {
        1.0
    } else {
        lhs_mean / rhs_mean
    };
    let severity = match relation {
        Relation::Similar => ratio.max(1.0 / ratio),
        Relation::NoSlower => ratio,
    };
    Judgement {
        ratio,
        severity,
        violated: severity > threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_examples() {
        let j = judge(10e-6, 12e-6, Relation::NoSlower, DEFAULT_THRESHOLD);
        assert!((j.ratio - 0.8333333).abs() < 1e-6);
        assert!(!j.violated);
        let j = judge(15e-6, 10e-6, Relation::NoSlower, DEFAULT_THRESHOLD);
        assert!((j.ratio - 1.5).abs() < 1e-12);
        assert!(j.violated);
    }

    #[test]
    fn similar_is_symmetric() {
        let a = judge(10.0, 12.0, Relation::Similar, 1.1);
        let b = judge(12.0, 10.0, Relation::Similar, 1.1);
        assert!((a.severity - b.severity).abs() < 1e-12);
        assert!(a.violated && b.violated);
    }

    #[test]
    fn equal_means() {
        assert_eq!(judge(0.0, 0.0, Relation::Similar, 1.1).ratio, 1.0);
        assert!(!judge(3.0, 3.0, Relation::NoSlower, 1.1).violated);
    }
}
