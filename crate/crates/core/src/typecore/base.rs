use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Predefined element types. Only `Byte` is semantically uninterpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BaseKind {
    #[serde(alias = "byte")]
    Byte,
    #[serde(alias = "char")]
    Char,
    #[serde(alias = "short")]
    Short,
    #[serde(alias = "int")]
    Int,
    #[serde(alias = "double")]
    Double,
}

impl BaseKind {
    pub const ALL: [BaseKind; 5] = [
        BaseKind::Byte,
        BaseKind::Char,
        BaseKind::Short,
        BaseKind::Int,
        BaseKind::Double,
    ];

    pub const fn size(self) -> u64 {
        match self {
            BaseKind::Byte | BaseKind::Char => 1,
            BaseKind::Short => 2,
            BaseKind::Int => 4,
            BaseKind::Double => 8,
        }
    }

    pub const fn alignment(self) -> u64 {
        // Natural alignment equals size for every entry of the table.
        self.size()
    }

    pub const fn name(self) -> &'static str {
        match self {
            BaseKind::Byte => "BYTE",
            BaseKind::Char => "CHAR",
            BaseKind::Short => "SHORT",
            BaseKind::Int => "INT",
            BaseKind::Double => "DOUBLE",
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown base type `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_natural_sizes() {
        let table: Vec<_> = BaseKind::ALL
            .iter()
            .map(|k| (k.name(), k.size(), k.alignment()))
            .collect();
        assert_eq!(
            table,
            vec![
                ("BYTE", 1, 1),
                ("CHAR", 1, 1),
                ("SHORT", 2, 2),
                ("INT", 4, 4),
                ("DOUBLE", 8, 8)
            ]
        );
        for k in BaseKind::ALL {
            assert_eq!(k.size() % k.alignment(), 0);
        }
    }

    #[test]
    fn parses_case_insensitively() {
        assert_eq!("int".parse::<BaseKind>().unwrap(), BaseKind::Int);
        assert_eq!("DOUBLE".parse::<BaseKind>().unwrap(), BaseKind::Double);
        assert!("float".parse::<BaseKind>().is_err());
    }

    #[test]
    fn json_names() {
        assert_eq!(
            serde_json::to_string(&BaseKind::Short).unwrap(),
            "\"SHORT\""
        );
        let k: BaseKind = serde_json::from_str("\"char\"").unwrap();
        assert_eq!(k, BaseKind::Char);
    }
}
