//! Physical operator kinds and the backbone set.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

/// Physical operator kind. Unknown names round-trip through [`OperatorKind::Other`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OperatorKind {
    TableScan,
    IndexScan,
    IndexSeek,
    Filter,
    Sort,
    HashJoin,
    NestedLoopJoin,
    MergeJoin,
    Aggregate,
    Other(String),
}

impl OperatorKind {
    /// Every named (non-`Other`) kind, in declaration order.
    pub const NAMED: [OperatorKind; 9] = [
        OperatorKind::TableScan,
        OperatorKind::IndexScan,
        OperatorKind::IndexSeek,
        OperatorKind::Filter,
        OperatorKind::Sort,
        OperatorKind::HashJoin,
        OperatorKind::NestedLoopJoin,
        OperatorKind::MergeJoin,
        OperatorKind::Aggregate,
    ];

    pub fn name(&self) -> &str {
        match self {
            OperatorKind::TableScan => "TableScan",
            OperatorKind::IndexScan => "IndexScan",
            OperatorKind::IndexSeek => "IndexSeek",
            OperatorKind::Filter => "Filter",
            OperatorKind::Sort => "Sort",
            OperatorKind::HashJoin => "HashJoin",
            OperatorKind::NestedLoopJoin => "NestedLoopJoin",
            OperatorKind::MergeJoin => "MergeJoin",
            OperatorKind::Aggregate => "Aggregate",
            OperatorKind::Other(name) => name,
        }
    }

    /// Maps an enumeration name to a kind; anything unrecognised becomes `Other(name)`.
    pub fn from_name(name: &str) -> Self {
        Self::NAMED
            .iter()
            .find(|k| k.name() == name)
            .cloned()
            .unwrap_or_else(|| OperatorKind::Other(name.to_string()))
    }

    /// Access-path operators: table scans, index scans and index seeks.
    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            OperatorKind::TableScan | OperatorKind::IndexScan | OperatorKind::IndexSeek
        )
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = core::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(OperatorKind::from_name(s))
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for OperatorKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for OperatorKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = <String as serde::Deserialize>::deserialize(deserializer)?;
        Ok(OperatorKind::from_name(&name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("backbone operator set must not be empty")]
pub struct EmptyBackbone;

/// The operator kinds that get external models (the set 𝒪 of backbone operators).
///
/// Never empty. [`Backbone::all`] matches every kind, including `Other` names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Backbone {
    kinds: BTreeSet<OperatorKind>,
    everything: bool,
}

impl Backbone {
    pub fn new<I: IntoIterator<Item = OperatorKind>>(kinds: I) -> Result<Self, EmptyBackbone> {
        let kinds: BTreeSet<_> = kinds.into_iter().collect();
        if kinds.is_empty() {
            return Err(EmptyBackbone);
        }
        Ok(Backbone {
            kinds,
            everything: false,
        })
    }

    /// Table scans, index scans and index seeks.
    pub fn leaves() -> Self {
        Backbone {
            kinds: OperatorKind::NAMED
                .iter()
                .filter(|k| k.is_leaf())
                .cloned()
                .collect(),
            everything: false,
        }
    }

    /// Every operator kind is backbone; the internal set is empty.
    pub fn all() -> Self {
        Backbone {
            kinds: OperatorKind::NAMED.iter().cloned().collect(),
            everything: true,
        }
    }

    pub fn contains(&self, kind: &OperatorKind) -> bool {
        self.everything || self.kinds.contains(kind)
    }

    /// Explicitly listed kinds (for [`Backbone::all`], the named kinds).
    pub fn kinds(&self) -> impl Iterator<Item = &OperatorKind> {
        self.kinds.iter()
    }

    pub fn is_all(&self) -> bool {
        self.everything
    }
}

impl Default for Backbone {
    fn default() -> Self {
        Backbone::leaves()
    }
}
