use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::resources::{Infobox, Plurality, StressPattern, WordStatus, WordType};

use super::FeatureError;

pub const LAYOUT_VERSION: &str = "lcp-words-v1";
pub const EMBEDDING_DIM: usize = 300;

/// Feature group identifiers; `Presence` is the block of presence indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
    N,
    O,
    P,
    Q,
    R,
    S,
    T,
    #[serde(rename = "MRCPRES")]
    Presence,
}

impl GroupId {
    pub const VALUE_GROUPS: [GroupId; 20] = [
        GroupId::A,
        GroupId::B,
        GroupId::C,
        GroupId::D,
        GroupId::E,
        GroupId::F,
        GroupId::G,
        GroupId::H,
        GroupId::I,
        GroupId::J,
        GroupId::K,
        GroupId::L,
        GroupId::M,
        GroupId::N,
        GroupId::O,
        GroupId::P,
        GroupId::Q,
        GroupId::R,
        GroupId::S,
        GroupId::T,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupId::A => "A",
            GroupId::B => "B",
            GroupId::C => "C",
            GroupId::D => "D",
            GroupId::E => "E",
            GroupId::F => "F",
            GroupId::G => "G",
            GroupId::H => "H",
            GroupId::I => "I",
            GroupId::J => "J",
            GroupId::K => "K",
            GroupId::L => "L",
            GroupId::M => "M",
            GroupId::N => "N",
            GroupId::O => "O",
            GroupId::P => "P",
            GroupId::Q => "Q",
            GroupId::R => "R",
            GroupId::S => "S",
            GroupId::T => "T",
            GroupId::Presence => "MRCPRES",
        }
    }

    /// Numeric groups are averaged over the two words of a multi-word target;
    /// symbolic groups take the second word's value.
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            GroupId::C
                | GroupId::E
                | GroupId::F
                | GroupId::G
                | GroupId::H
                | GroupId::I
                | GroupId::J
                | GroupId::K
                | GroupId::L
                | GroupId::M
                | GroupId::T
        )
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupId {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        if t == "MRCPRES" {
            return Ok(GroupId::Presence);
        }
        GroupId::VALUE_GROUPS
            .iter()
            .copied()
            .find(|g| g.as_str() == t)
            .ok_or_else(|| FeatureError::UnknownGroup(s.to_string()))
    }
}

/// What a presence indicator tracks: one flag per resource-backed group, plus
/// frequency-list and embedding coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PresenceFlag {
    Group(GroupId),
    FrequencyList,
    Embedding,
}

impl PresenceFlag {
    pub const ALL: [PresenceFlag; 16] = [
        PresenceFlag::Group(GroupId::E),
        PresenceFlag::Group(GroupId::F),
        PresenceFlag::Group(GroupId::G),
        PresenceFlag::Group(GroupId::H),
        PresenceFlag::Group(GroupId::I),
        PresenceFlag::Group(GroupId::J),
        PresenceFlag::Group(GroupId::K),
        PresenceFlag::Group(GroupId::L),
        PresenceFlag::Group(GroupId::M),
        PresenceFlag::Group(GroupId::N),
        PresenceFlag::Group(GroupId::O),
        PresenceFlag::Group(GroupId::P),
        PresenceFlag::Group(GroupId::Q),
        PresenceFlag::Group(GroupId::R),
        PresenceFlag::FrequencyList,
        PresenceFlag::Embedding,
    ];

    /// The value group this flag belongs to; frequency-list coverage sits with A.
    pub fn owner(self) -> GroupId {
        match self {
            PresenceFlag::Group(g) => g,
            PresenceFlag::FrequencyList => GroupId::A,
            PresenceFlag::Embedding => GroupId::T,
        }
    }

    fn name(self) -> String {
        match self {
            PresenceFlag::Group(g) => format!("present.{g}"),
            PresenceFlag::FrequencyList => "present.freq_list".into(),
            PresenceFlag::Embedding => "present.T".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub layout_version: String,
    pub embedding_dim: usize,
    pub names: Vec<String>,
    pub group_index: BTreeMap<GroupId, Range<usize>>,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        Self::new(EMBEDDING_DIM)
    }
}

impl FeatureLayout {
    pub fn new(embedding_dim: usize) -> Self {
        let mut names = Vec::new();
        let mut group_index = BTreeMap::new();
        let mut push = |g: GroupId, cols: Vec<String>, names: &mut Vec<String>| {
            let start = names.len();
            names.extend(cols);
            group_index.insert(g, start..names.len());
        };
        let single = |s: &str| vec![s.to_string()];
        push(GroupId::A, single("A.frequent"), &mut names);
        push(GroupId::B, single("B.archaic"), &mut names);
        push(GroupId::C, single("C.length"), &mut names);
        push(
            GroupId::D,
            Plurality::ALL.iter().map(|p| format!("D.{p}")).collect(),
            &mut names,
        );
        for (g, n) in [
            (GroupId::E, "E.familiarity"),
            (GroupId::F, "F.concreteness"),
            (GroupId::G, "G.imageability"),
            (GroupId::H, "H.brown_freq"),
            (GroupId::I, "I.kf_freq"),
            (GroupId::J, "J.tl_freq"),
            (GroupId::K, "K.meanc"),
            (GroupId::L, "L.meanp"),
            (GroupId::M, "M.aoa"),
            (GroupId::N, "N.tq2q"),
            (GroupId::O, "O.tq22"),
        ] {
            push(g, single(n), &mut names);
        }
        push(
            GroupId::P,
            WordType::ALL.iter().map(|w| format!("P.{w}")).collect(),
            &mut names,
        );
        push(
            GroupId::Q,
            WordStatus::ALL.iter().map(|w| format!("Q.{w}")).collect(),
            &mut names,
        );
        push(
            GroupId::R,
            StressPattern::CODES
                .iter()
                .map(|c| format!("R.{c}"))
                .collect(),
            &mut names,
        );
        push(
            GroupId::S,
            Infobox::ALL.iter().map(|i| format!("S.{i}")).collect(),
            &mut names,
        );
        push(
            GroupId::T,
            (0..embedding_dim).map(|i| format!("T.{i:03}")).collect(),
            &mut names,
        );
        push(
            GroupId::Presence,
            PresenceFlag::ALL.iter().map(|p| p.name()).collect(),
            &mut names,
        );

        let layout_version = if embedding_dim == EMBEDDING_DIM {
            LAYOUT_VERSION.to_string()
        } else {
            format!("{LAYOUT_VERSION}+t{embedding_dim}")
        };
        FeatureLayout {
            layout_version,
            embedding_dim,
            names,
            group_index,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn range(&self, group: GroupId) -> Range<usize> {
        self.group_index[&group].clone()
    }

    pub fn presence_column(&self, flag: PresenceFlag) -> usize {
        let offset = PresenceFlag::ALL
            .iter()
            .position(|f| *f == flag)
            .expect("known flag");
        self.range(GroupId::Presence).start + offset
    }

    /// Group owning a column; presence flags report their owner group.
    pub fn group_of(&self, column: usize) -> GroupId {
        let pres = self.range(GroupId::Presence);
        if pres.contains(&column) {
            return PresenceFlag::ALL[column - pres.start].owner();
        }
        *self
            .group_index
            .iter()
            .find(|(_, r)| r.contains(&column))
            .map(|(g, _)| g)
            .expect("column inside layout")
    }

    /// A group's value columns plus its presence flags.
    pub fn columns_with_presence(&self, group: GroupId) -> Vec<usize> {
        let mut cols: Vec<usize> = self.range(group).collect();
        if group != GroupId::Presence {
            cols.extend(
                PresenceFlag::ALL
                    .iter()
                    .filter(|f| f.owner() == group)
                    .map(|f| self.presence_column(*f)),
            );
        }
        cols
    }

    /// Whether a column is averaged (rather than copied from the head word) for two-word targets.
    pub fn is_numeric_column(&self, column: usize) -> bool {
        let pres = self.range(GroupId::Presence);
        if pres.contains(&column) {
            PresenceFlag::ALL[column - pres.start].owner().is_numeric()
        } else {
            self.group_of(column).is_numeric()
        }
    }
}
