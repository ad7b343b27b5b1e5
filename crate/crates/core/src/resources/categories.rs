use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Closed categorical vocabulary with a fixed one-hot order.
macro_rules! categorical {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            /// Position in the one-hot block.
            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let norm = s.trim().to_ascii_lowercase().replace([' ', '-'], "_");
                $name::ALL
                    .iter()
                    .copied()
                    .find(|c| c.label().eq_ignore_ascii_case(&norm))
                    .ok_or_else(|| format!("unknown {} `{}`", stringify!($name), s))
            }
        }
    };
}

categorical!(
    /// Noun plurality class (group D).
    Plurality {
        Plural => "plural",
        NoPlural => "no_plural",
        Singular => "singular",
        SingularAndPlural => "singular_and_plural",
        PluralActsSingular => "plural_acts_singular",
    }
);

categorical!(
    /// Dictionary word type (group P).
    WordType {
        Adverb => "adverb",
        Conjunction => "conjunction",
        Interjection => "interjection",
        Adjective => "adjective",
        Noun => "noun",
        PastParticiple => "past_participle",
        Pronoun => "pronoun",
        Verb => "verb",
        Other => "other",
    }
);

categorical!(
    /// Dictionary word status (group Q); `other` covers codes outside the six named statuses.
    WordStatus {
        Archaic => "archaic",
        Alien => "alien",
        Obsolete => "obsolete",
        Colloquial => "colloquial",
        Rare => "rare",
        Standard => "standard",
        Other => "other",
    }
);

categorical!(
    /// Wikipedia infobox type (group S).
    Infobox {
        Ambiguous => "ambiguous",
        BiographyVcard => "biography_vcard",
        Biota => "biota",
        Bordered => "bordered",
        CollapsibleAutocollapse => "collapsible_autocollapse",
        Default => "default",
        GeographyVcard => "geography_vcard",
        Hproduct => "hproduct",
        None => "none",
        Vcard => "vcard",
        VcardPlainlist => "vcard_plainlist",
        Vevent => "vevent",
        VeventHaudio => "vevent_haudio",
    }
);

/// Syllable stress pattern (group R): 2 strong, 1 medium, 0 unstressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StressPattern(u8);

impl StressPattern {
    pub const CODES: [&'static str; 14] = [
        "0", "01020", "010200", "02", "020", "0200", "10020", "102", "1020", "10200", "20", "200",
        "2000", "22",
    ];

    pub fn code(self) -> &'static str {
        Self::CODES[self.0 as usize]
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl FromStr for StressPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::CODES
            .iter()
            .position(|c| *c == s.trim())
            .map(|i| StressPattern(i as u8))
            .ok_or_else(|| format!("unknown stress pattern `{s}`"))
    }
}

impl fmt::Display for StressPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}
