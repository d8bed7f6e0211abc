use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

macro_rules! string_enum_serde {
    ($ty:ident) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                $ty::parse(&s).map_err(serde::de::Error::custom)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl std::str::FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $ty::parse(s)
            }
        }
    };
}

/// Policy-area themes (adapted from the Comparative Agendas Project
/// codebook) plus the non-political bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theme {
    CivilRights,
    DefenseInternationalAffairs,
    EconomyTradeLabor,
    GovernmentOperations,
    InfrastructureEnvironment,
    LawCrimeJustice,
    ScienceTechnologyEnergy,
    SocialPolicy,
    NonPolitical,
}

impl Theme {
    pub const ALL: [Theme; 9] = [
        Theme::CivilRights,
        Theme::DefenseInternationalAffairs,
        Theme::EconomyTradeLabor,
        Theme::GovernmentOperations,
        Theme::InfrastructureEnvironment,
        Theme::LawCrimeJustice,
        Theme::ScienceTechnologyEnergy,
        Theme::SocialPolicy,
        Theme::NonPolitical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theme::CivilRights => "Civil Rights",
            Theme::DefenseInternationalAffairs => "Defense & International Affairs",
            Theme::EconomyTradeLabor => "Economy, Trade & Labor",
            Theme::GovernmentOperations => "Government Operations & Administration",
            Theme::InfrastructureEnvironment => "Infrastructure & Environment",
            Theme::LawCrimeJustice => "Law, Crime & Justice",
            Theme::ScienceTechnologyEnergy => "Science, Technology & Energy",
            Theme::SocialPolicy => "Social Policy",
            Theme::NonPolitical => "Non-Political",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Theme::CivilRights => "civil liberties, equality, and the rights of individuals or groups",
            Theme::DefenseInternationalAffairs => "national defense, security, and international relations",
            Theme::EconomyTradeLabor => "economic policy, employment, labor markets, and trade",
            Theme::GovernmentOperations => "how government functions, is organised, and is administered",
            Theme::InfrastructureEnvironment => "public infrastructure, transportation, and environmental protection",
            Theme::LawCrimeJustice => "legal systems, crime, law enforcement, and the courts",
            Theme::ScienceTechnologyEnergy => "scientific research, technological development, and energy policy",
            Theme::SocialPolicy => "welfare, health, education, and other social services",
            Theme::NonPolitical => "anything not related to politics or policy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::OutOfVocabulary { vocabulary: "theme", label: s.to_string() })
    }

    pub fn is_political(self) -> bool {
        self != Theme::NonPolitical
    }
}

string_enum_serde!(Theme);

/// Parent political topics, plus `Other` for political posts that fit none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Topic {
    TrumpAdministration,
    ElonMusk,
    UsCanada,
    LaWildfires,
    DeiPrograms,
    TiktokBan,
    IsraelPalestine,
    RussiaUkraine,
    LgbtqRights,
    Ai,
    Other,
}

impl Topic {
    /// The ten analysed topics, without `Other`.
    pub const PARENTS: [Topic; 10] = [
        Topic::TrumpAdministration,
        Topic::ElonMusk,
        Topic::UsCanada,
        Topic::LaWildfires,
        Topic::DeiPrograms,
        Topic::TiktokBan,
        Topic::IsraelPalestine,
        Topic::RussiaUkraine,
        Topic::LgbtqRights,
        Topic::Ai,
    ];

    pub const ALL: [Topic; 11] = [
        Topic::TrumpAdministration,
        Topic::ElonMusk,
        Topic::UsCanada,
        Topic::LaWildfires,
        Topic::DeiPrograms,
        Topic::TiktokBan,
        Topic::IsraelPalestine,
        Topic::RussiaUkraine,
        Topic::LgbtqRights,
        Topic::Ai,
        Topic::Other,
    ];

    /// File-system and command-line identifier.
    pub fn slug(self) -> &'static str {
        match self {
            Topic::TrumpAdministration => "trump",
            Topic::ElonMusk => "musk",
            Topic::UsCanada => "us-canada",
            Topic::LaWildfires => "la-wildfires",
            Topic::DeiPrograms => "dei",
            Topic::TiktokBan => "tiktok",
            Topic::IsraelPalestine => "israel-palestine",
            Topic::RussiaUkraine => "russia-ukraine",
            Topic::LgbtqRights => "lgbtq",
            Topic::Ai => "ai",
            Topic::Other => "other",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Topic::TrumpAdministration => "Trump administration",
            Topic::ElonMusk => "Elon Musk",
            Topic::UsCanada => "US-Canada relations",
            Topic::LaWildfires => "LA wildfires",
            Topic::DeiPrograms => "DEI programs",
            Topic::TiktokBan => "TikTok ban",
            Topic::IsraelPalestine => "Israel-Palestine",
            Topic::RussiaUkraine => "Russia-Ukraine",
            Topic::LgbtqRights => "LGBTQ+ rights",
            Topic::Ai => "AI",
            Topic::Other => "Other",
        }
    }

    /// Accepts either the display name or the slug.
    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s || t.slug() == s)
            .ok_or_else(|| Error::OutOfVocabulary { vocabulary: "topic", label: s.to_string() })
    }
}

string_enum_serde!(Topic);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stance {
    For,
    Neutral,
    Against,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::For, Stance::Neutral, Stance::Against];

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::For => "for",
            Stance::Neutral => "neutral",
            Stance::Against => "against",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::OutOfVocabulary { vocabulary: "stance", label: s.to_string() })
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

string_enum_serde!(Stance);

/// Topic-specific display names for the two opposing stances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceNames {
    pub for_name: String,
    pub against_name: String,
}

impl StanceNames {
    pub fn new(for_name: &str, against_name: &str) -> Self {
        Self { for_name: for_name.into(), against_name: against_name.into() }
    }

    pub fn defaults(topic: Topic) -> Self {
        match topic {
            Topic::TrumpAdministration => Self::new("supports_trump", "opposes_trump"),
            Topic::ElonMusk => Self::new("supports_musk", "opposes_musk"),
            Topic::UsCanada => Self::new("supports_canada", "supports_us"),
            Topic::LaWildfires => Self::new("supports_response", "criticizes_response"),
            Topic::DeiPrograms => Self::new("supports_dei", "opposes_dei"),
            Topic::TiktokBan => Self::new("supports_ban", "opposes_ban"),
            Topic::IsraelPalestine => Self::new("supports_palestine", "supports_israel"),
            Topic::RussiaUkraine => Self::new("supports_ukraine", "supports_russia"),
            Topic::LgbtqRights => Self::new("supports_lgbtq", "opposes_lgbtq"),
            Topic::Ai => Self::new("supports_ai", "opposes_ai"),
            Topic::Other => Self::new("for", "against"),
        }
    }

    pub fn default_table() -> BTreeMap<Topic, StanceNames> {
        Topic::PARENTS.into_iter().map(|t| (t, Self::defaults(t))).collect()
    }

    pub fn display(&self, stance: Stance) -> &str {
        match stance {
            Stance::For => &self.for_name,
            Stance::Neutral => "neutral",
            Stance::Against => &self.against_name,
        }
    }

    /// Label set offered to a provider, in `[for, neutral, against]` order.
    pub fn label_set(&self) -> Vec<String> {
        Stance::ALL.iter().map(|s| self.display(*s).to_string()).collect()
    }

    pub fn parse_display(&self, label: &str) -> Option<Stance> {
        Stance::ALL.into_iter().find(|s| self.display(*s) == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeLabel {
    pub post_uri: String,
    pub theme: Theme,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicLabel {
    pub post_uri: String,
    pub topic: Topic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StanceLabel {
    pub user: String,
    pub topic: Topic,
    pub stance: Stance,
}
