//! Keyword cue tables behind [`MockProvider`](super::MockProvider).
//!
//! Matching is token based: text is lower-cased and split on anything that
//! is not alphanumeric, and a cue matches when its tokens appear
//! contiguously. `#StandWithUkraine` therefore matches the cue
//! `standwithukraine`, and `ai` does not match inside `said`.

use super::labels::{Stance, Theme, Topic};

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase().split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_string).collect()
}

/// Number of occurrences of `cue` (a space-separated phrase) in `tokens`.
pub fn count_cue(tokens: &[String], cue: &str) -> usize {
    let parts: Vec<&str> = cue.split(' ').collect();
    if parts.is_empty() || tokens.len() < parts.len() {
        return 0;
    }
    tokens.windows(parts.len()).filter(|w| w.iter().zip(&parts).all(|(t, p)| t == p)).count()
}

pub fn count_cues(tokens: &[String], cues: &[&str]) -> usize {
    cues.iter().map(|c| count_cue(tokens, c)).sum()
}

pub fn theme_cues(theme: Theme) -> &'static [&'static str] {
    match theme {
        Theme::CivilRights => {
            &["rights", "equality", "discrimination", "dei", "diversity", "lgbtq", "trans", "pride", "civil liberties"]
        }
        Theme::DefenseInternationalAffairs => &[
            "war",
            "troops",
            "nato",
            "ceasefire",
            "zelensky",
            "ukraine",
            "russia",
            "putin",
            "kyiv",
            "gaza",
            "israel",
            "palestine",
            "hamas",
            "military",
            "missile",
        ],
        Theme::EconomyTradeLabor => {
            &["tariff", "tariffs", "trade", "jobs", "wages", "union", "economy", "inflation", "prices"]
        }
        Theme::GovernmentOperations => &[
            "administration",
            "trump",
            "musk",
            "doge",
            "federal",
            "congress",
            "executive order",
            "government",
            "white house",
            "election",
        ],
        Theme::InfrastructureEnvironment => {
            &["wildfire", "wildfires", "climate", "environment", "transit", "infrastructure", "fire", "fires"]
        }
        Theme::LawCrimeJustice => &["court", "judge", "lawsuit", "police", "crime", "justice", "ruling", "illegal"],
        Theme::ScienceTechnologyEnergy => {
            &["ai", "technology", "tiktok", "chatgpt", "science", "energy", "research", "openai"]
        }
        Theme::SocialPolicy => &["healthcare", "medicaid", "school", "schools", "education", "welfare"],
        Theme::NonPolitical => &[],
    }
}

pub fn topic_cues(topic: Topic) -> &'static [&'static str] {
    match topic {
        Topic::TrumpAdministration => &["trump", "maga", "white house"],
        Topic::ElonMusk => &["musk", "doge", "tesla", "elon"],
        Topic::UsCanada => &["canada", "canadian", "trudeau", "tariff", "tariffs"],
        Topic::LaWildfires => &["wildfire", "wildfires", "palisades", "los angeles", "la fires"],
        Topic::DeiPrograms => &["dei", "diversity", "inclusion"],
        Topic::TiktokBan => &["tiktok"],
        Topic::IsraelPalestine => &["gaza", "israel", "palestine", "hamas", "netanyahu"],
        Topic::RussiaUkraine => &["ukraine", "russia", "zelensky", "putin", "kyiv"],
        Topic::LgbtqRights => &["lgbtq", "trans", "pride", "queer"],
        Topic::Ai => &["ai", "chatgpt", "openai", "llm"],
        Topic::Other => &[],
    }
}

/// `(for cues, against cues)` for a topic's stance axis.
pub fn stance_cues(topic: Topic) -> (&'static [&'static str], &'static [&'static str]) {
    match topic {
        Topic::TrumpAdministration => {
            (&["maga", "support trump", "great president"], &["resist", "impeach", "oppose trump", "worst president"])
        }
        Topic::ElonMusk => {
            (&["support musk", "doge works", "thank you elon"], &["oppose musk", "musk out", "fire musk"])
        }
        Topic::UsCanada => (&["elbows up", "buy canadian", "support canada"], &["51st state", "support tariffs"]),
        Topic::LaWildfires => {
            (&["thank firefighters", "support the response"], &["failed response", "blame the mayor"])
        }
        Topic::DeiPrograms => (&["support dei", "diversity matters"], &["end dei", "oppose dei"]),
        Topic::TiktokBan => (&["ban tiktok", "support the ban"], &["save tiktok", "oppose the ban"]),
        Topic::IsraelPalestine => (
            &["free palestine", "support palestine", "ceasefire now"],
            &["stand with israel", "support israel", "bring them home"],
        ),
        Topic::RussiaUkraine => (
            &["standwithukraine", "slava ukraini", "support ukraine"],
            &["istandwithrussia", "nato provoked", "support russia"],
        ),
        Topic::LgbtqRights => {
            (&["trans rights", "support lgbtq", "love is love"], &["oppose lgbtq", "protect kids from"])
        }
        Topic::Ai => (&["ai helps", "support ai"], &["ban ai", "oppose ai", "ai slop"]),
        Topic::Other => (&[], &[]),
    }
}

/// Most-cued theme; ties go to the earlier theme, no cue means non-political.
pub fn theme_for(text: &str) -> Theme {
    let tokens = tokenize(text);
    best_by_cues(Theme::ALL.iter().copied(), |t| count_cues(&tokens, theme_cues(t))).unwrap_or(Theme::NonPolitical)
}

/// Most-cued parent topic; no cue means `Other`.
pub fn topic_for(text: &str) -> Topic {
    let tokens = tokenize(text);
    best_by_cues(Topic::PARENTS.iter().copied(), |t| count_cues(&tokens, topic_cues(t))).unwrap_or(Topic::Other)
}

/// Majority-cue rule: each post leans for or against by its cue balance,
/// and the user takes the side with more leaning posts. Balanced or
/// cue-free samples are neutral.
pub fn stance_for<S: AsRef<str>>(topic: Topic, posts: &[S]) -> Stance {
    let (pro, con) = stance_cues(topic);
    let mut for_posts = 0usize;
    let mut against_posts = 0usize;
    for p in posts {
        let tokens = tokenize(p.as_ref());
        let balance = count_cues(&tokens, pro) as i64 - count_cues(&tokens, con) as i64;
        match balance.signum() {
            1 => for_posts += 1,
            -1 => against_posts += 1,
            _ => {}
        }
    }
    match for_posts.cmp(&against_posts) {
        std::cmp::Ordering::Greater => Stance::For,
        std::cmp::Ordering::Less => Stance::Against,
        std::cmp::Ordering::Equal => Stance::Neutral,
    }
}

fn best_by_cues<T: Copy>(items: impl Iterator<Item = T>, score: impl Fn(T) -> usize) -> Option<T> {
    let mut best: Option<(T, usize)> = None;
    for item in items {
        let s = score(item);
        if s > 0 && best.map_or(true, |(_, b)| s > b) {
            best = Some((item, s));
        }
    }
    best.map(|(t, _)| t)
}
