use sha2::{Digest, Sha256};

/// A versioned prompt template shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct PromptTemplate {
    pub id: &'static str,
    pub text: &'static str,
}

pub const THEME_TEMPLATE: PromptTemplate =
    PromptTemplate { id: "theme.v1", text: include_str!("../../templates/theme_v1.txt") };

pub const TOPIC_TEMPLATE: PromptTemplate =
    PromptTemplate { id: "topic.v1", text: include_str!("../../templates/topic_v1.txt") };

pub const STANCE_TEMPLATE: PromptTemplate =
    PromptTemplate { id: "stance.v1", text: include_str!("../../templates/stance_v1.txt") };

impl PromptTemplate {
    /// Hex SHA-256 of the template text; recorded with every label.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }

    /// Substitutes `{{name}}` placeholders. Unknown placeholders are left in place.
    pub fn render(&self, vars: &[(&str, &str)]) -> String {
        let mut out = self.text.to_string();
        for (name, value) in vars {
            out = out.replace(&format!("{{{{{name}}}}}"), value);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_fills_placeholders() {
        let s = STANCE_TEMPLATE.render(&[("topic", "AI"), ("labels", "- a"), ("posts", "x")]);
        assert!(s.contains("\"AI\""));
        assert!(!s.contains("{{"));
    }

    #[test]
    fn hashes_are_stable_and_distinct() {
        assert_eq!(THEME_TEMPLATE.hash().len(), 64);
        assert_ne!(THEME_TEMPLATE.hash(), TOPIC_TEMPLATE.hash());
        assert_eq!(THEME_TEMPLATE.hash(), THEME_TEMPLATE.hash());
    }
}
