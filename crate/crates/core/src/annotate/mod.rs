//! Classification labels and everything that produces or aggregates them.
//!
//! Labels come from an [`AnnotationProvider`]: either an external service
//! speaking the JSON request/response contract ([`HttpProvider`]) or the
//! deterministic keyword-rule [`MockProvider`]. Provider output is always
//! validated against the request's closed label set before it becomes a
//! typed label.

mod aggregate;
mod classify;
pub mod cues;
mod labels;
mod provider;
mod sample;
mod store;
mod templates;

pub use aggregate::{classify_cluster, theme_distribution, ClusterRecord, ThemeDistribution, ThemeRow};
pub use classify::{annotate_batch, assign_topic, classify_stance, classify_theme, RetryPolicy};
pub use labels::{Stance, StanceLabel, StanceNames, Theme, ThemeLabel, Topic, TopicLabel};
pub use provider::{
    AnnotationContext, AnnotationProvider, AnnotationRequest, AnnotationResponse, HttpProvider, MockProvider,
    PROVIDER_TOKEN_ENV, PROVIDER_URL_ENV,
};
pub use sample::sample_user_posts;
pub use store::{LabelKind, LabelRecord, LabelStore};
pub use templates::{PromptTemplate, STANCE_TEMPLATE, THEME_TEMPLATE, TOPIC_TEMPLATE};
