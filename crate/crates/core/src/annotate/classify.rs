use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::{Stance, StanceLabel, StanceNames, Theme, ThemeLabel, Topic, TopicLabel};
use super::provider::{AnnotationContext, AnnotationProvider, AnnotationRequest};
use super::templates::{PromptTemplate, STANCE_TEMPLATE, THEME_TEMPLATE, TOPIC_TEMPLATE};
use crate::ingest::PostRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Total attempts per request, including the first.
    pub max_attempts: usize,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3 }
    }
}

fn bullet_list<S: AsRef<str>>(items: &[S]) -> String {
    items.iter().map(|s| format!("- {}", s.as_ref())).collect::<Vec<_>>().join("\n")
}

fn build_request(
    template: &PromptTemplate,
    posts: Vec<String>,
    topic: Option<Topic>,
    label_set: Vec<String>,
    extra: &[(&str, &str)],
) -> AnnotationRequest {
    let labels = bullet_list(&label_set);
    let joined = posts.iter().enumerate().map(|(i, p)| format!("[{}] {p}", i + 1)).collect::<Vec<_>>().join("\n");
    let topic_name = topic.map(|t| t.as_str()).unwrap_or_default();
    let mut vars = vec![("labels", labels.as_str()), ("posts", joined.as_str()), ("topic", topic_name)];
    vars.extend_from_slice(extra);
    AnnotationRequest {
        template_id: template.id.to_string(),
        context: AnnotationContext {
            prompt: template.render(&vars),
            posts,
            topic: topic.map(|t| t.slug().to_string()),
        },
        label_set,
    }
}

/// Sends `request` until the provider answers with a member of the label
/// set, or the attempts run out.
fn ask<T>(
    provider: &dyn AnnotationProvider,
    request: &AnnotationRequest,
    retry: &RetryPolicy,
    parse: impl Fn(&str) -> Option<T>,
) -> Result<T> {
    let attempts = retry.max_attempts.max(1);
    let mut last = String::new();
    for _ in 0..attempts {
        let raw = provider.annotate(request)?;
        let answer = raw.trim();
        if request.label_set.iter().any(|l| l == answer) {
            if let Some(v) = parse(answer) {
                return Ok(v);
            }
        }
        last = raw;
    }
    Err(Error::Annotation { attempts, message: format!("last answer `{last}` is outside the label set") })
}

pub fn classify_theme(post: &PostRecord, provider: &dyn AnnotationProvider, retry: &RetryPolicy) -> Result<ThemeLabel> {
    if post.text.trim().is_empty() {
        return Err(Error::Precondition(format!("post {} has empty text", post.uri)));
    }
    let labels: Vec<String> = Theme::ALL.iter().map(|t| t.as_str().to_string()).collect();
    let descriptions =
        Theme::ALL.iter().map(|t| format!("- {}: {}", t.as_str(), t.description())).collect::<Vec<_>>().join("\n");
    let request = build_request(
        &THEME_TEMPLATE,
        vec![post.text.clone()],
        None,
        labels,
        &[("descriptions", descriptions.as_str())],
    );
    let theme = ask(provider, &request, retry, |s| Theme::parse(s).ok())?;
    Ok(ThemeLabel { post_uri: post.uri.clone(), theme })
}

/// Assigns a political post to a parent topic (or `Other`).
pub fn assign_topic(
    post: &PostRecord,
    theme: &ThemeLabel,
    provider: &dyn AnnotationProvider,
    retry: &RetryPolicy,
) -> Result<TopicLabel> {
    if theme.post_uri != post.uri {
        return Err(Error::Precondition(format!("theme label is for {}, not {}", theme.post_uri, post.uri)));
    }
    if !theme.theme.is_political() {
        return Err(Error::Precondition(format!("post {} is not political", post.uri)));
    }
    let labels: Vec<String> = Topic::ALL.iter().map(|t| t.as_str().to_string()).collect();
    let request = build_request(&TOPIC_TEMPLATE, vec![post.text.clone()], None, labels, &[]);
    let topic = ask(provider, &request, retry, |s| Topic::parse(s).ok())?;
    Ok(TopicLabel { post_uri: post.uri.clone(), topic })
}

pub fn classify_stance(
    user: &str,
    sample: &[PostRecord],
    topic: Topic,
    names: &StanceNames,
    provider: &dyn AnnotationProvider,
    retry: &RetryPolicy,
) -> Result<StanceLabel> {
    if sample.is_empty() {
        return Err(Error::Precondition(format!("no sampled posts for user {user}")));
    }
    let request = build_request(
        &STANCE_TEMPLATE,
        sample.iter().map(|p| p.text.clone()).collect(),
        Some(topic),
        names.label_set(),
        &[],
    );
    let stance: Stance = ask(provider, &request, retry, |s| names.parse_display(s))?;
    Ok(StanceLabel { user: user.to_string(), topic, stance })
}

/// Runs `f` over `items` with at most `in_flight` concurrent calls.
/// Results come back in input order.
pub fn annotate_batch<T, R, F>(items: &[T], in_flight: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new().num_threads(in_flight.max(1)).build().expect("thread pool");
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::annotate::provider::MockProvider;

    fn post(text: &str) -> PostRecord {
        PostRecord {
            uri: format!("at://{}", text.len()),
            author: "did:a".into(),
            text: text.into(),
            langs: vec!["en".into()],
            created_at: "2025-02-01T00:00:00Z".parse().unwrap(),
            repost_count: 1,
        }
    }

    /// Answers garbage for the first `bad` calls, then defers to the mock.
    struct Flaky {
        bad: usize,
        calls: AtomicUsize,
    }

    impl AnnotationProvider for Flaky {
        fn annotate(&self, request: &AnnotationRequest) -> Result<String> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.bad {
                Ok("I think it's about politics?".into())
            } else {
                MockProvider.annotate(request)
            }
        }
    }

    struct Down;

    impl AnnotationProvider for Down {
        fn annotate(&self, _: &AnnotationRequest) -> Result<String> {
            Err(Error::Transport("connection refused".into()))
        }
    }

    #[test]
    fn tariff_post_is_economy() {
        let l = classify_theme(&post("The tariff hits farmers"), &MockProvider, &RetryPolicy::default()).unwrap();
        assert_eq!(l.theme, Theme::EconomyTradeLabor);
    }

    #[test]
    fn empty_text_is_precondition_error() {
        let r = classify_theme(&post("   "), &MockProvider, &RetryPolicy::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn invalid_answers_are_retried() {
        let p = Flaky { bad: 2, calls: AtomicUsize::new(0) };
        let l = classify_theme(&post("tariff"), &p, &RetryPolicy { max_attempts: 3 }).unwrap();
        assert_eq!(l.theme, Theme::EconomyTradeLabor);
        assert_eq!(p.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn exhausted_retries_give_annotation_error() {
        let p = Flaky { bad: 10, calls: AtomicUsize::new(0) };
        let r = classify_theme(&post("tariff"), &p, &RetryPolicy { max_attempts: 3 });
        assert!(matches!(r, Err(Error::Annotation { attempts: 3, .. })));
    }

    #[test]
    fn transport_errors_propagate() {
        let r = classify_theme(&post("tariff"), &Down, &RetryPolicy::default());
        assert!(matches!(r, Err(Error::Transport(_))));
    }

    #[test]
    fn topic_assignment() {
        let p = post("Zelensky speaks in Kyiv");
        let theme = classify_theme(&p, &MockProvider, &RetryPolicy::default()).unwrap();
        let t = assign_topic(&p, &theme, &MockProvider, &RetryPolicy::default()).unwrap();
        assert_eq!(t.topic, Topic::RussiaUkraine);

        let q = post("Parliament debates the war budget");
        let theme = ThemeLabel { post_uri: q.uri.clone(), theme: Theme::DefenseInternationalAffairs };
        assert_eq!(assign_topic(&q, &theme, &MockProvider, &RetryPolicy::default()).unwrap().topic, Topic::Other);
    }

    #[test]
    fn apolitical_post_cannot_get_topic() {
        let p = post("my cat is asleep");
        let theme = ThemeLabel { post_uri: p.uri.clone(), theme: Theme::NonPolitical };
        assert!(matches!(
            assign_topic(&p, &theme, &MockProvider, &RetryPolicy::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn stance_majority_and_neutral_default() {
        let names = StanceNames::defaults(Topic::RussiaUkraine);
        let mut sample: Vec<PostRecord> = (0..7).map(|_| post("#StandWithUkraine")).collect();
        sample.extend((0..3).map(|_| post("reports from the front line")));
        let l = classify_stance("did:u", &sample, Topic::RussiaUkraine, &names, &MockProvider, &RetryPolicy::default())
            .unwrap();
        assert_eq!(l.stance, Stance::For);
        assert_eq!(names.display(l.stance), "supports_ukraine");

        let quiet = vec![post("weather update")];
        let l = classify_stance("did:u", &quiet, Topic::RussiaUkraine, &names, &MockProvider, &RetryPolicy::default())
            .unwrap();
        assert_eq!(l.stance, Stance::Neutral);
        assert!(classify_stance("did:u", &[], Topic::RussiaUkraine, &names, &MockProvider, &RetryPolicy::default())
            .is_err());
    }

    #[test]
    fn batch_preserves_order() {
        let items: Vec<u32> = (0..50).collect();
        let out = annotate_batch(&items, 4, |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
