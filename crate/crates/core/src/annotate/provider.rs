use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::cues;
use super::labels::{Theme, Topic};
use crate::{Error, Result};

pub const PROVIDER_URL_ENV: &str = "POLARNET_PROVIDER_URL";
pub const PROVIDER_TOKEN_ENV: &str = "POLARNET_PROVIDER_TOKEN";

/// Substituted context sent along with a template id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationContext {
    /// The fully rendered prompt.
    pub prompt: String,
    /// Raw post texts the prompt was rendered from.
    pub posts: Vec<String>,
    /// Topic slug for topic-conditioned requests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<String>,
}

/// Wire request: `{template_id, context, label_set}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRequest {
    pub template_id: String,
    pub context: AnnotationContext,
    pub label_set: Vec<String>,
}

/// Wire response: `{label}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationResponse {
    pub label: String,
}

/// Something that answers an annotation request with one raw label.
///
/// Implementations may return labels outside the request's label set;
/// callers validate and retry. `Err` is reserved for transport failures.
pub trait AnnotationProvider: Send + Sync {
    fn annotate(&self, request: &AnnotationRequest) -> Result<String>;
}

impl<P: AnnotationProvider + ?Sized> AnnotationProvider for &P {
    fn annotate(&self, request: &AnnotationRequest) -> Result<String> {
        (**self).annotate(request)
    }
}

impl<P: AnnotationProvider + ?Sized> AnnotationProvider for Box<P> {
    fn annotate(&self, request: &AnnotationRequest) -> Result<String> {
        (**self).annotate(request)
    }
}

/// Deterministic provider driven by the keyword tables in [`cues`].
///
/// It dispatches on the template family (`theme.*`, `topic.*`, `stance.*`)
/// and is a pure function of the request. Stance requests are answered
/// from the label set by position (`[for, neutral, against]`).
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl AnnotationProvider for MockProvider {
    fn annotate(&self, request: &AnnotationRequest) -> Result<String> {
        let family = request.template_id.split('.').next().unwrap_or_default();
        let text = request.context.posts.join("\n");
        Ok(match family {
            "theme" => cues::theme_for(&text).as_str().to_string(),
            "topic" => cues::topic_for(&text).as_str().to_string(),
            "stance" => {
                let topic = request.context.topic.as_deref().and_then(|t| Topic::parse(t).ok()).unwrap_or(Topic::Other);
                let stance = cues::stance_for(topic, &request.context.posts);
                request.label_set.get(stance.index()).cloned().unwrap_or_else(|| stance.as_str().to_string())
            }
            // Unknown family: an answer outside any label set.
            _ => Theme::NonPolitical.as_str().to_lowercase(),
        })
    }
}

/// Client for an external annotation service.
///
/// POSTs the request as JSON to `endpoint` and expects `{"label": "..."}`.
/// An auth token, when configured, is sent as a bearer token.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        Self { endpoint: endpoint.into(), token, agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }

    /// Reads the endpoint and token from the environment, falling back to
    /// the given endpoint.
    pub fn from_env(fallback_endpoint: Option<&str>, timeout: Duration) -> Result<Self> {
        let endpoint = std::env::var(PROVIDER_URL_ENV)
            .ok()
            .or_else(|| fallback_endpoint.map(str::to_string))
            .ok_or_else(|| Error::Config(format!("no provider endpoint; set {PROVIDER_URL_ENV}")))?;
        Ok(Self::new(endpoint, std::env::var(PROVIDER_TOKEN_ENV).ok(), timeout))
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl AnnotationProvider for HttpProvider {
    fn annotate(&self, request: &AnnotationRequest) -> Result<String> {
        let mut call = self.agent.post(&self.endpoint);
        if let Some(token) = &self.token {
            call = call.set("Authorization", &format!("Bearer {token}"));
        }
        let response = match call.send_json(request) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) if code < 500 => r,
            Err(e) => return Err(Error::Transport(e.to_string())),
        };
        // A body that is not the documented shape is an invalid answer, not
        // a transport failure; the caller's retry loop handles it.
        let body = response.into_string().map_err(|e| Error::Transport(e.to_string()))?;
        Ok(serde_json::from_str::<AnnotationResponse>(&body).map(|r| r.label).unwrap_or(body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(family: &str, posts: &[&str], topic: Option<&str>, labels: Vec<String>) -> AnnotationRequest {
        AnnotationRequest {
            template_id: format!("{family}.v1"),
            context: AnnotationContext {
                prompt: String::new(),
                posts: posts.iter().map(|s| s.to_string()).collect(),
                topic: topic.map(str::to_string),
            },
            label_set: labels,
        }
    }

    #[test]
    fn mock_is_pure() {
        let r = req("theme", &["tariff talk"], None, vec![]);
        assert_eq!(MockProvider.annotate(&r).unwrap(), "Economy, Trade & Labor");
        assert_eq!(MockProvider.annotate(&r).unwrap(), MockProvider.annotate(&r).unwrap());
    }

    #[test]
    fn mock_stance_uses_label_positions() {
        let labels = vec!["yes".to_string(), "meh".to_string(), "no".to_string()];
        let r = req("stance", &["slava ukraini"], Some("russia-ukraine"), labels);
        assert_eq!(MockProvider.annotate(&r).unwrap(), "yes");
    }

    #[test]
    fn wire_format() {
        let r = req("topic", &["x"], None, vec!["AI".into()]);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["template_id"], "topic.v1");
        assert_eq!(v["label_set"][0], "AI");
        assert!(v["context"]["prompt"].is_string());
        assert!(v["context"].get("topic").is_none());
    }

    #[test]
    fn unreachable_endpoint_is_transport_error() {
        let p = HttpProvider::new("http://127.0.0.1:9/annotate", None, Duration::from_millis(300));
        let r = req("theme", &["x"], None, vec![]);
        assert!(matches!(p.annotate(&r), Err(Error::Transport(_))));
    }
}
