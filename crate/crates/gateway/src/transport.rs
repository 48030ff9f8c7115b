//! The wire layer: a trait so tests can intercept traffic, plus the
//! reqwest-backed implementation speaking chat-completion JSON.

use async_trait::async_trait;
use serde_json::Value;
use thiserror::Error;

use crate::EndpointConfig;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("rate limited")]
    RateLimited,
    #[error("transient failure: {0}")]
    Retryable(String),
    #[error("request rejected: {0}")]
    Fatal(String),
}

#[async_trait]
pub trait Transport: Send + Sync {
    async fn send(&self, endpoint: &EndpointConfig, body: Value) -> Result<Value, TransportError>;
}

/// HTTPS transport for chat-completion endpoints.
pub struct HttpTransport {
    client: reqwest::Client,
}

impl HttpTransport {
    pub fn new() -> Self {
        HttpTransport { client: reqwest::Client::new() }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

#[async_trait]
impl Transport for HttpTransport {
    async fn send(&self, endpoint: &EndpointConfig, body: Value) -> Result<Value, TransportError> {
        let mut request = self.client.post(&endpoint.url).json(&body);
        if let Some(key) = &endpoint.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .await
            .map_err(|e| TransportError::Retryable(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 {
            return Err(TransportError::RateLimited);
        }
        if status.is_server_error() {
            return Err(TransportError::Retryable(format!("status {status}")));
        }
        if !status.is_success() {
            let body = response.text().await.unwrap_or_default();
            return Err(TransportError::Fatal(format!("status {status}: {body}")));
        }
        response
            .json()
            .await
            .map_err(|e| TransportError::Fatal(format!("invalid JSON body: {e}")))
    }
}

/// Pulls the response texts out of a chat-completion reply body.
pub fn extract_choices(body: &Value) -> Result<Vec<String>, TransportError> {
    let choices = body
        .get("choices")
        .and_then(Value::as_array)
        .ok_or_else(|| TransportError::Fatal("response has no choices array".into()))?;
    choices
        .iter()
        .map(|choice| {
            choice
                .pointer("/message/content")
                .or_else(|| choice.get("text"))
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| TransportError::Fatal("choice has no message content".into()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn extracts_message_contents() {
        let body = json!({"choices": [
            {"message": {"role": "assistant", "content": "a"}},
            {"message": {"role": "assistant", "content": "b"}},
        ]});
        assert_eq!(extract_choices(&body).unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn accepts_completion_style_text_fields() {
        let body = json!({"choices": [{"text": "legacy"}]});
        assert_eq!(extract_choices(&body).unwrap(), vec!["legacy"]);
    }

    #[test]
    fn missing_choices_is_fatal() {
        assert!(matches!(
            extract_choices(&json!({"error": "x"})),
            Err(TransportError::Fatal(_))
        ));
    }
}
