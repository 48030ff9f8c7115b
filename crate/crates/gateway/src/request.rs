//! Request types and the canonical fingerprint used to key cassettes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Which configured endpoint a request targets.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum EndpointRole {
    Evaluator,
    Judge,
    Datagen,
    Reward,
}

impl EndpointRole {
    pub fn as_str(self) -> &'static str {
        match self {
            EndpointRole::Evaluator => "evaluator",
            EndpointRole::Judge => "judge",
            EndpointRole::Datagen => "datagen",
            EndpointRole::Reward => "reward",
        }
    }
}

/// Decoding parameters. Greedy decoding is temperature 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    pub temperature: f64,
    pub top_p: f64,
    pub n_samples: u32,
    pub max_tokens: u32,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams { temperature: 0.0, top_p: 1.0, n_samples: 1, max_tokens: 1024 }
    }
}

/// One chat message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// A complete request to one endpoint role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub role: EndpointRole,
    pub messages: Vec<ChatMessage>,
    pub params: DecodeParams,
}

impl ChatRequest {
    /// A single-user-message request, the common case.
    pub fn user(role: EndpointRole, prompt: impl Into<String>, params: DecodeParams) -> Self {
        ChatRequest {
            role,
            messages: vec![ChatMessage { role: "user".into(), content: prompt.into() }],
            params,
        }
    }

    /// Stable hash of the canonicalized request: message text is
    /// whitespace-normalized and parameters are serialized in a fixed
    /// order, so semantically identical requests collide across platforms.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"role=");
        hasher.update(self.role.as_str().as_bytes());
        for message in &self.messages {
            hasher.update(b"\nmessage=");
            hasher.update(message.role.as_bytes());
            hasher.update(b"|");
            let normalized: Vec<&str> = message.content.split_whitespace().collect();
            hasher.update(normalized.join(" ").as_bytes());
        }
        hasher.update(
            format!(
                "\nmax_tokens={};n_samples={};temperature={};top_p={}",
                self.params.max_tokens,
                self.params.n_samples,
                self.params.temperature,
                self.params.top_p
            )
            .as_bytes(),
        );
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
