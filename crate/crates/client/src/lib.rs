//! Thin typed client for the evaluation service. One method per route;
//! errors carry the service's machine-readable code.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;
use xeval_api::*;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Http(#[from] reqwest::Error),
    #[error("{code}: {message}")]
    Api { status: u16, code: String, message: String },
}

impl ClientError {
    /// The service's machine-readable error code, when the failure came
    /// from the service rather than the transport.
    pub fn api_code(&self) -> Option<&str> {
        match self {
            ClientError::Api { code, .. } => Some(code),
            ClientError::Http(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let mut base = base_url.into();
        while base.ends_with('/') {
            base.pop();
        }
        Client { base, http: reqwest::Client::new() }
    }

    async fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        request: &Req,
    ) -> Result<Resp, ClientError> {
        let response = self
            .http
            .post(format!("{}{path}", self.base))
            .json(request)
            .send()
            .await?;
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        match response.json::<ErrorBody>().await {
            Ok(body) => Err(ClientError::Api {
                status: status.as_u16(),
                code: body.error.code,
                message: body.error.message,
            }),
            Err(_) => Err(ClientError::Api {
                status: status.as_u16(),
                code: "internal".into(),
                message: format!("service returned status {status}"),
            }),
        }
    }

    pub async fn health(&self) -> Result<(), ClientError> {
        let response = self.http.get(format!("{}/health", self.base)).send().await?;
        response.error_for_status()?;
        Ok(())
    }

    pub async fn parse(&self, request: &ParseRequest) -> Result<ParseResponse, ClientError> {
        self.post("/v1/report/parse", request).await
    }

    pub async fn render(&self, request: &RenderRequest) -> Result<RenderResponse, ClientError> {
        self.post("/v1/report/render", request).await
    }

    pub async fn score(&self, request: &ScoreRequest) -> Result<ScoreResponse, ClientError> {
        self.post("/v1/score", request).await
    }

    pub async fn check(&self, request: &CheckRequest) -> Result<CheckResponse, ClientError> {
        self.post("/v1/check", request).await
    }

    pub async fn judge_prompt(
        &self,
        request: &JudgePromptRequest,
    ) -> Result<JudgePromptResponse, ClientError> {
        self.post("/v1/judge/prompt", request).await
    }

    pub async fn judge_parse(
        &self,
        request: &JudgeParseRequest,
    ) -> Result<JudgeParseResponse, ClientError> {
        self.post("/v1/judge/parse", request).await
    }

    pub async fn judge_run(
        &self,
        request: &JudgeRunRequest,
    ) -> Result<JudgeRunResponse, ClientError> {
        self.post("/v1/judge/run", request).await
    }

    pub async fn feedback(
        &self,
        request: &FeedbackRequest,
    ) -> Result<FeedbackResponse, ClientError> {
        self.post("/v1/feedback", request).await
    }

    pub async fn pairs(&self, request: &PairsRequest) -> Result<PairsResponse, ClientError> {
        self.post("/v1/pairs", request).await
    }

    pub async fn pair_loss(
        &self,
        request: &PairLossRequest,
    ) -> Result<PairLossResponse, ClientError> {
        self.post("/v1/pairs/loss", request).await
    }

    pub async fn rerank(&self, request: &RerankRequest) -> Result<RerankResponse, ClientError> {
        self.post("/v1/rerank", request).await
    }

    pub async fn reward(&self, request: &RewardRequest) -> Result<RewardResponse, ClientError> {
        self.post("/v1/reward", request).await
    }

    pub async fn evaluate(
        &self,
        request: &EvaluateRequest,
    ) -> Result<EvaluateResponse, ClientError> {
        self.post("/v1/evaluate", request).await
    }

    pub async fn metaeval(
        &self,
        request: &MetaevalRequest,
    ) -> Result<MetaevalResponse, ClientError> {
        self.post("/v1/metaeval", request).await
    }

    pub async fn significance(
        &self,
        request: &SignificanceRequest,
    ) -> Result<SignificanceResponse, ClientError> {
        self.post("/v1/significance", request).await
    }

    pub async fn datagen_domains(
        &self,
        request: &DomainsRequest,
    ) -> Result<DomainsResponse, ClientError> {
        self.post("/v1/datagen/domains", request).await
    }

    pub async fn datagen_topics(
        &self,
        request: &TopicsRequest,
    ) -> Result<TopicsResponse, ClientError> {
        self.post("/v1/datagen/topics", request).await
    }

    pub async fn datagen_sentences(
        &self,
        request: &SentencesRequest,
    ) -> Result<SentencesResponse, ClientError> {
        self.post("/v1/datagen/sentences", request).await
    }

    pub async fn datagen_inject(
        &self,
        request: &InjectRequest,
    ) -> Result<InjectResponse, ClientError> {
        self.post("/v1/datagen/inject", request).await
    }

    pub async fn datagen_finetune(
        &self,
        request: &FinetuneRequest,
    ) -> Result<FinetuneResponse, ClientError> {
        self.post("/v1/datagen/finetune", request).await
    }
}
