//! Test transports: canned responses, failure injection, and call counting.
//! Used by this crate's tests and by downstream service tests; not part of
//! the stable API.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use serde_json::{json, Value};

use crate::transport::{Transport, TransportError};
use crate::{EndpointConfig, ResponseQueue};

/// Builds a chat-completion reply body from response texts.
pub fn chat_response(texts: &[&str]) -> Value {
    json!({
        "choices": texts
            .iter()
            .map(|t| json!({"message": {"role": "assistant", "content": t}}))
            .collect::<Vec<_>>()
    })
}

/// Pops pre-queued reply bodies in order; errors when exhausted.
pub struct QueueTransport {
    queue: ResponseQueue,
}

impl QueueTransport {
    pub fn new(replies: Vec<Value>) -> Self {
        QueueTransport { queue: Mutex::new(VecDeque::from(replies)) }
    }
}

#[async_trait]
impl Transport for QueueTransport {
    async fn send(&self, _endpoint: &EndpointConfig, _body: Value) -> Result<Value, TransportError> {
        self.queue
            .lock()
            .expect("queue poisoned")
            .pop_front()
            .ok_or_else(|| TransportError::Fatal("queue exhausted".into()))
    }
}

/// Derives the reply from the request body via a closure.
pub struct FnTransport<F>(pub F);

#[async_trait]
impl<F> Transport for FnTransport<F>
where
    F: Fn(&Value) -> Result<Value, TransportError> + Send + Sync,
{
    async fn send(&self, _endpoint: &EndpointConfig, body: Value) -> Result<Value, TransportError> {
        (self.0)(&body)
    }
}

/// Fails a fixed number of times, then delegates.
pub struct FlakyTransport {
    remaining_failures: AtomicUsize,
    failure: fn() -> TransportError,
    inner: Arc<dyn Transport>,
}

impl FlakyTransport {
    pub fn new(failures: usize, failure: fn() -> TransportError, inner: Arc<dyn Transport>) -> Self {
        FlakyTransport { remaining_failures: AtomicUsize::new(failures), failure, inner }
    }
}

#[async_trait]
impl Transport for FlakyTransport {
    async fn send(&self, endpoint: &EndpointConfig, body: Value) -> Result<Value, TransportError> {
        let remaining = self.remaining_failures.load(Ordering::SeqCst);
        if remaining > 0 {
            self.remaining_failures.store(remaining - 1, Ordering::SeqCst);
            return Err((self.failure)());
        }
        self.inner.send(endpoint, body).await
    }
}

/// Counts calls (and tracks the concurrent high-water mark) around an inner
/// transport. Wrapping a replay-mode gateway with this is how tests assert
/// that replays never touch the network.
pub struct CountingTransport {
    pub calls: AtomicUsize,
    in_flight: AtomicUsize,
    pub max_in_flight: AtomicUsize,
    inner: Arc<dyn Transport>,
}

impl CountingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> Self {
        CountingTransport {
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
            inner,
        }
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl Transport for CountingTransport {
    async fn send(&self, endpoint: &EndpointConfig, body: Value) -> Result<Value, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        // hold the slot briefly so concurrent callers overlap measurably
        tokio::time::sleep(std::time::Duration::from_millis(5)).await;
        let result = self.inner.send(endpoint, body).await;
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        result
    }
}
