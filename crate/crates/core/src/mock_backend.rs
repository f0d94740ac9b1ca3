//! Deterministic stand-in for the abstractive summary backend.
//!
//! Speaks the same HTTP protocol as a real backend (see [`crate::summarize`])
//! and records every request it receives.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};

use crate::summarize::{BackendRequest, BackendResponse};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockMode {
    /// Always answers with this text.
    Fixed(String),
    /// Answers with [`echo_summary`] of the request.
    Echo,
    /// Always fails with this status.
    Status(u16),
    /// Sleeps, then behaves like the inner mode.
    Delay(u64, Box<MockMode>),
}

/// `"[<target_lang>] "` followed by the first `max_tokens` words of the text.
pub fn echo_summary(req: &BackendRequest) -> String {
    let words: Vec<&str> = req.text.split_whitespace().take(req.max_tokens).collect();
    format!("[{}] {}", req.target_lang, words.join(" "))
}

#[derive(Clone)]
struct MockState {
    mode: Arc<MockMode>,
    log: Arc<Mutex<Vec<BackendRequest>>>,
}

async fn respond(mode: &MockMode, req: &BackendRequest) -> Response {
    let mut mode = mode;
    while let MockMode::Delay(ms, inner) = mode {
        tokio::time::sleep(Duration::from_millis(*ms)).await;
        mode = inner;
    }
    match mode {
        MockMode::Fixed(text) => Json(BackendResponse { summary: text.clone() }).into_response(),
        MockMode::Echo => Json(BackendResponse { summary: echo_summary(req) }).into_response(),
        MockMode::Status(code) => StatusCode::from_u16(*code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR).into_response(),
        MockMode::Delay(..) => unreachable!(),
    }
}

async fn summarize(State(state): State<MockState>, Json(req): Json<BackendRequest>) -> Response {
    state.log.lock().expect("request log poisoned").push(req.clone());
    respond(&state.mode, &req).await
}

/// Router serving `POST /summarize`.
pub fn router(mode: MockMode, log: Arc<Mutex<Vec<BackendRequest>>>) -> Router {
    Router::new()
        .route("/summarize", post(summarize))
        .with_state(MockState { mode: Arc::new(mode), log })
}

/// A mock backend running on its own thread and runtime; stops on drop.
pub struct MockBackend {
    addr: SocketAddr,
    log: Arc<Mutex<Vec<BackendRequest>>>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl MockBackend {
    /// Binds an ephemeral localhost port.
    pub fn spawn(mode: MockMode) -> std::io::Result<Self> {
        Self::spawn_on("127.0.0.1:0", mode)
    }

    pub fn spawn_on(addr: &str, mode: MockMode) -> std::io::Result<Self> {
        let listener = std::net::TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let log = Arc::new(Mutex::new(Vec::new()));
        let app = router(mode, log.clone());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(Self { addr, log, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Endpoint URL to put into `backend.endpoint_url`.
    pub fn url(&self) -> String {
        format!("http://{}/summarize", self.addr)
    }

    pub fn requests(&self) -> Vec<BackendRequest> {
        self.log.lock().expect("request log poisoned").clone()
    }
}

impl Drop for MockBackend {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summarize::{BackendError, HttpBackend, SummaryBackend};
    use crate::textproc::Language;

    fn request(text: &str) -> BackendRequest {
        BackendRequest { text: text.into(), source_lang: Language::De, target_lang: Language::En, max_tokens: 2 }
    }

    #[test]
    fn fixed_and_echo() {
        let m = MockBackend::spawn(MockMode::Fixed("Trust declined.".into())).unwrap();
        let client = HttpBackend::new(m.url(), 2000).unwrap();
        assert_eq!(client.summarize(&request("a b c")).unwrap(), "Trust declined.");
        assert_eq!(m.requests(), vec![request("a b c")]);

        let e = MockBackend::spawn(MockMode::Echo).unwrap();
        let client = HttpBackend::new(e.url(), 2000).unwrap();
        assert_eq!(client.summarize(&request("one two three")).unwrap(), "[en] one two");
    }

    #[test]
    fn error_status_and_timeout() {
        let m = MockBackend::spawn(MockMode::Status(503)).unwrap();
        let client = HttpBackend::new(m.url(), 2000).unwrap();
        assert_eq!(client.summarize(&request("x")).unwrap_err(), BackendError::Status(503));

        let slow = MockBackend::spawn(MockMode::Delay(1500, Box::new(MockMode::Echo))).unwrap();
        let client = HttpBackend::new(slow.url(), 100).unwrap();
        assert_eq!(client.summarize(&request("x")).unwrap_err(), BackendError::Timeout);
    }

    #[test]
    fn unreachable_endpoint() {
        let addr = {
            let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap()
        };
        let client = HttpBackend::new(format!("http://{addr}/summarize"), 500).unwrap();
        assert!(matches!(client.summarize(&request("x")), Err(BackendError::Transport(_))));
    }
}
