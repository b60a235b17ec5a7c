//! Protocol-level tests: parse/render identity, memory bounds under fuzzed
//! push sequences, and the live client against a local HTTP stub.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use econ_llm::client::{ChatClient, HttpChatClient, HttpClientConfig};
use econ_llm::memory::MemoryPool;
use econ_llm::parse::{parse_decision, snap_to_grid};
use econ_llm::types::{ChatContext, ChatMessage, ChatRequest, Dialogue, DialogueKind};
use proptest::prelude::*;

proptest! {
    #[test]
    fn parse_of_rendered_grid_decision_is_identity(work in 0u32..=50, consumption in 0u32..=50) {
        let work = work as f64 / 50.0;
        let consumption = consumption as f64 / 50.0;
        let rendered = format!("{{\"work\": {work:.2}, \"consumption\": {consumption:.2}}}");
        let decision = parse_decision::<f64>(&rendered).unwrap();
        prop_assert_eq!(decision.work_propensity, snap_to_grid(work));
        prop_assert_eq!(decision.consumption_propensity, snap_to_grid(consumption));
        // Grid values survive the snap unchanged.
        prop_assert!((decision.work_propensity - work).abs() < 1e-12);
    }

    #[test]
    fn memory_units_never_exceed_capacity(
        window in 0usize..4,
        pushes in prop::collection::vec((0usize..60, prop::bool::ANY), 0..80),
    ) {
        let mut pool = MemoryPool::new(window);
        for (month, is_reflection) in pushes {
            let kind = if is_reflection { DialogueKind::Reflection } else { DialogueKind::Decision };
            pool.push(Dialogue::new(month, kind, format!("p{month}"), "r".into()));
            prop_assert!(pool.units() <= pool.capacity_units());
        }
    }
}

fn request() -> ChatRequest {
    ChatRequest {
        model: "test-model".into(),
        messages: vec![ChatMessage::user("hello")],
        temperature: 0.0,
    }
}

fn ctx() -> ChatContext {
    ChatContext { agent_id: 0, month_index: 0, kind: DialogueKind::Decision }
}

/// Serve `responses` (status line + body) one per connection, then stop.
fn serve(responses: Vec<Option<String>>) -> (String, Arc<AtomicUsize>, std::thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let hits_clone = Arc::clone(&hits);
    let handle = std::thread::spawn(move || {
        for response in responses {
            let (mut stream, _) = listener.accept().unwrap();
            hits_clone.fetch_add(1, Ordering::SeqCst);
            let mut buf = [0u8; 65536];
            let _ = stream.read(&mut buf);
            match response {
                Some(body) => {
                    let _ = stream.write_all(body.as_bytes());
                }
                None => drop(stream), // simulate a transport failure
            }
        }
    });
    (format!("http://{addr}"), hits, handle)
}

fn http_ok(json: &str) -> String {
    format!(
        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{json}",
        json.len()
    )
}

fn http_status(code: u16, text: &str) -> String {
    format!("HTTP/1.1 {code} {text}\r\ncontent-length: 0\r\nconnection: close\r\n\r\n")
}

fn client(base_url: String, retries: u32) -> HttpChatClient {
    HttpChatClient::new(HttpClientConfig {
        base_url,
        api_key: Some("test-key".into()),
        timeout: Duration::from_secs(2),
        retries,
        backoff: Duration::from_millis(1),
    })
    .unwrap()
}

#[test]
fn live_client_extracts_first_choice_content() {
    let body = r#"{"id":"x","choices":[{"index":0,"message":{"role":"assistant","content":"{\"work\": 0.8, \"consumption\": 0.6}"},"finish_reason":"stop"}]}"#;
    let (url, hits, handle) = serve(vec![Some(http_ok(body))]);
    let got = client(url, 0).chat(&ctx(), &request()).unwrap();
    assert_eq!(got.content, "{\"work\": 0.8, \"consumption\": 0.6}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    handle.join().unwrap();
}

#[test]
fn live_client_retries_transport_failures_then_errors() {
    let (url, hits, handle) = serve(vec![None, None, None]);
    let err = client(url, 2).chat(&ctx(), &request()).unwrap_err();
    assert!(matches!(err, econ_llm::LlmError::Transport(_)), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 3, "one initial try plus two retries");
    handle.join().unwrap();
}

#[test]
fn live_client_retries_rate_limit_then_succeeds() {
    let body = r#"{"choices":[{"message":{"content":"ok"}}]}"#;
    let (url, hits, handle) =
        serve(vec![Some(http_status(429, "Too Many Requests")), Some(http_ok(body))]);
    let got = client(url, 3).chat(&ctx(), &request()).unwrap();
    assert_eq!(got.content, "ok");
    assert_eq!(hits.load(Ordering::SeqCst), 2);
    handle.join().unwrap();
}

#[test]
fn live_client_rejects_malformed_body_without_retry() {
    let (url, hits, handle) = serve(vec![Some(http_ok("not json"))]);
    let err = client(url, 3).chat(&ctx(), &request()).unwrap_err();
    assert!(matches!(err, econ_llm::LlmError::Protocol(_)), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    handle.join().unwrap();
}

#[test]
fn live_client_treats_client_errors_as_fatal() {
    let (url, hits, handle) = serve(vec![Some(http_status(401, "Unauthorized"))]);
    let err = client(url, 3).chat(&ctx(), &request()).unwrap_err();
    assert!(matches!(err, econ_llm::LlmError::Protocol(_)), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    handle.join().unwrap();
}
