mod support;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use desksim::domain::BackendId;
use desksim::gateway::http::{ApiFlavor, HttpBackend, HttpBackendConfig};
use desksim::gateway::{CompletionRequest, Gateway, GatewayError, RetryPolicy};
use support::*;

fn gateway(flavor: ApiFlavor, url: &str, attempts: u32) -> Gateway {
    let backend = HttpBackend::new(HttpBackendConfig {
        flavor,
        base_url: url.to_string(),
        api_key: "sk-test".into(),
        model: "m-requested".into(),
        timeout: Duration::from_secs(5),
    });
    let mut g = Gateway::in_memory().with_retry(RetryPolicy::immediate(attempts));
    g.register(BackendId::new("remote"), Arc::new(backend), None);
    g
}

fn ask(g: &Gateway, prompt: &str) -> Result<String, GatewayError> {
    g.complete(&CompletionRequest::new(BackendId::new("remote"), prompt)).map(|r| r.text.to_string())
}

#[test]
fn openai_request_shape() {
    let server = FakeServer::start(|_| (200, openai_reply("[Action]: long")));
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 3);
    assert_eq!(ask(&g, "hello desk").unwrap(), "[Action]: long");

    let reqs = server.requests.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    let r = &reqs[0];
    assert_eq!((r.method.as_str(), r.path.as_str()), ("POST", "/chat/completions"));
    assert_eq!(r.header("authorization"), Some("Bearer sk-test"));
    let body = r.json();
    assert_eq!(body["model"], "m-requested");
    assert_eq!(body["messages"][0]["content"], "hello desk");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(g.reported_models()[&BackendId::new("remote")], "fake-model-0001");
}

#[test]
fn repeated_prompt_is_served_from_cache() {
    let server = FakeServer::start(|_| (200, openai_reply("ok")));
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 3);
    ask(&g, "same").unwrap();
    ask(&g, "same").unwrap();
    assert_eq!(server.hits(), 1);
    assert_eq!(g.stats().cache_hits, 1);
}

#[test]
fn rate_limits_are_retried() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let server = FakeServer::start(move |_| {
        if c.fetch_add(1, Ordering::SeqCst) < 2 {
            (429, "{\"error\":\"slow down\"}".into())
        } else {
            (200, openai_reply("done"))
        }
    });
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 5);
    assert_eq!(ask(&g, "p").unwrap(), "done");
    assert_eq!(server.hits(), 3);
}

#[test]
fn persistent_rate_limit_gives_up() {
    let server = FakeServer::start(|_| (429, "{}".into()));
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 3);
    assert!(matches!(ask(&g, "p"), Err(GatewayError::RateLimited { attempts: 3, .. })));
    assert_eq!(server.hits(), 3);
}

#[test]
fn unauthorized_is_not_retried() {
    let server = FakeServer::start(|_| (401, "{\"error\":\"bad key\"}".into()));
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 5);
    let err = ask(&g, "p").unwrap_err();
    assert!(matches!(err, GatewayError::BackendUnavailable { .. }), "{err:?}");
    assert!(err.to_string().contains("401"));
    assert_eq!(server.hits(), 1);
}

#[test]
fn server_errors_are_retried() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = calls.clone();
    let server = FakeServer::start(move |_| {
        if c.fetch_add(1, Ordering::SeqCst) == 0 {
            (503, "{}".into())
        } else {
            (200, openai_reply("after 503"))
        }
    });
    let g = gateway(ApiFlavor::OpenAiChat, &server.url(), 3);
    assert_eq!(ask(&g, "p").unwrap(), "after 503");
}

#[test]
fn gemini_request_shape() {
    let server = FakeServer::start(|_| {
        let body = serde_json::json!({
            "candidates": [{"content": {"parts": [{"text": "[Action]: short"}]}}],
            "modelVersion": "gem-7"
        });
        (200, body.to_string())
    });
    let g = gateway(ApiFlavor::GeminiGenerate, &server.url(), 3);
    assert_eq!(ask(&g, "news text").unwrap(), "[Action]: short");
    let reqs = server.requests.lock().unwrap();
    let r = &reqs[0];
    assert_eq!(r.path, "/models/m-requested:generateContent?key=sk-test");
    assert_eq!(r.header("authorization"), None);
    let body = r.json();
    assert_eq!(body["contents"][0]["parts"][0]["text"], "news text");
    assert_eq!(body["generationConfig"]["maxOutputTokens"], 512);
}

#[test]
fn dropped_connections_are_transient() {
    let listener = RefusingListener::start();
    let g = gateway(ApiFlavor::OpenAiChat, &listener.url(), 2);
    assert!(ask(&g, "p").is_err());
    assert_eq!(listener.connections(), 2);
}
