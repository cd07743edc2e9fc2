use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use prospect_core::agents::{simulate_choices, Choice, Economicus, PtAgent};
use prospect_core::models::PtParams;
use prospect_core::par::Exec;
use prospect_core::prospects::{enumerate_contexts, Context, GridConfig};
use prospect_llm::backend::extract_content;
use prospect_llm::collect::read_archive;
use prospect_llm::{
    collect_responses, Backend, BackendError, FixedBackend, HttpBackend, LlmError, MockBackend,
    QueryConfig, Request,
};

fn grid() -> Vec<Context> {
    enumerate_contexts(&GridConfig::default()).unwrap()
}

fn query(reps: u32, seed: u64) -> QueryConfig {
    QueryConfig {
        reps,
        seed,
        retries: 1,
        ..QueryConfig::default()
    }
}

fn choices(trials: &[prospect_core::agents::Trial]) -> Vec<(String, u32, Choice)> {
    let mut v: Vec<_> = trials
        .iter()
        .map(|t| (t.context_id.clone(), t.rep, t.choice))
        .collect();
    v.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    v
}

#[test]
fn mock_matches_simulation() {
    let all = grid();
    let pt = PtParams::new(0.8, 2.0, 0.7, 10.0).unwrap();
    for (agent, sim) in [
        (
            Box::new(Economicus) as Box<dyn prospect_core::Agent>,
            Box::new(Economicus) as Box<dyn prospect_core::Agent>,
        ),
        (
            Box::new(PtAgent::new(pt, &all).unwrap()),
            Box::new(PtAgent::new(pt, &all).unwrap()),
        ),
    ] {
        let backend = MockBackend { agent, seed: 17 };
        let got = collect_responses(&backend, &all, &query(10, 17), "mock").unwrap();
        assert_eq!(got.dataset.trials.len(), 3240);
        assert_eq!(got.archive.len(), 3240);
        let want = simulate_choices(sim.as_ref(), &all, 10, 17, Exec::Sequential).unwrap();
        assert_eq!(choices(&got.dataset.trials), choices(&want.trials));
        assert_eq!(got.dataset.table(), want.table());
    }
}

#[test]
fn garbage_backend_marks_everything_invalid() {
    let all: Vec<Context> = grid().into_iter().take(12).collect();
    let backend = FixedBackend("I would rather not say.".into());
    let got = collect_responses(&backend, &all, &query(3, 0), "garbage").unwrap();
    assert_eq!(got.dataset.trials.len(), 36);
    assert!(got.dataset.trials.iter().all(|t| t.choice == Choice::Invalid));
    assert!(got
        .dataset
        .trials
        .iter()
        .all(|t| t.raw.as_deref() == Some("I would rather not say.")));
    let table = got.dataset.table();
    assert!(table.iter().all(|(_, e)| e.p.is_none()));
    assert_eq!(got.dataset.contexts_without_valid_trials().len(), 12);
}

/// Fails the first `fail_first` calls for every (context, rep).
struct Flaky {
    calls: AtomicUsize,
    always_fail: bool,
}

impl Backend for Flaky {
    fn name(&self) -> String {
        "flaky".into()
    }
    fn complete(&self, req: &Request<'_>) -> Result<String, BackendError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        if self.always_fail || n % 2 == 0 && req.rep == 0 {
            Err(BackendError::Transport("connection reset".into()))
        } else {
            Ok("B".into())
        }
    }
}

#[test]
fn failures_are_retried_then_recorded() {
    let all: Vec<Context> = grid().into_iter().take(4).collect();
    let cfg = QueryConfig {
        in_flight: 1,
        ..query(2, 0)
    };
    let dead = Flaky {
        calls: AtomicUsize::new(0),
        always_fail: true,
    };
    let got = collect_responses(&dead, &all, &cfg, "dead").unwrap();
    assert_eq!(got.dataset.trials.len(), 8);
    assert_eq!(dead.calls.load(Ordering::SeqCst), 16, "one retry per trial");
    for r in &got.archive {
        assert_eq!(r.parsed, "invalid");
        assert_eq!(r.attempts, 2);
        assert!(r.error.as_deref().unwrap().contains("connection reset"));
        assert!(r.raw.contains("connection reset"));
    }

    let flaky = Flaky {
        calls: AtomicUsize::new(0),
        always_fail: false,
    };
    let got = collect_responses(&flaky, &all, &cfg, "flaky").unwrap();
    assert_eq!(got.dataset.trials.len(), 8);
    assert!(got.dataset.trials.iter().all(|t| t.choice != Choice::Invalid));
}

#[test]
fn archive_round_trips_and_hashes_prompts() {
    let all: Vec<Context> = grid().into_iter().take(3).collect();
    let backend = MockBackend {
        agent: Box::new(Economicus),
        seed: 1,
    };
    let got = collect_responses(&backend, &all, &query(2, 1), "m").unwrap();
    let mut buf = Vec::new();
    got.write_archive(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 6);
    let back = read_archive(&text).unwrap();
    assert_eq!(back, got.archive);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["context_id", "rep", "prompt_sha256", "raw", "parsed", "latency_ms"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert_eq!(back[0].prompt_sha256.len(), 64);
}

#[test]
fn missing_credentials_fail_before_any_request() {
    let backend = HttpBackend {
        endpoint: "http://127.0.0.1:9/unused".into(),
        model: "m".into(),
        api_key_env: "PROSPECT_TEST_KEY_THAT_IS_NOT_SET".into(),
        timeout: Duration::from_secs(1),
    };
    let err = collect_responses(&backend, &grid(), &query(1, 0), "x").unwrap_err();
    assert!(matches!(err, LlmError::Backend(BackendError::Config(_))), "{err}");
}

#[test]
fn extract_content_cases() {
    let ok = r#"{"choices":[{"message":{"role":"assistant","content":"A."}}]}"#;
    assert_eq!(extract_content(ok).unwrap(), "A.");
    assert!(extract_content(r#"{"choices":[]}"#).is_err());
    assert!(extract_content("not json").is_err());
}

/// Minimal one-shot HTTP server recording the request it receives.
fn serve_once(status: u16, body: &'static str) -> (String, Arc<Mutex<Option<(String, String)>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(None));
    let store = seen.clone();
    std::thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut head = String::new();
        let mut len = 0usize;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            let end = line == "\r\n";
            head.push_str(&line);
            if end {
                break;
            }
        }
        let mut buf = vec![0; len];
        reader.read_exact(&mut buf).unwrap();
        *store.lock().unwrap() = Some((head, String::from_utf8(buf).unwrap()));
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
    });
    (url, seen)
}

#[test]
fn http_wire_format() {
    std::env::set_var("PROSPECT_TEST_KEY_WIRE", "secret-token");
    let (url, seen) = serve_once(
        200,
        r#"{"choices":[{"message":{"role":"assistant","content":"**B** because it is certain"}}]}"#,
    );
    let backend = HttpBackend {
        endpoint: url,
        model: "test-model".into(),
        api_key_env: "PROSPECT_TEST_KEY_WIRE".into(),
        timeout: Duration::from_secs(10),
    };
    let ctx = grid().into_iter().next().unwrap();
    let got = collect_responses(&backend, &[ctx.clone()], &query(1, 0), "http").unwrap();
    assert_eq!(got.archive[0].raw, "**B** because it is certain");
    assert_eq!(got.archive[0].parsed, "B");

    let (head, body) = seen.lock().unwrap().clone().unwrap();
    assert!(head.starts_with("POST /v1/chat/completions"));
    assert!(head.contains("authorization: Bearer secret-token") || head.contains("Authorization: Bearer secret-token"));
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["model"], "test-model");
    assert_eq!(v["temperature"], 1.0);
    assert_eq!(v["max_tokens"], 1024);
    assert_eq!(v["messages"].as_array().unwrap().len(), 1);
    assert_eq!(v["messages"][0]["role"], "user");
    assert_eq!(v["messages"][0]["content"], prospect_llm::render_prompt(&ctx));
}

#[test]
fn http_error_status_becomes_invalid_trial() {
    std::env::set_var("PROSPECT_TEST_KEY_STATUS", "k");
    let (url, _) = serve_once(500, r#"{"error":"boom"}"#);
    let backend = HttpBackend {
        endpoint: url,
        model: "m".into(),
        api_key_env: "PROSPECT_TEST_KEY_STATUS".into(),
        timeout: Duration::from_secs(5),
    };
    let cfg = QueryConfig {
        retries: 0,
        ..query(1, 0)
    };
    let got = collect_responses(&backend, &grid()[..1], &cfg, "x").unwrap();
    assert_eq!(got.dataset.trials[0].choice, Choice::Invalid);
    assert!(got.archive[0].error.as_deref().unwrap().contains("HTTP 500"));
}
