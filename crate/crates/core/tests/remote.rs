use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use msgrewrite::cascade::{route, CascadeConfig, Origin};
use msgrewrite::modelio::{generate, GenerationParams, RemoteBackend, RemoteConfig, RetryPolicy, SuffixConfig};
use msgrewrite::Error;

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves one scripted (status, body) reply per connection, in order.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            handle(stream, status, &body, &log);
        }
    });
    (format!("http://{addr}"), seen)
}

fn handle(mut stream: TcpStream, status: u16, body: &str, log: &Mutex<Vec<Seen>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let path = line.split_whitespace().nth(1).unwrap_or_default().to_owned();
    let (mut length, mut authorization) = (0, None);
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).unwrap();
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        let (name, value) = header.split_once(':').unwrap();
        match name.to_ascii_lowercase().as_str() {
            "content-length" => length = value.trim().parse().unwrap(),
            "authorization" => authorization = Some(value.trim().to_owned()),
            _ => {}
        }
    }
    let mut raw = vec![0; length];
    reader.read_exact(&mut raw).unwrap();
    log.lock().unwrap().push(Seen {
        path,
        authorization,
        body: serde_json::from_slice(&raw).unwrap_or(Value::Null),
    });
    let reply = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(reply.as_bytes()).unwrap();
}

fn backend(endpoint: &str, token: Option<&str>) -> RemoteBackend {
    let mut config = RemoteConfig::new(endpoint);
    config.auth_token = token.map(str::to_owned);
    config.timeout = Duration::from_secs(5);
    config.retry = RetryPolicy {
        attempts: 3,
        initial_backoff: Duration::from_millis(5),
    };
    RemoteBackend::new(config).unwrap()
}

#[test]
fn generate_wire_format_and_bearer_token() {
    let reply = json!({"candidates": [
        {"text": "Hello there.", "token_logprobs": [-0.5, -1.5]},
        {"text": "Hi.", "token_logprobs": [-0.25]}
    ]});
    let (url, seen) = serve(vec![(200, reply.to_string())]);
    let b = backend(&url, Some("s3cret"));
    let params = GenerationParams {
        temperature: 0.5,
        num_samples: 2,
        max_tokens: 32,
        logprobs: true,
    };
    let out = generate(&b, "Say hi", &params).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out[0].text, "Hello there.");
    assert_eq!(out[0].lm_score, Some(-1.0));

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/generate");
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer s3cret"));
    assert_eq!(
        seen[0].body,
        json!({"prompt": "Say hi", "num_samples": 2, "temperature": 0.5, "max_tokens": 32, "logprobs": true})
    );
}

#[test]
fn score_request_has_no_token_when_unset() {
    let (url, seen) = serve(vec![(200, r#"{"logprob": -2.5}"#.into())]);
    let b = backend(&url, None);
    let lp = msgrewrite::modelio::score_continuation(&b, "prefix", "tail").unwrap();
    assert_eq!(lp, -2.5);
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/score");
    assert_eq!(seen[0].authorization, None);
    assert_eq!(seen[0].body, json!({"prefix": "prefix", "continuation": "tail"}));
}

#[test]
fn retries_on_503_then_succeeds() {
    let (url, seen) = serve(vec![
        (503, "busy".into()),
        (503, "busy".into()),
        (200, r#"{"logprob": -1.0}"#.into()),
    ]);
    let b = backend(&url, None);
    assert_eq!(msgrewrite::modelio::score_continuation(&b, "p", "c").unwrap(), -1.0);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn persistent_503_is_unavailable() {
    let (url, _) = serve(vec![(503, "busy".into()); 3]);
    let b = backend(&url, None);
    let err = msgrewrite::modelio::score_continuation(&b, "p", "c").unwrap_err();
    assert!(matches!(err, Error::BackendUnavailable { attempts: 3, .. }), "{err:?}");
}

#[test]
fn client_error_is_rejected_without_retry() {
    let (url, seen) = serve(vec![(400, "bad prompt".into()), (200, r#"{"logprob": -1.0}"#.into())]);
    let b = backend(&url, None);
    let err = msgrewrite::modelio::score_continuation(&b, "p", "c").unwrap_err();
    match err {
        Error::BackendRejected { status, message } => {
            assert_eq!(status, 400);
            assert_eq!(message, "bad prompt");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let b = backend(&format!("http://127.0.0.1:{port}"), None);
    let err = generate(&b, "x", &GenerationParams::default()).unwrap_err();
    assert!(matches!(err, Error::BackendUnavailable { attempts: 3, .. }), "{err:?}");
}

#[test]
fn malformed_reply_is_protocol_error() {
    let (url, _) = serve(vec![(200, r#"{"nope": 1}"#.into())]);
    let err = msgrewrite::modelio::score_continuation(&backend(&url, None), "p", "c").unwrap_err();
    assert!(matches!(err, Error::Protocol(_)), "{err:?}");
}

#[test]
fn non_http_endpoint_is_rejected_up_front() {
    assert!(matches!(
        RemoteBackend::new(RemoteConfig::new("ftp://x")),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn cascade_over_http_keeps_confident_answer_local() {
    let generate_reply = json!({"candidates": [{"text": "Sure, see you at six.", "token_logprobs": [-0.1]}]});
    let (url, seen) = serve(vec![
        (200, generate_reply.to_string()),
        (200, r#"{"logprob": -0.05}"#.into()),
        (200, r#"{"logprob": -3.0}"#.into()),
    ]);
    let device = backend(&url, None);
    let server = backend("http://127.0.0.1:9", None);
    let cfg = CascadeConfig {
        num_samples: 1,
        ..CascadeConfig::default()
    };
    let decision = route(
        "Confirm dinner at six.",
        &device,
        &server,
        &cfg,
        &SuffixConfig::default(),
    )
    .unwrap();
    assert_eq!(decision.origin, Origin::OnDevice);
    assert_eq!(decision.chosen_text, "Sure, see you at six.");
    assert!((decision.suffix_score - 1.0 / (1.0 + (-2.95f64).exp())).abs() < 1e-12);
    let seen = seen.lock().unwrap();
    let paths: Vec<&str> = seen.iter().map(|s| s.path.as_str()).collect();
    assert_eq!(paths, ["/generate", "/score", "/score"]);
    let prefix = "Confirm dinner at six.\nSure, see you at six.\n---\n";
    assert_eq!(
        seen[1].body,
        json!({"prefix": prefix, "continuation": "quality is good"})
    );
    assert_eq!(
        seen[2].body,
        json!({"prefix": prefix, "continuation": "quality is bad"})
    );
}
