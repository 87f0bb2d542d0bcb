//! Remote-generator client against a local stub HTTP server.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use exm_cli::qrng::{RemoteBits, RemoteError};
use exm_core::random::BitSource;

/// Serves canned HTTP responses, one per accepted connection.
fn stub_server(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
    let address = format!("http://{}/bits", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut request_lines = Vec::new();
        for (status, body) in responses {
            let (mut socket, _) = listener.accept().expect("accept");
            let mut buffer = [0u8; 2048];
            let read = socket.read(&mut buffer).unwrap_or(0);
            let request = String::from_utf8_lossy(&buffer[..read]).to_string();
            request_lines.push(request.lines().next().unwrap_or_default().to_string());
            let reason = if status == 200 {
                "OK"
            } else {
                "Internal Server Error"
            };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\n\
                 Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = socket.write_all(response.as_bytes());
        }
        request_lines
    });
    (address, handle)
}

#[test]
fn eight_bits_from_byte_0xa5_msb_first() {
    let (url, server) = stub_server(vec![(200, r#"{"type":"uint8","data":[165]}"#.into())]);
    let mut client = RemoteBits::with_policy(url, Some("sekrit".into()), 0, Duration::ZERO);
    let bits = client.fetch_bits(8).unwrap();
    assert_eq!(bits, vec![1, 0, 1, 0, 0, 1, 0, 1]);
    let requests = server.join().unwrap();
    assert!(requests[0].contains("length="));
    assert!(requests[0].starts_with("GET /bits?"));
}

#[test]
fn surplus_bits_are_buffered_across_calls() {
    let (url, server) = stub_server(vec![(200, "[165, 255]".into())]);
    let mut client = RemoteBits::with_policy(url, None, 0, Duration::ZERO);
    assert_eq!(client.fetch_bits(4).unwrap(), vec![1, 0, 1, 0]);
    // Served from the buffer; the stub only answers once.
    assert_eq!(client.fetch_bits(4).unwrap(), vec![0, 1, 0, 1]);
    assert_eq!(client.fetch_bits(8).unwrap(), vec![1; 8]);
    server.join().unwrap();
}

#[test]
fn server_errors_exhaust_retries() {
    let (url, server) = stub_server(vec![
        (500, "oops".into()),
        (500, "oops".into()),
        (500, "oops".into()),
    ]);
    let mut client = RemoteBits::with_policy(url, None, 2, Duration::ZERO);
    match client.fetch_bits(8) {
        Err(RemoteError::Unreachable(_)) => {}
        other => panic!("expected unreachable after retries, got {other:?}"),
    }
    assert_eq!(server.join().unwrap().len(), 3);
}

#[test]
fn malformed_payload_is_a_protocol_error_without_retries() {
    let (url, server) = stub_server(vec![(200, r#"{"data": "not-an-array"}"#.into())]);
    let mut client = RemoteBits::with_policy(url, None, 3, Duration::ZERO);
    match client.fetch_bits(8) {
        Err(RemoteError::Protocol(_)) => {}
        other => panic!("expected protocol error, got {other:?}"),
    }
    // Exactly one request: protocol errors must not be retried.
    assert_eq!(server.join().unwrap().len(), 1);
}

#[test]
fn transient_failure_then_success_recovers() {
    let (url, server) = stub_server(vec![(500, "flaky".into()), (200, "[128]".into())]);
    let mut client = RemoteBits::with_policy(url, None, 2, Duration::ZERO);
    assert_eq!(client.fetch_bits(8).unwrap(), vec![1, 0, 0, 0, 0, 0, 0, 0]);
    server.join().unwrap();
}

#[test]
fn machine_run_draws_from_the_stub() {
    // Enough bytes that the 64-byte batch request is satisfied in one go.
    let bytes: Vec<String> = std::iter::repeat_n("170".to_string(), 64).collect();
    let body = format!("[{}]", bytes.join(","));
    let (url, server) = stub_server(vec![(200, body)]);
    let mut client = RemoteBits::with_policy(url, None, 0, Duration::ZERO);
    let machine = exm_core::machines::random_walk();
    let output = exm_core::engine::run(
        &machine,
        "# ##",
        &mut client,
        exm_core::engine::RunOptions::default().max_steps(64),
    )
    .unwrap();
    assert_eq!(output.outcome, exm_core::engine::RunOutcome::StepLimit);
    assert!(output.report.bits_consumed > 0);
    assert_eq!(client.bits_consumed(), output.report.bits_consumed);
    server.join().unwrap();
}
