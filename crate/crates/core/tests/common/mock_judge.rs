//! Scripted chat-completion endpoint on a local port.

use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

#[derive(Debug, Clone)]
pub enum Step {
    /// Hold the connection open without answering.
    Stall(Duration),
    Reply { status: u16, body: String },
}

impl Step {
    /// A 200 reply whose first choice carries `content`.
    pub fn content(content: &str) -> Step {
        let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]});
        Step::Reply { status: 200, body: body.to_string() }
    }
}

pub struct MockJudge {
    pub url: String,
    /// Raw request bodies in arrival order.
    pub requests: Arc<Mutex<Vec<String>>>,
    /// Authorization header values in arrival order.
    pub auth: Arc<Mutex<Vec<String>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<(String, String)> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut len = 0usize;
    let mut auth = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            match k.trim().to_ascii_lowercase().as_str() {
                "content-length" => len = v.trim().parse().ok()?,
                "authorization" => auth = v.trim().to_string(),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).ok()?;
    Some((String::from_utf8_lossy(&body).into_owned(), auth))
}

/// Serves `script` one step per request; once exhausted, every request gets a 500.
pub fn start(script: Vec<Step>) -> MockJudge {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock");
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let script = Arc::new(Mutex::new(VecDeque::from(script)));
    let requests = Arc::new(Mutex::new(Vec::new()));
    let auth = Arc::new(Mutex::new(Vec::new()));
    let (rq, au) = (requests.clone(), auth.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let (script, rq, au) = (script.clone(), rq.clone(), au.clone());
            thread::spawn(move || {
                let Some((body, a)) = read_request(&mut stream) else { return };
                rq.lock().unwrap().push(body);
                au.lock().unwrap().push(a);
                let step = script.lock().unwrap().pop_front();
                let (status, body) = match step {
                    Some(Step::Stall(d)) => {
                        thread::sleep(d);
                        return;
                    }
                    Some(Step::Reply { status, body }) => (status, body),
                    None => (500, "{}".to_string()),
                };
                let resp = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(resp.as_bytes());
            });
        }
    });
    MockJudge { url, requests, auth }
}
