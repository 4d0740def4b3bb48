#![allow(dead_code)]

pub mod fixtures;

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use chrono::{Datelike, Days, NaiveDate, Weekday};

pub const ANALYST: &str = "potential positive/negative scenarios";
pub const TRADER: &str = "You're an equity trader";
pub const HEAD: &str = "leader of our trading desk";
pub const JUNIOR_HEAD: &str = "Junior trader's suggestion";
pub const SENIOR_HEAD: &str = "Senior trader's suggestion";

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_desksim"))
}

pub fn no_env(_: &str) -> Option<String> {
    None
}

pub fn weekdays(from: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::new();
    let mut d = from;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Synthetic corpus: `n` articles over three tickers on consecutive
/// weekdays, with trading records and closes for every trading day.
pub struct Corpus {
    pub dir: PathBuf,
    pub ids: Vec<String>,
}

impl Corpus {
    pub fn write(dir: &Path, n: usize) -> Self {
        fs::create_dir_all(dir).unwrap();
        let tickers = ["2330", "2317", "2454"];
        let days = weekdays(NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), n + 10);
        let mut news = String::new();
        let mut ids = Vec::new();
        for i in 0..n {
            let id = format!("a{i}");
            let line = serde_json::json!({
                "id": id,
                "date": days[i].to_string(),
                "ticker": tickers[i % 3],
                "title": format!("headline {id}"),
                "content": format!("body of article {id}."),
                "source": "fixture",
            });
            writeln!(news, "{line}").unwrap();
            ids.push(id);
        }
        fs::write(dir.join("news.jsonl"), news).unwrap();

        let mut trading = String::from("date,ticker,total_buy,total_sell,institutions\n");
        let mut prices = String::from("date,ticker,close\n");
        let mut calendar = String::new();
        for (d, day) in days.iter().enumerate() {
            writeln!(calendar, "{day}").unwrap();
            for (t, ticker) in tickers.iter().enumerate() {
                let (buy, sell, inst) = match (d + t) % 4 {
                    0 => (900, 300, 3),
                    1 => (200, 700, 2),
                    2 => (0, 0, 0),
                    _ => (500, 100, 1),
                };
                writeln!(trading, "{day},{ticker},{buy},{sell},{inst}").unwrap();
                let close = 100.0 + ((d * 7 + t * 3) % 11) as f64;
                writeln!(prices, "{day},{ticker},{close}").unwrap();
            }
        }
        fs::write(dir.join("trading.csv"), trading).unwrap();
        fs::write(dir.join("prices.csv"), prices).unwrap();
        fs::write(dir.join("calendar.txt"), calendar).unwrap();
        Corpus { dir: dir.to_path_buf(), ids }
    }

    pub fn news(&self) -> PathBuf {
        self.dir.join("news.jsonl")
    }
}

pub fn toml_str(s: &str) -> String {
    serde_json::to_string(s).unwrap()
}

pub type Rule = (Vec<String>, String);

pub fn rule(contains: &[&str], reply: &str) -> Rule {
    (contains.iter().map(|c| c.to_string()).collect(), reply.to_string())
}

/// A `[backends.NAME]` table for a scripted backend.
pub fn scripted_backend(name: &str, rules: &[Rule]) -> String {
    let mut out = format!("[backends.{name}]\nkind = \"scripted\"\nrules = [\n");
    for (contains, reply) in rules {
        let needles: Vec<String> = contains.iter().map(|c| toml_str(c)).collect();
        writeln!(out, "  {{ contains = [{}], reply = {} }},", needles.join(", "), toml_str(reply)).unwrap();
    }
    out.push_str("]\n");
    out
}

/// Trader action for article `a{i}` used by the deterministic scripts.
pub fn action_for(i: usize) -> &'static str {
    ["long", "short", "neither", "long", "short"][i % 5]
}

/// Scripted analyst, per-article trader and a head trader that follows
/// unless the article number is divisible by 3.
pub fn desk_backends(ids: &[String]) -> String {
    let mut trader = Vec::new();
    let mut head = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        let marker = format!("body of article {id}.");
        trader.push(rule(&[TRADER, &marker], &format!("[Action]: {}\n[Thoughts]: reason {id}", action_for(i))));
        let verdict = if i % 3 == 0 { "Not Follow\n[Thoughts]: too risky" } else { "Follow" };
        head.push(rule(&[HEAD, &marker], &format!("[Action]: {verdict}")));
    }
    let mut out = scripted_backend("analyst", &[rule(&[ANALYST], "Upside: demand. Downside: costs.")]);
    out.push_str(&scripted_backend("trader", &trader));
    out.push_str(&scripted_backend("head", &head));
    out
}

pub struct Request {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Request {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

type Handler = dyn Fn(&Request) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server answering each request through `handler`.
pub struct FakeServer {
    addr: SocketAddr,
    hits: Arc<AtomicUsize>,
    pub requests: Arc<Mutex<Vec<Request>>>,
}

impl FakeServer {
    pub fn start(handler: impl Fn(&Request) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let (h, r) = (hits.clone(), requests.clone());
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let (handler, h, r) = (handler.clone(), h.clone(), r.clone());
                thread::spawn(move || serve(stream, &*handler, &h, &r));
            }
        });
        FakeServer { addr, hits, requests }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn serve(stream: TcpStream, handler: &Handler, hits: &AtomicUsize, log: &Mutex<Vec<Request>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut headers = Vec::new();
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).unwrap();
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let len: usize = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(0);
    let mut body = vec![0u8; len];
    reader.read_exact(&mut body).unwrap();
    let req = Request { method, path, headers, body: String::from_utf8(body).unwrap() };
    hits.fetch_add(1, Ordering::SeqCst);
    let (status, reply) = handler(&req);
    log.lock().unwrap().push(req);
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
        reply.len()
    );
    let _ = stream.flush();
}

/// Accepts and immediately drops connections, counting them.
pub struct RefusingListener {
    addr: SocketAddr,
    accepted: Arc<AtomicUsize>,
}

impl RefusingListener {
    pub fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let accepted = Arc::new(AtomicUsize::new(0));
        let a = accepted.clone();
        thread::spawn(move || {
            for stream in listener.incoming() {
                a.fetch_add(1, Ordering::SeqCst);
                drop(stream);
            }
        });
        RefusingListener { addr, accepted }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn connections(&self) -> usize {
        self.accepted.load(Ordering::SeqCst)
    }
}

/// An OpenAI-style chat completion body.
pub fn openai_reply(text: &str) -> String {
    serde_json::json!({
        "model": "fake-model-0001",
        "choices": [{"message": {"role": "assistant", "content": text}}]
    })
    .to_string()
}

/// Answers chat requests like the scripted desk, keyed on prompt content.
pub fn desk_reply(prompt: &str) -> String {
    if prompt.contains(ANALYST) {
        return "Upside: demand. Downside: costs.".into();
    }
    let id = prompt
        .split("body of article a")
        .nth(1)
        .and_then(|rest| rest.split('.').next())
        .and_then(|n| n.parse::<usize>().ok())
        .unwrap_or(0);
    if prompt.contains(HEAD) {
        return if id % 3 == 0 { "[Action]: Not Follow".into() } else { "[Action]: Follow".into() };
    }
    format!("[Action]: {}\n[Thoughts]: reason a{id}", action_for(id))
}
