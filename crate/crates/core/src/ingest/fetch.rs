//! Fetching source pages over http(s), or from disk via `file:` URLs.

use std::io::Read;
use std::time::Duration;

use ureq::Agent;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("invalid url {url:?}: {reason}")]
    InvalidUrl { url: String, reason: String },
    #[error("unsupported url scheme {0:?}")]
    UnsupportedScheme(String),
    #[error("fetching {url} failed{}: {reason}", .status.map(|s| format!(" with status {s}")).unwrap_or_default())]
    FetchFailed { url: String, status: Option<u16>, reason: String },
    #[error("{url} exceeds the {limit}-byte cap")]
    TooLarge { url: String, limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FetchConfig {
    pub timeout: Duration,
    pub max_bytes: u64,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self { timeout: Duration::from_secs(20), max_bytes: 5 * 1024 * 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub bytes: Vec<u8>,
    pub content_type: Option<String>,
}

pub fn fetch_source(url: &str, config: &FetchConfig) -> Result<Fetched, FetchError> {
    let parsed = Url::parse(url).map_err(|e| FetchError::InvalidUrl { url: url.into(), reason: e.to_string() })?;
    match parsed.scheme() {
        "file" => fetch_file(url, &parsed, config),
        "http" | "https" => fetch_http(url, config),
        other => Err(FetchError::UnsupportedScheme(other.to_string())),
    }
}

fn fetch_file(url: &str, parsed: &Url, config: &FetchConfig) -> Result<Fetched, FetchError> {
    let path = parsed
        .to_file_path()
        .map_err(|_| FetchError::InvalidUrl { url: url.into(), reason: "not a local file path".into() })?;
    let failed = |e: std::io::Error| FetchError::FetchFailed { url: url.into(), status: None, reason: e.to_string() };
    let file = std::fs::File::open(&path).map_err(failed)?;
    let mut bytes = Vec::new();
    file.take(config.max_bytes + 1).read_to_end(&mut bytes).map_err(failed)?;
    if bytes.len() as u64 > config.max_bytes {
        return Err(FetchError::TooLarge { url: url.into(), limit: config.max_bytes });
    }
    let content_type = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("html" | "htm" | "xhtml") => Some("text/html".to_string()),
        Some("txt") => Some("text/plain".to_string()),
        _ => None,
    };
    Ok(Fetched { bytes, content_type })
}

fn fetch_http(url: &str, config: &FetchConfig) -> Result<Fetched, FetchError> {
    let agent = Agent::new_with_config(
        Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build(),
    );
    let failed = |status, e: ureq::Error| FetchError::FetchFailed { url: url.into(), status, reason: e.to_string() };
    let mut response = agent.get(url).call().map_err(|e| failed(None, e))?;
    let status = response.status().as_u16();
    if !(200..300).contains(&status) {
        return Err(FetchError::FetchFailed {
            url: url.into(),
            status: Some(status),
            reason: response.status().canonical_reason().unwrap_or("error status").to_string(),
        });
    }
    let content_type = response
        .headers()
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .map(str::to_string);
    let bytes = response
        .body_mut()
        .with_config()
        .limit(config.max_bytes)
        .read_to_vec()
        .map_err(|e| match e {
            ureq::Error::BodyExceedsLimit(_) => FetchError::TooLarge { url: url.into(), limit: config.max_bytes },
            other => failed(Some(status), other),
        })?;
    Ok(Fetched { bytes, content_type })
}

/// Decodes a body to text: Latin-1 family charsets byte-for-byte, anything
/// else as UTF-8 with replacement characters.
pub fn decode_body(bytes: &[u8], content_type: Option<&str>) -> String {
    let charset = content_type
        .and_then(|ct| ct.split(';').find_map(|p| p.trim().strip_prefix("charset=").map(|c| c.trim_matches('"').to_ascii_lowercase())));
    match charset.as_deref() {
        Some("iso-8859-1" | "latin1" | "latin-1" | "windows-1252" | "cp1252") => bytes.iter().map(|&b| b as char).collect(),
        _ => {
            let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
            String::from_utf8_lossy(bytes).into_owned()
        }
    }
}

pub fn is_plain_text(content_type: Option<&str>) -> bool {
    content_type.is_some_and(|ct| ct.trim_start().to_ascii_lowercase().starts_with("text/plain"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::net::TcpListener;

    fn file_url(path: &std::path::Path) -> String {
        Url::from_file_path(path).unwrap().to_string()
    }

    #[test]
    fn file_scheme_returns_bytes_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("page.html");
        std::fs::write(&path, b"<p>caf\xc3\xa9</p>").unwrap();
        let got = fetch_source(&file_url(&path), &FetchConfig::default()).unwrap();
        assert_eq!(got.bytes, b"<p>caf\xc3\xa9</p>");
        assert_eq!(got.content_type.as_deref(), Some("text/html"));
    }

    #[test]
    fn file_over_cap_is_too_large() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.txt");
        std::fs::write(&path, vec![b'a'; 101]).unwrap();
        let cfg = FetchConfig { max_bytes: 100, ..Default::default() };
        assert!(matches!(fetch_source(&file_url(&path), &cfg), Err(FetchError::TooLarge { limit: 100, .. })));
        std::fs::write(&path, vec![b'a'; 100]).unwrap();
        assert!(fetch_source(&file_url(&path), &cfg).is_ok());
    }

    #[test]
    fn missing_file_and_bad_schemes() {
        assert!(matches!(
            fetch_source("file:///definitely/not/here.html", &FetchConfig::default()),
            Err(FetchError::FetchFailed { status: None, .. })
        ));
        assert!(matches!(fetch_source("ftp://example.com/x", &FetchConfig::default()), Err(FetchError::UnsupportedScheme(s)) if s == "ftp"));
        assert!(matches!(fetch_source("not a url", &FetchConfig::default()), Err(FetchError::InvalidUrl { .. })));
    }

    fn one_shot_server(status_line: &'static str, body: Vec<u8>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let _ = std::io::Read::read(&mut s, &mut buf);
            let head = format!(
                "HTTP/1.1 {status_line}\r\ncontent-type: text/html; charset=utf-8\r\ncontent-length: {}\r\nconnection: close\r\n\r\n",
                body.len()
            );
            let _ = s.write_all(head.as_bytes());
            let _ = s.write_all(&body);
        });
        format!("http://{addr}/page")
    }

    #[test]
    fn http_status_404_fails_with_status() {
        let url = one_shot_server("404 Not Found", b"nope".to_vec());
        match fetch_source(&url, &FetchConfig::default()) {
            Err(FetchError::FetchFailed { status: Some(404), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn http_body_and_cap() {
        let url = one_shot_server("200 OK", b"<p>ok</p>".to_vec());
        let got = fetch_source(&url, &FetchConfig::default()).unwrap();
        assert_eq!(got.bytes, b"<p>ok</p>");
        assert_eq!(got.content_type.as_deref(), Some("text/html; charset=utf-8"));

        let url = one_shot_server("200 OK", vec![b'x'; 2048]);
        let cfg = FetchConfig { max_bytes: 1000, ..Default::default() };
        assert!(matches!(fetch_source(&url, &cfg), Err(FetchError::TooLarge { .. })));
    }

    #[test]
    fn body_decoding() {
        assert_eq!(decode_body(b"caf\xe9", Some("text/html; charset=ISO-8859-1")), "café");
        assert_eq!(decode_body(b"\xEF\xBB\xBFcaf\xc3\xa9", None), "café");
        assert!(is_plain_text(Some("text/plain; charset=utf-8")));
        assert!(!is_plain_text(Some("text/html")));
    }
}
