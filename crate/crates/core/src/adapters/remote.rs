//! Clients for models served out of process: a pool of long-lived child
//! processes speaking one JSON object per line, or an HTTP endpoint.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use parking_lot::Mutex;

use super::stub::format_box;
use super::wire::{AdapterRequest, AdapterResponse, Op};
use super::{
    clamp_boxes, AdapterBinding, AdapterError, AdapterKind, CallContext, Detector, Eraser, QualityScorer, Recognizer,
    Synthesizer, Translator,
};
use crate::scene::{BBox, BinaryMask, SceneImage};

/// Failure of a single exchange. Transient failures are retried once.
#[derive(Debug)]
pub enum TransportFailure {
    Transient(String),
    Malformed(String),
}

pub trait Transport: Send + Sync {
    fn exchange(&self, req: &AdapterRequest) -> Result<AdapterResponse, TransportFailure>;
}

struct Conn {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Conn {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Pool of child processes; each handles one request at a time.
pub struct ProcessTransport {
    command: Vec<String>,
    timeout: Duration,
    slots: Vec<Mutex<Option<Conn>>>,
    next: AtomicUsize,
}

impl ProcessTransport {
    pub fn new(command: Vec<String>, timeout: Duration, pool: usize) -> Result<Self, AdapterError> {
        if command.is_empty() {
            return Err(AdapterError::Config("process adapter needs a command".into()));
        }
        Ok(Self {
            command,
            timeout,
            slots: (0..pool.max(1)).map(|_| Mutex::new(None)).collect(),
            next: AtomicUsize::new(0),
        })
    }

    fn spawn(&self) -> std::io::Result<Conn> {
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    return;
                }
            }
            let _ = tx.send(Err(std::io::ErrorKind::UnexpectedEof.into()));
        });
        Ok(Conn {
            child,
            stdin,
            lines: rx,
        })
    }
}

impl Transport for ProcessTransport {
    fn exchange(&self, req: &AdapterRequest) -> Result<AdapterResponse, TransportFailure> {
        let slot = &self.slots[self.next.fetch_add(1, Ordering::Relaxed) % self.slots.len()];
        let mut guard = slot.lock();
        if guard.is_none() {
            *guard = Some(
                self.spawn()
                    .map_err(|e| TransportFailure::Transient(format!("spawn {:?}: {e}", self.command[0])))?,
            );
        }
        let conn = guard.as_mut().expect("connection present");
        let mut line = serde_json::to_string(req).expect("request serializes");
        line.push('\n');
        let sent = conn.stdin.write_all(line.as_bytes()).and_then(|_| conn.stdin.flush());
        if let Err(e) = sent {
            *guard = None;
            return Err(TransportFailure::Transient(format!("write: {e}")));
        }
        let reply = match conn.lines.recv_timeout(self.timeout) {
            Ok(Ok(l)) => l,
            Ok(Err(e)) => {
                *guard = None;
                return Err(TransportFailure::Transient(format!("read: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                *guard = None;
                return Err(TransportFailure::Transient(format!(
                    "no reply within {:?}",
                    self.timeout
                )));
            }
            Err(RecvTimeoutError::Disconnected) => {
                *guard = None;
                return Err(TransportFailure::Transient("process exited".into()));
            }
        };
        serde_json::from_str(&reply).map_err(|e| {
            // the stream may be out of step now
            *guard = None;
            TransportFailure::Malformed(format!("bad response line: {e}"))
        })
    }
}

pub struct HttpTransport {
    agent: ureq::Agent,
    base: String,
}

impl HttpTransport {
    pub fn new(url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            base: url.trim_end_matches('/').to_string(),
        }
    }
}

impl Transport for HttpTransport {
    fn exchange(&self, req: &AdapterRequest) -> Result<AdapterResponse, TransportFailure> {
        let url = format!("{}/v1/{}", self.base, req.op.as_str());
        let mut resp = self
            .agent
            .post(&url)
            .send_json(req)
            .map_err(|e| TransportFailure::Transient(format!("POST {url}: {e}")))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(512 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| TransportFailure::Transient(format!("read body: {e}")))?;
        match serde_json::from_str::<AdapterResponse>(&body) {
            Ok(r) => Ok(r),
            Err(_) if status >= 500 => Err(TransportFailure::Transient(format!("HTTP {status}"))),
            Err(e) => Err(TransportFailure::Malformed(format!("HTTP {status}: {e}"))),
        }
    }
}

/// One model role behind a transport. Each call is tried twice before the
/// adapter is reported unavailable.
pub struct RemoteAdapter {
    name: String,
    transport: Box<dyn Transport>,
    counter: AtomicU64,
}

impl RemoteAdapter {
    pub fn new(name: impl Into<String>, transport: Box<dyn Transport>) -> Self {
        Self {
            name: name.into(),
            transport,
            counter: AtomicU64::new(0),
        }
    }

    pub fn from_binding(b: &AdapterBinding) -> Result<Self, AdapterError> {
        if !(b.timeout_secs.is_finite() && b.timeout_secs > 0.0) {
            return Err(AdapterError::Config(format!("bad timeout {}", b.timeout_secs)));
        }
        let timeout = Duration::from_secs_f64(b.timeout_secs);
        match b.kind {
            AdapterKind::Process => {
                let cmd = b
                    .command
                    .clone()
                    .ok_or_else(|| AdapterError::Config("process binding lacks command".into()))?;
                let name = cmd.join(" ");
                Ok(Self::new(name, Box::new(ProcessTransport::new(cmd, timeout, b.pool)?)))
            }
            AdapterKind::Http => {
                let url = b
                    .url
                    .clone()
                    .ok_or_else(|| AdapterError::Config("http binding lacks url".into()))?;
                Ok(Self::new(url.clone(), Box::new(HttpTransport::new(&url, timeout))))
            }
            AdapterKind::Stub => Err(AdapterError::Config("stub binding is not remote".into())),
        }
    }

    fn request(&self, op: Op, ctx: &CallContext) -> AdapterRequest {
        let n = self.counter.fetch_add(1, Ordering::Relaxed);
        let id = if ctx.request_id.is_empty() {
            format!("{}-{n}", op.as_str())
        } else {
            format!("{}-{n}", ctx.request_id)
        };
        let mut req = AdapterRequest::new(id, op, ctx.src_lang, ctx.tgt_lang);
        if !ctx.image_id.is_empty() {
            req = req.with_text("image_id", ctx.image_id.clone());
        }
        if let Some(b) = &ctx.bbox {
            req = req.with_text("box", format_box(b));
        }
        req
    }

    fn call(&self, req: &AdapterRequest) -> Result<AdapterResponse, AdapterError> {
        let mut last = String::new();
        for attempt in 0..2 {
            match self.transport.exchange(req) {
                Ok(resp) => {
                    resp.validate_for(req.op, &req.request_id)?;
                    return Ok(resp);
                }
                Err(TransportFailure::Malformed(m)) => return Err(AdapterError::Malformed(m)),
                Err(TransportFailure::Transient(m)) => {
                    log::warn!("{} {} attempt {}: {m}", self.name, req.op.as_str(), attempt + 1);
                    last = m;
                }
            }
        }
        Err(AdapterError::Unavailable(format!("{}: {last}", self.name)))
    }
}

impl Detector for RemoteAdapter {
    fn detect(&self, img: &SceneImage, ctx: &CallContext) -> Result<Vec<BBox>, AdapterError> {
        let req = self.request(Op::Detect, ctx).with_image("image", img)?;
        let boxes = self.call(&req)?.boxes.unwrap_or_default();
        Ok(clamp_boxes(boxes, img))
    }
}

impl Recognizer for RemoteAdapter {
    fn recognize(&self, crop: &SceneImage, ctx: &CallContext) -> Result<(String, f64), AdapterError> {
        let req = self.request(Op::Recognize, ctx).with_image("crop", crop)?;
        let resp = self.call(&req)?;
        let conf = resp.score.unwrap_or(f64::NAN);
        if !(0.0..=1.0).contains(&conf) {
            return Err(AdapterError::Malformed(format!("confidence {conf} outside [0, 1]")));
        }
        Ok((resp.text("text").unwrap_or_default().to_string(), conf))
    }
}

impl Translator for RemoteAdapter {
    fn translate(&self, text: &str, ctx: &CallContext) -> Result<String, AdapterError> {
        if text.trim().is_empty() {
            return Err(AdapterError::EmptyText);
        }
        let req = self.request(Op::Translate, ctx).with_text("text", text);
        Ok(self.call(&req)?.text("text").unwrap_or_default().to_string())
    }
}

impl Eraser for RemoteAdapter {
    fn erase(&self, img: &SceneImage, mask: &BinaryMask, ctx: &CallContext) -> Result<SceneImage, AdapterError> {
        if img.dims() != mask.dims() {
            return Err(AdapterError::DimensionMismatch {
                image: img.dims(),
                mask: mask.dims(),
            });
        }
        let req = self
            .request(Op::Erase, ctx)
            .with_image("image", img)?
            .with_mask("mask", mask)?;
        let out = self.call(&req)?.image("image")?;
        if out.dims() != img.dims() {
            return Err(AdapterError::Malformed(format!(
                "erased image is {:?}, expected {:?}",
                out.dims(),
                img.dims()
            )));
        }
        Ok(out.with_id(img.id()))
    }
}

impl Synthesizer for RemoteAdapter {
    fn synthesize(
        &self,
        source_crop: &SceneImage,
        target_render: &SceneImage,
        ctx: &CallContext,
    ) -> Result<SceneImage, AdapterError> {
        let req = self
            .request(Op::Synthesize, ctx)
            .with_image("source_crop", source_crop)?
            .with_image("target_render", target_render)?;
        let out = self.call(&req)?.image("image")?;
        Ok(if out.dims() == target_render.dims() {
            out
        } else {
            out.resize_nearest(target_render.width(), target_render.height())
        })
    }
}

impl QualityScorer for RemoteAdapter {
    fn score_quality(&self, img: &SceneImage, ctx: &CallContext) -> Result<f64, AdapterError> {
        let req = self.request(Op::ScoreQuality, ctx).with_image("image", img)?;
        let s = self.call(&req)?.score.unwrap_or(f64::NAN);
        if !(0.0..=100.0).contains(&s) {
            return Err(AdapterError::Malformed(format!("quality {s} outside [0, 100]")));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::LangCode;
    use std::sync::atomic::AtomicUsize;

    struct Scripted {
        calls: AtomicUsize,
        reply: Box<dyn Fn(usize, &AdapterRequest) -> Result<AdapterResponse, TransportFailure> + Send + Sync>,
    }

    impl Transport for Scripted {
        fn exchange(&self, req: &AdapterRequest) -> Result<AdapterResponse, TransportFailure> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            (self.reply)(n, req)
        }
    }

    fn adapter(
        f: impl Fn(usize, &AdapterRequest) -> Result<AdapterResponse, TransportFailure> + Send + Sync + 'static,
    ) -> RemoteAdapter {
        RemoteAdapter::new(
            "scripted",
            Box::new(Scripted {
                calls: AtomicUsize::new(0),
                reply: Box::new(f),
            }),
        )
    }

    fn ctx() -> CallContext {
        CallContext::new("t", "img", LangCode::En, LangCode::Hi)
    }

    #[test]
    fn retries_once_then_unavailable() {
        let a = adapter(|n, req| {
            if n == 0 {
                Err(TransportFailure::Transient("hiccup".into()))
            } else {
                Ok(AdapterResponse::ok(&req.request_id).with_text("text", "ok"))
            }
        });
        assert_eq!(a.translate("x", &ctx()).unwrap(), "ok");

        let dead = adapter(|_, _| Err(TransportFailure::Transient("down".into())));
        assert!(matches!(dead.translate("x", &ctx()), Err(AdapterError::Unavailable(_))));
    }

    #[test]
    fn rejects_bad_payloads() {
        let wrong_id = adapter(|_, _| Ok(AdapterResponse::ok("other").with_text("text", "x")));
        assert!(matches!(
            wrong_id.translate("x", &ctx()),
            Err(AdapterError::Malformed(_))
        ));

        let conf = adapter(|_, req| {
            Ok(AdapterResponse {
                score: Some(1.5),
                ..AdapterResponse::ok(&req.request_id).with_text("text", "x")
            })
        });
        let crop = SceneImage::filled("c", 2, 2, [0; 3]);
        assert!(matches!(conf.recognize(&crop, &ctx()), Err(AdapterError::Malformed(_))));

        let failing = adapter(|_, req| Ok(AdapterResponse::failure(&req.request_id, "nope")));
        assert!(matches!(failing.translate("x", &ctx()), Err(AdapterError::Remote(_))));
        assert!(matches!(failing.translate(" ", &ctx()), Err(AdapterError::EmptyText)));
    }

    #[test]
    fn detect_clamps_boxes_and_sends_context() {
        let a = adapter(|_, req| {
            assert_eq!(req.texts.get("image_id").map(String::as_str), Some("img"));
            Ok(AdapterResponse {
                boxes: Some(vec![BBox::new(-2, 0, 5, 5), BBox::new(50, 50, 3, 3)]),
                ..AdapterResponse::ok(&req.request_id)
            })
        });
        let img = SceneImage::filled("img", 10, 10, [0; 3]);
        assert_eq!(a.detect(&img, &ctx()).unwrap(), vec![BBox::new(0, 0, 3, 5)]);
    }

    #[test]
    fn missing_process_is_unavailable() {
        let t = ProcessTransport::new(vec!["/nonexistent/adapter-bin".into()], Duration::from_secs(1), 1).unwrap();
        let a = RemoteAdapter::new("missing", Box::new(t));
        assert!(matches!(a.translate("x", &ctx()), Err(AdapterError::Unavailable(_))));
    }

    #[test]
    fn process_round_trip_through_cat_fails_id_check() {
        // `cat` echoes the request, which parses as a response-shaped object
        // only by accident; it must not be accepted
        let t = ProcessTransport::new(vec!["cat".into()], Duration::from_secs(5), 1).unwrap();
        let a = RemoteAdapter::new("cat", Box::new(t));
        assert!(a.translate("x", &ctx()).is_err());
    }
}
