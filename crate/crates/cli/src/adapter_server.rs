//! Stub adapters behind the wire protocol, for process and HTTP bindings.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::routing::post;
use axum::{Json, Router};
use vt_core::adapters::wire::{AdapterRequest, AdapterResponse};
use vt_core::adapters::StubService;

/// One response line per request line until stdin closes.
pub fn serve_stdio(service: &StubService) -> std::io::Result<()> {
    let stdin = std::io::stdin().lock();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(stdout, "{}", service.handle_line(&line))?;
        stdout.flush()?;
    }
    Ok(())
}

async fn handle(
    State(service): State<Arc<StubService>>,
    Path(op): Path<String>,
    Json(req): Json<AdapterRequest>,
) -> Json<AdapterResponse> {
    if req.op.as_str() != op {
        return Json(AdapterResponse::failure(
            &req.request_id,
            format!("request op {} sent to /v1/{op}", req.op.as_str()),
        ));
    }
    let resp = tokio::task::spawn_blocking(move || service.handle(&req))
        .await
        .unwrap_or_else(|e| AdapterResponse::failure("", e.to_string()));
    Json(resp)
}

pub fn serve_http(service: StubService, addr: SocketAddr) -> std::io::Result<()> {
    let app = Router::new()
        .route("/v1/{op}", post(handle))
        .layer(axum::extract::DefaultBodyLimit::max(512 << 20))
        .with_state(Arc::new(service));
    tokio::runtime::Runtime::new()?.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        // announced on stdout so callers binding port 0 can find it
        println!("listening on {}", listener.local_addr()?);
        log::info!("adapter service on {}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })
}
