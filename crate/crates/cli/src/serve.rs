//! Stateless JSON-over-HTTP judge: `POST /run` and `POST /eval`.

use std::sync::Arc;

use anyhow::{anyhow, Result};
use naps_core::exec::ExecLimits;
use serde_json::{json, Value as Json};
use tiny_http::{Header, Method, Request, Response, Server};

use crate::ops;

pub fn serve(port: u16, limits: ExecLimits) -> Result<()> {
    let server = Arc::new(Server::http(("127.0.0.1", port)).map_err(|e| anyhow!("bind: {e}"))?);
    println!("listening on http://{}", server.server_addr());
    for request in server.incoming_requests() {
        std::thread::spawn(move || handle(request, limits));
    }
    Ok(())
}

fn handle(mut request: Request, limits: ExecLimits) {
    let mut body = String::new();
    let (status, reply) = match request.as_reader().read_to_string(&mut body) {
        Err(e) => (400, json!({"error": "bad-request", "detail": e.to_string()})),
        Ok(_) => route(request.method(), request.url(), &body, limits),
    };
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    let response = Response::from_string(reply.to_string()).with_status_code(status).with_header(header);
    let _ = request.respond(response);
}

fn route(method: &Method, url: &str, body: &str, limits: ExecLimits) -> (u16, Json) {
    if *method != Method::Post {
        return (405, json!({"error": "method-not-allowed"}));
    }
    let payload: Json = match serde_json::from_str(body) {
        Ok(v) => v,
        Err(e) => return (400, json!({"error": "bad-request", "detail": e.to_string()})),
    };
    let field = |k: &str| payload.get(k).ok_or_else(|| anyhow!("missing field {k:?}"));
    let result = match url {
        "/run" => field("program").and_then(|p| ops::run_response(p, field("input")?, limits)),
        "/eval" => field("program").and_then(|p| ops::eval_response(p, field("tests")?, limits)),
        _ => return (404, json!({"error": "not-found"})),
    };
    match result {
        Ok(v) => (200, v),
        Err(e) => (400, json!({"error": "bad-request", "detail": format!("{e:#}")})),
    }
}
