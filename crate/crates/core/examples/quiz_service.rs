//! The quiz HTTP API driven in-process: fetch a question, answer it, read
//! the grade. `tutorweb serve` exposes the same router on a port.
//!
//! ```text
//! cargo run --example quiz_service
//! ```

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use tutorweb::service::{router, Roster, RosterEntry, ServiceState, SharedState};
use tutorweb::trial_sim::calibrated_lecture;
use tutorweb::{AllocationPolicy, StudentId};

async fn call(state: &SharedState, method: &str, uri: &str, body: Option<Value>) -> Value {
    let req = Request::builder().method(method).uri(uri).header("X-Student-Token", "ann-token");
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    println!("{method} {uri} -> {status}\n  {v}");
    v
}

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let (content, bank, lecture) = calibrated_lecture(10);
    let roster = Roster {
        admin_key: None,
        students: vec![RosterEntry { id: StudentId::from("ann"), token: "ann-token".into(), consent: true }],
    };
    let state = ServiceState::in_memory(content, bank, roster, AllocationPolicy::default(), 1).into_shared();
    let lec = &lecture.0;
    for _ in 0..3 {
        let q = call(&state, "GET", &format!("/api/lecture/{lec}/question"), None).await;
        call(&state, "POST", &format!("/api/lecture/{lec}/answer"), Some(json!({"question": q["question"], "answer_index": 0})))
            .await;
    }
    call(&state, "GET", &format!("/api/lecture/{lec}/grade"), None).await;
}
