//! Drives the HTTP API in-process: a payoff query, a best-response query and
//! a short session, printing each JSON response.

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use qmh_server::service::{router, ServiceConfig};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap_or(Value::Null)
}

#[tokio::main]
async fn main() {
    let app = router(&ServiceConfig::default());

    let payoff = call(
        &app,
        "POST",
        "/api/payoff",
        json!({"regime": "entangled", "alice": "fair-h", "bob": "identity", "gamma": 0.7}),
    )
    .await;
    println!("payoff: {payoff}");

    let advice = call(
        &app,
        "POST",
        "/api/best-response",
        json!({"respond_as": "bob", "regime": "entangled", "opponent": "uniform-shuffles", "starts": 8}),
    )
    .await;
    println!("best reply to the shuffle mixture: value {}, branch {}", advice["value"], advice["gamma_branch"]);

    let created = call(
        &app,
        "POST",
        "/api/session",
        json!({"regime": "entangled", "alice_policy": "adaptive-counter", "seed": 7}),
    )
    .await;
    let id = created["session_id"].as_str().unwrap().to_string();
    for _ in 0..3 {
        let r = call(
            &app,
            "POST",
            &format!("/api/session/{id}/round"),
            json!({"bob": {"preset": "identity"}, "gamma": std::f64::consts::FRAC_PI_2}),
        )
        .await;
        println!(
            "round {}: win {}, expected {:.3}, Alice revealed {}",
            r["round"], r["outcome"]["bob_wins"], r["expected_payoff"].as_f64().unwrap(), r["alice_revealed"]["label"]
        );
    }
    let state = call(&app, "GET", &format!("/api/session/{id}"), Value::Null).await;
    println!("scores {}", state["scores"]);
}
