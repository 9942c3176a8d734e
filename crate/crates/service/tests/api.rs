//! End-to-end checks of the HTTP API through the router, without a socket.

use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use gp4nldr_core::explain::INITIAL_QUESTION;
use gp4nldr_core::{examples, SessionArchive};
use gp4nldr_service::{app, AppState, ServiceConfig};

fn router() -> Router {
    app(AppState::new(ServiceConfig::default()))
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, Body::from)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn send_json(app: &Router, method: &str, uri: &str, body: Value) -> (StatusCode, Value) {
    let (status, text) = send(app, method, uri, Some(body.to_string())).await;
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}

async fn get_json(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (status, text) = send(app, "GET", uri, None).await;
    (status, serde_json::from_str(&text).unwrap())
}

fn small_config() -> Value {
    json!({ "population_size": 20, "generations": 4, "seed": 3 })
}

async fn wait_done(app: &Router, job: &str) -> Value {
    for _ in 0..600 {
        let (status, body) = get_json(app, &format!("/api/runs/{job}")).await;
        assert_eq!(status, StatusCode::OK);
        if body["state"] == "done" || body["state"] == "failed" {
            return body;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("job {job} did not finish");
}

async fn upload_wine(app: &Router) -> String {
    let (status, text) = send(
        app,
        "POST",
        "/api/datasets?name=Wine&label=class",
        Some(examples::WINE_CSV.to_string()),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{text}");
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["meta"]["n_instances"], 178);
    assert_eq!(body["meta"]["feature_names"].as_array().unwrap().len(), 13);
    body["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn dataset_upload_and_preview() {
    let app = router();
    let id = upload_wine(&app).await;
    let (status, preview) = get_json(&app, &format!("/api/datasets/{id}/preview")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(preview["original"].as_array().unwrap().len(), 10);
    assert_eq!(preview["original"][0][0], 14.23);
    for row in preview["scaled"].as_array().unwrap() {
        assert!(row.as_array().unwrap().iter().all(|v| (0.0..=1.0).contains(&v.as_f64().unwrap())));
    }
    assert_eq!(preview["labels"][0], "class_0");

    let (_, list) = get_json(&app, "/api/datasets").await;
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|d| d["id"].as_str().unwrap()).collect();
    for expected in ["wine", "dermatology", "coil20", id.as_str()] {
        assert!(ids.contains(&expected), "{expected}");
    }
}

#[tokio::test]
async fn invalid_dataset_is_rejected() {
    let app = router();
    let (status, text) = send(&app, "POST", "/api/datasets?label=y", Some("a,y\n1,p\nx,q\n".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let body: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(body["code"], "invalid_dataset");
}

#[tokio::test]
async fn run_lifecycle_is_deterministic() {
    let app = router();
    let dataset = upload_wine(&app).await;
    let mut archives = Vec::new();
    for _ in 0..2 {
        let (status, body) =
            send_json(&app, "POST", "/api/runs", json!({ "dataset_id": dataset, "config": small_config() })).await;
        assert_eq!(status, StatusCode::ACCEPTED);
        let job_id = body["job_id"].as_str().unwrap().to_string();
        let job = wait_done(&app, &job_id).await;
        assert_eq!(job["state"], "done", "{job}");
        assert_eq!(job["progress"], 4);
        assert_eq!(job["fitness_history"].as_array().unwrap().len(), 4);
        let (status, text) = send(&app, "GET", &format!("/api/runs/{job_id}/result"), None).await;
        assert_eq!(status, StatusCode::OK);
        let archive = SessionArchive::from_json(&text).unwrap();
        assert_eq!(archive.result.expressions.len(), 2);
        assert!(archive.chat.is_none());
        archives.push(text);
    }
    assert_eq!(archives[0], archives[1]);
}

#[tokio::test]
async fn invalid_config_names_the_field() {
    let app = router();
    let (status, body) = send_json(
        &app,
        "POST",
        "/api/runs",
        json!({ "dataset_id": "wine", "config": { "final_dimensions": 0 } }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "invalid_config");
    assert_eq!(body["field"], "final_dimensions");

    let (status, body) =
        send_json(&app, "POST", "/api/runs", json!({ "dataset_id": "wine", "config": { "bogus": 1 } })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "invalid_config");
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let app = router();
    for uri in [
        "/api/runs/nope",
        "/api/runs/nope/result",
        "/api/datasets/nope/preview",
        "/api/examples/nope",
        "/api/chat/sessions/nope/export",
    ] {
        let (status, body) = get_json(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(body["code"], "not_found");
    }
    let (status, _) = send_json(&app, "POST", "/api/runs", json!({ "dataset_id": "nope" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) =
        send_json(&app, "POST", "/api/chat/sessions/nope/messages", json!({ "question": "hi" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unfinished_run_has_no_result() {
    let app = router();
    let (_, body) = send_json(
        &app,
        "POST",
        "/api/runs",
        json!({ "dataset_id": "dermatology", "config": { "generations": 100000 } }),
    )
    .await;
    let job = body["job_id"].as_str().unwrap();
    let (status, body) = get_json(&app, &format!("/api/runs/{job}/result")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "run_not_finished");
    let (status, body) =
        send_json(&app, "POST", "/api/chat/sessions", json!({ "run_id": job, "mock": true })).await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
}

#[tokio::test]
async fn examples_are_listed_with_their_settings() {
    let app = router();
    let (status, list) = get_json(&app, "/api/examples").await;
    assert_eq!(status, StatusCode::OK);
    let items = list.as_array().unwrap();
    assert_eq!(items.len(), 3);
    let find = |id: &str| items.iter().find(|e| e["id"] == id).unwrap().clone();
    let wine = find("wine");
    assert_eq!(wine["fitness"], "gpmal");
    assert_eq!(wine["dimensions"], 2);
    assert_eq!(wine["generations"], 100);
    assert_eq!(wine["bloat"]["method"], "lexicographic");
    let derm = find("dermatology");
    assert_eq!(derm["fitness"], "gpmal2");
    assert_eq!(derm["dimensions"], 3);
    let coil = find("coil20");
    assert_eq!(coil["generations"], 1000);
    assert_eq!(coil["bloat"]["method"], "none");

    for e in &examples::EXAMPLES {
        let (status, text) = send(&app, "GET", &format!("/api/examples/{}", e.id), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(text, e.archive);
        assert!(text.len() < 1_000_000, "{} archive is {} bytes", e.id, text.len());
    }
}

#[tokio::test]
async fn chat_flow_with_mock_provider() {
    let app = router();
    let (status, created) = send_json(
        &app,
        "POST",
        "/api/chat/sessions",
        json!({ "example_id": "wine", "mock": true, "word_limit": 60 }),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{created}");
    let id = created["session_id"].as_str().unwrap();
    assert_eq!(created["word_limit"], 60);
    let messages = created["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 2);
    assert_eq!(messages[0]["role"], "human");
    assert_eq!(messages[0]["text"], INITIAL_QUESTION);
    assert_eq!(messages[1]["role"], "ai");

    let (status, reply) = send_json(
        &app,
        "POST",
        &format!("/api/chat/sessions/{id}/messages"),
        json!({ "question": "How does gpmal measure quality?" }),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{reply}");
    assert_eq!(reply["matched_keywords"], json!(["gpmal"]));
    assert!(!reply["retrieved"].as_array().unwrap().is_empty());
    assert!(reply["answer"].as_str().unwrap().contains("How does gpmal measure quality?"));
    assert_eq!(reply["messages"].as_array().unwrap().len(), 4);

    let (status, body) =
        send_json(&app, "POST", &format!("/api/chat/sessions/{id}/messages"), json!({ "question": "  " })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "invalid_question");

    let (status, exported) = send(&app, "GET", &format!("/api/chat/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    let archive = SessionArchive::from_json(&exported).unwrap();
    assert_eq!(archive.chat.as_ref().unwrap().messages.len(), 4);

    let (status, imported) = send(&app, "POST", "/api/sessions/import?mock=true", Some(exported.clone())).await;
    assert_eq!(status, StatusCode::OK, "{imported}");
    let imported: Value = serde_json::from_str(&imported).unwrap();
    let new_id = imported["session_id"].as_str().unwrap();
    let (_, again) = send(&app, "GET", &format!("/api/chat/sessions/{new_id}/export"), None).await;
    assert_eq!(again, exported);

    let (status, reply) = send_json(
        &app,
        "POST",
        &format!("/api/chat/sessions/{new_id}/messages"),
        json!({ "question": "and the second tree?" }),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(reply["messages"].as_array().unwrap().len(), 6);
}

#[tokio::test]
async fn chat_on_a_finished_run() {
    let app = router();
    let (_, body) =
        send_json(&app, "POST", "/api/runs", json!({ "dataset_id": "wine", "config": small_config() })).await;
    let job = body["job_id"].as_str().unwrap().to_string();
    wait_done(&app, &job).await;
    let (status, created) =
        send_json(&app, "POST", "/api/chat/sessions", json!({ "run_id": job, "mock": true })).await;
    assert_eq!(status, StatusCode::OK, "{created}");
    assert_eq!(created["run_ref"], format!("run:{job}"));

    let (_, result) = send(&app, "GET", &format!("/api/runs/{job}/result"), None).await;
    let (status, imported) = send(&app, "POST", "/api/sessions/import?mock=true", Some(result)).await;
    assert_eq!(status, StatusCode::OK, "{imported}");
    let imported: Value = serde_json::from_str(&imported).unwrap();
    assert_eq!(imported["messages"][0]["text"], INITIAL_QUESTION);
}

#[tokio::test]
async fn bad_archives_are_rejected() {
    let app = router();
    let (status, text) =
        send(&app, "POST", "/api/sessions/import", Some(r#"{"format_version":"9"}"#.into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(text.contains("unsupported_version"));
    let (status, text) = send(&app, "POST", "/api/sessions/import", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(text.contains("corrupt_archive"));
}

#[tokio::test]
async fn api_key_never_leaves_the_server() {
    let secret = "sk-do-not-echo-4242";
    let app = router();
    let (status, created) = send(
        &app,
        "POST",
        "/api/chat/sessions",
        Some(json!({ "example_id": "wine", "mock": true, "api_key": secret }).to_string()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(!created.contains(secret));
    let id = serde_json::from_str::<Value>(&created).unwrap()["session_id"].as_str().unwrap().to_string();
    let (_, exported) = send(&app, "GET", &format!("/api/chat/sessions/{id}/export"), None).await;
    assert!(!exported.contains(secret));

    // a real provider pointed at a closed port fails without echoing the key
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let (status, body) = send(
        &app,
        "POST",
        "/api/chat/sessions",
        Some(
            json!({
                "example_id": "wine",
                "api_key": secret,
                "base_url": format!("http://127.0.0.1:{port}/v1"),
            })
            .to_string(),
        ),
    )
    .await;
    assert!(status.is_client_error() || status.is_server_error());
    assert!(!body.contains(secret), "{body}");
}

#[tokio::test]
async fn session_requires_exactly_one_source() {
    let app = router();
    let (status, _) = send_json(&app, "POST", "/api/chat/sessions", json!({ "mock": true })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send_json(
        &app,
        "POST",
        "/api/chat/sessions",
        json!({ "example_id": "wine", "run_id": "x", "mock": true }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = send_json(
        &app,
        "POST",
        "/api/chat/sessions",
        json!({ "example_id": "wine", "mock": true, "word_limit": 0 }),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["field"], "word_limit");
}
