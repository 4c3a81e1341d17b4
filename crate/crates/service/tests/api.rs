use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use seqprt_service::{router, Store};

const WATER: [u8; 15] = [1, 0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1];
const ONE_Z: [f64; 9] = [
    4.060319, 5.275465, 3.746557, 7.392921, 5.494262, 3.769297, 5.731144, 6.107487, 5.863672,
];

struct Client {
    store: Arc<Store>,
}

impl Client {
    fn open(dir: &std::path::Path) -> Client {
        Client {
            store: Arc::new(Store::open(dir).unwrap()),
        }
    }

    async fn send(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
            .unwrap();
        let res = router(self.store.clone()).oneshot(req).await.unwrap();
        let status = res.status();
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    async fn create(&self, body: Value) -> (StatusCode, Value) {
        self.send("POST", "/trials", Some(body)).await
    }

    async fn append(&self, id: &str, body: Value) -> (StatusCode, Value) {
        self.send("POST", &format!("/trials/{id}/observations"), Some(body))
            .await
    }
}

fn water_spec() -> Value {
    json!({"family": "one_prop", "side": "right", "null": 0.03, "alpha": 0.005, "beta": 0.2, "n_max": 46})
}

fn one_z_spec(n_max: u32) -> Value {
    json!({"family": "one_z", "side": "right", "null": 3.0, "alpha": 0.005, "beta": 0.2, "n_max": n_max, "sigma0": 1.5})
}

#[tokio::test]
async fn water_session_rejects_after_fifteen_stations() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let (status, trial) = c.create(json!({"spec": water_spec(), "gamma": 18.82})).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(trial["boundaries"]["A"], json!(160.0));
    assert!((trial["boundaries"]["B"].as_f64().unwrap() - 0.20101).abs() < 1e-5);
    assert_eq!(trial["gamma"], json!(18.82));
    assert_eq!(trial["status"], json!("active"));
    let id = trial["id"].as_str().unwrap().to_string();

    for (i, v) in WATER.iter().enumerate() {
        let (status, step) = c.append(&id, json!({"value": v})).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(step["n"], json!(i + 1));
        let kind = step["decision"]["kind"].as_str().unwrap();
        if i < 14 {
            assert_eq!(kind, "continue_sampling");
        } else {
            assert_eq!(kind, "reject_null");
            assert_eq!(step["decision"]["cause"], json!("crossed_a"));
            assert!(step["L"].as_f64().unwrap() >= 160.0);
        }
    }
    let (status, err) = c.append(&id, json!({"value": 0})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], json!("terminal"));

    let (_, snap) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["trajectory"].as_array().unwrap().len(), 15);
    assert_eq!(snap["observations"].as_array().unwrap().len(), 15);
    assert_eq!(snap["status"], json!("rejected_null"));
}

#[tokio::test]
async fn restart_refolds_the_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let id;
    let before;
    {
        let c = Client::open(dir.path());
        let (_, trial) = c.create(json!({"spec": one_z_spec(30), "gamma": 27.856})).await;
        id = trial["id"].as_str().unwrap().to_string();
        for x in &ONE_Z[..5] {
            c.append(&id, json!({"value": x})).await;
        }
        before = c.send("GET", &format!("/trials/{id}"), None).await.1;
    }
    let c = Client::open(dir.path());
    let (status, after) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after, before);

    for x in &ONE_Z[5..] {
        c.append(&id, json!({"value": x})).await;
    }
    let (_, snap) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["decision"]["kind"], json!("reject_null"));
    assert_eq!(snap["decision"]["at_n"], json!(9));
    let last = snap["trajectory"].as_array().unwrap().last().unwrap().clone();
    assert!(last["log_lr"].as_f64().unwrap() >= 160f64.ln());
}

#[tokio::test]
async fn torn_final_line_is_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let c = Client::open(dir.path());
        let (_, trial) = c.create(json!({"spec": one_z_spec(30), "gamma": 27.856})).await;
        let id = trial["id"].as_str().unwrap().to_string();
        c.append(&id, json!({"value": 4.0})).await;
        id
    };
    let path = dir.path().join(format!("{id}.jsonl"));
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"event\":\"observation\",\"at\":1,\"obser");
    std::fs::write(&path, text).unwrap();
    let c = Client::open(dir.path());
    let (_, snap) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["n"], json!(1));
}

#[tokio::test]
async fn create_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let body = json!({"spec": water_spec(), "gamma": 18.82, "idempotency_key": "k1"});
    let (s1, a) = c.create(body.clone()).await;
    let (s2, b) = c.create(body.clone()).await;
    assert_eq!((s1, s2), (StatusCode::CREATED, StatusCode::OK));
    assert_eq!(a["id"], b["id"]);
    let c = Client::open(dir.path());
    let (s3, d) = c.create(body).await;
    assert_eq!(s3, StatusCode::OK);
    assert_eq!(a["id"], d["id"]);
    assert_eq!(c.send("GET", "/trials", None).await.1.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn append_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let (_, trial) = c.create(json!({"spec": one_z_spec(30), "gamma": 27.856})).await;
    let id = trial["id"].as_str().unwrap();
    let (_, first) = c.append(id, json!({"value": 4.06, "idempotency_key": "obs-1"})).await;
    let (_, again) = c.append(id, json!({"value": 4.06, "idempotency_key": "obs-1"})).await;
    assert_eq!(first["replayed"], json!(false));
    assert_eq!(again["replayed"], json!(true));
    assert_eq!(first["index"], again["index"]);
    assert_eq!(first["log_lr"], again["log_lr"]);
    let c = Client::open(dir.path());
    let (_, after_restart) = c.append(id, json!({"value": 4.06, "idempotency_key": "obs-1"})).await;
    assert_eq!(after_restart["replayed"], json!(true));
    let (_, snap) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["n"], json!(1));
}

#[tokio::test]
async fn concurrent_appends_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let c = Arc::new(Client::open(dir.path()));
    let (_, trial) = c
        .create(json!({"spec": {"family": "one_z", "side": "right", "null": 0.0, "alpha": 0.005, "beta": 0.2, "n_max": 1000, "sigma0": 1.0}, "gamma": 20.0}))
        .await;
    let id = trial["id"].as_str().unwrap().to_string();
    let half = trial["alternatives"][0]["theta1"].as_f64().unwrap() / 2.0;
    let tasks: Vec<_> = (0..40)
        .map(|i| {
            let (c, id) = (c.clone(), id.clone());
            tokio::spawn(async move {
                c.append(&id, json!({"value": half, "idempotency_key": format!("k{i}")}))
                    .await
            })
        })
        .collect();
    let mut indices = Vec::new();
    for t in tasks {
        let (status, step) = t.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        indices.push(step["index"].as_u64().unwrap());
    }
    indices.sort_unstable();
    assert_eq!(indices, (0..40).collect::<Vec<_>>());
    let c2 = Client::open(dir.path());
    let (_, snap) = c2.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["n"], json!(40));
}

#[tokio::test]
async fn two_sample_values_and_groups() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let spec = json!({"family": "two_t", "side": "right", "null": 0.0, "alpha": 0.005, "beta": 0.2, "n_max": 30, "n2_max": 30});
    let (_, trial) = c.create(json!({"spec": spec, "gamma": 32.972})).await;
    let id = trial["id"].as_str().unwrap();
    let (s, step) = c.append(id, json!({"values": [-0.9397, 0.6546]})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(step["log_lr"], Value::Null);
    let (_, step) = c.append(id, json!({"group": 1, "value": 0.2755})).await;
    assert_eq!(step["n"], json!(1));
    let (_, step) = c.append(id, json!({"group": 2, "value": 2.2773})).await;
    assert_eq!(step["n"], json!(2));
    assert!(step["log_lr"].is_number());
    let (s, err) = c.append(id, json!({"value": 1.0})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(err["code"], json!("bad_request"));
}

#[tokio::test]
async fn error_responses() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let (s, e) = c.send("GET", "/trials/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["code"], json!("not_found"));
    assert!(e["message"].is_string());

    let mut bad = one_z_spec(30);
    bad["alpha"] = json!(1.5);
    let (s, e) = c.create(json!({"spec": bad, "gamma": 20.0})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], json!("invalid_spec"));
    assert!(e["message"].as_str().unwrap().contains("alpha"));

    let tiny = json!({"family": "one_prop", "side": "right", "null": 0.5, "alpha": 0.005, "beta": 0.2, "n_max": 5});
    let (s, e) = c.create(json!({"spec": tiny, "gamma": 20.0})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["code"], json!("infeasible"));

    let (s, _) = c.create(json!({"spec": one_z_spec(30)})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = c.send("POST", "/trials", Some(json!("not an object"))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (_, trial) = c.create(json!({"spec": water_spec(), "gamma": 18.82})).await;
    let id = trial["id"].as_str().unwrap();
    let (s, e) = c.append(id, json!({"value": 0.5})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["code"], json!("invalid_observation"));
    let (s, _) = c.append(id, json!({"values": [1, 2, 3]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = c.append("nope", json!({"value": 1})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (_, snap) = c.send("GET", &format!("/trials/{id}"), None).await;
    assert_eq!(snap["n"], json!(0));
}

#[tokio::test]
async fn list_and_delete() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let mut ids = Vec::new();
    for _ in 0..3 {
        let (_, t) = c.create(json!({"spec": one_z_spec(30), "gamma": 27.856})).await;
        ids.push(t["id"].as_str().unwrap().to_string());
        tokio::time::sleep(std::time::Duration::from_millis(3)).await;
    }
    tokio::time::sleep(std::time::Duration::from_millis(3)).await;
    c.append(&ids[0], json!({"value": 3.5})).await;
    let (_, list) = c.send("GET", "/trials", None).await;
    let order: Vec<&str> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["id"].as_str().unwrap())
        .collect();
    assert_eq!(order, vec![ids[0].as_str(), ids[2].as_str(), ids[1].as_str()]);
    let stamps: Vec<u64> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["updated_at"].as_u64().unwrap())
        .collect();
    assert!(stamps.windows(2).all(|w| w[0] >= w[1]));

    let uri = format!("/trials/{}", ids[1]);
    assert_eq!(c.send("DELETE", &uri, None).await.0, StatusCode::NO_CONTENT);
    assert_eq!(c.send("DELETE", &uri, None).await.0, StatusCode::NO_CONTENT);
    assert_eq!(c.send("GET", &uri, None).await.0, StatusCode::NOT_FOUND);
    let c = Client::open(dir.path());
    assert_eq!(c.send("GET", &uri, None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(c.send("GET", "/trials", None).await.1.as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn calibrated_sessions_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let c = Client::open(dir.path());
    let body = json!({"spec": one_z_spec(30), "calibrate": {"reps": 20000, "seed": 7}});
    let (s, a) = c.create(body.clone()).await;
    assert_eq!(s, StatusCode::CREATED);
    let (_, b) = c.create(body).await;
    assert_eq!(a["gamma"], b["gamma"]);
    assert_eq!(a["calibration"]["n_reps"], json!(20000));
    let g = a["gamma"].as_f64().unwrap();
    assert!(g > 20.0 && g < 40.0);

    let (s, e) = c
        .create(json!({"spec": water_spec(), "calibrate": {"exact": true}}))
        .await;
    assert_eq!(s, StatusCode::CREATED, "{e}");
    assert_eq!(e["calibration"]["method"], json!("exact_dp"));
}
