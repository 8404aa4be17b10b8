#![allow(dead_code)]

use axum::body::Body;
use axum::http::{Request, StatusCode};
use chromashape::catalog::{load_default_pools, ColorPool};
use chromashape::evidence::{EvidenceSource, PoolDims};
use chromashape::synthetic::LatentModel;
use chromashape::LabColor;
use chromashape_service::api::{router, AppState, SESSION_HEADER};
use chromashape_service::{Config, Engine};
use http_body_util::BodyExt;
use tower::ServiceExt;

pub const FULL: PoolDims = PoolDims { colors: 39, shapes: 39 };

pub fn engine_with(evidence: Box<dyn EvidenceSource>) -> Engine {
    let (pool, catalog) = load_default_pools().unwrap();
    Engine::new(pool, catalog, evidence, Config::default()).unwrap()
}

pub fn latent_state(seed: u64) -> AppState {
    AppState::new(engine_with(Box::new(LatentModel::new(FULL, seed))))
}

/// Three colors against the full shape catalog, small enough to run out of swaps.
pub fn small_pool_state() -> AppState {
    let (_, catalog) = load_default_pools().unwrap();
    let labs = [
        LabColor::new(50.0, 0.0, 0.0),
        LabColor::new(60.0, 40.0, 30.0),
        LabColor::new(40.0, -30.0, 20.0),
    ];
    let pool = ColorPool::from_labs(&labs).unwrap();
    let dims = PoolDims {
        colors: 3,
        shapes: catalog.len(),
    };
    let engine = Engine::new(pool, catalog, Box::new(LatentModel::new(dims, 1)), Config::default()).unwrap();
    AppState::new(engine)
}

pub struct Reply {
    pub status: StatusCode,
    pub session: Option<String>,
    pub content_type: String,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    pub fn error_code(&self) -> String {
        self.json()["error"]["code"].as_str().unwrap_or_default().to_owned()
    }

    pub fn error_field(&self) -> String {
        self.json()["error"]["field"].as_str().unwrap_or_default().to_owned()
    }
}

pub async fn call(state: &AppState, method: &str, uri: &str, body: Option<&str>, session: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(s) = session {
        req = req.header(SESSION_HEADER, s);
    }
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_owned())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let session = resp
        .headers()
        .get(SESSION_HEADER)
        .map(|v| v.to_str().unwrap().to_owned());
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_owned())
        .unwrap_or_default();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        session,
        content_type,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}
