#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use zsheet::access::auth;
use zsheet::path::Path;
use zsheet::recalc::{Command, Workbook};
use zsheet::store::{GrantChange, UserOp, ViewKind};
use zsheet_server::{router, AppState};

pub const PASSWORD: &str = "correct horse";

pub struct Client {
    pub app: Router,
    pub state: Arc<AppState>,
}

impl Client {
    pub fn new(wb: Workbook) -> Client {
        let state = Arc::new(AppState::ephemeral(wb, b"test secret"));
        Client { app: router(state.clone()), state }
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        self.raw(method, uri, token, body.map(|b| b.to_string())).await
    }

    pub async fn raw(&self, method: Method, uri: &str, token: Option<&str>, body: Option<String>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = req.body(body.map_or_else(Body::empty, Body::from)).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let json = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, json)
    }

    pub async fn get(&self, uri: &str, token: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, Some(token), None).await
    }

    pub async fn post(&self, uri: &str, token: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(token), Some(body)).await
    }

    pub async fn login(&self, user: &str) -> String {
        let (s, v) = self
            .call(Method::POST, "/_api/login", None, Some(serde_json::json!({"user": user, "password": PASSWORD})))
            .await;
        assert_eq!(s, StatusCode::OK, "{v}");
        v["token"].as_str().unwrap().to_string()
    }
}

pub fn p(s: &str) -> Path {
    Path::parse(s).unwrap()
}

/// Users with the shared test password, each in the listed groups.
pub fn with_users(wb: &mut Workbook, users: &[(&str, &[&str])]) {
    for (id, groups) in users {
        wb.commit("setup", Command::UserAdmin(auth::add_user_op(id, PASSWORD))).unwrap();
        for g in *groups {
            if !wb.site().groups.contains_key(*g) {
                wb.commit("setup", Command::UserAdmin(UserOp::AddGroup { name: g.to_string() })).unwrap();
            }
            wb.commit("setup", Command::UserAdmin(UserOp::AddMember { group: g.to_string(), user: id.to_string() }))
                .unwrap();
        }
    }
}

pub fn grant(wb: &mut Workbook, path: &str, view: ViewKind, group: &str) {
    let change = GrantChange { view, group: group.into(), default: false };
    wb.commit("setup", Command::Grant { path: p(path), change }).unwrap();
}

pub fn pages(wb: &mut Workbook, paths: &[&str]) {
    for path in paths {
        wb.commit("setup", Command::create(&p(path), None)).unwrap();
    }
}
