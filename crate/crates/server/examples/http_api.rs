//! Drives the HTTP API in-process: login, commit, views, the wiki form and
//! the audit endpoint.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use zsheet::access::auth;
use zsheet::recalc::{Command, Workbook};
use zsheet::store::UserOp;
use zsheet_server::{router, AppState};

async fn call(app: &Router, method: Method, uri: &str, token: Option<&str>, body: Value) -> Value {
    let mut req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    if let Some(t) = token {
        req = req.header("authorization", format!("Bearer {t}"));
    }
    let body = if body.is_null() { Body::empty() } else { Body::from(body.to_string()) };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    println!("{uri} -> {status}");
    v
}

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let mut wb = Workbook::new();
    for (user, group) in [("maker", "admin"), ("clerk", "clerks")] {
        wb.commit("setup", Command::UserAdmin(auth::add_user_op(user, "pw"))).unwrap();
        if group != "admin" {
            wb.commit("setup", Command::UserAdmin(UserOp::AddGroup { name: group.into() })).unwrap();
        }
        wb.commit("setup", Command::UserAdmin(UserOp::AddMember { group: group.into(), user: user.into() })).unwrap();
    }
    let app = router(Arc::new(AppState::ephemeral(wb, b"example secret")));

    let login = |user: &'static str| {
        let app = app.clone();
        async move {
            let v = call(&app, Method::POST, "/_api/login", None, json!({"user": user, "password": "pw"})).await;
            v["token"].as_str().unwrap().to_string()
        }
    };
    let maker = login("maker").await;
    let clerk = login("clerk").await;

    call(&app, Method::POST, "/orders/_create", Some(&maker), Value::Null).await;
    let updates = json!({"updates": [
        {"ref": "a1", "source": "Quantity"},
        {"ref": "b1", "wiki": "=form.input(\"order\")"},
        {"ref": "c1", "source": "=b1*3"},
    ]});
    call(&app, Method::POST, "/orders/_commit", Some(&maker), updates).await;
    let grant = json!({"op": "grant", "path": "/orders/", "view": "wikipage", "group": "clerks"});
    call(&app, Method::POST, "/_api/admin/grants", Some(&maker), grant).await;

    let page = call(&app, Method::GET, "/orders/", Some(&clerk), Value::Null).await;
    println!("{}", serde_json::to_string_pretty(&page).unwrap());
    call(&app, Method::POST, "/orders/_wiki", Some(&clerk), json!({"transaction": "order", "inputs": {"b1": 7}})).await;
    let denied = call(&app, Method::POST, "/orders/_commit", Some(&clerk), json!({"updates": [{"ref": "c1", "source": "0"}]})).await;
    println!("{denied}");
    let history = call(&app, Method::GET, "/_api/audit/cell?path=/orders/&ref=b1", Some(&maker), Value::Null).await;
    println!("{}", serde_json::to_string_pretty(&history).unwrap());
}
