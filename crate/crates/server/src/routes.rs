//! HTTP endpoints. Page paths are arbitrary, so page requests go through
//! the fallback handler, which splits `/some/page/_action` into the page
//! and the action.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{HeaderMap, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, NaiveDate, NaiveTime, Utc};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value as Json_};
use zsheet::access::{self, auth};
use zsheet::addr::{CellAddr, Range};
use zsheet::path::{canonicalize_path, Path};
use zsheet::recalc::{CellWrite, Command, CommitError, Workbook};
use zsheet::store::{CellAttrs, CellData, GrantChange, Source, StructuralOp, UserOp, ViewKind, WikiInput};

use crate::error::ApiError;
use crate::state::AppState;

type St = State<Arc<AppState>>;
type ApiResult = Result<Response, ApiError>;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/_api/login", post(login))
        .route("/_api/logout", post(logout))
        .route("/_api/whoami", get(whoami))
        .route("/_api/templates", post(save_template).get(list_templates))
        .route("/_api/admin/users", post(admin_users).get(list_users))
        .route("/_api/admin/groups", post(admin_groups).get(list_groups))
        .route("/_api/admin/grants", post(admin_grants))
        .route("/_api/audit/cell", get(audit_cell))
        .route("/_api/audit/user", get(audit_user))
        .fallback(page)
        .with_state(state)
}

fn ok(v: impl serde::Serialize) -> ApiResult {
    Ok(Json(v).into_response())
}

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn token(headers: &HeaderMap) -> Option<&str> {
    if let Some(v) = headers.get("authorization").and_then(|v| v.to_str().ok()) {
        return v.strip_prefix("Bearer ").map(str::trim);
    }
    headers.get("x-session-token").and_then(|v| v.to_str().ok())
}

/// The signed-in user.
fn user(st: &AppState, headers: &HeaderMap) -> Result<String, ApiError> {
    let t = token(headers).ok_or_else(|| ApiError::unauthorized("missing session token"))?;
    st.sessions.resolve(t, Utc::now()).map(|s| s.user).ok_or_else(|| ApiError::unauthorized("invalid or expired session"))
}

fn page_path(raw: &str) -> Result<Path, ApiError> {
    canonicalize_path(raw, &Path::root()).map_err(|e| ApiError::bad_request(format!("bad path `{raw}`: {e}")))
}

fn cell_ref(raw: &str) -> Result<CellAddr, ApiError> {
    raw.trim().parse::<CellAddr>().map_err(|_| ApiError::bad_request(format!("bad cell reference `{raw}`")))
}

/// Form values may arrive as strings, numbers, booleans or null.
fn input_text(v: &Json_) -> Result<String, ApiError> {
    match v {
        Json_::String(s) => Ok(s.clone()),
        Json_::Number(n) => Ok(n.to_string()),
        Json_::Bool(b) => Ok(if *b { "TRUE" } else { "FALSE" }.to_string()),
        Json_::Null => Ok(String::new()),
        other => Err(ApiError::bad_request(format!("unsupported input value {other}"))),
    }
}

#[derive(Deserialize)]
struct LoginBody {
    user: String,
    password: String,
}

async fn login(State(st): St, bytes: Bytes) -> ApiResult {
    let b: LoginBody = body(&bytes)?;
    let stored = st.read().wb.site().users.get(&b.user).cloned();
    match stored {
        Some(u) if auth::verify(&u, &b.password) => {
            let (token, s) = st.sessions.issue(&u.id, Utc::now());
            tracing::info!(user = %u.id, "login");
            ok(json!({ "token": token, "user": s.user, "expires": s.expires }))
        }
        _ => Err(ApiError::unauthorized("unknown user or wrong password")),
    }
}

async fn logout(State(st): St, headers: HeaderMap) -> ApiResult {
    user(&st, &headers)?;
    if let Some(t) = token(&headers) {
        st.sessions.revoke(t);
    }
    ok(json!({ "ok": true }))
}

async fn whoami(State(st): St, headers: HeaderMap) -> ApiResult {
    let u = user(&st, &headers)?;
    let admin = st.read().wb.site().is_admin(&u);
    ok(json!({ "user": u, "admin": admin }))
}

#[derive(Deserialize)]
struct TemplateBody {
    path: String,
    name: String,
}

async fn save_template(State(st): St, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let u = user(&st, &headers)?;
    let b: TemplateBody = body(&bytes)?;
    let path = page_path(&b.path)?;
    let out = st.write(|wb| access::save_template(wb, &u, &path, &b.name))?;
    ok(json!({ "saved": b.name, "seq": out.seq }))
}

async fn list_templates(State(st): St, headers: HeaderMap) -> ApiResult {
    user(&st, &headers)?;
    let names: Vec<String> = st.read().wb.site().templates.keys().cloned().collect();
    ok(json!({ "templates": names }))
}

fn admin(st: &AppState, headers: &HeaderMap) -> Result<String, ApiError> {
    let u = user(st, headers)?;
    access::require_admin(st.read().wb.site(), &u)?;
    Ok(u)
}

#[derive(Deserialize)]
struct UsersBody {
    op: String,
    user: String,
    password: Option<String>,
}

async fn admin_users(State(st): St, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let u = admin(&st, &headers)?;
    let b: UsersBody = body(&bytes)?;
    let password = || b.password.as_deref().ok_or_else(|| ApiError::bad_request("`password` is required"));
    // hashing is slow, so it happens before taking the lock
    let op = match b.op.as_str() {
        "add" => auth::add_user_op(&b.user, password()?),
        "password" => auth::set_password_op(&b.user, password()?),
        "remove" => UserOp::RemoveUser { id: b.user.clone() },
        other => return Err(ApiError::bad_request(format!("unknown op `{other}`"))),
    };
    let out = st.write(|wb| access::admin(wb, &u, Command::UserAdmin(op)))?;
    ok(out)
}

async fn list_users(State(st): St, headers: HeaderMap) -> ApiResult {
    admin(&st, &headers)?;
    let ids: Vec<String> = st.read().wb.site().users.keys().cloned().collect();
    ok(json!({ "users": ids }))
}

#[derive(Deserialize)]
struct GroupsBody {
    op: String,
    group: String,
    user: Option<String>,
}

async fn admin_groups(State(st): St, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let u = admin(&st, &headers)?;
    let b: GroupsBody = body(&bytes)?;
    let member = || b.user.clone().ok_or_else(|| ApiError::bad_request("`user` is required"));
    let op = match b.op.as_str() {
        "add" => UserOp::AddGroup { name: b.group.clone() },
        "remove" => UserOp::RemoveGroup { name: b.group.clone() },
        "add_member" => UserOp::AddMember { group: b.group.clone(), user: member()? },
        "remove_member" => UserOp::RemoveMember { group: b.group.clone(), user: member()? },
        other => return Err(ApiError::bad_request(format!("unknown op `{other}`"))),
    };
    let out = st.write(|wb| access::admin(wb, &u, Command::UserAdmin(op)))?;
    ok(out)
}

async fn list_groups(State(st): St, headers: HeaderMap) -> ApiResult {
    admin(&st, &headers)?;
    ok(json!({ "groups": st.read().wb.site().groups }))
}

#[derive(Deserialize)]
struct GrantsBody {
    op: String,
    path: String,
    view: String,
    group: String,
    #[serde(default)]
    default: bool,
}

async fn admin_grants(State(st): St, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let u = admin(&st, &headers)?;
    let b: GrantsBody = body(&bytes)?;
    let path = page_path(&b.path)?;
    let view: ViewKind = b.view.parse().map_err(ApiError::bad_request)?;
    let change = GrantChange { view, group: b.group.clone(), default: b.default };
    let cmd = match b.op.as_str() {
        "grant" => Command::Grant { path, change },
        "revoke" => Command::Revoke { path, change },
        other => return Err(ApiError::bad_request(format!("unknown op `{other}`"))),
    };
    let out = st.write(|wb| access::admin(wb, &u, cmd))?;
    ok(out)
}

#[derive(Deserialize)]
struct CellQuery {
    path: String,
    #[serde(rename = "ref")]
    cell: String,
}

async fn audit_cell(State(st): St, headers: HeaderMap, Query(q): Query<CellQuery>) -> ApiResult {
    let u = user(&st, &headers)?;
    let path = page_path(&q.path)?;
    let cell = cell_ref(&q.cell)?;
    let book = st.read();
    ok(access::cell_history(&book.wb, &book.audit, &u, &path, cell)?)
}

#[derive(Deserialize)]
struct UserQuery {
    user: String,
    from: Option<String>,
    to: Option<String>,
}

/// RFC 3339 or a bare date; a bare `to` date covers the whole day.
fn bound(raw: Option<&str>, end: bool) -> Result<Option<DateTime<Utc>>, ApiError> {
    let Some(raw) = raw.filter(|s| !s.is_empty()) else { return Ok(None) };
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(Some(t.with_timezone(&Utc)));
    }
    let d = NaiveDate::parse_from_str(raw, "%Y-%m-%d").map_err(|_| ApiError::bad_request(format!("bad time `{raw}`")))?;
    let t = if end { NaiveTime::from_hms_milli_opt(23, 59, 59, 999) } else { Some(NaiveTime::MIN) };
    Ok(t.map(|t| d.and_time(t).and_utc()))
}

async fn audit_user(State(st): St, headers: HeaderMap, Query(q): Query<UserQuery>) -> ApiResult {
    let u = user(&st, &headers)?;
    let (from, to) = (bound(q.from.as_deref(), false)?, bound(q.to.as_deref(), true)?);
    let book = st.read();
    ok(access::user_trail(&book.wb, &book.audit, &u, &q.user, from, to)?)
}

#[derive(Deserialize)]
struct ViewQuery {
    view: Option<String>,
    range: Option<String>,
}

#[derive(Deserialize)]
struct CommitBody {
    updates: Vec<Update>,
}

#[derive(Deserialize)]
struct Update {
    #[serde(rename = "ref")]
    cell: String,
    /// Absent keeps the current source.
    source: Option<String>,
    /// Absent keeps the current wiki attributes.
    wiki: Option<WikiField>,
    format: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WikiField {
    /// A `form.*` formula, or empty to clear.
    Form(String),
    Attrs {
        input: String,
        #[serde(default)]
        options: Vec<String>,
        transaction: Option<String>,
    },
}

fn wiki_attrs(wb: &Workbook, path: &Path, cell: CellAddr, w: &WikiField) -> Result<CellAttrs, ApiError> {
    match w {
        WikiField::Form(text) => Ok(access::wiki_attrs_from_form(wb.site(), path, cell, text)?),
        WikiField::Attrs { input, options, transaction } => {
            let wiki = match input.as_str() {
                "none" => WikiInput::None,
                "text" => WikiInput::Text,
                "select" => WikiInput::Select(options.clone()),
                "radio" => WikiInput::Radio(options.clone()),
                other => return Err(ApiError::bad_request(format!("unknown input kind `{other}`"))),
            };
            let transaction = if wiki.is_none() { None } else { transaction.clone().filter(|t| !t.is_empty()) };
            Ok(CellAttrs { wiki, transaction })
        }
    }
}

fn commit(st: &AppState, u: &str, path: &Path, b: CommitBody) -> ApiResult {
    let cells: Vec<CellAddr> = b.updates.iter().map(|x| cell_ref(&x.cell)).collect::<Result<_, _>>()?;
    let out = st.write(|wb| {
        let mut writes = Vec::new();
        for (cell, upd) in cells.iter().zip(&b.updates) {
            let old = wb.site().pages.get(path).map(|p| p.data(*cell)).unwrap_or_default();
            let source = match &upd.source {
                Some(raw) => Source::from_input(raw)
                    .map_err(|error| CommitError::Parse { path: path.clone(), addr: *cell, error })?,
                None => old.source,
            };
            let attrs = match &upd.wiki {
                Some(w) => wiki_attrs(wb, path, *cell, w)?,
                None => old.attrs,
            };
            let format = match &upd.format {
                Some(f) if f.is_empty() => None,
                Some(f) => Some(f.clone()),
                None => old.format,
            };
            writes.push(CellWrite { path: path.clone(), addr: *cell, data: CellData { source, attrs, format } });
        }
        access::commit_cells(wb, u, path, writes).map_err(ApiError::from)
    })?;
    ok(out)
}

#[derive(Deserialize)]
struct WikiBody {
    transaction: String,
    inputs: BTreeMap<String, Json_>,
}

#[derive(Deserialize)]
struct TableBody {
    op: String,
    row: Option<u32>,
    #[serde(default)]
    values: BTreeMap<String, Json_>,
}

#[derive(Deserialize)]
struct CreateBody {
    cell: String,
}

#[derive(Deserialize)]
struct StructuralBody {
    op: StructuralOp,
    at: u32,
    #[serde(default = "one")]
    count: u32,
}

fn one() -> u32 {
    1
}

#[derive(Deserialize, Default)]
struct NewPageBody {
    template: Option<String>,
}

async fn page(State(st): St, method: Method, uri: Uri, headers: HeaderMap, bytes: Bytes) -> ApiResult {
    let raw = uri.path();
    let (page, action) = match raw.find("/_") {
        Some(i) => (&raw[..=i], Some(raw[i + 2..].trim_end_matches('/'))),
        None => (raw, None),
    };
    let u = user(&st, &headers)?;
    let path = page_path(page)?;
    match (&method, action) {
        (&Method::GET, None) => {
            let q: ViewQuery = Query::try_from_uri(&uri).map(|Query(q)| q).map_err(ApiError::bad_request)?;
            let window = match q.range.as_deref() {
                Some(r) => Some(r.parse::<Range>().map_err(|_| ApiError::bad_request(format!("bad range `{r}`")))?),
                None => None,
            };
            let book = st.read();
            let view = match q.view.as_deref() {
                Some(v) => v.parse::<ViewKind>().map_err(ApiError::bad_request)?,
                None => access::default_view(book.wb.site(), &u, &path).ok_or_else(|| {
                    ApiError::new(StatusCode::FORBIDDEN, "forbidden", format!("`{u}` may not view {path}"))
                })?,
            };
            ok(access::render_view(&book.wb, &u, &path, view, window)?)
        }
        (&Method::POST, Some("commit")) => commit(&st, &u, &path, body(&bytes)?),
        (&Method::POST, Some("wiki")) => {
            let b: WikiBody = body(&bytes)?;
            let mut inputs = BTreeMap::new();
            for (k, v) in &b.inputs {
                inputs.insert(cell_ref(k)?, input_text(v)?);
            }
            ok(st.write(|wb| access::wiki_submit(wb, &u, &path, &b.transaction, &inputs))?)
        }
        (&Method::POST, Some("table")) => {
            let b: TableBody = body(&bytes)?;
            let values: BTreeMap<String, String> =
                b.values.iter().map(|(k, v)| Ok((k.clone(), input_text(v)?))).collect::<Result<_, ApiError>>()?;
            let row = || b.row.ok_or_else(|| ApiError::bad_request("`row` is required"));
            let out = match b.op.as_str() {
                "append" => st.write(|wb| access::table_append(wb, &u, &path, &values))?,
                "update" => {
                    let r = row()?;
                    st.write(|wb| access::table_update(wb, &u, &path, r, &values))?
                }
                "delete" => {
                    let r = row()?;
                    st.write(|wb| access::table_delete(wb, &u, &path, r))?
                }
                other => return Err(ApiError::bad_request(format!("unknown op `{other}`"))),
            };
            ok(out)
        }
        (&Method::POST, Some("action/create")) => {
            let b: CreateBody = body(&bytes)?;
            let cell = cell_ref(&b.cell)?;
            let to = st.write(|wb| access::activate_create_button(wb, &u, &path, cell))?;
            ok(json!({ "redirect": to }))
        }
        (&Method::POST, Some("structural")) => {
            let b: StructuralBody = body(&bytes)?;
            ok(st.write(|wb| access::structural(wb, &u, &path, b.op, b.at, b.count))?)
        }
        (&Method::POST, Some("create")) => {
            let b: NewPageBody = if bytes.is_empty() { NewPageBody::default() } else { body(&bytes)? };
            ok(st.write(|wb| access::create_page(wb, &u, &path, b.template.as_deref()))?)
        }
        (&Method::POST, Some("delete")) => ok(st.write(|wb| access::delete_page(wb, &u, &path))?),
        (_, Some(a)) => Err(ApiError::not_found(format!("no endpoint `_{a}`"))),
        _ => Err(ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", method)),
    }
}
