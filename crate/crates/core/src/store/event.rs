//! Journal records. One event per user action; the payload carries enough
//! to audit the change (prior and new cell data) and to replay it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::{CellData, ViewKind};
use crate::addr::CellAddr;
use crate::path::Path;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    SetCells,
    CreatePage,
    DeletePage,
    SaveTemplate,
    WikiSubmit,
    StructuralEdit,
    Grant,
    Revoke,
    UserAdmin,
}

impl Action {
    pub const ALL: [Action; 9] = [
        Action::SetCells,
        Action::CreatePage,
        Action::DeletePage,
        Action::SaveTemplate,
        Action::WikiSubmit,
        Action::StructuralEdit,
        Action::Grant,
        Action::Revoke,
        Action::UserAdmin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::SetCells => "SetCells",
            Action::CreatePage => "CreatePage",
            Action::DeletePage => "DeletePage",
            Action::SaveTemplate => "SaveTemplate",
            Action::WikiSubmit => "WikiSubmit",
            Action::StructuralEdit => "StructuralEdit",
            Action::Grant => "Grant",
            Action::Revoke => "Revoke",
            Action::UserAdmin => "UserAdmin",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Action::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown action `{s}`"))
    }
}

/// One cell's content change. `value` is the cell's computed value once
/// the event's commit settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellChange {
    pub path: Path,
    pub cell: CellAddr,
    pub prior: CellData,
    pub new: CellData,
    #[serde(default)]
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedPage {
    pub path: Path,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuralOp {
    InsertRows,
    DeleteRows,
    InsertCols,
    DeleteCols,
    /// Pages created by activating a `create.button`.
    Instantiate,
}

impl FromStr for StructuralOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown op `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralPayload {
    pub op: StructuralOp,
    /// Row or column number for shifts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
    /// Spec text and activating cell for `instantiate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellAddr>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pages: Vec<CreatedPage>,
    /// New values of the `incr` counters this event advanced.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<Path, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redirect: Option<Path>,
    #[serde(default)]
    pub changes: Vec<CellChange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrantChange {
    pub view: ViewKind,
    pub group: String,
    /// Also make (or stop making) `view` the page's default view.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum UserOp {
    AddUser { id: String, salt: String, hash: String },
    SetPassword { id: String, salt: String, hash: String },
    RemoveUser { id: String },
    AddGroup { name: String },
    RemoveGroup { name: String },
    AddMember { group: String, user: String },
    RemoveMember { group: String, user: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    SetCells { changes: Vec<CellChange> },
    CreatePage { pages: Vec<CreatedPage>, changes: Vec<CellChange> },
    /// `changes` lists the removed cells.
    DeletePage { changes: Vec<CellChange> },
    SaveTemplate { name: String },
    WikiSubmit { transaction: String, changes: Vec<CellChange> },
    StructuralEdit(StructuralPayload),
    Grant(GrantChange),
    Revoke(GrantChange),
    UserAdmin(UserOp),
}

#[derive(Serialize, Deserialize)]
struct Changes {
    changes: Vec<CellChange>,
}

#[derive(Serialize, Deserialize)]
struct Created {
    pages: Vec<CreatedPage>,
    #[serde(default)]
    changes: Vec<CellChange>,
}

#[derive(Serialize, Deserialize)]
struct Named {
    name: String,
}

#[derive(Serialize, Deserialize)]
struct Wiki {
    transaction: String,
    changes: Vec<CellChange>,
}

impl Payload {
    pub fn action(&self) -> Action {
        match self {
            Payload::SetCells { .. } => Action::SetCells,
            Payload::CreatePage { .. } => Action::CreatePage,
            Payload::DeletePage { .. } => Action::DeletePage,
            Payload::SaveTemplate { .. } => Action::SaveTemplate,
            Payload::WikiSubmit { .. } => Action::WikiSubmit,
            Payload::StructuralEdit(_) => Action::StructuralEdit,
            Payload::Grant(_) => Action::Grant,
            Payload::Revoke(_) => Action::Revoke,
            Payload::UserAdmin(_) => Action::UserAdmin,
        }
    }

    /// Cell changes carried by this payload, if any.
    pub fn changes(&self) -> &[CellChange] {
        match self {
            Payload::SetCells { changes }
            | Payload::CreatePage { changes, .. }
            | Payload::DeletePage { changes }
            | Payload::WikiSubmit { changes, .. } => changes,
            Payload::StructuralEdit(s) => &s.changes,
            _ => &[],
        }
    }

    pub fn changes_mut(&mut self) -> Option<&mut Vec<CellChange>> {
        match self {
            Payload::SetCells { changes }
            | Payload::CreatePage { changes, .. }
            | Payload::DeletePage { changes }
            | Payload::WikiSubmit { changes, .. } => Some(changes),
            Payload::StructuralEdit(s) => Some(&mut s.changes),
            _ => None,
        }
    }

    fn to_json(&self) -> serde_json::Result<serde_json::Value> {
        use serde_json::to_value;
        match self.clone() {
            Payload::SetCells { changes } | Payload::DeletePage { changes } => to_value(Changes { changes }),
            Payload::CreatePage { pages, changes } => to_value(Created { pages, changes }),
            Payload::SaveTemplate { name } => to_value(Named { name }),
            Payload::WikiSubmit { transaction, changes } => to_value(Wiki { transaction, changes }),
            Payload::StructuralEdit(s) => to_value(s),
            Payload::Grant(g) | Payload::Revoke(g) => to_value(g),
            Payload::UserAdmin(u) => to_value(u),
        }
    }

    fn from_json(action: Action, v: serde_json::Value) -> serde_json::Result<Payload> {
        fn de<T: DeserializeOwned>(v: serde_json::Value) -> serde_json::Result<T> {
            serde_json::from_value(v)
        }
        Ok(match action {
            Action::SetCells => Payload::SetCells { changes: de::<Changes>(v)?.changes },
            Action::DeletePage => Payload::DeletePage { changes: de::<Changes>(v)?.changes },
            Action::CreatePage => {
                let c: Created = de(v)?;
                Payload::CreatePage { pages: c.pages, changes: c.changes }
            }
            Action::SaveTemplate => Payload::SaveTemplate { name: de::<Named>(v)?.name },
            Action::WikiSubmit => {
                let w: Wiki = de(v)?;
                Payload::WikiSubmit { transaction: w.transaction, changes: w.changes }
            }
            Action::StructuralEdit => Payload::StructuralEdit(de(v)?),
            Action::Grant => Payload::Grant(de(v)?),
            Action::Revoke => Payload::Revoke(de(v)?),
            Action::UserAdmin => Payload::UserAdmin(de(v)?),
        })
    }
}

/// A journal record.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub seq: u64,
    /// ISO-8601 UTC.
    pub ts: String,
    pub user: String,
    pub path: Path,
    pub payload: Payload,
}

#[derive(Debug, Error)]
#[error("malformed event: {0}")]
pub struct EventError(pub String);

impl Event {
    pub fn action(&self) -> Action {
        self.payload.action()
    }

    /// One journal line, without the newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("events always serialize")
    }

    pub fn from_line(line: &str) -> Result<Event, EventError> {
        serde_json::from_str(line).map_err(|e| EventError(e.to_string()))
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let payload = self.payload.to_json().map_err(serde::ser::Error::custom)?;
        let mut m = s.serialize_map(Some(6))?;
        m.serialize_entry("seq", &self.seq)?;
        m.serialize_entry("ts", &self.ts)?;
        m.serialize_entry("user", &self.user)?;
        m.serialize_entry("action", self.action().as_str())?;
        m.serialize_entry("path", &self.path)?;
        m.serialize_entry("payload", &payload)?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            seq: u64,
            ts: String,
            user: String,
            action: String,
            path: Path,
            payload: serde_json::Value,
        }
        use serde::de::Error;
        let raw = Raw::deserialize(d)?;
        let action: Action = raw.action.parse().map_err(D::Error::custom)?;
        let payload = Payload::from_json(action, raw.payload).map_err(D::Error::custom)?;
        Ok(Event { seq: raw.seq, ts: raw.ts, user: raw.user, path: raw.path, payload })
    }
}
