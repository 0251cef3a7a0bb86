//! Layout, navigation, form and structural functions. They only describe
//! what to render; activation happens in the access layer.

use serde::{Deserialize, Serialize};

use super::{txt, Registry};
use crate::engine::Arg;
use crate::path::{canonicalize_path, Path};
use crate::store::PathSpec;
use crate::value::{ErrorKind, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    Text,
    Select,
    Radio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<Path>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<MenuEntry>,
}

/// A cell value that the client renders as a control rather than text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenderDirective {
    Box { w: u32, h: u32, title: String, body: String, footer: String },
    Menu { entries: Vec<MenuEntry> },
    FormControl { control: ControlKind, options: Vec<String>, transaction: String },
    CreateButton { label: String, path_spec: String },
}

impl RenderDirective {
    /// Plain-text stand-in used when the directive is shown as text.
    pub fn label(&self) -> &str {
        match self {
            RenderDirective::Box { title, .. } => title,
            RenderDirective::Menu { .. } => "",
            RenderDirective::FormControl { .. } => "",
            RenderDirective::CreateButton { label, .. } => label,
        }
    }
}

fn render(d: RenderDirective) -> Value {
    Value::Render(Box::new(d))
}

fn err(k: ErrorKind) -> Value {
    Value::Error(k)
}

/// `Label|/path/` or a bare `/path/` becomes a link.
fn menu_entry(text: String) -> MenuEntry {
    let (label, target) = match text.split_once('|') {
        Some((l, t)) => (l.to_string(), t.trim().to_string()),
        None => (text.clone(), text.trim().to_string()),
    };
    let link = target.starts_with('/').then(|| canonicalize_path(&target, &Path::root()).ok()).flatten();
    MenuEntry { label, link, children: Vec::new() }
}

/// Entries for one argument value. A nested menu becomes a submenu headed
/// by its first entry; deeper nesting is flattened away.
fn push_entries(v: &Value, out: &mut Vec<MenuEntry>) -> Result<(), ErrorKind> {
    match v {
        Value::Blank => {}
        Value::Error(k) => return Err(*k),
        Value::Render(d) => match d.as_ref() {
            RenderDirective::Menu { entries } if !entries.is_empty() => {
                let strip = |e: &MenuEntry| MenuEntry { children: Vec::new(), ..e.clone() };
                let mut head = strip(&entries[0]);
                head.children = entries[0].children.iter().chain(&entries[1..]).map(strip).collect();
                out.push(head);
            }
            RenderDirective::Menu { .. } => {}
            _ => return Err(ErrorKind::Value),
        },
        other => out.push(menu_entry(other.to_string())),
    }
    Ok(())
}

/// Option list from a reference (non-blank cells) or comma-separated text.
fn options(a: &Arg) -> Result<Vec<String>, ErrorKind> {
    let opts: Vec<String> = match a {
        Arg::Ref(arr) => {
            let mut v = Vec::new();
            for x in &arr.data {
                match x {
                    Value::Blank => {}
                    Value::Error(k) => return Err(*k),
                    Value::Render(_) => return Err(ErrorKind::Value),
                    other => v.push(other.to_string()),
                }
            }
            v
        }
        Arg::Value(_) => txt(a)?.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
    };
    if opts.is_empty() {
        Err(ErrorKind::Value)
    } else {
        Ok(opts)
    }
}

fn transaction(args: &[Arg], i: usize) -> Result<String, ErrorKind> {
    args.get(i).map_or(Ok(String::new()), txt)
}

fn choice(control: ControlKind, a: &[Arg]) -> Value {
    match (options(&a[0]), transaction(a, 1)) {
        (Ok(options), Ok(transaction)) => render(RenderDirective::FormControl { control, options, transaction }),
        (Err(k), _) | (_, Err(k)) => err(k),
    }
}

pub(super) fn register(r: &mut Registry) {
    r.fixed("html.box.4x8", 3, |_, a| match (txt(&a[0]), txt(&a[1]), txt(&a[2])) {
        (Ok(title), Ok(body), Ok(footer)) => render(RenderDirective::Box { w: 4, h: 8, title, body, footer }),
        (Err(k), _, _) | (_, Err(k), _) | (_, _, Err(k)) => err(k),
    });
    r.scalar("html.menu", 1, None, |_, a| {
        let mut entries = Vec::new();
        for arg in a {
            let res = match arg {
                Arg::Ref(arr) => arr.data.iter().try_for_each(|v| push_entries(v, &mut entries)),
                Arg::Value(v) => push_entries(v, &mut entries),
            };
            if let Err(k) = res {
                return err(k);
            }
        }
        render(RenderDirective::Menu { entries })
    });
    r.scalar("form.input", 0, Some(1), |_, a| match transaction(a, 0) {
        Ok(transaction) => render(RenderDirective::FormControl { control: ControlKind::Text, options: Vec::new(), transaction }),
        Err(k) => err(k),
    });
    r.scalar("form.select", 1, Some(2), |_, a| choice(ControlKind::Select, a));
    r.scalar("form.radio", 1, Some(2), |_, a| choice(ControlKind::Radio, a));
    r.fixed("create.button", 2, |_, a| match (txt(&a[0]), txt(&a[1])) {
        (Ok(label), Ok(spec)) => match PathSpec::parse(&spec) {
            Ok(_) => render(RenderDirective::CreateButton { label, path_spec: spec }),
            Err(_) => err(ErrorKind::Value),
        },
        (Err(k), _) | (_, Err(k)) => err(k),
    });
}
