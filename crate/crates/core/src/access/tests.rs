use super::*;
use crate::store::{GrantChange, UserOp};

fn p(s: &str) -> Path {
    Path::parse(s).unwrap()
}

fn a(s: &str) -> CellAddr {
    s.parse().unwrap()
}

fn add_user(wb: &mut Workbook, id: &str, groups: &[&str]) {
    wb.commit("root", Command::UserAdmin(UserOp::AddUser { id: id.into(), salt: String::new(), hash: String::new() }))
        .unwrap();
    for g in groups {
        if !wb.site().groups.contains_key(*g) {
            wb.commit("root", Command::UserAdmin(UserOp::AddGroup { name: g.to_string() })).unwrap();
        }
        wb.commit("root", Command::UserAdmin(UserOp::AddMember { group: g.to_string(), user: id.into() })).unwrap();
    }
}

fn grant(wb: &mut Workbook, path: &str, view: ViewKind, group: &str) {
    let change = GrantChange { view, group: group.into(), default: false };
    wb.commit("root", Command::Grant { path: p(path), change }).unwrap();
}

fn site() -> Workbook {
    let mut wb = Workbook::new();
    add_user(&mut wb, "root", &["admin"]);
    add_user(&mut wb, "sam", &["staff"]);
    add_user(&mut wb, "olly", &["outsiders"]);
    for path in ["/reports/", "/reports/2011/", "/reports/2011/q1/", "/other/"] {
        wb.commit("root", Command::create(&p(path), None)).unwrap();
    }
    wb
}

/// Walks ancestors by hand, nearest record per view first.
fn oracle(wb: &Workbook, user: &str, path: &Path, view: ViewKind) -> bool {
    let s = wb.site();
    if !s.users.contains_key(user) {
        return false;
    }
    if s.groups["admin"].contains(user) {
        return true;
    }
    let implied: &[ViewKind] = match view {
        ViewKind::Spreadsheet => &[ViewKind::Spreadsheet],
        ViewKind::Table => &[ViewKind::Spreadsheet, ViewKind::Table],
        ViewKind::Wikipage => &[ViewKind::Spreadsheet, ViewKind::Table, ViewKind::Wikipage],
        ViewKind::Webpage => &[ViewKind::Spreadsheet, ViewKind::Table, ViewKind::Wikipage, ViewKind::Webpage],
        ViewKind::Log => &[ViewKind::Log],
    };
    implied.iter().any(|w| {
        let mut cur = Some(path.clone());
        while let Some(c) = cur {
            if let Some(groups) = s.pages.get(&c).and_then(|pg| pg.perms.get(w)) {
                return groups.iter().any(|g| s.groups.get(g).is_some_and(|m| m.contains(user)));
            }
            cur = c.parent();
        }
        false
    })
}

#[test]
fn default_deny() {
    let wb = site();
    for v in ViewKind::ALL {
        assert!(!check(wb.site(), "sam", &p("/reports/"), v));
        assert!(check(wb.site(), "root", &p("/reports/"), v));
        assert!(!check(wb.site(), "ghost", &p("/reports/"), v));
    }
    assert!(matches!(render_view(&wb, "sam", &p("/reports/"), ViewKind::Webpage, None), Err(AccessError::Denied { .. })));
}

#[test]
fn inheritance_and_ordering_match_oracle() {
    let mut wb = site();
    grant(&mut wb, "/reports/", ViewKind::Webpage, "staff");
    assert!(check(wb.site(), "sam", &p("/reports/2011/"), ViewKind::Webpage));
    assert!(!check(wb.site(), "sam", &p("/reports/2011/"), ViewKind::Wikipage));
    grant(&mut wb, "/reports/2011/", ViewKind::Spreadsheet, "staff");
    grant(&mut wb, "/reports/2011/q1/", ViewKind::Webpage, "outsiders");
    grant(&mut wb, "/other/", ViewKind::Log, "outsiders");
    for path in ["/", "/reports/", "/reports/2011/", "/reports/2011/q1/", "/reports/2011/q1/x/", "/other/", "/nope/"] {
        for user in ["root", "sam", "olly", "ghost"] {
            for v in ViewKind::ALL {
                assert_eq!(check(wb.site(), user, &p(path), v), oracle(&wb, user, &p(path), v), "{user} {v} {path}");
            }
        }
    }
    // nearer webpage record replaces the inherited one, but spreadsheet still implies it
    assert!(check(wb.site(), "sam", &p("/reports/2011/q1/"), ViewKind::Webpage));
    assert!(!check(wb.site(), "sam", &p("/reports/2011/"), ViewKind::Log));
    assert!(check(wb.site(), "olly", &p("/other/"), ViewKind::Log));
    assert!(!check(wb.site(), "olly", &p("/other/"), ViewKind::Webpage));
    assert_eq!(default_view(wb.site(), "sam", &p("/reports/2011/")), Some(ViewKind::Spreadsheet));
    assert_eq!(default_view(wb.site(), "olly", &p("/reports/2011/q1/")), Some(ViewKind::Webpage));
    assert_eq!(default_view(wb.site(), "olly", &p("/reports/")), None);
}

#[test]
fn permission_before_existence() {
    let mut wb = site();
    assert!(matches!(require(wb.site(), "sam", &p("/missing/"), ViewKind::Webpage), Err(AccessError::Denied { .. })));
    grant(&mut wb, "/reports/", ViewKind::Webpage, "staff");
    assert!(matches!(
        require(wb.site(), "sam", &p("/reports/missing/"), ViewKind::Webpage),
        Err(AccessError::NotFound(_))
    ));
}

fn form_page(wb: &mut Workbook) -> Path {
    let path = p("/reports/2011/");
    let attrs = wiki_attrs_from_form(wb.site(), &path, a("b2"), r#"=form.input("t1")"#).unwrap();
    let choice = wiki_attrs_from_form(wb.site(), &path, a("b3"), r#"=form.select("yes,no","t1")"#).unwrap();
    assert_eq!(choice.wiki, WikiInput::Select(vec!["yes".into(), "no".into()]));
    let writes = vec![
        CellWrite { path: path.clone(), addr: a("b2"), data: CellData { attrs, ..Default::default() } },
        CellWrite { path: path.clone(), addr: a("b3"), data: CellData { attrs: choice, ..Default::default() } },
        CellWrite::input(&path, a("a3"), "7").unwrap(),
        CellWrite::input(&path, a("c2"), "=b2*2").unwrap(),
    ];
    commit_cells(wb, "root", &path, writes).unwrap();
    path
}

#[test]
fn views_expose_the_right_capabilities() {
    let mut wb = site();
    let path = form_page(&mut wb);
    grant(&mut wb, "/reports/", ViewKind::Wikipage, "staff");
    let wiki = render_view(&wb, "sam", &path, ViewKind::Wikipage, None).unwrap();
    assert_eq!(wiki.editable(), [a("b2"), a("b3")]);
    assert!(!wiki.structural);
    assert!(wiki.cells.iter().all(|c| c.source.is_none()));
    let web = render_view(&wb, "sam", &path, ViewKind::Webpage, None).unwrap();
    assert!(web.editable().is_empty());
    assert!(matches!(render_view(&wb, "sam", &path, ViewKind::Spreadsheet, None), Err(AccessError::Denied { .. })));
    let sheet = render_view(&wb, "root", &path, ViewKind::Spreadsheet, None).unwrap();
    assert!(sheet.structural);
    assert_eq!(sheet.cells.iter().find(|c| c.cell == a("c2")).unwrap().source.as_deref(), Some("=b2*2"));
    let win = render_view(&wb, "root", &path, ViewKind::Spreadsheet, Some("a1:b2".parse().unwrap())).unwrap();
    assert_eq!(win.cells.len(), 1);
    assert_eq!(sheet.used.as_deref(), Some("a2:c3"));
}

#[test]
fn wiki_submissions() {
    let mut wb = site();
    let path = form_page(&mut wb);
    grant(&mut wb, "/reports/", ViewKind::Wikipage, "staff");
    let before = wb.events().len();
    let inputs = |pairs: &[(&str, &str)]| pairs.iter().map(|(k, v)| (a(k), v.to_string())).collect();

    let err = wiki_submit(&mut wb, "sam", &path, "t1", &inputs(&[("b2", "1"), ("a3", "9")])).unwrap_err();
    assert!(matches!(&err, AccessError::Rejected { cells, .. } if cells == &[a("a3")]), "{err}");
    let err = wiki_submit(&mut wb, "sam", &path, "t1", &inputs(&[("b3", "maybe")])).unwrap_err();
    assert!(matches!(&err, AccessError::Rejected { cells, .. } if cells == &[a("b3")]), "{err}");
    let err = wiki_submit(&mut wb, "sam", &path, "t2", &inputs(&[("b2", "1")])).unwrap_err();
    assert!(matches!(err, AccessError::Rejected { .. }));
    assert!(matches!(
        wiki_submit(&mut wb, "olly", &path, "t1", &inputs(&[("b2", "1")])),
        Err(AccessError::Denied { .. })
    ));
    assert_eq!(wb.events().len(), before);

    wiki_submit(&mut wb, "sam", &path, "t1", &inputs(&[("b2", "42"), ("b3", "yes")])).unwrap();
    assert_eq!(wb.site().get_value(&path, a("b2")).unwrap(), Value::Number(42.0));
    assert_eq!(wb.site().get_value(&path, a("c2")).unwrap(), Value::Number(84.0));
    assert!(!wb.site().get_cell(&path, a("b2")).unwrap().attrs.wiki.is_none());
    assert_eq!(wb.events().last().unwrap().user, "sam");

    // formula-looking text stays text; blank clears
    wiki_submit(&mut wb, "sam", &path, "t1", &inputs(&[("b2", "=1/0"), ("b3", "")])).unwrap();
    assert_eq!(wb.site().get_value(&path, a("b2")).unwrap(), Value::Text("=1/0".into()));
    assert!(!wb.site().get_cell(&path, a("b2")).unwrap().is_formula());
    assert_eq!(wb.site().get_value(&path, a("b3")).unwrap(), Value::Blank);
}

fn table_page(wb: &mut Workbook, rows: usize) -> Path {
    let path = p("/other/");
    let mut cells = vec![("a1", "name".to_string()), ("b1", "qty".to_string())];
    for i in 0..rows {
        cells.push((["a2", "a3", "a4", "a5"][i], format!("n{i}")));
        cells.push((["b2", "b3", "b4", "b5"][i], format!("{}", i + 1)));
    }
    let refs: Vec<(&str, &str)> = cells.iter().map(|(k, v)| (*k, v.as_str())).collect();
    wb.commit("root", Command::set(&path, &refs).unwrap()).unwrap();
    wb.commit("root", Command::set(&path, &[("d1", "=sum(b2:b4)")]).unwrap()).unwrap();
    path
}

#[test]
fn table_region_and_edits() {
    let mut wb = site();
    let path = table_page(&mut wb, 3);
    let doc = render_view(&wb, "root", &path, ViewKind::Table, None).unwrap();
    let t = doc.table.unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.header, ["name", "qty", "", "6"]);

    table_delete(&mut wb, "root", &path, 2).unwrap();
    assert_eq!(wb.site().get_value(&path, a("a3")).unwrap(), Value::Text("n2".into()));
    assert_eq!(wb.site().get_cell(&path, a("d1")).unwrap().input_text(), "=sum(b2:b3)");
    assert_eq!(wb.site().get_value(&path, a("d1")).unwrap(), Value::Number(4.0));

    assert!(matches!(table_update(&mut wb, "root", &path, 0, &BTreeMap::new()), Err(AccessError::Bounds(_))));
    assert!(matches!(table_delete(&mut wb, "root", &path, 3), Err(AccessError::Bounds(_))));
    let vals = BTreeMap::from([("QTY".to_string(), "10".to_string())]);
    table_update(&mut wb, "root", &path, 1, &vals).unwrap();
    assert_eq!(wb.site().get_value(&path, a("b2")).unwrap(), Value::Number(10.0));
    let bad = BTreeMap::from([("price".to_string(), "1".to_string())]);
    assert!(matches!(table_update(&mut wb, "root", &path, 1, &bad), Err(AccessError::Rejected { .. })));
    wb.commit("root", Command::set(&path, &[("c2", "=b2")]).unwrap()).unwrap();
    let formula = BTreeMap::from([("c".to_string(), "1".to_string())]);
    assert!(matches!(table_update(&mut wb, "root", &path, 1, &formula), Err(AccessError::Rejected { .. })));
}

#[test]
fn append_goes_after_the_data() {
    let mut wb = site();
    let path = table_page(&mut wb, 2);
    let vals = BTreeMap::from([("name".to_string(), "x".to_string()), ("qty".to_string(), "3".to_string())]);
    let out = table_append(&mut wb, "root", &path, &vals).unwrap();
    let written: Vec<CellAddr> = out.changed.iter().filter(|c| c.cell.row == 4).map(|c| c.cell).collect();
    assert_eq!(written, [a("a4"), a("b4")]);
    assert_eq!(wb.site().get_value(&path, a("d1")).unwrap(), Value::Number(6.0));
    assert!(matches!(table_append(&mut wb, "sam", &path, &vals), Err(AccessError::Denied { .. })));
}

#[test]
fn create_button_needs_a_view() {
    let mut wb = site();
    let path = p("/reports/");
    let btn = r#"=create.button("Prepare New Day","/reports/[blank, date, yyyy]/[blank, date, mm]/[blank, date, dddd]/")"#;
    wb.commit("root", Command::set(&path, &[("a1", btn)]).unwrap()).unwrap();
    assert!(matches!(activate_create_button(&mut wb, "sam", &path, a("a1")), Err(AccessError::Denied { .. })));
    grant(&mut wb, "/reports/", ViewKind::Wikipage, "staff");
    let to = activate_create_button(&mut wb, "sam", &path, a("a1")).unwrap();
    assert_eq!(to.depth(), 4);
    assert!(wb.site().pages.contains_key(&to));
    assert!(matches!(activate_create_button(&mut wb, "sam", &path, a("b1")), Err(AccessError::Commit(_))));
}

#[test]
fn admin_only_operations() {
    let mut wb = site();
    let change = GrantChange { view: ViewKind::Webpage, group: "staff".into(), default: false };
    let cmd = Command::Grant { path: p("/other/"), change };
    assert!(matches!(admin(&mut wb, "sam", cmd.clone()), Err(AccessError::AdminOnly { .. })));
    admin(&mut wb, "root", cmd).unwrap();
    let ix = AuditIndex::build(wb.events());
    assert!(user_trail(&wb, &ix, "sam", "root", None, None).is_err());
    assert!(!user_trail(&wb, &ix, "root", "root", None, None).unwrap().is_empty());
    assert!(cell_history(&wb, &ix, "sam", &p("/other/"), a("a1")).is_err());
    assert!(create_page(&mut wb, "sam", &p("/other/new/"), None).is_err());
    grant(&mut wb, "/other/", ViewKind::Spreadsheet, "staff");
    create_page(&mut wb, "sam", &p("/other/new/deeper/"), None).unwrap();
    assert!(wb.site().pages.contains_key(&p("/other/new/")));
}
