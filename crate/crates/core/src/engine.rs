//! Formula evaluation against a site.
//!
//! The evaluator never aborts: every failure is an in-band error value.
//! Cell reads go through [`SiteAccess`], which lets the recalc pass evaluate
//! precedents on demand and detect cycles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::addr::{CellAddr, Range};
use crate::formula::ast::{BinaryOp, Expr, UnaryOp};
use crate::path::Path;
use crate::stdlib;
use crate::value::{coerce_number, coerce_boolean, coerce_text, compare, ErrorKind, Value};
use crate::zquery::{match_pages, ZPattern};

/// Read access to the page tree during evaluation.
pub trait SiteAccess {
    fn page_exists(&self, page: &Path) -> bool;

    /// Value of a cell on an existing page. Never-written cells are Blank.
    fn read_cell(&mut self, page: &Path, addr: CellAddr) -> Value;

    /// Existing pages of exactly `depth` segments below `prefix`, in
    /// canonical order.
    fn pages_under(&self, prefix: &Path, depth: usize) -> Vec<Path>;

    /// Row-major values of a range on an existing page.
    fn read_range(&mut self, page: &Path, range: Range) -> Vec<Value> {
        range.iter().map(|a| self.read_cell(page, a)).collect()
    }
}

/// A rectangular block of values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Value>,
}

impl Array {
    pub fn column(data: Vec<Value>) -> Array {
        Array { rows: data.len(), cols: 1, data }
    }

    pub fn get(&self, row: usize, col: usize) -> &Value {
        &self.data[row * self.cols + col]
    }
}

/// An evaluated function argument. References (cells, ranges, z-refs)
/// stay as arrays so aggregates can apply range semantics.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Value(Value),
    Ref(Array),
}

impl Arg {
    /// Scalar view: a single-cell reference yields its value, a larger
    /// one `#VALUE!`.
    pub fn scalar(&self) -> Value {
        match self {
            Arg::Value(v) => v.clone(),
            Arg::Ref(a) if a.data.len() == 1 => a.data[0].clone(),
            Arg::Ref(_) => Value::Error(ErrorKind::Value),
        }
    }
}

pub struct EvalContext<'s> {
    pub site: &'s mut dyn SiteAccess,
    pub base: Path,
    pub cell: CellAddr,
    /// Serial date-time, fixed for the pass.
    pub now: f64,
    pub seed: u64,
    rng: Option<ChaCha8Rng>,
}

impl<'s> EvalContext<'s> {
    pub fn new(site: &'s mut dyn SiteAccess, base: Path, cell: CellAddr, now: f64, seed: u64) -> Self {
        EvalContext { site, base, cell, now, seed, rng: None }
    }

    /// Uniform in [0, 1). The stream depends only on the pass seed and the
    /// evaluating cell, so a replay reproduces it.
    pub fn random(&mut self) -> f64 {
        let (seed, base, cell) = (self.seed, &self.base, self.cell);
        let rng = self.rng.get_or_insert_with(|| {
            let mut h = Sha256::new();
            h.update(seed.to_le_bytes());
            h.update(base.to_string().as_bytes());
            h.update(cell.to_string().as_bytes());
            ChaCha8Rng::from_seed(h.finalize().into())
        });
        rng.random::<f64>()
    }

    /// Evaluates a formula body as a cell result. A bare reference to an
    /// empty cell yields 0, as desktop spreadsheets show.
    pub fn evaluate(&mut self, expr: &Expr) -> Value {
        match self.eval(expr) {
            Value::Blank => Value::Number(0.0),
            v => v,
        }
    }

    /// Scalar evaluation.
    pub fn eval(&mut self, expr: &Expr) -> Value {
        match expr {
            Expr::Number(n) => Value::number(*n),
            Expr::Text(s) => Value::Text(s.clone()),
            Expr::Bool(b) => Value::Boolean(*b),
            Expr::Error(k) => Value::Error(*k),
            Expr::Cell(_) | Expr::Range(_) | Expr::ZRef(_) => self.eval_arg(expr).scalar(),
            Expr::Call { name, args } => stdlib::call(name, args, self),
            Expr::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs);
                let b = self.eval(rhs);
                binary(*op, &a, &b)
            }
            Expr::Unary { op, expr } => {
                let v = self.eval(expr);
                match op {
                    UnaryOp::Neg => match coerce_number(&v) {
                        Ok(n) => Value::number(-n),
                        Err(k) => Value::Error(k),
                    },
                    UnaryOp::Plus => match v {
                        Value::Blank => Value::Number(0.0),
                        v => v,
                    },
                }
            }
            Expr::Percent(expr) => match coerce_number(&self.eval(expr)) {
                Ok(n) => Value::number(n / 100.0),
                Err(k) => Value::Error(k),
            },
        }
    }

    /// Argument evaluation: references become arrays, everything else a
    /// scalar.
    pub fn eval_arg(&mut self, expr: &Expr) -> Arg {
        match expr {
            Expr::Cell(c) => match c.page.resolve(&self.base) {
                Some(page) if self.site.page_exists(&page) => {
                    Arg::Ref(Array::column(vec![self.site.read_cell(&page, c.cell.addr())]))
                }
                _ => Arg::Value(Value::Error(ErrorKind::Ref)),
            },
            Expr::Range(r) => match r.page.resolve(&self.base) {
                Some(page) if self.site.page_exists(&page) => {
                    let range = r.range();
                    let data = self.site.read_range(&page, range);
                    Arg::Ref(Array { rows: range.rows() as usize, cols: range.cols() as usize, data })
                }
                _ => Arg::Value(Value::Error(ErrorKind::Ref)),
            },
            Expr::ZRef(z) => {
                let Some(pattern) = ZPattern::resolve(z, &self.base) else {
                    return Arg::Value(Value::Error(ErrorKind::Ref));
                };
                let range = z.target.range();
                let pages = match_pages(&pattern, self.site, self.now, self.seed);
                let mut data = Vec::with_capacity(pages.len() * range.area() as usize);
                for page in &pages {
                    data.extend(self.site.read_range(page, range));
                }
                Arg::Ref(Array {
                    rows: pages.len() * range.rows() as usize,
                    cols: range.cols() as usize,
                    data,
                })
            }
            Expr::Call { name, args } => stdlib::call_arg(name, args, self),
            _ => Arg::Value(self.eval(expr)),
        }
    }
}

/// Applies a binary operator; the left operand's error wins.
pub fn binary(op: BinaryOp, a: &Value, b: &Value) -> Value {
    if let Value::Error(k) = a {
        return Value::Error(*k);
    }
    if let Value::Error(k) = b {
        return Value::Error(*k);
    }
    match op {
        BinaryOp::Concat => match (coerce_text(a), coerce_text(b)) {
            (Ok(x), Ok(y)) => Value::Text(x + &y),
            (Err(k), _) | (_, Err(k)) => Value::Error(k),
        },
        BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
            match compare(a, b) {
                Ok(ord) => Value::Boolean(match op {
                    BinaryOp::Eq => ord.is_eq(),
                    BinaryOp::Ne => ord.is_ne(),
                    BinaryOp::Lt => ord.is_lt(),
                    BinaryOp::Le => ord.is_le(),
                    BinaryOp::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                }),
                Err(k) => Value::Error(k),
            }
        }
        _ => {
            let x = match coerce_number(a) {
                Ok(x) => x,
                Err(k) => return Value::Error(k),
            };
            let y = match coerce_number(b) {
                Ok(y) => y,
                Err(k) => return Value::Error(k),
            };
            match op {
                BinaryOp::Add => Value::number(x + y),
                BinaryOp::Sub => Value::number(x - y),
                BinaryOp::Mul => Value::number(x * y),
                BinaryOp::Div if y == 0.0 => Value::Error(ErrorKind::Div0),
                BinaryOp::Div => Value::number(x / y),
                _ => power(x, y),
            }
        }
    }
}

pub(crate) fn power(x: f64, y: f64) -> Value {
    if x == 0.0 && y == 0.0 {
        Value::Error(ErrorKind::Num)
    } else if x == 0.0 && y < 0.0 {
        Value::Error(ErrorKind::Div0)
    } else {
        Value::number(x.powf(y))
    }
}

/// Evaluates a z-segment predicate on `page`. A missing page or any error
/// means no match.
pub fn evaluate_predicate(ast: &Expr, page: &Path, site: &mut dyn SiteAccess, now: f64, seed: u64) -> bool {
    if !site.page_exists(page) {
        return false;
    }
    let mut ctx = EvalContext::new(site, page.clone(), CellAddr::new(1, 1), now, seed);
    let v = ctx.eval(ast);
    coerce_boolean(&v).unwrap_or(false)
}

#[cfg(test)]
pub(crate) mod testing {
    use std::collections::{BTreeMap, HashMap};

    use super::*;
    use crate::formula::parse;

    /// Literal-only site for evaluator tests; a formula cell is evaluated
    /// on read (no cycle handling).
    #[derive(Default)]
    pub struct MapSite {
        pub pages: BTreeMap<Path, HashMap<CellAddr, Value>>,
        pub formulas: HashMap<(Path, CellAddr), Expr>,
    }

    impl MapSite {
        pub fn page(&mut self, path: &str) -> &mut Self {
            self.pages.entry(Path::parse(path).unwrap()).or_default();
            self
        }

        pub fn set(&mut self, path: &str, addr: &str, v: impl Into<Value>) -> &mut Self {
            let p = Path::parse(path).unwrap();
            self.pages.entry(p).or_default().insert(addr.parse().unwrap(), v.into());
            self
        }

        pub fn formula(&mut self, path: &str, addr: &str, src: &str) -> &mut Self {
            let p = Path::parse(path).unwrap();
            self.pages.entry(p.clone()).or_default();
            self.formulas.insert((p, addr.parse().unwrap()), parse(src).unwrap());
            self
        }

        pub fn eval_at(&mut self, path: &str, src: &str) -> Value {
            let ast = parse(src).unwrap();
            let mut ctx = EvalContext::new(self, Path::parse(path).unwrap(), CellAddr::new(30, 30), 40000.5, 7);
            ctx.evaluate(&ast)
        }
    }

    impl SiteAccess for MapSite {
        fn page_exists(&self, page: &Path) -> bool {
            self.pages.contains_key(page)
        }

        fn read_cell(&mut self, page: &Path, addr: CellAddr) -> Value {
            if let Some(ast) = self.formulas.get(&(page.clone(), addr)).cloned() {
                let mut ctx = EvalContext::new(self, page.clone(), addr, 40000.5, 7);
                return ctx.evaluate(&ast);
            }
            self.pages.get(page).and_then(|cells| cells.get(&addr)).cloned().unwrap_or_default()
        }

        fn pages_under(&self, prefix: &Path, depth: usize) -> Vec<Path> {
            self.pages.keys().filter(|p| prefix.is_prefix_of(p) && p.depth() == depth).cloned().collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testing::MapSite;
    use super::*;
    use crate::formula::parse_predicate;

    fn paper_site() -> MapSite {
        let mut s = MapSite::default();
        s.page("/").page("/some/thing/blurg/").page("/another/page/");
        s.set("/some/page/bleh/", "a1", 50.0).set("/some/page/bleh/", "b7", 4.0);
        s.set("/some/page/blah/", "a1", 10.0);
        s.set("/x/", "a3", 3.0).set("/page/", "a4", 4.0);
        s
    }

    #[test]
    fn bang_reference_sum() {
        assert_eq!(paper_site().eval_at("/x/", "=sum(1,2,a3,!page!a4)"), Value::Number(10.0));
    }

    #[test]
    fn z_reference_sum() {
        let mut s = paper_site();
        assert_eq!(s.eval_at("/x/", "=sum(1, 2, a3, /some/page/[a1 > 44]/b7)"), Value::Number(10.0));
        s.set("/some/page/blah/", "a1", 99.0).set("/some/page/blah/", "b7", 5.0);
        assert_eq!(s.eval_at("/x/", "=sum(1, 2, a3, /some/page/[a1 > 44]/b7)"), Value::Number(15.0));
    }

    #[test]
    fn forced_errors() {
        let mut s = paper_site();
        assert_eq!(s.eval_at("/x/", "=1/0"), Value::Error(ErrorKind::Div0));
        assert_eq!(s.eval_at("/x/", "=/nope/a1"), Value::Error(ErrorKind::Ref));
        assert_eq!(s.eval_at("/", "=../a1"), Value::Error(ErrorKind::Ref));
        assert_eq!(s.eval_at("/x/", "=nosuchfn(1)"), Value::Error(ErrorKind::Name));
        assert_eq!(s.eval_at("/x/", "=#N/A+1/0"), Value::Error(ErrorKind::NA));
        assert_eq!(s.eval_at("/x/", "=1/0+#N/A"), Value::Error(ErrorKind::Div0));
    }

    #[test]
    fn blank_reads() {
        let mut s = paper_site();
        assert_eq!(s.eval_at("/x/", "=z99"), Value::Number(0.0));
        assert_eq!(s.eval_at("/x/", "=z99&\"\""), Value::text(""));
        assert_eq!(s.eval_at("/x/", "=isblank(z99)"), Value::Boolean(true));
    }

    #[test]
    fn operators() {
        let mut s = paper_site();
        assert_eq!(s.eval_at("/x/", "=-2^2"), Value::Number(4.0));
        assert_eq!(s.eval_at("/x/", "=2^3^2"), Value::Number(64.0));
        assert_eq!(s.eval_at("/x/", "=1+2*3"), Value::Number(7.0));
        assert_eq!(s.eval_at("/x/", "=50%"), Value::Number(0.5));
        assert_eq!(s.eval_at("/x/", "=1&2=\"12\""), Value::Boolean(true));
        assert_eq!(s.eval_at("/x/", "=\"a\">1"), Value::Boolean(true));
        assert_eq!(s.eval_at("/x/", "=\"1\"=1"), Value::Boolean(false));
        assert_eq!(s.eval_at("/x/", "=\"3\"+1"), Value::Number(4.0));
        assert_eq!(s.eval_at("/x/", "=\"x\"+1"), Value::Error(ErrorKind::Value));
        assert_eq!(s.eval_at("/x/", "=true+true"), Value::Number(2.0));
        assert_eq!(s.eval_at("/x/", "=0^0"), Value::Error(ErrorKind::Num));
        assert_eq!(s.eval_at("/x/", "=(-8)^(1/3)"), Value::Error(ErrorKind::Num));
        assert_eq!(s.eval_at("/x/", "=a3:a4"), Value::Error(ErrorKind::Value));
        assert_eq!(s.eval_at("/x/", "=a3:a3*2"), Value::Number(6.0));
    }

    #[test]
    fn predicates() {
        let mut s = paper_site();
        let p = parse_predicate("a1 > 44").unwrap();
        let bleh = Path::parse("/some/page/bleh/").unwrap();
        let blurg = Path::parse("/some/thing/blurg/").unwrap();
        assert!(evaluate_predicate(&p, &bleh, &mut s, 0.0, 0));
        assert!(!evaluate_predicate(&p, &blurg, &mut s, 0.0, 0));
        s.set("/some/thing/blurg/", "a1", Value::Error(ErrorKind::Div0));
        assert!(!evaluate_predicate(&p, &blurg, &mut s, 0.0, 0));
        assert!(!evaluate_predicate(&p, &Path::parse("/none/").unwrap(), &mut s, 0.0, 0));
        let p = parse_predicate("if(or(a1 > 0, b7 = \"failed\"), true, false)").unwrap();
        assert!(evaluate_predicate(&p, &bleh, &mut s, 0.0, 0));
    }

    #[test]
    fn random_is_reproducible() {
        let mut s = paper_site();
        let a = s.eval_at("/x/", "=rand()");
        let b = s.eval_at("/x/", "=rand()");
        assert_eq!(a, b);
        let Value::Number(n) = a else { panic!() };
        assert!((0.0..1.0).contains(&n));
        assert_ne!(s.eval_at("/x/", "=rand()-rand()"), Value::Number(0.0));
    }
}
