use crate::addr::{CellAddr, Range};
use crate::path::Path;
use crate::value::ErrorKind;

/// An A1 coordinate as written, with its `$` markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct A1 {
    pub col: u32,
    pub row: u32,
    pub col_abs: bool,
    pub row_abs: bool,
}

impl A1 {
    pub fn relative(addr: CellAddr) -> Self {
        A1 { col: addr.col, row: addr.row, col_abs: false, row_abs: false }
    }

    pub fn addr(&self) -> CellAddr {
        CellAddr::new(self.col, self.row)
    }
}

/// Which page a reference points at, as written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PageRef {
    /// `a1`: the containing page.
    Local,
    /// `/some/page/a1`
    RootAbsolute(Vec<String>),
    /// `./x/a1` (`up` = 0) or `../x/a1` (`up` = 1), `../../a1` ...
    BaseRelative { up: usize, segments: Vec<String> },
    /// `!some!page!a1`, resolved exactly like `RootAbsolute`.
    Bang(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefFlavor {
    Local,
    RootAbsolute,
    BaseRelative,
    Bang,
    Z,
}

impl PageRef {
    pub fn flavor(&self) -> RefFlavor {
        match self {
            PageRef::Local => RefFlavor::Local,
            PageRef::RootAbsolute(_) => RefFlavor::RootAbsolute,
            PageRef::BaseRelative { .. } => RefFlavor::BaseRelative,
            PageRef::Bang(_) => RefFlavor::Bang,
        }
    }

    /// Resolves against the containing page. `None` when the reference
    /// climbs above the root.
    pub fn resolve(&self, base: &Path) -> Option<Path> {
        match self {
            PageRef::Local => Some(base.clone()),
            PageRef::RootAbsolute(segs) | PageRef::Bang(segs) => Some(Path::from_segments(segs.clone())),
            PageRef::BaseRelative { up, segments } => {
                let anchor = base.ancestor(*up)?;
                let mut all = anchor.segments().to_vec();
                all.extend(segments.iter().cloned());
                Some(Path::from_segments(all))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRef {
    pub page: PageRef,
    pub cell: A1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeRef {
    pub page: PageRef,
    pub start: A1,
    pub end: A1,
}

impl RangeRef {
    pub fn range(&self) -> Range {
        Range::new(self.start.addr(), self.end.addr())
    }
}

/// Where a z-pattern starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZAnchor {
    Root,
    /// `./` (`up` = 0), `../` (`up` = 1), ...
    Relative { up: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ZSegment {
    Literal(String),
    /// `[expr]`, evaluated on each candidate page.
    Predicate(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZTarget {
    Cell(A1),
    Range(A1, A1),
}

impl ZTarget {
    pub fn range(&self) -> Range {
        match self {
            ZTarget::Cell(a) => Range::single(a.addr()),
            ZTarget::Range(a, b) => Range::new(a.addr(), b.addr()),
        }
    }
}

/// `/some/page/[a1 > 44]/b7`
#[derive(Debug, Clone, PartialEq)]
pub struct ZRef {
    pub anchor: ZAnchor,
    pub segments: Vec<ZSegment>,
    pub target: ZTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Concat,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Concat => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
        }
    }

    /// Binding power; all binary operators are left-associative.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 1,
            BinaryOp::Concat => 2,
            BinaryOp::Add | BinaryOp::Sub => 3,
            BinaryOp::Mul | BinaryOp::Div => 4,
            BinaryOp::Pow => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(ErrorKind),
    Cell(CellRef),
    Range(RangeRef),
    ZRef(ZRef),
    Call { name: String, args: Vec<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Unary { op: UnaryOp, expr: Box<Expr> },
    Percent(Box<Expr>),
}

impl Expr {
    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::Call { name: name.to_string(), args }
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn local(addr: &str) -> Expr {
        let a: CellAddr = addr.parse().expect("valid address");
        Expr::Cell(CellRef { page: PageRef::Local, cell: A1::relative(a) })
    }

    /// Pre-order walk over this node and every nested node, including the
    /// predicates inside z-references.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Unary { expr, .. } | Expr::Percent(expr) => expr.walk(f),
            Expr::ZRef(z) => {
                for seg in &z.segments {
                    if let ZSegment::Predicate(p) = seg {
                        p.walk(f);
                    }
                }
            }
            _ => {}
        }
    }

    /// True when any call in the tree names one of `names`.
    pub fn calls_any(&self, names: &[&str]) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Expr::Call { name, .. } = e {
                found |= names.contains(&name.as_str());
            }
        });
        found
    }
}
