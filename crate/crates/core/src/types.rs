//! Simple types over a set of basic types.

use std::fmt;
use std::sync::Arc;

/// A simple type: a basic type or an arrow `domain -> codomain`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Basic(Arc<str>),
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn basic(name: &str) -> Self {
        SimpleType::Basic(Arc::from(name))
    }

    pub fn arrow(domain: SimpleType, codomain: SimpleType) -> Self {
        SimpleType::Arrow(Box::new(domain), Box::new(codomain))
    }

    /// Builds `a1 -> ... -> an -> result`.
    pub fn curried(args: impl IntoIterator<Item = SimpleType>, result: SimpleType) -> Self {
        let args: Vec<_> = args.into_iter().collect();
        args.into_iter()
            .rev()
            .fold(result, |acc, a| SimpleType::arrow(a, acc))
    }

    pub fn is_basic(&self) -> bool {
        matches!(self, SimpleType::Basic(_))
    }

    /// The unique decomposition `α1 → … → αn → β` with `β` basic.
    pub fn decompose(&self) -> (Vec<&SimpleType>, &SimpleType) {
        let mut args = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(d, c) = cur {
            args.push(d.as_ref());
            cur = c;
        }
        (args, cur)
    }

    pub fn arity(&self) -> usize {
        self.decompose().0.len()
    }

    /// The basic result type.
    pub fn result(&self) -> &SimpleType {
        self.decompose().1
    }

    /// Type after consuming `n` arguments, if the type has that many.
    pub fn drop_args(&self, n: usize) -> Option<&SimpleType> {
        let mut cur = self;
        for _ in 0..n {
            match cur {
                SimpleType::Arrow(_, c) => cur = c,
                SimpleType::Basic(_) => return None,
            }
        }
        Some(cur)
    }

    /// Strict subterm relation on types.
    pub fn strict_subterm_of(&self, other: &SimpleType) -> bool {
        match other {
            SimpleType::Basic(_) => false,
            SimpleType::Arrow(d, c) => {
                d.as_ref() == self
                    || c.as_ref() == self
                    || self.strict_subterm_of(d)
                    || self.strict_subterm_of(c)
            }
        }
    }

    /// All basic types occurring in this type.
    pub fn basics(&self, out: &mut Vec<SimpleType>) {
        match self {
            SimpleType::Basic(_) => {
                if !out.contains(self) {
                    out.push(self.clone())
                }
            }
            SimpleType::Arrow(d, c) => {
                d.basics(out);
                c.basics(out);
            }
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Basic(n) => write!(f, "{n}"),
            SimpleType::Arrow(d, c) => {
                if d.is_basic() {
                    write!(f, "{d} -> {c}")
                } else {
                    write!(f, "({d}) -> {c}")
                }
            }
        }
    }
}
