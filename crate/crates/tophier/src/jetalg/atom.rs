//! Interned exponential, logarithm and inverse atoms.
//!
//! An atom wraps a differential polynomial (its argument). Atoms are interned
//! process-wide by their canonical text, so two atoms are equal iff they are
//! the same allocation, and ordering is by canonical text (never by creation
//! order).

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use super::mono::Jet;
use super::poly::DiffPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    /// `exp{f}`, with `dx exp{f} = exp{f} * dx f`.
    Exp,
    /// `log{D}`, with `dx log{D} = dx(D) / D`.
    Log,
    /// `inv{D}^m` stands for `D^{-m}`.
    Inv,
}

pub struct AtomDef {
    kind: AtomKind,
    arg: DiffPoly,
    key: String,
    jets: OnceLock<BTreeSet<Jet>>,
    dx_arg: OnceLock<DiffPoly>,
    inv_arg: OnceLock<DiffPoly>,
}

#[derive(Clone)]
pub struct Atom(Arc<AtomDef>);

fn registry() -> &'static Mutex<HashMap<(AtomKind, String), Atom>> {
    static REG: OnceLock<Mutex<HashMap<(AtomKind, String), Atom>>> = OnceLock::new();
    REG.get_or_init(Default::default)
}

impl Atom {
    pub fn intern(kind: AtomKind, arg: DiffPoly) -> Atom {
        let key = arg.to_string();
        let mut reg = registry().lock().unwrap_or_else(|e| e.into_inner());
        reg.entry((kind, key.clone()))
            .or_insert_with(|| {
                Atom(Arc::new(AtomDef {
                    kind,
                    arg,
                    key,
                    jets: OnceLock::new(),
                    dx_arg: OnceLock::new(),
                    inv_arg: OnceLock::new(),
                }))
            })
            .clone()
    }

    pub fn kind(&self) -> AtomKind {
        self.0.kind
    }

    pub fn arg(&self) -> &DiffPoly {
        &self.0.arg
    }

    pub fn key(&self) -> &str {
        &self.0.key
    }

    /// Jet variables the argument depends on (recursively through atoms).
    pub fn jets(&self) -> &BTreeSet<Jet> {
        self.0.jets.get_or_init(|| self.0.arg.jets())
    }

    pub fn depends_on(&self, j: Jet) -> bool {
        self.jets().contains(&j)
    }

    pub fn dx_arg(&self) -> &DiffPoly {
        self.0.dx_arg.get_or_init(|| self.0.arg.dx())
    }

    /// `1/arg`; only requested for log and inverse atoms, whose arguments are nonzero.
    pub fn inv_arg(&self) -> &DiffPoly {
        self.0
            .inv_arg
            .get_or_init(|| self.0.arg.inverse().expect("atom argument is nonzero"))
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state);
        self.0.key.hash(state);
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        (self.0.kind, &self.0.key).cmp(&(other.0.kind, &other.0.key))
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.0.kind {
            AtomKind::Exp => "exp",
            AtomKind::Log => "log",
            AtomKind::Inv => "inv",
        };
        write!(f, "{tag}{{{}}}", self.0.key)
    }
}
