//! Relational layer: constants (with the reserved `null`), ground atoms,
//! schemas, instances and assignments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Shared, cheaply clonable identifier (predicate, peer or variable name).
pub type Name = Arc<str>;

/// Build a [`Name`] from a string slice.
pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A data value. `Null` is the single SQL-style null; every other value is a
/// token compared by spelling (unique names assumption).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Constant {
    /// The reserved `null` constant.
    Null,
    /// An ordinary constant.
    Sym(Name),
}

impl Constant {
    /// Ordinary constant from its spelling. The spelling `null` yields [`Constant::Null`].
    pub fn new(token: &str) -> Constant {
        if token == "null" {
            Constant::Null
        } else {
            Constant::Sym(name(token))
        }
    }

    /// True exactly for the reserved null.
    pub fn is_null(&self) -> bool {
        matches!(self, Constant::Null)
    }

    /// Spelling of the constant (`null` for the null).
    pub fn token(&self) -> &str {
        match self {
            Constant::Null => "null",
            Constant::Sym(s) => s,
        }
    }

    /// Integer value when the token is an integer literal.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Constant::Null => None,
            Constant::Sym(s) => s.parse().ok(),
        }
    }

    /// Order used by the comparison builtins: numeric when both tokens are
    /// integers, lexicographic otherwise, undefined when either side is null.
    pub fn value_cmp(&self, other: &Constant) -> Option<Ordering> {
        if self.is_null() || other.is_null() {
            return None;
        }
        match (self.as_int(), other.as_int()) {
            (Some(a), Some(b)) => Some(a.cmp(&b)),
            _ => Some(self.token().cmp(other.token())),
        }
    }
}

impl Ord for Constant {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Constant::Null, Constant::Null) => Ordering::Equal,
            (Constant::Null, _) => Ordering::Less,
            (_, Constant::Null) => Ordering::Greater,
            (Constant::Sym(a), Constant::Sym(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

/// A predicate declaration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateSym {
    /// Predicate name, unique within a schema.
    pub name: Name,
    /// Number of arguments.
    pub arity: usize,
    /// Peer owning the predicate, when it belongs to a peer schema.
    pub owner: Option<Name>,
}

/// A ground atom `R(c1,...,cn)`. Atoms order by predicate name, then by
/// argument tuple.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    /// Predicate name.
    pub pred: Name,
    /// Arguments.
    pub args: Vec<Constant>,
}

impl GroundAtom {
    /// Build an atom from a predicate name and argument tokens.
    pub fn new(pred: &str, args: &[&str]) -> GroundAtom {
        GroundAtom { pred: name(pred), args: args.iter().map(|a| Constant::new(a)).collect() }
    }

    /// Build an atom from already constructed constants.
    pub fn from_parts(pred: Name, args: Vec<Constant>) -> GroundAtom {
        GroundAtom { pred, args }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for GroundAtom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A relational schema: predicate declarations keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    preds: BTreeMap<Name, PredicateSym>,
}

impl Schema {
    /// Empty schema.
    pub fn new() -> Schema {
        Schema::default()
    }

    /// Declare a predicate. Redeclaring a name is a schema error.
    pub fn declare(&mut self, sym: PredicateSym) -> Result<()> {
        if self.preds.contains_key(&sym.name) {
            return Err(Error::Schema(format!("predicate {} declared twice", sym.name)));
        }
        self.preds.insert(sym.name.clone(), sym);
        Ok(())
    }

    /// Look up a predicate.
    pub fn get(&self, pred: &str) -> Option<&PredicateSym> {
        self.preds.get(pred)
    }

    /// Iterate over declarations in name order.
    pub fn iter(&self) -> impl Iterator<Item = &PredicateSym> {
        self.preds.values()
    }

    /// Names of all declared predicates.
    pub fn names(&self) -> BTreeSet<Name> {
        self.preds.keys().cloned().collect()
    }

    /// Check that an atom uses a declared predicate with the right arity.
    pub fn check_atom(&self, atom: &GroundAtom) -> Result<()> {
        match self.preds.get(&atom.pred) {
            None => Err(Error::Schema(format!("unknown predicate {}", atom.pred))),
            Some(p) if p.arity != atom.args.len() => Err(Error::Schema(format!(
                "{} has arity {} but atom {} has {} arguments",
                p.name,
                p.arity,
                atom,
                atom.args.len()
            ))),
            Some(_) => Ok(()),
        }
    }
}

/// A finite set of ground atoms, iterated in canonical order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instance {
    atoms: BTreeSet<GroundAtom>,
}

impl Instance {
    /// Empty instance.
    pub fn new() -> Instance {
        Instance::default()
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// True when there are no atoms.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Add an atom; returns whether it was new.
    pub fn insert(&mut self, atom: GroundAtom) -> bool {
        self.atoms.insert(atom)
    }

    /// Remove an atom; returns whether it was present.
    pub fn remove(&mut self, atom: &GroundAtom) -> bool {
        self.atoms.remove(atom)
    }

    /// Membership test.
    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    /// Membership test on a predicate and argument slice.
    pub fn contains_tuple(&self, pred: &Name, args: &[Constant]) -> bool {
        // Avoids allocating an atom for the lookup in the common case.
        self.relation(pred).any(|t| t == args)
    }

    /// Atoms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &GroundAtom> {
        self.atoms.iter()
    }

    /// Argument tuples of one predicate, in canonical order.
    pub fn relation<'a>(&'a self, pred: &'a Name) -> impl Iterator<Item = &'a [Constant]> + 'a {
        let lo = GroundAtom { pred: pred.clone(), args: Vec::new() };
        self.atoms
            .range(lo..)
            .take_while(move |a| a.pred == *pred)
            .map(|a| a.args.as_slice())
    }

    /// Underlying ordered set.
    pub fn atoms(&self) -> &BTreeSet<GroundAtom> {
        &self.atoms
    }

    /// Constants occurring in the atoms.
    pub fn active_domain(&self) -> BTreeSet<Constant> {
        self.atoms.iter().flat_map(|a| a.args.iter().cloned()).collect()
    }

    /// Predicates that have at least one atom.
    pub fn predicates(&self) -> BTreeSet<Name> {
        self.atoms.iter().map(|a| a.pred.clone()).collect()
    }

    /// Atoms whose predicate belongs to `preds`.
    pub fn restrict(&self, preds: &BTreeSet<Name>) -> Instance {
        self.atoms.iter().filter(|a| preds.contains(&a.pred)).cloned().collect()
    }

    /// Restriction checked against a schema: every predicate of `preds` must be declared.
    pub fn restrict_checked(&self, schema: &Schema, preds: &BTreeSet<Name>) -> Result<Instance> {
        for p in preds {
            if schema.get(p).is_none() {
                return Err(Error::Schema(format!("unknown predicate {p} in restriction")));
            }
        }
        Ok(self.restrict(preds))
    }

    /// Set union.
    pub fn union(&self, other: &Instance) -> Instance {
        self.atoms.union(&other.atoms).cloned().collect()
    }

    /// Set intersection.
    pub fn intersection(&self, other: &Instance) -> Instance {
        self.atoms.intersection(&other.atoms).cloned().collect()
    }

    /// Atoms of `self` not in `other`.
    pub fn difference(&self, other: &Instance) -> Instance {
        self.atoms.difference(&other.atoms).cloned().collect()
    }

    /// Symmetric difference `(self ∖ other) ∪ (other ∖ self)`.
    pub fn symmetric_difference(&self, other: &Instance) -> BTreeSet<GroundAtom> {
        self.atoms.symmetric_difference(&other.atoms).cloned().collect()
    }

    /// Subset test.
    pub fn is_subset(&self, other: &Instance) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    /// Check every atom against a schema.
    pub fn check(&self, schema: &Schema) -> Result<()> {
        self.atoms.iter().try_for_each(|a| schema.check_atom(a))
    }
}

impl FromIterator<GroundAtom> for Instance {
    fn from_iter<I: IntoIterator<Item = GroundAtom>>(iter: I) -> Self {
        Instance { atoms: iter.into_iter().collect() }
    }
}

impl Extend<GroundAtom> for Instance {
    fn extend<I: IntoIterator<Item = GroundAtom>>(&mut self, iter: I) {
        self.atoms.extend(iter)
    }
}

impl<'a> IntoIterator for &'a Instance {
    type Item = &'a GroundAtom;
    type IntoIter = std::collections::btree_set::Iter<'a, GroundAtom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.atoms.iter().map(|a| a.to_string()))
    }
}

/// Parse a whitespace- or comma-separated list of ground atoms such as
/// `R(a,2), S(null)`. Intended for tests and examples.
pub fn atoms(text: &str) -> Instance {
    crate::defs::parse_atom_list(text).expect("well-formed atom list")
}

/// A variable assignment.
pub type Assignment = BTreeMap<Name, Constant>;

/// Symmetric difference of two instances as a free function.
pub fn symmetric_difference(d1: &Instance, d2: &Instance) -> BTreeSet<GroundAtom> {
    d1.symmetric_difference(d2)
}

/// Active domain as a free function.
pub fn active_domain(d: &Instance) -> BTreeSet<Constant> {
    d.active_domain()
}
