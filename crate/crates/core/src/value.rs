//! Token values, colour sets and multisets.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

/// A token value carried through a net.
///
/// Reals are compared and hashed through their IEEE-754 bit patterns
/// (`total_cmp` / `to_bits`) so values form a total order and can live in
/// ordered containers.
#[derive(Clone, Debug)]
pub enum Value {
    /// A symbol from an enumerated colour set.
    Sym(String),
    Int(i64),
    Real(f64),
    Bytes(Vec<u8>),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn sym(name: &str) -> Self {
        Value::Sym(name.to_string())
    }

    pub fn tuple(items: impl IntoIterator<Item = Value>) -> Self {
        Value::Tuple(items.into_iter().collect())
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Sym(_) => 0,
            Value::Int(_) => 1,
            Value::Real(_) => 2,
            Value::Bytes(_) => 3,
            Value::Tuple(_) => 4,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Sym(a), Value::Sym(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Real(a), Value::Real(b)) => a.total_cmp(b),
            (Value::Bytes(a), Value::Bytes(b)) => a.cmp(b),
            (Value::Tuple(a), Value::Tuple(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u8(self.rank());
        match self {
            Value::Sym(s) => s.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Real(r) => state.write_u64(r.to_bits()),
            Value::Bytes(b) => b.hash(state),
            Value::Tuple(items) => {
                state.write_usize(items.len());
                for item in items {
                    item.hash(state);
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => write!(f, "{s}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Bytes(b) => {
                write!(f, "0x")?;
                for byte in b {
                    write!(f, "{byte:02x}")?;
                }
                Ok(())
            }
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The shape of a colour set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColourKind {
    /// A finite set of named symbols.
    Enum(Vec<String>),
    Int,
    Real,
    Bytes,
    /// A product of other colour sets, referenced by index into the owning
    /// model's colour table.
    Product(Vec<usize>),
}

/// A named colour set. `timed` marks the set's tokens as carrying
/// timestamps in a timed net.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColourSet {
    pub name: String,
    pub kind: ColourKind,
    pub timed: bool,
}

impl ColourSet {
    pub fn enumeration(name: &str, symbols: &[&str], timed: bool) -> Self {
        ColourSet {
            name: name.to_string(),
            kind: ColourKind::Enum(symbols.iter().map(|s| s.to_string()).collect()),
            timed,
        }
    }
}

/// Checks that `value` inhabits the colour set at index `colour` within
/// `colours`. Product membership recurses componentwise.
pub fn conforms(colours: &[ColourSet], colour: usize, value: &Value) -> bool {
    let Some(cs) = colours.get(colour) else {
        return false;
    };
    match (&cs.kind, value) {
        (ColourKind::Enum(symbols), Value::Sym(s)) => symbols.iter().any(|sym| sym == s),
        (ColourKind::Int, Value::Int(_)) => true,
        (ColourKind::Real, Value::Real(_)) => true,
        (ColourKind::Bytes, Value::Bytes(_)) => true,
        (ColourKind::Product(parts), Value::Tuple(items)) => {
            parts.len() == items.len()
                && parts
                    .iter()
                    .zip(items)
                    .all(|(part, item)| conforms(colours, *part, item))
        }
        _ => false,
    }
}

/// A multiset of token values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Bag(BTreeMap<Value, u64>);

impl Bag {
    pub fn new() -> Self {
        Bag(BTreeMap::new())
    }

    pub fn insert(&mut self, value: Value, count: u64) {
        if count > 0 {
            *self.0.entry(value).or_insert(0) += count;
        }
    }

    /// Removes `count` copies of `value`; fails without changing the bag if
    /// fewer are present.
    pub fn remove(&mut self, value: &Value, count: u64) -> Result<(), u64> {
        match self.0.get_mut(value) {
            Some(have) if *have >= count => {
                *have -= count;
                let empty = *have == 0;
                if empty {
                    self.0.remove(value);
                }
                Ok(())
            }
            Some(have) => Err(*have),
            None => Err(0),
        }
    }

    pub fn count(&self, value: &Value) -> u64 {
        self.0.get(value).copied().unwrap_or(0)
    }

    /// Total number of tokens, multiplicities included.
    pub fn size(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, u64)> {
        self.0.iter().map(|(v, n)| (v, *n))
    }

    /// Distinct values in ascending order.
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.0.keys()
    }
}

impl fmt::Display for Bag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "empty");
        }
        for (i, (value, count)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ++ ")?;
            }
            write!(f, "{count}'{value}")?;
        }
        Ok(())
    }
}
