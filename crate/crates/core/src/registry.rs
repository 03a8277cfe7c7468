//! Named host functions attachable to net transitions and arc expressions.
//!
//! Models reference behaviour by name; the registry resolves those names to
//! `HostFn` trait objects when a model source is compiled. Functions are
//! partial: `FnError::Reject` means the arguments are outside the function's
//! domain (the transition is simply not enabled for that binding), while
//! `FnError::Fail` is a genuine runtime fault.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FnError {
    /// The arguments lie outside the function's domain.
    #[error("arguments outside function domain")]
    Reject,
    #[error("host function failed: {0}")]
    Fail(String),
}

pub trait HostFn: Send + Sync {
    fn call(&self, args: &[Value]) -> Result<Value, FnError>;
}

impl<F> HostFn for F
where
    F: Fn(&[Value]) -> Result<Value, FnError> + Send + Sync,
{
    fn call(&self, args: &[Value]) -> Result<Value, FnError> {
        self(args)
    }
}

/// A name-keyed table of host functions shared across models.
#[derive(Clone, Default)]
pub struct FnRegistry {
    fns: BTreeMap<String, Arc<dyn HostFn>>,
}

impl FnRegistry {
    pub fn new() -> Self {
        FnRegistry::default()
    }

    /// Registers `f` under `name`, replacing any previous entry.
    pub fn register<F: HostFn + 'static>(&mut self, name: &str, f: F) {
        self.fns.insert(name.to_string(), Arc::new(f));
    }

    pub fn register_arc(&mut self, name: &str, f: Arc<dyn HostFn>) {
        self.fns.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn HostFn>> {
        self.fns.get(name).cloned()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.fns.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fns.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.fns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fns.is_empty()
    }
}

impl std::fmt::Debug for FnRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnRegistry")
            .field("names", &self.fns.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Builds a host function that maps enum symbols through a fixed table and
/// rejects everything outside it.
pub fn symbol_map(pairs: &[(&str, &str)]) -> impl HostFn {
    let table: BTreeMap<String, String> = pairs
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    move |args: &[Value]| -> Result<Value, FnError> {
        match args {
            [Value::Sym(s)] => table
                .get(s)
                .map(|out| Value::Sym(out.clone()))
                .ok_or(FnError::Reject),
            _ => Err(FnError::Reject),
        }
    }
}
