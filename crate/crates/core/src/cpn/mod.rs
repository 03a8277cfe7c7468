//! Coloured Petri nets: typed places, guarded transitions, arc patterns and
//! expressions, and timed tokens against an integer global clock.
//!
//! Input arcs carry patterns that destructure consumed tokens into variable
//! bindings (arcs sharing a variable must bind equal values); output arcs
//! carry expressions over those variables, optionally applying registered
//! host functions, and an optional production delay. A token in a timed
//! colour set is consumable only once the global clock has reached its
//! timestamp; when nothing is enabled the clock advances to the next
//! timestamp. Untimed models run the same machinery with every timestamp 0.

pub mod monitor;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::incidence::NetTopology;
use crate::registry::{FnError, HostFn};
use crate::value::{conforms, ColourSet, Value};

/// A pattern an input arc matches against consumed tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// Binds the token (join semantics across arcs of one transition).
    Var(String),
    /// Matches exactly this symbol.
    Sym(String),
    Tuple(Vec<Pattern>),
}

impl Pattern {
    /// Matches `value`, extending `env`. A variable already bound must see
    /// an equal value. On failure `env` may hold partial bindings; callers
    /// recurse with a fresh clone per candidate.
    pub fn matches(&self, value: &Value, env: &mut BTreeMap<String, Value>) -> bool {
        match (self, value) {
            (Pattern::Var(name), v) => match env.get(name) {
                Some(bound) => bound == v,
                None => {
                    env.insert(name.clone(), v.clone());
                    true
                }
            },
            (Pattern::Sym(sym), Value::Sym(s)) => sym == s,
            (Pattern::Tuple(parts), Value::Tuple(items)) => {
                parts.len() == items.len()
                    && parts.iter().zip(items).all(|(p, v)| p.matches(v, env))
            }
            _ => false,
        }
    }

    pub fn variables(&self) -> Vec<&str> {
        match self {
            Pattern::Var(name) => vec![name.as_str()],
            Pattern::Sym(_) => vec![],
            Pattern::Tuple(parts) => parts.iter().flat_map(|p| p.variables()).collect(),
        }
    }
}

/// An output-arc expression.
#[derive(Clone)]
pub enum Expr {
    Var(String),
    Sym(String),
    /// Emits the k-th symbol on the k-th firing of a source transition.
    Seq(Vec<String>),
    Tuple(Vec<Expr>),
    /// Applies a registered host function.
    Apply {
        name: String,
        func: Arc<dyn HostFn>,
        args: Vec<Expr>,
    },
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "Var({v})"),
            Expr::Sym(s) => write!(f, "Sym({s})"),
            Expr::Seq(items) => write!(f, "Seq({items:?})"),
            Expr::Tuple(items) => f.debug_tuple("Tuple").field(items).finish(),
            Expr::Apply { name, args, .. } => {
                f.debug_struct("Apply").field("name", name).field("args", args).finish()
            }
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Sym(a), Expr::Sym(b)) => a == b,
            (Expr::Seq(a), Expr::Seq(b)) => a == b,
            (Expr::Tuple(a), Expr::Tuple(b)) => a == b,
            (
                Expr::Apply { name: a, args: x, .. },
                Expr::Apply { name: b, args: y, .. },
            ) => a == b && x == y,
            _ => false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    UnboundVar(String),
    #[error("function {0} rejected its arguments")]
    Rejected(String),
    #[error("function {name} failed: {msg}")]
    FnFailed { name: String, msg: String },
    #[error("sequence expression used outside a source firing")]
    SeqOutsideSource,
    #[error("sequence expression exhausted at firing index {0}")]
    SeqExhausted(u32),
}

/// Evaluates an expression under `env`. `source_index` is the firing index
/// of the owning source transition, when there is one.
pub fn eval_expr(
    expr: &Expr,
    env: &BTreeMap<String, Value>,
    source_index: Option<u32>,
) -> Result<Value, EvalError> {
    match expr {
        Expr::Var(name) => env
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVar(name.clone())),
        Expr::Sym(s) => Ok(Value::Sym(s.clone())),
        Expr::Seq(symbols) => {
            let index = source_index.ok_or(EvalError::SeqOutsideSource)?;
            symbols
                .get(index as usize)
                .map(|s| Value::Sym(s.clone()))
                .ok_or(EvalError::SeqExhausted(index))
        }
        Expr::Tuple(items) => {
            let values: Result<Vec<Value>, EvalError> = items
                .iter()
                .map(|e| eval_expr(e, env, source_index))
                .collect();
            Ok(Value::Tuple(values?))
        }
        Expr::Apply { name, func, args } => {
            let values: Result<Vec<Value>, EvalError> = args
                .iter()
                .map(|e| eval_expr(e, env, source_index))
                .collect();
            match func.call(&values?) {
                Ok(v) => Ok(v),
                Err(FnError::Reject) => Err(EvalError::Rejected(name.clone())),
                Err(FnError::Fail(msg)) => Err(EvalError::FnFailed {
                    name: name.clone(),
                    msg,
                }),
            }
        }
    }
}

/// A transition guard over the bound variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Guard {
    True,
    False,
    Eq(String, Value),
    Ne(String, Value),
    In(String, Vec<Value>),
    All(Vec<Guard>),
}

impl Guard {
    pub fn holds(&self, env: &BTreeMap<String, Value>) -> Result<bool, EvalError> {
        let lookup = |name: &str| {
            env.get(name)
                .ok_or_else(|| EvalError::UnboundVar(name.to_string()))
        };
        match self {
            Guard::True => Ok(true),
            Guard::False => Ok(false),
            Guard::Eq(name, value) => Ok(lookup(name)? == value),
            Guard::Ne(name, value) => Ok(lookup(name)? != value),
            Guard::In(name, values) => Ok(values.contains(lookup(name)?)),
            Guard::All(guards) => {
                for g in guards {
                    if !g.holds(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnPlace {
    pub name: String,
    pub colour: usize,
    /// Initial tokens as (value, count, timestamp).
    pub init: Vec<(Value, u64, u64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnTrans {
    pub name: String,
    pub guard: Guard,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputArc {
    pub place: usize,
    pub trans: usize,
    pub pattern: Pattern,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputArc {
    pub trans: usize,
    pub place: usize,
    pub expr: Expr,
    /// Production delay added to the clock for timed target places.
    pub delay: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CpnBuildError {
    #[error("duplicate name: {0}")]
    DuplicateName(String),
    #[error("{context} references colour set index {index} out of range")]
    BadColourRef { context: String, index: usize },
    #[error("arc references {kind} index {index} out of range")]
    BadArcRef { kind: &'static str, index: usize },
    #[error("initial token {value} does not inhabit the colour of place {place}")]
    TypeMismatch { place: String, value: String },
    #[error("place {place} is untimed but its initial marking carries timestamps")]
    TimedTokenInUntimedPlace { place: String },
    #[error("output arc into untimed place {place} declares a delay")]
    DelayIntoUntimedPlace { place: String },
    #[error("variable {var} of pattern on place {place} is undeclared")]
    UndeclaredVariable { var: String, place: String },
    #[error("pattern variable {var} has colour {var_colour} but place {place} holds {place_colour}")]
    PatternTypeMismatch {
        var: String,
        var_colour: String,
        place: String,
        place_colour: String,
    },
    #[error("sequence expressions are not valid in this net layer")]
    SeqExpression,
}

/// An immutable, validated coloured net.
#[derive(Clone, Debug, PartialEq)]
pub struct CpnModel {
    pub name: String,
    pub timed: bool,
    pub colours: Vec<ColourSet>,
    /// Declared variables as (name, colour index).
    pub vars: Vec<(String, usize)>,
    pub places: Vec<CpnPlace>,
    pub transitions: Vec<CpnTrans>,
    pub input_arcs: Vec<InputArc>,
    pub output_arcs: Vec<OutputArc>,
}

impl CpnModel {
    /// Validates referential integrity, typing of the initial marking, and
    /// the timed-token rules.
    pub fn validate(self) -> Result<CpnModel, CpnBuildError> {
        let mut names = std::collections::BTreeSet::new();
        for name in self
            .places
            .iter()
            .map(|p| p.name.as_str())
            .chain(self.transitions.iter().map(|t| t.name.as_str()))
        {
            if !names.insert(name) {
                return Err(CpnBuildError::DuplicateName(name.to_string()));
            }
        }
        let mut colour_names = std::collections::BTreeSet::new();
        for c in &self.colours {
            if !colour_names.insert(c.name.as_str()) {
                return Err(CpnBuildError::DuplicateName(c.name.clone()));
            }
        }

        for place in &self.places {
            if place.colour >= self.colours.len() {
                return Err(CpnBuildError::BadColourRef {
                    context: format!("place {}", place.name),
                    index: place.colour,
                });
            }
            let timed = self.colours[place.colour].timed;
            for (value, _, ts) in &place.init {
                if !conforms(&self.colours, place.colour, value) {
                    return Err(CpnBuildError::TypeMismatch {
                        place: place.name.clone(),
                        value: value.to_string(),
                    });
                }
                if *ts > 0 && !timed {
                    return Err(CpnBuildError::TimedTokenInUntimedPlace {
                        place: place.name.clone(),
                    });
                }
            }
        }
        for (name, colour) in &self.vars {
            if *colour >= self.colours.len() {
                return Err(CpnBuildError::BadColourRef {
                    context: format!("variable {name}"),
                    index: *colour,
                });
            }
        }

        let var_colour =
            |name: &str| self.vars.iter().find(|(n, _)| n == name).map(|(_, c)| *c);
        for arc in &self.input_arcs {
            if arc.place >= self.places.len() {
                return Err(CpnBuildError::BadArcRef {
                    kind: "place",
                    index: arc.place,
                });
            }
            if arc.trans >= self.transitions.len() {
                return Err(CpnBuildError::BadArcRef {
                    kind: "transition",
                    index: arc.trans,
                });
            }
            let place = &self.places[arc.place];
            // a bare variable pattern must agree with the place's colour
            if let Pattern::Var(var) = &arc.pattern {
                match var_colour(var) {
                    None => {
                        return Err(CpnBuildError::UndeclaredVariable {
                            var: var.clone(),
                            place: place.name.clone(),
                        })
                    }
                    Some(c) if c != place.colour => {
                        return Err(CpnBuildError::PatternTypeMismatch {
                            var: var.clone(),
                            var_colour: self.colours[c].name.clone(),
                            place: place.name.clone(),
                            place_colour: self.colours[place.colour].name.clone(),
                        })
                    }
                    Some(_) => {}
                }
            } else {
                for var in arc.pattern.variables() {
                    if var_colour(var).is_none() {
                        return Err(CpnBuildError::UndeclaredVariable {
                            var: var.to_string(),
                            place: place.name.clone(),
                        });
                    }
                }
            }
        }
        for arc in &self.output_arcs {
            if arc.place >= self.places.len() {
                return Err(CpnBuildError::BadArcRef {
                    kind: "place",
                    index: arc.place,
                });
            }
            if arc.trans >= self.transitions.len() {
                return Err(CpnBuildError::BadArcRef {
                    kind: "transition",
                    index: arc.trans,
                });
            }
            let place = &self.places[arc.place];
            if arc.delay > 0 && !self.colours[place.colour].timed {
                return Err(CpnBuildError::DelayIntoUntimedPlace {
                    place: place.name.clone(),
                });
            }
            if contains_seq(&arc.expr) {
                return Err(CpnBuildError::SeqExpression);
            }
        }
        Ok(self)
    }

    pub fn place_index(&self, name: &str) -> Option<usize> {
        self.places.iter().position(|p| p.name == name)
    }

    pub fn trans_index(&self, name: &str) -> Option<usize> {
        self.transitions.iter().position(|t| t.name == name)
    }

    /// A transition is timed when any of its input places holds a timed
    /// colour set; the priority firing policy lets untimed transitions go
    /// first.
    pub fn trans_is_timed(&self, trans: usize) -> bool {
        self.input_arcs
            .iter()
            .filter(|a| a.trans == trans)
            .any(|a| self.colours[self.places[a.place].colour].timed)
    }

    pub fn initial_state(&self) -> CpnState {
        let mut marking = vec![BTreeMap::new(); self.places.len()];
        for (i, place) in self.places.iter().enumerate() {
            for (value, count, ts) in &place.init {
                let token = TimedToken {
                    value: value.clone(),
                    ready: *ts,
                };
                *marking[i].entry(token).or_insert(0) += count;
            }
        }
        CpnState { clock: 0, marking }
    }
}

fn contains_seq(expr: &Expr) -> bool {
    match expr {
        Expr::Seq(_) => true,
        Expr::Var(_) | Expr::Sym(_) => false,
        Expr::Tuple(items) => items.iter().any(contains_seq),
        Expr::Apply { args, .. } => args.iter().any(contains_seq),
    }
}

/// A token with the earliest clock value at which it may be consumed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedToken {
    pub value: Value,
    pub ready: u64,
}

/// Execution state: the global clock and the timed multiset at each place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpnState {
    pub clock: u64,
    pub marking: Vec<BTreeMap<TimedToken, u64>>,
}

impl CpnState {
    pub fn place_size(&self, place: usize) -> u64 {
        self.marking[place].values().sum()
    }

    pub fn place_sizes(&self) -> Vec<u64> {
        (0..self.marking.len()).map(|p| self.place_size(p)).collect()
    }

    pub fn total_tokens(&self) -> u64 {
        self.place_sizes().iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnBinding {
    pub trans: usize,
    pub vars: BTreeMap<String, Value>,
    /// Consumed tokens, one per input arc in arc declaration order.
    pub consumed: Vec<(usize, TimedToken)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpnRunError {
    #[error("nothing is enabled and no future token can enable anything")]
    Deadlocked,
    #[error("evaluating an arc expression of {trans} failed: {source}")]
    ArcEval {
        trans: String,
        #[source]
        source: EvalError,
    },
    #[error("guard of {trans} failed: {source}")]
    GuardEval {
        trans: String,
        #[source]
        source: EvalError,
    },
    #[error("transition {trans} produced {value}, which does not inhabit the colour of {place}")]
    OutputTypeMismatch {
        trans: String,
        place: String,
        value: String,
    },
    #[error("binding consumes a token that is not present or not ready")]
    StaleBinding,
}

/// Enumerates enabled bindings at the current clock, deterministically:
/// transitions in declaration order, tokens in ascending order per arc.
pub fn enabled_bindings(model: &CpnModel, state: &CpnState) -> Result<Vec<CpnBinding>, CpnRunError> {
    let mut out = Vec::new();
    for trans in 0..model.transitions.len() {
        let arcs: Vec<&InputArc> = model
            .input_arcs
            .iter()
            .filter(|a| a.trans == trans)
            .collect();
        if arcs.is_empty() {
            continue;
        }
        let mut env = BTreeMap::new();
        let mut consumed = Vec::new();
        let mut demand: BTreeMap<(usize, TimedToken), u64> = BTreeMap::new();
        descend(
            model, state, trans, &arcs, 0, &mut env, &mut consumed, &mut demand, &mut out,
        )?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    model: &CpnModel,
    state: &CpnState,
    trans: usize,
    arcs: &[&InputArc],
    depth: usize,
    env: &mut BTreeMap<String, Value>,
    consumed: &mut Vec<(usize, TimedToken)>,
    demand: &mut BTreeMap<(usize, TimedToken), u64>,
    out: &mut Vec<CpnBinding>,
) -> Result<(), CpnRunError> {
    if depth == arcs.len() {
        let guard = &model.transitions[trans].guard;
        let holds = guard.holds(env).map_err(|e| CpnRunError::GuardEval {
            trans: model.transitions[trans].name.clone(),
            source: e,
        })?;
        if holds {
            out.push(CpnBinding {
                trans,
                vars: env.clone(),
                consumed: consumed.clone(),
            });
        }
        return Ok(());
    }
    let arc = arcs[depth];
    let bag = &state.marking[arc.place];
    for (token, &count) in bag.iter() {
        if token.ready > state.clock {
            continue;
        }
        let key = (arc.place, token.clone());
        let needed = demand.get(&key).copied().unwrap_or(0) + 1;
        if count < needed {
            continue;
        }
        let mut branch_env = env.clone();
        if !arc.pattern.matches(&token.value, &mut branch_env) {
            continue;
        }
        consumed.push((arc.place, token.clone()));
        *demand.entry(key.clone()).or_insert(0) += 1;
        let mut saved = std::mem::replace(env, branch_env);
        descend(model, state, trans, arcs, depth + 1, env, consumed, demand, out)?;
        std::mem::swap(env, &mut saved);
        consumed.pop();
        *demand.get_mut(&key).unwrap() -= 1;
    }
    Ok(())
}

/// Consumes the binding's tokens and produces the output-arc tokens.
/// Produced tokens in timed places carry `clock + delay`.
pub fn fire_binding(
    model: &CpnModel,
    state: &CpnState,
    binding: &CpnBinding,
) -> Result<CpnState, CpnRunError> {
    let mut next = state.clone();
    for (place, token) in &binding.consumed {
        if token.ready > state.clock {
            return Err(CpnRunError::StaleBinding);
        }
        let bag = &mut next.marking[*place];
        match bag.get_mut(token) {
            Some(count) if *count > 0 => {
                *count -= 1;
                if *count == 0 {
                    bag.remove(token);
                }
            }
            _ => return Err(CpnRunError::StaleBinding),
        }
    }
    let trans_name = &model.transitions[binding.trans].name;
    for arc in model.output_arcs.iter().filter(|a| a.trans == binding.trans) {
        let value =
            eval_expr(&arc.expr, &binding.vars, None).map_err(|e| CpnRunError::ArcEval {
                trans: trans_name.clone(),
                source: e,
            })?;
        let place = &model.places[arc.place];
        if !conforms(&model.colours, place.colour, &value) {
            return Err(CpnRunError::OutputTypeMismatch {
                trans: trans_name.clone(),
                place: place.name.clone(),
                value: value.to_string(),
            });
        }
        let ready = if model.colours[place.colour].timed {
            state.clock + arc.delay
        } else {
            0
        };
        *next.marking[arc.place]
            .entry(TimedToken { value, ready })
            .or_insert(0) += 1;
    }
    Ok(next)
}

/// How `step` picks among enabled bindings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoicePolicy {
    /// Uniform over all enabled bindings.
    SeededRandom,
    /// Bindings of untimed transitions fire before timed ones; uniform
    /// within the preferred class.
    Priority,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnEvent {
    pub trans: usize,
    pub clock: u64,
}

/// Fires one binding, advancing the clock first if nothing is enabled now.
/// Errors with `Deadlocked` when no future clock value can enable anything.
pub fn step(
    model: &CpnModel,
    state: &CpnState,
    policy: ChoicePolicy,
    rng: &mut dyn RngCore,
) -> Result<(CpnEvent, CpnState), CpnRunError> {
    let mut state = state.clone();
    loop {
        let enabled = enabled_bindings(model, &state)?;
        if !enabled.is_empty() {
            let pool: Vec<&CpnBinding> = match policy {
                ChoicePolicy::SeededRandom => enabled.iter().collect(),
                ChoicePolicy::Priority => {
                    let untimed: Vec<&CpnBinding> = enabled
                        .iter()
                        .filter(|b| !model.trans_is_timed(b.trans))
                        .collect();
                    if untimed.is_empty() {
                        enabled.iter().collect()
                    } else {
                        untimed
                    }
                }
            };
            let binding = pool[rng.gen_range(0..pool.len())];
            let next = fire_binding(model, &state, binding)?;
            return Ok((
                CpnEvent {
                    trans: binding.trans,
                    clock: state.clock,
                },
                next,
            ));
        }
        // advance to the earliest future timestamp, if any
        let next_ready = state
            .marking
            .iter()
            .flat_map(|bag| bag.keys())
            .map(|t| t.ready)
            .filter(|ts| *ts > state.clock)
            .min();
        match next_ready {
            Some(ts) => state.clock = ts,
            None => return Err(CpnRunError::Deadlocked),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpnRun {
    pub events: Vec<CpnEvent>,
    pub final_state: CpnState,
    /// True when the run stopped because nothing can ever fire again,
    /// false when it stopped at the step limit.
    pub completed: bool,
}

/// Runs up to `max_steps` firings from the initial state with a seeded RNG.
pub fn run(
    model: &CpnModel,
    max_steps: u64,
    seed: u64,
    policy: ChoicePolicy,
) -> Result<CpnRun, CpnRunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = model.initial_state();
    let mut events = Vec::new();
    let mut completed = true;
    for _ in 0..max_steps {
        match step(model, &state, policy, &mut rng) {
            Ok((event, next)) => {
                events.push(event);
                state = next;
            }
            Err(CpnRunError::Deadlocked) => {
                completed = true;
                return Ok(CpnRun {
                    events,
                    final_state: state,
                    completed,
                });
            }
            Err(e) => return Err(e),
        }
        completed = false;
    }
    // distinguish "limit reached" from "limit reached exactly at the end"
    let mut probe_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    match step(model, &state, policy, &mut probe_rng) {
        Ok(_) => {}
        Err(CpnRunError::Deadlocked) => completed = true,
        Err(e) => return Err(e),
    }
    Ok(CpnRun {
        events,
        final_state: state,
        completed,
    })
}

impl NetTopology for CpnModel {
    fn topology_name(&self) -> &str {
        &self.name
    }

    fn place_names(&self) -> Vec<String> {
        self.places.iter().map(|p| p.name.clone()).collect()
    }

    fn transition_names(&self) -> Vec<String> {
        self.transitions.iter().map(|t| t.name.clone()).collect()
    }

    fn consuming_arcs(&self) -> Vec<(usize, usize, u32)> {
        self.input_arcs.iter().map(|a| (a.place, a.trans, 1)).collect()
    }

    fn producing_arcs(&self) -> Vec<(usize, usize, u32)> {
        self.output_arcs.iter().map(|a| (a.place, a.trans, 1)).collect()
    }

    fn inhibiting_arcs(&self) -> Vec<(usize, usize, u32)> {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colour(name: &str, symbols: &[&str], timed: bool) -> ColourSet {
        ColourSet::enumeration(name, symbols, timed)
    }

    /// Inputs --i--> Shift --f(i)--> Outputs on a two-symbol colour set.
    fn tiny_model(timed: bool, delays: u64) -> CpnModel {
        let func: Arc<dyn HostFn> = Arc::new(|args: &[Value]| match args {
            [Value::Sym(s)] => Ok(Value::Sym(format!("s{s}"))),
            _ => Err(FnError::Reject),
        });
        CpnModel {
            name: "tiny".into(),
            timed,
            colours: vec![
                colour("IN", &["a", "b"], timed),
                colour("OUT", &["sa", "sb"], timed),
            ],
            vars: vec![("i".into(), 0)],
            places: vec![
                CpnPlace {
                    name: "Inputs".into(),
                    colour: 0,
                    init: vec![
                        (Value::sym("a"), 1, if timed { 1 } else { 0 }),
                        (Value::sym("b"), 1, if timed { 3 } else { 0 }),
                    ],
                },
                CpnPlace {
                    name: "Outputs".into(),
                    colour: 1,
                    init: vec![],
                },
            ],
            transitions: vec![CpnTrans {
                name: "Shift".into(),
                guard: Guard::True,
            }],
            input_arcs: vec![InputArc {
                place: 0,
                trans: 0,
                pattern: Pattern::Var("i".into()),
            }],
            output_arcs: vec![OutputArc {
                trans: 0,
                place: 1,
                expr: Expr::Apply {
                    name: "shift".into(),
                    func,
                    args: vec![Expr::Var("i".into())],
                },
                delay: delays,
            }],
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn untimed_bindings_enumerate_per_token_in_order() {
        let model = tiny_model(false, 0);
        let state = model.initial_state();
        let bindings = enabled_bindings(&model, &state).unwrap();
        assert_eq!(bindings.len(), 2);
        assert_eq!(bindings[0].vars["i"], Value::sym("a"));
        assert_eq!(bindings[1].vars["i"], Value::sym("b"));
    }

    #[test]
    fn timed_tokens_wait_for_the_clock() {
        let model = tiny_model(true, 0);
        let state = model.initial_state();
        // clock 0: both tokens stamped in the future
        assert!(enabled_bindings(&model, &state).unwrap().is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (event, state) = step(&model, &state, ChoicePolicy::Priority, &mut rng).unwrap();
        assert_eq!(event.clock, 1, "first event waits for the earliest stamp");
        let (event, state) = step(&model, &state, ChoicePolicy::Priority, &mut rng).unwrap();
        assert_eq!(event.clock, 3);
        assert_eq!(
            step(&model, &state, ChoicePolicy::Priority, &mut rng),
            Err(CpnRunError::Deadlocked)
        );
    }

    #[test]
    fn produced_tokens_carry_clock_plus_delay() {
        let model = tiny_model(true, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (event, state) = step(&model, &model.initial_state(), ChoicePolicy::Priority, &mut rng)
            .unwrap();
        assert_eq!(event.clock, 1);
        let produced: Vec<&TimedToken> = state.marking[1].keys().collect();
        assert_eq!(produced.len(), 1);
        assert_eq!(produced[0].ready, 5);
    }

    #[test]
    fn guards_filter_bindings_and_see_all_variables() {
        let mut model = tiny_model(false, 0);
        model.transitions[0].guard = Guard::In(
            "i".into(),
            vec![Value::sym("b")],
        );
        let bindings = enabled_bindings(&model, &model.initial_state()).unwrap();
        assert_eq!(bindings.len(), 1);
        assert_eq!(bindings[0].vars["i"], Value::sym("b"));

        model.transitions[0].guard = Guard::Eq("nope".into(), Value::sym("b"));
        assert!(matches!(
            enabled_bindings(&model, &model.initial_state()),
            Err(CpnRunError::GuardEval { .. })
        ));

        model.transitions[0].guard = Guard::All(vec![
            Guard::Ne("i".into(), Value::sym("a")),
            Guard::In("i".into(), vec![Value::sym("a"), Value::sym("b")]),
        ]);
        let bindings = enabled_bindings(&model, &model.initial_state()).unwrap();
        assert_eq!(bindings.len(), 1);
    }

    #[test]
    fn tuple_patterns_destructure_and_join() {
        let mut env = BTreeMap::new();
        let pattern = Pattern::Tuple(vec![
            Pattern::Var("x".into()),
            Pattern::Var("x".into()),
            Pattern::Sym("k".into()),
        ]);
        let matching = Value::tuple([Value::sym("v"), Value::sym("v"), Value::sym("k")]);
        assert!(pattern.matches(&matching, &mut env));
        assert_eq!(env["x"], Value::sym("v"));

        let mut env = BTreeMap::new();
        let diverging = Value::tuple([Value::sym("v"), Value::sym("w"), Value::sym("k")]);
        assert!(!pattern.matches(&diverging, &mut env));
    }

    #[test]
    fn untimed_transitions_preempt_timed_ones_under_priority() {
        // two independent transitions: T consumes from a timed place,
        // U from an untimed one; both ready at clock 0
        let model = CpnModel {
            name: "mixed".into(),
            timed: true,
            colours: vec![colour("A", &["t"], true), colour("B", &["u"], false)],
            vars: vec![("a".into(), 0), ("b".into(), 1)],
            places: vec![
                CpnPlace {
                    name: "Timed".into(),
                    colour: 0,
                    init: vec![(Value::sym("t"), 1, 0)],
                },
                CpnPlace {
                    name: "Plain".into(),
                    colour: 1,
                    init: vec![(Value::sym("u"), 1, 0)],
                },
                CpnPlace {
                    name: "SinkA".into(),
                    colour: 0,
                    init: vec![],
                },
                CpnPlace {
                    name: "SinkB".into(),
                    colour: 1,
                    init: vec![],
                },
            ],
            transitions: vec![
                CpnTrans {
                    name: "T".into(),
                    guard: Guard::True,
                },
                CpnTrans {
                    name: "U".into(),
                    guard: Guard::True,
                },
            ],
            input_arcs: vec![
                InputArc {
                    place: 0,
                    trans: 0,
                    pattern: Pattern::Var("a".into()),
                },
                InputArc {
                    place: 1,
                    trans: 1,
                    pattern: Pattern::Var("b".into()),
                },
            ],
            output_arcs: vec![
                OutputArc {
                    trans: 0,
                    place: 2,
                    expr: Expr::Var("a".into()),
                    delay: 0,
                },
                OutputArc {
                    trans: 1,
                    place: 3,
                    expr: Expr::Var("b".into()),
                    delay: 0,
                },
            ],
        }
        .validate()
        .unwrap();

        // under priority, every seed picks the untimed transition first
        for seed in 0..20 {
            let run = run(&model, 2, seed, ChoicePolicy::Priority).unwrap();
            let names: Vec<&str> = run
                .events
                .iter()
                .map(|e| model.transitions[e.trans].name.as_str())
                .collect();
            assert_eq!(names, vec!["U", "T"], "seed {seed}");
        }
        // under seeded-random, some seed picks the timed one first
        let mut saw_timed_first = false;
        for seed in 0..20 {
            let run = run(&model, 2, seed, ChoicePolicy::SeededRandom).unwrap();
            if run.events[0].trans == 0 {
                saw_timed_first = true;
            }
        }
        assert!(saw_timed_first);
    }

    #[test]
    fn run_reports_completion_and_respects_limits() {
        let model = tiny_model(false, 0);
        let full = run(&model, 50, 7, ChoicePolicy::SeededRandom).unwrap();
        assert_eq!(full.events.len(), 2);
        assert!(full.completed);
        assert_eq!(full.final_state.place_size(0), 0);
        assert_eq!(full.final_state.place_size(1), 2);

        let partial = run(&model, 1, 7, ChoicePolicy::SeededRandom).unwrap();
        assert_eq!(partial.events.len(), 1);
        assert!(!partial.completed);

        // exactly consuming the limit still detects completion
        let exact = run(&model, 2, 7, ChoicePolicy::SeededRandom).unwrap();
        assert_eq!(exact.events.len(), 2);
        assert!(exact.completed);
    }

    #[test]
    fn clock_never_decreases_and_consumed_tokens_are_ready() {
        let model = tiny_model(true, 2);
        let run = run(&model, 50, 3, ChoicePolicy::Priority).unwrap();
        let mut last = 0;
        for event in &run.events {
            assert!(event.clock >= last);
            last = event.clock;
        }
    }

    #[test]
    fn validation_rejects_broken_models() {
        let mut model = tiny_model(false, 0);
        model.places[0].init.push((Value::sym("zzz"), 1, 0));
        assert!(matches!(
            model.validate(),
            Err(CpnBuildError::TypeMismatch { .. })
        ));

        let mut model = tiny_model(false, 0);
        model.places[0].init.push((Value::sym("a"), 1, 5));
        assert!(matches!(
            model.validate(),
            Err(CpnBuildError::TimedTokenInUntimedPlace { .. })
        ));

        let mut model = tiny_model(false, 0);
        model.output_arcs[0].delay = 1;
        assert!(matches!(
            model.validate(),
            Err(CpnBuildError::DelayIntoUntimedPlace { .. })
        ));

        let mut model = tiny_model(false, 0);
        model.input_arcs[0].pattern = Pattern::Var("ghost".into());
        assert!(matches!(
            model.validate(),
            Err(CpnBuildError::UndeclaredVariable { .. })
        ));
    }

    #[test]
    fn seq_expressions_are_rejected_in_coloured_nets() {
        let mut model = tiny_model(false, 0);
        model.output_arcs[0].expr = Expr::Seq(vec!["a".into()]);
        assert!(matches!(
            model.validate(),
            Err(CpnBuildError::SeqExpression)
        ));
    }
}
