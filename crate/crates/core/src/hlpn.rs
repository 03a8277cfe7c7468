//! High-level Petri nets with host-registered transition rules.
//!
//! A net is a bipartite graph of typed places and transitions. Each
//! transition carries a rule: a partial function from the binding of its
//! input-arc variables to output tokens. Transitions without input arcs must
//! be declared as sources and carry a finite firing budget; their rules see a
//! firing index instead of consumed tokens, so a source can emit a scripted
//! sequence of tokens.
//!
//! Enabling uses unit bindings: one token is bound per input arc per weight
//! unit, and arcs sharing a variable name must bind equal values. The
//! enabled set is enumerated in a deterministic order (transitions in
//! declaration order, candidate tokens in ascending value order), which the
//! simulator relies on for reproducibility.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::value::{conforms, Bag, ColourSet, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransKind {
    Normal,
    /// A transition with no input arcs and a finite number of firings.
    Source { budget: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Normal,
    /// Blocks its transition while the source place holds `weight` or more
    /// tokens. Only place-to-transition inhibitors are allowed.
    Inhibitor,
}

#[derive(Clone, Debug)]
pub struct Place {
    pub name: String,
    pub colour: usize,
}

#[derive(Clone, Debug)]
pub struct Transition {
    pub name: String,
    pub kind: TransKind,
}

/// An arc between a place and a transition, in either direction.
#[derive(Clone, Debug)]
pub struct NetArc {
    pub place: PlaceId,
    pub trans: TransId,
    /// True for place-to-transition (input) arcs.
    pub into_transition: bool,
    pub kind: ArcKind,
    pub weight: u32,
    /// Variable name bound on input arcs; empty on output arcs.
    pub label: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("duplicate {kind} name: {name}")]
    DuplicateName { kind: &'static str, name: String },
    #[error("arc references unknown node: {name}")]
    DanglingArc { name: String },
    #[error("arc endpoints must pair a place with a transition: {from} -> {to}")]
    NotBipartite { from: String, to: String },
    #[error("unknown colour set: {name}")]
    UnknownColour { name: String },
    #[error("initial token {value} does not inhabit the colour of place {place}")]
    TypeMismatch { place: String, value: String },
    #[error("transition {name} has no input arcs and is not a source")]
    SourcelessTransition { name: String },
    #[error("source transition {name} may not have input arcs")]
    InputsOnSource { name: String },
    #[error("transition {name} has no rule")]
    MissingRule { name: String },
    #[error("inhibitor arcs must run from a place into a transition: {from} -> {to}")]
    InhibitorDirection { from: String, to: String },
    #[error("arc {from} -> {to} has zero weight")]
    ZeroWeight { from: String, to: String },
    #[error("source transition {name} must have a positive budget")]
    ZeroBudget { name: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    /// The binding lies outside the rule's domain; the transition is not
    /// enabled for it.
    #[error("binding outside rule domain")]
    Reject,
    #[error("rule failed: {0}")]
    Fail(String),
}

/// Tokens to produce, as pairs of target place and value.
pub type RuleOutput = Vec<(PlaceId, Value)>;

/// The behaviour of a transition. `apply` is consulted both during enabling
/// (a `Reject` filters the binding out) and during firing (to compute the
/// produced tokens).
pub trait RuleFn: Send + Sync {
    fn apply(&self, binding: &Binding) -> Result<RuleOutput, RuleError>;
}

impl<F> RuleFn for F
where
    F: Fn(&Binding) -> Result<RuleOutput, RuleError> + Send + Sync,
{
    fn apply(&self, binding: &Binding) -> Result<RuleOutput, RuleError> {
        self(binding)
    }
}

/// The assignment a transition fires under.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding {
    /// Input-arc variables and their bound values.
    pub vars: BTreeMap<String, Value>,
    /// Consumed tokens, one entry per weight unit per input arc, in arc
    /// declaration order.
    pub consumed: Vec<(PlaceId, Value)>,
    /// For sources: how many times the transition has fired before this one.
    pub source_index: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enabled {
    pub trans: TransId,
    pub binding: Binding,
}

/// Token distribution plus remaining source budgets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Marking {
    bags: Vec<Bag>,
    budgets: Vec<u32>,
}

impl Marking {
    pub fn bag(&self, place: PlaceId) -> &Bag {
        &self.bags[place.0 as usize]
    }

    pub fn bag_mut(&mut self, place: PlaceId) -> &mut Bag {
        &mut self.bags[place.0 as usize]
    }

    pub fn budget(&self, trans: TransId) -> u32 {
        self.budgets[trans.0 as usize]
    }

    /// Token count per place, in place order.
    pub fn token_counts(&self) -> Vec<u64> {
        self.bags.iter().map(Bag::size).collect()
    }

    pub fn total_tokens(&self) -> u64 {
        self.bags.iter().map(Bag::size).sum()
    }

    pub fn budgets_exhausted(&self) -> bool {
        self.budgets.iter().all(|b| *b == 0)
    }
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("unknown transition id {0}")]
    UnknownTransition(u32),
    #[error("transition {name} is not enabled: {reason}")]
    NotEnabled { name: String, reason: String },
    #[error("rule of transition {name} failed: {msg}")]
    RuleFailed { name: String, msg: String },
    #[error("rule of transition {name} produced a token for {place}, which is not an output place")]
    UnknownOutputPlace { name: String, place: String },
    #[error("rule of transition {name} produced {value}, which does not inhabit the colour of {place}")]
    OutputTypeMismatch {
        name: String,
        place: String,
        value: String,
    },
    #[error("marking shape does not match net (places {places}, budgets {budgets})")]
    ForeignMarking { places: usize, budgets: usize },
}

/// A compiled, validated net.
#[derive(Clone)]
pub struct Net {
    name: String,
    colours: Vec<ColourSet>,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<NetArc>,
    rules: Vec<Arc<dyn RuleFn>>,
    m0: Marking,
    inputs_of: Vec<Vec<usize>>,
    outputs_of: Vec<Vec<usize>>,
    inhibitors_of: Vec<Vec<usize>>,
}

impl fmt::Debug for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Net")
            .field("name", &self.name)
            .field("places", &self.places.len())
            .field("transitions", &self.transitions.len())
            .field("arcs", &self.arcs.len())
            .finish()
    }
}

impl Net {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn colours(&self) -> &[ColourSet] {
        &self.colours
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn arcs(&self) -> &[NetArc] {
        &self.arcs
    }

    pub fn place_name(&self, place: PlaceId) -> &str {
        &self.places[place.0 as usize].name
    }

    pub fn trans_name(&self, trans: TransId) -> &str {
        &self.transitions[trans.0 as usize].name
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.places
            .iter()
            .position(|p| p.name == name)
            .map(|i| PlaceId(i as u32))
    }

    pub fn trans_id(&self, name: &str) -> Option<TransId> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(|i| TransId(i as u32))
    }

    pub fn rule(&self, trans: TransId) -> &Arc<dyn RuleFn> {
        &self.rules[trans.0 as usize]
    }

    /// The declared initial marking, budgets included.
    pub fn initial_marking(&self) -> Marking {
        self.m0.clone()
    }

    /// Input arcs of `trans` in declaration order.
    pub fn input_arcs(&self, trans: TransId) -> impl Iterator<Item = &NetArc> {
        self.inputs_of[trans.0 as usize].iter().map(|i| &self.arcs[*i])
    }

    pub fn output_arcs(&self, trans: TransId) -> impl Iterator<Item = &NetArc> {
        self.outputs_of[trans.0 as usize]
            .iter()
            .map(|i| &self.arcs[*i])
    }

    pub fn inhibitor_arcs(&self, trans: TransId) -> impl Iterator<Item = &NetArc> {
        self.inhibitors_of[trans.0 as usize]
            .iter()
            .map(|i| &self.arcs[*i])
    }

    /// True when no place with outgoing input arcs holds tokens, i.e. every
    /// remaining token sits in a sink place.
    pub fn tokens_only_in_sinks(&self, marking: &Marking) -> bool {
        self.places.iter().enumerate().all(|(i, _)| {
            let place = PlaceId(i as u32);
            marking.bag(place).is_empty() || self.is_sink(place)
        })
    }

    pub fn is_sink(&self, place: PlaceId) -> bool {
        !self
            .arcs
            .iter()
            .any(|a| a.into_transition && a.kind == ArcKind::Normal && a.place == place)
    }

    fn check_marking_shape(&self, marking: &Marking) -> Result<(), ExecError> {
        if marking.bags.len() != self.places.len() || marking.budgets.len() != self.transitions.len()
        {
            return Err(ExecError::ForeignMarking {
                places: marking.bags.len(),
                budgets: marking.budgets.len(),
            });
        }
        Ok(())
    }
}

/// Incrementally assembles and validates a `Net`.
pub struct NetBuilder {
    name: String,
    colours: Vec<ColourSet>,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<(String, String, ArcKind, u32, String)>,
    rules: BTreeMap<u32, Arc<dyn RuleFn>>,
    init: Vec<(PlaceId, Value, u64)>,
}

impl NetBuilder {
    pub fn new(name: &str) -> Self {
        NetBuilder {
            name: name.to_string(),
            colours: Vec::new(),
            places: Vec::new(),
            transitions: Vec::new(),
            arcs: Vec::new(),
            rules: BTreeMap::new(),
            init: Vec::new(),
        }
    }

    pub fn colour(&mut self, cs: ColourSet) -> usize {
        self.colours.push(cs);
        self.colours.len() - 1
    }

    pub fn colour_index(&self, name: &str) -> Option<usize> {
        self.colours.iter().position(|c| c.name == name)
    }

    pub fn place(&mut self, name: &str, colour: usize) -> PlaceId {
        self.places.push(Place {
            name: name.to_string(),
            colour,
        });
        PlaceId(self.places.len() as u32 - 1)
    }

    pub fn transition(&mut self, name: &str, kind: TransKind) -> TransId {
        self.transitions.push(Transition {
            name: name.to_string(),
            kind,
        });
        TransId(self.transitions.len() as u32 - 1)
    }

    /// Adds an arc between the nodes named `from` and `to`. On input arcs
    /// `label` names the variable the consumed token binds to.
    pub fn arc(&mut self, from: &str, to: &str, label: &str) {
        self.arcs.push((
            from.to_string(),
            to.to_string(),
            ArcKind::Normal,
            1,
            label.to_string(),
        ));
    }

    pub fn weighted_arc(&mut self, from: &str, to: &str, label: &str, weight: u32) {
        self.arcs.push((
            from.to_string(),
            to.to_string(),
            ArcKind::Normal,
            weight,
            label.to_string(),
        ));
    }

    pub fn inhibitor(&mut self, from: &str, to: &str) {
        self.weighted_inhibitor(from, to, 1);
    }

    /// Inhibitor arc blocking `to` while the place holds at least `weight`
    /// tokens.
    pub fn weighted_inhibitor(&mut self, from: &str, to: &str, weight: u32) {
        self.arcs.push((
            from.to_string(),
            to.to_string(),
            ArcKind::Inhibitor,
            weight,
            String::new(),
        ));
    }

    pub fn rule<R: RuleFn + 'static>(&mut self, trans: TransId, rule: R) {
        self.rules.insert(trans.0, Arc::new(rule));
    }

    pub fn rule_arc(&mut self, trans: TransId, rule: Arc<dyn RuleFn>) {
        self.rules.insert(trans.0, rule);
    }

    pub fn init(&mut self, place: PlaceId, value: Value, count: u64) {
        self.init.push((place, value, count));
    }

    pub fn build(self) -> Result<Net, BuildError> {
        let NetBuilder {
            name,
            colours,
            places,
            transitions,
            arcs: raw_arcs,
            rules,
            init,
        } = self;

        check_unique(colours.iter().map(|c| c.name.as_str()), "colour set")?;
        check_unique(
            places
                .iter()
                .map(|p| p.name.as_str())
                .chain(transitions.iter().map(|t| t.name.as_str())),
            "node",
        )?;

        let place_idx = |n: &str| places.iter().position(|p| p.name == n);
        let trans_idx = |n: &str| transitions.iter().position(|t| t.name == n);

        let mut arcs = Vec::new();
        for (from, to, kind, weight, label) in raw_arcs {
            if weight == 0 {
                return Err(BuildError::ZeroWeight { from, to });
            }
            let arc = match (place_idx(&from), trans_idx(&to)) {
                (Some(p), Some(t)) => NetArc {
                    place: PlaceId(p as u32),
                    trans: TransId(t as u32),
                    into_transition: true,
                    kind,
                    weight,
                    label,
                },
                _ => match (trans_idx(&from), place_idx(&to)) {
                    (Some(t), Some(p)) => {
                        if kind == ArcKind::Inhibitor {
                            return Err(BuildError::InhibitorDirection { from, to });
                        }
                        NetArc {
                            place: PlaceId(p as u32),
                            trans: TransId(t as u32),
                            into_transition: false,
                            kind,
                            weight,
                            label,
                        }
                    }
                    _ => {
                        if place_idx(&from).is_none() && trans_idx(&from).is_none() {
                            return Err(BuildError::DanglingArc { name: from });
                        }
                        if place_idx(&to).is_none() && trans_idx(&to).is_none() {
                            return Err(BuildError::DanglingArc { name: to });
                        }
                        return Err(BuildError::NotBipartite { from, to });
                    }
                },
            };
            arcs.push(arc);
        }

        let mut inputs_of = vec![Vec::new(); transitions.len()];
        let mut outputs_of = vec![Vec::new(); transitions.len()];
        let mut inhibitors_of = vec![Vec::new(); transitions.len()];
        for (i, arc) in arcs.iter().enumerate() {
            let t = arc.trans.0 as usize;
            match (arc.into_transition, arc.kind) {
                (true, ArcKind::Normal) => inputs_of[t].push(i),
                (true, ArcKind::Inhibitor) => inhibitors_of[t].push(i),
                (false, _) => outputs_of[t].push(i),
            }
        }

        for (i, trans) in transitions.iter().enumerate() {
            let has_inputs = !inputs_of[i].is_empty();
            match trans.kind {
                TransKind::Normal if !has_inputs => {
                    return Err(BuildError::SourcelessTransition {
                        name: trans.name.clone(),
                    })
                }
                TransKind::Source { .. } if has_inputs => {
                    return Err(BuildError::InputsOnSource {
                        name: trans.name.clone(),
                    })
                }
                TransKind::Source { budget: 0 } => {
                    return Err(BuildError::ZeroBudget {
                        name: trans.name.clone(),
                    })
                }
                _ => {}
            }
            if !rules.contains_key(&(i as u32)) {
                return Err(BuildError::MissingRule {
                    name: trans.name.clone(),
                });
            }
        }

        let mut bags = vec![Bag::new(); places.len()];
        for (place, value, count) in init {
            let p = &places[place.0 as usize];
            if !conforms(&colours, p.colour, &value) {
                return Err(BuildError::TypeMismatch {
                    place: p.name.clone(),
                    value: value.to_string(),
                });
            }
            bags[place.0 as usize].insert(value, count);
        }
        let budgets = transitions
            .iter()
            .map(|t| match t.kind {
                TransKind::Normal => 0,
                TransKind::Source { budget } => budget,
            })
            .collect();

        let rules = (0..transitions.len() as u32)
            .map(|i| rules.get(&i).cloned().expect("checked above"))
            .collect();

        Ok(Net {
            name,
            colours,
            places,
            transitions,
            arcs,
            rules,
            m0: Marking { bags, budgets },
            inputs_of,
            outputs_of,
            inhibitors_of,
        })
    }
}

fn check_unique<'a>(
    names: impl Iterator<Item = &'a str>,
    kind: &'static str,
) -> Result<(), BuildError> {
    let mut seen = std::collections::BTreeSet::new();
    for name in names {
        if !seen.insert(name) {
            return Err(BuildError::DuplicateName {
                kind,
                name: name.to_string(),
            });
        }
    }
    Ok(())
}

/// Enumerates every enabled transition binding under `marking`, in
/// deterministic order. A rule `Reject` filters the binding; a rule `Fail`
/// aborts enumeration with an error.
pub fn enabled_transitions(net: &Net, marking: &Marking) -> Result<Vec<Enabled>, ExecError> {
    net.check_marking_shape(marking)?;
    let mut out = Vec::new();
    for (i, trans) in net.transitions.iter().enumerate() {
        let t = TransId(i as u32);
        if net
            .inhibitor_arcs(t)
            .any(|a| marking.bag(a.place).size() >= a.weight as u64)
        {
            continue;
        }
        match trans.kind {
            TransKind::Source { budget } => {
                if marking.budget(t) == 0 {
                    continue;
                }
                let binding = Binding {
                    vars: BTreeMap::new(),
                    consumed: Vec::new(),
                    source_index: Some(budget - marking.budget(t)),
                };
                match net.rule(t).apply(&binding) {
                    Ok(_) => out.push(Enabled { trans: t, binding }),
                    Err(RuleError::Reject) => {}
                    Err(RuleError::Fail(msg)) => {
                        return Err(ExecError::RuleFailed {
                            name: trans.name.clone(),
                            msg,
                        })
                    }
                }
            }
            TransKind::Normal => {
                enumerate_bindings(net, marking, t, &mut out)?;
            }
        }
    }
    Ok(out)
}

fn enumerate_bindings(
    net: &Net,
    marking: &Marking,
    t: TransId,
    out: &mut Vec<Enabled>,
) -> Result<(), ExecError> {
    let arcs: Vec<&NetArc> = net.input_arcs(t).collect();
    let mut vars: BTreeMap<String, Value> = BTreeMap::new();
    let mut consumed: Vec<(PlaceId, Value)> = Vec::new();
    let mut demand: BTreeMap<(PlaceId, Value), u64> = BTreeMap::new();

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        net: &Net,
        marking: &Marking,
        t: TransId,
        arcs: &[&NetArc],
        depth: usize,
        vars: &mut BTreeMap<String, Value>,
        consumed: &mut Vec<(PlaceId, Value)>,
        demand: &mut BTreeMap<(PlaceId, Value), u64>,
        out: &mut Vec<Enabled>,
    ) -> Result<(), ExecError> {
        if depth == arcs.len() {
            let binding = Binding {
                vars: vars.clone(),
                consumed: consumed.clone(),
                source_index: None,
            };
            match net.rule(t).apply(&binding) {
                Ok(_) => out.push(Enabled { trans: t, binding }),
                Err(RuleError::Reject) => {}
                Err(RuleError::Fail(msg)) => {
                    return Err(ExecError::RuleFailed {
                        name: net.trans_name(t).to_string(),
                        msg,
                    })
                }
            }
            return Ok(());
        }
        let arc = arcs[depth];
        let bag = marking.bag(arc.place);
        let candidates: Vec<Value> = match vars.get(&arc.label) {
            Some(bound) => vec![bound.clone()],
            None => bag.values().cloned().collect(),
        };
        for value in candidates {
            let key = (arc.place, value.clone());
            let needed = demand.get(&key).copied().unwrap_or(0) + arc.weight as u64;
            if bag.count(&value) < needed {
                continue;
            }
            let fresh = !vars.contains_key(&arc.label);
            if fresh {
                vars.insert(arc.label.clone(), value.clone());
            }
            *demand.entry(key.clone()).or_insert(0) += arc.weight as u64;
            for _ in 0..arc.weight {
                consumed.push((arc.place, value.clone()));
            }
            recurse(net, marking, t, arcs, depth + 1, vars, consumed, demand, out)?;
            for _ in 0..arc.weight {
                consumed.pop();
            }
            *demand.get_mut(&key).unwrap() -= arc.weight as u64;
            if fresh {
                vars.remove(&arc.label);
            }
        }
        Ok(())
    }

    recurse(
        net, marking, t, &arcs, 0, &mut vars, &mut consumed, &mut demand, out,
    )
}

/// Fires `enabled` under `marking`, returning the successor marking. The
/// enabling conditions are re-checked, so a stale `Enabled` produced from a
/// different marking fails with `NotEnabled` rather than corrupting state.
pub fn fire(net: &Net, marking: &Marking, enabled: &Enabled) -> Result<Marking, ExecError> {
    net.check_marking_shape(marking)?;
    let t = enabled.trans;
    let trans = net
        .transitions
        .get(t.0 as usize)
        .ok_or(ExecError::UnknownTransition(t.0))?;
    let not_enabled = |reason: &str| ExecError::NotEnabled {
        name: trans.name.clone(),
        reason: reason.to_string(),
    };

    if net
        .inhibitor_arcs(t)
        .any(|a| marking.bag(a.place).size() >= a.weight as u64)
    {
        return Err(not_enabled("an inhibitor place is marked"));
    }

    let mut next = marking.clone();
    match trans.kind {
        TransKind::Source { .. } => {
            if marking.budget(t) == 0 {
                return Err(not_enabled("source budget exhausted"));
            }
            if !enabled.binding.consumed.is_empty() {
                return Err(not_enabled("source bindings consume no tokens"));
            }
            next.budgets[t.0 as usize] -= 1;
        }
        TransKind::Normal => {
            let expected: usize = net.input_arcs(t).map(|a| a.weight as usize).sum();
            if enabled.binding.consumed.len() != expected {
                return Err(not_enabled("binding does not cover the input arcs"));
            }
            let mut slot = 0;
            for arc in net.input_arcs(t) {
                for _ in 0..arc.weight {
                    let (place, value) = &enabled.binding.consumed[slot];
                    slot += 1;
                    if *place != arc.place {
                        return Err(not_enabled("binding places disagree with the input arcs"));
                    }
                    if next.bag_mut(*place).remove(value, 1).is_err() {
                        return Err(not_enabled("a bound token is no longer available"));
                    }
                }
            }
        }
    }

    let outputs = match net.rule(t).apply(&enabled.binding) {
        Ok(outputs) => outputs,
        Err(RuleError::Reject) => return Err(not_enabled("rule rejects the binding")),
        Err(RuleError::Fail(msg)) => {
            return Err(ExecError::RuleFailed {
                name: trans.name.clone(),
                msg,
            })
        }
    };

    let output_places: Vec<PlaceId> = net.output_arcs(t).map(|a| a.place).collect();
    for (place, value) in outputs {
        if !output_places.contains(&place) {
            return Err(ExecError::UnknownOutputPlace {
                name: trans.name.clone(),
                place: net
                    .places
                    .get(place.0 as usize)
                    .map(|p| p.name.clone())
                    .unwrap_or_else(|| format!("#{}", place.0)),
            });
        }
        let colour = net.places[place.0 as usize].colour;
        if !conforms(&net.colours, colour, &value) {
            return Err(ExecError::OutputTypeMismatch {
                name: trans.name.clone(),
                place: net.place_name(place).to_string(),
                value: value.to_string(),
            });
        }
        next.bag_mut(place).insert(value, 1);
    }

    Ok(next)
}
