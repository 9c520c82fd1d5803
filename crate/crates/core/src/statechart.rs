//! Extended state diagrams and their transformation into CSMs.
//!
//! Each statechart state stays a CSM state. Because CSM outputs belong to
//! states, every edge that emits actions gets an inserted action state.
//! Messages exchanged between modeled components follow an acknowledgment
//! handshake: a received message event is answered by a one-step state
//! emitting `ACK<event>`, and a sent message action is held until
//! `ACK<action>` comes back. Environment events, conditions and external
//! actions take part in no handshake.

use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::formula::{conjoin, disjoin, negate, Formula, Symbol, SymbolSet};
use crate::model::{Csm, CsmState, CsmTransition};
use crate::report::{Issue, Report};

/// Name of the acknowledgment symbol for a message.
pub fn ack_symbol(message: &Symbol) -> Symbol {
    Symbol::new(format!("ACK{message}"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trigger {
    /// `on event`
    Event(Symbol),
    /// `if condition`
    Condition(Formula),
    /// `on event if condition`: the event fires the edge only while the condition holds.
    EventIf(Symbol, Formula),
}

impl Trigger {
    pub fn event(&self) -> Option<&Symbol> {
        match self {
            Trigger::Event(e) | Trigger::EventIf(e, _) => Some(e),
            Trigger::Condition(_) => None,
        }
    }

    pub fn condition(&self) -> Option<&Formula> {
        match self {
            Trigger::Condition(c) | Trigger::EventIf(_, c) => Some(c),
            Trigger::Event(_) => None,
        }
    }

    /// CSM guard for leaving the source state along this edge.
    pub fn guard(&self) -> Formula {
        match self {
            Trigger::Event(e) => Formula::Atom(e.clone()),
            Trigger::Condition(c) => c.clone(),
            Trigger::EventIf(e, c) => conjoin([Formula::Atom(e.clone()), c.clone()]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StTransition {
    pub from: String,
    pub to: String,
    pub trigger: Trigger,
    pub actions: Vec<Symbol>,
    /// Optional names for the inserted states of this edge, acknowledgment state first.
    pub inserted_names: Vec<String>,
}

impl StTransition {
    pub fn new(
        from: impl Into<String>,
        to: impl Into<String>,
        trigger: Trigger,
        actions: Vec<Symbol>,
    ) -> Self {
        StTransition {
            from: from.into(),
            to: to.into(),
            trigger,
            actions,
            inserted_names: Vec::new(),
        }
    }

    pub fn named(mut self, names: &[&str]) -> Self {
        self.inserted_names = names.iter().map(|s| s.to_string()).collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statechart {
    pub name: String,
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<StTransition>,
}

/// Classification of every trigger and action symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageDecl {
    /// Events passed between modeled components; these are acknowledged.
    pub messages: SymbolSet,
    pub environment_events: SymbolSet,
    pub conditions: SymbolSet,
    /// Actions that leave the modeled system.
    pub external_actions: SymbolSet,
}

impl MessageDecl {
    fn sets(&self) -> [(&'static str, &SymbolSet); 4] {
        [
            ("message", &self.messages),
            ("environment event", &self.environment_events),
            ("condition", &self.conditions),
            ("external action", &self.external_actions),
        ]
    }

    fn classify(&self, s: &Symbol) -> Option<&'static str> {
        self.sets()
            .into_iter()
            .find(|(_, set)| set.contains(s))
            .map(|(k, _)| k)
    }

    fn requires_ack(&self, s: &Symbol) -> bool {
        self.messages.contains(s)
    }
}

/// Planned CSM shape of one statechart edge.
struct EdgePlan {
    ack_state: Option<String>,
    action_state: Option<String>,
}

impl Statechart {
    pub fn validate(&self, decl: &MessageDecl) -> Report {
        let mut report = Report::default();
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                report.error(Issue::DuplicateState { state: s.clone() });
            }
        }
        if self.initial.is_empty() {
            report.error(Issue::MissingInitial);
        } else if !seen.contains(self.initial.as_str()) {
            report.error(Issue::UnknownInitial {
                state: self.initial.clone(),
            });
        }

        let all: Vec<(&str, &SymbolSet)> = decl.sets().into();
        for (i, (_, a)) in all.iter().enumerate() {
            for (_, b) in &all[i + 1..] {
                for s in a.intersection(b) {
                    report.error(Issue::MultiplyClassified {
                        symbol: s.to_string(),
                    });
                }
            }
        }

        let check = |report: &mut Report, s: &Symbol, allowed: &[&str], role: &str| match decl
            .classify(s)
        {
            None => {
                let issue = Issue::Unclassified {
                    symbol: s.to_string(),
                };
                if !report.errors.contains(&issue) {
                    report.error(issue);
                }
            }
            Some(kind) if !allowed.contains(&kind) => report.error(Issue::Misclassified {
                symbol: s.to_string(),
                role: role.to_string(),
            }),
            Some(_) => {}
        };
        for t in &self.transitions {
            if !seen.contains(t.from.as_str()) || !seen.contains(t.to.as_str()) {
                report.error(Issue::DanglingEndpoint {
                    from: t.from.clone(),
                    to: t.to.clone(),
                });
            }
            if let Some(e) = t.trigger.event() {
                check(
                    &mut report,
                    e,
                    &["message", "environment event"],
                    "an event",
                );
            }
            if let Some(c) = t.trigger.condition() {
                for atom in c.atoms() {
                    check(&mut report, &atom, &["condition"], "a condition");
                }
            }
            for a in &t.actions {
                check(&mut report, a, &["message", "external action"], "an action");
            }
            match t.trigger.guard().is_satisfiable() {
                Ok(true) => {}
                Ok(false) => report.error(Issue::UnsatisfiableGuard {
                    from: t.from.clone(),
                    to: t.to.clone(),
                }),
                Err(_) => report.error(Issue::GuardTooWide {
                    from: t.from.clone(),
                    to: t.to.clone(),
                    atoms: t.trigger.guard().atoms().len(),
                }),
            }
        }
        if !report.is_valid() {
            return report;
        }

        // inserted state names must be fresh identifiers
        let mut names: BTreeSet<String> = self.states.iter().cloned().collect();
        for t in &self.transitions {
            let needed = usize::from(t.trigger.event().is_some_and(|e| decl.requires_ack(e)))
                + usize::from(!t.actions.is_empty());
            if t.inserted_names.len() > needed {
                report.error(Issue::InvalidName {
                    name: t.inserted_names[needed..].join(","),
                });
            }
            for n in &t.inserted_names {
                if !crate::formula::is_identifier(n) || !names.insert(n.clone()) {
                    report.error(Issue::InvalidName { name: n.clone() });
                }
            }
        }

        let mut reached = BTreeSet::from([self.initial.as_str()]);
        let mut queue = VecDeque::from([self.initial.as_str()]);
        while let Some(s) = queue.pop_front() {
            for t in self.transitions.iter().filter(|t| t.from == s) {
                if reached.insert(t.to.as_str()) {
                    queue.push_back(t.to.as_str());
                }
            }
        }
        for s in &self.states {
            if !reached.contains(s.as_str()) {
                report.warn(Issue::Unreachable { state: s.clone() });
            }
        }
        report
    }

    fn plan(&self, decl: &MessageDecl) -> Vec<EdgePlan> {
        let mut taken: BTreeSet<String> = self.states.iter().cloned().collect();
        taken.extend(
            self.transitions
                .iter()
                .flat_map(|t| t.inserted_names.iter().cloned()),
        );
        let mut fresh = |base: String| {
            let mut name = base.clone();
            let mut n = 2;
            while taken.contains(&name) {
                name = format!("{base}{n}");
                n += 1;
            }
            taken.insert(name.clone());
            name
        };
        self.transitions
            .iter()
            .map(|t| {
                let mut given = t.inserted_names.iter().cloned();
                let ack_state = t.trigger.event().filter(|e| decl.requires_ack(e)).map(|e| {
                    given
                        .next()
                        .unwrap_or_else(|| fresh(format!("{}__ack_{}", t.from, e)))
                });
                let action_state = (!t.actions.is_empty()).then(|| {
                    given
                        .next()
                        .unwrap_or_else(|| fresh(format!("{}__{}__act", t.from, t.to)))
                });
                EdgePlan {
                    ack_state,
                    action_state,
                }
            })
            .collect()
    }

    /// Transforms this statechart into a CSM with the acknowledgment handshake.
    pub fn to_csm(&self, decl: &MessageDecl) -> Result<Csm> {
        let report = self.validate(decl);
        if !report.is_valid() {
            return Err(Error::Invalid {
                entity: self.name.clone(),
                report,
            });
        }
        let plans = self.plan(decl);
        let mut m = Csm::new(&self.name);
        m.initial = self.initial.clone();
        m.states = self.states.iter().map(CsmState::new).collect();

        for t in &self.transitions {
            if let Some(e) = t.trigger.event() {
                m.inputs.insert(e.clone());
                if decl.requires_ack(e) {
                    m.outputs.insert(ack_symbol(e));
                }
            }
            if let Some(c) = t.trigger.condition() {
                m.inputs.extend(c.atoms());
            }
            for a in &t.actions {
                m.outputs.insert(a.clone());
                if decl.requires_ack(a) {
                    m.inputs.insert(ack_symbol(a));
                }
            }
        }

        // edges leaving source states, each state followed by its stay loop
        for s in &self.states {
            let mut guards = Vec::new();
            for (t, plan) in self
                .transitions
                .iter()
                .zip(&plans)
                .filter(|(t, _)| &t.from == s)
            {
                let first = plan
                    .ack_state
                    .as_ref()
                    .or(plan.action_state.as_ref())
                    .unwrap_or(&t.to);
                let g = t.trigger.guard();
                guards.push(g.clone());
                m.transitions.push(CsmTransition::new(s, g, first));
            }
            let stay = negate(disjoin(guards));
            if stay.is_satisfiable()? {
                m.transitions.push(CsmTransition::new(s, stay, s));
            }
        }

        // inserted chains
        for (t, plan) in self.transitions.iter().zip(&plans) {
            if let Some(ack) = &plan.ack_state {
                let e = t.trigger.event().expect("ack states follow event triggers");
                m.states.push(CsmState::with_outputs(
                    ack,
                    SymbolSet::from([ack_symbol(e)]),
                ));
                let next = plan.action_state.as_ref().unwrap_or(&t.to);
                m.transitions
                    .push(CsmTransition::new(ack, Formula::True, next));
            }
            if let Some(act) = &plan.action_state {
                m.states.push(CsmState::with_outputs(
                    act,
                    t.actions.iter().cloned().collect(),
                ));
                let release = conjoin(
                    t.actions
                        .iter()
                        .filter(|a| decl.requires_ack(a))
                        .map(|a| Formula::Atom(ack_symbol(a))),
                );
                m.transitions
                    .push(CsmTransition::new(act, release.clone(), &t.to));
                if !release.is_const_true() {
                    m.transitions
                        .push(CsmTransition::new(act, negate(release), act));
                }
            }
        }
        Ok(m)
    }
}

pub fn validate_statechart(s: &Statechart, d: &MessageDecl) -> Report {
    s.validate(d)
}

pub fn to_csm(s: &Statechart, d: &MessageDecl) -> Result<Csm> {
    s.to_csm(d)
}
