//! Line-oriented model text format.
//!
//! ```text
//! csm-model 1
//!
//! csm M1
//!   input start, end
//!   output go
//!   state wait
//!   state run / go
//!   init wait
//!   trans wait -> run : start
//!   trans wait -> wait : !start
//!   trans run -> wait : end
//!   trans run -> run : !end
//! end
//! ```
//!
//! Statechart edges read `trans <from> -> <to> : on <event> [if <formula>]`
//! or `: if <formula>`, followed by optional `/ act1, act2` and an optional
//! `as Name1[, Name2]` naming the inserted states. Other sections are
//! `messages`, `system <name>` and `accepting`. `#` starts a comment.

use std::fmt::Write as _;

use crate::analyze::StatePattern;
use crate::compose::SystemModel;
use crate::error::{Error, FormatError, Result};
use crate::formula::{is_identifier, parse_formula, Symbol, SymbolSet};
use crate::model::{Csm, CsmState, CsmTransition};
use crate::statechart::{MessageDecl, StTransition, Statechart, Trigger};

pub const FORMAT_TAG: &str = "csm-model";
pub const FORMAT_VERSION: u32 = 1;

/// Member list of a `system` section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDecl {
    pub name: String,
    pub members: Vec<String>,
    pub internal: Option<SymbolSet>,
    pub environment: Option<SymbolSet>,
}

/// Entities declared by one model file, in declaration order per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelFile {
    pub csms: Vec<Csm>,
    pub statecharts: Vec<Statechart>,
    pub messages: Option<MessageDecl>,
    pub systems: Vec<SystemDecl>,
    pub accepting: Vec<StatePattern>,
}

impl ModelFile {
    pub fn csm(&self, name: &str) -> Option<&Csm> {
        self.csms.iter().find(|m| m.name == name)
    }

    pub fn statechart(&self, name: &str) -> Option<&Statechart> {
        self.statecharts.iter().find(|s| s.name == name)
    }

    pub fn message_decl(&self) -> MessageDecl {
        self.messages.clone().unwrap_or_default()
    }

    /// The named CSM, or the named statechart transformed with the file's messages.
    pub fn machine(&self, name: &str) -> Result<Csm> {
        if let Some(m) = self.csm(name) {
            return Ok(m.clone());
        }
        if let Some(s) = self.statechart(name) {
            return s.to_csm(&self.message_decl());
        }
        Err(Error::UnknownEntity(name.to_string()))
    }

    /// Builds the named system, or the only one declared. A file without
    /// `system` sections that declares a single machine yields a one-machine system.
    pub fn system(&self, name: Option<&str>) -> Result<SystemModel> {
        let decl = match name {
            Some(n) => self
                .systems
                .iter()
                .find(|s| s.name == n)
                .ok_or_else(|| Error::UnknownEntity(n.to_string()))?
                .clone(),
            None => match self.systems.as_slice() {
                [only] => only.clone(),
                [] => {
                    let mut names: Vec<String> = self.csms.iter().map(|m| m.name.clone()).collect();
                    names.extend(self.statecharts.iter().map(|s| s.name.clone()));
                    if names.len() != 1 {
                        return Err(Error::UnknownEntity(
                            "no system section and more than one machine".into(),
                        ));
                    }
                    SystemDecl {
                        name: names[0].clone(),
                        members: names,
                        internal: None,
                        environment: None,
                    }
                }
                _ => {
                    return Err(Error::UnknownEntity(
                        "several systems declared; pick one".into(),
                    ))
                }
            },
        };
        let machines = decl
            .members
            .iter()
            .map(|m| self.machine(m))
            .collect::<Result<Vec<_>>>()?;
        let mut sys = SystemModel::with_classification(
            &decl.name,
            machines,
            decl.internal,
            decl.environment,
        )?;
        sys.accepting = self.accepting.clone();
        Ok(sys)
    }
}

enum Section {
    Csm(Csm),
    Statechart(Statechart),
    Messages(MessageDecl),
    System(SystemDecl),
    Accepting,
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a).trim()
}

fn ident(line: usize, s: &str) -> Result<String, FormatError> {
    let s = s.trim();
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        Err(FormatError::new(line, format!("invalid name `{s}`")))
    }
}

fn symbol_list(line: usize, s: &str) -> Result<Vec<Symbol>, FormatError> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| ident(line, p).map(Symbol::from))
        .collect()
}

/// Splits `<from> -> <to> : <rest>`.
fn split_edge(line: usize, s: &str) -> Result<(String, String, String), FormatError> {
    let (ends, rest) = s
        .split_once(':')
        .ok_or_else(|| FormatError::new(line, "expected `:` after transition endpoints"))?;
    let (from, to) = ends
        .split_once("->")
        .ok_or_else(|| FormatError::new(line, "expected `<from> -> <to>`"))?;
    Ok((
        ident(line, from)?,
        ident(line, to)?,
        rest.trim().to_string(),
    ))
}

fn formula(line: usize, s: &str) -> Result<crate::formula::Formula, FormatError> {
    parse_formula(s).map_err(|e| FormatError::new(line, format!("guard `{}`: {e}", s.trim())))
}

fn parse_st_edge(line: usize, s: &str) -> Result<StTransition, FormatError> {
    let (from, to, rest) = split_edge(line, s)?;
    let words: Vec<&str> = rest.split_whitespace().collect();
    let (body, names) = match words.iter().rposition(|w| *w == "as") {
        Some(k) => (
            words[..k].join(" "),
            symbol_list(line, &words[k + 1..].join(" "))?,
        ),
        None => (rest.clone(), Vec::new()),
    };
    if words.last() == Some(&"as") {
        return Err(FormatError::new(line, "expected state names after `as`"));
    }
    let (trigger_text, actions) = match body.split_once('/') {
        Some((t, a)) => (t.trim().to_string(), symbol_list(line, a)?),
        None => (body.trim().to_string(), Vec::new()),
    };
    let trigger = if let Some(rest) = trigger_text.strip_prefix("on ") {
        let rest = rest.trim();
        match rest.split_once(" if ") {
            Some((e, c)) => Trigger::EventIf(ident(line, e)?.into(), formula(line, c)?),
            None => Trigger::Event(ident(line, rest)?.into()),
        }
    } else if let Some(c) = trigger_text.strip_prefix("if ") {
        Trigger::Condition(formula(line, c)?)
    } else {
        return Err(FormatError::new(
            line,
            "expected `on <event>` or `if <condition>`",
        ));
    };
    Ok(StTransition {
        from,
        to,
        trigger,
        actions,
        inserted_names: names.into_iter().map(|s| s.to_string()).collect(),
    })
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let mut file = ModelFile::default();
    let mut header_seen = false;
    let mut current: Option<(usize, Section)> = None;
    let mut names: Vec<String> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(FORMAT_TAG), Some(v), None) if v == FORMAT_VERSION.to_string() => {
                    header_seen = true;
                    continue;
                }
                (Some(FORMAT_TAG), _, _) => {
                    return Err(FormatError::new(
                        n,
                        format!(
                            "unsupported format version, expected `{FORMAT_TAG} {FORMAT_VERSION}`"
                        ),
                    )
                    .into())
                }
                _ => {
                    return Err(FormatError::new(
                        n,
                        format!("expected header `{FORMAT_TAG} {FORMAT_VERSION}`"),
                    )
                    .into())
                }
            }
        }
        let (keyword, rest) = match line.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (line, ""),
        };

        let Some((_, section)) = current.as_mut() else {
            let section = match keyword {
                "csm" | "statechart" | "system" => {
                    let name = ident(n, rest)?;
                    if keyword != "system" {
                        if names.contains(&name) {
                            return Err(
                                FormatError::new(n, format!("duplicate machine `{name}`")).into()
                            );
                        }
                        names.push(name.clone());
                    }
                    match keyword {
                        "csm" => Section::Csm(Csm::new(name)),
                        "statechart" => Section::Statechart(Statechart {
                            name,
                            states: Vec::new(),
                            initial: String::new(),
                            transitions: Vec::new(),
                        }),
                        _ => {
                            if file.systems.iter().any(|s| s.name == name) {
                                return Err(FormatError::new(
                                    n,
                                    format!("duplicate system `{name}`"),
                                )
                                .into());
                            }
                            Section::System(SystemDecl {
                                name,
                                members: Vec::new(),
                                internal: None,
                                environment: None,
                            })
                        }
                    }
                }
                "messages" | "accepting" if rest.is_empty() => {
                    if keyword == "messages" {
                        if file.messages.is_some() {
                            return Err(FormatError::new(n, "duplicate `messages` section").into());
                        }
                        Section::Messages(MessageDecl::default())
                    } else {
                        Section::Accepting
                    }
                }
                _ => return Err(FormatError::new(n, format!("unknown section `{keyword}`")).into()),
            };
            current = Some((n, section));
            continue;
        };

        if line == "end" {
            let (start, section) = current.take().unwrap();
            match section {
                Section::Csm(m) => file.csms.push(m),
                Section::Statechart(s) => file.statecharts.push(s),
                Section::Messages(d) => file.messages = Some(d),
                Section::System(s) => {
                    if s.members.is_empty() {
                        return Err(FormatError::new(
                            start,
                            format!("system `{}` lists no machines", s.name),
                        )
                        .into());
                    }
                    file.systems.push(s)
                }
                Section::Accepting => {}
            }
            continue;
        }
        match section {
            Section::Csm(m) => match keyword {
                "input" => m.inputs.extend(symbol_list(n, rest)?),
                "output" => m.outputs.extend(symbol_list(n, rest)?),
                "state" => {
                    let (name, outs) = match rest.split_once('/') {
                        Some((a, b)) => (ident(n, a)?, symbol_list(n, b)?),
                        None => (ident(n, rest)?, Vec::new()),
                    };
                    if m.state_index(&name).is_some() {
                        return Err(FormatError::new(n, format!("duplicate state `{name}`")).into());
                    }
                    m.states
                        .push(CsmState::with_outputs(name, outs.into_iter().collect()));
                }
                "init" => set_initial(n, &mut m.initial, rest)?,
                "trans" => {
                    let (from, to, guard) = split_edge(n, rest)?;
                    let guard = formula(n, &guard)?;
                    if guard.is_const_false() {
                        return Err(
                            FormatError::new(n, "transition guarded by 0 is never taken").into(),
                        );
                    }
                    m.transitions.push(CsmTransition::new(from, guard, to));
                }
                _ => {
                    return Err(FormatError::new(
                        n,
                        format!("unexpected `{keyword}` in csm section"),
                    )
                    .into())
                }
            },
            Section::Statechart(s) => match keyword {
                "state" => {
                    let name = ident(n, rest)?;
                    if s.states.contains(&name) {
                        return Err(FormatError::new(n, format!("duplicate state `{name}`")).into());
                    }
                    s.states.push(name);
                }
                "init" => set_initial(n, &mut s.initial, rest)?,
                "trans" => s.transitions.push(parse_st_edge(n, rest)?),
                _ => {
                    return Err(FormatError::new(
                        n,
                        format!("unexpected `{keyword}` in statechart section"),
                    )
                    .into())
                }
            },
            Section::Messages(d) => {
                let set = match keyword {
                    "message" => &mut d.messages,
                    "environment" => &mut d.environment_events,
                    "condition" => &mut d.conditions,
                    "external" => &mut d.external_actions,
                    _ => {
                        return Err(FormatError::new(
                            n,
                            format!("unexpected `{keyword}` in messages section"),
                        )
                        .into())
                    }
                };
                set.extend(symbol_list(n, rest)?);
            }
            Section::System(s) => match keyword {
                "machines" => s
                    .members
                    .extend(symbol_list(n, rest)?.into_iter().map(|m| m.to_string())),
                "internal:" => s
                    .internal
                    .get_or_insert_with(SymbolSet::new)
                    .extend(symbol_list(n, rest)?),
                "environment:" => s
                    .environment
                    .get_or_insert_with(SymbolSet::new)
                    .extend(symbol_list(n, rest)?),
                _ => {
                    return Err(FormatError::new(
                        n,
                        format!("unexpected `{keyword}` in system section"),
                    )
                    .into())
                }
            },
            Section::Accepting => {
                for p in line.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    file.accepting
                        .push(StatePattern::new(p).map_err(|_| {
                            FormatError::new(n, format!("malformed pattern `{p}`"))
                        })?);
                }
            }
        }
    }

    if let Some((start, _)) = current {
        return Err(FormatError::new(start, "section is not closed with `end`").into());
    }
    if file.csms.is_empty()
        && file.statecharts.is_empty()
        && file.systems.is_empty()
        && file.messages.is_none()
        && file.accepting.is_empty()
    {
        return Err(FormatError::new(1, "no entities").into());
    }
    for s in &file.systems {
        for m in &s.members {
            if !names.contains(m) {
                return Err(Error::UnknownEntity(format!(
                    "system `{}` references unknown machine `{m}`",
                    s.name
                )));
            }
        }
    }
    Ok(file)
}

fn set_initial(line: usize, slot: &mut String, rest: &str) -> Result<(), FormatError> {
    if !slot.is_empty() {
        return Err(FormatError::new(line, "initial state declared twice"));
    }
    *slot = ident(line, rest)?;
    Ok(())
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_csm(m: &Csm) -> String {
    let mut out = String::new();
    writeln!(out, "csm {}", m.name).unwrap();
    writeln!(out, "  input {}", join(&m.inputs)).unwrap();
    writeln!(out, "  output {}", join(&m.outputs)).unwrap();
    for s in &m.states {
        if s.outputs.is_empty() {
            writeln!(out, "  state {}", s.name).unwrap();
        } else {
            writeln!(out, "  state {} / {}", s.name, join(&s.outputs)).unwrap();
        }
    }
    if !m.initial.is_empty() {
        writeln!(out, "  init {}", m.initial).unwrap();
    }
    for t in &m.transitions {
        writeln!(out, "  trans {} -> {} : {}", t.from, t.to, t.guard).unwrap();
    }
    out.push_str("end\n");
    out
}

pub fn render_statechart(s: &Statechart) -> String {
    let mut out = String::new();
    writeln!(out, "statechart {}", s.name).unwrap();
    for st in &s.states {
        writeln!(out, "  state {st}").unwrap();
    }
    if !s.initial.is_empty() {
        writeln!(out, "  init {}", s.initial).unwrap();
    }
    for t in &s.transitions {
        let trigger = match &t.trigger {
            Trigger::Event(e) => format!("on {e}"),
            Trigger::Condition(c) => format!("if {c}"),
            Trigger::EventIf(e, c) => format!("on {e} if {c}"),
        };
        write!(out, "  trans {} -> {} : {trigger}", t.from, t.to).unwrap();
        if !t.actions.is_empty() {
            write!(out, " / {}", join(&t.actions)).unwrap();
        }
        if !t.inserted_names.is_empty() {
            write!(out, " as {}", join(&t.inserted_names)).unwrap();
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn render_messages(d: &MessageDecl) -> String {
    let mut out = String::from("messages\n");
    for (k, set) in [
        ("message", &d.messages),
        ("environment", &d.environment_events),
        ("condition", &d.conditions),
        ("external", &d.external_actions),
    ] {
        if !set.is_empty() {
            writeln!(out, "  {k} {}", join(set)).unwrap();
        }
    }
    out.push_str("end\n");
    out
}

pub fn render_system(s: &SystemDecl) -> String {
    let mut out = String::new();
    writeln!(out, "system {}", s.name).unwrap();
    writeln!(out, "  machines {}", join(&s.members)).unwrap();
    if let Some(i) = &s.internal {
        writeln!(out, "  internal: {}", join(i)).unwrap();
    }
    if let Some(e) = &s.environment {
        writeln!(out, "  environment: {}", join(e)).unwrap();
    }
    out.push_str("end\n");
    out
}

pub fn render_model(f: &ModelFile) -> String {
    let mut parts = vec![format!("{FORMAT_TAG} {FORMAT_VERSION}\n")];
    if let Some(d) = &f.messages {
        parts.push(render_messages(d));
    }
    parts.extend(f.statecharts.iter().map(render_statechart));
    parts.extend(f.csms.iter().map(render_csm));
    parts.extend(f.systems.iter().map(render_system));
    if !f.accepting.is_empty() {
        parts.push(format!(
            "accepting\n  {}\nend\n",
            join(f.accepting.iter().map(|p| p.as_str()))
        ));
    }
    parts.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::m1;

    const M1: &str = "\
csm-model 1
# starts on `start`, stops on `end`
csm M1
  input start, end
  output go
  state wait
  state run / go
  init wait
  trans wait -> run : start
  trans wait -> wait : !start
  trans run -> wait : end
  trans run -> run : !end
end
";

    #[test]
    fn parses_m1() {
        let f = parse_model(M1).unwrap();
        assert_eq!(f.csms, vec![m1()]);
        let sys = f.system(None).unwrap();
        assert_eq!(sys.machines.len(), 1);
    }

    #[test]
    fn rejects_false_guard() {
        let text = M1.replace("wait -> run : start", "wait -> run : 0");
        let err = parse_model(&text).unwrap_err();
        assert!(
            matches!(err, Error::Format(FormatError { line: 9, .. })),
            "{err}"
        );
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            parse_model(""),
            Err(Error::Format(FormatError { line: 1, .. }))
        ));
        assert!(parse_model("csm-model 1\n").is_err());
        assert!(parse_model("csm-model 2\ncsm A\nend\n").is_err());
        assert!(parse_model("csm A\nend\n").is_err());
        let unknown = parse_model("csm-model 1\nautomaton A\nend\n").unwrap_err();
        assert!(unknown.to_string().contains("unknown section"));
        assert!(parse_model("csm-model 1\ncsm A\n  state a\n").is_err());
        assert!(parse_model("csm-model 1\ncsm A\nend\ncsm A\nend\n").is_err());
        assert!(parse_model("csm-model 1\ncsm A\n  state a\n  state a\nend\n").is_err());
        assert!(parse_model("csm-model 1\ncsm A\n  trans a -> b : (x\nend\n").is_err());
        assert!(matches!(
            parse_model("csm-model 1\nsystem S\n  machines Nope\nend\n"),
            Err(Error::UnknownEntity(_))
        ));
    }

    #[test]
    fn statechart_edges() {
        let e = parse_st_edge(1, "a -> b : on x if c*!d / o1, o2 as Ack, Act").unwrap();
        assert_eq!(
            e.trigger,
            Trigger::EventIf("x".into(), parse_formula("c*!d").unwrap())
        );
        assert_eq!(e.actions, vec![Symbol::from("o1"), Symbol::from("o2")]);
        assert_eq!(e.inserted_names, vec!["Ack".to_string(), "Act".to_string()]);
        let e = parse_st_edge(1, "a -> b : on x as Ack").unwrap();
        assert_eq!(e.trigger, Trigger::Event("x".into()));
        assert!(e.actions.is_empty());
        let e = parse_st_edge(1, "a -> b : if !c + d").unwrap();
        assert_eq!(
            e.trigger,
            Trigger::Condition(parse_formula("!c+d").unwrap())
        );
        assert!(parse_st_edge(1, "a -> b : when x").is_err());
        assert!(parse_st_edge(1, "a -> b : on x as").is_err());
        assert!(parse_st_edge(1, "a b : on x").is_err());
    }

    #[test]
    fn render_round_trip() {
        let text = "\
csm-model 1
messages
  message Go
  environment Start
  condition ok
  external Show
end
statechart S
  state a
  state b
  init a
  trans a -> b : on Start / Go, Show as SendGo
  trans b -> a : if !ok
  trans b -> b : on Go if ok
end
csm M
  input x
  output y
  state p / y
  state q
  init p
  trans p -> q : x*(x+!x)
  trans p -> p : !x
  trans q -> q : 1
end
system Sys
  machines S, M
  environment: Start, ok, x
end
accepting
  b_*, *_q
end
";
        let f = parse_model(text).unwrap();
        let again = parse_model(&render_model(&f)).unwrap();
        assert_eq!(again, f);
        let sys = f.system(Some("Sys")).unwrap();
        assert_eq!(sys.machines[0].states.len(), 4);
        assert_eq!(sys.accepting.len(), 2);
        assert!(f.system(Some("Other")).is_err());
    }
}
