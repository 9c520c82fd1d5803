use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use csm_core::io::{
    export_dot, model_hash, parse_model, render_csm, report_json, report_text, trace_json,
    trace_text, GraphDocument, ModelFile, FORMAT_TAG, FORMAT_VERSION,
};
use csm_core::simulate::parse_env_sequence;
use csm_core::{
    classify_deadlocks, compose_with, diff_graphs, ComposeOptions, Policy, ReachabilityGraph,
    Report, Simulator, StatePattern, SystemModel,
};
use serde_json::json;

use crate::{Command, Common, Format, PolicyArg};

const DEFAULT_CAP: usize = 20;

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Check { files, opts } => check(&files, &opts),
        Command::Transform { file, names, opts } => transform(&file, &names, &opts),
        Command::Compose { file, opts } => {
            let format = pick(
                &opts,
                Format::Json,
                &[Format::Json, Format::Dot, Format::Text],
            )?;
            let text = read(&file)?;
            let sys = system(&text, &opts)?;
            let g = build(&sys, &opts)?;
            match format {
                Format::Json => print!(
                    "{}",
                    GraphDocument::from_graph(&g, Some(model_hash(&text))).to_json()
                ),
                Format::Dot => print!("{}", export_dot(&g, &BTreeSet::new())),
                Format::Text => print!("{}", graph_text(&g)),
            }
            Ok(0)
        }
        Command::Analyze { file, opts } => {
            let format = pick(&opts, Format::Text, &[Format::Text, Format::Json])?;
            let (g, patterns) = graph(&file, &opts)?;
            let report = classify_deadlocks(&g, &patterns);
            match format {
                Format::Json => print!("{}", report_json(&g, &report)),
                _ => print!("{}", report_text(&g, &report)),
            }
            Ok(if report.has_deadlocks() { 2 } else { 0 })
        }
        Command::Simulate {
            file,
            env,
            policy,
            seed,
            opts,
        } => {
            let format = pick(&opts, Format::Text, &[Format::Text, Format::Json])?;
            let sys = system(&read(&file)?, &opts)?;
            let inputs = parse_env_sequence(&read(&env)?)
                .with_context(|| format!("in {}", env.display()))?;
            let policy = match policy {
                PolicyArg::All => Policy::EnumerateAll,
                PolicyArg::First => Policy::FirstDeclared,
                PolicyArg::Random => Policy::SeededRandom(seed),
            };
            let trace = Simulator::new(&sys, policy).run(&inputs)?;
            match format {
                Format::Json => print!("{}", trace_json(&trace)),
                _ => print!("{}", trace_text(&sys, &trace)),
            }
            Ok(0)
        }
        Command::Export { file, opts } => {
            pick(&opts, Format::Dot, &[Format::Dot])?;
            let (g, patterns) = graph(&file, &opts)?;
            let report = classify_deadlocks(&g, &patterns);
            let marks = report
                .deadlocks
                .iter()
                .flat_map(|d| d.members.iter().copied())
                .collect();
            print!("{}", export_dot(&g, &marks));
            Ok(0)
        }
        Command::Diff { left, right, opts } => {
            let format = pick(&opts, Format::Text, &[Format::Text, Format::Json])?;
            let (l, _) = graph(&left, &opts)?;
            let (r, _) = graph(&right, &opts)?;
            let diff = diff_graphs(&l, &r);
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&diff)?),
                _ => print!("{diff}"),
            }
            Ok(0)
        }
    }
}

fn pick(opts: &Common, default: Format, allowed: &[Format]) -> Result<Format> {
    let f = opts.format.unwrap_or(default);
    if !allowed.contains(&f) {
        bail!("format {f:?} is not available for this command");
    }
    Ok(f)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn model(text: &str) -> Result<ModelFile> {
    Ok(parse_model(text)?)
}

fn patterns(opts: &Common) -> Result<Vec<StatePattern>> {
    Ok(opts
        .accepting
        .iter()
        .map(|p| StatePattern::new(p))
        .collect::<csm_core::Result<_>>()?)
}

fn system(text: &str, opts: &Common) -> Result<SystemModel> {
    let mut sys = model(text)?.system(opts.system.as_deref())?;
    if opts.close_incomplete {
        let machines = sys
            .machines
            .iter()
            .map(|m| m.completeness_closure())
            .collect::<csm_core::Result<_>>()?;
        let accepting = std::mem::take(&mut sys.accepting);
        sys = SystemModel::with_classification(
            sys.name,
            machines,
            Some(sys.internal),
            Some(sys.environment),
        )?;
        sys.accepting = accepting;
    }
    if !opts.accepting.is_empty() {
        sys.accepting = patterns(opts)?;
    }
    Ok(sys)
}

fn build(sys: &SystemModel, opts: &Common) -> Result<ReachabilityGraph> {
    let options = ComposeOptions {
        atom_cap: opts.atom_cap.unwrap_or(DEFAULT_CAP),
        ..ComposeOptions::default()
    };
    Ok(compose_with(sys, options)?)
}

/// A graph from either a graph document or a model file.
fn graph(path: &Path, opts: &Common) -> Result<(ReachabilityGraph, Vec<StatePattern>)> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let g = GraphDocument::from_json(&text)?.to_graph()?;
        return Ok((g, patterns(opts)?));
    }
    let sys = system(&text, opts).with_context(|| format!("in {}", path.display()))?;
    let g = build(&sys, opts)?;
    Ok((g, sys.accepting))
}

fn graph_text(g: &ReachabilityGraph) -> String {
    let mut out = String::new();
    for (i, n) in g.nodes.iter().enumerate() {
        let outputs: Vec<&str> = n.outputs.iter().map(|s| s.as_str()).collect();
        let mark = if i == g.initial { " (initial)" } else { "" };
        out.push_str(&format!(
            "{i}: {} {{{}}}{mark}\n",
            n.name,
            outputs.join(", ")
        ));
    }
    for e in &g.edges {
        out.push_str(&format!(
            "{} -> {} : {}\n",
            g.nodes[e.from].name, g.nodes[e.to].name, e.guard
        ));
    }
    out
}

struct Entry {
    file: String,
    kind: &'static str,
    name: String,
    outcome: Result<Report, String>,
}

fn check(files: &[std::path::PathBuf], opts: &Common) -> Result<u8> {
    let format = pick(opts, Format::Text, &[Format::Text, Format::Json])?;
    if files.is_empty() {
        bail!("no files given");
    }
    let cap = opts.atom_cap.unwrap_or(DEFAULT_CAP);
    let mut entries = Vec::new();
    for path in files {
        let file = path.display().to_string();
        let parsed = model(&read(path)?).with_context(|| format!("in {file}"))?;
        let decl = parsed.message_decl();
        let mut add = |kind, name: &str, outcome| {
            entries.push(Entry {
                file: file.clone(),
                kind,
                name: name.to_string(),
                outcome,
            })
        };
        for m in &parsed.csms {
            add("csm", &m.name, Ok(m.validate_with_cap(cap)));
        }
        for s in &parsed.statecharts {
            let report = s.validate(&decl);
            let valid = report.is_valid();
            add("statechart", &s.name, Ok(report));
            if valid {
                let outcome = s
                    .to_csm(&decl)
                    .map(|m| m.validate_with_cap(cap))
                    .map_err(|e| e.to_string());
                add("transformed", &s.name, outcome);
            }
        }
        for sys in &parsed.systems {
            let outcome = parsed
                .system(Some(&sys.name))
                .map(|_| Report::default())
                .map_err(|e| e.to_string());
            add("system", &sys.name, outcome);
        }
    }
    let failed = entries
        .iter()
        .any(|e| !matches!(&e.outcome, Ok(r) if r.is_valid()));
    match format {
        Format::Json => {
            let list: Vec<_> = entries
                .iter()
                .map(|e| match &e.outcome {
                    Ok(report) => {
                        json!({"file": e.file, "kind": e.kind, "name": e.name, "report": report})
                    }
                    Err(msg) => {
                        json!({"file": e.file, "kind": e.kind, "name": e.name, "error": msg})
                    }
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&list)?);
        }
        _ => {
            for e in &entries {
                let (status, detail) = match &e.outcome {
                    Ok(r) if r.is_clean() => ("ok", String::new()),
                    Ok(r) if r.is_valid() => ("ok with warnings", r.to_string()),
                    Ok(r) => ("invalid", r.to_string()),
                    Err(msg) => ("invalid", format!("error: {msg}\n")),
                };
                println!("{}: {} {}: {status}", e.file, e.kind, e.name);
                for line in detail.lines() {
                    println!("  {line}");
                }
            }
        }
    }
    Ok(u8::from(failed))
}

fn transform(file: &Path, names: &[String], opts: &Common) -> Result<u8> {
    pick(opts, Format::Text, &[Format::Text])?;
    let model = model(&read(file)?)?;
    let decl = model.message_decl();
    let chosen: Vec<_> = if names.is_empty() {
        model.statecharts.iter().collect()
    } else {
        names
            .iter()
            .map(|n| {
                model
                    .statechart(n)
                    .with_context(|| format!("no statechart `{n}`"))
            })
            .collect::<Result<_>>()?
    };
    if chosen.is_empty() {
        bail!("no statecharts in {}", file.display());
    }
    let mut out = format!("{FORMAT_TAG} {FORMAT_VERSION}\n");
    for s in chosen {
        let report = s.validate(&decl);
        if !report.is_valid() {
            bail!("statechart {} is invalid:\n{report}", s.name);
        }
        let mut m = s.to_csm(&decl)?;
        if opts.close_incomplete {
            m = m.completeness_closure()?;
        }
        out.push('\n');
        out.push_str(&render_csm(&m));
    }
    print!("{out}");
    Ok(0)
}
