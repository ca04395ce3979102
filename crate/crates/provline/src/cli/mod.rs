//! The `provline` command line.
//!
//! Exit status is 0 on success, 1 when the data fails validation or a
//! command cannot complete, and 2 on usage errors. Reports are printed as
//! plain tables, or as JSON with `--json`. Output files are written to a
//! temporary path and renamed, and only after every document succeeded.

mod table;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use provline_core::analysis::{
    attribution_precision, category_summary, AttributionMethod, policy_sweep, sample_attribution_pairs, DocRun, PolicyRun,
    VolatilityRecord, WorksheetRow,
};
use provline_core::{validate_event_set, Check, ConflictMode, Error as CoreError, TrustPolicy, Variant};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{export_tabular, write_atomic, write_json_atomic, Corpus};
use crate::queue::PriorityWeights;
use crate::report::{
    diff, load_mentions, parse_policy, reconstruct_all, Comparison, DiffReport, Side, SweepManifest, SweepPolicy,
    SweepReport, TraceFile,
};

/// Usage problems detected after argument parsing; exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "provline", version, about = "Provenance-aware OCR correction replay and entity volatility analysis")]
pub struct Cli {
    /// Corpus root directory.
    #[arg(long, env = "PROVLINE_CORPUS", global = true)]
    pub corpus: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnConflict {
    Resolve,
    Error,
    SkipGroup,
}

impl From<OnConflict> for ConflictMode {
    fn from(v: OnConflict) -> Self {
        match v {
            OnConflict::Resolve => ConflictMode::Resolve,
            OnConflict::Error => ConflictMode::Error,
            OnConflict::SkipGroup => ConflictMode::SkipGroup,
        }
    }
}

fn policy_arg(text: &str) -> Result<TrustPolicy, String> {
    parse_policy(text).ok_or_else(|| {
        format!(
            "unknown policy {text:?}: expected one of {}, conf>=X, or inline JSON",
            TrustPolicy::PRESETS.join(", ")
        )
    })
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Policy of the reference variant.
    #[arg(long, value_parser = policy_arg)]
    pub variant_a: TrustPolicy,
    /// Policy of the compared variant.
    #[arg(long, value_parser = policy_arg)]
    pub variant_b: TrustPolicy,
    /// Mentions of variant A: a JSONL file or a directory of `<doc_id>.jsonl`.
    /// Defaults to `<corpus>/mentions/<policy>`.
    #[arg(long)]
    pub mentions_a: Option<PathBuf>,
    #[arg(long)]
    pub mentions_b: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "error")]
    pub on_conflict: OnConflict,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every event against its base text.
    Validate,
    /// Write the variant text and trace of every document under a policy.
    Reconstruct {
        #[arg(long, value_parser = policy_arg)]
        policy: TrustPolicy,
        #[arg(long, value_enum, default_value = "error")]
        on_conflict: OnConflict,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare entity mentions of two variants.
    Diff {
        #[command(flatten)]
        compare: CompareArgs,
        /// Directory for diff.json and diff.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Volatility records with their attributed events and signal utility.
    Attribute {
        #[command(flatten)]
        compare: CompareArgs,
    },
    /// Threshold sweep over several policies.
    Sweep {
        #[command(subcommand)]
        phase: SweepPhase,
    },
    /// Draw a seeded sample of (entity, event) pairs for manual judgment.
    Sample {
        #[command(flatten)]
        compare: CompareArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Worksheet CSV to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Attribution precision of a judged worksheet.
    Precision { worksheet: PathBuf },
    /// Distribution of category labels over volatility records.
    Categories {
        /// diff.json, or a JSON array of volatility records.
        #[arg(long)]
        records: PathBuf,
        /// CSV with columns record_id,category.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Export events, with decisions merged, as CSV.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the review service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Static files to serve at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepPhase {
    /// Reconstruct every policy and record variant ids for tagging.
    Emit {
        #[arg(long, value_delimiter = ',', value_parser = policy_arg, default_value = "raw,all,conf50,conf70,conf85,approved")]
        policies: Vec<TrustPolicy>,
        #[arg(long, default_value = "raw")]
        baseline: String,
        #[arg(long, value_enum, default_value = "error")]
        on_conflict: OnConflict,
        /// Defaults to `<corpus>/sweep`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read per-policy mentions and write the sweep table and curve.
    Report {
        /// Directory written by `emit`. Defaults to `<corpus>/sweep`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Root holding `<policy>/<doc_id>.jsonl`. Defaults to `<corpus>/mentions`.
        #[arg(long)]
        mentions: Option<PathBuf>,
    },
}

pub const SWEEP_MANIFEST: &str = "sweep_manifest.json";

struct Ctx {
    json: bool,
}

impl Ctx {
    /// A closed stdout (say, piped into `head`) is not an error.
    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) -> anyhow::Result<()> {
        let text = if self.json {
            serde_json::to_string_pretty(value)? + "\n"
        } else {
            human()
        };
        let mut out = std::io::stdout().lock();
        match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => Ok(other?),
        }
    }
}

fn corpus_root(cli: &Cli) -> anyhow::Result<PathBuf> {
    cli.corpus
        .clone()
        .ok_or_else(|| UsageError("no corpus given: pass --corpus or set PROVLINE_CORPUS".into()).into())
}

fn load(root: &Path) -> anyhow::Result<Corpus> {
    Corpus::load(root).with_context(|| format!("loading corpus {}", root.display()))
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let ctx = Ctx { json: cli.json };
    let needs_corpus = !matches!(cli.command, Command::Precision { .. } | Command::Categories { .. });
    let root = if needs_corpus { Some(corpus_root(&cli)?) } else { None };
    let root = root.as_deref();
    match cli.command {
        Command::Validate => validate(&ctx, &load(root.unwrap())?),
        Command::Reconstruct { policy, on_conflict, out } => reconstruct_cmd(&ctx, &load(root.unwrap())?, &policy, on_conflict.into(), &out),
        Command::Diff { compare, out } => diff_cmd(&ctx, &load(root.unwrap())?, &compare, out.as_deref()),
        Command::Attribute { compare } => attribute_cmd(&ctx, &load(root.unwrap())?, &compare),
        Command::Sweep { phase } => match phase {
            SweepPhase::Emit {
                policies,
                baseline,
                on_conflict,
                out,
            } => sweep_emit(&ctx, &load(root.unwrap())?, &policies, &baseline, on_conflict.into(), out),
            SweepPhase::Report { out, mentions } => sweep_report(&ctx, &load(root.unwrap())?, out, mentions),
        },
        Command::Sample { compare, n, seed, out } => sample_cmd(&ctx, &load(root.unwrap())?, &compare, n, seed, &out),
        Command::Precision { worksheet } => precision_cmd(&ctx, &worksheet),
        Command::Categories { records, labels } => categories_cmd(&ctx, &records, &labels),
        Command::Export { out } => {
            let corpus = load(root.unwrap())?;
            let events = corpus.effective_events()?;
            export_tabular(&events, &out)?;
            ctx.emit(&serde_json::json!({ "events": events.len(), "path": out }), || {
                format!("wrote {} events to {}\n", events.len(), out.display())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { port, host, ui_dir } => {
            let root = root.unwrap().to_path_buf();
            let state = crate::server::AppState::load(&root, PriorityWeights::default())?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(crate::server::serve(state, SocketAddr::new(host, port), ui_dir))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Debug, Serialize)]
struct FailureLine {
    doc_id: String,
    event_id: String,
    line: Option<usize>,
    check: Option<Check>,
    message: String,
}

#[derive(Debug, Serialize)]
struct OverlapLine {
    doc_id: String,
    events: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ValidationSummary {
    passed: bool,
    documents: usize,
    events: usize,
    failures: Vec<FailureLine>,
    overlap_groups: Vec<OverlapLine>,
}

fn validate(ctx: &Ctx, corpus: &Corpus) -> anyhow::Result<ExitCode> {
    let mut failures = Vec::new();
    let mut seen = BTreeSet::new();
    for l in &corpus.events {
        if !corpus.documents.contains_key(&l.record.doc_id) {
            failures.push(FailureLine {
                doc_id: l.record.doc_id.clone(),
                event_id: l.record.event_id.clone(),
                line: Some(l.line),
                check: None,
                message: format!("unknown doc_id {}", l.record.doc_id),
            });
        }
        if !seen.insert(l.record.event_id.as_str()) {
            failures.push(FailureLine {
                doc_id: l.record.doc_id.clone(),
                event_id: l.record.event_id.clone(),
                line: Some(l.line),
                check: None,
                message: format!("duplicate event_id {}", l.record.event_id),
            });
        }
    }
    if let Err(e) = corpus.effective_events() {
        failures.push(FailureLine {
            doc_id: String::new(),
            event_id: String::new(),
            line: None,
            check: None,
            message: e.to_string(),
        });
    }

    let grouped = corpus.by_document(&corpus.raw_events());
    let per_doc: Vec<(Vec<FailureLine>, Vec<OverlapLine>)> = grouped
        .par_iter()
        .map(|(doc_id, events)| {
            let mut unique: Vec<_> = Vec::new();
            let mut ids = BTreeSet::new();
            for e in events {
                if ids.insert(e.event_id.as_str()) {
                    unique.push(e.clone());
                }
            }
            let report = validate_event_set(&unique, &corpus.documents[doc_id]).expect("grouped by document, deduplicated");
            let failures = report
                .reports
                .iter()
                .flat_map(|r| {
                    r.failures().map(move |v| FailureLine {
                        doc_id: doc_id.clone(),
                        event_id: r.event_id.clone(),
                        line: corpus.line_of(&r.event_id),
                        check: Some(v.check),
                        message: v.message.clone(),
                    })
                })
                .collect();
            let overlaps = report
                .overlap_groups
                .into_iter()
                .map(|events| OverlapLine {
                    doc_id: doc_id.clone(),
                    events,
                })
                .collect();
            (failures, overlaps)
        })
        .collect();
    let mut overlap_groups = Vec::new();
    for (f, o) in per_doc {
        failures.extend(f);
        overlap_groups.extend(o);
    }

    let summary = ValidationSummary {
        passed: failures.is_empty(),
        documents: corpus.documents.len(),
        events: corpus.events.len(),
        failures,
        overlap_groups,
    };
    ctx.emit(&summary, || {
        let mut out = String::new();
        for f in &summary.failures {
            let line = f.line.map(|l| format!("line {l}: ")).unwrap_or_default();
            let id = if f.event_id.is_empty() { String::new() } else { format!("{}: ", f.event_id) };
            out.push_str(&format!("FAIL {line}{id}{}\n", f.message));
        }
        for g in &summary.overlap_groups {
            out.push_str(&format!("note {}: overlapping events {}\n", g.doc_id, g.events.join(", ")));
        }
        out.push_str(&format!(
            "{} documents, {} events, {} failures\n",
            summary.documents,
            summary.events,
            summary.failures.len()
        ));
        out
    })?;
    Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn unresolved_check(corpus: &Corpus) -> anyhow::Result<()> {
    let unresolved = corpus.unresolved();
    if let Some(first) = unresolved.first() {
        bail!(
            "{} event(s) reference documents missing from the manifest, first {} (doc_id {}) at line {}",
            unresolved.len(),
            first.record.event_id,
            first.record.doc_id,
            first.line
        );
    }
    Ok(())
}

fn variants_for(corpus: &Corpus, policy: &TrustPolicy, mode: ConflictMode) -> anyhow::Result<BTreeMap<String, Variant>> {
    unresolved_check(corpus)?;
    let events = corpus.by_document(&corpus.effective_events()?);
    Ok(reconstruct_all(&corpus.documents, &events, policy, mode)?)
}

/// Writes `<doc>.txt` and `<doc>.trace.json` for each variant.
fn write_variants(dir: &Path, variants: &BTreeMap<String, Variant>) -> anyhow::Result<()> {
    for (doc_id, v) in variants {
        write_atomic(&dir.join(format!("{doc_id}.txt")), v.text.as_bytes())?;
        write_json_atomic(&dir.join(format!("{doc_id}.trace.json")), &TraceFile::from(v))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct VariantSummary {
    doc_id: String,
    variant_id: String,
    applied: usize,
    not_applied: usize,
}

fn summaries(variants: &BTreeMap<String, Variant>) -> Vec<VariantSummary> {
    variants
        .values()
        .map(|v| {
            let applied = v.trace.applied().count();
            VariantSummary {
                doc_id: v.doc_id.clone(),
                variant_id: v.variant_id.clone(),
                applied,
                not_applied: v.trace.entries.len() - applied,
            }
        })
        .collect()
}

fn reconstruct_cmd(ctx: &Ctx, corpus: &Corpus, policy: &TrustPolicy, mode: ConflictMode, out: &Path) -> anyhow::Result<ExitCode> {
    let variants = variants_for(corpus, policy, mode)?;
    write_variants(out, &variants)?;
    let docs = summaries(&variants);
    let report = serde_json::json!({ "policy": policy, "conflict_mode": mode, "out": out, "documents": docs });
    ctx.emit(&report, || {
        let rows: Vec<Vec<String>> = docs
            .iter()
            .map(|d| vec![d.doc_id.clone(), d.variant_id[..12].to_owned(), d.applied.to_string(), d.not_applied.to_string()])
            .collect();
        table::render(&["doc_id", "variant", "applied", "not applied"], &rows)
    })?;
    Ok(ExitCode::SUCCESS)
}

fn compare(corpus: &Corpus, args: &CompareArgs) -> anyhow::Result<(Comparison, DiffReport)> {
    unresolved_check(corpus)?;
    let events = corpus.effective_events()?;
    let cmp = Comparison::build(corpus, &events, &args.variant_a, &args.variant_b, args.on_conflict.into())?;
    let (pa, pb) = (&args.variant_a.name, &args.variant_b.name);
    let path_a = args.mentions_a.clone().unwrap_or_else(|| corpus.mentions_dir(pa));
    let path_b = args.mentions_b.clone().unwrap_or_else(|| corpus.mentions_dir(pb));
    let ma = load_mentions(&path_a, pa, &cmp.variants_a)?;
    let mb = load_mentions(&path_b, pb, &cmp.variants_b)?;
    let report = diff(
        &Side {
            policy: pa,
            variants: &cmp.variants_a,
            mentions: &ma,
        },
        &Side {
            policy: pb,
            variants: &cmp.variants_b,
            mentions: &mb,
        },
        &cmp.events,
    )?;
    Ok((cmp, report))
}

fn records_csv(records: &[VolatilityRecord]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "record_id", "kind", "surface_a", "start_a", "end_a", "surface_b", "start_b", "end_b", "base_start", "base_end",
        "attributed_events",
    ])?;
    for r in records {
        let side = |m: &Option<provline_core::analysis::EntityMention>| match m {
            Some(m) => [m.surface.clone(), m.start.to_string(), m.end.to_string()],
            None => Default::default(),
        };
        let [sa, sa_s, sa_e] = side(&r.mention_a);
        let [sb, sb_s, sb_e] = side(&r.mention_b);
        let attributed: Vec<String> = r
            .attributed_events
            .iter()
            .map(|a| {
                let method = match a.method {
                    AttributionMethod::Overlap => "overlap",
                    AttributionMethod::Window => "window",
                };
                format!("{}:{method}:{}", a.event_id, a.distance)
            })
            .collect();
        w.write_record([
            r.record_id.clone(),
            r.kind.as_str().into(),
            sa,
            sa_s,
            sa_e,
            sb,
            sb_s,
            sb_e,
            r.base_anchor.start.to_string(),
            r.base_anchor.end.to_string(),
            attributed.join(";"),
        ])?;
    }
    Ok(w.into_inner()?)
}

fn diff_table(r: &DiffReport) -> String {
    let mut out = table::render(
        &["variant", "mentions", "unique"],
        &[
            vec![r.policy_a.clone(), r.mentions_a.to_string(), r.unique_a.to_string()],
            vec![r.policy_b.clone(), r.mentions_b.to_string(), r.unique_b.to_string()],
        ],
    );
    out.push_str(&format!("\njaccard {:.3}\n", r.jaccard));
    out.push_str(&format!("volatile {} of {} entities", r.volatile, r.entities));
    let kinds: Vec<String> = r.by_kind.iter().map(|(k, n)| format!("{k} {n}")).collect();
    out.push_str(&format!(" ({})\n", kinds.join(", ")));
    out.push_str(&format!(
        "linked to unreviewed edits {} ({})\n",
        r.linked_to_unreviewed,
        table::opt_f64(r.share_linked_to_unreviewed.map(|s| s * 100.0), 1) + "%"
    ));
    out
}

fn diff_cmd(ctx: &Ctx, corpus: &Corpus, args: &CompareArgs, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let (_, report) = compare(corpus, args)?;
    if let Some(dir) = out {
        let csv = records_csv(&report.records)?;
        write_json_atomic(&dir.join("diff.json"), &report)?;
        write_atomic(&dir.join("diff.csv"), &csv)?;
    }
    ctx.emit(&report, || diff_table(&report))?;
    Ok(ExitCode::SUCCESS)
}

fn signal_table(r: &DiffReport) -> String {
    let rows: Vec<Vec<String>> = r
        .signals
        .iter()
        .map(|s| {
            vec![
                s.signal.clone(),
                table::opt_f64(s.prevalence, 3),
                table::opt_f64(s.flagged_volatility_rate, 3),
                table::opt_f64(s.unflagged_volatility_rate, 3),
                table::opt_f64(s.lift, 2),
            ]
        })
        .collect();
    table::render(&["signal", "prevalence", "flagged rate", "unflagged rate", "lift"], &rows)
}

fn attribute_cmd(ctx: &Ctx, corpus: &Corpus, args: &CompareArgs) -> anyhow::Result<ExitCode> {
    let (_, report) = compare(corpus, args)?;
    let payload = serde_json::json!({ "records": report.records, "signals": report.signals });
    ctx.emit(&payload, || {
        let rows: Vec<Vec<String>> = report
            .records
            .iter()
            .map(|r| {
                let surface = r.mention_b.as_ref().or(r.mention_a.as_ref()).map(|m| m.surface.clone()).unwrap_or_default();
                let events: Vec<String> = r
                    .attributed_events
                    .iter()
                    .map(|a| format!("{} (d={})", a.event_id, a.distance))
                    .collect();
                vec![r.record_id.clone(), r.kind.as_str().into(), surface, events.join(", ")]
            })
            .collect();
        let mut out = table::render(&["record", "kind", "surface", "attributed events"], &rows);
        out.push('\n');
        out.push_str(&signal_table(&report));
        out
    })?;
    Ok(ExitCode::SUCCESS)
}

fn sample_cmd(ctx: &Ctx, corpus: &Corpus, args: &CompareArgs, n: usize, seed: u64, out: &Path) -> anyhow::Result<ExitCode> {
    let (cmp, report) = compare(corpus, args)?;
    let events: Vec<_> = cmp.events.values().flatten().cloned().collect();
    let rows = sample_attribution_pairs(&report.records, &cmp.variants_a, &cmp.variants_b, &events, n, seed)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(WORKSHEET_COLUMNS)?;
    }
    write_atomic(out, &w.into_inner()?)?;
    ctx.emit(&rows, || format!("wrote {} rows to {} (seed {seed})\n", rows.len(), out.display()))?;
    Ok(ExitCode::SUCCESS)
}

const WORKSHEET_COLUMNS: [&str; 15] = [
    "row_id", "record_id", "kind", "surface", "label", "context", "event_id", "edit_type", "source", "confidence",
    "orig_text", "new_text", "method", "distance", "judgment",
];

pub fn read_worksheet(path: &Path) -> anyhow::Result<Vec<WorksheetRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<Result<Vec<WorksheetRow>, _>>()
        .with_context(|| format!("reading worksheet {}", path.display()))
}

fn precision_cmd(ctx: &Ctx, worksheet: &Path) -> anyhow::Result<ExitCode> {
    let rows = read_worksheet(worksheet)?;
    let precision = attribution_precision(&rows)?;
    let yes = rows.iter().filter(|r| r.judgment == Some(provline_core::analysis::Judgment::Yes)).count();
    let payload = serde_json::json!({ "precision": precision, "rows": rows.len(), "yes": yes });
    ctx.emit(&payload, || format!("{precision}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn categories_cmd(ctx: &Ctx, records: &Path, labels: &Path) -> anyhow::Result<ExitCode> {
    let raw = std::fs::read(records).with_context(|| format!("reading {}", records.display()))?;
    let value: serde_json::Value = serde_json::from_slice(&raw).with_context(|| format!("parsing {}", records.display()))?;
    let list = match value {
        serde_json::Value::Object(mut o) => o.remove("records").ok_or_else(|| anyhow!("{} has no records field", records.display()))?,
        other => other,
    };
    let records: Vec<VolatilityRecord> = serde_json::from_value(list).with_context(|| format!("parsing {}", records.display()))?;

    let mut r = csv::Reader::from_path(labels).with_context(|| format!("opening {}", labels.display()))?;
    let mut map = BTreeMap::new();
    for row in r.deserialize::<(String, String)>() {
        let (id, category) = row.with_context(|| format!("reading {}", labels.display()))?;
        map.insert(id, category);
    }
    let dist = category_summary(&records, &map)?;
    ctx.emit(&dist, || {
        let rows: Vec<Vec<String>> = dist
            .categories
            .iter()
            .map(|c| vec![c.category.clone(), c.count.to_string(), format!("{:.1}", c.percent)])
            .collect();
        let mut out = table::render(&["category", "count", "%"], &rows);
        out.push_str(&format!("{} labeled, {} unlabeled\n", dist.labeled, dist.unlabeled.len()));
        out
    })?;
    Ok(ExitCode::SUCCESS)
}

fn sweep_emit(
    ctx: &Ctx,
    corpus: &Corpus,
    policies: &[TrustPolicy],
    baseline: &str,
    mode: ConflictMode,
    out: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    if !policies.iter().any(|p| p.name == baseline) {
        return Err(UsageError(format!("baseline {baseline} is not among the swept policies")).into());
    }
    let mut names = BTreeSet::new();
    if let Some(dup) = policies.iter().find(|p| !names.insert(p.name.as_str())) {
        return Err(UsageError(format!("policy {} listed twice", dup.name)).into());
    }
    let out = out.unwrap_or_else(|| corpus.root.join("sweep"));
    let all: Vec<(TrustPolicy, BTreeMap<String, Variant>)> = policies
        .iter()
        .map(|p| Ok((p.clone(), variants_for(corpus, p, mode)?)))
        .collect::<anyhow::Result<_>>()?;
    for (p, variants) in &all {
        write_variants(&out.join(&p.name), variants)?;
    }
    let manifest = SweepManifest {
        baseline: baseline.into(),
        conflict_mode: mode,
        policies: all
            .iter()
            .map(|(p, vs)| SweepPolicy {
                policy: p.clone(),
                variants: vs.iter().map(|(d, v)| (d.clone(), v.variant_id.clone())).collect(),
            })
            .collect(),
    };
    write_json_atomic(&out.join(SWEEP_MANIFEST), &manifest)?;
    ctx.emit(&manifest, || {
        let rows: Vec<Vec<String>> = all
            .iter()
            .map(|(p, vs)| {
                let applied: usize = vs.values().map(|v| v.trace.applied().count()).sum();
                vec![p.name.clone(), vs.len().to_string(), applied.to_string()]
            })
            .collect();
        let mut s = table::render(&["policy", "documents", "applied events"], &rows);
        s.push_str(&format!("wrote variants to {}\n", out.display()));
        s
    })?;
    Ok(ExitCode::SUCCESS)
}

fn sweep_report(ctx: &Ctx, corpus: &Corpus, out: Option<PathBuf>, mentions: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let out = out.unwrap_or_else(|| corpus.root.join("sweep"));
    let manifest_path = out.join(SWEEP_MANIFEST);
    if !manifest_path.is_file() {
        bail!("{} not found; run `provline sweep emit` first", manifest_path.display());
    }
    let manifest: SweepManifest = serde_json::from_slice(&std::fs::read(&manifest_path)?)
        .with_context(|| format!("parsing {}", manifest_path.display()))?;
    let mentions_root = mentions.unwrap_or_else(|| corpus.root.join(crate::io::corpus::MENTIONS_DIR));

    let mut runs = Vec::with_capacity(manifest.policies.len());
    for sp in &manifest.policies {
        let name = &sp.policy.name;
        let variants = variants_for(corpus, &sp.policy, manifest.conflict_mode)?;
        let current: BTreeMap<String, String> = variants.iter().map(|(d, v)| (d.clone(), v.variant_id.clone())).collect();
        if current != sp.variants {
            bail!("corpus or decisions changed since emit for policy {name}; rerun `provline sweep emit`");
        }
        let mut by_doc = load_mentions(&mentions_root.join(name), name, &variants)?;
        let docs = variants
            .into_iter()
            .map(|(d, variant)| {
                let mentions = by_doc.remove(&d).unwrap_or_default();
                (d, DocRun { variant, mentions })
            })
            .collect();
        runs.push(PolicyRun {
            policy: name.clone(),
            docs,
        });
    }
    let rows = policy_sweep(&manifest.baseline, &runs).map_err(|e: CoreError| anyhow!(e))?;
    let report = SweepReport::new(&manifest.baseline, rows);

    let mut table_csv = csv::Writer::from_writer(Vec::new());
    table_csv.write_record(["policy", "mentions", "unique", "jaccard_vs_raw", "volatile"])?;
    for r in &report.rows {
        table_csv.write_record([
            r.policy.clone(),
            r.mentions.to_string(),
            r.unique.to_string(),
            r.jaccard_vs_raw.to_string(),
            r.volatile.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    let mut curve_csv = csv::Writer::from_writer(Vec::new());
    for p in &report.curve {
        curve_csv.serialize(p)?;
    }
    write_atomic(&out.join("sweep.csv"), &table_csv.into_inner()?)?;
    write_atomic(&out.join("curve.csv"), &curve_csv.into_inner()?)?;
    write_json_atomic(&out.join("sweep.json"), &report)?;
    ctx.emit(&report, || {
        let rows: Vec<Vec<String>> = report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.policy.clone(),
                    r.mentions.to_string(),
                    r.unique.to_string(),
                    format!("{:.3}", r.jaccard_vs_raw),
                    r.volatile.map_or_else(|| "-".into(), |v| v.to_string()),
                ]
            })
            .collect();
        table::render(&["policy", "mentions", "unique", "jaccard vs raw", "volatile"], &rows)
    })?;
    Ok(ExitCode::SUCCESS)
}
