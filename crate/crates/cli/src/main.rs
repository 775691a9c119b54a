//! `biquad`: census scans, per-triple analysis, group reports and table verification.

mod cache;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biquad_core::group2::{
    build_structural_group, expected_structure, fingerprint, layer_subgroups, quotient_coords, transfer_kernel,
    RhoVariant,
};
use biquad_core::params::{compute_invariants, group_label, scan_with, validate_triple, FieldInvariants, DirectSource};
use biquad_core::predict::{
    consistency_report, embedded_fixtures, field_catalog, parse_allowlist, parse_fixture, predict_all, verify_tables,
    FixtureTable, Verdict, ALLOWLIST,
};
use biquad_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cache::CachedSource;

#[derive(Parser)]
#[command(name = "biquad", version, about = "Invariants and second 2-class groups of Q(√(p1p2q), i)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate every admissible triple with d below --max-d.
    Scan(ScanArgs),
    /// Group-label histogram of a scan.
    Stats(ScanArgs),
    /// Invariants and predictions for one triple.
    Analyze(AnalyzeArgs),
    /// Report on the group with parameters (m, n, N).
    Group(GroupArgs),
    /// Check the embedded or given class-group tables against the predictions.
    VerifyTables(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    A,
    B,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 50_000)]
    max_d: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    p1: u64,
    #[arg(long)]
    p2: u64,
    #[arg(long)]
    q: u64,
    /// Also build G and run the consistency harness.
    #[arg(long)]
    full: bool,
    /// Plain `key: value` text when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct GroupArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, allow_negative_numbers = true)]
    norm: i8,
    #[arg(long, value_enum, default_value_t = Variant::A)]
    variant: Variant,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory of fixture tables (`allowlist.txt` is read as the allowlist); embedded tables when omitted.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum Failure {
    /// Exit 1.
    Mismatch(String),
    /// Exit 2.
    Invalid(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("I/O: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Invalid(format!("CSV output: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(format!("JSON output: {e}"))
    }
}

type CmdResult = Result<(), Failure>;

/// One census line; CSV columns follow the field order.
#[derive(Serialize)]
struct ScanRow {
    d: u64,
    p1: u64,
    p2: u64,
    q: u64,
    gamma: i8,
    delta: Option<i8>,
    #[serde(rename = "N")]
    unit_norm: i8,
    m: u32,
    n: u32,
    pi: i8,
    beta: i8,
    #[serde(rename = "I")]
    big_i: Option<i8>,
    disc: u128,
    order: u64,
    class: u32,
    coclass: u32,
    label: String,
}

impl From<&FieldInvariants> for ScanRow {
    fn from(inv: &FieldInvariants) -> Self {
        let t = inv.triple;
        ScanRow {
            d: t.d,
            p1: t.p1,
            p2: t.p2,
            q: t.q,
            gamma: inv.gamma,
            delta: inv.delta,
            unit_norm: inv.unit_norm,
            m: inv.m,
            n: inv.n,
            pi: inv.pi_symbol,
            beta: inv.beta,
            big_i: inv.big_i,
            disc: inv.disc_k,
            order: inv.order_g,
            class: inv.class_g,
            coclass: inv.coclass_g,
            label: inv.group_label.clone(),
        }
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: Format) -> CmdResult {
    let out = std::io::stdout().lock();
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Key/value reports for analyze and group.
fn write_report(items: &[(String, String)], format: Option<Format>) -> CmdResult {
    match format {
        None => {
            let mut out = std::io::stdout().lock();
            for (k, v) in items {
                writeln!(out, "{k}: {v}")?;
            }
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["key", "value"])?;
            for (k, v) in items {
                w.write_record([k, v])?;
            }
            w.flush()?;
        }
        Some(Format::Json) => {
            let map: serde_json::Map<String, serde_json::Value> =
                items.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &map)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn run_scan(args: &ScanArgs) -> Result<Vec<FieldInvariants>, Failure> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(Failure::Invalid("--jobs must be positive".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Failure::Invalid(format!("thread pool: {e}")))?;
    let rows = match &args.cache {
        Some(path) => {
            let src = CachedSource::open(path).map_err(Failure::Invalid)?;
            let bad = src.spot_check();
            if !bad.is_empty() {
                return Err(Failure::Invalid(format!("cache {} disagrees with recomputation at radicands {bad:?}", path.display())));
            }
            let rows = pool.install(|| scan_with(args.max_d, &src))?;
            let added = src.flush().map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            eprintln!("cache {}: {} records loaded, {added} appended", path.display(), src.len());
            rows
        }
        None => pool.install(|| scan_with(args.max_d, &DirectSource))?,
    };
    Ok(rows.into_iter().map(|(_, inv)| inv).collect())
}

fn cmd_scan(args: &ScanArgs) -> CmdResult {
    let invs = run_scan(args)?;
    let rows: Vec<ScanRow> = invs.iter().map(ScanRow::from).collect();
    write_rows(&rows, args.format)
}

#[derive(Serialize)]
struct LabelCount {
    label: String,
    count: usize,
    percent: String,
}

fn cmd_stats(args: &ScanArgs) -> CmdResult {
    let invs = run_scan(args)?;
    let mut hist: BTreeMap<&str, usize> = BTreeMap::new();
    for inv in &invs {
        *hist.entry(inv.group_label.as_str()).or_default() += 1;
    }
    let mut counts: Vec<(&str, usize)> = hist.into_iter().collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let total = invs.len();
    let pct = |c: usize| if total == 0 { "0".to_string() } else { format!("{:.0}", 100.0 * c as f64 / total as f64) };
    let mut rows: Vec<LabelCount> =
        counts.iter().map(|&(l, c)| LabelCount { label: l.to_string(), count: c, percent: pct(c) }).collect();
    rows.push(LabelCount { label: "total".into(), count: total, percent: pct(total) });
    write_rows(&rows, args.format)
}

fn cmd_analyze(args: &AnalyzeArgs) -> CmdResult {
    let t = validate_triple(args.p1, args.p2, args.q)?;
    let inv = compute_invariants(&t)?;
    let pred = predict_all(&inv);
    let opt = |x: Option<i8>| x.map_or("-".to_string(), |v| v.to_string());
    let mut items: Vec<(String, String)> = vec![
        ("triple".into(), t.to_string()),
        ("gamma".into(), inv.gamma.to_string()),
        ("delta".into(), opt(inv.delta)),
        ("N".into(), inv.unit_norm.to_string()),
        ("m, n".into(), format!("{}, {}", inv.m, inv.n)),
        ("pi".into(), inv.pi_symbol.to_string()),
        ("beta".into(), inv.beta.to_string()),
        ("I".into(), opt(inv.big_i)),
        ("disc(k)".into(), inv.disc_k.to_string()),
        ("tau ideal".into(), inv.tau_ideal.to_string()),
        ("|G|".into(), inv.order_g.to_string()),
        ("class".into(), inv.class_g.to_string()),
        ("coclass".into(), inv.coclass_g.to_string()),
        ("label".into(), inv.group_label.clone()),
        ("G′ type".into(), pred.derived_type.to_string()),
        ("h2(K3)".into(), pred.h2_k3.to_string()),
        ("tower length".into(), pred.tower_length.to_string()),
    ];
    let catalog = field_catalog();
    let (ks, ls) = catalog.split_at(7);
    for (j, e) in ks.iter().enumerate() {
        items.push((format!("Cl2({})", e.label), pred.k_types[j].to_string()));
        items.push((format!("κ({})", e.label), pred.k_kernels[j].to_string()));
        items.push((format!("N({})", e.label), pred.norm_groups[j].to_string()));
    }
    for (j, e) in ls.iter().enumerate() {
        items.push((format!("Cl2({})", e.label), pred.l_types[j].to_string()));
        items.push((format!("κ({})", e.label), pred.l_kernels[j].to_string()));
    }
    let mut failure = None;
    if args.full {
        let report = consistency_report(&inv)?;
        let verdict = if report.field_tau_succeeded() { "PASS" } else { "FAIL" };
        items.push(("consistency".into(), verdict.into()));
        let ok: Vec<String> = report.successful().iter().map(|a| a.to_string()).collect();
        items.push(("consistent assignments".into(), if ok.is_empty() { "none".into() } else { ok.join("; ") }));
        items.push(("transcript".into(), report.transcript()));
        if !report.field_tau_succeeded() {
            failure = Some(format!("consistency check failed for {t}"));
        }
    }
    write_report(&items, args.format)?;
    failure.map_or(Ok(()), |f| Err(Failure::Mismatch(f)))
}

fn mask_names(mask: u8) -> String {
    let names = ["ρ", "σ", "τ"];
    let vec_name = |v: u8| -> String {
        if v == 0 {
            "1".into()
        } else {
            (0..3).filter(|i| v & (1 << i) != 0).map(|i| names[i]).collect()
        }
    };
    let parts: Vec<String> = (0..8u8).filter(|v| mask & (1 << v) != 0).map(vec_name).collect();
    format!("{{{}}}", parts.join(","))
}

fn cmd_group(args: &GroupArgs) -> CmdResult {
    if args.norm != 1 && args.norm != -1 {
        return Err(Failure::Invalid(format!("--norm must be +1 or -1, got {}", args.norm)));
    }
    let variant = match args.variant {
        Variant::A => RhoVariant::A,
        Variant::B => RhoVariant::B,
    };
    let g = build_structural_group(args.m, args.n, args.norm, variant)?;
    let fp = fingerprint(&g)?;
    let q = quotient_coords(&g)?;
    let layers = layer_subgroups(&g, &q);
    let (order, class, coclass, derived) = expected_structure(args.m, args.n, args.norm);
    let list = |v: &[biquad_core::quadfield::AbelianType]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    let mut items: Vec<(String, String)> = vec![
        ("parameters".into(), format!("m={} n={} N={} variant={variant}", args.m, args.n, args.norm)),
        ("label".into(), group_label(args.m, args.n, args.norm)),
        ("order".into(), fp.order.to_string()),
        ("class".into(), fp.class.to_string()),
        ("coclass".into(), fp.coclass.to_string()),
        ("G/G′".into(), fp.abelianization.to_string()),
        ("G′ type".into(), fp.derived_type.to_string()),
        ("center".into(), fp.center_type.to_string()),
        ("TTT layer 1".into(), list(&fp.ttt_layer1)),
        ("TTT layer 2".into(), list(&fp.ttt_layer2)),
    ];
    for (name, layer) in [("layer 1", &layers.layer1), ("layer 2", &layers.layer2)] {
        let kernels: Vec<String> = layer.iter().map(|(_, h)| mask_names(transfer_kernel(&g, &q, h))).collect();
        items.push((format!("TKT {name}"), kernels.join(" ")));
    }
    items.push(("TKT sizes".into(), format!("{:?} {:?}", fp.tkt_sizes.0, fp.tkt_sizes.1)));
    if let Some(ps) = &fp.pair_statistics {
        items.push(("pair statistics classes".into(), ps.len().to_string()));
    }
    let agrees = fp.order == order && fp.class == class && fp.coclass == coclass && fp.derived_type == derived;
    items.push(("matches expected structure".into(), agrees.to_string()));
    write_report(&items, args.format)?;
    if agrees {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("expected order {order}, class {class}, coclass {coclass}, G′ {derived}")))
    }
}

fn load_fixture_dir(dir: &Path) -> Result<(Vec<FixtureTable>, String), Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Invalid(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    let mut tables = Vec::new();
    let mut allow = String::new();
    for p in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "txt")) {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let text = std::fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
        if name == "allowlist.txt" {
            allow = text;
        } else {
            tables.push(parse_fixture(&name, &text)?);
        }
    }
    if tables.is_empty() {
        return Err(Failure::Invalid(format!("no fixture tables in {}", dir.display())));
    }
    Ok((tables, allow))
}

#[derive(Serialize)]
struct VerdictRow {
    table: String,
    line: usize,
    d: u64,
    column: String,
    printed: String,
    computed: String,
    verdict: String,
}

fn cmd_verify_tables(args: &VerifyArgs) -> CmdResult {
    let (tables, allow_text) = match &args.fixtures {
        Some(dir) => load_fixture_dir(dir)?,
        None => (embedded_fixtures()?, ALLOWLIST.to_string()),
    };
    let allow = parse_allowlist(&allow_text)?;
    let summary = verify_tables(&tables, &allow)?;
    let mut rows = Vec::new();
    let mut first_mismatch = None;
    for r in &summary.rows {
        for c in &r.columns {
            let verdict = match &c.verdict {
                Verdict::Match => "match".to_string(),
                Verdict::Mismatch => "MISMATCH".to_string(),
                Verdict::NotChecked(why) => format!("not checked: {why}"),
                Verdict::Allowlisted(why) => format!("allowlisted: {why}"),
            };
            if c.verdict == Verdict::Mismatch && first_mismatch.is_none() {
                first_mismatch = Some(format!(
                    "{}:{} d={} column {}: printed {}, computed {}",
                    r.table, r.line, r.d, c.column, c.printed, c.computed
                ));
            }
            rows.push(VerdictRow {
                table: r.table.clone(),
                line: r.line,
                d: r.d,
                column: c.column.clone(),
                printed: c.printed.clone(),
                computed: c.computed.clone(),
                verdict,
            });
        }
    }
    write_rows(&rows, args.format)?;
    eprintln!(
        "{} tables, {} rows, {} cells checked, {} mismatches, {} allowlisted",
        tables.len(),
        summary.rows.len(),
        summary.checked_cells(),
        summary.mismatches(),
        summary.allowlisted()
    );
    match first_mismatch {
        Some(loc) => Err(Failure::Mismatch(format!("{} mismatching cells; first at {loc}", summary.mismatches()))),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scan(a) => cmd_scan(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Group(a) => cmd_group(a),
        Command::VerifyTables(a) => cmd_verify_tables(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
