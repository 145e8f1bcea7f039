//! Benchmark CSV, run manifests, cross-backend aggregation and the deployment
//! decision matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::latency::{self, DecisionReason};
use crate::noise::PlatformProfile;
use crate::reset::{ResetMethod, ResetOutcome};
use crate::rng::{self, Domain};
use crate::stats;

pub const HEADER: &str = "backend,method,seed,sequence_length,p_zero,p_x,unitary_error,lambda_used,shots,timestamp";
pub const NA: &str = "NA";

/// Shortest text that round-trips `x` rounded to 9 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// `x` as it reads back after a write.
pub fn quantize(x: f64) -> f64 {
    format_float(x).parse().unwrap_or(x)
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub backend: String,
    pub method: ResetMethod,
    pub seed: u64,
    pub sequence_length: usize,
    pub p_zero: f64,
    pub p_x: f64,
    pub unitary_error: f64,
    pub lambda_used: Option<f64>,
    pub shots: u64,
    pub timestamp: DateTime<Utc>,
}

impl ResultRow {
    pub fn from_outcome(o: &ResetOutcome, timestamp: DateTime<Utc>) -> Self {
        ResultRow {
            backend: o.backend.clone(),
            method: o.method,
            seed: o.seed,
            sequence_length: o.sequence_length,
            p_zero: o.p_zero,
            p_x: o.p_x,
            unitary_error: o.unitary_error,
            lambda_used: o.lambda_used,
            shots: o.shots,
            timestamp,
        }
    }

    /// The row as it reads back after a write.
    pub fn quantized(&self) -> Self {
        ResultRow {
            p_zero: quantize(self.p_zero),
            p_x: quantize(self.p_x),
            unitary_error: quantize(self.unitary_error),
            lambda_used: self.lambda_used.map(quantize),
            ..self.clone()
        }
    }

    /// Fields without the timestamp, formatted as written.
    pub fn record_without_timestamp(&self) -> [String; 9] {
        [
            self.backend.clone(),
            self.method.label().to_string(),
            self.seed.to_string(),
            self.sequence_length.to_string(),
            format_float(self.p_zero),
            format_float(self.p_x),
            format_float(self.unitary_error),
            self.lambda_used.map_or_else(|| NA.to_string(), format_float),
            self.shots.to_string(),
        ]
    }

    fn record(&self) -> Vec<String> {
        let mut r = self.record_without_timestamp().to_vec();
        r.push(format_timestamp(&self.timestamp));
        r
    }
}

/// Streams rows to any writer; the header goes out first.
pub struct RowWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RowWriter<W> {
    pub fn new(out: W) -> std::result::Result<Self, csv::Error> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(HEADER.split(','))?;
        Ok(RowWriter { inner })
    }

    pub fn write(&mut self, row: &ResultRow) -> std::result::Result<(), csv::Error> {
        self.inner.write_record(row.record())
    }

    pub fn finish(mut self) -> std::result::Result<W, csv::Error> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| csv::Error::from(io::Error::other(e.to_string())))
    }
}

pub fn write_rows(rows: &[ResultRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = RowWriter::new(BufWriter::new(file)).map_err(csv_err)?;
    for r in rows {
        w.write(r).map_err(csv_err)?;
    }
    w.finish().map_err(csv_err)?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows_from(file, path)
}

/// Parses benchmark rows; `origin` only labels errors.
pub fn read_rows_from<R: Read>(input: R, origin: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Csv {
                path: origin.to_path_buf(),
                source: e,
            },
            _ => parse_err(e.position().map_or(i + 1, |p| p.line() as usize), e.to_string()),
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if i == 0 {
            let header: Vec<&str> = rec.iter().collect();
            if header.join(",") != HEADER {
                return Err(parse_err(line, format!("header must be '{HEADER}'")));
            }
            continue;
        }
        rows.push(parse_record(&rec).map_err(|m| parse_err(line, m))?);
    }
    Ok(rows)
}

fn parse_record(rec: &csv::StringRecord) -> std::result::Result<ResultRow, String> {
    let n = HEADER.split(',').count();
    if rec.len() != n {
        return Err(format!("expected {n} columns, found {}", rec.len()));
    }
    let col = |i: usize| rec.get(i).unwrap_or("");
    fn num<T: std::str::FromStr>(name: &str, s: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("{name}: cannot parse '{s}'"))
    }
    let backend = col(0).to_string();
    if backend.is_empty() {
        return Err("backend is empty".into());
    }
    let lambda_used = match col(7) {
        NA => None,
        s => Some(num("lambda_used", s)?),
    };
    Ok(ResultRow {
        backend,
        method: col(1).parse().map_err(|e: Error| format!("method: {e}"))?,
        seed: num("seed", col(2))?,
        sequence_length: num("sequence_length", col(3))?,
        p_zero: num("p_zero", col(4))?,
        p_x: num("p_x", col(5))?,
        unitary_error: num("unitary_error", col(6))?,
        lambda_used,
        shots: num("shots", col(8))?,
        timestamp: DateTime::parse_from_rfc3339(col(9))
            .map_err(|e| format!("timestamp '{}': {e}", col(9)))?
            .with_timezone(&Utc),
    })
}

/// Sidecar describing how a CSV was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Canonical configuration text; the hash is computed over exactly this.
    pub config_text: String,
    pub config_hash: String,
    pub tool_version: String,
    pub created: DateTime<Utc>,
}

/// First 64 bits of SHA-256, as 16 hex digits.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(config_text: impl Into<String>, created: DateTime<Utc>) -> Self {
        let config_text = config_text.into();
        RunManifest {
            config_hash: config_hash(&config_text),
            config_text,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created,
        }
    }

    pub fn verify(&self) -> bool {
        config_hash(&self.config_text) == self.config_hash
    }

    /// `results.csv` → `results.csv.manifest`.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        let mut name = csv_path.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn to_text(&self) -> String {
        format!(
            "config_hash = {}\ntool_version = {}\ncreated = {}\n---\n{}",
            self.config_hash,
            self.tool_version,
            format_timestamp(&self.created),
            self.config_text
        )
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: &str| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let (head, body) = text.split_once("---\n").ok_or_else(|| err(1, "missing '---' separator"))?;
        let mut fields = BTreeMap::new();
        for (i, line) in head.lines().enumerate() {
            let (k, v) = line.split_once('=').ok_or_else(|| err(i + 1, "expected key = value"))?;
            fields.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let get = |k: &str| fields.get(k).ok_or_else(|| err(1, &format!("missing '{k}'")));
        let (line, created) = get("created")?;
        Ok(RunManifest {
            config_text: body.to_string(),
            config_hash: get("config_hash")?.1.clone(),
            tool_version: get("tool_version")?.1.clone(),
            created: DateTime::parse_from_rfc3339(created)
                .map_err(|e| err(*line, &format!("created: {e}")))?
                .with_timezone(&Utc),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Completeness {
    Complete,
    Partial,
}

impl Completeness {
    pub fn label(&self) -> &'static str {
        match self {
            Completeness::Complete => "complete",
            Completeness::Partial => "partial",
        }
    }
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Pass 1: one (backend, method, L) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub backend: String,
    pub method: ResetMethod,
    pub length: usize,
    pub n: usize,
    pub mean_p_zero: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_p_x: f64,
}

/// Pass 2: `backend − reference` over seeds present on every backend.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedComparison {
    pub method: ResetMethod,
    pub length: usize,
    pub reference: String,
    pub backend: String,
    pub n_tuples: usize,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecisionBin {
    BlindFavorable,
    MeasurementFavorable,
    Restricted,
}

impl DecisionBin {
    pub fn label(&self) -> &'static str {
        match self {
            DecisionBin::BlindFavorable => "blind-favorable",
            DecisionBin::MeasurementFavorable => "measurement-favorable",
            DecisionBin::Restricted => "restricted",
        }
    }

    fn from_reason(reason: DecisionReason) -> Self {
        match reason {
            DecisionReason::FasterAndClean => DecisionBin::BlindFavorable,
            DecisionReason::TooSlow => DecisionBin::MeasurementFavorable,
            DecisionReason::TooDirty | DecisionReason::RestrictLength => DecisionBin::Restricted,
        }
    }
}

impl fmt::Display for DecisionBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Pass 3: one (backend, L) cell of the decision map.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEntry {
    pub backend: String,
    pub length: usize,
    pub t_blind: f64,
    pub t_meas: f64,
    /// Mean blind-reset cleanliness.
    pub f_clean: f64,
    pub bin: DecisionBin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub f_req: f64,
    pub pass1: Vec<MethodSummary>,
    pub pass2: Vec<MatchedComparison>,
    pub pass3: Vec<BinEntry>,
    pub completeness: BTreeMap<String, Completeness>,
    /// Backends with no timing profile; they are left out of pass 3.
    pub unbinned: Vec<String>,
}

impl AggregateReport {
    pub fn summary(&self, backend: &str, method: ResetMethod, length: usize) -> Option<&MethodSummary> {
        self.pass1
            .iter()
            .find(|s| s.backend == backend && s.method == method && s.length == length)
    }
}

type Tuple = (ResetMethod, usize, u64);

/// Three-pass aggregation. `profiles` supplies timing for pass 3; backends
/// are matched by profile name, falling back to the built-in profiles.
pub fn aggregate(rows: &[ResultRow], profiles: &[PlatformProfile], f_req: f64) -> Result<AggregateReport> {
    if rows.is_empty() {
        return Err(Error::invalid("nothing to aggregate"));
    }
    if !(0.0..=1.0).contains(&f_req) {
        return Err(Error::invalid(format!("f_req = {f_req} outside [0, 1]")));
    }

    // keyed (backend, method, L) → seed → row, so input order never matters
    let mut cells: BTreeMap<(String, ResetMethod, usize), BTreeMap<u64, &ResultRow>> = BTreeMap::new();
    for r in rows {
        let by_seed = cells.entry((r.backend.clone(), r.method, r.sequence_length)).or_default();
        if by_seed.insert(r.seed, r).is_some() {
            return Err(Error::invalid(format!(
                "duplicate row for {} {} seed {} L={}",
                r.backend, r.method, r.seed, r.sequence_length
            )));
        }
    }

    let mut pass1 = Vec::with_capacity(cells.len());
    for ((backend, method, length), by_seed) in &cells {
        let p0: Vec<f64> = by_seed.values().map(|r| r.p_zero).collect();
        let px: Vec<f64> = by_seed.values().map(|r| r.p_x).collect();
        let key = [rng::label_key(backend), method_key(*method), *length as u64];
        let s = stats::summarize(&p0, &mut rng::stream(Domain::Bootstrap, &key))?;
        pass1.push(MethodSummary {
            backend: backend.clone(),
            method: *method,
            length: *length,
            n: s.n,
            mean_p_zero: s.mean,
            ci_lo: s.ci_lo,
            ci_hi: s.ci_hi,
            mean_p_x: stats::mean(&px),
        });
    }

    let mut tuples: BTreeMap<&str, BTreeMap<Tuple, f64>> = BTreeMap::new();
    for ((backend, method, length), by_seed) in &cells {
        let t = tuples.entry(backend.as_str()).or_default();
        for (seed, r) in by_seed {
            t.insert((*method, *length, *seed), r.p_zero);
        }
    }
    let union: BTreeSet<Tuple> = tuples.values().flat_map(|t| t.keys().copied()).collect();
    let multi = tuples.len() > 1;
    let completeness: BTreeMap<String, Completeness> = tuples
        .iter()
        .map(|(b, t)| {
            let c = if multi && t.len() == union.len() {
                Completeness::Complete
            } else {
                Completeness::Partial
            };
            (b.to_string(), c)
        })
        .collect();

    let mut pass2 = Vec::new();
    if multi {
        let shared: Vec<Tuple> = union
            .iter()
            .filter(|k| tuples.values().all(|t| t.contains_key(k)))
            .copied()
            .collect();
        let mut groups: BTreeMap<(ResetMethod, usize), Vec<u64>> = BTreeMap::new();
        for (m, l, s) in &shared {
            groups.entry((*m, *l)).or_default().push(*s);
        }
        let reference = *tuples.keys().next().expect("at least two backends");
        for ((method, length), seeds) in &groups {
            for (backend, t) in tuples.iter().filter(|(b, _)| **b != reference) {
                let deltas: Vec<f64> = seeds
                    .iter()
                    .map(|s| t[&(*method, *length, *s)] - tuples[reference][&(*method, *length, *s)])
                    .collect();
                pass2.push(MatchedComparison {
                    method: *method,
                    length: *length,
                    reference: reference.to_string(),
                    backend: backend.to_string(),
                    n_tuples: deltas.len(),
                    mean_delta: stats::mean(&deltas),
                });
            }
        }
    }

    let mut pass3 = Vec::new();
    let mut unbinned = Vec::new();
    for backend in tuples.keys() {
        let profile = profiles
            .iter()
            .find(|p| p.name.eq_ignore_ascii_case(backend))
            .cloned()
            .or_else(|| PlatformProfile::builtin(backend));
        let Some(profile) = profile else {
            unbinned.push(backend.to_string());
            continue;
        };
        for s in pass1
            .iter()
            .filter(|s| s.backend == *backend && s.method == ResetMethod::BlindReset)
        {
            let decision = latency::decide(s.length, s.mean_p_zero, f_req, &profile)?;
            pass3.push(BinEntry {
                backend: backend.to_string(),
                length: s.length,
                t_blind: latency::blind_latency(s.length, &profile),
                t_meas: latency::measurement_latency(&profile),
                f_clean: s.mean_p_zero,
                bin: DecisionBin::from_reason(decision.reason),
            });
        }
    }

    Ok(AggregateReport {
        f_req,
        pass1,
        pass2,
        pass3,
        completeness,
        unbinned,
    })
}

fn method_key(m: ResetMethod) -> u64 {
    ResetMethod::ALL.iter().position(|x| *x == m).unwrap_or(0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    MeasReset,
    BlindReset,
    RestrictL,
}

impl Policy {
    pub fn label(&self) -> &'static str {
        match self {
            Policy::MeasReset => "Meas-reset",
            Policy::BlindReset => "Blind reset",
            Policy::RestrictL => "Restrict L",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankStability {
    /// Method ordering agrees across epochs; a static map is enough.
    Stable,
    /// Ordering changed; switch at runtime.
    Unstable,
    SingleEpoch,
}

impl RankStability {
    pub fn label(&self) -> &'static str {
        match self {
            RankStability::Stable => "Static map",
            RankStability::Unstable => "Runtime switch",
            RankStability::SingleEpoch => "single-epoch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportingMode {
    Comparative,
    PerBackend,
}

impl ReportingMode {
    pub fn label(&self) -> &'static str {
        match self {
            ReportingMode::Comparative => "Comparative",
            ReportingMode::PerBackend => "Per-backend",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionEntry {
    pub backend: String,
    pub length: usize,
    pub timing_ok: bool,
    /// `None` when timing already ruled blind reset out.
    pub clean_ok: Option<bool>,
    pub policy: Policy,
    pub stability: RankStability,
    pub mode: ReportingMode,
}

/// Method ordering by mean cleanliness at one (backend, L).
fn ranking(report: &AggregateReport, backend: &str, length: usize) -> Vec<ResetMethod> {
    let mut cells: Vec<&MethodSummary> = report
        .pass1
        .iter()
        .filter(|s| s.backend == backend && s.length == length)
        .collect();
    cells.sort_by(|a, b| b.mean_p_zero.total_cmp(&a.mean_p_zero));
    cells.iter().map(|s| s.method).collect()
}

/// Evaluates the four conditions in order for every binned (backend, L).
/// `previous`, when given, is an earlier epoch used for rank stability.
pub fn decision_matrix(report: &AggregateReport, f_req: f64, previous: Option<&AggregateReport>) -> Vec<DecisionEntry> {
    report
        .pass3
        .iter()
        .map(|b| {
            let timing_ok = b.t_blind < b.t_meas;
            let clean_ok = timing_ok.then_some(b.f_clean >= f_req);
            let policy = match clean_ok {
                None => Policy::MeasReset,
                Some(true) => Policy::BlindReset,
                Some(false) => Policy::RestrictL,
            };
            let stability = match previous {
                None => RankStability::SingleEpoch,
                Some(prev) => {
                    let now = ranking(report, &b.backend, b.length);
                    let before = ranking(prev, &b.backend, b.length);
                    if !before.is_empty() && now == before {
                        RankStability::Stable
                    } else {
                        RankStability::Unstable
                    }
                }
            };
            let mode = match report.completeness.get(&b.backend) {
                Some(Completeness::Complete) => ReportingMode::Comparative,
                _ => ReportingMode::PerBackend,
            };
            DecisionEntry {
                backend: b.backend.clone(),
                length: b.length,
                timing_ok,
                clean_ok,
                policy,
                stability,
                mode,
            }
        })
        .collect()
}

pub fn render_decision_matrix(entries: &[DecisionEntry]) -> String {
    let mut out = format!(
        "{:<10} {:>3} {:>7} {:>9} {:<12} {:<15} {:<12}\n",
        "backend", "L", "Tb<Tm", "F>=Freq", "policy", "stability", "mode"
    );
    for e in entries {
        let clean = e.clean_ok.map_or("-", |c| if c { "yes" } else { "no" });
        out.push_str(&format!(
            "{:<10} {:>3} {:>7} {:>9} {:<12} {:<15} {:<12}\n",
            e.backend,
            e.length,
            if e.timing_ok { "yes" } else { "no" },
            clean,
            e.policy.label(),
            e.stability.label(),
            e.mode.label()
        ));
    }
    out
}

pub fn render_aggregate(report: &AggregateReport) -> String {
    let mut out = String::from("pass 1: per-backend method summaries\n");
    out.push_str(&format!(
        "{:<10} {:<18} {:>3} {:>4} {:>8} {:>17} {:>8}\n",
        "backend", "method", "L", "n", "p_zero", "95% CI", "p_x"
    ));
    for s in &report.pass1 {
        out.push_str(&format!(
            "{:<10} {:<18} {:>3} {:>4} {:>8.4} {:>17} {:>8.4}\n",
            s.backend,
            s.method.label(),
            s.length,
            s.n,
            s.mean_p_zero,
            format!("[{:.4}, {:.4}]", s.ci_lo, s.ci_hi),
            s.mean_p_x
        ));
    }
    out.push_str("\npass 2: matched-tuple deltas\n");
    if report.pass2.is_empty() {
        out.push_str("(none: fewer than two backends)\n");
    }
    for c in &report.pass2 {
        out.push_str(&format!(
            "{:<18} L={:<3} {} - {}: {:+.4} over {} tuples\n",
            c.method.label(),
            c.length,
            c.backend,
            c.reference,
            c.mean_delta,
            c.n_tuples
        ));
    }
    out.push_str(&format!("\npass 3: decision bins (f_req = {})\n", report.f_req));
    for b in &report.pass3 {
        out.push_str(&format!(
            "{:<10} L={:<3} F={:.4} {}\n",
            b.backend, b.length, b.f_clean, b.bin
        ));
    }
    out.push_str("\ncompleteness:");
    for (b, c) in &report.completeness {
        out.push_str(&format!(" {b}={c}"));
    }
    out.push('\n');
    for b in &report.unbinned {
        out.push_str(&format!("no timing profile for '{b}'; not binned\n"));
    }
    out
}
