//! Benchmark sweeps over backends × methods × seeds × lengths.
//!
//! Every cell draws from its own stream keyed by the cell coordinates, so the
//! output is identical for any worker count.

use std::collections::HashMap;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};
use rayon::prelude::*;

use crate::bench_io::{self, format_float, ResultRow, RowWriter, RunManifest};
use crate::config;
use crate::error::{Error, Result};
use crate::noise::PlatformProfile;
use crate::reset::{self, EnvelopeVerdict, LambdaFit, LambdaGrid, ResetMethod, ResetOutcome};
use crate::rng::{self, Domain};
use crate::stats::{self, HolmDecision, TestReport};
use crate::su2::{self, GateSequence};

pub const DEFAULT_SEEDS: RangeInclusive<u64> = 42..=91;
pub const DEFAULT_LENGTHS: [usize; 9] = [4, 6, 8, 10, 12, 14, 16, 18, 20];
pub const DEFAULT_SHOTS: u64 = 2048;

/// Called with (finished, total) as cells complete.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub backends: Vec<PlatformProfile>,
    pub methods: Vec<ResetMethod>,
    pub seeds: RangeInclusive<u64>,
    pub lengths: Vec<usize>,
    pub shots: u64,
    pub grid: LambdaGrid,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            backends: PlatformProfile::native(),
            methods: ResetMethod::ALL.to_vec(),
            seeds: DEFAULT_SEEDS,
            lengths: DEFAULT_LENGTHS.to_vec(),
            shots: DEFAULT_SHOTS,
            grid: LambdaGrid::BENCHMARK,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.backends.is_empty() || self.methods.is_empty() || self.lengths.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid("sweep needs at least one backend, method, seed and length"));
        }
        if self.lengths.contains(&0) {
            return Err(Error::invalid("sequence lengths must be >= 1"));
        }
        if self.shots == 0 {
            return Err(Error::invalid("shots must be >= 1"));
        }
        for p in &self.backends {
            p.validate()?;
        }
        LambdaGrid::new(self.grid.points, self.grid.min, self.grid.max)?;
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.backends.len() * self.methods.len() * self.lengths.len() * self.seeds.clone().count()
    }

    /// Everything that determines the rows, in a fixed order.
    pub fn canonical_text(&self) -> String {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.label()).collect();
        let lengths: Vec<String> = self.lengths.iter().map(|l| l.to_string()).collect();
        let mut out = format!(
            "methods = {}\nseeds = {}..{}\nlengths = {}\nshots = {}\ngrid = {} {:e} {:e}\n",
            methods.join(","),
            self.seeds.start(),
            self.seeds.end(),
            lengths.join(","),
            self.shots,
            self.grid.points,
            self.grid.min,
            self.grid.max
        );
        for p in &self.backends {
            out.push_str("\n[profile]\n");
            out.push_str(&config::profile_to_text(p));
        }
        out
    }
}

fn method_index(m: ResetMethod) -> u64 {
    ResetMethod::ALL.iter().position(|x| *x == m).unwrap_or(0) as u64
}

/// Shot stream for one cell.
pub fn cell_stream(backend: &str, method: ResetMethod, seed: u64, length: usize) -> rng::Stream {
    rng::stream(
        Domain::ShotsZ,
        &[rng::label_key(backend), method_index(method), seed, length as u64],
    )
}

/// Runs `f` on a pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// All cells in (backend, method, length, seed) order.
pub fn run_sweep(cfg: &SweepConfig, progress: Option<Progress>) -> Result<Vec<ResetOutcome>> {
    cfg.validate()?;
    let shapes: Vec<(u64, usize)> = cfg
        .lengths
        .iter()
        .flat_map(|&l| cfg.seeds.clone().map(move |s| (s, l)))
        .collect();
    let need_fit = cfg.methods.contains(&ResetMethod::BlindReset);
    let prepared: HashMap<(u64, usize), (GateSequence, Option<LambdaFit>)> = shapes
        .par_iter()
        .map(|&(s, l)| {
            let seq = su2::generate_sequence(s, l)?;
            let fit = if need_fit {
                Some(reset::optimize_lambda(&seq, cfg.grid)?)
            } else {
                None
            };
            Ok(((s, l), (seq, fit)))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(cfg.n_cells());
    for b in &cfg.backends {
        for &m in &cfg.methods {
            for &l in &cfg.lengths {
                for s in cfg.seeds.clone() {
                    cells.push((b, m, l, s));
                }
            }
        }
    }
    let done = AtomicUsize::new(0);
    let total = cells.len();
    cells
        .par_iter()
        .map(|&(profile, method, l, s)| {
            let (seq, fit) = &prepared[&(s, l)];
            let mut stream = cell_stream(&profile.name, method, s, l);
            let out = reset::run_reset_cycle(seq, method, profile, cfg.shots, fit.as_ref(), &mut stream);
            if let Some(report) = progress {
                report(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            }
            out
        })
        .collect()
}

/// Writes the manifest sidecar, then the rows, all stamped with `now`.
pub fn write_sweep(cfg: &SweepConfig, outcomes: &[ResetOutcome], csv_path: &Path, now: DateTime<Utc>) -> Result<RunManifest> {
    let manifest = RunManifest::new(cfg.canonical_text(), now);
    manifest.write(&RunManifest::sidecar_path(csv_path))?;
    let rows: Vec<ResultRow> = outcomes.iter().map(|o| ResultRow::from_outcome(o, now)).collect();
    bench_io::write_rows(&rows, csv_path)?;
    Ok(manifest)
}

/// Writes rows to any sink.
pub fn write_outcomes<W: Write>(out: W, outcomes: &[ResetOutcome], now: DateTime<Utc>) -> std::result::Result<W, csv::Error> {
    let mut w = RowWriter::new(out)?;
    for o in outcomes {
        w.write(&ResultRow::from_outcome(o, now))?;
    }
    w.finish()
}

/// Mean p_zero of one method on one profile over a seed range.
pub fn live_cleanliness(profile: &PlatformProfile, method: ResetMethod, length: usize, seeds: RangeInclusive<u64>, shots: u64) -> Result<f64> {
    let cfg = SweepConfig {
        backends: vec![profile.clone()],
        methods: vec![method],
        seeds,
        lengths: vec![length],
        shots,
        grid: LambdaGrid::BENCHMARK,
    };
    let rows = run_sweep(&cfg, None)?;
    Ok(stats::mean(&rows.iter().map(|r| r.p_zero).collect::<Vec<_>>()))
}

/// Per-seed p_zero of `method` on `backend` at `length`, ordered by seed.
pub fn p_zero_by_seed(outcomes: &[ResetOutcome], backend: &str, method: ResetMethod, length: usize) -> Vec<(u64, f64)> {
    let mut v: Vec<(u64, f64)> = outcomes
        .iter()
        .filter(|o| o.backend == backend && o.method == method && o.sequence_length == length)
        .map(|o| (o.seed, o.p_zero))
        .collect();
    v.sort_by_key(|x| x.0);
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedComparison {
    pub length: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub report: TestReport,
    pub holm: HolmDecision,
}

/// Paired `a − b` tests per length on matched seeds, Holm-adjusted across lengths.
pub fn paired_comparisons(
    outcomes: &[ResetOutcome],
    backend: &str,
    a: ResetMethod,
    b: ResetMethod,
    lengths: &[usize],
) -> Result<Vec<PairedComparison>> {
    let mut partial = Vec::new();
    for &l in lengths {
        let xa: HashMap<u64, f64> = p_zero_by_seed(outcomes, backend, a, l).into_iter().collect();
        let mut pa = Vec::new();
        let mut pb = Vec::new();
        for (s, v) in p_zero_by_seed(outcomes, backend, b, l) {
            if let Some(x) = xa.get(&s) {
                pa.push(*x);
                pb.push(v);
            }
        }
        let report = stats::paired_test(&pa, &pb)?;
        partial.push((l, stats::mean(&pa), stats::mean(&pb), report));
    }
    let holm = stats::holm_bonferroni(&partial.iter().map(|p| p.3.p_value).collect::<Vec<_>>(), stats::DEFAULT_ALPHA)?;
    Ok(partial
        .into_iter()
        .zip(holm)
        .map(|((length, mean_a, mean_b, report), holm)| PairedComparison {
            length,
            mean_a,
            mean_b,
            report,
            holm,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeScreen {
    pub blind_rows: usize,
    pub violations: usize,
    pub max_excess: f64,
}

impl EnvelopeScreen {
    pub fn fraction(&self) -> f64 {
        if self.blind_rows == 0 {
            0.0
        } else {
            self.violations as f64 / self.blind_rows as f64
        }
    }
}

/// Screens every blind row against the envelope of its backend's gate error.
pub fn envelope_screen(outcomes: &[ResetOutcome], profiles: &[PlatformProfile], margin: f64) -> Result<EnvelopeScreen> {
    let mut screen = EnvelopeScreen {
        blind_rows: 0,
        violations: 0,
        max_excess: 0.0,
    };
    for o in outcomes.iter().filter(|o| o.method == ResetMethod::BlindReset) {
        let p = profiles
            .iter()
            .find(|p| p.name == o.backend)
            .ok_or_else(|| Error::invalid(format!("no profile for backend '{}'", o.backend)))?;
        screen.blind_rows += 1;
        if let EnvelopeVerdict::Violation(x) = reset::envelope_check(o, p.gate_error_p, margin)? {
            screen.violations += 1;
            screen.max_excess = screen.max_excess.max(x);
        }
    }
    Ok(screen)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || n == 0 {
        return Err(Error::invalid(format!("log grid needs 0 < lo <= hi and n >= 1 (lo={lo}, hi={hi}, n={n})")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceConfig {
    /// Other parameters come from here.
    pub base: PlatformProfile,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub length: usize,
    pub seeds: RangeInclusive<u64>,
    pub shots: u64,
}

impl Default for CoherenceConfig {
    /// 8 × 8 log grid, T1 on [0.1, 100] µs and T2 on [0.05, 50] µs; L = 8,
    /// 10 seeds, 2048 shots, IQM gate and readout errors.
    fn default() -> Self {
        CoherenceConfig {
            base: PlatformProfile::iqm(),
            t1: log_grid(0.1e-6, 100e-6, 8).expect("static grid"),
            t2: log_grid(0.05e-6, 50e-6, 8).expect("static grid"),
            length: 8,
            seeds: 42..=51,
            shots: DEFAULT_SHOTS,
        }
    }
}

impl CoherenceConfig {
    pub fn canonical_text(&self) -> String {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        format!(
            "t1 = {}\nt2 = {}\nlength = {}\nseeds = {}..{}\nshots = {}\n\n[profile]\n{}",
            fmt(&self.t1),
            fmt(&self.t2),
            self.length,
            self.seeds.start(),
            self.seeds.end(),
            self.shots,
            config::profile_to_text(&self.base)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCell {
    pub t1: f64,
    pub t2: f64,
    /// False when `T2 > 2·T1`; such cells are not simulated.
    pub physical: bool,
    pub blind_p_zero: Option<f64>,
    pub no_reset_p_zero: Option<f64>,
}

impl CoherenceCell {
    pub fn advantage(&self) -> Option<f64> {
        Some(self.blind_p_zero? - self.no_reset_p_zero?)
    }
}

/// Blind vs no-reset cleanliness across the (T1, T2) plane.
pub fn coherence_sweep(cfg: &CoherenceConfig, progress: Option<Progress>) -> Result<Vec<CoherenceCell>> {
    if cfg.t1.is_empty() || cfg.t2.is_empty() {
        return Err(Error::invalid("coherence grid is empty"));
    }
    let fits: Vec<(GateSequence, LambdaFit)> = cfg
        .seeds
        .clone()
        .map(|s| {
            let seq = su2::generate_sequence(s, cfg.length)?;
            let fit = reset::optimize_lambda(&seq, LambdaGrid::BENCHMARK)?;
            Ok((seq, fit))
        })
        .collect::<Result<_>>()?;
    let grid: Vec<(f64, f64)> = cfg.t1.iter().flat_map(|&a| cfg.t2.iter().map(move |&b| (a, b))).collect();
    let done = AtomicUsize::new(0);
    grid.par_iter()
        .map(|&(t1, t2)| {
            let physical = t2 <= 2.0 * t1;
            let mut cell = CoherenceCell {
                t1,
                t2,
                physical,
                blind_p_zero: None,
                no_reset_p_zero: None,
            };
            if physical {
                let profile = PlatformProfile {
                    t1,
                    t2,
                    ..cfg.base.clone()
                };
                let mut means = [0.0; 2];
                for (slot, method) in [ResetMethod::BlindReset, ResetMethod::NoReset].into_iter().enumerate() {
                    let mut acc = Vec::with_capacity(fits.len());
                    for (seq, fit) in &fits {
                        let mut stream = rng::stream(
                            Domain::ShotsZ,
                            &[t1.to_bits(), t2.to_bits(), method_index(method), seq.seed()],
                        );
                        let o = reset::run_reset_cycle(seq, method, &profile, cfg.shots, Some(fit), &mut stream)?;
                        acc.push(o.p_zero);
                    }
                    means[slot] = stats::mean(&acc);
                }
                cell.blind_p_zero = Some(means[0]);
                cell.no_reset_p_zero = Some(means[1]);
            }
            if let Some(report) = progress {
                report(done.fetch_add(1, Ordering::Relaxed) + 1, grid.len());
            }
            Ok(cell)
        })
        .collect()
}

pub const COHERENCE_HEADER: [&str; 6] = ["t1", "t2", "physical", "blind_p_zero", "no_reset_p_zero", "advantage"];

pub fn write_coherence_csv<W: Write>(out: W, cells: &[CoherenceCell]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COHERENCE_HEADER)?;
    let opt = |x: Option<f64>| x.map_or_else(|| bench_io::NA.to_string(), format_float);
    for c in cells {
        w.write_record([
            format_float(c.t1),
            format_float(c.t2),
            c.physical.to_string(),
            opt(c.blind_p_zero),
            opt(c.no_reset_p_zero),
            opt(c.advantage()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
