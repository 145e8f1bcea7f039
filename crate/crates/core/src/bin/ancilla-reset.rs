//! Batch front-end. Tables go to stdout, progress to stderr.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};

use ancilla_reset::bench_io::{self, RunManifest};
use ancilla_reset::config::{self, KeyValues};
use ancilla_reset::latency;
use ancilla_reset::noise::PlatformProfile;
use ancilla_reset::qec::{self, threshold, Decoder, RepCodeConfig};
use ancilla_reset::reset::{LambdaGrid, ResetMethod};
use ancilla_reset::sweep::{self, CoherenceConfig, SweepConfig};
use ancilla_reset::{landscape, Error, Result};

#[derive(Parser)]
#[command(name = "ancilla-reset", version, about = "Blind ancilla reset simulator and policy toolkit")]
#[command(args_override_self = true)]
struct Cli {
    /// key = value file; its entries override flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cleanliness sweep over backends × methods × seeds × lengths.
    Sweep(SweepArgs),
    /// Crossover table and external-feedback sweep.
    Latency(LatencyArgs),
    /// Decoder-coupled logical-error curves.
    Qec(QecArgs),
    /// λ-landscape curvature and basin classes.
    Landscape(LandscapeArgs),
    /// Normalized threshold extrapolation.
    Threshold(ThresholdArgs),
    /// Blind vs no-reset advantage over the (T1, T2) plane.
    T1t2(T1t2Args),
    /// Three-pass aggregation of a benchmark CSV.
    Aggregate(AggregateArgs),
    /// Deployment decision for one configuration or a whole benchmark CSV.
    Decide(DecideArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in names (iqm, rigetti, ionq, nvqlink) or profile files.
    #[arg(long, default_value = "iqm,rigetti,ionq")]
    backends: String,
    #[arg(long, default_value = "no_reset,measurement_reset,blind_reset")]
    methods: String,
    #[arg(long, default_value = "42..91")]
    seeds: String,
    #[arg(long, default_value = "4..20:2")]
    lengths: String,
    #[arg(long, default_value_t = 2048)]
    shots: u64,
    /// λ grid points on [0.1, 4.0].
    #[arg(long, default_value_t = 40)]
    grid_points: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct LatencyArgs {
    #[arg(long, default_value = "iqm,rigetti,ionq,nvqlink")]
    profiles: String,
    /// Replace the external feedback term of every profile.
    #[arg(long)]
    t_ext: Option<String>,
    /// Profile swept over external feedback.
    #[arg(long, default_value = "iqm")]
    sweep_profile: String,
    #[arg(long, default_value = "10us")]
    sweep_max: String,
    #[arg(long, default_value = "100ns")]
    sweep_step: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QecArgs {
    #[arg(long, default_value = "3,5")]
    distances: String,
    #[arg(long, default_value_t = 20)]
    cycles: usize,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long, default_value = "measurement_reset,blind_reset,no_reset")]
    policies: String,
    #[arg(long, default_value = "majority_vote,mwpm_proxy")]
    decoders: String,
    /// Sequence length whose blind cleanliness feeds the syndrome noise.
    #[arg(long, default_value_t = 4)]
    blind_length: usize,
    /// Number of seeds, starting at 42.
    #[arg(long, default_value_t = 50)]
    seeds: usize,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    /// Take cleanliness from a reset simulation on --profile instead of the fixed mapping.
    #[arg(long)]
    live: bool,
    #[arg(long, default_value = "iqm")]
    profile: String,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long, default_value = "42..91")]
    seeds: String,
    #[arg(long, default_value = "4..20:2")]
    lengths: String,
    #[arg(long, default_value_t = 200)]
    grid_points: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long, default_value_t = threshold::DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = threshold::DEFAULT_P_TH)]
    p_th: f64,
    #[arg(long, default_value = "3,5,7")]
    distances: String,
    /// label=f_clean pairs; the first is the normalization anchor.
    #[arg(long, default_value = "measurement_reset=0.98,blind_reset=0.88,no_reset=0.70")]
    rows: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct T1t2Args {
    /// Source of gate and readout parameters.
    #[arg(long, default_value = "iqm")]
    profile: String,
    #[arg(long, default_value_t = 8)]
    grid: usize,
    #[arg(long, default_value = "0.1us")]
    t1_min: String,
    #[arg(long, default_value = "100us")]
    t1_max: String,
    #[arg(long, default_value = "0.05us")]
    t2_min: String,
    #[arg(long, default_value = "50us")]
    t2_max: String,
    #[arg(long, default_value_t = 8)]
    length: usize,
    #[arg(long, default_value = "42..51")]
    seeds: String,
    #[arg(long, default_value_t = 2048)]
    shots: u64,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Benchmark CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.75)]
    f_req: f64,
    /// Profile files for backends that are not built in.
    #[arg(long)]
    profiles: Option<String>,
    /// Directory for aggregate.csv and its manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    /// Benchmark CSV; gives the full decision matrix.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Earlier epoch of the same benchmark, for rank stability.
    #[arg(long)]
    previous: Option<PathBuf>,
    #[arg(long, default_value_t = 0.75)]
    f_req: f64,
    #[arg(long)]
    profiles: Option<String>,
    /// Single decision: sequence length.
    #[arg(long)]
    length: Option<usize>,
    /// Single decision: ancilla cleanliness.
    #[arg(long)]
    f_clean: Option<f64>,
    #[arg(long, default_value = "iqm")]
    profile: String,
    /// Directory for decisions.csv and its manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv = match with_config_overrides(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = sweep::with_workers(cli.workers, || run(cli.command)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_io() { 2 } else { 1 })
}

/// Appends `--key=value` for every entry of the `--config` file so that it
/// wins over flags given on the command line.
fn with_config_overrides(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let pos = argv.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(argv) };
    let arg = argv[pos].to_string_lossy().into_owned();
    let path = match arg.strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(
            argv.get(pos + 1)
                .ok_or_else(|| Error::InvalidArgument("--config needs a file".into()))?,
        ),
    };
    let kv = KeyValues::load(&path)?;
    for key in kv.keys() {
        let value = kv.raw(key).unwrap_or_default();
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            "true" => argv.push(flag.into()),
            "false" => {}
            v => argv.push(format!("{flag}={v}").into()),
        }
    }
    Ok(argv)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Latency(a) => cmd_latency(a),
        Command::Qec(a) => cmd_qec(a),
        Command::Landscape(a) => cmd_landscape(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::T1t2(a) => cmd_t1t2(a),
        Command::Aggregate(a) => cmd_aggregate(a),
        Command::Decide(a) => cmd_decide(a),
    }
}

fn flag<T>(name: &str, value: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    parse(value).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("--{name}: {m}")),
        other => other,
    })
}

fn profiles(list: &str) -> Result<Vec<PlatformProfile>> {
    config::parse_names(list).iter().map(|s| config::resolve_profile(s)).collect()
}

fn methods(list: &str) -> Result<Vec<ResetMethod>> {
    config::parse_names(list).iter().map(|s| s.parse()).collect()
}

fn seeds(value: &str) -> Result<RangeInclusive<u64>> {
    flag("seeds", value, config::parse_seed_range)
}

fn progress(label: &'static str) -> impl Fn(usize, usize) + Sync {
    move |done, total| {
        let step = (total / 10).max(1);
        if done % step == 0 || done == total {
            eprintln!("{label}: {done}/{total}");
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn csv_io(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_manifest(csv_path: &Path, canonical: String) -> Result<()> {
    RunManifest::new(canonical, Utc::now()).write(&RunManifest::sidecar_path(csv_path))
}

fn print(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes()).map_err(|e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let cfg = SweepConfig {
        backends: profiles(&a.backends)?,
        methods: methods(&a.methods)?,
        seeds: seeds(&a.seeds)?,
        lengths: flag("lengths", &a.lengths, config::parse_usize_list)?,
        shots: a.shots,
        grid: LambdaGrid::new(a.grid_points, LambdaGrid::BENCHMARK.min, LambdaGrid::BENCHMARK.max)?,
    };
    cfg.validate()?;
    create_dir(&a.out)?;
    let path = a.out.join("results.csv");
    eprintln!("sweep: {} cells -> {}", cfg.n_cells(), path.display());
    let outcomes = sweep::run_sweep(&cfg, Some(&progress("sweep")))?;
    let manifest = sweep::write_sweep(&cfg, &outcomes, &path, Utc::now())?;
    eprintln!("config hash {}", manifest.config_hash);

    let mut table = format!("{:<10} {:<18}", "backend", "method");
    for l in &cfg.lengths {
        table.push_str(&format!(" {:>6}", format!("L={l}")));
    }
    table.push('\n');
    for b in &cfg.backends {
        for &m in &cfg.methods {
            table.push_str(&format!("{:<10} {:<18}", b.name, m.label()));
            for &l in &cfg.lengths {
                let v: Vec<f64> = sweep::p_zero_by_seed(&outcomes, &b.name, m, l).iter().map(|x| x.1).collect();
                table.push_str(&format!(" {:>6.3}", ancilla_reset::stats::mean(&v)));
            }
            table.push('\n');
        }
    }
    let screen = sweep::envelope_screen(&outcomes, &cfg.backends, ancilla_reset::reset::DEFAULT_ENVELOPE_MARGIN)?;
    table.push_str(&format!(
        "\nenvelope: {}/{} blind rows exceed the bound by more than {} (max excess {:.3})\n",
        screen.violations,
        screen.blind_rows,
        ancilla_reset::reset::DEFAULT_ENVELOPE_MARGIN,
        screen.max_excess
    ));
    print(&table)
}

fn cmd_latency(a: LatencyArgs) -> Result<()> {
    let mut list = profiles(&a.profiles)?;
    if let Some(t) = &a.t_ext {
        let t = flag("t-ext", t, config::parse_duration)?;
        list = list.iter().map(|p| p.with_t_ext(t)).collect();
    }
    let rows = latency::crossover_table(&list)?;
    print(&latency::render_crossover_table(&rows))?;

    let base = config::resolve_profile(&a.sweep_profile)?;
    let max = flag("sweep-max", &a.sweep_max, config::parse_duration)?;
    let step = flag("sweep-step", &a.sweep_step, config::parse_duration)?;
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("--sweep-step must be > 0".into()));
    }
    let n = (max / step).round() as usize;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let sweep = latency::ext_sweep(&base, &ts)?;

    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let canonical = format!(
            "profiles = {}\nt_ext = {}\nsweep_profile = {}\nsweep_max = {}\nsweep_step = {}\n",
            a.profiles,
            a.t_ext.as_deref().unwrap_or("profile"),
            a.sweep_profile,
            a.sweep_max,
            a.sweep_step
        );
        let path = dir.join("latency.csv");
        let mut w = csv::Writer::from_writer(create_file(&path)?);
        w.write_record(["profile", "t_gate", "t_meas", "l_star", "ratio"]).map_err(csv_io(&path))?;
        for r in &rows {
            w.write_record([
                r.profile.clone(),
                bench_io::format_float(r.t_gate),
                bench_io::format_float(r.t_meas),
                r.l_star.to_string(),
                r.ratio.map_or_else(|| bench_io::NA.to_string(), bench_io::format_float),
            ])
            .map_err(csv_io(&path))?;
        }
        w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_manifest(&path, canonical.clone())?;

        let path = dir.join("ext_sweep.csv");
        let mut w = csv::Writer::from_writer(create_file(&path)?);
        w.write_record(["profile", "t_ext", "l_star"]).map_err(csv_io(&path))?;
        for (t, l) in &sweep {
            w.write_record([base.name.clone(), bench_io::format_float(*t), l.to_string()])
                .map_err(csv_io(&path))?;
        }
        w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_manifest(&path, canonical)?;
        eprintln!("wrote {}", dir.display());
    } else {
        let last = sweep.last().expect("sweep has at least one point");
        print(&format!(
            "\n{}: L* = {} at t_ext = 0, {} at t_ext = {}\n",
            base.name,
            sweep[0].1,
            last.1,
            latency::format_duration(last.0)
        ))?;
    }
    Ok(())
}

fn cmd_qec(a: QecArgs) -> Result<()> {
    let distances = flag("distances", &a.distances, config::parse_usize_list)?;
    let policies = methods(&a.policies)?;
    let decoders: Vec<Decoder> = config::parse_names(&a.decoders)
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let live_profile = if a.live { Some(config::resolve_profile(&a.profile)?) } else { None };

    let mut cleanliness = Vec::new();
    for &m in &policies {
        let f = match &live_profile {
            None => qec::fixed_cleanliness(m, a.blind_length)?,
            Some(p) => {
                eprintln!("qec: live cleanliness for {} on {}", m.label(), p.name);
                sweep::live_cleanliness(p, m, a.blind_length, sweep::DEFAULT_SEEDS, sweep::DEFAULT_SHOTS)?
            }
        };
        cleanliness.push((m, f));
    }
    // validate every configuration before the long runs
    let mut configs = Vec::new();
    for &dec in &decoders {
        for &d in &distances {
            for &(m, f) in &cleanliness {
                let mut cfg = RepCodeConfig::new(d, a.cycles, a.p, m, f)?
                    .with_decoder(dec)
                    .with_samples(a.seeds, a.shots);
                cfg.validate()?;
                cfg.seed_base = 42;
                configs.push(cfg);
            }
        }
    }

    create_dir(&a.out)?;
    let mut table = format!(
        "{:<14} {:>2} {:<18} {:>6} {:>9} {:>21}\n",
        "decoder", "d", "policy", "f", "p_L", "95% CI"
    );
    let mut by_decoder: Vec<(Decoder, Vec<qec::QecRunResult>)> = decoders.iter().map(|d| (*d, Vec::new())).collect();
    for (i, cfg) in configs.iter().enumerate() {
        eprintln!(
            "qec: [{}/{}] {} d={} {}",
            i + 1,
            configs.len(),
            cfg.decoder,
            cfg.distance,
            cfg.method.label()
        );
        let run = qec::logical_error_curve(cfg)?;
        let p = run.final_point();
        table.push_str(&format!(
            "{:<14} {:>2} {:<18} {:>6.3} {:>9.5} {:>21}\n",
            cfg.decoder.label(),
            cfg.distance,
            cfg.method.label(),
            cfg.f_clean,
            p.logical_error,
            format!("[{:.5}, {:.5}]", p.ci_lo, p.ci_hi)
        ));
        by_decoder
            .iter_mut()
            .find(|(d, _)| *d == cfg.decoder)
            .expect("decoder listed")
            .1
            .push(run);
    }
    for (dec, runs) in &by_decoder {
        let path = a.out.join(format!("qec_{}.csv", dec.label()));
        qec::write_curve_csv(create_file(&path)?, runs).map_err(csv_io(&path))?;
        let canonical = format!(
            "decoder = {}\ndistances = {}\ncycles = {}\np = {:e}\npolicies = {}\nseeds = {}\nshots = {}\nlive = {}\n",
            dec,
            a.distances,
            a.cycles,
            a.p,
            cleanliness
                .iter()
                .map(|(m, f)| format!("{}={f:e}", m.label()))
                .collect::<Vec<_>>()
                .join(","),
            a.seeds,
            a.shots,
            a.live
        );
        write_manifest(&path, canonical)?;
    }
    print(&table)
}

fn cmd_landscape(a: LandscapeArgs) -> Result<()> {
    let seeds = seeds(&a.seeds)?;
    let lengths = flag("lengths", &a.lengths, config::parse_usize_list)?;
    let grid = LambdaGrid::new(a.grid_points, LambdaGrid::LANDSCAPE.min, LambdaGrid::LANDSCAPE.max)?;
    eprintln!("landscape: {} cells", lengths.len() * seeds.clone().count());
    let report = landscape::landscape_report(seeds.clone(), &lengths, grid)?;
    create_dir(&a.out)?;
    let path = a.out.join("landscape.csv");
    landscape::write_csv(create_file(&path)?, &report.cells).map_err(csv_io(&path))?;
    write_manifest(
        &path,
        format!(
            "seeds = {}..{}\nlengths = {}\ngrid_points = {}\n",
            seeds.start(),
            seeds.end(),
            a.lengths,
            a.grid_points
        ),
    )?;
    print(&landscape::render_report(&report))
}

fn cmd_threshold(a: ThresholdArgs) -> Result<()> {
    let distances = flag("distances", &a.distances, config::parse_usize_list)?;
    let rows: Vec<(String, f64)> = config::parse_names(&a.rows)
        .iter()
        .map(|pair| {
            let (label, f) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("--rows: expected label=f_clean, got '{pair}'")))?;
            Ok((label.trim().to_string(), flag("rows", f, config::parse_f64)?))
        })
        .collect::<Result<_>>()?;
    let table = threshold::threshold_table(a.p, a.eta, a.p_th, &rows, &distances)?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let path = dir.join("threshold.csv");
        let mut w = csv::Writer::from_writer(create_file(&path)?);
        let mut header = vec!["policy".to_string(), "f_clean".into(), "p_eff".into()];
        header.extend(distances.iter().map(|d| format!("d{d}")));
        w.write_record(&header).map_err(csv_io(&path))?;
        for r in &table {
            let mut rec = vec![r.label.clone(), bench_io::format_float(r.f_clean), bench_io::format_float(r.p_eff)];
            rec.extend(r.normalized.iter().map(|(_, v)| bench_io::format_float(*v)));
            w.write_record(&rec).map_err(csv_io(&path))?;
        }
        w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_manifest(
            &path,
            format!(
                "p = {}\neta = {}\np_th = {}\ndistances = {}\nrows = {}\n",
                a.p, a.eta, a.p_th, a.distances, a.rows
            ),
        )?;
    }
    print(&threshold::render_threshold_table(&table))
}

fn cmd_t1t2(a: T1t2Args) -> Result<()> {
    let dur = |name: &str, v: &str| flag(name, v, config::parse_duration);
    let cfg = CoherenceConfig {
        base: config::resolve_profile(&a.profile)?,
        t1: sweep::log_grid(dur("t1-min", &a.t1_min)?, dur("t1-max", &a.t1_max)?, a.grid)?,
        t2: sweep::log_grid(dur("t2-min", &a.t2_min)?, dur("t2-max", &a.t2_max)?, a.grid)?,
        length: a.length,
        seeds: seeds(&a.seeds)?,
        shots: a.shots,
    };
    let cells = sweep::coherence_sweep(&cfg, Some(&progress("t1t2")))?;
    create_dir(&a.out)?;
    let path = a.out.join("t1t2.csv");
    sweep::write_coherence_csv(create_file(&path)?, &cells).map_err(csv_io(&path))?;
    write_manifest(&path, cfg.canonical_text())?;

    let adv: Vec<f64> = cells.iter().filter_map(|c| c.advantage()).collect();
    let positive = adv.iter().filter(|&&x| x > 0.0).count();
    let min = adv.iter().copied().fold(f64::INFINITY, f64::min);
    let mut text = format!("{:>10}", "T1 \\ T2");
    for t2 in &cfg.t2 {
        text.push_str(&format!(" {:>9}", latency::format_duration(*t2)));
    }
    text.push('\n');
    for t1 in &cfg.t1 {
        text.push_str(&format!("{:>10}", latency::format_duration(*t1)));
        for c in cells.iter().filter(|c| c.t1 == *t1) {
            text.push_str(&c.advantage().map_or_else(|| format!(" {:>9}", "-"), |x| format!(" {:>+9.3}", x)));
        }
        text.push('\n');
    }
    text.push_str(&format!(
        "\nadvantage > 0 on {positive}/{} physical cells (min {min:+.4})\n",
        adv.len()
    ));
    print(&text)
}

fn extra_profiles(list: &Option<String>) -> Result<Vec<PlatformProfile>> {
    match list {
        None => Ok(Vec::new()),
        Some(l) => profiles(l),
    }
}

fn cmd_aggregate(a: AggregateArgs) -> Result<()> {
    let rows = bench_io::read_rows(&a.input)?;
    let report = bench_io::aggregate(&rows, &extra_profiles(&a.profiles)?, a.f_req)?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let path = dir.join("aggregate.csv");
        let mut w = csv::Writer::from_writer(create_file(&path)?);
        w.write_record(["backend", "method", "sequence_length", "n", "mean_p_zero", "ci_lo", "ci_hi", "mean_p_x"])
            .map_err(csv_io(&path))?;
        for s in &report.pass1 {
            w.write_record([
                s.backend.clone(),
                s.method.label().to_string(),
                s.length.to_string(),
                s.n.to_string(),
                bench_io::format_float(s.mean_p_zero),
                bench_io::format_float(s.ci_lo),
                bench_io::format_float(s.ci_hi),
                bench_io::format_float(s.mean_p_x),
            ])
            .map_err(csv_io(&path))?;
        }
        w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_manifest(&path, input_canonical(&[&a.input], a.f_req, &a.profiles)?)?;
    }
    print(&bench_io::render_aggregate(&report))
}

/// Manifest text for commands that read benchmark files: their names and content hashes.
fn input_canonical(inputs: &[&Path], f_req: f64, profiles: &Option<String>) -> Result<String> {
    let mut text = format!("f_req = {f_req}\nprofiles = {}\n", profiles.as_deref().unwrap_or(""));
    for input in inputs {
        let body = fs::read_to_string(input).map_err(|e| Error::Io {
            path: input.to_path_buf(),
            source: e,
        })?;
        let name = input.file_name().map_or_else(|| input.display().to_string(), |n| n.to_string_lossy().into_owned());
        text.push_str(&format!("input = {name} {}\n", bench_io::config_hash(&body)));
    }
    Ok(text)
}

fn cmd_decide(a: DecideArgs) -> Result<()> {
    if let Some(input) = &a.input {
        let extra = extra_profiles(&a.profiles)?;
        let report = bench_io::aggregate(&bench_io::read_rows(input)?, &extra, a.f_req)?;
        let previous = match &a.previous {
            Some(p) => Some(bench_io::aggregate(&bench_io::read_rows(p)?, &extra, a.f_req)?),
            None => None,
        };
        let matrix = bench_io::decision_matrix(&report, a.f_req, previous.as_ref());
        if let Some(dir) = &a.out {
            create_dir(dir)?;
            let path = dir.join("decisions.csv");
            let mut w = csv::Writer::from_writer(create_file(&path)?);
            w.write_record(["backend", "sequence_length", "timing_ok", "clean_ok", "policy", "stability", "mode"])
                .map_err(csv_io(&path))?;
            for e in &matrix {
                w.write_record([
                    e.backend.clone(),
                    e.length.to_string(),
                    e.timing_ok.to_string(),
                    e.clean_ok.map_or_else(|| bench_io::NA.to_string(), |c| c.to_string()),
                    e.policy.label().to_string(),
                    e.stability.label().to_string(),
                    e.mode.label().to_string(),
                ])
                .map_err(csv_io(&path))?;
            }
            w.flush().map_err(|e| Error::Io { path: path.clone(), source: e })?;
            let mut inputs = vec![input.as_path()];
            inputs.extend(a.previous.as_deref());
            write_manifest(&path, input_canonical(&inputs, a.f_req, &a.profiles)?)?;
        }
        return print(&bench_io::render_decision_matrix(&matrix));
    }
    let (Some(length), Some(f_clean)) = (a.length, a.f_clean) else {
        return Err(Error::InvalidArgument(
            "decide needs --input, or both --length and --f-clean".into(),
        ));
    };
    let profile = config::resolve_profile(&a.profile)?;
    let d = latency::decide(length, f_clean, a.f_req, &profile)?;
    let lb = latency::LatencyBreakdown::new(length, &profile);
    print(&format!(
        "{}: L={length} T_blind={} T_meas={} F={f_clean} F_req={} -> {} ({})\n",
        profile.name,
        latency::format_duration(lb.t_blind),
        latency::format_duration(lb.t_meas),
        a.f_req,
        d.chosen.label(),
        d.reason
    ))
}
