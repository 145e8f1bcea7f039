//! Distance-d bit-flip repetition code under phenomenological noise.
//!
//! Each cycle flips every data bit with `p_phys`, then records the `d − 1`
//! neighbour parities with record noise set by the ancilla cleanliness. The
//! logical bit is read out transversally after any number of cycles.

pub mod matching;
pub mod threshold;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reset::ResetMethod;
use crate::rng::{self, Domain};
use crate::stats;

pub use matching::{mwpm_proxy_decode, MatchingDecoder, MatchingOutcome};
pub use threshold::{effective_error, threshold_table, ThresholdRow, DEFAULT_ETA, DEFAULT_P_TH};

/// Extra record-flip probability per unit of ancilla dirt.
pub const SYNDROME_NOISE_SCALE: f64 = 0.3;

/// Fixed cleanliness used for measurement reset in decoder runs.
pub const MEASUREMENT_RESET_CLEANLINESS: f64 = 0.99;
/// Fixed cleanliness used for the no-reset baseline in decoder runs.
pub const NO_RESET_CLEANLINESS: f64 = 0.50;
/// Mean IQM blind-reset cleanliness at the tabulated sequence lengths.
pub const BLIND_CLEANLINESS_BY_LENGTH: [(usize, f64); 5] = [(4, 0.880), (8, 0.767), (12, 0.706), (16, 0.655), (20, 0.709)];

/// Fixed cleanliness for a reset policy; blind reset needs one of the tabulated lengths.
pub fn fixed_cleanliness(method: ResetMethod, length: usize) -> Result<f64> {
    match method {
        ResetMethod::MeasurementReset => Ok(MEASUREMENT_RESET_CLEANLINESS),
        ResetMethod::NoReset => Ok(NO_RESET_CLEANLINESS),
        ResetMethod::BlindReset => BLIND_CLEANLINESS_BY_LENGTH
            .iter()
            .find(|(l, _)| *l == length)
            .map(|(_, f)| *f)
            .ok_or_else(|| {
                let known: Vec<String> = BLIND_CLEANLINESS_BY_LENGTH.iter().map(|(l, _)| l.to_string()).collect();
                Error::invalid(format!(
                    "no tabulated blind cleanliness at L={length} (have {}); use live coupling",
                    known.join(", ")
                ))
            }),
    }
}

/// `p + (1 − f_clean)·0.3`, clamped to a probability.
pub fn syndrome_noise(f_clean: f64, p_phys: f64) -> f64 {
    (p_phys + (1.0 - f_clean) * SYNDROME_NOISE_SCALE).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoder {
    /// Per-cycle minimum-weight frame update, then a majority vote on the readout.
    MajorityVote,
    /// Space-time matching over the whole syndrome history.
    Matching,
}

impl Decoder {
    pub const ALL: [Decoder; 2] = [Decoder::MajorityVote, Decoder::Matching];

    pub fn label(&self) -> &'static str {
        match self {
            Decoder::MajorityVote => "majority_vote",
            Decoder::Matching => "mwpm_proxy",
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority_vote" | "majority" => Ok(Decoder::MajorityVote),
            "mwpm_proxy" | "mwpm" | "matching" => Ok(Decoder::Matching),
            other => Err(Error::invalid(format!("unknown decoder '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepCodeConfig {
    pub distance: usize,
    pub cycles: usize,
    pub p_phys: f64,
    pub method: ResetMethod,
    pub f_clean: f64,
    pub seeds: usize,
    pub shots: usize,
    /// First seed; seeds run `seed_base..seed_base + seeds`.
    pub seed_base: u64,
    pub decoder: Decoder,
    /// Estimate every cycle, or only the last one.
    pub every_cycle: bool,
}

impl RepCodeConfig {
    /// 50 seeds × 1000 shots from seed 42, majority-vote decoding.
    pub fn new(distance: usize, cycles: usize, p_phys: f64, method: ResetMethod, f_clean: f64) -> Result<Self> {
        let cfg = RepCodeConfig {
            distance,
            cycles,
            p_phys,
            method,
            f_clean,
            seeds: 50,
            shots: 1000,
            seed_base: 42,
            decoder: Decoder::MajorityVote,
            every_cycle: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_decoder(mut self, decoder: Decoder) -> Self {
        self.decoder = decoder;
        self
    }

    /// Skips the intermediate checkpoints.
    pub fn final_only(mut self) -> Self {
        self.every_cycle = false;
        self
    }

    fn checkpoints(&self) -> Vec<usize> {
        if self.every_cycle {
            (0..self.cycles).collect()
        } else {
            vec![self.cycles - 1]
        }
    }

    pub fn with_samples(mut self, seeds: usize, shots: usize) -> Self {
        self.seeds = seeds;
        self.shots = shots;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance < 3 || self.distance.is_multiple_of(2) {
            return Err(Error::invalid(format!("distance must be odd and >= 3, got {}", self.distance)));
        }
        if self.cycles == 0 {
            return Err(Error::invalid("cycles must be >= 1"));
        }
        if !(0.0..0.5).contains(&self.p_phys) {
            return Err(Error::invalid(format!("p_phys = {} outside [0, 0.5)", self.p_phys)));
        }
        if !(0.0..=1.0).contains(&self.f_clean) {
            return Err(Error::invalid(format!("f_clean = {} outside [0, 1]", self.f_clean)));
        }
        if self.seeds == 0 || self.shots == 0 {
            return Err(Error::invalid("seeds and shots must be >= 1"));
        }
        Ok(())
    }

    fn stream_key(&self, seed: u64) -> [u64; 5] {
        [
            seed,
            self.distance as u64,
            self.cycles as u64,
            self.p_phys.to_bits(),
            self.f_clean.to_bits(),
        ]
    }
}

/// One shot of the cycle simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    /// Recorded parities, one row of `d − 1` bits per cycle.
    pub syndromes: Vec<Vec<bool>>,
    /// Transversal readout that would be taken after each cycle.
    pub readouts: Vec<Vec<bool>>,
}

impl CycleRecord {
    pub fn final_readout(&self) -> &[bool] {
        self.readouts.last().map_or(&[], |r| r.as_slice())
    }
}

/// Simulates `cfg.cycles` rounds starting from logical zero.
///
/// Per cycle the stream is consumed as `d` data draws, `d − 1` record draws and
/// `d` readout draws, so truncating the record at cycle `c` gives the same shot
/// a shorter run would have produced.
pub fn simulate_cycles<R: Rng + ?Sized>(cfg: &RepCodeConfig, stream: &mut R) -> Result<CycleRecord> {
    cfg.validate()?;
    let d = cfg.distance;
    let q = syndrome_noise(cfg.f_clean, cfg.p_phys);
    let mut data = vec![false; d];
    let mut syndromes = Vec::with_capacity(cfg.cycles);
    let mut readouts = Vec::with_capacity(cfg.cycles);
    for _ in 0..cfg.cycles {
        for bit in data.iter_mut() {
            *bit ^= stream.gen_bool(cfg.p_phys);
        }
        let row: Vec<bool> = (0..d - 1).map(|i| (data[i] ^ data[i + 1]) ^ stream.gen_bool(q)).collect();
        syndromes.push(row);
        readouts.push(data.iter().map(|&b| b ^ stream.gen_bool(cfg.p_phys)).collect());
    }
    Ok(CycleRecord { syndromes, readouts })
}

/// Majority of an odd number of bits.
pub fn majority_vote_decode(bits: &[bool]) -> Result<bool> {
    if bits.len().is_multiple_of(2) {
        return Err(Error::invalid(format!("majority vote needs an odd number of bits, got {}", bits.len())));
    }
    Ok(2 * bits.iter().filter(|&&b| b).count() > bits.len())
}

/// Parities of neighbouring bits.
pub fn parities(bits: &[bool]) -> Vec<bool> {
    bits.windows(2).map(|w| w[0] ^ w[1]).collect()
}

/// Pauli frame maintained by per-cycle minimum-weight correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityTracker {
    frame: Vec<bool>,
}

impl MajorityTracker {
    pub fn new(distance: usize) -> Self {
        MajorityTracker {
            frame: vec![false; distance],
        }
    }

    pub fn frame(&self) -> &[bool] {
        &self.frame
    }

    /// Folds one syndrome row into the frame.
    pub fn update(&mut self, row: &[bool]) {
        let d = self.frame.len();
        let mut candidate = vec![false; d];
        for i in 0..d - 1 {
            let residual = row[i] ^ self.frame[i] ^ self.frame[i + 1];
            candidate[i + 1] = candidate[i] ^ residual;
        }
        let flip = 2 * candidate.iter().filter(|&&b| b).count() > d;
        for (f, c) in self.frame.iter_mut().zip(candidate) {
            *f ^= c ^ flip;
        }
    }

    pub fn decode(&self, readout: &[bool]) -> Result<bool> {
        let corrected: Vec<bool> = readout.iter().zip(&self.frame).map(|(r, f)| r ^ f).collect();
        majority_vote_decode(&corrected)
    }
}

/// Matching decode of a readout; the readout parities close the history.
pub fn matching_decode(decoder: &mut MatchingDecoder, syndromes: &[Vec<bool>], readout: &[bool]) -> Result<bool> {
    let mut history = syndromes.to_vec();
    history.push(parities(readout));
    let outcome = decoder.decode(&history)?;
    let corrected: Vec<bool> = readout.iter().zip(&outcome.correction).map(|(r, c)| r ^ c).collect();
    majority_vote_decode(&corrected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclePoint {
    pub cycle: usize,
    pub logical_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QecRunResult {
    pub policy: String,
    pub decoder: Decoder,
    pub distance: usize,
    pub f_clean: f64,
    pub points: Vec<CyclePoint>,
}

impl QecRunResult {
    pub fn final_point(&self) -> &CyclePoint {
        self.points.last().expect("curve has at least one cycle")
    }

    pub fn final_error(&self) -> f64 {
        self.final_point().logical_error
    }
}

/// Logical-error counts after each cycle for one seed.
fn seed_failures(cfg: &RepCodeConfig, seed: u64) -> Result<Vec<u64>> {
    let mut stream = rng::stream(Domain::Syndrome, &cfg.stream_key(seed));
    let checkpoints = cfg.checkpoints();
    let mut failures = vec![0u64; checkpoints.len()];
    let mut matcher = match cfg.decoder {
        Decoder::Matching => Some(MatchingDecoder::new(cfg.distance)?),
        Decoder::MajorityVote => None,
    };
    for _ in 0..cfg.shots {
        let record = simulate_cycles(cfg, &mut stream)?;
        match matcher.as_mut() {
            None => {
                let mut tracker = MajorityTracker::new(cfg.distance);
                let mut next = 0;
                for (c, row) in record.syndromes.iter().enumerate() {
                    tracker.update(row);
                    if checkpoints.get(next) == Some(&c) {
                        failures[next] += tracker.decode(&record.readouts[c])? as u64;
                        next += 1;
                    }
                }
            }
            Some(m) => {
                for (slot, &c) in checkpoints.iter().enumerate() {
                    failures[slot] += matching_decode(m, &record.syndromes[..=c], &record.readouts[c])? as u64;
                }
            }
        }
    }
    Ok(failures)
}

/// Monte Carlo curve over seeds × shots with per-cycle bootstrap intervals over seeds.
///
/// The estimate after cycle `c` decodes the first `c` syndrome rows together
/// with the readout taken after cycle `c`. Seeds run in parallel on
/// the current rayon pool; the result does not depend on the pool size.
pub fn logical_error_curve(cfg: &RepCodeConfig) -> Result<QecRunResult> {
    cfg.validate()?;
    let per_seed: Vec<Vec<u64>> = (0..cfg.seeds as u64)
        .into_par_iter()
        .map(|i| seed_failures(cfg, cfg.seed_base + i))
        .collect::<Result<_>>()?;

    let shots = cfg.shots as f64;
    let checkpoints = cfg.checkpoints();
    let mut points = Vec::with_capacity(checkpoints.len());
    for (slot, &c) in checkpoints.iter().enumerate() {
        let rates: Vec<f64> = per_seed.iter().map(|f| f[slot] as f64 / shots).collect();
        let mut key = cfg.stream_key(cfg.seed_base).to_vec();
        key.extend([cfg.seeds as u64, cfg.shots as u64, c as u64]);
        let summary = stats::summarize(&rates, &mut rng::stream(Domain::Bootstrap, &key))?;
        points.push(CyclePoint {
            cycle: c + 1,
            logical_error: summary.mean,
            ci_lo: summary.ci_lo,
            ci_hi: summary.ci_hi,
        });
    }
    Ok(QecRunResult {
        policy: cfg.method.label().to_string(),
        decoder: cfg.decoder,
        distance: cfg.distance,
        f_clean: cfg.f_clean,
        points,
    })
}

pub const CURVE_HEADER: [&str; 6] = ["cycle", "policy", "distance", "logical_error", "ci_lo", "ci_hi"];

/// Per-cycle CSV for a set of curves.
pub fn write_curve_csv<W: Write>(out: W, results: &[QecRunResult]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_HEADER)?;
    for r in results {
        for p in &r.points {
            w.write_record([
                p.cycle.to_string(),
                r.policy.clone(),
                r.distance.to_string(),
                crate::bench_io::format_float(p.logical_error),
                crate::bench_io::format_float(p.ci_lo),
                crate::bench_io::format_float(p.ci_hi),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
