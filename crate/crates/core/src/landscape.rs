//! Shape of the residual `ε(λ)` over the scale factor.
//!
//! Curvature is the discrete second derivative `d²ε/dλ²` at the grid optimum.
//! Landscapes are classed multimodal when two or more interior basins come
//! within a factor two of the optimum, otherwise by curvature.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reset::LambdaGrid;
use crate::rng::{self, Domain};
use crate::stats;
use crate::su2::{self, GateSequence, PhaseConvention};

pub const SHARP_KAPPA: f64 = 50.0;
pub const MODERATE_KAPPA: f64 = 5.0;
/// Interior minima count only when `ε ≤ BASIN_FACTOR · ε_opt`.
pub const BASIN_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub lambda: Vec<f64>,
    pub epsilon: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Index of the smallest ε; ties go to the smaller λ.
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &e) in self.epsilon.iter().enumerate() {
            if best.is_none_or(|b| e < self.epsilon[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// `ε(λ)` of the noiseless unitaries on `grid`.
pub fn sweep_lambda_on(seq: &GateSequence, grid: LambdaGrid) -> Result<Curve> {
    let grid = LambdaGrid::new(grid.points, grid.min, grid.max)?;
    let base = su2::compose(seq);
    let lambda: Vec<f64> = grid.values().collect();
    let epsilon = lambda
        .iter()
        .map(|&l| Ok(su2::residual_unchecked(&(su2::scale_and_double(seq, l)? * base), PhaseConvention::Sensitive)))
        .collect::<Result<_>>()?;
    Ok(Curve { lambda, epsilon })
}

/// 200 points on [0.1, 4.0].
pub fn sweep_lambda(seq: &GateSequence) -> Result<Curve> {
    sweep_lambda_on(seq, LambdaGrid::LANDSCAPE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LandscapeClass {
    Sharp,
    Moderate,
    Flat,
    Multimodal,
}

impl LandscapeClass {
    pub const ALL: [LandscapeClass; 4] = [
        LandscapeClass::Sharp,
        LandscapeClass::Moderate,
        LandscapeClass::Flat,
        LandscapeClass::Multimodal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            LandscapeClass::Sharp => "sharp",
            LandscapeClass::Moderate => "moderate",
            LandscapeClass::Flat => "flat",
            LandscapeClass::Multimodal => "multimodal",
        }
    }

    /// Multimodal first, then by curvature.
    pub fn classify(kappa: f64, n_minima: usize) -> Self {
        if n_minima >= 2 {
            LandscapeClass::Multimodal
        } else if kappa > SHARP_KAPPA {
            LandscapeClass::Sharp
        } else if kappa > MODERATE_KAPPA {
            LandscapeClass::Moderate
        } else {
            LandscapeClass::Flat
        }
    }
}

impl fmt::Display for LandscapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LandscapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LandscapeClass::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::invalid(format!("unknown landscape class '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSummary {
    pub seed: u64,
    pub length: usize,
    pub lambda_opt: f64,
    pub epsilon_opt: f64,
    pub kappa: f64,
    pub n_minima: usize,
    pub class: LandscapeClass,
}

/// Curvature, basin count and class of a uniformly spaced curve.
pub fn characterize(curve: &Curve, seed: u64, length: usize) -> Result<LandscapeSummary> {
    let n = curve.len();
    if n < 3 || curve.epsilon.len() != n {
        return Err(Error::invalid(format!("landscape needs at least 3 points, got {n}")));
    }
    let h = curve.lambda[1] - curve.lambda[0];
    if !(h > 0.0) {
        return Err(Error::invalid("landscape grid must be increasing"));
    }
    let e = &curve.epsilon;
    let opt = curve.argmin().expect("nonempty curve");
    // one-sided stencil at the ends
    let c = opt.clamp(1, n - 2);
    let kappa = (e[c - 1] - 2.0 * e[c] + e[c + 1]) / (h * h);

    let bound = BASIN_FACTOR * e[opt];
    let n_minima = (1..n - 1)
        .filter(|&i| e[i] < e[i - 1] && e[i] < e[i + 1] && e[i] <= bound)
        .count();

    Ok(LandscapeSummary {
        seed,
        length,
        lambda_opt: curve.lambda[opt],
        epsilon_opt: e[opt],
        kappa,
        n_minima,
        class: LandscapeClass::classify(kappa, n_minima),
    })
}

/// Population statistics at one sequence length.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthAggregate {
    pub length: usize,
    pub n: usize,
    pub epsilon: stats::Summary,
    pub kappa_mean: f64,
    pub kappa_sd: f64,
    /// Fractions in [`LandscapeClass::ALL`] order.
    pub class_fractions: [f64; 4],
}

impl LengthAggregate {
    pub fn fraction(&self, class: LandscapeClass) -> f64 {
        let i = LandscapeClass::ALL.iter().position(|c| *c == class).expect("listed class");
        self.class_fractions[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeReport {
    pub cells: Vec<LandscapeSummary>,
    pub by_length: Vec<LengthAggregate>,
}

/// Characterizes every (seed, L) cell and aggregates per length.
pub fn landscape_report(seeds: RangeInclusive<u64>, lengths: &[usize], grid: LambdaGrid) -> Result<LandscapeReport> {
    if seeds.is_empty() || lengths.is_empty() {
        return Err(Error::invalid("landscape report needs at least one seed and one length"));
    }
    let jobs: Vec<(usize, u64)> = lengths.iter().flat_map(|&l| seeds.clone().map(move |s| (l, s))).collect();
    let cells: Vec<LandscapeSummary> = jobs
        .par_iter()
        .map(|&(l, s)| {
            let seq = su2::generate_sequence(s, l)?;
            characterize(&sweep_lambda_on(&seq, grid)?, s, l)
        })
        .collect::<Result<_>>()?;

    let mut by_length = Vec::with_capacity(lengths.len());
    for &l in lengths {
        let group: Vec<&LandscapeSummary> = cells.iter().filter(|c| c.length == l).collect();
        let eps: Vec<f64> = group.iter().map(|c| c.epsilon_opt).collect();
        let kap: Vec<f64> = group.iter().map(|c| c.kappa).collect();
        let key = [l as u64, *seeds.start(), *seeds.end()];
        let epsilon = stats::summarize(&eps, &mut rng::stream(Domain::Bootstrap, &key))?;
        let mut class_fractions = [0.0; 4];
        for (slot, class) in class_fractions.iter_mut().zip(LandscapeClass::ALL) {
            *slot = group.iter().filter(|c| c.class == class).count() as f64 / group.len() as f64;
        }
        by_length.push(LengthAggregate {
            length: l,
            n: group.len(),
            epsilon,
            kappa_mean: stats::mean(&kap),
            kappa_sd: stats::std_dev(&kap),
            class_fractions,
        });
    }
    Ok(LandscapeReport { cells, by_length })
}

pub const CSV_HEADER: [&str; 7] = ["seed", "L", "lambda_opt", "epsilon_opt", "kappa", "n_minima", "class"];

pub fn write_csv<W: Write>(out: W, cells: &[LandscapeSummary]) -> std::result::Result<(), csv::Error> {
    use crate::bench_io::format_float;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in cells {
        w.write_record([
            c.seed.to_string(),
            c.length.to_string(),
            format_float(c.lambda_opt),
            format_float(c.epsilon_opt),
            format_float(c.kappa),
            c.n_minima.to_string(),
            c.class.label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn render_report(report: &LandscapeReport) -> String {
    let mut out = format!(
        "{:>3} {:>4} {:>8} {:>17} {:>9} {:>9} {:>6} {:>8} {:>6} {:>10}\n",
        "L", "n", "eps_opt", "95% CI", "kappa", "sd", "sharp", "moderate", "flat", "multimodal"
    );
    for a in &report.by_length {
        out.push_str(&format!(
            "{:>3} {:>4} {:>8.4} {:>17} {:>9.1} {:>9.1} {:>6.2} {:>8.2} {:>6.2} {:>10.2}\n",
            a.length,
            a.n,
            a.epsilon.mean,
            format!("[{:.4}, {:.4}]", a.epsilon.ci_lo, a.epsilon.ci_hi),
            a.kappa_mean,
            a.kappa_sd,
            a.class_fractions[0],
            a.class_fractions[1],
            a.class_fractions[2],
            a.class_fractions[3]
        ));
    }
    out
}
