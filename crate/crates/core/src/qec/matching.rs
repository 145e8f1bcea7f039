//! Space-time matching decoder for the repetition code.
//!
//! Detection events are changes between consecutive syndrome rows. They sit on
//! a `rounds × (d − 1)` lattice with unit-cost space and time steps; each round
//! has a virtual boundary node past either end of the chain. Matching uses the
//! exact blossom solver from `fusion-blossom`.

use std::collections::HashMap;

use fusion_blossom::mwpm_solver::{PrimalDualSolver, SolverSerial};
use fusion_blossom::util::{SolverInitializer, SyndromePattern, VertexIndex, Weight};

use crate::error::{Error, Result};

/// Solver edge weight for one lattice step (the solver wants even weights).
const UNIT: Weight = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Defect {
    pub round: usize,
    /// Stabilizer index in `0..d − 1`.
    pub check: usize,
}

/// Detection events of a syndrome history; the reference before round 0 is all-zero.
pub fn detection_events(history: &[Vec<bool>]) -> Vec<Defect> {
    let mut out = Vec::new();
    let mut prev: Option<&Vec<bool>> = None;
    for (round, row) in history.iter().enumerate() {
        for (check, &bit) in row.iter().enumerate() {
            let before = prev.is_some_and(|p| p[check]);
            if bit != before {
                out.push(Defect { round, check });
            }
        }
        prev = Some(row);
    }
    out
}

/// Cost of matching a defect to the nearer chain end.
pub fn boundary_distance(defect: &Defect, distance: usize) -> usize {
    (defect.check + 1).min(distance - 1 - defect.check)
}

pub fn pair_distance(a: &Defect, b: &Defect) -> usize {
    a.round.abs_diff(b.round) + a.check.abs_diff(b.check)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingOutcome {
    /// Data-bit flips implied by the matched space-like segments.
    pub correction: Vec<bool>,
    /// Total lattice distance of the matching.
    pub weight: usize,
}

struct DecodingGraph {
    initializer: SolverInitializer,
    /// Data bit flipped by each edge, `None` for time-like edges.
    edge_bits: Vec<Option<usize>>,
}

impl DecodingGraph {
    fn new(distance: usize, rounds: usize) -> Self {
        let checks = distance - 1;
        let real = rounds * checks;
        let vertex = |t: usize, i: usize| (t * checks + i) as VertexIndex;
        let left = |t: usize| (real + 2 * t) as VertexIndex;
        let right = |t: usize| (real + 2 * t + 1) as VertexIndex;

        let mut edges = Vec::new();
        let mut edge_bits = Vec::new();
        for t in 0..rounds {
            edges.push((vertex(t, 0), left(t), UNIT));
            edge_bits.push(Some(0));
            for i in 0..checks - 1 {
                edges.push((vertex(t, i), vertex(t, i + 1), UNIT));
                edge_bits.push(Some(i + 1));
            }
            edges.push((vertex(t, checks - 1), right(t), UNIT));
            edge_bits.push(Some(distance - 1));
            if t + 1 < rounds {
                for i in 0..checks {
                    edges.push((vertex(t, i), vertex(t + 1, i), UNIT));
                    edge_bits.push(None);
                }
            }
        }
        let virtual_vertices = (0..rounds).flat_map(|t| [left(t), right(t)]).collect();
        DecodingGraph {
            initializer: SolverInitializer::new((real + 2 * rounds) as VertexIndex, edges, virtual_vertices),
            edge_bits,
        }
    }
}

/// Reusable matcher; keeps one solver per history shape.
pub struct MatchingDecoder {
    distance: usize,
    graphs: HashMap<usize, (DecodingGraph, SolverSerial)>,
}

impl MatchingDecoder {
    pub fn new(distance: usize) -> Result<Self> {
        if distance < 3 || distance.is_multiple_of(2) {
            return Err(Error::invalid(format!("distance must be odd and >= 3, got {distance}")));
        }
        Ok(MatchingDecoder {
            distance,
            graphs: HashMap::new(),
        })
    }

    pub fn decode(&mut self, history: &[Vec<bool>]) -> Result<MatchingOutcome> {
        let d = self.distance;
        if history.is_empty() {
            return Err(Error::invalid("syndrome history is empty"));
        }
        if let Some(row) = history.iter().find(|r| r.len() != d - 1) {
            return Err(Error::invalid(format!("syndrome row has {} bits, expected {}", row.len(), d - 1)));
        }
        let defects = detection_events(history);
        let mut correction = vec![false; d];
        if defects.is_empty() {
            return Ok(MatchingOutcome { correction, weight: 0 });
        }

        let rounds = history.len();
        let (graph, solver) = self.graphs.entry(rounds).or_insert_with(|| {
            let graph = DecodingGraph::new(d, rounds);
            let solver = SolverSerial::new(&graph.initializer);
            (graph, solver)
        });
        let pattern = SyndromePattern::new_vertices(
            defects
                .iter()
                .map(|x| (x.round * (d - 1) + x.check) as VertexIndex)
                .collect(),
        );
        solver.solve(&pattern);
        let subgraph = solver.subgraph();
        solver.clear();

        let mut weight: Weight = 0;
        for edge in subgraph {
            weight += graph.initializer.weighted_edges[edge].2;
            if let Some(bit) = graph.edge_bits[edge] {
                correction[bit] ^= true;
            }
        }
        Ok(MatchingOutcome {
            correction,
            weight: (weight / UNIT) as usize,
        })
    }
}

/// One-shot convenience wrapper around [`MatchingDecoder`].
pub fn mwpm_proxy_decode(history: &[Vec<bool>], distance: usize) -> Result<MatchingOutcome> {
    MatchingDecoder::new(distance)?.decode(history)
}
