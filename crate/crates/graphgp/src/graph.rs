//! Sparse undirected graphs and the random ensembles used throughout:
//! random regular graphs (pairing model), Erdos-Renyi graphs and generalised
//! random graphs with a shifted-Pareto mixing distribution.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quad;
use crate::rng::{derive_rng, RNG_ALGORITHM};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("infeasible degree sequence: {0}")]
    InfeasibleDegreeSequence(String),
    #[error("graph generation failed after {0} attempts")]
    GenerationFailure(usize),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("malformed edge list: {0}")]
    ParseError(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable sparse undirected graph in CSR form. Neighbour lists are sorted,
/// self-loops and duplicate edges are rejected at construction.
#[derive(Debug, Clone)]
pub struct Graph {
    v: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    ensemble_tag: String,
}

impl Graph {
    /// Builds a graph from undirected edges given as (i, j) pairs.
    pub fn from_edges(v: usize, edges: &[(u32, u32)], tag: impl Into<String>) -> Result<Self, GraphError> {
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); v];
        for &(i, j) in edges {
            let (iu, ju) = (i as usize, j as usize);
            if iu >= v || ju >= v {
                return Err(GraphError::BadParameter(format!(
                    "edge ({i}, {j}) out of range for V = {v}"
                )));
            }
            if i == j {
                return Err(GraphError::BadParameter(format!("self-loop at vertex {i}")));
            }
            adj[iu].push(j);
            adj[ju].push(i);
        }
        let mut offsets = Vec::with_capacity(v + 1);
        let mut targets = Vec::with_capacity(2 * edges.len());
        offsets.push(0);
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(GraphError::BadParameter(format!(
                    "duplicate edge at vertex {i}"
                )));
            }
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        Ok(Self { v, offsets, targets, ensemble_tag: tag.into() })
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.v).map(|i| self.degree(i)).collect()
    }

    pub fn ensemble_tag(&self) -> &str {
        &self.ensemble_tag
    }

    /// Iterates undirected edges as (i, j) with i < j.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.v).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| (i as u32) < j)
                .map(move |&j| (i as u32, j))
        })
    }

    /// Writes the edge-list text format: header "V <count>", then one
    /// 0-indexed "i j" pair per line.
    pub fn write_edge_list<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "V {}", self.v)?;
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R, tag: impl Into<String>) -> Result<Self, GraphError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::ParseError("empty input".into()))??;
        let v: usize = header
            .strip_prefix("V ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| GraphError::ParseError(format!("bad header line: {header:?}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let i: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GraphError::ParseError(format!("bad edge line: {line:?}")))?;
            let j: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GraphError::ParseError(format!("bad edge line: {line:?}")))?;
            edges.push((i, j));
        }
        Self::from_edges(v, &edges, tag)
    }

    /// Audits the structural invariants (symmetry, no self-loops, no
    /// duplicates, degree consistency). Construction enforces these; the
    /// audit exists for tests and for graphs read from external files.
    pub fn audit(&self) -> Result<(), GraphError> {
        for i in 0..self.v {
            let nbrs = self.neighbors(i);
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::ParseError(format!(
                    "unsorted or duplicate neighbour list at {i}"
                )));
            }
            for &j in nbrs {
                if j as usize == i {
                    return Err(GraphError::ParseError(format!("self-loop at {i}")));
                }
                if !self.neighbors(j as usize).contains(&(i as u32)) {
                    return Err(GraphError::ParseError(format!(
                        "asymmetric edge ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Degree distribution p(d) with finite support.
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    support: Vec<usize>,
    probabilities: Vec<f64>,
    mean: f64,
}

impl DegreeDistribution {
    pub fn new(support: Vec<usize>, probabilities: Vec<f64>) -> Result<Self, GraphError> {
        if support.len() != probabilities.len() || support.is_empty() {
            return Err(GraphError::BadParameter(
                "support and probabilities must be equal-length and non-empty".into(),
            ));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(GraphError::BadParameter("probabilities must be >= 0".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GraphError::BadParameter(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        let mean = support
            .iter()
            .zip(&probabilities)
            .map(|(&d, &p)| d as f64 * p)
            .sum();
        Ok(Self { support, probabilities, mean })
    }

    /// Point mass at degree d.
    pub fn regular(d: usize) -> Self {
        Self { support: vec![d], probabilities: vec![1.0], mean: d as f64 }
    }

    /// Poisson(lambda), truncated where the tail mass drops below 1e-12 and
    /// renormalised.
    pub fn poisson(lambda: f64) -> Result<Self, GraphError> {
        if !(lambda >= 0.0) {
            return Err(GraphError::BadParameter("Poisson rate must be >= 0".into()));
        }
        if lambda == 0.0 {
            return Ok(Self { support: vec![0], probabilities: vec![1.0], mean: 0.0 });
        }
        let mut support = Vec::new();
        let mut probs = Vec::new();
        let mut p = (-lambda).exp();
        let mut cum = 0.0;
        let mut d = 0usize;
        while cum < 1.0 - 1e-12 {
            support.push(d);
            probs.push(p);
            cum += p;
            d += 1;
            p *= lambda / d as f64;
            if d > 10_000 {
                break;
            }
        }
        let total: f64 = probs.iter().sum();
        for q in &mut probs {
            *q /= total;
        }
        Self::new(support, probs)
    }

    /// Poisson mixture with shifted-Pareto mixing density
    /// alpha * lambda_m^alpha / lambda^(alpha+1) on [lambda_m, inf);
    /// the degree law of the power-law generalised random graph.
    pub fn pareto_poisson_mixture(alpha: f64, lambda_m: f64) -> Result<Self, GraphError> {
        if !(alpha > 2.0) {
            return Err(GraphError::BadParameter("exponent must be > 2".into()));
        }
        if !(lambda_m > 0.0) {
            return Err(GraphError::BadParameter("cutoff must be > 0".into()));
        }
        // integrate the mixture for each d until the captured mass is ~1.
        // The Poisson factor concentrates on lambda = d +- O(sqrt(d)), so the
        // quadrature runs over that window intersected with [lambda_m, inf);
        // outside it the integrand is below the e^-72 level.
        const D_CAP: usize = 4000;
        let ln_fact: Vec<f64> = {
            let mut t = vec![0.0f64; D_CAP + 1];
            for k in 1..=D_CAP {
                t[k] = t[k - 1] + (k as f64).ln();
            }
            t
        };
        let mut support = Vec::new();
        let mut probs = Vec::new();
        let mut cum = 0.0;
        let mut d = 0usize;
        while cum < 1.0 - 1e-8 && d <= D_CAP {
            let df = d as f64;
            let halfwidth = 12.0 * (df + 1.0).sqrt() + 20.0;
            let lo = lambda_m.max(df - halfwidth);
            let hi = lambda_m.max(df + halfwidth);
            let lf = ln_fact[d];
            let pd = if hi <= lo {
                0.0
            } else {
                quad::integrate_rel(
                    |lambda: f64| {
                        let logpmf = df * lambda.ln() - lambda - lf;
                        let pareto = alpha * lambda_m.powf(alpha) / lambda.powf(alpha + 1.0);
                        logpmf.exp() * pareto
                    },
                    lo,
                    hi,
                    1e-15,
                    1e-9,
                )
                .map_err(|e| GraphError::BadParameter(format!("mixture quadrature: {e}")))?
            };
            support.push(d);
            probs.push(pd.max(0.0));
            cum += pd;
            d += 1;
        }
        let total: f64 = probs.iter().sum();
        for q in &mut probs {
            *q /= total;
        }
        Self::new(support, probs)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn probability_of(&self, d: usize) -> f64 {
        self.support
            .iter()
            .position(|&s| s == d)
            .map(|i| self.probabilities[i])
            .unwrap_or(0.0)
    }

    /// Most probable degree among d >= 1 (ties resolved to the smaller d).
    pub fn mode_positive(&self) -> usize {
        let mut best = (0usize, -1.0f64);
        for (&d, &p) in self.support.iter().zip(&self.probabilities) {
            if d >= 1 && p > best.1 {
                best = (d, p);
            }
        }
        best.0.max(1)
    }

    /// Samples d ~ p(d).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random::<f64>();
        let mut cum = 0.0;
        for (&d, &p) in self.support.iter().zip(&self.probabilities) {
            cum += p;
            if u < cum {
                return d;
            }
        }
        *self.support.last().unwrap()
    }

    /// Samples d ~ p(d) d / dbar, the degree of a vertex reached by following
    /// a uniformly random edge end.
    pub fn sample_edge_weighted(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random::<f64>() * self.mean;
        let mut cum = 0.0;
        for (&d, &p) in self.support.iter().zip(&self.probabilities) {
            cum += p * d as f64;
            if u < cum {
                return d;
            }
        }
        *self.support.iter().rev().find(|&&d| d >= 1).unwrap_or(&1)
    }
}

/// Empirical degree distribution; the mean equals 2 |edges| / V exactly.
pub fn degree_distribution(g: &Graph) -> DegreeDistribution {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for i in 0..g.vertex_count() {
        let d = g.degree(i);
        match counts.binary_search_by_key(&d, |&(dd, _)| dd) {
            Ok(pos) => counts[pos].1 += 1,
            Err(pos) => counts.insert(pos, (d, 1)),
        }
    }
    let v = g.vertex_count() as f64;
    let support: Vec<usize> = counts.iter().map(|&(d, _)| d).collect();
    let probabilities: Vec<f64> = counts.iter().map(|&(_, c)| c as f64 / v).collect();
    let mean = 2.0 * g.edge_count() as f64 / v;
    DegreeDistribution { support, probabilities, mean }
}

const PAIRING_RETRY_CAP: usize = 1000;

/// Random d-regular graph by the pairing (configuration) model with
/// whole-graph rejection of self-loops and multi-edges; asymptotically
/// uniform over simple d-regular graphs.
pub fn gen_regular(v: usize, d: usize, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = derive_rng(seed, &[0x7265_6775_6c61_7200]);
    gen_regular_with(v, d, &mut rng, seed)
}

pub(crate) fn gen_regular_with(
    v: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<Graph, GraphError> {
    if v * d % 2 != 0 {
        return Err(GraphError::InfeasibleDegreeSequence(format!(
            "V*d = {} is odd",
            v * d
        )));
    }
    if d >= v {
        return Err(GraphError::InfeasibleDegreeSequence(format!(
            "degree {d} needs at least {} vertices, got {v}",
            d + 1
        )));
    }
    let tag = format!("regular(d={d}) V={v} seed={seed} rng={RNG_ALGORITHM}");
    if d == 0 {
        return Graph::from_edges(v, &[], tag);
    }
    let mut stubs: Vec<u32> = (0..v as u32).flat_map(|i| std::iter::repeat(i).take(d)).collect();
    'attempt: for _ in 0..PAIRING_RETRY_CAP {
        stubs.shuffle(rng);
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); v];
        for pair in stubs.chunks_exact(2) {
            let (i, j) = (pair[0], pair[1]);
            if i == j {
                continue 'attempt;
            }
            if adj[i as usize].contains(&j) {
                continue 'attempt;
            }
            adj[i as usize].push(j);
            adj[j as usize].push(i);
        }
        let mut edges = Vec::with_capacity(v * d / 2);
        for (i, list) in adj.iter().enumerate() {
            for &j in list {
                if (i as u32) < j {
                    edges.push((i as u32, j));
                }
            }
        }
        return Graph::from_edges(v, &edges, tag);
    }
    Err(GraphError::GenerationFailure(PAIRING_RETRY_CAP))
}

/// Erdos-Renyi graph: each unordered pair is an edge independently with
/// probability mean_degree / (V - 1). Uses geometric gap-skipping so the cost
/// is O(V + E) rather than O(V^2).
pub fn gen_erdos_renyi(v: usize, mean_degree: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(mean_degree >= 0.0) || !mean_degree.is_finite() {
        return Err(GraphError::BadParameter("mean degree must be >= 0".into()));
    }
    let tag = format!("erdos_renyi(lambda={mean_degree}) V={v} seed={seed} rng={RNG_ALGORITHM}");
    let mut rng = derive_rng(seed, &[0x6572_646f_735f_7200]);
    if v < 2 || mean_degree == 0.0 {
        return Graph::from_edges(v, &[], tag);
    }
    let p = (mean_degree / (v as f64 - 1.0)).min(1.0);
    let mut edges = Vec::new();
    if p >= 1.0 {
        for i in 0..v as u32 {
            for j in (i + 1)..v as u32 {
                edges.push((i, j));
            }
        }
        return Graph::from_edges(v, &edges, tag);
    }
    let log1mp = (1.0 - p).ln();
    // cursor walks the pairs (0,1), (0,2), ..., (0,V-1), (1,2), ... in order
    let (mut i, mut j) = (0usize, 0usize); // j == i means "one before row start"
    loop {
        let u: f64 = rng.random::<f64>();
        let skip = ((1.0 - u).ln() / log1mp).floor() as u64;
        // advance cursor by skip + 1 slots
        let mut remaining = skip + 1;
        while remaining > 0 {
            let row_left = (v - 1 - j) as u64; // slots after current j within row i
            if remaining <= row_left {
                j += remaining as usize;
                remaining = 0;
            } else {
                remaining -= row_left;
                i += 1;
                if i >= v - 1 {
                    return Graph::from_edges(v, &edges, tag);
                }
                j = i; // one before (i, i+1)
            }
        }
        edges.push((i as u32, j as u32));
    }
}

/// Generalised random graph with power-law (shifted Pareto) weight density
/// alpha lambda_m^alpha / lambda^(alpha+1); pair (i, j) is an edge with
/// probability min(1, w_i w_j / (wbar V)) where wbar is the realised mean
/// weight.
pub fn gen_grg_powerlaw(v: usize, exponent: f64, cutoff: f64, seed: u64) -> Result<Graph, GraphError> {
    if !(exponent > 2.0) {
        return Err(GraphError::BadParameter(
            "exponent must be > 2 for a finite mean".into(),
        ));
    }
    if !(cutoff > 0.0) {
        return Err(GraphError::BadParameter("cutoff must be > 0".into()));
    }
    let tag = format!(
        "grg_powerlaw(alpha={exponent},lambda_m={cutoff}) V={v} seed={seed} rng={RNG_ALGORITHM}"
    );
    let mut rng = derive_rng(seed, &[0x6772_675f_706c_0000]);
    if v == 0 {
        return Graph::from_edges(0, &[], tag);
    }
    let weights: Vec<f64> = (0..v)
        .map(|_| {
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            cutoff * u.powf(-1.0 / exponent)
        })
        .collect();
    let wbar: f64 = weights.iter().sum::<f64>() / v as f64;
    let denom = wbar * v as f64;
    let mut edges = Vec::new();
    for i in 0..v {
        for j in (i + 1)..v {
            let p = (weights[i] * weights[j] / denom).min(1.0);
            if rng.random::<f64>() < p {
                edges.push((i as u32, j as u32));
            }
        }
    }
    Graph::from_edges(v, &edges, tag)
}

/// Uniform random labelled tree on v vertices (Pruefer decoding); used as the
/// exactness testbed for belief propagation.
pub fn gen_uniform_tree(v: usize, seed: u64) -> Result<Graph, GraphError> {
    if v == 0 {
        return Err(GraphError::BadParameter("tree needs at least 1 vertex".into()));
    }
    let tag = format!("uniform_tree V={v} seed={seed} rng={RNG_ALGORITHM}");
    let mut rng = derive_rng(seed, &[0x7472_6565_0000_0000]);
    if v == 1 {
        return Graph::from_edges(1, &[], tag);
    }
    if v == 2 {
        return Graph::from_edges(2, &[(0, 1)], tag);
    }
    let seq: Vec<usize> = (0..v - 2).map(|_| rng.random_range(0..v)).collect();
    let mut degree = vec![1usize; v];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(v - 1);
    // classic linear Pruefer decoding with a moving leaf pointer
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &s in &seq {
        edges.push((leaf as u32, s as u32));
        degree[s] -= 1;
        if degree[s] == 1 && s < ptr {
            leaf = s;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf as u32, (v - 1) as u32));
    Graph::from_edges(v, &edges, tag)
}

/// Named random graph ensemble, matching the experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    Regular { d: usize },
    ErdosRenyi { mean_degree: f64 },
    GrgPowerlaw { exponent: f64, cutoff: f64 },
}

impl EnsembleSpec {
    pub fn generate(&self, v: usize, seed: u64) -> Result<Graph, GraphError> {
        match *self {
            EnsembleSpec::Regular { d } => gen_regular(v, d, seed),
            EnsembleSpec::ErdosRenyi { mean_degree } => gen_erdos_renyi(v, mean_degree, seed),
            EnsembleSpec::GrgPowerlaw { exponent, cutoff } => {
                gen_grg_powerlaw(v, exponent, cutoff, seed)
            }
        }
    }

    /// Theoretical degree distribution of the ensemble (what the cavity
    /// population dynamics consumes).
    pub fn degree_distribution(&self) -> Result<DegreeDistribution, GraphError> {
        match *self {
            EnsembleSpec::Regular { d } => Ok(DegreeDistribution::regular(d)),
            EnsembleSpec::ErdosRenyi { mean_degree } => DegreeDistribution::poisson(mean_degree),
            EnsembleSpec::GrgPowerlaw { exponent, cutoff } => {
                DegreeDistribution::pareto_poisson_mixture(exponent, cutoff)
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            EnsembleSpec::Regular { d } => format!("regular(d={d})"),
            EnsembleSpec::ErdosRenyi { mean_degree } => format!("erdos_renyi(lambda={mean_degree})"),
            EnsembleSpec::GrgPowerlaw { exponent, cutoff } => {
                format!("grg_powerlaw(alpha={exponent},lambda_m={cutoff})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_on_four_vertices_is_complete() {
        let g = gen_regular(4, 3, 1).unwrap();
        g.audit().unwrap();
        assert_eq!(g.edge_count(), 6);
        for i in 0..4 {
            assert_eq!(g.degree(i), 3);
        }
    }

    #[test]
    fn regular_degrees_uniform() {
        let g = gen_regular(500, 3, 7).unwrap();
        g.audit().unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn regular_odd_total_rejected() {
        assert!(matches!(
            gen_regular(5, 3, 0),
            Err(GraphError::InfeasibleDegreeSequence(_))
        ));
    }

    #[test]
    fn regular_deterministic_per_seed() {
        let a = gen_regular(100, 3, 42).unwrap();
        let b = gen_regular(100, 3, 42).unwrap();
        let c = gen_regular(100, 3, 43).unwrap();
        assert_eq!(a.targets, b.targets);
        assert_ne!(a.targets, c.targets);
    }

    #[test]
    fn erdos_renyi_edgeless_and_forced() {
        let g = gen_erdos_renyi(10, 0.0, 0).unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = gen_erdos_renyi(2, 1.0, 0).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn erdos_renyi_poisson_degrees() {
        let v = 10_000;
        let lambda = 3.0;
        let g = gen_erdos_renyi(v, lambda, 5).unwrap();
        g.audit().unwrap();
        let emp_mean = 2.0 * g.edge_count() as f64 / v as f64;
        assert!(
            (emp_mean - lambda).abs() < 5.0 * (lambda / v as f64).sqrt(),
            "empirical mean degree {emp_mean}"
        );
        // chi-squared against Poisson(3), bins d = 0..=10 plus tail
        let mut observed = vec![0.0f64; 12];
        for i in 0..v {
            let d = g.degree(i).min(11);
            observed[d] += 1.0;
        }
        let pois = DegreeDistribution::poisson(lambda).unwrap();
        let mut expected = vec![0.0f64; 12];
        for (&d, &p) in pois.support().iter().zip(pois.probabilities()) {
            expected[d.min(11)] += p * v as f64;
        }
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .filter(|(_, &e)| e > 5.0)
            .map(|(&o, &e)| (o - e) * (o - e) / e)
            .sum();
        // 11 dof at the 1% level
        assert!(chi2 < 24.7, "chi-squared {chi2}");
    }

    #[test]
    fn grg_mean_degree_and_overdispersion() {
        let v = 10_000;
        let g = gen_grg_powerlaw(v, 2.5, 2.0, 11).unwrap();
        g.audit().unwrap();
        let target = 2.5 * 2.0 / 1.5; // Pareto mean alpha lambda_m / (alpha - 1)
        let emp_mean = 2.0 * g.edge_count() as f64 / v as f64;
        assert!(
            (emp_mean / target - 1.0).abs() < 0.05,
            "mean degree {emp_mean} vs {target}"
        );
        let mean = emp_mean;
        let var: f64 = (0..v)
            .map(|i| {
                let d = g.degree(i) as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / v as f64;
        assert!(var > mean, "variance {var} should exceed mean {mean} (heavier than Poisson)");
    }

    #[test]
    fn grg_tiny_cutoff_nearly_edgeless() {
        let g = gen_grg_powerlaw(2_000, 2.5, 1e-9, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn degree_distribution_examples() {
        let k4 = gen_regular(4, 3, 1).unwrap();
        let dd = degree_distribution(&k4);
        assert_eq!(dd.support(), &[3]);
        assert_eq!(dd.probabilities(), &[1.0]);

        let empty = Graph::from_edges(5, &[], "t").unwrap();
        let dd = degree_distribution(&empty);
        assert_eq!(dd.support(), &[0]);
        assert_eq!(dd.mean(), 0.0);

        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], "star").unwrap();
        let dd = degree_distribution(&star);
        assert_eq!(dd.support(), &[1, 4]);
        assert!((dd.probabilities()[0] - 0.8).abs() < 1e-15);
        assert!((dd.probabilities()[1] - 0.2).abs() < 1e-15);
        assert!((dd.mean() - 1.6).abs() < 1e-15);
        assert_eq!(dd.mean(), 2.0 * star.edge_count() as f64 / 5.0);
    }

    #[test]
    fn uniform_tree_is_tree() {
        for seed in 0..20 {
            let v = 2 + (seed as usize * 7) % 49;
            let g = gen_uniform_tree(v, seed).unwrap();
            g.audit().unwrap();
            assert_eq!(g.edge_count(), v - 1, "tree edge count at V={v}");
            // connectivity by BFS
            let mut seen = vec![false; v];
            let mut queue = vec![0usize];
            seen[0] = true;
            while let Some(i) = queue.pop() {
                for &j in g.neighbors(i) {
                    if !seen[j as usize] {
                        seen[j as usize] = true;
                        queue.push(j as usize);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "tree connected at V={v}");
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = gen_erdos_renyi(50, 3.0, 9).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = Graph::read_edge_list(&buf[..], g.ensemble_tag()).unwrap();
        assert_eq!(g.vertex_count(), h.vertex_count());
        assert_eq!(g.targets, h.targets);
        assert_eq!(g.offsets, h.offsets);
    }

    #[test]
    fn poisson_mixture_distribution_sane() {
        let dd = DegreeDistribution::pareto_poisson_mixture(2.5, 2.0).unwrap();
        let total: f64 = dd.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // mixture mean equals the Pareto mean
        assert!((dd.mean() - 10.0 / 3.0).abs() < 0.02, "mean {}", dd.mean());
        // heavier tail than a Poisson with the same mean
        let pois = DegreeDistribution::poisson(10.0 / 3.0).unwrap();
        let tail = |d0: usize, dd: &DegreeDistribution| -> f64 {
            dd.support()
                .iter()
                .zip(dd.probabilities())
                .filter(|(&d, _)| d >= d0)
                .map(|(_, &p)| p)
                .sum()
        };
        assert!(tail(12, &dd) > tail(12, &pois));
    }
}
