//! Belief-propagation learning-curve prediction.
//!
//! The GP partition function becomes a complex-valued Gaussian graphical
//! model after Fourier-transforming the prior and introducing, per vertex,
//! the walk variables h^0..h^p and conjugates hhat^1..hhat^p. Messages along
//! directed edges are then complex symmetric (2p+1) x (2p+1) covariance
//! matrices updated by
//!
//!   V = (O - sum_k X V_k X)^-1,
//!
//! where O carries the site weights (binomial walk coefficients c_q, the
//! -i h^q hhat^q links, and a data term) and X couples h^(q-1) to hhat^q
//! across an edge. The data term is singular for vertices without examples;
//! the Woodbury identity removes it, so all shipped formulas are the
//! post-limit forms in the auxiliary regulariser.
//!
//! On a fixed graph, iterating the updates is exact on trees and near-exact
//! on locally tree-like graphs. Over a degree ensemble, the message
//! distribution is found by population dynamics, with a second joint
//! population handling locally normalised kernels.
//!
//! Slot layout: index q in 0..=p holds h^q, index p+q holds hhat^q.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DegreeDistribution, Graph};
use crate::hist::Histogram;
use crate::kernel::{binomial_weights, KernelError};
use crate::linalg::{complex_lu, ComplexDenseMatrix, LinalgError};
use crate::rng::{derive_rng, sample_poisson};

#[derive(Debug, Error)]
pub enum CavityError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("degree mismatch: vertex of degree {degree} needs {expected} incoming messages, got {got}")]
    DegreeMismatch { degree: usize, expected: usize, got: usize },
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl From<KernelError> for CavityError {
    fn from(e: KernelError) -> Self {
        CavityError::BadParameter(e.to_string())
    }
}

/// Complex symmetric message covariance of the Gaussian graphical model.
#[derive(Debug, Clone)]
pub struct CavityCovariance {
    pub matrix: ComplexDenseMatrix,
}

impl CavityCovariance {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Largest |V - V^T| entry.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.matrix.get(i, j) - self.matrix.get(j, i)).norm());
            }
        }
        worst
    }
}

/// Shared structure of the message algebra for fixed kernel parameters.
#[derive(Debug, Clone)]
pub struct CavityEngine {
    a: f64,
    p: u32,
    dim: usize,
    /// binomial walk weights c_q
    weights: Vec<f64>,
    /// slot pairing induced by the edge coupling X: h^q <-> hhat^(q+1)
    partner: Vec<Option<usize>>,
}

impl CavityEngine {
    pub fn new(a: f64, p: u32) -> Result<Self, CavityError> {
        let weights = binomial_weights(a, p)?;
        let pu = p as usize;
        let dim = 2 * pu + 1;
        let mut partner = vec![None; dim];
        for q in 1..=pu {
            partner[q - 1] = Some(pu + q);
            partner[pu + q] = Some(q - 1);
        }
        Ok(Self { a, p, dim, weights, partner })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// c_0 = (1 - 1/a)^p, the prior variance of an isolated vertex before
    /// normalisation.
    pub fn c0(&self) -> f64 {
        self.weights[0]
    }

    /// Site matrix without the data term: d times the c_q block plus the
    /// -i h^q hhat^q links.
    pub fn base_matrix(&self, d: usize) -> ComplexDenseMatrix {
        let df = d as f64;
        let pu = self.p as usize;
        let mut m = ComplexDenseMatrix::zeros(self.dim, self.dim);
        m.set(0, 0, Complex64::new(df * self.weights[0], 0.0));
        for q in 1..=pu {
            let half = Complex64::new(df * self.weights[q] / 2.0, 0.0);
            m.set(0, q, half);
            m.set(q, 0, half);
            let link = Complex64::new(0.0, -df);
            m.set(q, pu + q, link);
            m.set(pu + q, q, link);
        }
        m
    }

    /// The edge coupling X: entries i at (q-1, p+q) and (p+q, q-1).
    pub fn x_matrix(&self) -> ComplexDenseMatrix {
        let pu = self.p as usize;
        let mut x = ComplexDenseMatrix::zeros(self.dim, self.dim);
        for q in 1..=pu {
            x.set(q - 1, pu + q, Complex64::new(0.0, 1.0));
            x.set(pu + q, q - 1, Complex64::new(0.0, 1.0));
        }
        x
    }

    /// Accumulates -X V X onto `w`. Because each row of X has at most one
    /// entry (i at the paired slot), this is w[r][s] += V[m(r)][m(s)] over
    /// paired slots, O(p^2) instead of two matrix products.
    pub fn subtract_edge_coupling(&self, w: &mut ComplexDenseMatrix, v: &CavityCovariance) {
        debug_assert_eq!(v.dim(), self.dim);
        for r in 0..self.dim {
            let Some(mr) = self.partner[r] else { continue };
            for s in 0..self.dim {
                let Some(ms) = self.partner[s] else { continue };
                let val = w.get(r, s) + v.matrix.get(mr, ms);
                w.set(r, s, val);
            }
        }
    }

    /// Message covariance from the assembled M = O_nodata - sum X V X and
    /// the scalar data ratio (n/sigma^2)/(d kappa), via the Woodbury form
    /// V = M^-1 - M^-1 e0 e0^T M^-1 / (ratio + (M^-1)_00); exact at the
    /// regulariser's zero limit.
    pub fn message_from(
        &self,
        m: &ComplexDenseMatrix,
        data_ratio: f64,
    ) -> Result<CavityCovariance, CavityError> {
        let lu = complex_lu(m)?;
        let mut inv = lu.inverse();
        inv.symmetrize();
        let n = self.dim;
        let w: Vec<Complex64> = (0..n).map(|i| inv.get(i, 0)).collect();
        let denom = w[0] + Complex64::new(data_ratio, 0.0);
        for r in 0..n {
            for s in 0..n {
                let val = inv.get(r, s) - w[r] * w[s] / denom;
                inv.set(r, s, val);
            }
        }
        inv.symmetrize();
        Ok(CavityCovariance { matrix: inv })
    }

    /// (M^-1)_00 of an assembled site matrix, by one LU solve against e0.
    pub fn m00(&self, m: &ComplexDenseMatrix) -> Result<Complex64, CavityError> {
        Ok(complex_lu(m)?.solve_e0_first())
    }
}

/// The site matrices of the graphical model at one vertex: O (with data
/// term), X (edge coupling) and M (O without the data term).
#[derive(Debug, Clone)]
pub struct CavityMatrices {
    pub o: ComplexDenseMatrix,
    pub x: ComplexDenseMatrix,
    pub m: ComplexDenseMatrix,
    pub d: usize,
    pub kappa: f64,
}

/// Builds O, X and M for a degree-d vertex with n examples, normaliser
/// kappa, noise sigma2 and regulariser lambda. The data term is
/// d kappa/(n/sigma^2 + lambda) on the (0,0) entry.
#[allow(clippy::too_many_arguments)]
pub fn build_cavity_matrices(
    d: usize,
    a: f64,
    p: u32,
    kappa: f64,
    n: u64,
    sigma2: f64,
    lambda: f64,
) -> Result<CavityMatrices, CavityError> {
    if d == 0 {
        return Err(CavityError::BadParameter(
            "degree 0 is handled by the isolated-vertex branch".into(),
        ));
    }
    if !(kappa > 0.0) {
        return Err(CavityError::BadParameter(format!("kappa {kappa} must be > 0")));
    }
    let denom = n as f64 / sigma2 + lambda;
    if !(denom > 0.0) {
        return Err(CavityError::BadParameter(
            "data term needs n > 0 or lambda > 0; use the Woodbury route at lambda = 0".into(),
        ));
    }
    let engine = CavityEngine::new(a, p)?;
    let m = engine.base_matrix(d);
    let mut o = m.clone();
    let data = Complex64::new(d as f64 * kappa / denom, 0.0);
    o.set(0, 0, o.get(0, 0) + data);
    Ok(CavityMatrices { o, x: engine.x_matrix(), m, d, kappa })
}

/// One message update V = (O - sum_k X V_k X)^-1 evaluated at the
/// regulariser's zero limit through the Woodbury split; incoming messages
/// come from the d - 1 neighbours other than the target.
pub fn cavity_update(
    incoming: &[CavityCovariance],
    matrices: &CavityMatrices,
    n: u64,
    sigma2: f64,
) -> Result<CavityCovariance, CavityError> {
    let d = matrices.d;
    if incoming.len() + 1 != d {
        return Err(CavityError::DegreeMismatch {
            degree: d,
            expected: d - 1,
            got: incoming.len(),
        });
    }
    let engine = CavityEngine::new(
        kernel_a_from(matrices),
        ((matrices.m.rows() - 1) / 2) as u32,
    )?;
    let mut w = matrices.m.clone();
    for v in incoming {
        engine.subtract_edge_coupling(&mut w, v);
    }
    let ratio = (n as f64 / sigma2) / (d as f64 * matrices.kappa);
    engine.message_from(&w, ratio)
}

// the base matrix fixes a only through the c_q weights; recover it from the
// stored first two weights so CavityMatrices stays self-contained
fn kernel_a_from(matrices: &CavityMatrices) -> f64 {
    let d = matrices.d as f64;
    let c0 = matrices.m.get(0, 0).re / d;
    let p = (matrices.m.rows() - 1) / 2;
    if p == 0 {
        return 2.0;
    }
    let c1 = 2.0 * matrices.m.get(0, 1).re / d;
    // c1/c0 = p / (a - 1)
    p as f64 * c0 / c1 + 1.0
}

/// Outcome of belief propagation on one fixed graph.
#[derive(Debug, Clone)]
pub struct BpResult {
    /// Per-vertex posterior variances (local Bayes errors).
    pub local_errors: Vec<f64>,
    pub sweeps: usize,
    pub max_residual: f64,
    /// Largest imaginary part encountered in the final marginal solves;
    /// physical variances are real, so this measures numerical drift.
    pub max_imag: f64,
}

const BP_TOL: f64 = 1e-10;
const BP_MAX_SWEEPS: usize = 500;

/// Belief propagation on a fixed graph for the kernel
/// C_ij = C_hat_ij / sqrt(kappa_i kappa_j), with n_i examples at vertex i.
/// Exact on trees; the per-vertex local errors are the posterior variances.
pub fn bp_single_graph(
    g: &Graph,
    example_counts: &[u32],
    kappa: &[f64],
    a: f64,
    p: u32,
    sigma2: f64,
) -> Result<BpResult, CavityError> {
    let v = g.vertex_count();
    if example_counts.len() != v || kappa.len() != v {
        return Err(CavityError::BadParameter(
            "example counts and kappa must have one entry per vertex".into(),
        ));
    }
    if kappa.iter().any(|&k| !(k > 0.0)) {
        return Err(CavityError::BadParameter("kappa entries must be > 0".into()));
    }
    let engine = CavityEngine::new(a, p)?;
    // directed edge slots follow the CSR layout; owner[e] is the source
    // vertex and rev[e] the slot of the reversed edge
    let mut owner = Vec::new();
    let mut slot_of = Vec::new(); // (src offset ranges) implicit via CSR
    let mut rev = Vec::new();
    let mut first_slot = vec![0usize; v + 1];
    for i in 0..v {
        first_slot[i + 1] = first_slot[i] + g.degree(i);
        for &j in g.neighbors(i) {
            owner.push(i);
            slot_of.push(j as usize);
        }
    }
    for i in 0..v {
        for (off, &j) in g.neighbors(i).iter().enumerate() {
            let j = j as usize;
            let back = g
                .neighbors(j)
                .binary_search(&(i as u32))
                .expect("graph symmetry");
            rev.push(first_slot[j] + back);
            let _ = off;
        }
    }
    let debug_slots = slot_of; // targets per slot, used in the sweep
    // init each message to the bare site inverse of its owner
    let mut base_inverse: HashMap<usize, CavityCovariance> = HashMap::new();
    for i in 0..v {
        let d = g.degree(i);
        if d >= 1 {
            base_inverse.entry(d).or_insert({
                let b = engine.base_matrix(d);
                let mut inv = complex_lu(&b)?.inverse();
                inv.symmetrize();
                CavityCovariance { matrix: inv }
            });
        }
    }
    let e_dir = owner.len();
    let mut messages: Vec<CavityCovariance> = (0..e_dir)
        .map(|e| base_inverse[&g.degree(owner[e])].clone())
        .collect();
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while sweeps < BP_MAX_SWEEPS {
        sweeps += 1;
        residual = 0.0;
        for e in 0..e_dir {
            let j = owner[e];
            let dj = g.degree(j);
            let mut w = engine.base_matrix(dj);
            for f in first_slot[j]..first_slot[j + 1] {
                if f == e {
                    continue;
                }
                w = {
                    let mut w = w;
                    engine.subtract_edge_coupling(&mut w, &messages[rev[f]]);
                    w
                };
            }
            let ratio =
                (example_counts[j] as f64 / sigma2) / (dj as f64 * kappa[j]);
            let updated = engine.message_from(&w, ratio)?;
            residual = residual.max(updated.max_abs_diff(&messages[e]));
            messages[e] = updated;
        }
        if residual < BP_TOL {
            break;
        }
    }
    if residual >= BP_TOL && sweeps >= BP_MAX_SWEEPS {
        return Err(CavityError::NoConvergence(format!(
            "BP residual {residual:.3e} after {sweeps} sweeps"
        )));
    }
    let c0 = engine.c0();
    let mut max_imag: f64 = 0.0;
    let mut local_errors = Vec::with_capacity(v);
    for i in 0..v {
        let d = g.degree(i);
        let n_over = example_counts[i] as f64 / sigma2;
        if d == 0 {
            local_errors.push(1.0 / (n_over + kappa[i] / c0));
            continue;
        }
        let mut w = engine.base_matrix(d);
        for f in first_slot[i]..first_slot[i + 1] {
            engine.subtract_edge_coupling(&mut w, &messages[rev[f]]);
        }
        let m00 = engine.m00(&w)?;
        max_imag = max_imag.max(m00.im.abs());
        local_errors.push(1.0 / (n_over + d as f64 * kappa[i] * m00.re));
    }
    let _ = debug_slots;
    Ok(BpResult { local_errors, sweeps, max_residual: residual, max_imag })
}

/// Population dynamics controls. One sweep is population-size single-member
/// updates; measurement sweeps interleave one error draw per update.
#[derive(Debug, Clone, Copy)]
pub struct PopulationParams {
    pub size: usize,
    pub burn_in_sweeps: usize,
    pub measure_sweeps: usize,
    /// Relative drift of the measured mean between the two halves of the
    /// measurement phase above which NoConvergence is reported.
    pub drift_tol: f64,
}

impl Default for PopulationParams {
    fn default() -> Self {
        PopulationParams { size: 2000, burn_in_sweeps: 200, measure_sweeps: 500, drift_tol: 1e-2 }
    }
}

impl PopulationParams {
    /// Smaller population for quick runs and tests.
    pub fn quick() -> Self {
        PopulationParams { size: 500, burn_in_sweeps: 100, measure_sweeps: 160, drift_tol: 2e-2 }
    }
}

/// Outcome of a population-dynamics run at one nu.
#[derive(Debug, Clone)]
pub struct PopulationResult {
    pub epsilon: f64,
    /// Standard error estimated from per-sweep block means.
    pub stderr: f64,
    /// Individual local-error draws from the measurement phase.
    pub samples: Vec<f64>,
    /// Relative drift of the mean between measurement halves.
    pub drift: f64,
    pub max_imag: f64,
    /// Local mode only: mean unnormalised prior variance observed through
    /// the V-marginal (equals the global-mode kappa estimate).
    pub aux_mean: Option<f64>,
    /// Final (0,0) entry of every member covariance, for inspection.
    pub member_h0: Vec<(f64, f64)>,
}

struct DegreeTables {
    bases: HashMap<usize, ComplexDenseMatrix>,
}

impl DegreeTables {
    fn build(engine: &CavityEngine, dd: &DegreeDistribution) -> Self {
        let mut bases = HashMap::new();
        for &d in dd.support() {
            if d >= 1 {
                bases.insert(d, engine.base_matrix(d));
            }
        }
        DegreeTables { bases }
    }

    fn base(&self, d: usize) -> &ComplexDenseMatrix {
        &self.bases[&d]
    }
}

fn validate_population_inputs(
    dd: &DegreeDistribution,
    sigma2: f64,
    nu: f64,
    params: &PopulationParams,
) -> Result<(), CavityError> {
    if !(sigma2 > 0.0) {
        return Err(CavityError::BadParameter(format!(
            "noise variance {sigma2} must be > 0"
        )));
    }
    if !(nu >= 0.0) {
        return Err(CavityError::BadParameter(format!("nu {nu} must be >= 0")));
    }
    if params.size == 0 {
        return Err(CavityError::BadParameter("population size must be > 0".into()));
    }
    if dd.mean() <= 0.0 && dd.probability_of(0) < 1.0 {
        return Err(CavityError::BadParameter("degenerate degree distribution".into()));
    }
    Ok(())
}

fn block_mean_stats(samples: &[f64], blocks: usize) -> (f64, f64) {
    // mean and its standard error from coarse blocks; the draws are
    // autocorrelated over roughly a sweep, so blocks must span many sweeps
    let blocks = blocks.max(2).min(samples.len().max(2));
    let len = samples.len() / blocks;
    let means: Vec<f64> = (0..blocks)
        .map(|b| {
            let chunk = &samples[b * len..(b + 1) * len];
            chunk.iter().sum::<f64>() / len as f64
        })
        .collect();
    let mean = means.iter().sum::<f64>() / blocks as f64;
    let var =
        means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (blocks as f64 - 1.0);
    (mean, (var / blocks as f64).sqrt())
}

fn finish_population_run(
    samples: Vec<f64>,
    max_imag: f64,
    aux_mean: Option<f64>,
    member_h0: Vec<(f64, f64)>,
    drift_tol: f64,
) -> Result<PopulationResult, CavityError> {
    let n = samples.len() as f64;
    let epsilon = samples.iter().sum::<f64>() / n;
    let half = samples.len() / 2;
    let (first, se1) = block_mean_stats(&samples[..half], 8);
    let (second, se2) = block_mean_stats(&samples[half..], 8);
    let drift = (first - second).abs() / epsilon.abs().max(1e-300);
    let (_, stderr) = block_mean_stats(&samples, 16);
    // a real failure to equilibrate shows up as a drift that is both large
    // relative to the mean and statistically significant against the block
    // noise; heavy-tailed ensembles make a bare relative threshold
    // false-positive at practical budgets
    let significance = (first - second).abs() / (se1 * se1 + se2 * se2).sqrt().max(1e-300);
    if drift > drift_tol && significance > 5.0 {
        return Err(CavityError::NoConvergence(format!(
            "measurement mean drifted by {drift:.3e} relative ({significance:.1} sigma)"
        )));
    }
    Ok(PopulationResult { epsilon, stderr, samples, drift, max_imag, aux_mean, member_h0 })
}

/// Population dynamics for a globally normalised kernel (normaliser kappa,
/// kappa = 1 gives the unnormalised kernel). Returns the Bayes error at data
/// density nu and the individual local-error samples.
#[allow(clippy::too_many_arguments)]
pub fn population_dynamics_global(
    dd: &DegreeDistribution,
    a: f64,
    p: u32,
    sigma2: f64,
    nu: f64,
    kappa: f64,
    params: &PopulationParams,
    seed: u64,
) -> Result<PopulationResult, CavityError> {
    validate_population_inputs(dd, sigma2, nu, params)?;
    if !(kappa > 0.0) {
        return Err(CavityError::BadParameter(format!("kappa {kappa} must be > 0")));
    }
    let engine = CavityEngine::new(a, p)?;
    let tables = DegreeTables::build(&engine, dd);
    let mut rng = derive_rng(seed, &[0x6361_7669_7479_0001]);
    let mut members = init_members(&engine, dd, params.size)?;
    let c0 = engine.c0();

    let update_one = |members: &mut Vec<CavityCovariance>,
                          rng: &mut ChaCha8Rng|
     -> Result<(), CavityError> {
        let d = dd.sample_edge_weighted(rng);
        let n = sample_poisson(rng, nu);
        let mut w = tables.base(d).clone();
        for _ in 0..d - 1 {
            let idx = rng.random_range(0..members.len());
            engine.subtract_edge_coupling(&mut w, &members[idx]);
        }
        let ratio = (n as f64 / sigma2) / (d as f64 * kappa);
        let msg = engine.message_from(&w, ratio)?;
        let slot = rng.random_range(0..members.len());
        members[slot] = msg;
        Ok(())
    };

    for _ in 0..params.burn_in_sweeps {
        for _ in 0..params.size {
            update_one(&mut members, &mut rng)?;
        }
    }
    let mut samples = Vec::with_capacity(params.measure_sweeps * params.size);
    let mut max_imag: f64 = 0.0;
    for _ in 0..params.measure_sweeps {
        for _ in 0..params.size {
            update_one(&mut members, &mut rng)?;
            let d = dd.sample(&mut rng);
            let n = sample_poisson(&mut rng, nu);
            let n_over = n as f64 / sigma2;
            let err = if d == 0 {
                1.0 / (n_over + kappa / c0)
            } else {
                let mut w = tables.base(d).clone();
                for _ in 0..d {
                    let idx = rng.random_range(0..members.len());
                    engine.subtract_edge_coupling(&mut w, &members[idx]);
                }
                let m00 = engine.m00(&w)?;
                max_imag = max_imag.max(m00.im.abs());
                1.0 / (n_over + d as f64 * kappa * m00.re)
            };
            samples.push(err);
        }
    }
    let member_h0 = members
        .iter()
        .map(|m| (m.matrix.get(0, 0).re, m.matrix.get(0, 0).im))
        .collect();
    finish_population_run(samples, max_imag, None, member_h0, params.drift_tol)
}

fn init_members(
    engine: &CavityEngine,
    dd: &DegreeDistribution,
    size: usize,
) -> Result<Vec<CavityCovariance>, CavityError> {
    let d0 = dd.mode_positive();
    let base = engine.base_matrix(d0);
    let mut inv = complex_lu(&base)?.inverse();
    inv.symmetrize();
    Ok(vec![CavityCovariance { matrix: inv }; size])
}

/// Average prior variance of the unnormalised kernel over the ensemble: one
/// population-dynamics run with kappa = 1 and nu = 0. This is the global
/// normalisation constant.
pub fn estimate_kappa_global(
    dd: &DegreeDistribution,
    a: f64,
    p: u32,
    params: &PopulationParams,
    seed: u64,
) -> Result<f64, CavityError> {
    Ok(population_dynamics_global(dd, a, p, 1.0, 0.0, 1.0, params, seed)?.epsilon)
}

/// Distribution of local prior variances of the globally normalised kernel
/// (population dynamics at nu = 0); the returned samples include the
/// isolated-vertex atom at c_0 / kappa.
#[allow(clippy::too_many_arguments)]
pub fn prior_variance_distribution(
    dd: &DegreeDistribution,
    a: f64,
    p: u32,
    kappa: f64,
    params: &PopulationParams,
    seed: u64,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<(Histogram, Vec<f64>), CavityError> {
    let run = population_dynamics_global(dd, a, p, 1.0, 0.0, kappa, params, seed)?;
    let hist = Histogram::from_samples(&run.samples, bins, range);
    Ok((hist, run.samples))
}

/// Population dynamics for the locally normalised kernel: a joint population
/// of (V_loc, V) pairs. V evolves as in the unnormalised nu = 0 problem; the
/// local normaliser kappa = 1/(c d (M_d^-1)_00) is read off the V-side with
/// one extra counterflow member, then V_loc is updated with the data term.
#[allow(clippy::too_many_arguments)]
pub fn population_dynamics_local(
    dd: &DegreeDistribution,
    a: f64,
    p: u32,
    sigma2: f64,
    nu: f64,
    c: f64,
    params: &PopulationParams,
    seed: u64,
) -> Result<PopulationResult, CavityError> {
    validate_population_inputs(dd, sigma2, nu, params)?;
    if !(c > 0.0) {
        return Err(CavityError::BadParameter(format!(
            "target prior variance {c} must be > 0"
        )));
    }
    let engine = CavityEngine::new(a, p)?;
    let tables = DegreeTables::build(&engine, dd);
    let mut rng = derive_rng(seed, &[0x6361_7669_7479_0002]);
    let init = init_members(&engine, dd, params.size)?;
    let mut members: Vec<(CavityCovariance, CavityCovariance)> =
        init.into_iter().map(|m| (m.clone(), m)).collect();
    let c0 = engine.c0();

    let update_one = |members: &mut Vec<(CavityCovariance, CavityCovariance)>,
                          rng: &mut ChaCha8Rng|
     -> Result<(), CavityError> {
        let d = dd.sample_edge_weighted(rng);
        let picks: Vec<usize> = (0..d - 1).map(|_| rng.random_range(0..members.len())).collect();
        // V side: unnormalised, no data
        let mut w_v = tables.base(d).clone();
        for &idx in &picks {
            engine.subtract_edge_coupling(&mut w_v, &members[idx].1);
        }
        let v_new = engine.message_from(&w_v, 0.0)?;
        // local normaliser from the full V-marginal: d - 1 picks plus one
        // counterflow member from the V side
        let counter = rng.random_range(0..members.len());
        engine.subtract_edge_coupling(&mut w_v, &members[counter].1);
        let m00v = engine.m00(&w_v)?;
        let kappa = 1.0 / (c * d as f64 * m00v.re);
        // V_loc side: normalised kernel with the data term
        let n = sample_poisson(rng, nu);
        let mut w_loc = tables.base(d).clone();
        for &idx in &picks {
            engine.subtract_edge_coupling(&mut w_loc, &members[idx].0);
        }
        let ratio = (n as f64 / sigma2) / (d as f64 * kappa);
        let loc_new = engine.message_from(&w_loc, ratio)?;
        let slot = rng.random_range(0..members.len());
        members[slot] = (loc_new, v_new);
        Ok(())
    };

    for _ in 0..params.burn_in_sweeps {
        for _ in 0..params.size {
            update_one(&mut members, &mut rng)?;
        }
    }
    let mut samples = Vec::with_capacity(params.measure_sweeps * params.size);
    let mut aux_acc = 0.0;
    let mut aux_count = 0usize;
    let mut max_imag: f64 = 0.0;
    for _ in 0..params.measure_sweeps {
        for _ in 0..params.size {
            update_one(&mut members, &mut rng)?;
            let d = dd.sample(&mut rng);
            let n = sample_poisson(&mut rng, nu);
            let n_over = n as f64 / sigma2;
            let err = if d == 0 {
                aux_acc += c0;
                aux_count += 1;
                1.0 / (n_over + 1.0 / c)
            } else {
                let picks: Vec<usize> =
                    (0..d).map(|_| rng.random_range(0..members.len())).collect();
                let mut w_loc = tables.base(d).clone();
                let mut w_v = tables.base(d).clone();
                for &idx in &picks {
                    engine.subtract_edge_coupling(&mut w_loc, &members[idx].0);
                    engine.subtract_edge_coupling(&mut w_v, &members[idx].1);
                }
                let m00_loc = engine.m00(&w_loc)?;
                let m00_v = engine.m00(&w_v)?;
                max_imag = max_imag.max(m00_loc.im.abs()).max(m00_v.im.abs());
                aux_acc += 1.0 / (d as f64 * m00_v.re);
                aux_count += 1;
                1.0 / (n_over + m00_loc.re / (c * m00_v.re))
            };
            samples.push(err);
        }
    }
    let aux_mean = Some(aux_acc / aux_count.max(1) as f64);
    let member_h0 = members
        .iter()
        .map(|m| (m.0.matrix.get(0, 0).re, m.0.matrix.get(0, 0).im))
        .collect();
    finish_population_run(samples, max_imag, aux_mean, member_h0, params.drift_tol)
}

/// Kernel normalisation selector for the distribution exports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CavityNormalisation {
    Global { kappa: f64 },
    Local { c: f64 },
}

/// Histogram of per-draw local posterior variances at data density nu.
#[allow(clippy::too_many_arguments)]
pub fn posterior_variance_distribution(
    mode: CavityNormalisation,
    dd: &DegreeDistribution,
    a: f64,
    p: u32,
    sigma2: f64,
    nu: f64,
    params: &PopulationParams,
    seed: u64,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<(Histogram, Vec<f64>), CavityError> {
    let run = match mode {
        CavityNormalisation::Global { kappa } => {
            population_dynamics_global(dd, a, p, sigma2, nu, kappa, params, seed)?
        }
        CavityNormalisation::Local { c } => {
            population_dynamics_local(dd, a, p, sigma2, nu, c, params, seed)?
        }
    };
    Ok((Histogram::from_samples(&run.samples, bins, range), run.samples))
}
