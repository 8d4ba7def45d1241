//! Exact Gaussian process regression on graph vertices and the Monte-Carlo
//! machinery built on it: Bayes-error evaluation, matched and mismatched
//! learning-curve simulation, posterior-variance statistics and the
//! pseudo-training-output diagnostics.
//!
//! Repeated examples at a vertex are handled through their sufficient
//! statistics: n observations at vertex i are equivalent to one observation
//! with noise sigma^2 / n, which keeps every solve at most V x V no matter
//! how large the data set grows.

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{EnsembleSpec, GraphError};
use crate::hist::Histogram;
use crate::kernel::{KernelError, KernelMatrix, KernelSpec};
use crate::linalg::{chol_factor, sym_eigen, DenseMatrix, LinalgError};
use crate::rng::{derive_rng, fill_standard_normal};

#[derive(Debug, Error)]
pub enum GpError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("vertex index {index} out of range for V = {v}")]
    VertexOutOfRange { index: usize, v: usize },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}

/// Training data: vertex indices (repeats allowed), outputs, noise variance.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub inputs: Vec<usize>,
    pub outputs: Vec<f64>,
    pub noise: f64,
}

impl Dataset {
    pub fn new(inputs: Vec<usize>, outputs: Vec<f64>, noise: f64) -> Result<Self, GpError> {
        if inputs.len() != outputs.len() {
            return Err(GpError::InvalidDataset(format!(
                "{} inputs vs {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        if !(noise > 0.0) || !noise.is_finite() {
            return Err(GpError::InvalidDataset(format!(
                "noise variance {noise} must be > 0"
            )));
        }
        Ok(Self { inputs, outputs, noise })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

fn check_inputs(k: &KernelMatrix, inputs: &[usize]) -> Result<(), GpError> {
    let v = k.vertex_count();
    if let Some(&bad) = inputs.iter().find(|&&i| i >= v) {
        return Err(GpError::VertexOutOfRange { index: bad, v });
    }
    Ok(())
}

/// Per-vertex example counts from a list of input locations.
pub fn input_counts(v: usize, inputs: &[usize]) -> Vec<u32> {
    let mut counts = vec![0u32; v];
    for &i in inputs {
        counts[i] += 1;
    }
    counts
}

/// Posterior mean and variance at every vertex, from the N x N data Gram
/// matrix K = C_xx + sigma^2 I.
pub fn gp_posterior(k: &KernelMatrix, data: &Dataset) -> Result<(Vec<f64>, Vec<f64>), GpError> {
    check_inputs(k, &data.inputs)?;
    let v = k.vertex_count();
    let n = data.len();
    if n == 0 {
        return Ok((vec![0.0; v], k.diagonal()));
    }
    let mut gram = DenseMatrix::zeros(n, n);
    for (r, &xr) in data.inputs.iter().enumerate() {
        for (c, &xc) in data.inputs.iter().enumerate() {
            let mut val = k.get(xr, xc);
            if r == c {
                val += data.noise;
            }
            gram.set(r, c, val);
        }
    }
    let factor = chol_factor(&gram)?;
    let alpha = factor.solve(&data.outputs)?;
    let mean: Vec<f64> = (0..v)
        .map(|j| {
            data.inputs
                .iter()
                .zip(&alpha)
                .map(|(&x, &a)| k.get(j, x) * a)
                .sum()
        })
        .collect();
    // W = L^-1 K_V^T; column sums of squares give the explained variance
    let mut rows = DenseMatrix::zeros(n, v);
    for (r, &xr) in data.inputs.iter().enumerate() {
        rows.row_mut(r).copy_from_slice(k.matrix().row(xr));
    }
    factor.forward_rows(&mut rows);
    let variance: Vec<f64> = (0..v)
        .map(|j| {
            let explained: f64 = (0..n).map(|r| rows.get(r, j) * rows.get(r, j)).sum();
            k.get(j, j) - explained
        })
        .collect();
    Ok((mean, variance))
}

/// Posterior variances from per-vertex example counts, through the grouped
/// m x m system (m = number of distinct observed vertices). Identical to the
/// N x N route because repeated Gaussian observations reduce to their mean.
pub fn posterior_variances(
    k: &KernelMatrix,
    counts: &[u32],
    sigma2: f64,
) -> Result<Vec<f64>, GpError> {
    let v = k.vertex_count();
    assert_eq!(counts.len(), v, "counts length must equal vertex count");
    let support: Vec<usize> = (0..v).filter(|&i| counts[i] > 0).collect();
    let m = support.len();
    if m == 0 {
        return Ok(k.diagonal());
    }
    let mut gram = DenseMatrix::zeros(m, m);
    for (r, &ir) in support.iter().enumerate() {
        for (c, &ic) in support.iter().enumerate() {
            let mut val = k.get(ir, ic);
            if r == c {
                val += sigma2 / counts[ir] as f64;
            }
            gram.set(r, c, val);
        }
    }
    let factor = chol_factor(&gram)?;
    let mut rows = DenseMatrix::zeros(m, v);
    for (r, &ir) in support.iter().enumerate() {
        rows.row_mut(r).copy_from_slice(k.matrix().row(ir));
    }
    factor.forward_rows(&mut rows);
    Ok((0..v)
        .map(|j| {
            let explained: f64 = (0..m).map(|r| rows.get(r, j) * rows.get(r, j)).sum();
            k.get(j, j) - explained
        })
        .collect())
}

/// Bayes error (1/V) sum_j posterior variance_j; depends on the inputs only,
/// never on the outputs.
pub fn bayes_error_exact(k: &KernelMatrix, inputs: &[usize], sigma2: f64) -> Result<f64, GpError> {
    check_inputs(k, inputs)?;
    let counts = input_counts(k.vertex_count(), inputs);
    let vars = posterior_variances(k, &counts, sigma2)?;
    Ok(vars.iter().sum::<f64>() / k.vertex_count() as f64)
}

/// Draws one function from the zero-mean GP prior with covariance `k`.
///
/// Cholesky when the kernel is strictly positive definite; singular PSD
/// kernels (exactly flat directions arise at a = 2 on bipartite components)
/// fall back to the eigenvector route with negative rounding clipped.
pub fn sample_gp_prior(k: &KernelMatrix, seed: u64) -> Result<Vec<f64>, GpError> {
    let mut rng = derive_rng(seed, &[0x6770_7072_696f_7200]);
    sample_gp_prior_with(k, &mut rng)
}

pub fn sample_gp_prior_with(
    k: &KernelMatrix,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<f64>, GpError> {
    let v = k.vertex_count();
    let mut z = vec![0.0; v];
    fill_standard_normal(rng, &mut z);
    match chol_factor(k.matrix()) {
        Ok(factor) => {
            let l = factor.lower();
            Ok((0..v)
                .map(|i| (0..=i).map(|j| l.get(i, j) * z[j]).sum())
                .collect())
        }
        Err(LinalgError::NotPositiveDefinite { .. }) => {
            let eig = sym_eigen(k.matrix())?;
            let scale = eig.values.last().copied().unwrap_or(0.0).max(0.0);
            let mut coeff = vec![0.0; v];
            for (i, &lam) in eig.values.iter().enumerate() {
                if lam < -1e-8 * scale.max(1.0) {
                    return Err(GpError::Kernel(KernelError::BadParameter(format!(
                        "kernel not PSD: eigenvalue {lam}"
                    ))));
                }
                coeff[i] = lam.max(0.0).sqrt() * z[i];
            }
            Ok((0..v)
                .map(|j| (0..v).map(|i| eig.vectors.get(j, i) * coeff[i]).sum())
                .collect())
        }
        Err(e) => Err(e.into()),
    }
}

/// Graph and dataset replicate counts for simulated curves: `graphs` fresh
/// graph draws, `datasets` input draws per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicateCounts {
    pub graphs: usize,
    pub datasets: usize,
}

impl ReplicateCounts {
    pub fn total(&self) -> usize {
        self.graphs * self.datasets
    }
}

/// Provenance carried by every exported curve.
#[derive(Debug, Clone)]
pub struct CurveMeta {
    pub predictor: String,
    pub ensemble: String,
    pub kernel: String,
    pub sigma2: f64,
    pub replicates: Option<ReplicateCounts>,
    pub seed: u64,
}

impl CurveMeta {
    pub fn analytic(predictor: impl Into<String>, kernel: String, sigma2: f64) -> Self {
        CurveMeta {
            predictor: predictor.into(),
            ensemble: String::new(),
            kernel,
            sigma2,
            replicates: None,
            seed: 0,
        }
    }
}

/// Bayes / generalisation error on a grid of data densities nu = N / V.
#[derive(Debug, Clone)]
pub struct LearningCurve {
    pub nu_grid: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub stderr: Vec<f64>,
    pub meta: CurveMeta,
}

impl LearningCurve {
    /// CSV with header nu,epsilon,stderr.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "nu,epsilon,stderr")?;
        for ((nu, eps), se) in self.nu_grid.iter().zip(&self.epsilon).zip(&self.stderr) {
            writeln!(w, "{nu},{eps},{se}")?;
        }
        Ok(())
    }

    pub fn epsilon_at(&self, nu: f64) -> Option<(f64, f64)> {
        self.nu_grid
            .iter()
            .position(|&x| (x - nu).abs() < 1e-12)
            .map(|i| (self.epsilon[i], self.stderr[i]))
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

const TAG_GRAPH: u64 = 0x6772_6170_6800_0001;
const TAG_DATA: u64 = 0x6461_7461_0000_0002;
const TAG_TEACHER: u64 = 0x7465_6163_6800_0003;

/// Draws n input locations uniformly with replacement, returned as counts.
pub fn draw_counts(v: usize, n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<u32> {
    use rand::Rng;
    let mut counts = vec![0u32; v];
    for _ in 0..n {
        counts[rng.random_range(0..v)] += 1;
    }
    counts
}

/// Runs `per_replicate` over the (graph, dataset, nu) grid with deterministic
/// per-replicate streams and a reduction in fixed index order.
fn replicate_curve<F>(
    ensemble: &EnsembleSpec,
    v: usize,
    nu_grid: &[f64],
    replicates: ReplicateCounts,
    seed: u64,
    per_replicate: F,
) -> Result<(Vec<f64>, Vec<f64>), GpError>
where
    F: Fn(&crate::graph::Graph, &[u32]) -> Result<f64, GpError> + Sync,
{
    let per_graph: Vec<Result<Vec<Vec<f64>>, GpError>> = (0..replicates.graphs)
        .into_par_iter()
        .map(|g_idx| {
            let graph_seed = crate::rng::sub_seed(seed, &[TAG_GRAPH, g_idx as u64]);
            let graph = ensemble.generate(v, graph_seed)?;
            let mut out = Vec::with_capacity(replicates.datasets);
            for s_idx in 0..replicates.datasets {
                let mut errs = Vec::with_capacity(nu_grid.len());
                for (q_idx, &nu) in nu_grid.iter().enumerate() {
                    let mut rng =
                        derive_rng(seed, &[TAG_DATA, g_idx as u64, s_idx as u64, q_idx as u64]);
                    let n = (nu * v as f64).round() as usize;
                    let counts = draw_counts(v, n, &mut rng);
                    errs.push(per_replicate(&graph, &counts)?);
                }
                out.push(errs);
            }
            Ok(out)
        })
        .collect();
    let mut per_nu: Vec<Vec<f64>> = vec![Vec::with_capacity(replicates.total()); nu_grid.len()];
    for graph_result in per_graph {
        for dataset in graph_result? {
            for (q, e) in dataset.into_iter().enumerate() {
                per_nu[q].push(e);
            }
        }
    }
    Ok(per_nu.iter().map(|vals| mean_and_stderr(vals)).unzip())
}

/// Matched-case learning curve by exact Monte-Carlo: for each nu, draw
/// graphs, draw N = round(nu V) input locations uniformly with replacement,
/// evaluate the exact Bayes error, and average.
pub fn simulate_learning_curve(
    ensemble: &EnsembleSpec,
    v: usize,
    kernel: &KernelSpec,
    sigma2: f64,
    nu_grid: &[f64],
    replicates: ReplicateCounts,
    seed: u64,
) -> Result<LearningCurve, GpError> {
    let kernel = *kernel;
    let cache: KernelCache = KernelCache::new(move |g| kernel.build(g));
    let (epsilon, stderr) = replicate_curve(
        ensemble,
        v,
        nu_grid,
        replicates,
        seed,
        |graph, counts| {
            let k = cache.get(graph)?;
            let vars = posterior_variances(&k, counts, sigma2)?;
            Ok(vars.iter().sum::<f64>() / v as f64)
        },
    )?;
    Ok(LearningCurve {
        nu_grid: nu_grid.to_vec(),
        epsilon,
        stderr,
        meta: CurveMeta {
            predictor: "simulate".into(),
            ensemble: ensemble.label(),
            kernel: kernel.label(),
            sigma2,
            replicates: Some(replicates),
            seed,
        },
    })
}

/// Per-graph kernel memoisation keyed by the graph's ensemble tag (tags
/// embed the seed, so they identify the instance).
struct KernelCache {
    build: Box<dyn Fn(&crate::graph::Graph) -> Result<KernelMatrix, KernelError> + Sync + Send>,
    slots: std::sync::Mutex<std::collections::HashMap<String, std::sync::Arc<KernelMatrix>>>,
}

impl KernelCache {
    fn new<F>(build: F) -> Self
    where
        F: Fn(&crate::graph::Graph) -> Result<KernelMatrix, KernelError> + Sync + Send + 'static,
    {
        KernelCache { build: Box::new(build), slots: std::sync::Mutex::new(Default::default()) }
    }

    fn get(&self, g: &crate::graph::Graph) -> Result<std::sync::Arc<KernelMatrix>, KernelError> {
        let key = g.ensemble_tag().to_string();
        if let Some(hit) = self.slots.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let built = std::sync::Arc::new((self.build)(g)?);
        self.slots
            .lock()
            .unwrap()
            .insert(key, built.clone());
        Ok(built)
    }
}

/// Mean squared teacher-student error for one input draw, with the Gaussian
/// averages over teacher functions and observation noise carried out in
/// closed form: with A = Cs[:,S] K^-1 and P the restriction to observed
/// vertices, the error is (1/V) [tr (I-AP) Ct (I-AP)^T + sigma^2 tr A D A^T],
/// D = diag(1/n_i).
pub fn mismatch_error(
    student: &KernelMatrix,
    teacher: &KernelMatrix,
    counts: &[u32],
    sigma2: f64,
) -> Result<f64, GpError> {
    let v = student.vertex_count();
    assert_eq!(teacher.vertex_count(), v, "kernel sizes must match");
    assert_eq!(counts.len(), v, "counts length must equal vertex count");
    let support: Vec<usize> = (0..v).filter(|&i| counts[i] > 0).collect();
    let m = support.len();
    let teacher_trace: f64 = teacher.trace();
    if m == 0 {
        return Ok(teacher_trace / v as f64);
    }
    let mut gram = DenseMatrix::zeros(m, m);
    for (r, &ir) in support.iter().enumerate() {
        for (c, &ic) in support.iter().enumerate() {
            let mut val = student.get(ir, ic);
            if r == c {
                val += sigma2 / counts[ir] as f64;
            }
            gram.set(r, c, val);
        }
    }
    let factor = chol_factor(&gram)?;
    // At = K^-1 Cs[S, :], so At[r][j] = A[j][r]
    let mut at = DenseMatrix::zeros(m, v);
    for (r, &ir) in support.iter().enumerate() {
        at.row_mut(r).copy_from_slice(student.matrix().row(ir));
    }
    factor.forward_rows(&mut at);
    factor.backward_rows(&mut at);
    // cross term tr(A P Ct) = sum_{r,j} A[j][r] Ct[S_r][j]
    let mut cross = 0.0;
    for (r, &ir) in support.iter().enumerate() {
        for (a, c) in at.row(r).iter().zip(teacher.matrix().row(ir)) {
            cross += a * c;
        }
    }
    // quadratic term tr(A Gt A^T) with Gt = Ct[S, S]
    let mut gt = DenseMatrix::zeros(m, m);
    for (r, &ir) in support.iter().enumerate() {
        for (c, &ic) in support.iter().enumerate() {
            gt.set(r, c, teacher.get(ir, ic));
        }
    }
    let h = gt.matmul(&at); // m x v
    let mut quadratic = 0.0;
    for r in 0..m {
        for (a, hh) in at.row(r).iter().zip(h.row(r)) {
            quadratic += a * hh;
        }
    }
    // noise term sigma^2 sum_{r,j} A[j][r]^2 / n_r
    let mut noise_term = 0.0;
    for (r, &ir) in support.iter().enumerate() {
        let w = sigma2 / counts[ir] as f64;
        noise_term += w * at.row(r).iter().map(|a| a * a).sum::<f64>();
    }
    Ok((teacher_trace - 2.0 * cross + quadratic + noise_term) / v as f64)
}

/// Learning curve when the student's kernel differs from the teacher's.
/// Teacher-function and noise averages are exact (see `mismatch_error`);
/// inputs and graphs are sampled.
#[allow(clippy::too_many_arguments)]
pub fn mismatch_learning_curve(
    student: &KernelSpec,
    teacher: &KernelSpec,
    ensemble: &EnsembleSpec,
    v: usize,
    sigma2: f64,
    nu_grid: &[f64],
    replicates: ReplicateCounts,
    seed: u64,
) -> Result<LearningCurve, GpError> {
    let (student, teacher) = (*student, *teacher);
    let cache_s: KernelCache = KernelCache::new(move |g| student.build(g));
    let cache_t: KernelCache = KernelCache::new(move |g| teacher.build(g));
    let (epsilon, stderr) = replicate_curve(
        ensemble,
        v,
        nu_grid,
        replicates,
        seed,
        |graph, counts| {
            let ks = cache_s.get(graph)?;
            let kt = cache_t.get(graph)?;
            mismatch_error(&ks, &kt, counts, sigma2)
        },
    )?;
    Ok(LearningCurve {
        nu_grid: nu_grid.to_vec(),
        epsilon,
        stderr,
        meta: CurveMeta {
            predictor: "mismatch".into(),
            ensemble: ensemble.label(),
            kernel: format!("student {} teacher {}", student.label(), teacher.label()),
            sigma2,
            replicates: Some(replicates),
            seed,
        },
    })
}

/// Summary of the per-vertex posterior-variance distribution.
#[derive(Debug, Clone)]
pub struct VarianceStats {
    pub mean: f64,
    /// Population variance of the local posterior variances across vertices.
    pub variance: f64,
    pub histogram: Histogram,
}

pub fn posterior_variance_stats(
    k: &KernelMatrix,
    inputs: &[usize],
    sigma2: f64,
    bins: usize,
) -> Result<VarianceStats, GpError> {
    check_inputs(k, inputs)?;
    let counts = input_counts(k.vertex_count(), inputs);
    let vars = posterior_variances(k, &counts, sigma2)?;
    let mean = vars.iter().sum::<f64>() / vars.len() as f64;
    let variance = vars.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / vars.len() as f64;
    Ok(VarianceStats {
        mean,
        variance,
        histogram: Histogram::from_samples(&vars, bins, None),
    })
}

/// Prediction decomposition f_bar = M z with M = K_V K^(-1/2) and
/// z = K^(-1/2) y the pseudo-training outputs; K^(-1/2) is the symmetric PSD
/// root from the eigendecomposition of K.
#[derive(Debug, Clone)]
pub struct PredictionDiagnostics {
    /// V x N matrix whose columns are the effective prediction vectors.
    pub m_matrix: DenseMatrix,
    pub z: Vec<f64>,
    /// Squared entries of z, the diagonal of z z^T.
    pub zsq: Vec<f64>,
}

pub fn prediction_diagnostics(
    student: &KernelMatrix,
    data: &Dataset,
) -> Result<PredictionDiagnostics, GpError> {
    check_inputs(student, &data.inputs)?;
    let v = student.vertex_count();
    let n = data.len();
    let mut gram = DenseMatrix::zeros(n, n);
    for (r, &xr) in data.inputs.iter().enumerate() {
        for (c, &xc) in data.inputs.iter().enumerate() {
            let mut val = student.get(xr, xc);
            if r == c {
                val += data.noise;
            }
            gram.set(r, c, val);
        }
    }
    let eig = sym_eigen(&gram)?;
    // K^(-1/2) = Q diag(lambda^-1/2) Q^T; K is PD because sigma^2 > 0
    let mut inv_root = DenseMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for t in 0..n {
                acc += eig.vectors.get(r, t) * eig.vectors.get(c, t) / eig.values[t].sqrt();
            }
            inv_root.set(r, c, acc);
        }
    }
    let mut kv = DenseMatrix::zeros(v, n);
    for j in 0..v {
        for (c, &xc) in data.inputs.iter().enumerate() {
            kv.set(j, c, student.get(j, xc));
        }
    }
    let m_matrix = kv.matmul(&inv_root);
    let z = inv_root.matvec(&data.outputs);
    let zsq = z.iter().map(|x| x * x).collect();
    Ok(PredictionDiagnostics { m_matrix, z, zsq })
}

/// Draws a teacher function from `teacher`'s prior, observes it at `inputs`
/// with Gaussian noise, and returns the dataset.
pub fn teacher_dataset(
    teacher: &KernelMatrix,
    inputs: &[usize],
    sigma2: f64,
    seed: u64,
) -> Result<Dataset, GpError> {
    check_inputs(teacher, inputs)?;
    let mut rng = derive_rng(seed, &[TAG_TEACHER]);
    let g = sample_gp_prior_with(teacher, &mut rng)?;
    let mut noise = vec![0.0; inputs.len()];
    fill_standard_normal(&mut rng, &mut noise);
    let outputs = inputs
        .iter()
        .zip(&noise)
        .map(|(&x, &e)| g[x] + sigma2.sqrt() * e)
        .collect();
    Dataset::new(inputs.to_vec(), outputs, sigma2)
}
