//! Experiment orchestration: runs the requested predictors over the
//! configured parameter grid and writes one CSV per (predictor, sigma2)
//! under the output directory, plus a manifest describing the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use graphgp::cavity::{
    estimate_kappa_global, population_dynamics_global, population_dynamics_local,
    posterior_variance_distribution, CavityError, CavityNormalisation, PopulationParams,
};
use graphgp::eigcurve::{
    eig_learning_curve, kernel_spectrum, master_curve, write_master_csv, EigCurveError,
    TreeSpectrum,
};
use graphgp::gp::{
    draw_counts, mismatch_learning_curve, posterior_variances, simulate_learning_curve,
    CurveMeta, GpError, LearningCurve, ReplicateCounts,
};
use graphgp::graph::GraphError;
use graphgp::hist::Histogram;
use graphgp::kernel::{
    cycle_threshold, kernel_diagonal, neighbor_kernel_average, random_walk_kernel,
    tree_kernel_limit, tree_kernel_recursion, KernelError, Normalisation,
};
use graphgp::rng::{derive_rng, RNG_ALGORITHM};

use crate::config::{ExperimentConfig, NormalisationConfig, Predictor};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Eig(#[from] EigCurveError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub wall_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub rng: String,
    pub files: Vec<ManifestFile>,
    pub total_wall_ms: u128,
}

/// Everything a subcommand needs: validated config, resolved output
/// directory and seed, and the hash of the raw config document.
pub struct RunContext {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub config_hash: String,
    pub command: String,
    pub dump_kernel: bool,
    pub dump_population: bool,
    started: Instant,
    files: Vec<ManifestFile>,
}

impl RunContext {
    pub fn new(
        cfg: ExperimentConfig,
        config_bytes: &[u8],
        out: PathBuf,
        seed_override: Option<u64>,
        command: &str,
    ) -> Self {
        let seed = seed_override.unwrap_or(cfg.seed);
        let config_hash = hex_digest(config_bytes);
        RunContext {
            cfg,
            out,
            seed,
            config_hash,
            command: command.to_string(),
            dump_kernel: false,
            dump_population: false,
            started: Instant::now(),
            files: Vec::new(),
        }
    }

    fn write_file(&mut self, rel: &str, content: &str) -> Result<(), RunError> {
        let t0 = Instant::now();
        let path = self.out.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(&path))?;
        }
        fs::write(&path, content).map_err(io_err(&path))?;
        self.files.push(ManifestFile {
            path: rel.to_string(),
            wall_ms: t0.elapsed().as_millis(),
        });
        Ok(())
    }

    /// Writes the manifest and returns it.
    pub fn finish(mut self) -> Result<Manifest, RunError> {
        let manifest = Manifest {
            command: self.command.clone(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            rng: RNG_ALGORITHM.to_string(),
            files: std::mem::take(&mut self.files),
            total_wall_ms: self.started.elapsed().as_millis(),
        };
        let path = self.out.join("manifest.json");
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(&path))?;
        }
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

use graphgp::rng::sub_seed;

const TAG_INSTANCE: u64 = 0x696e_7374_0000_0001;
const TAG_KAPPA: u64 = 0x6b61_7070_0000_0002;
const TAG_CAVITY: u64 = 0x6361_7600_0000_0003;
const TAG_VDIST: u64 = 0x7664_6973_0000_0004;

fn curve_csv(curve: &LearningCurve) -> String {
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("csv is utf8")
}

fn sigma_name(sigma2: f64) -> String {
    format!("{sigma2}")
}

/// Runs every requested predictor from `set` that the config enables.
pub fn run_predictors(ctx: &mut RunContext, set: &[Predictor]) -> Result<(), RunError> {
    let enabled: Vec<Predictor> = set
        .iter()
        .copied()
        .filter(|p| ctx.cfg.predictors.contains(p))
        .collect();
    if enabled.is_empty() {
        return Err(RunError::Invalid(format!(
            "config field `predictors`: none of {set:?} are enabled"
        )));
    }
    for predictor in enabled {
        match predictor {
            Predictor::Simulate => run_simulate(ctx)?,
            Predictor::Eig => run_eig(ctx)?,
            Predictor::EigTree => run_eig_tree(ctx)?,
            Predictor::Cavity => run_cavity(ctx)?,
            Predictor::Master => run_master(ctx)?,
        }
    }
    Ok(())
}

fn run_simulate(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let ensemble = cfg.ensemble.to_spec();
    let kernel = cfg.kernel.to_spec();
    let reps = ReplicateCounts { graphs: cfg.replicates.graphs, datasets: cfg.replicates.datasets };
    for &sigma2 in &cfg.sigma2 {
        let curve = simulate_learning_curve(
            &ensemble,
            cfg.v,
            &kernel,
            sigma2,
            &cfg.nu_grid,
            reps,
            ctx.seed,
        )?;
        ctx.write_file(&format!("simulate/{}.csv", sigma_name(sigma2)), &curve_csv(&curve))?;
    }
    Ok(())
}

fn run_eig(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let ensemble = cfg.ensemble.to_spec();
    let kernel = cfg.kernel.to_spec();
    // one representative instance fixes the empirical spectrum
    let graph = ensemble.generate(cfg.v, sub_seed(ctx.seed, &[TAG_INSTANCE]))?;
    let k = kernel.build(&graph)?;
    let spectrum = kernel_spectrum(&k)?;
    for &sigma2 in &cfg.sigma2 {
        let curve = eig_learning_curve(&spectrum, &cfg.nu_grid, sigma2)?;
        ctx.write_file(&format!("eig/{}.csv", sigma_name(sigma2)), &curve_csv(&curve))?;
    }
    Ok(())
}

fn run_eig_tree(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let d = cfg
        .ensemble
        .regular_degree()
        .ok_or_else(|| RunError::Invalid("eig_tree needs a regular ensemble".into()))?;
    let ts = TreeSpectrum::new(d, cfg.kernel.a, cfg.kernel.p)?;
    for &sigma2 in &cfg.sigma2 {
        let curve = ts.learning_curve(&cfg.nu_grid, sigma2)?;
        ctx.write_file(&format!("eig_tree/{}.csv", sigma_name(sigma2)), &curve_csv(&curve))?;
    }
    Ok(())
}

fn run_master(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let d = cfg
        .ensemble
        .regular_degree()
        .ok_or_else(|| RunError::Invalid("master needs a regular ensemble".into()))?;
    for &sigma2 in &cfg.sigma2 {
        let curve = master_curve(d, cfg.kernel.a, cfg.kernel.p, sigma2, &cfg.nu_grid)?;
        let mut buf = Vec::new();
        write_master_csv(&curve, cfg.kernel.p, &mut buf).expect("in-memory write");
        ctx.write_file(
            &format!("master/{}.csv", sigma_name(sigma2)),
            &String::from_utf8(buf).expect("csv is utf8"),
        )?;
    }
    Ok(())
}

/// Cavity prediction over the nu grid; nu points run in parallel with
/// per-point seeds, so the curve is reproducible regardless of scheduling.
type MemberDump = Vec<(f64, Vec<(f64, f64)>)>;

fn cavity_curve(
    ctx: &RunContext,
    sigma2: f64,
    sigma_index: usize,
) -> Result<(LearningCurve, MemberDump), RunError> {
    let cfg = &ctx.cfg;
    let dd = cfg.ensemble.to_spec().degree_distribution()?;
    let params: PopulationParams = cfg.population.to_params();
    let (a, p) = (cfg.kernel.a, cfg.kernel.p);
    let mode = cfg.kernel.normalisation;
    let kappa = match mode {
        NormalisationConfig::Raw => 1.0,
        NormalisationConfig::Global => {
            estimate_kappa_global(&dd, a, p, &params, sub_seed(ctx.seed, &[TAG_KAPPA]))?
        }
        NormalisationConfig::Local => f64::NAN, // unused
    };
    let want_dump = ctx.dump_population;
    let points: Vec<Result<(f64, f64, Vec<(f64, f64)>), RunError>> = cfg
        .nu_grid
        .par_iter()
        .enumerate()
        .map(|(qi, &nu)| {
            let seed = sub_seed(ctx.seed, &[TAG_CAVITY, sigma_index as u64, qi as u64]);
            let run = match mode {
                NormalisationConfig::Local => population_dynamics_local(
                    &dd, a, p, sigma2, nu, cfg.kernel.c, &params, seed,
                )?,
                _ => population_dynamics_global(&dd, a, p, sigma2, nu, kappa, &params, seed)?,
            };
            let dump = if want_dump { run.member_h0 } else { Vec::new() };
            Ok((run.epsilon, run.stderr, dump))
        })
        .collect();
    let mut epsilon = Vec::with_capacity(cfg.nu_grid.len());
    let mut stderr = Vec::with_capacity(cfg.nu_grid.len());
    let mut dumps = Vec::new();
    for (qi, point) in points.into_iter().enumerate() {
        let (e, s, dump) = point?;
        epsilon.push(e);
        stderr.push(s);
        if want_dump {
            dumps.push((cfg.nu_grid[qi], dump));
        }
    }
    Ok((LearningCurve {
        nu_grid: cfg.nu_grid.clone(),
        epsilon,
        stderr,
        meta: CurveMeta {
            predictor: "cavity".into(),
            ensemble: cfg.ensemble.to_spec().label(),
            kernel: cfg.kernel.to_spec().label(),
            sigma2,
            replicates: None,
            seed: ctx.seed,
        },
    }, dumps))
}

fn run_cavity(ctx: &mut RunContext) -> Result<(), RunError> {
    let sigma2s = ctx.cfg.sigma2.clone();
    for (si, &sigma2) in sigma2s.iter().enumerate() {
        let (curve, dumps) = cavity_curve(ctx, sigma2, si)?;
        ctx.write_file(&format!("cavity/{}.csv", sigma_name(sigma2)), &curve_csv(&curve))?;
        for (nu, members) in dumps {
            let mut csv = String::from("member,h0_re,h0_im\n");
            for (i, (re, im)) in members.iter().enumerate() {
                csv.push_str(&format!("{i},{re},{im}\n"));
            }
            ctx.write_file(
                &format!("cavity/population_{}_nu{}.csv", sigma_name(sigma2), nu),
                &csv,
            )?;
        }
    }
    Ok(())
}

/// Writes the generated graph instance as an edge list plus its degree
/// distribution.
pub fn run_gen_graph(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let graph = cfg
        .ensemble
        .to_spec()
        .generate(cfg.v, sub_seed(ctx.seed, &[TAG_INSTANCE]))?;
    let mut edges = Vec::new();
    graph
        .write_edge_list(&mut edges)
        .expect("in-memory write");
    ctx.write_file("graph/edges.txt", &String::from_utf8(edges).expect("ascii"))?;
    let dd = graphgp::graph::degree_distribution(&graph);
    let mut csv = String::from("degree,probability\n");
    for (&d, &q) in dd.support().iter().zip(dd.probabilities()) {
        csv.push_str(&format!("{d},{q}\n"));
    }
    ctx.write_file("graph/degrees.csv", &csv)?;
    Ok(())
}

/// Kernel values by distance on the d-regular tree: columns l, one column
/// per requested p, and the limiting form.
pub fn emit_tree_kernel(d: usize, a: f64, p_list: &[u32], l_max: u32) -> Result<String, RunError> {
    let mut profiles = Vec::with_capacity(p_list.len());
    for &p in p_list {
        profiles.push(tree_kernel_recursion(d, a, p)?);
    }
    let mut csv = String::from("l");
    for &p in p_list {
        csv.push_str(&format!(",p{p}"));
    }
    csv.push_str(",pinf\n");
    for l in 0..=l_max {
        csv.push_str(&format!("{l}"));
        for prof in &profiles {
            let v = prof.values.get(l as usize).copied().unwrap_or(0.0);
            csv.push_str(&format!(",{v}"));
        }
        let lim = tree_kernel_limit(d, l)?;
        csv.push_str(&format!(",{lim}\n"));
    }
    Ok(csv)
}

pub fn run_tree_kernel(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let d = cfg
        .tree_kernel
        .d
        .or_else(|| cfg.ensemble.regular_degree())
        .ok_or_else(|| {
            RunError::Invalid(
                "config field `tree_kernel.d`: required unless the ensemble is regular".into(),
            )
        })?;
    let max_p = cfg.tree_kernel.p_list.iter().copied().max().unwrap_or(0);
    let l_max = cfg.tree_kernel.l_max.unwrap_or_else(|| max_p.min(30));
    let csv = emit_tree_kernel(d, cfg.kernel.a, &cfg.tree_kernel.p_list, l_max)?;
    ctx.write_file("tree_kernel/profile.csv", &csv)?;
    Ok(())
}

/// Prior-variance statistics of one kernel instance: the normalisation
/// constant, the histogram of globally normalised prior variances and, on
/// graphs small enough for the dense kernel, the nearest-neighbour kernel
/// average.
pub fn run_kernel_stats(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let graph = cfg
        .ensemble
        .to_spec()
        .generate(cfg.v, sub_seed(ctx.seed, &[TAG_INSTANCE]))?;
    let (a, p) = (cfg.kernel.a, cfg.kernel.p);
    let mut stats: Vec<(String, f64)> = Vec::new();
    let diag = if cfg.v <= 4000 {
        let k = random_walk_kernel(&graph, a, p, Normalisation::Raw)?;
        if graph.edge_count() > 0 {
            stats.push((
                "neighbor_kernel_average".into(),
                neighbor_kernel_average(&k, &graph)?,
            ));
        }
        if ctx.dump_kernel && cfg.v <= 2000 {
            let mut buf = Vec::new();
            k.write_csv(&mut buf).expect("in-memory write");
            ctx.write_file(
                "kernel_stats/kernel.csv",
                &String::from_utf8(buf).expect("csv is utf8"),
            )?;
        }
        k.diagonal()
    } else {
        kernel_diagonal(&graph, a, p)?
    };
    let kappa = diag.iter().sum::<f64>() / cfg.v as f64;
    stats.push(("kappa".into(), kappa));
    let prior: Vec<f64> = diag.iter().map(|x| x / kappa).collect();
    let mean = 1.0;
    let var = prior.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / cfg.v as f64;
    stats.push(("prior_variance_spread".into(), var.sqrt()));
    stats.push((
        "prior_variance_max".into(),
        prior.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    ));
    if let Some(d) = cfg.ensemble.regular_degree() {
        if d >= 3 && cfg.v >= d + 1 {
            stats.push(("cycle_threshold".into(), cycle_threshold(cfg.v, d)?));
        }
    }
    let hist = Histogram::from_samples(&prior, cfg.bins, None);
    let mut buf = Vec::new();
    hist.write_csv(&mut buf).expect("in-memory write");
    ctx.write_file(
        "kernel_stats/prior_variance_hist.csv",
        &String::from_utf8(buf).expect("csv is utf8"),
    )?;
    let mut csv = String::from("name,value\n");
    for (name, value) in stats {
        csv.push_str(&format!("{name},{value}\n"));
    }
    ctx.write_file("kernel_stats/stats.csv", &csv)?;
    Ok(())
}

pub fn run_mismatch(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let m = cfg
        .mismatch
        .as_ref()
        .ok_or_else(|| RunError::Invalid("config field `mismatch`: required".into()))?;
    let ensemble = cfg.ensemble.to_spec();
    let student = graphgp::kernel::KernelSpec {
        a: cfg.kernel.a,
        p: cfg.kernel.p,
        normalisation: m.student.to_mode(cfg.kernel.c),
    };
    let teacher = graphgp::kernel::KernelSpec {
        a: cfg.kernel.a,
        p: cfg.kernel.p,
        normalisation: m.teacher.to_mode(cfg.kernel.c),
    };
    let reps = ReplicateCounts { graphs: cfg.replicates.graphs, datasets: cfg.replicates.datasets };
    for &sigma2 in &cfg.sigma2 {
        let curve = mismatch_learning_curve(
            &student,
            &teacher,
            &ensemble,
            cfg.v,
            sigma2,
            &cfg.nu_grid,
            reps,
            ctx.seed,
        )?;
        ctx.write_file(&format!("mismatch/{}.csv", sigma_name(sigma2)), &curve_csv(&curve))?;
    }
    Ok(())
}

/// Posterior-variance distributions at every (sigma2, nu) grid point, both
/// the cavity prediction and the per-vertex simulation.
pub fn run_variance_dist(ctx: &mut RunContext) -> Result<(), RunError> {
    let cfg = ctx.cfg.clone();
    let dd = cfg.ensemble.to_spec().degree_distribution()?;
    let params: PopulationParams = cfg.population.to_params();
    let (a, p) = (cfg.kernel.a, cfg.kernel.p);
    let mode = match cfg.kernel.normalisation {
        NormalisationConfig::Raw => CavityNormalisation::Global { kappa: 1.0 },
        NormalisationConfig::Global => CavityNormalisation::Global {
            kappa: estimate_kappa_global(&dd, a, p, &params, sub_seed(ctx.seed, &[TAG_KAPPA]))?,
        },
        NormalisationConfig::Local => CavityNormalisation::Local { c: cfg.kernel.c },
    };
    let ensemble = cfg.ensemble.to_spec();
    let kernel = cfg.kernel.to_spec();
    for (si, &sigma2) in cfg.sigma2.iter().enumerate() {
        for (qi, &nu) in cfg.nu_grid.iter().enumerate() {
            let seed = sub_seed(ctx.seed, &[TAG_VDIST, si as u64, qi as u64]);
            let (hist, _) = posterior_variance_distribution(
                mode, &dd, a, p, sigma2, nu, &params, seed, cfg.bins, None,
            )?;
            let mut buf = Vec::new();
            hist.write_csv(&mut buf).expect("in-memory write");
            ctx.write_file(
                &format!("variance_dist_cavity/{}_nu{}.csv", sigma_name(sigma2), nu),
                &String::from_utf8(buf).expect("csv is utf8"),
            )?;

            // simulation: per-vertex posterior variances pooled over
            // replicate graphs and input draws
            let mut samples = Vec::new();
            for g_idx in 0..cfg.replicates.graphs {
                let graph = ensemble
                    .generate(cfg.v, sub_seed(seed, &[TAG_INSTANCE, g_idx as u64]))?;
                let k = kernel.build(&graph)?;
                for s_idx in 0..cfg.replicates.datasets {
                    let mut rng = derive_rng(seed, &[g_idx as u64, s_idx as u64]);
                    let n = (nu * cfg.v as f64).round() as usize;
                    let counts = draw_counts(cfg.v, n, &mut rng);
                    samples.extend(posterior_variances(&k, &counts, sigma2)?);
                }
            }
            let hist_sim = Histogram::from_samples(&samples, cfg.bins, None);
            let mut buf = Vec::new();
            hist_sim.write_csv(&mut buf).expect("in-memory write");
            ctx.write_file(
                &format!("variance_dist_sim/{}_nu{}.csv", sigma_name(sigma2), nu),
                &String::from_utf8(buf).expect("csv is utf8"),
            )?;
        }
    }
    Ok(())
}
