//! Learning-curve prediction from kernel eigenvalues: the self-consistent
//! approximation eps = g(N / (eps + sigma^2)) with
//! g(h) = sum_a (1/lambda_a + h)^-1, its continuum form on d-regular trees
//! built from the tree Laplacian spectrum, and the large-p master curve in
//! which curves depend on nu p^(3/2) only.

use thiserror::Error;

use crate::gp::{CurveMeta, LearningCurve};
use crate::kernel::KernelMatrix;
use crate::linalg::{sym_eigenvalues, LinalgError};
use crate::quad::{self, QuadError};

#[derive(Debug, Error)]
pub enum EigCurveError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("fixed point iteration did not converge ({0})")]
    NoConvergence(String),
    #[error("spectrum not PSD: eigenvalue {0}")]
    NotPsd(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Empirical,
    Tree { d: usize, a: f64, p: u32 },
}

/// Eigenvalues of C / V in descending order (the convention in which a
/// unit-average-prior-variance kernel has eigenvalue sum 1).
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    pub eigenvalues: Vec<f64>,
    pub v: usize,
    pub source: SpectrumSource,
}

impl KernelSpectrum {
    pub fn from_eigenvalues(
        mut eigenvalues: Vec<f64>,
        v: usize,
        source: SpectrumSource,
    ) -> Result<Self, EigCurveError> {
        let top = eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        for lam in eigenvalues.iter_mut() {
            if *lam < -1e-8 * top.max(1.0) {
                return Err(EigCurveError::NotPsd(*lam));
            }
            if *lam < 0.0 {
                *lam = 0.0;
            }
        }
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { eigenvalues, v, source })
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Spectrum of a kernel matrix under the (1/V) sum_j C_ij phi_j = lambda
/// phi_i convention.
pub fn kernel_spectrum(k: &KernelMatrix) -> Result<KernelSpectrum, EigCurveError> {
    let v = k.vertex_count();
    let mut vals = sym_eigenvalues(k.matrix())?;
    for x in vals.iter_mut() {
        *x /= v as f64;
    }
    KernelSpectrum::from_eigenvalues(vals, v, SpectrumSource::Empirical)
}

/// g(h) = sum_a (lambda_a^-1 + h)^-1, written as lambda/(1 + h lambda) so
/// zero eigenvalues contribute nothing.
pub fn g_sum(s: &KernelSpectrum, h: f64) -> f64 {
    s.eigenvalues.iter().map(|&lam| lam / (1.0 + h * lam)).sum()
}

/// Solves eps = g(nu / (eps + sigma2)) by damped iteration from eps = g(0),
/// falling back to bisection on [0, g(0)]; g decreasing makes the root
/// unique and bracketed.
fn solve_self_consistent<G>(g: &G, g0: f64, nu: f64, sigma2: f64) -> Result<f64, EigCurveError>
where
    G: Fn(f64) -> Result<f64, EigCurveError>,
{
    if nu == 0.0 {
        return Ok(g0);
    }
    match solve_damped(g, g0, nu, sigma2)? {
        Some(eps) => Ok(eps),
        None => solve_bisect(g, g0, nu, sigma2),
    }
}

pub(crate) fn solve_damped<G>(
    g: &G,
    g0: f64,
    nu: f64,
    sigma2: f64,
) -> Result<Option<f64>, EigCurveError>
where
    G: Fn(f64) -> Result<f64, EigCurveError>,
{
    let mut eps = g0;
    for _ in 0..1000 {
        let target = g(nu / (eps + sigma2))?;
        let next = 0.5 * eps + 0.5 * target;
        if (next - eps).abs() <= 1e-12 {
            return Ok(Some(next));
        }
        eps = next;
    }
    Ok(None)
}

pub(crate) fn solve_bisect<G>(g: &G, g0: f64, nu: f64, sigma2: f64) -> Result<f64, EigCurveError>
where
    G: Fn(f64) -> Result<f64, EigCurveError>,
{
    let psi = |eps: f64| -> Result<f64, EigCurveError> { Ok(eps - g(nu / (eps + sigma2))?) };
    let (mut lo, mut hi) = (0.0f64, g0.max(1e-300));
    let flo = psi(lo)?;
    if flo >= 0.0 {
        // g(nu/sigma2) = 0 to machine precision; the error has bottomed out
        return Ok(0.0);
    }
    if psi(hi)? < 0.0 {
        return Err(EigCurveError::NoConvergence(format!(
            "root not bracketed on [0, {hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Learning-curve prediction from a discrete kernel spectrum.
pub fn eig_learning_curve(
    s: &KernelSpectrum,
    nu_grid: &[f64],
    sigma2: f64,
) -> Result<LearningCurve, EigCurveError> {
    if !(sigma2 > 0.0) {
        return Err(EigCurveError::BadParameter(format!(
            "noise variance {sigma2} must be > 0"
        )));
    }
    let g0 = g_sum(s, 0.0);
    let vf = s.v as f64;
    let g = |z: f64| -> Result<f64, EigCurveError> { Ok(g_sum(s, z * vf)) };
    let mut epsilon = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        epsilon.push(solve_self_consistent(&g, g0, nu, sigma2)?);
    }
    Ok(LearningCurve {
        nu_grid: nu_grid.to_vec(),
        epsilon,
        stderr: vec![0.0; nu_grid.len()],
        meta: CurveMeta::analytic("eig", format!("{:?}", s.source), sigma2),
    })
}

/// Spectral edges lambda_-+ = 1 -+ 2 sqrt(d-1)/d of the d-regular tree
/// Laplacian.
pub fn tree_spectral_edges(d: usize) -> Result<(f64, f64), EigCurveError> {
    if d < 3 {
        return Err(EigCurveError::BadParameter(format!(
            "tree spectra need d >= 3, got {d}"
        )));
    }
    let df = d as f64;
    let r = 2.0 * (df - 1.0).sqrt() / df;
    Ok((1.0 - r, 1.0 + r))
}

/// Density of normalised-Laplacian eigenvalues on the infinite d-regular
/// tree; zero outside [lambda_-, lambda_+]. (Two isolated eigenvalues at 0
/// and 2 carry vanishing weight for large V and are not represented.)
pub fn mckay_density(d: usize, lambda: f64) -> Result<f64, EigCurveError> {
    let (lo, hi) = tree_spectral_edges(d)?;
    if lambda < lo || lambda > hi {
        return Ok(0.0);
    }
    let df = d as f64;
    let disc = 4.0 * (df - 1.0) / (df * df) - (lambda - 1.0) * (lambda - 1.0);
    Ok(disc.max(0.0).sqrt() / ((2.0 * std::f64::consts::PI / df) * lambda * (2.0 - lambda)))
}

/// Integrates f against the McKay density with the square-root endpoints
/// absorbed by lambda = 1 + R sin(theta).
fn mckay_integrate<F: Fn(f64) -> f64>(
    d: usize,
    f: F,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, EigCurveError> {
    let df = d as f64;
    let r = 2.0 * (df - 1.0).sqrt() / df;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let value = quad::integrate_rel(
        |theta: f64| {
            let lambda = 1.0 + r * theta.sin();
            let cos = theta.cos();
            let jac =
                df * r * r * cos * cos / (2.0 * std::f64::consts::PI * lambda * (2.0 - lambda));
            jac * f(lambda)
        },
        -half_pi,
        half_pi,
        abs_tol,
        rel_tol,
    )?;
    Ok(value)
}

/// Continuum eigenvalue structure of the random walk kernel on a large
/// d-regular graph: kernel eigenvalues kappa^-1 V^-1 (1 - lambda/a)^p over
/// the tree Laplacian spectrum, with kappa fixed by g(0) = 1.
#[derive(Debug, Clone)]
pub struct TreeSpectrum {
    pub d: usize,
    pub a: f64,
    pub p: u32,
    pub kappa: f64,
}

impl TreeSpectrum {
    pub fn new(d: usize, a: f64, p: u32) -> Result<Self, EigCurveError> {
        if !(a >= 2.0) {
            return Err(EigCurveError::BadParameter(format!(
                "kernel parameter a must be >= 2, got {a}"
            )));
        }
        let pw = p as i32;
        // kappa is the average prior variance of the unnormalised kernel,
        // the p-th walk moment of the spectral density; this is what makes
        // g(0) = 1 (and it equals the tree-recursion diagonal)
        let kappa = mckay_integrate(d, |lam| (1.0 - lam / a).powi(pw), 0.0, 1e-12)?;
        Ok(Self { d, a, p, kappa })
    }

    /// g at argument z = h / V: integral of rho(lambda) w / (kappa + z w)
    /// with w = (1 - lambda/a)^p; this form never divides by an underflowed
    /// w, modes beyond the floating range simply contribute zero.
    pub fn g(&self, z: f64) -> Result<f64, EigCurveError> {
        let (a, pw, kappa) = (self.a, self.p as i32, self.kappa);
        mckay_integrate(
            self.d,
            |lam| {
                let w = (1.0 - lam / a).powi(pw);
                w / (kappa + z * w)
            },
            1e-10,
            1e-10,
        )
    }

    /// Learning curve from the continuum spectrum; V enters only through nu.
    pub fn learning_curve(
        &self,
        nu_grid: &[f64],
        sigma2: f64,
    ) -> Result<LearningCurve, EigCurveError> {
        if !(sigma2 > 0.0) {
            return Err(EigCurveError::BadParameter(format!(
                "noise variance {sigma2} must be > 0"
            )));
        }
        let g0 = self.g(0.0)?;
        let g = |z: f64| self.g(z);
        let mut epsilon = Vec::with_capacity(nu_grid.len());
        for &nu in nu_grid {
            epsilon.push(solve_self_consistent(&g, g0, nu, sigma2)?);
        }
        Ok(LearningCurve {
            nu_grid: nu_grid.to_vec(),
            epsilon,
            stderr: vec![0.0; nu_grid.len()],
            meta: CurveMeta::analytic(
                "eig_tree",
                format!("tree(d={},a={},p={})", self.d, self.a, self.p),
                sigma2,
            ),
        })
    }
}

/// F(z) = integral over y >= 0 of y^(1/2) / (exp(y) + z); computed with the
/// substitution y = t^2 on a truncated range (the tail past t = 8 is below
/// 1e-26).
pub fn fermi_integral(z: f64) -> Result<f64, EigCurveError> {
    if !(z >= 0.0) {
        return Err(EigCurveError::BadParameter(format!(
            "fermi integral argument {z} must be >= 0"
        )));
    }
    let value = quad::integrate(|t: f64| 2.0 * t * t / ((t * t).exp() + z), 0.0, 8.0, 1e-10)?;
    Ok(value)
}

/// F(0) = sqrt(pi)/2.
pub fn fermi_zero() -> f64 {
    std::f64::consts::PI.sqrt() / 2.0
}

/// The combination c = r F(0) ((a - lambda_-)/p)^(3/2) with
/// r = (d-1)^(1/4) d^(5/2) / (pi (d-2)^2); learning curves at large p depend
/// on nu / c only, and c is proportional to p^(-3/2).
pub fn master_constant(d: usize, a: f64, p: u32) -> Result<f64, EigCurveError> {
    let (lo, _) = tree_spectral_edges(d)?;
    if !(a >= 2.0) {
        return Err(EigCurveError::BadParameter(format!(
            "kernel parameter a must be >= 2, got {a}"
        )));
    }
    let df = d as f64;
    let r =
        (df - 1.0).powf(0.25) * df.powf(2.5) / (std::f64::consts::PI * (df - 2.0) * (df - 2.0));
    Ok(r * fermi_zero() * ((a - lo) / p as f64).powf(1.5))
}

/// Large-p master curve: eps = F(nu c^-1 / (eps + sigma^2)) / F(0), solved
/// by bisection on [0, 1].
pub fn master_curve(
    d: usize,
    a: f64,
    p: u32,
    sigma2: f64,
    nu_grid: &[f64],
) -> Result<LearningCurve, EigCurveError> {
    if !(sigma2 > 0.0) {
        return Err(EigCurveError::BadParameter(format!(
            "noise variance {sigma2} must be > 0"
        )));
    }
    let c = master_constant(d, a, p)?;
    let f0 = fermi_zero();
    let g = |z: f64| -> Result<f64, EigCurveError> { Ok(fermi_integral(z / c)? / f0) };
    let mut epsilon = Vec::with_capacity(nu_grid.len());
    for &nu in nu_grid {
        if nu == 0.0 {
            epsilon.push(1.0);
        } else {
            epsilon.push(solve_bisect(&g, 1.0, nu, sigma2)?);
        }
    }
    Ok(LearningCurve {
        nu_grid: nu_grid.to_vec(),
        epsilon,
        stderr: vec![0.0; nu_grid.len()],
        meta: CurveMeta::analytic("master", format!("master(d={d},a={a},p={p})"), sigma2),
    })
}

/// Master-curve CSV with the rescaled abscissa column nu_p32 = nu p^(3/2).
pub fn write_master_csv<W: std::io::Write>(
    curve: &LearningCurve,
    p: u32,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "nu,epsilon,stderr,nu_p32")?;
    let scale = (p as f64).powf(1.5);
    for ((nu, eps), se) in curve.nu_grid.iter().zip(&curve.epsilon).zip(&curve.stderr) {
        writeln!(w, "{nu},{eps},{se},{}", nu * scale)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_regular;
    use crate::kernel::{random_walk_kernel, AppliedNormalisation, Normalisation};
    use crate::linalg::DenseMatrix;

    #[test]
    fn spectrum_identity_kernel() {
        let k = KernelMatrix::from_matrix(
            DenseMatrix::identity(4),
            2.0,
            0,
            AppliedNormalisation::Raw,
        )
        .unwrap();
        let s = kernel_spectrum(&k).unwrap();
        for &lam in &s.eigenvalues {
            assert!((lam - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_single_edge() {
        let g = crate::graph::Graph::from_edges(2, &[(0, 1)], "edge").unwrap();
        let k = random_walk_kernel(&g, 2.0, 2, Normalisation::Raw).unwrap();
        let s = kernel_spectrum(&k).unwrap();
        assert!((s.eigenvalues[0] - 0.5).abs() < 1e-12);
        assert!(s.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn spectrum_global_sums_to_one() {
        let g = gen_regular(80, 3, 5).unwrap();
        let k = random_walk_kernel(&g, 2.0, 10, Normalisation::Global).unwrap();
        let s = kernel_spectrum(&k).unwrap();
        assert!((s.sum() - 1.0).abs() < 1e-10, "sum {}", s.sum());
    }

    #[test]
    fn spectrum_matches_laplacian_map() {
        // kernel eigenvalues are kappa^-1 V^-1 (1 - lambda_L/a)^p, from the
        // same eigenvectors as the normalised Laplacian
        let v = 100;
        let g = gen_regular(v, 3, 9).unwrap();
        let (a, p) = (2.0, 10u32);
        let k = random_walk_kernel(&g, a, p, Normalisation::Global).unwrap();
        let kappa = match k.normalisation() {
            AppliedNormalisation::Global { kappa } => *kappa,
            _ => unreachable!(),
        };
        let mut lap = DenseMatrix::zeros(v, v);
        for i in 0..v {
            lap.set(i, i, 1.0);
            for &j in g.neighbors(i) {
                let w = -1.0 / ((g.degree(i) as f64) * (g.degree(j as usize) as f64)).sqrt();
                lap.set(i, j as usize, w);
            }
        }
        let lam_l = sym_eigenvalues(&lap).unwrap(); // ascending
        let s = kernel_spectrum(&k).unwrap(); // descending
        for (alpha, &ll) in lam_l.iter().enumerate() {
            let expect = (1.0 - ll / a).powi(p as i32) / (kappa * v as f64);
            assert!(
                (s.eigenvalues[alpha] - expect).abs() < 1e-8,
                "alpha {alpha}: {} vs {expect}",
                s.eigenvalues[alpha]
            );
        }
    }

    #[test]
    fn g_sum_examples() {
        let s = KernelSpectrum::from_eigenvalues(vec![1.0], 1, SpectrumSource::Empirical).unwrap();
        for h in [0.0, 0.5, 3.0, 100.0] {
            assert!((g_sum(&s, h) - 1.0 / (1.0 + h)).abs() < 1e-14);
        }
        let s =
            KernelSpectrum::from_eigenvalues(vec![0.5, 0.25, 0.0], 3, SpectrumSource::Empirical)
                .unwrap();
        assert!((g_sum(&s, 0.0) - 0.75).abs() < 1e-14);
        // large h: g ~ rank/h
        let g = g_sum(&s, 1e9);
        assert!((g - 2.0 / 1e9).abs() < 1e-12);
    }

    #[test]
    fn eig_curve_edges() {
        let g = gen_regular(60, 3, 2).unwrap();
        let k = random_walk_kernel(&g, 2.0, 8, Normalisation::Global).unwrap();
        let s = kernel_spectrum(&k).unwrap();
        let curve = eig_learning_curve(&s, &[0.0, 0.5, 2.0], 0.1).unwrap();
        assert!((curve.epsilon[0] - g_sum(&s, 0.0)).abs() < 1e-12);
        // enormous noise: the argument of g stays ~0
        let curve_noisy = eig_learning_curve(&s, &[0.5], 1e12).unwrap();
        assert!((curve_noisy.epsilon[0] - g_sum(&s, 0.0)).abs() < 1e-8);
        // monotone non-increasing in nu
        assert!(curve.epsilon[1] <= curve.epsilon[0] + 1e-12);
        assert!(curve.epsilon[2] <= curve.epsilon[1] + 1e-12);
    }

    #[test]
    fn eig_curve_monotone_in_noise() {
        let g = gen_regular(60, 3, 3).unwrap();
        let k = random_walk_kernel(&g, 2.0, 8, Normalisation::Global).unwrap();
        let s = kernel_spectrum(&k).unwrap();
        let lo = eig_learning_curve(&s, &[0.2, 1.0, 5.0], 1e-3).unwrap();
        let hi = eig_learning_curve(&s, &[0.2, 1.0, 5.0], 1e-1).unwrap();
        for (l, h) in lo.epsilon.iter().zip(&hi.epsilon) {
            assert!(l <= &(h + 1e-10), "{l} vs {h}");
        }
    }

    #[test]
    fn damped_and_bisection_agree() {
        let g = gen_regular(60, 3, 4).unwrap();
        let k = random_walk_kernel(&g, 2.0, 10, Normalisation::Global).unwrap();
        let s = kernel_spectrum(&k).unwrap();
        let vf = s.v as f64;
        let gfun = |z: f64| -> Result<f64, EigCurveError> { Ok(g_sum(&s, z * vf)) };
        let g0 = g_sum(&s, 0.0);
        for &nu in &[0.05, 0.3, 1.0, 4.0] {
            for &sigma2 in &[1e-4, 1e-2, 1e-1] {
                let damped = solve_damped(&gfun, g0, nu, sigma2).unwrap();
                let bisect = solve_bisect(&gfun, g0, nu, sigma2).unwrap();
                if let Some(damped) = damped {
                    assert!(
                        (damped - bisect).abs() < 1e-10,
                        "nu={nu} sigma2={sigma2}: {damped} vs {bisect}"
                    );
                }
            }
        }
    }

    #[test]
    fn mckay_density_values() {
        let (lo, hi) = tree_spectral_edges(3).unwrap();
        assert!((lo - 0.057191).abs() < 1e-6);
        assert!((hi - 1.942809).abs() < 1e-6);
        assert!(mckay_density(3, lo).unwrap() < 1e-7);
        assert!(mckay_density(3, hi).unwrap() < 1e-7);
        assert_eq!(mckay_density(3, 0.01).unwrap(), 0.0);
        assert_eq!(mckay_density(3, 1.99).unwrap(), 0.0);
    }

    #[test]
    fn mckay_density_normalised() {
        // adaptive quadrature of the raw density as the oracle
        let (lo, hi) = tree_spectral_edges(3).unwrap();
        let raw = quad::integrate(|x| mckay_density(3, x).unwrap(), lo, hi, 1e-8).unwrap();
        assert!((raw - 1.0).abs() < 1e-8, "raw quadrature {raw}");
        let sub = mckay_integrate(3, |_| 1.0, 1e-12, 1e-12).unwrap();
        assert!((sub - 1.0).abs() < 1e-10, "substituted {sub}");
    }

    #[test]
    fn tree_spectrum_g_normalised_and_flat_at_p0() {
        let ts = TreeSpectrum::new(3, 2.0, 10).unwrap();
        assert!((ts.g(0.0).unwrap() - 1.0).abs() < 1e-9);
        let ts0 = TreeSpectrum::new(3, 2.0, 0).unwrap();
        assert!((ts0.kappa - 1.0).abs() < 1e-10);
        for &z in &[0.0, 0.5, 4.0] {
            assert!((ts0.g(z).unwrap() - 1.0 / (1.0 + z)).abs() < 1e-9);
        }
    }

    #[test]
    fn tree_spectrum_kappa_equals_recursion_diagonal() {
        // the p-th walk moment of the McKay law is the return probability of
        // the lazy walk, i.e. the unnormalised tree kernel diagonal
        for p in [1u32, 5, 10, 40] {
            let ts = TreeSpectrum::new(3, 2.0, p).unwrap();
            let rec = crate::kernel::tree_kernel_recursion_raw(3, 2.0, p).unwrap()[0];
            assert!(
                (ts.kappa - rec).abs() < 1e-9,
                "p={p}: spectral {} vs recursion {rec}",
                ts.kappa
            );
        }
    }

    /// Dirichlet eta(3/2) by Euler-transformed alternating series; an
    /// independent oracle for the Fermi integral at z = 1.
    fn eta_three_halves() -> f64 {
        let terms: Vec<f64> = (1..=60u32)
            .map(|n| (n as f64).powf(-1.5) * if n % 2 == 1 { 1.0 } else { -1.0 })
            .collect();
        // partial sums, then repeated adjacent averaging
        let mut row: Vec<f64> = terms
            .iter()
            .scan(0.0, |acc, &t| {
                *acc += t;
                Some(*acc)
            })
            .collect();
        for _ in 0..40 {
            if row.len() < 2 {
                break;
            }
            row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        *row.last().unwrap()
    }

    #[test]
    fn fermi_integral_values() {
        assert!((fermi_integral(0.0).unwrap() - fermi_zero()).abs() < 1e-10);
        assert!((fermi_zero() - 0.8862269254527580).abs() < 1e-15);
        // F(1) = Gamma(3/2) eta(3/2)
        let expect = fermi_zero() * eta_three_halves();
        let f1 = fermi_integral(1.0).unwrap();
        assert!((f1 - expect).abs() < 1e-8, "{f1} vs {expect}");
        assert!((f1 - 0.6781).abs() < 1e-4);
        // dominated decay
        assert!(fermi_integral(1e6).unwrap() < 1e-3);
    }

    #[test]
    fn master_constant_scaling() {
        let c100 = master_constant(3, 2.0, 100).unwrap();
        let c400 = master_constant(3, 2.0, 400).unwrap();
        assert!((c400 / c100 - 0.125).abs() < 1e-10);
    }

    #[test]
    fn master_curve_edges() {
        let curve = master_curve(3, 2.0, 500, 0.1, &[0.0, 1.0, 10.0]).unwrap();
        assert_eq!(curve.epsilon[0], 1.0);
        assert!(curve.epsilon[1] < 1.0);
        assert!(curve.epsilon[2] < curve.epsilon[1]);
    }
}
