//! Equal-width histograms and a two-sample Kolmogorov-Smirnov distance,
//! shared by the variance-distribution exports and their tests.

use std::io::Write;

/// Histogram normalised to unit area (sum of density * width = 1).
#[derive(Debug, Clone)]
pub struct Histogram {
    /// bins + 1 edges, ascending
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub n_samples: usize,
}

impl Histogram {
    /// Bins `samples` into `bins` equal-width cells over `range` (or the
    /// sample min/max when absent, padded slightly so the extremes land
    /// inside).
    pub fn from_samples(samples: &[f64], bins: usize, range: Option<(f64, f64)>) -> Self {
        assert!(bins > 0, "need at least one bin");
        let (lo, hi) = range.unwrap_or_else(|| {
            let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if samples.is_empty() || lo == hi {
                (lo.min(0.0), hi.max(1.0))
            } else {
                let pad = 1e-9 * (hi - lo);
                (lo, hi + pad)
            }
        });
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        let mut kept = 0usize;
        for &x in samples {
            if x < lo || x >= hi {
                if x == hi {
                    counts[bins - 1] += 1;
                    kept += 1;
                }
                continue;
            }
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
            kept += 1;
        }
        let norm = if kept > 0 { 1.0 / (kept as f64 * width) } else { 0.0 };
        let edges = (0..=bins).map(|b| lo + b as f64 * width).collect();
        let density = counts.iter().map(|&c| c as f64 * norm).collect();
        Histogram { edges, density, n_samples: kept }
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// CSV columns bin_left, bin_right, density.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "bin_left,bin_right,density")?;
        for (i, d) in self.density.iter().enumerate() {
            writeln!(w, "{},{},{}", self.edges[i], self.edges[i + 1], d)?;
        }
        Ok(())
    }
}

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut dist: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        dist = dist.max((i as f64 / na - j as f64 / nb).abs());
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_has_unit_area() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64) / 250.0).collect();
        let h = Histogram::from_samples(&samples, 16, None);
        let area: f64 = h
            .density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (h.edges[i + 1] - h.edges[i]))
            .sum();
        assert!((area - 1.0).abs() < 1e-12, "area {area}");
        assert_eq!(h.n_samples, 1000);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        assert!(ks_distance(&a, &a) < 1e-12);
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let d = ks_distance(&a, &b);
        assert!(d > 0.45, "shifted distance {d}");
    }
}
