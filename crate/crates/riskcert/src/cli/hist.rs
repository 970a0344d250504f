//! Fixed-edge histograms for experiment outputs.
//!
//! Bins are half-open `[edge_i, edge_{i+1})` with the final bin closed, so
//! every value lands in exactly one bin. Callers can inject extra edges —
//! the validation experiment injects the truth estimate, which makes
//! "count of bounds at or above the truth" recoverable from the binned
//! counts alone.

/// Bin edges (`counts.len() + 1` of them, strictly increasing) and counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Bins `values` into `bins` uniform cells spanning the data (widened
    /// to cover `extra_edges`), with each extra edge inserted as an exact
    /// cell boundary.
    pub fn build(values: &[f64], bins: usize, extra_edges: &[f64]) -> Self {
        assert!(!values.is_empty(), "histogram needs at least one value");
        assert!(bins >= 1, "histogram needs at least one bin");
        let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &e in extra_edges {
            lo = lo.min(e);
            hi = hi.max(e);
        }
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        // Keep injected edges strictly interior: a value equal to the final
        // edge would fall in the last closed bin, whose left edge sits below
        // it, and `count_at_or_above` would miss it.
        if extra_edges.iter().any(|&e| e == hi) {
            hi += (hi - lo) / bins as f64;
        }
        let mut edges: Vec<f64> =
            (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        edges.extend(extra_edges.iter().copied());
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let last_bin = edges.len() - 2;
        let mut counts = vec![0u64; edges.len() - 1];
        for &v in values {
            let idx = edges.partition_point(|&e| e <= v);
            // idx is 0 only if v < lo (impossible by construction); a value
            // equal to the last edge belongs to the final closed bin.
            counts[(idx - 1).min(last_bin)] += 1;
        }
        Self { edges, counts }
    }

    /// Total count across all bins.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sum of counts over bins whose left edge is at least `edge`. When
    /// `edge` was injected as an exact boundary, this equals the number of
    /// values `>= edge`.
    pub fn count_at_or_above(&self, edge: f64) -> u64 {
        self.edges[..self.edges.len() - 1]
            .iter()
            .zip(&self.counts)
            .filter(|(&lo, _)| lo >= edge)
            .map(|(_, &c)| c)
            .sum()
    }
}
