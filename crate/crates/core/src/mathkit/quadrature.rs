use std::num::NonZeroUsize;

use gauss_quad::hermite::GaussHermite;
use gauss_quad::legendre::GaussLegendre;

use crate::{Error, Result, Real};

/// Default Gauss–Hermite order for Gaussian expectations.
pub const DEFAULT_NODES: usize = 61;

/// Gauss–Hermite rule rescaled for expectations over a standard normal:
/// `E[h(G)] ~ sum_i weights[i] * h(nodes[i])`, weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    /// Probabilists' Gauss–Hermite rule with `node_count` nodes, exact for
    /// polynomials up to degree `2 node_count - 1`.
    pub fn gauss_hermite(node_count: usize) -> Result<Self> {
        let order = NonZeroUsize::new(node_count)
            .ok_or_else(|| Error::invalid("quadrature needs at least one node"))?;
        let rule = GaussHermite::new(order);
        // physicists' weight e^{-x^2} -> standard normal via x = g / sqrt 2
        let scale = std::f64::consts::SQRT_2;
        let mut pairs: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x * scale, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // enforce exact mirror symmetry so odd moments vanish
        let m = pairs.len();
        let sym: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let j = m - 1 - i;
                ((pairs[i].0 - pairs[j].0) / 2.0, (pairs[i].1 + pairs[j].1) / 2.0)
            })
            .collect();
        let mut pairs = sym;
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        for p in &mut pairs {
            p.1 /= total;
        }
        Ok(Self {
            nodes: pairs.iter().map(|p| T::lit(p.0)).collect(),
            weights: pairs.iter().map(|p| T::lit(p.1)).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

}

impl Default for QuadratureRule<f64> {
    fn default() -> Self {
        Self::gauss_hermite(DEFAULT_NODES).expect("default order is positive")
    }
}

/// `E[h(G)]` for `G ~ N(0, 1)` under `rule`. A non-finite `h(node)` is an
/// error naming the node.
pub fn gauss_expectation<T: Real>(
    mut h: impl FnMut(T) -> T,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = h(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                node: x.as_f64(),
                value: v.as_f64(),
            });
        }
        acc = acc + w * v;
    }
    Ok(acc)
}

/// Composite Gauss–Legendre rule for standard-normal expectations of
/// piecewise-smooth integrands. The real line is truncated to
/// `[-cutoff, cutoff]`, split at caller-supplied breakpoints and then into
/// panels no wider than `max_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    cutoff: T,
    max_width: T,
}

impl<T: Real> PanelRule<T> {
    pub fn new(nodes_per_panel: usize, cutoff: T, max_width: T) -> Result<Self> {
        let order = NonZeroUsize::new(nodes_per_panel)
            .ok_or_else(|| Error::invalid("panel rule needs at least one node"))?;
        if !(cutoff > T::zero()) || !(max_width > T::zero()) {
            return Err(Error::invalid("panel cutoff and width must be positive"));
        }
        let rule = GaussLegendre::new(order);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| T::lit(p.0)).collect(),
            weights: pairs.iter().map(|p| T::lit(p.1 / 2.0)).collect(),
            cutoff,
            max_width,
        })
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes.len()
    }

    /// `E[h(G)]` with panels aligned to `breaks`; breakpoints outside the
    /// truncation range are ignored.
    pub fn expectation(&self, mut h: impl FnMut(T) -> T, breaks: &[T]) -> Result<T> {
        let mut cuts = vec![-self.cutoff, self.cutoff];
        cuts.extend(
            breaks
                .iter()
                .copied()
                .filter(|b| b.is_finite() && b.abs() < self.cutoff),
        );
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        cuts.dedup();
        let half = T::lit(0.5);
        let norm = T::one() / (T::lit(2.0) * T::PI()).sqrt();
        let mut acc = T::zero();
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let pieces = ((b - a) / self.max_width).ceil().max(T::one());
            let count = pieces.as_f64() as usize;
            let width = (b - a) / pieces;
            for k in 0..count {
                let lo = a + width * T::lit(k as f64);
                let mid = lo + width * half;
                for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                    let g = mid + width * half * x;
                    let v = h(g);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteIntegrand {
                            node: g.as_f64(),
                            value: v.as_f64(),
                        });
                    }
                    acc = acc + width * w * norm * (-half * g * g).exp() * v;
                }
            }
        }
        Ok(acc)
    }
}

impl Default for PanelRule<f64> {
    fn default() -> Self {
        Self::new(24, 12.0, 2.0).expect("default panel rule is valid")
    }
}
