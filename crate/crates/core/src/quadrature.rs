//! Composite and adaptive Gauss-Legendre rules for oscillatory integrands.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn reference_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = GaussLegendre::new(order).map_err(|_| {
        Error::InvalidSpec(format!(
            "Gauss-Legendre order must be at least 2, got {order}"
        ))
    })?;
    Ok((
        rule.nodes().copied().collect(),
        rule.weights().copied().collect(),
    ))
}

/// Flat list of nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// `order`-point rule on every interval between consecutive `breaks`.
    pub fn from_breaks(breaks: &[f64], order: usize) -> Result<Self> {
        let (xs, ws) = reference_rule(order)?;
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in xs.iter().zip(&ws) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Ok(CompositeRule { nodes, weights })
    }

    pub fn uniform(a: f64, b: f64, panels: usize, order: usize) -> Result<Self> {
        let panels = panels.max(1);
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| a + (b - a) * i as f64 / panels as f64)
            .collect();
        Self::from_breaks(&breaks, order)
    }

    /// Panels shrinking geometrically toward `center` (by `ratio` per level), then
    /// split so no panel is wider than `max_width`.
    pub fn graded(
        a: f64,
        b: f64,
        center: f64,
        grading: &Grading,
        max_width: f64,
        order: usize,
    ) -> Result<Self> {
        Self::from_breaks(&graded_breaks(a, b, center, grading, max_width), order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Geometric refinement toward a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub ratio: f64,
    pub levels: usize,
}

impl Default for Grading {
    fn default() -> Self {
        Grading {
            ratio: 0.5,
            levels: 20,
        }
    }
}

pub fn graded_breaks(a: f64, b: f64, center: f64, grading: &Grading, max_width: f64) -> Vec<f64> {
    multi_graded_breaks(a, b, &[center], grading, max_width)
}

/// Breaks on `[a, b]` graded toward every point of `centers` that lies inside.
pub fn multi_graded_breaks(
    a: f64,
    b: f64,
    centers: &[f64],
    grading: &Grading,
    max_width: f64,
) -> Vec<f64> {
    let mut cs: Vec<f64> = centers
        .iter()
        .copied()
        .filter(|c| *c >= a && *c <= b)
        .collect();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let mut knots = vec![a];
    knots.extend(cs.iter().copied().filter(|&c| c > a && c < b));
    knots.push(b);
    let is_center = |x: f64| cs.contains(&x);
    let toward = |from: f64, to: f64| -> Vec<f64> {
        // interior points of (from, to) accumulating at `from`
        (1..=grading.levels)
            .rev()
            .map(|i| from + (to - from) * grading.ratio.powi(i as i32))
            .collect()
    };
    let mut pts = vec![a];
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        match (is_center(lo), is_center(hi)) {
            (true, true) => {
                let mid = 0.5 * (lo + hi);
                pts.extend(toward(lo, mid));
                pts.push(mid);
                let mut upper = toward(hi, mid);
                upper.reverse();
                pts.extend(upper);
            }
            (true, false) => pts.extend(toward(lo, hi)),
            (false, true) => {
                let mut upper = toward(hi, lo);
                upper.reverse();
                pts.extend(upper);
            }
            (false, false) => {}
        }
        pts.push(hi);
    }
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let pieces = (width / max_width).ceil().max(1.0) as usize;
        for i in 1..pieces {
            out.push(w[0] + width * i as f64 / pieces as f64);
        }
        out.push(w[1]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive bisection: each panel is compared against its two halves and split
/// until the local difference is below its share of `tol`.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    order: usize,
    tol: f64,
) -> Result<QuadratureResult> {
    const MAX_DEPTH: u32 = 40;
    let (xs, ws) = reference_rule(order)?;
    let rule = |lo: f64, hi: f64| -> Complex64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        xs.iter()
            .zip(&ws)
            .map(|(&x, &w)| f(mid + half * x) * (w * half))
            .sum()
    };
    let total = b - a;
    let panels = initial_panels.max(1);
    let mut stack: Vec<(f64, f64, Complex64, u32)> = (0..panels)
        .map(|i| {
            let lo = a + total * i as f64 / panels as f64;
            let hi = a + total * (i + 1) as f64 / panels as f64;
            (lo, hi, rule(lo, hi), 0)
        })
        .collect();
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut evaluations = panels * order;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        evaluations += 2 * order;
        let fine = left + right;
        let diff = (fine - coarse).norm();
        let share = tol * (hi - lo) / total;
        if diff <= share || depth >= MAX_DEPTH {
            value += fine;
            error += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(QuadratureResult {
        value,
        error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exactness() {
        let r = CompositeRule::uniform(-1.0, 2.0, 3, 4).unwrap();
        let v = r.integrate(|x| Complex64::new(x.powi(7), 0.0));
        assert!((v.re - (2f64.powi(8) - 1.0) / 8.0).abs() < 1e-12);
    }

    #[test]
    fn graded_breaks_cover_interval() {
        let g = Grading {
            ratio: 0.5,
            levels: 5,
        };
        let br = graded_breaks(-PI, PI, 0.0, &g, 0.3);
        assert_eq!(br[0], -PI);
        assert_eq!(*br.last().unwrap(), PI);
        assert!(br
            .windows(2)
            .all(|w| w[1] > w[0] && w[1] - w[0] <= 0.3 + 1e-12));
        assert!(br.contains(&0.0));
        assert!(br.iter().any(|&x| (x - PI / 32.0).abs() < 1e-15));
        assert!(br.iter().any(|&x| (x + PI / 32.0).abs() < 1e-15));
    }

    #[test]
    fn two_centers() {
        let g = Grading {
            ratio: 0.5,
            levels: 3,
        };
        let br = multi_graded_breaks(0.0, 4.0, &[1.0, 3.0], &g, 10.0);
        assert!(br.windows(2).all(|w| w[1] > w[0]));
        for want in [0.0, 0.5, 1.0, 1.125, 2.0, 2.875, 3.0, 3.5, 4.0] {
            assert!(
                br.iter().any(|&x| (x - want).abs() < 1e-15),
                "missing {want} in {br:?}"
            );
        }
    }

    #[test]
    fn adaptive_oscillatory() {
        // int_0^pi e^{i 40 x} dx = (e^{i 40 pi} - 1) / (40 i) = 0
        let r = adaptive(
            |x| Complex64::from_polar(1.0, 40.0 * x),
            0.0,
            PI,
            4,
            10,
            1e-12,
        )
        .unwrap();
        assert!(r.value.norm() < 1e-11);
        // int_0^1 sqrt(x) dx = 2/3, endpoint singular derivative
        let r = adaptive(|x| Complex64::new(x.sqrt(), 0.0), 0.0, 1.0, 1, 8, 1e-12).unwrap();
        assert!((r.value.re - 2.0 / 3.0).abs() < 1e-11);
    }
}
