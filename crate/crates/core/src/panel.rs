//! Composite Gauss–Legendre panel grids with cumulative integration,
//! differentiation and interpolation of sampled functions.
//!
//! A grid covers `[start, end]` with contiguous panels. Samples live at the
//! interior Gauss nodes of each panel, so singular endpoints are never
//! evaluated. The first panel may use a different (lower) node count, which
//! lets it carry an exact product rule for an algebraic weight `s^γ`.

use num_complex::Complex64;

use crate::quad::{gauss_legendre, Scalar};

/// Reference data for a panel of `p` Gauss nodes on [-1, 1].
#[derive(Debug, Clone)]
struct Reference {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    bary: Vec<f64>,
    /// `integ[i][j] = ∫_{-1}^{x_i} ℓ_j(x) dx`
    integ: Vec<Vec<f64>>,
    /// `diff[i][j] = ℓ_j'(x_i)`
    diff: Vec<Vec<f64>>,
}

impl Reference {
    fn new(p: usize) -> Self {
        let (nodes, weights) = gauss_legendre(p);
        let bary: Vec<f64> = (0..p)
            .map(|j| {
                let prod: f64 = (0..p)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        let mut integ = vec![vec![0.0; p]; p];
        for i in 0..p {
            let half = 0.5 * (nodes[i] + 1.0);
            for (x, w) in nodes.iter().zip(&weights) {
                let y = -1.0 + half * (x + 1.0);
                let basis = lagrange_basis(&nodes, &bary, y);
                for j in 0..p {
                    integ[i][j] += half * w * basis[j];
                }
            }
        }
        let mut diff = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in 0..p {
                if i != j {
                    diff[i][j] = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                }
            }
            diff[i][i] = -(0..p).filter(|&j| j != i).map(|j| diff[i][j]).sum::<f64>();
        }
        Self {
            nodes,
            weights,
            bary,
            integ,
            diff,
        }
    }
}

fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    if let Some(k) = nodes.iter().position(|&n| n == x) {
        let mut out = vec![0.0; nodes.len()];
        out[k] = 1.0;
        return out;
    }
    let terms: Vec<f64> = nodes.iter().zip(bary).map(|(n, b)| b / (x - n)).collect();
    let denom: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / denom).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Panel {
    a: f64,
    b: f64,
    offset: usize,
    first: bool,
}

/// A composite panel grid on `[start, end]`.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    panels: Vec<Panel>,
    head: Reference,
    body: Reference,
    nodes: Vec<f64>,
}

impl PanelGrid {
    /// Builds a grid from panel breakpoints (strictly increasing). The first
    /// panel gets `head_order` nodes, the rest `order`.
    pub fn from_breaks(breaks: &[f64], head_order: usize, order: usize) -> Self {
        assert!(breaks.len() >= 2, "need at least one panel");
        assert!(
            breaks.windows(2).all(|w| w[1] > w[0]),
            "breakpoints must increase"
        );
        let head = Reference::new(head_order);
        let body = Reference::new(order);
        let mut panels = Vec::with_capacity(breaks.len() - 1);
        let mut nodes = Vec::new();
        for (k, w) in breaks.windows(2).enumerate() {
            let reference = if k == 0 { &head } else { &body };
            panels.push(Panel {
                a: w[0],
                b: w[1],
                offset: nodes.len(),
                first: k == 0,
            });
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            nodes.extend(reference.nodes.iter().map(|x| c + h * x));
        }
        Self {
            panels,
            head,
            body,
            nodes,
        }
    }

    /// Uniform panels of equal width.
    pub fn uniform(start: f64, end: f64, panels: usize, order: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels)
            .map(|k| start + (end - start) * k as f64 / panels as f64)
            .collect();
        Self::from_breaks(&breaks, order, order)
    }

    /// Panels on `[0, length]` whose widths halve toward 0, the smallest
    /// being `length / 2^levels`.
    pub fn graded_toward_zero(length: f64, levels: usize, head_order: usize, order: usize) -> Self {
        let mut breaks = vec![0.0];
        for k in (0..=levels).rev() {
            breaks.push(length / 2f64.powi(k as i32));
        }
        Self::from_breaks(&breaks, head_order, order)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.panels[0].a
    }

    pub fn end(&self) -> f64 {
        self.panels[self.panels.len() - 1].b
    }

    fn reference(&self, panel: &Panel) -> &Reference {
        if panel.first {
            &self.head
        } else {
            &self.body
        }
    }

    /// `∫_start^{x_i} f` at every node.
    pub fn cumulative<T: Scalar>(&self, values: &[T]) -> Vec<T> {
        assert_eq!(values.len(), self.nodes.len());
        let mut out = vec![T::default(); values.len()];
        let mut carry = T::default();
        for panel in &self.panels {
            let r = self.reference(panel);
            let h = 0.5 * (panel.b - panel.a);
            let vals = &values[panel.offset..panel.offset + r.nodes.len()];
            for (i, row) in r.integ.iter().enumerate() {
                let s = row
                    .iter()
                    .zip(vals)
                    .fold(T::default(), |acc, (w, v)| acc + *v * *w);
                out[panel.offset + i] = carry + s * h;
            }
            let total = r
                .weights
                .iter()
                .zip(vals)
                .fold(T::default(), |acc, (w, v)| acc + *v * *w);
            carry = carry + total * h;
        }
        out
    }

    /// `∫_start^end f`.
    pub fn integral<T: Scalar>(&self, values: &[T]) -> T {
        let mut total = T::default();
        for panel in &self.panels {
            let r = self.reference(panel);
            let h = 0.5 * (panel.b - panel.a);
            let vals = &values[panel.offset..panel.offset + r.nodes.len()];
            let s = r
                .weights
                .iter()
                .zip(vals)
                .fold(T::default(), |acc, (w, v)| acc + *v * *w);
            total = total + s * h;
        }
        total
    }

    /// `∫_start^{x_i} (s - start)^γ f(s) ds` at every node, with `Re γ > -1`.
    ///
    /// The weight is integrated exactly against the interpolant of `f` on the
    /// first panel (monomial moments); later panels see a smooth integrand.
    pub fn cumulative_weighted(&self, values: &[Complex64], gamma: Complex64) -> Vec<Complex64> {
        assert_eq!(values.len(), self.nodes.len());
        let start = self.start();
        let weighted: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(values)
            .map(|(x, v)| v * Complex64::new(x - start, 0.0).powc(gamma))
            .collect();
        let mut out = vec![Complex64::default(); values.len()];
        let mut carry = Complex64::default();
        for panel in &self.panels {
            let r = self.reference(panel);
            let p = r.nodes.len();
            let range = panel.offset..panel.offset + p;
            if panel.first {
                let width = panel.b - panel.a;
                let coeffs = monomial_coefficients(&r.nodes, &values[range.clone()]);
                let scale = Complex64::new(width, 0.0).powc(gamma + 1.0);
                let moment = |sigma: f64| -> Complex64 {
                    coeffs
                        .iter()
                        .enumerate()
                        .fold(Complex64::default(), |acc, (m, c)| {
                            let e = gamma + (m as f64 + 1.0);
                            acc + c * Complex64::new(sigma, 0.0).powc(e) / e
                        })
                };
                for (i, x) in r.nodes.iter().enumerate() {
                    out[panel.offset + i] = scale * moment(0.5 * (x + 1.0));
                }
                carry = scale * moment(1.0);
            } else {
                let h = 0.5 * (panel.b - panel.a);
                let vals = &weighted[range];
                for (i, row) in r.integ.iter().enumerate() {
                    let s = row
                        .iter()
                        .zip(vals)
                        .fold(Complex64::default(), |acc, (w, v)| acc + v * *w);
                    out[panel.offset + i] = carry + s * h;
                }
                let total = r
                    .weights
                    .iter()
                    .zip(vals)
                    .fold(Complex64::default(), |acc, (w, v)| acc + v * *w);
                carry += total * h;
            }
        }
        out
    }

    /// Derivative of the panel-wise interpolant at every node.
    pub fn differentiate<T: Scalar>(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); values.len()];
        for panel in &self.panels {
            let r = self.reference(panel);
            let scale = 2.0 / (panel.b - panel.a);
            let vals = &values[panel.offset..panel.offset + r.nodes.len()];
            for (i, row) in r.diff.iter().enumerate() {
                let s = row
                    .iter()
                    .zip(vals)
                    .fold(T::default(), |acc, (w, v)| acc + *v * *w);
                out[panel.offset + i] = s * scale;
            }
        }
        out
    }

    /// Evaluates the panel-wise interpolant at `x ∈ [start, end]`.
    pub fn interpolate<T: Scalar>(&self, values: &[T], x: f64) -> T {
        let idx = self
            .panels
            .iter()
            .position(|p| x <= p.b)
            .unwrap_or(self.panels.len() - 1);
        let panel = &self.panels[idx];
        let r = self.reference(panel);
        let y = (2.0 * x - panel.a - panel.b) / (panel.b - panel.a);
        let basis = lagrange_basis(&r.nodes, &r.bary, y);
        let vals = &values[panel.offset..panel.offset + r.nodes.len()];
        basis
            .iter()
            .zip(vals)
            .fold(T::default(), |acc, (w, v)| acc + *v * *w)
    }
}

/// Coefficients `c_m` with `Σ_j v_j ℓ_j(σ) = Σ_m c_m σ^m`, where the nodes
/// are reference nodes mapped to σ ∈ [0, 1].
fn monomial_coefficients(reference_nodes: &[f64], values: &[Complex64]) -> Vec<Complex64> {
    let n = reference_nodes.len();
    let sig: Vec<f64> = reference_nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    // Newton divided differences, then expand the Newton form.
    let mut dd: Vec<Complex64> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (sig[i] - sig[i - level]);
        }
    }
    let mut coeffs = vec![Complex64::default(); n];
    for k in (0..n).rev() {
        // coeffs <- coeffs * (σ - sig[k]) + dd[k]
        let mut next = vec![Complex64::default(); n];
        for m in 0..n {
            if m + 1 < n {
                next[m + 1] += coeffs[m];
            }
            next[m] -= coeffs[m] * sig[k];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}
