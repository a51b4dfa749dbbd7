//! Gauss–Legendre panel quadrature on vertical segments.
//!
//! All contour integrals in this workspace are of the form
//! `(1/2 pi i) * Int f(z) dz` over a truncated vertical line
//! `z = c + i y, y in [-h, h]`, with integrands that decay at least like
//! `exp(-y^2)` or `exp(-pi |y|)`.  The segment is split into equal panels,
//! each integrated with a fixed-order Gauss–Legendre rule; adaptive use
//! doubles the panel count until two successive estimates agree.
//!
//! Node evaluation runs through the deterministic parallel helpers, and the
//! weighted accumulation is sequential in node order, so results are
//! bit-stable across thread counts.

use crate::error::{MdsError, Result};
use crate::parallel;
pub use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Order of the per-panel Gauss–Legendre rule.
pub const PANEL_ORDER: usize = 16;

/// A truncated vertical contour `Re z = abscissa`, `|Im z| <= height`,
/// discretized with `nodes` total quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub abscissa: f64,
    pub height: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(abscissa: f64, height: f64, nodes: usize) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() || !abscissa.is_finite() {
            return Err(MdsError::InvalidInput(format!(
                "contour height/abscissa must be finite and positive: h={height}, c={abscissa}"
            )));
        }
        if nodes < 16 {
            return Err(MdsError::InvalidInput(format!(
                "contour needs at least 16 nodes, got {nodes}"
            )));
        }
        Ok(ContourSpec { abscissa, height, nodes })
    }

    fn with_nodes(self, nodes: usize) -> Self {
        ContourSpec { nodes, ..self }
    }
}

/// Values that can be accumulated linearly (scalars and small vectors).
pub trait Accumulate: Clone + Send {
    fn zero() -> Self;
    /// `self += w * x`
    fn axpy(&mut self, w: f64, x: &Self);
    /// max-norm distance, used by adaptive refinement
    fn dist(&self, other: &Self) -> f64;
    /// max-norm
    fn norm(&self) -> f64;
}

impl Accumulate for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        *self += w * x;
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl<const K: usize> Accumulate for [Complex64; K] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); K]
    }
    fn axpy(&mut self, w: f64, x: &Self) {
        for (a, b) in self.iter_mut().zip(x.iter()) {
            *a += w * b;
        }
    }
    fn dist(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
    fn norm(&self) -> f64 {
        self.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

fn gl_cache() -> &'static Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if let Some(hit) = gl_cache().lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by upward recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = 0.0;
    }
    gl_cache().lock().unwrap().insert(n, (xs.clone(), ws.clone()));
    (xs, ws)
}

/// Composite rule over `[a, b]` with `panels` panels of order [`PANEL_ORDER`].
/// Returns the flattened (node, weight) list in ascending node order.
pub fn panel_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(PANEL_ORDER);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * PANEL_ORDER);
    for p in 0..panels {
        let lo = a + width * p as f64;
        let c = lo + 0.5 * width;
        for (x, w) in xs.iter().zip(ws.iter()) {
            out.push((c + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

/// `(1/2 pi i) * Int f(z) dz` over the truncated vertical line of `spec`.
/// With `z = c + i y` this is `(1/2 pi) * Int f(c + i y) dy`.
pub fn vertical_line<V, F>(spec: &ContourSpec, f: F) -> V
where
    V: Accumulate,
    F: Fn(Complex64) -> V + Sync,
{
    let panels = spec.nodes.div_ceil(PANEL_ORDER).max(1);
    let pts = panel_nodes(-spec.height, spec.height, panels);
    let vals = parallel::map_ordered(pts.len(), |i| f(Complex64::new(spec.abscissa, pts[i].0)));
    let mut acc = V::zero();
    let inv2pi = 1.0 / (2.0 * std::f64::consts::PI);
    for (v, (_, w)) in vals.iter().zip(pts.iter()) {
        acc.axpy(w * inv2pi, v);
    }
    acc
}

/// Adaptive variant: double the node count until two successive estimates
/// differ by less than `tol` (max-norm), starting from `spec.nodes`.
/// Returns the refined value together with the last observed delta.
pub fn vertical_line_adaptive<V, F>(
    spec: &ContourSpec,
    tol: f64,
    max_doublings: usize,
    f: F,
) -> Result<(V, f64)>
where
    V: Accumulate,
    F: Fn(Complex64) -> V + Sync,
{
    let mut nodes = spec.nodes;
    let mut prev: V = vertical_line(&spec.with_nodes(nodes), &f);
    let mut delta = f64::INFINITY;
    for _ in 0..max_doublings {
        nodes *= 2;
        let next: V = vertical_line(&spec.with_nodes(nodes), &f);
        delta = next.dist(&prev);
        prev = next;
        if delta < tol {
            return Ok((prev, delta));
        }
    }
    Err(MdsError::QuadratureNonConvergence { delta, tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_nodes_integrate_polynomials_exactly() {
        // order-16 rule is exact through degree 31
        let (xs, ws) = gauss_legendre(16);
        for deg in [0usize, 3, 10, 21, 31] {
            let got: f64 = xs.iter().zip(ws.iter()).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "deg {deg}: {got} vs {want}");
        }
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [4usize, 16, 31, 64] {
            let (_, ws) = gauss_legendre(n);
            let s: f64 = ws.iter().sum();
            assert!((s - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vertical_gaussian_matches_closed_form() {
        // (1/2 pi) Int exp(-(y)^2) dy = sqrt(pi)/(2 pi)
        let spec = ContourSpec::new(0.0, 10.0, 256).unwrap();
        let got: Complex64 = vertical_line(&spec, |z| Complex64::new((-z.im * z.im).exp(), 0.0));
        let want = std::f64::consts::PI.sqrt() / (2.0 * std::f64::consts::PI);
        assert!((got.re - want).abs() < 1e-12);
        assert!(got.im.abs() < 1e-15);
    }

    #[test]
    fn adaptive_reports_convergence() {
        let spec = ContourSpec::new(2.0, 8.0, 32).unwrap();
        let (v, delta): (Complex64, f64) = vertical_line_adaptive(&spec, 1e-12, 8, |z| {
            let y = z.im;
            Complex64::new((-y * y).exp() * (3.0 * y).cos(), 0.0)
        })
        .unwrap();
        // closed form: (1/2pi) Int e^{-y^2} cos(3y) dy = sqrt(pi) e^{-9/4} / (2 pi)
        let want = std::f64::consts::PI.sqrt() * (-2.25f64).exp() / (2.0 * std::f64::consts::PI);
        assert!((v.re - want).abs() < 1e-12, "got {} want {want}", v.re);
        assert!(delta < 1e-12);
    }

    #[test]
    fn spec_rejects_degenerate_input() {
        assert!(ContourSpec::new(1.0, 0.0, 64).is_err());
        assert!(ContourSpec::new(1.0, 4.0, 8).is_err());
    }
}
