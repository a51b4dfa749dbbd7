//! Quadratic Dirichlet L-values by two independent methods, plus the bulk
//! machinery the series evaluators are built on.
//!
//! For a squarefree odd `d0` and a character `psi` mod 8, the primitive
//! character `chi*` attached to `conductor_data(d0, psi)` has conductor
//! `delta0` and parity `kappa`, and its L-function satisfies the reflection
//!
//! ```text
//! L(s) = E(s) L(1-s),
//! E(s) = (delta0/pi)^(1/2-s) * Gamma((1-s+kappa)/2) / Gamma((s+kappa)/2).
//! ```
//!
//! Two evaluation methods:
//!
//! * `HurwitzOracle`: `L(s) = delta0^{-s} * sum_{a=1..delta0} chi*(a) *
//!   hurwitz_zeta(s, a/delta0)` with Euler–Maclaurin.  Slow but entirely
//!   independent of the contour machinery; used as the cross-check oracle.
//! * `Afe`: the smoothed identity obtained by integrating
//!   `Lambda(s+z) k(z) / z` over two vertical lines and reflecting the left
//!   one, where `Lambda` is the completed L-function and
//!   `k(z) = exp(z^2/omega)` is even, entire, `k(0) = 1`, and of size
//!   `e^{(Re^2 - Im^2)/omega}` on vertical lines:
//!
//!   ```text
//!   L(s) = sum_n chi*(n) n^{-s} K_s(n sqrt(pi/delta0))
//!        + (delta0/pi)^{1/2-s} sum_n chi*(n) n^{s-1} K_{1-s}(n sqrt(pi/delta0))
//!        - [trivial chi* only] pi^{s/2}/Gamma(s/2) *
//!          ( k(1-s)/(1-s) + k(s)/s )
//!   K_v(xi) = (1/2 pi i) Int_(c) Gamma((v+kappa+z)/2)/Gamma((s+kappa)/2)
//!             k(z) xi^{-z} dz/z
//!   ```
//!
//!   Note both kernels carry the *same* normalization `Gamma((s+kappa)/2)`:
//!   the reflected side's `Gamma((1-s+kappa)/2)` cancels between `E(s)` and
//!   the kernel, which keeps the identity finite where either gamma factor
//!   alone has a pole and makes the trivial zeros come out exactly.
//!
//!   Both kernels decay rapidly, so the sums truncate near
//!   `n ~ sqrt(delta0 (1+|Im s|))`.  `K_v` values come from a per-`(s,
//!   kappa, side)` table over `ln xi` with cubic interpolation, so bulk
//!   sweeps over many `d0` at a fixed `s` pay one symbol lookup and a few
//!   multiplies per term.

use crate::characters::{
    char_value_sieve, chi_star, conductor_data, conductor_data_parts, decompose_table,
    CharDecomposition, CharIndex, ALL_CHARS,
};
use crate::error::{MdsError, Result};
use crate::kernels::{gamma_quotient, log_gamma};
use crate::quad::panel_nodes;
use dashmap::DashMap;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{Read as IoRead, Write as IoWrite};
use std::sync::{Arc, OnceLock};

/// Width of the Gaussian smoothing kernel `k(z) = exp(z^2 / GAUSS_OMEGA)`.
/// Being entire, `k` lets the decay contour of `K_v` shift arbitrarily far
/// right, so the truncated sums need only `O(sqrt(delta0))` terms; the
/// width trades contour height in the table build (`~ sqrt(omega)`) against
/// how early the decay sets in.
const GAUSS_OMEGA: f64 = 36.0;
/// Kernel-table truncation threshold, relative to the plateau value 1.
const KERNEL_CUTOFF: f64 = 1e-14;
/// Log-grid step of the kernel tables.  Cubic interpolation at this step
/// keeps per-term kernel error near 1e-11, well under the 1e-8 value
/// contract.
const LAMBDA_STEP: f64 = 1.0 / 512.0;

const B2K: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43_867.0 / 798.0,
    -174_611.0 / 330.0,
    854_513.0 / 138.0,
    -236_364_091.0 / 2730.0,
];

/// Smoothing kernel of the truncated identity: even, entire, `k(0) = 1`,
/// real on the real axis, Gaussian decay on vertical lines.
fn smoothing_kernel(z: Complex64) -> Complex64 {
    (z * z / GAUSS_OMEGA).exp()
}

/// Hurwitz zeta `sum_{n>=0} (n+x)^{-s}` by Euler–Maclaurin.  The shift
/// length grows with `|Im s|` so the correction series stays convergent;
/// 12 Bernoulli terms give ~1e-12 for `|Im s| <= 200`.
pub fn hurwitz_zeta(s: Complex64, x: f64) -> Result<Complex64> {
    if x.is_nan() || x <= 0.0 {
        return Err(MdsError::InvalidInput(format!(
            "hurwitz_zeta needs a positive offset, got {x}"
        )));
    }
    if (s - Complex64::new(1.0, 0.0)).norm() < 1e-10 {
        return Err(MdsError::PoleProximity {
            what: "hurwitz zeta".into(),
            arg: s.to_string(),
            dist: (s - Complex64::new(1.0, 0.0)).norm(),
        });
    }
    let n = (0.6 * s.im.abs() + 10.0).ceil().max(15.0) as usize;
    let mut head = Complex64::new(0.0, 0.0);
    for j in 0..n {
        head += (-s * (x + j as f64).ln()).exp();
    }
    let edge = x + n as f64;
    let ln_edge = edge.ln();
    // (edge)^{1-s}/(s-1) + (edge)^{-s}/2
    let mut tail = ((1.0 - s) * ln_edge).exp() / (s - 1.0) + 0.5 * (-s * ln_edge).exp();
    // correction terms B_{2k}/(2k)! * s(s+1)...(s+2k-2) * edge^{-s-2k+1}
    let mut poch = s; // running product s(s+1)...(s+2k-2); k=1 gives just s
    let mut fact = 2.0f64; // (2k)!
    let inv_e2 = 1.0 / (edge * edge);
    let mut edge_pow = (-(s + 1.0) * ln_edge).exp(); // edge^{-s-2k+1}
    for (k, b) in B2K.iter().enumerate() {
        tail += b / fact * poch * edge_pow;
        // advance to k+1: pochhammer gains (s+2k-1)(s+2k), factorial gains
        // (2k+1)(2k+2), the power drops by edge^{-2}
        let kk = (2 * k + 1) as f64;
        poch *= (s + kk) * (s + kk + 1.0);
        fact *= (kk + 2.0) * (kk + 3.0);
        edge_pow *= inv_e2;
    }
    Ok(head + tail)
}

/// Riemann zeta via [`hurwitz_zeta`] at offset 1.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    hurwitz_zeta(s, 1.0)
}

/// Reflection factor `E(s)` with `L(s) = E(s) L(1-s)` for the primitive
/// character of conductor `delta0` and parity `kappa`.
pub fn reflection_factor(s: Complex64, delta0: u64, kappa: u32) -> Complex64 {
    let kap = kappa as f64;
    let scale = ((0.5 - s) * (delta0 as f64 / PI).ln()).exp();
    scale * gamma_quotient(0.5 * (1.0 - s + kap), 0.5 * (s + kap))
}

/// Root number `lambda(t, delta0) = E(1/2 + it)` on the critical line:
/// `(delta0/pi)^{-it} Gamma((1/2-it+kappa)/2) / Gamma((1/2+it+kappa)/2)`,
/// of unit modulus.
pub fn root_lambda(t: f64, delta0: u64, kappa: u32) -> Complex64 {
    reflection_factor(Complex64::new(0.5, t), delta0, kappa)
}

/// Evaluation method for [`l_primitive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMethod {
    /// smoothed truncated-sum identity (production path)
    Afe,
    /// Hurwitz-zeta expansion over residues mod `delta0` (oracle path)
    HurwitzOracle,
}

/// A primitive-L-value query.
#[derive(Debug, Clone, Copy)]
pub struct LQuery {
    pub s: Complex64,
    pub d0: u64,
    pub psi: CharIndex,
    pub method: LMethod,
}

// ---------------------------------------------------------------------------
// Smoothed-identity kernel tables
// ---------------------------------------------------------------------------

/// Values of `K_v(e^lambda)` on a uniform `lambda` grid (see module docs).
struct AfeTable {
    lambda0: f64,
    values: Vec<Complex64>,
    /// suffix maxima of `|values|`: a non-increasing decay envelope used
    /// for sound early truncation of term sums
    envelope: Vec<f64>,
}

impl AfeTable {
    /// Largest `lambda` with a usable 4-point stencil.
    fn lambda_hi(&self) -> f64 {
        self.lambda0 + LAMBDA_STEP * (self.values.len().saturating_sub(2)) as f64
    }

    /// Cubic 4-point interpolation; arguments beyond the table are in the
    /// truncated-to-zero regime.  The hot paths inline this stencil against
    /// precomputed node offsets; this reference form anchors their tests.
    #[cfg(test)]
    fn eval(&self, lambda: f64) -> Complex64 {
        if lambda >= self.lambda_hi() {
            return Complex64::new(0.0, 0.0);
        }
        debug_assert!(lambda >= self.lambda0 + LAMBDA_STEP);
        let u = (lambda - self.lambda0) / LAMBDA_STEP;
        let i = (u.floor() as usize).clamp(1, self.values.len() - 3);
        let f = u - i as f64;
        let (m1, p0, p1, p2) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        // Lagrange cubic through nodes at -1, 0, 1, 2
        let c_m1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let c_0 = (f * f - 1.0) * (f - 2.0) / 2.0;
        let c_1 = -f * (f + 1.0) * (f - 2.0) / 2.0;
        let c_2 = f * (f * f - 1.0) / 6.0;
        c_m1 * m1 + c_0 * p0 + c_1 * p1 + c_2 * p2
    }

    /// Upper bound for `|K(e^l)|` over all `l >= lambda` (non-increasing).
    fn envelope_at(&self, lambda: f64) -> f64 {
        if lambda <= self.lambda0 {
            return self.envelope[0];
        }
        let i = ((lambda - self.lambda0) / LAMBDA_STEP).floor() as usize;
        if i >= self.envelope.len() {
            0.0
        } else {
            self.envelope[i]
        }
    }
}

/// Suffix maxima of the magnitudes, padded so interpolation overshoot
/// between nodes is covered.
fn suffix_envelope(values: &[Complex64]) -> Vec<f64> {
    let mut env = vec![0.0f64; values.len()];
    let mut running = 0.0f64;
    for (i, v) in values.iter().enumerate().rev() {
        running = running.max(v.norm());
        env[i] = running;
    }
    // small headroom for cubic overshoot between nodes
    for e in &mut env {
        *e *= 1.25;
    }
    env
}

/// Contour integral `K_v(xi)` for a batch of `lambda = ln xi` values,
/// evaluated as one dot product per `lambda` against fixed contour-node
/// weights.  `v` is the gamma-shift argument (`s` or `1-s`) while the
/// normalizing denominator is always `Gamma((s+kappa)/2)`.
fn kernel_column(v: Complex64, s: Complex64, kappa: u32, lambdas: &[f64]) -> Vec<Complex64> {
    let kap = kappa as f64;
    // abscissa right of 0, right of every Gamma-numerator pole
    // (Re v possibly down to -5), and far enough right that the attached
    // Dirichlet series converges on the line
    let c = (2.6 - v.re).max(2.0);
    // cover the Gaussian decay of k plus the Gamma decay, both offset by
    // the imaginary part of the shift argument
    let height = 36.0 + v.im.abs();
    let panels = (height / 1.2).ceil() as usize;
    let pts = panel_nodes(-height, height, panels);
    let denom = log_gamma(0.5 * (s + kap));
    let inv2pi = 1.0 / (2.0 * PI);
    let weights: Vec<(Complex64, Complex64)> = pts
        .iter()
        .map(|&(y, w)| {
            let z = Complex64::new(c, y);
            let f = smoothing_kernel(z)
                * (log_gamma(0.5 * (v + kap + z)) - denom).exp()
                / z
                * (w * inv2pi);
            (f, z)
        })
        .collect();
    lambdas
        .iter()
        .map(|&l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (f, z) in &weights {
                acc += f * (-z * l).exp();
            }
            acc
        })
        .collect()
}

/// Kernel table for gamma-shift argument `v` (either `s` or `1-s`) at
/// parity `kappa`, on the grid starting at `lambda0`, extended until the
/// kernel has decayed below threshold for a sustained run and trimmed back
/// to the observed decay point.
fn build_table(v: Complex64, s: Complex64, kappa: u32, lambda0: f64) -> AfeTable {
    // initial guess for the upper end: the Gamma quotient shifts the decay
    // point of the contour kernel by ~ sqrt(|v|+1)
    let hi_guess = (0.5 * (1.0 + v.im.abs()).ln() + 4.0).max(4.0);
    let n_hint = ((hi_guess - lambda0) / LAMBDA_STEP).ceil() as usize + 8;
    let lambdas: Vec<f64> = (0..n_hint).map(|i| lambda0 + i as f64 * LAMBDA_STEP).collect();
    let mut values = kernel_column(v, s, kappa, &lambdas);
    // extend until a run of small values confirms the cutoff
    loop {
        let tail_small = values
            .iter()
            .rev()
            .take(16)
            .all(|x| x.norm() < KERNEL_CUTOFF);
        if tail_small {
            break;
        }
        let start = lambda0 + values.len() as f64 * LAMBDA_STEP;
        let more: Vec<f64> = (0..64).map(|i| start + i as f64 * LAMBDA_STEP).collect();
        values.extend(kernel_column(v, s, kappa, &more));
        if values.len() > 40_000 {
            break; // (unreachable for sane v; avoids runaway growth)
        }
    }
    // trim trailing sub-threshold nodes so the stored length tracks the
    // true decay point rather than the initial guess
    if let Some(last) = values.iter().rposition(|x| x.norm() >= KERNEL_CUTOFF) {
        values.truncate((last + 16).min(values.len()));
    }
    let envelope = suffix_envelope(&values);
    AfeTable { lambda0, values, envelope }
}

/// Minimum conductor hint so occasional single-point queries reuse one
/// moderately sized table instead of rebuilding per `d0`.
const HINT_FLOOR: u64 = 1 << 16;

fn afe_l_value(s: Complex64, dec: &CharDecomposition, delta0_hint: u64) -> Result<Complex64> {
    if s.re < -2.0 - 1e-12 || s.re > 6.0 + 1e-12 || s.im.abs() > 1e4 {
        return Err(MdsError::RangeCap {
            what: "L-value argument".into(),
            got: format!("{s}"),
            cap: "Re s in [-2, 6], |Im s| <= 1e4".into(),
        });
    }
    let trivial = dec.delta0 == 1;
    if trivial && (s - Complex64::new(1.0, 0.0)).norm() < 1e-8 {
        return Err(MdsError::PoleProximity {
            what: "zeta pole of the trivial character".into(),
            arg: s.to_string(),
            dist: (s - Complex64::new(1.0, 0.0)).norm(),
        });
    }
    // real characters: conjugation symmetry halves the table space
    if s.im < 0.0 {
        return Ok(afe_l_value(s.conj(), dec, delta0_hint)?.conj());
    }
    if let Some(v) = trivial_zero(s, dec) {
        return Ok(v);
    }
    let hint = delta0_hint.max(dec.delta0).max(HINT_FLOOR);
    let engine = cached_engine(s, hint);
    engine.primitive_value(dec)
}

/// Exact value at points where the shared normalization `Gamma((s+kappa)/2)`
/// has a pole: trivial zeros of the L-function, or the classical zeta values
/// for the trivial character.
fn trivial_zero(s: Complex64, dec: &CharDecomposition) -> Option<Complex64> {
    let shifted = s + dec.kappa as f64;
    for (at, zeta_value) in [(0.0, -0.5), (-2.0, 0.0)] {
        if (shifted - at).norm() < 1e-9 {
            return Some(if dec.delta0 == 1 {
                Complex64::new(zeta_value, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
    }
    None
}

fn engine_cache() -> &'static DashMap<(u64, u64), Arc<AfeEngine>> {
    static CACHE: OnceLock<DashMap<(u64, u64), Arc<AfeEngine>>> = OnceLock::new();
    CACHE.get_or_init(DashMap::new)
}

/// Engine for `s` with capacity for conductors up to `delta0_hint`,
/// cached per `s` and regrown when a larger hint arrives.
fn cached_engine(s: Complex64, delta0_hint: u64) -> Arc<AfeEngine> {
    let key = (s.re.to_bits(), s.im.to_bits());
    if let Some(e) = engine_cache().get(&key) {
        if e.delta0_hint >= delta0_hint {
            return e.clone();
        }
    }
    let engine = Arc::new(AfeEngine::new(s, delta0_hint));
    engine_cache().insert(key, engine.clone());
    engine
}

/// Shared state for evaluating many primitive L-values at one fixed `s`:
/// kernel tables for both parities on **one** `lambda` grid, plus power and
/// logarithm tables up to the largest truncation length any conductor
/// `<= delta0_hint` needs.  The shared grid lets one set of interpolation
/// coefficients serve both sides of the reflection identity, and the
/// precomputed magnitudes keep the per-term cost free of `ln`/`sqrt`.
struct AfeEngine {
    s: Complex64,
    delta0_hint: u64,
    /// common low end of all four kernel tables
    lambda0: f64,
    /// per parity: (direct `K_s`, reflected `K_{1-s}`) tables
    tabs: [(AfeTable, AfeTable); 2],
    /// `n^{-s}` for `n` in `1..len`
    pow_direct: Vec<Complex64>,
    /// `n^{s-1}` for `n` in `1..len`
    pow_reflected: Vec<Complex64>,
    /// `n^{-Re s}` (magnitudes of `pow_direct`)
    pow_direct_abs: Vec<f64>,
    /// `n^{Re s - 1}` (magnitudes of `pow_reflected`)
    pow_reflected_abs: Vec<f64>,
    /// `ln(n) / LAMBDA_STEP`: grid offset of term `n` relative to `xi = 1`
    ln_scaled: Vec<f64>,
}

impl AfeEngine {
    /// `s.im >= 0` required (callers canonicalize by conjugation).
    fn new(s: Complex64, delta0_hint: u64) -> Self {
        debug_assert!(s.im >= 0.0);
        let hint = delta0_hint.max(8);
        // low end: ln xi for n = 1 at the largest supported conductor, with
        // margin so the 4-point stencil never reaches below the grid
        let lambda0 = 0.5 * (PI / hint as f64).ln() - 0.25 - 2.0 * LAMBDA_STEP;
        let tabs = [0u32, 1].map(|kappa| {
            (
                build_table(s, s, kappa, lambda0),
                build_table(1.0 - s, s, kappa, lambda0),
            )
        });
        // global power-table length: the table end mapped at the largest
        // conductor
        let half_log_min = 0.5 * (PI / hint as f64).ln();
        let lam_hi_max = tabs
            .iter()
            .flat_map(|(a, b)| [a.lambda_hi(), b.lambda_hi()])
            .fold(f64::MIN, f64::max);
        let n_global = ((lam_hi_max - half_log_min).exp().ceil() as usize).max(1);
        let mut pow_direct = Vec::with_capacity(n_global + 1);
        let mut pow_reflected = Vec::with_capacity(n_global + 1);
        let mut pow_direct_abs = Vec::with_capacity(n_global + 1);
        let mut pow_reflected_abs = Vec::with_capacity(n_global + 1);
        let mut ln_scaled = Vec::with_capacity(n_global + 1);
        // unused slots at n = 0
        pow_direct.push(Complex64::new(0.0, 0.0));
        pow_reflected.push(Complex64::new(0.0, 0.0));
        pow_direct_abs.push(0.0);
        pow_reflected_abs.push(0.0);
        ln_scaled.push(0.0);
        for n in 1..=n_global {
            let ln_n = (n as f64).ln();
            pow_direct.push((-s * ln_n).exp());
            pow_reflected.push(((s - 1.0) * ln_n).exp());
            pow_direct_abs.push((-s.re * ln_n).exp());
            pow_reflected_abs.push(((s.re - 1.0) * ln_n).exp());
            ln_scaled.push(ln_n / LAMBDA_STEP);
        }
        AfeEngine {
            s,
            delta0_hint,
            lambda0,
            tabs,
            pow_direct,
            pow_reflected,
            pow_direct_abs,
            pow_reflected_abs,
            ln_scaled,
        }
    }

    /// `(delta0/pi)^{1/2-s}`, the prefactor of the reflected sum.
    fn reflected_scale(&self, delta0: u64) -> Complex64 {
        ((0.5 - self.s) * (delta0 as f64 / PI).ln()).exp()
    }

    /// Sound truncation point for conductor `delta0` at parity `kappa`:
    /// smallest stride point `N` with `sum_{n > N} |term(n)| < 1e-12`,
    /// bounded through the non-increasing kernel envelopes, the monotone
    /// power magnitudes, and the residual term count.  Terms past the table
    /// end are exactly zero, so the far cap is the mapped table end.
    fn truncation_point(&self, kappa: u32, delta0: u64, scale_norm: f64) -> usize {
        debug_assert!(delta0 <= self.delta0_hint.max(8));
        let (tab, tab_ref) = &self.tabs[kappa as usize];
        let half_log = 0.5 * (PI / delta0 as f64).ln();
        let lam_hi = tab.lambda_hi().max(tab_ref.lambda_hi());
        let n_cap = self.pow_direct.len() - 1;
        let n_end = (((lam_hi - half_log).exp().ceil()) as usize).clamp(1, n_cap);
        let pda_end = self.pow_direct_abs[n_end];
        let pra_end = self.pow_reflected_abs[n_end];
        let mut n = 1usize;
        while n < n_end {
            let lam = self.ln_scaled[n] * LAMBDA_STEP + half_log;
            let pda = self.pow_direct_abs[n].max(pda_end);
            let pra = self.pow_reflected_abs[n].max(pra_end);
            let per_term = pda * tab.envelope_at(lam) + scale_norm * pra * tab_ref.envelope_at(lam);
            if per_term * (n_end - n + 1) as f64 <= 1e-12 {
                return n;
            }
            n += 16;
        }
        n_end
    }

    /// Kernel-weighted character sums over `1..=n_break`:
    /// `(sum_n chi(n) n^{-s} K_s(xi_n), sum_n chi(n) n^{s-1} K_{1-s}(xi_n))`.
    /// `chi` must be valid on the whole range.
    #[inline]
    fn kernel_sums(
        &self,
        kappa: u32,
        delta0: u64,
        n_break: usize,
        chi: impl Fn(usize) -> i8,
    ) -> (Complex64, Complex64) {
        let (tab, tab_ref) = &self.tabs[kappa as usize];
        let vals_d = &tab.values[..];
        let vals_r = &tab_ref.values[..];
        let len_d = vals_d.len();
        let len_r = vals_r.len();
        let half_log = 0.5 * (PI / delta0 as f64).ln();
        let u0 = (half_log - self.lambda0) / LAMBDA_STEP;
        let mut direct = Complex64::new(0.0, 0.0);
        let mut reflected = Complex64::new(0.0, 0.0);
        for n in 1..=n_break {
            let c = chi(n);
            if c == 0 {
                continue;
            }
            let u = u0 + self.ln_scaled[n];
            let i = u as usize;
            debug_assert!(i >= 1, "grid margin violated");
            let f = u - i as f64;
            // shared Lagrange-cubic coefficients (nodes at -1, 0, 1, 2)
            let c_m1 = -f * (f - 1.0) * (f - 2.0) / 6.0;
            let c_0 = (f * f - 1.0) * (f - 2.0) / 2.0;
            let c_1 = -f * (f + 1.0) * (f - 2.0) / 2.0;
            let c_2 = f * (f * f - 1.0) / 6.0;
            let sgn = c as f64;
            // beyond either table end the kernel is in its truncated regime
            if i + 2 < len_d {
                let k = c_m1 * vals_d[i - 1] + c_0 * vals_d[i] + c_1 * vals_d[i + 1]
                    + c_2 * vals_d[i + 2];
                direct += sgn * self.pow_direct[n] * k;
            }
            if i + 2 < len_r {
                let k = c_m1 * vals_r[i - 1] + c_0 * vals_r[i] + c_1 * vals_r[i + 1]
                    + c_2 * vals_r[i + 2];
                reflected += sgn * self.pow_reflected[n] * k;
            }
        }
        (direct, reflected)
    }

    /// Combine the two kernel sums into the L-value, subtracting the pole
    /// contributions of the completed zeta for the trivial character.
    fn assemble(
        &self,
        dec: &CharDecomposition,
        direct: Complex64,
        scale: Complex64,
        reflected: Complex64,
    ) -> Complex64 {
        let s = self.s;
        let mut value = direct + scale * reflected;
        if dec.delta0 == 1 {
            // completed zeta has poles at (shifted) 0 and 1
            let corr = (0.5 * s * PI.ln() - log_gamma(0.5 * s)).exp()
                * (smoothing_kernel(1.0 - s) / (1.0 - s) + smoothing_kernel(s) / s);
            value -= corr;
        }
        value
    }

    /// Primitive `L(s, chi*)` for the decomposed character (requires
    /// `dec.delta0 <= delta0_hint` from construction).
    fn primitive_value(&self, dec: &CharDecomposition) -> Result<Complex64> {
        let scale = self.reflected_scale(dec.delta0);
        let n_break = self.truncation_point(dec.kappa, dec.delta0, scale.norm());
        let chi = char_value_sieve(dec.disc, n_break);
        let (direct, reflected) = self.kernel_sums(dec.kappa, dec.delta0, n_break, |n| chi[n]);
        Ok(self.assemble(dec, direct, scale, reflected))
    }

    /// Primitive `L(s, chi*)` from a shared Jacobi-symbol sieve
    /// `jac[m] = (d0|m)` (odd `m <= n_break`): on odd arguments
    /// `chi*(m) = psi(m) (d0|m)`, and the 2-part extends multiplicatively
    /// with `chi*(2) = 0` unless the conductor is odd.
    fn primitive_value_shared(
        &self,
        dec: &CharDecomposition,
        psi: CharIndex,
        jac: &[i8],
        n_break: usize,
    ) -> Complex64 {
        let e2 = chi_star(dec, 2);
        let mut psi_tab = [0i8; 8];
        for (r, slot) in psi_tab.iter_mut().enumerate() {
            *slot = psi.value(r as i64);
        }
        let chi = |n: usize| -> i8 {
            let k = n.trailing_zeros();
            let m = n >> k;
            let base = psi_tab[m & 7] * jac[m];
            if k == 0 {
                base
            } else if e2 == 0 {
                0
            } else if e2 < 0 && (k & 1) == 1 {
                -base
            } else {
                base
            }
        };
        let scale = self.reflected_scale(dec.delta0);
        let (direct, reflected) = self.kernel_sums(dec.kappa, dec.delta0, n_break, chi);
        self.assemble(dec, direct, scale, reflected)
    }
}

fn hurwitz_l_value(s: Complex64, dec: &CharDecomposition) -> Result<Complex64> {
    let delta0 = dec.delta0;
    if delta0 == 1 {
        return zeta(s);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 1..=delta0 {
        let c = chi_star(dec, a as i64);
        if c == 0 {
            continue;
        }
        acc += c as f64 * hurwitz_zeta(s, a as f64 / delta0 as f64)?;
    }
    Ok(acc * (-s * (delta0 as f64).ln()).exp())
}

/// `L(s, chi_{d0} psi)` for squarefree odd `d0`, by the method in the query.
pub fn l_primitive(q: &LQuery) -> Result<Complex64> {
    let dec = conductor_data(q.d0, q.psi)?;
    if dec.d1 != 1 {
        return Err(MdsError::InvalidInput(format!(
            "primitive L-value needs squarefree d0, got {}",
            q.d0
        )));
    }
    match q.method {
        LMethod::Afe => afe_l_value(q.s, &dec, dec.delta0),
        LMethod::HurwitzOracle => hurwitz_l_value(q.s, &dec),
    }
}

/// `L_2(s, chi_d psi)`: the primitive value times the Euler factors at the
/// distinct primes dividing `2 d1` removed, where `d = d0 d1^2`.
pub fn l2_value(s: Complex64, d: u64, psi: CharIndex, method: LMethod) -> Result<Complex64> {
    let dec = conductor_data(d, psi)?;
    let base = match method {
        LMethod::Afe => afe_l_value(s, &dec, dec.delta0)?,
        LMethod::HurwitzOracle => hurwitz_l_value(s, &dec)?,
    };
    Ok(euler_correction(s, &dec) * base)
}

/// `prod_{p | 2 d1} (1 - chi*(p) p^{-s})` over distinct primes.
fn euler_correction(s: Complex64, dec: &CharDecomposition) -> Complex64 {
    let mut corr = 1.0 - chi_star(dec, 2) as f64 * (-s * (2.0f64).ln()).exp();
    let mut d1 = dec.d1;
    let mut p = 3u64;
    while p * p <= d1 {
        if d1 % p == 0 {
            while d1 % p == 0 {
                d1 /= p;
            }
            corr *= 1.0 - chi_star(dec, p as i64) as f64 * (-s * (p as f64).ln()).exp();
        }
        p += 2;
    }
    if d1 > 1 {
        corr *= 1.0 - chi_star(dec, d1 as i64) as f64 * (-s * (d1 as f64).ln()).exp();
    }
    corr
}

/// Bulk fill of all four character lines plus pole bookkeeping.
pub struct LineSet {
    /// `lines[psi.ord()][d] = L_2(s, chi_d psi)`; even `d` slots hold 0.
    pub lines: [Vec<Complex64>; 4],
    /// True when `s` sat on the trivial-character pole (`s ~ 1`) under a
    /// lenient fill: the affected entries — the trivial-character line at
    /// perfect-square `d` — were set to 0 instead of evaluated, and
    /// consumers must not use them.
    pub trivial_poisoned: bool,
}

/// Bulk fill: `L_2(s, chi_d psi)` for every odd `d <= d_max` and **all
/// four** characters at once, indexed `[psi.ord()][d]` (even `d` slots hold
/// 0).  One kernel-table set serves every conductor, primitive values are
/// computed once per squarefree kernel, and one Jacobi-symbol sieve per
/// kernel serves the four attached primitive characters, which differ only
/// in their mod-8 twist and 2-part.
///
/// With `lenient_trivial_pole`, a fill at the trivial-character pole
/// (`s ~ 1`, where only the `chi_d` with square `d` blow up) zeroes the
/// affected entries and flags them instead of failing, so the fifteen
/// unaffected character pairs stay evaluable on the polar line.
pub fn l2_line_set(s: Complex64, d_max: u64, lenient_trivial_pole: bool) -> Result<LineSet> {
    if s.im < 0.0 {
        let set = l2_line_set(s.conj(), d_max, lenient_trivial_pole)?;
        return Ok(LineSet {
            lines: set.lines.map(|line| line.into_iter().map(|v| v.conj()).collect()),
            trivial_poisoned: set.trivial_poisoned,
        });
    }
    let engine = cached_engine(s, (8 * d_max).max(HINT_FLOOR));
    let table = decompose_table(d_max as usize);
    let zero = Complex64::new(0.0, 0.0);
    let len = d_max as usize + 1;
    let mut primitive: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![zero; len]);
    let mut have = vec![false; len];
    let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![zero; len]);
    let mut trivial_poisoned = false;
    // route d0 = 1 through the guarded single-value path so range caps and
    // the trivial-character pole are rejected identically to point queries
    for psi in ALL_CHARS {
        let dec = conductor_data_parts(1, 1, psi);
        primitive[psi.ord()][1] = match afe_l_value(s, &dec, 8 * d_max) {
            Ok(v) => v,
            Err(MdsError::PoleProximity { .. })
                if lenient_trivial_pole && psi == CharIndex::Psi1 =>
            {
                trivial_poisoned = true;
                zero
            }
            Err(e) => return Err(e),
        };
    }
    have[1] = true;
    for d in (1..=d_max as usize).step_by(2) {
        let (d0u, d1u) = table[d];
        let (d0, d1) = (d0u as u64, d1u as u64);
        if !have[d0u as usize] {
            let decs = ALL_CHARS.map(|psi| conductor_data_parts(d0, 1, psi));
            let n_breaks = decs.map(|dec| {
                engine.truncation_point(
                    dec.kappa,
                    dec.delta0,
                    engine.reflected_scale(dec.delta0).norm(),
                )
            });
            let n_need = n_breaks.iter().copied().max().unwrap();
            let jac = char_value_sieve(d0 as i64, n_need);
            for psi in ALL_CHARS {
                let dec = &decs[psi.ord()];
                primitive[psi.ord()][d0u as usize] = match trivial_zero(s, dec) {
                    Some(v) => v,
                    None => {
                        engine.primitive_value_shared(dec, psi, &jac, n_breaks[psi.ord()])
                    }
                };
            }
            have[d0u as usize] = true;
        }
        for psi in ALL_CHARS {
            let dec = conductor_data_parts(d0, d1, psi);
            out[psi.ord()][d] = euler_correction(s, &dec) * primitive[psi.ord()][d0u as usize];
        }
    }
    Ok(LineSet { lines: out, trivial_poisoned })
}

/// Strict bulk fill: [`l2_line_set`] with no pole leniency.
pub fn l2_line_all(s: Complex64, d_max: u64) -> Result<[Vec<Complex64>; 4]> {
    Ok(l2_line_set(s, d_max, false)?.lines)
}

/// Single-character view of [`l2_line_all`].
pub fn l2_line(s: Complex64, d_max: u64, psi: CharIndex) -> Result<Vec<Complex64>> {
    let mut lines = l2_line_all(s, d_max)?;
    Ok(std::mem::take(&mut lines[psi.ord()]))
}

/// Implementation probe for sizing work: kernel-table length, power-table
/// length, and the total number of summed terms a bulk fill would touch.
#[doc(hidden)]
pub fn bulk_profile(s: Complex64, d_max: u64) -> (usize, usize, u64) {
    let engine = cached_engine(s, (8 * d_max).max(HINT_FLOOR));
    let table = decompose_table(d_max as usize);
    let max_len = engine
        .tabs
        .iter()
        .flat_map(|(a, b)| [a.values.len(), b.values.len()])
        .max()
        .unwrap();
    let mut total: u64 = 0;
    for d in (1..=d_max as usize).step_by(2) {
        let (d0u, d1u) = table[d];
        if d1u != 1 {
            continue;
        }
        for psi in ALL_CHARS {
            let dec = conductor_data_parts(d0u as u64, 1, psi);
            total += engine.truncation_point(
                dec.kappa,
                dec.delta0,
                engine.reflected_scale(dec.delta0).norm(),
            ) as u64;
        }
    }
    (max_len, engine.pow_direct.len() - 1, total)
}

// ---------------------------------------------------------------------------
// Critical-line cache with optional binary persistence
// ---------------------------------------------------------------------------

type LKey = (u64, u8, u64);

/// Cache of primitive critical-line values `L(1/2 + it, chi_{d0} psi)`.
/// Keys are exact `t` bit patterns (canonicalized to `t >= 0` through
/// conjugation symmetry), so hits are bit-identical to first computation.
#[derive(Default)]
pub struct LCache {
    inner: DashMap<LKey, Complex64>,
}

const CACHE_MAGIC: &[u8; 5] = b"MDSL1";

impl LCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// Primitive `L(1/2+it, chi_{d0} psi)`, from cache or computed and
    /// inserted.
    pub fn get_or_fill(&self, d0: u64, psi: CharIndex, t: f64) -> Result<Complex64> {
        let flip = t < 0.0;
        let tc = if flip { -t } else { t };
        let key = (d0, psi.ord() as u8, tc.to_bits());
        if let Some(v) = self.inner.get(&key) {
            let v = *v;
            return Ok(if flip { v.conj() } else { v });
        }
        let dec = conductor_data(d0, psi)?;
        if dec.d1 != 1 {
            return Err(MdsError::InvalidInput(format!(
                "cache keys are squarefree kernels, got {d0}"
            )));
        }
        let v = afe_l_value(Complex64::new(0.5, tc), &dec, dec.delta0.max(HINT_FLOOR))?;
        self.inner.insert(key, v);
        Ok(if flip { v.conj() } else { v })
    }

    /// Serialize all entries (fixed record order: sorted by key) in the
    /// little-endian `MDSL1` record format.
    pub fn save<W: IoWrite>(&self, mut w: W) -> Result<()> {
        let mut keys: Vec<LKey> = self.inner.iter().map(|e| *e.key()).collect();
        keys.sort_unstable();
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(keys.len() as u64).to_le_bytes())?;
        for k in keys {
            let v = *self.inner.get(&k).expect("key just listed");
            w.write_all(&k.0.to_le_bytes())?;
            w.write_all(&[k.1])?;
            w.write_all(&k.2.to_le_bytes())?;
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Load records saved by [`LCache::save`], merging into this cache.
    pub fn load<R: IoRead>(&self, mut r: R) -> Result<usize> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(MdsError::CacheFormat(format!(
                "bad magic {:?}, expected MDSL1",
                String::from_utf8_lossy(&magic)
            )));
        }
        let mut n8 = [0u8; 8];
        r.read_exact(&mut n8)?;
        let n = u64::from_le_bytes(n8);
        let mut count = 0usize;
        for _ in 0..n {
            let mut rec = [0u8; 33];
            r.read_exact(&mut rec)?;
            let d0 = u64::from_le_bytes(rec[0..8].try_into().unwrap());
            let psi = rec[8];
            if psi > 3 {
                return Err(MdsError::CacheFormat(format!(
                    "character ordinal out of range: {psi}"
                )));
            }
            let t = u64::from_le_bytes(rec[9..17].try_into().unwrap());
            let re = f64::from_le_bytes(rec[17..25].try_into().unwrap());
            let im = f64::from_le_bytes(rec[25..33].try_into().unwrap());
            self.inner.insert((d0, psi, t), Complex64::new(re, im));
            count += 1;
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::ALL_CHARS;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const PI2_6: f64 = PI * PI / 6.0;

    #[test]
    fn hurwitz_matches_series_and_identities() {
        // zeta(2) against the direct series with integral tail bound
        let mut direct = 0.0f64;
        let n = 20_000usize;
        for k in 1..=n {
            direct += 1.0 / (k as f64 * k as f64);
        }
        // tail in (1/(n+1), 1/n)
        direct += 1.0 / (n as f64 + 0.5);
        let z2 = zeta(c64(2.0, 0.0)).unwrap();
        assert!((z2.re - direct).abs() < 1e-9);
        assert!((z2.re - PI2_6).abs() < 1e-12);
        // special values
        assert!((zeta(c64(0.0, 0.0)).unwrap().re + 0.5).abs() < 1e-12);
        assert!((zeta(c64(-1.0, 0.0)).unwrap().re + 1.0 / 12.0).abs() < 1e-12);
        assert!((zeta(c64(3.0, 0.0)).unwrap().re - 1.2020569031595942854).abs() < 1e-12);
        assert!((zeta(c64(0.5, 0.0)).unwrap().re + 1.4603545088095868).abs() < 1e-10);
        // hurwitz at x = 1/2: (2^s - 1) zeta(s)
        for s in [c64(2.0, 0.0), c64(1.7, 3.3), c64(0.4, -11.0)] {
            let lhs = hurwitz_zeta(s, 0.5).unwrap();
            let rhs = ((s * (2.0f64).ln()).exp() - 1.0) * zeta(s).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0), "s={s}");
            // recurrence zetaH(s, x) = zetaH(s, x+1) + x^{-s}
            for x in [0.25, 0.8] {
                let l = hurwitz_zeta(s, x).unwrap();
                let r = hurwitz_zeta(s, x + 1.0).unwrap() + (-s * x.ln()).exp();
                assert!((l - r).norm() < 1e-10 * l.norm().max(1.0));
            }
        }
        // pole rejected
        assert!(hurwitz_zeta(c64(1.0, 0.0), 0.3).is_err());
    }

    #[test]
    fn zeta_functional_equation_and_first_zero() {
        // zeta(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s) zeta(1-s)
        for s in [c64(-1.5, 0.0), c64(0.3, 2.0), c64(-0.4, -7.0)] {
            let lhs = zeta(s).unwrap();
            let rhs = (s * (2.0f64).ln() + (s - 1.0) * PI.ln()).exp()
                * (PI * s / 2.0).sin()
                * log_gamma(1.0 - s).exp()
                * zeta(1.0 - s).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0), "s={s}");
        }
        // first zero on the critical line
        let z = zeta(c64(0.5, 14.134725141734693)).unwrap();
        assert!(z.norm() < 1e-6, "{}", z.norm());
    }

    #[test]
    fn reflection_is_unimodular_on_critical_line() {
        assert!((root_lambda(0.0, 5, 0) - 1.0).norm() < 1e-12);
        assert!((root_lambda(7.3, 40, 0).norm() - 1.0).abs() < 1e-12);
        assert!((root_lambda(7.3, 40, 1).norm() - 1.0).abs() < 1e-12);
        for kappa in [0, 1] {
            let plus = root_lambda(2.5, 12, kappa);
            let minus = root_lambda(-2.5, 12, kappa);
            assert!((plus.conj() - minus).norm() < 1e-12);
        }
    }

    #[test]
    fn smoothed_identity_hits_classical_values() {
        // zeta(2) through the trivial character (pole corrections exercised)
        let q = LQuery { s: c64(2.0, 0.0), d0: 1, psi: CharIndex::Psi1, method: LMethod::Afe };
        let v = l_primitive(&q).unwrap();
        assert!((v - PI2_6).norm() < 1e-10, "{v}");
        // zeta(1/2)
        let q = LQuery { s: c64(0.5, 0.0), d0: 1, psi: CharIndex::Psi1, method: LMethod::Afe };
        let v = l_primitive(&q).unwrap();
        assert!((v.re + 1.4603545088095868).abs() < 1e-10, "{v}");
        assert!(v.im.abs() < 1e-12);
        // pole rejected
        let q = LQuery { s: c64(1.0, 0.0), d0: 1, psi: CharIndex::Psi1, method: LMethod::Afe };
        assert!(l_primitive(&q).is_err());
        // L(1, chi_{-4}) = pi/4
        let q = LQuery { s: c64(1.0, 0.0), d0: 1, psi: CharIndex::PsiM1, method: LMethod::Afe };
        assert!((l_primitive(&q).unwrap() - PI / 4.0).norm() < 1e-10);
        // L(2, chi_{-4}) = Catalan
        let q = LQuery { s: c64(2.0, 0.0), d0: 1, psi: CharIndex::PsiM1, method: LMethod::Afe };
        assert!((l_primitive(&q).unwrap().re - 0.915965594177219).abs() < 1e-10);
        // L(1, chi_8) = log(1+sqrt 2)/sqrt 2
        let q = LQuery { s: c64(1.0, 0.0), d0: 1, psi: CharIndex::Psi2, method: LMethod::Afe };
        let want = (1.0 + 2.0f64.sqrt()).ln() / 2.0f64.sqrt();
        assert!((l_primitive(&q).unwrap().re - want).abs() < 1e-10);
        // L(1, chi_{-8}) = pi / (2 sqrt 2)
        let q = LQuery { s: c64(1.0, 0.0), d0: 1, psi: CharIndex::PsiM2, method: LMethod::Afe };
        assert!((l_primitive(&q).unwrap().re - PI / (2.0 * 2.0f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn methods_agree_on_sample_conductors() {
        for d0 in [1u64, 5, 13, 21, 33] {
            for psi in ALL_CHARS {
                for t in [0.0, 5.0] {
                    let s = c64(0.5, t);
                    if d0 == 1 && psi == CharIndex::Psi1 && t == 0.0 {
                        // fine: zeta(1/2), no pole
                    }
                    let afe =
                        l_primitive(&LQuery { s, d0, psi, method: LMethod::Afe }).unwrap();
                    let orc =
                        l_primitive(&LQuery { s, d0, psi, method: LMethod::HurwitzOracle })
                            .unwrap();
                    assert!(
                        (afe - orc).norm() < 1e-8,
                        "d0={d0}, {psi:?}, t={t}: {afe} vs {orc} ({})",
                        (afe - orc).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn reflection_residual_vanishes() {
        // |L(s) - E(s) L(1-s)| at s = 0.3 + 2i, d0 = 13
        let s = c64(0.3, 2.0);
        let dec = conductor_data(13, CharIndex::Psi1).unwrap();
        let l_s = afe_l_value(s, &dec, dec.delta0).unwrap();
        let l_1ms = afe_l_value(1.0 - s, &dec, dec.delta0).unwrap();
        let resid = (l_s - reflection_factor(s, dec.delta0, dec.kappa) * l_1ms).norm();
        assert!(resid < 1e-7, "{resid}");
    }

    #[test]
    fn euler_factor_removal_examples() {
        // d = 9 = 1 * 3^2: (1 - 2^{-2})(1 - 3^{-2}) zeta(2) = pi^2/9
        let v = l2_value(c64(2.0, 0.0), 9, CharIndex::Psi1, LMethod::Afe).unwrap();
        assert!((v - PI * PI / 9.0).norm() < 1e-10, "{v}");
        // d = 1: (1 - 2^{-2}) zeta(2) = pi^2/8
        let v = l2_value(c64(2.0, 0.0), 1, CharIndex::Psi1, LMethod::Afe).unwrap();
        assert!((v - PI * PI / 8.0).norm() < 1e-10, "{v}");
        // squarefree d = 13 at s = 3: direct truncated Dirichlet sum oracle
        let s = c64(3.0, 0.0);
        let v = l2_value(s, 13, CharIndex::Psi1, LMethod::Afe).unwrap();
        let dec = conductor_data(13, CharIndex::Psi1).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for n in (1..4000u64).step_by(2) {
            direct += chi_star(&dec, n as i64) as f64 * (-s * (n as f64).ln()).exp();
        }
        assert!((v - direct).norm() < 1e-6, "{v} vs {direct}");
    }

    #[test]
    fn bulk_line_matches_pointwise() {
        // all four characters: exercises the shared-sieve factorization of
        // chi*, including its 2-part for the odd-conductor cases
        let s = c64(0.5, 3.0);
        let lines = l2_line_all(s, 99).unwrap();
        for psi in ALL_CHARS {
            for d in (1..=99u64).step_by(2) {
                let point = l2_value(s, d, psi, LMethod::Afe).unwrap();
                assert!(
                    (lines[psi.ord()][d as usize] - point).norm() < 1e-12,
                    "d={d}, {psi:?}"
                );
            }
        }
        // negative ordinate goes through conjugation
        let line_neg = l2_line(c64(0.5, -3.0), 19, CharIndex::Psi1).unwrap();
        let line_pos = l2_line(c64(0.5, 3.0), 19, CharIndex::Psi1).unwrap();
        for d in (1..=19usize).step_by(2) {
            assert!((line_neg[d] - line_pos[d].conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn interpolated_kernel_matches_direct_contour() {
        // probe the engine's tables against a fresh contour evaluation at
        // off-grid arguments
        let s = c64(0.5, 2.0);
        let engine = cached_engine(s, 1 << 16);
        let tab = &engine.tabs[0].0;
        for lam in [-4.03, -1.234, 0.017, 1.9995, 3.5] {
            let direct = kernel_column(s, s, 0, &[lam])[0];
            let interp = tab.eval(lam);
            assert!(
                (direct - interp).norm() < 5e-9,
                "lambda={lam}: {direct} vs {interp}"
            );
        }
    }

    #[test]
    fn mean_value_ratio_stays_bounded() {
        // sum_{d<=X odd} |L2(1/2+it, chi_d psi)| <= 20 X^{1.05} (1+|t|)^{1/4}
        for &(x, t) in &[(256u64, 0.0f64), (512, 10.0)] {
            let line = l2_line(c64(0.5, t), x, CharIndex::Psi2).unwrap();
            let total: f64 = line.iter().map(|v| v.norm()).sum();
            let bound = 20.0 * (x as f64).powf(1.05) * (1.0 + t.abs()).powf(0.25);
            assert!(total <= bound, "X={x}, t={t}: {total} > {bound}");
        }
    }

    #[test]
    fn cache_roundtrip_and_transparency() {
        let cache = LCache::new();
        let a = cache.get_or_fill(5, CharIndex::Psi1, 2.5).unwrap();
        let b = cache.get_or_fill(5, CharIndex::Psi1, 2.5).unwrap();
        assert_eq!(a, b); // bit-identical hit
        let direct = afe_l_value(
            c64(0.5, 2.5),
            &conductor_data(5, CharIndex::Psi1).unwrap(),
            HINT_FLOOR,
        )
        .unwrap();
        assert_eq!(a, direct);
        // negative t flows through conjugation
        let neg = cache.get_or_fill(5, CharIndex::Psi1, -2.5).unwrap();
        assert_eq!(neg, a.conj());
        // persistence
        let _ = cache.get_or_fill(13, CharIndex::PsiM2, 0.0).unwrap();
        let mut buf = Vec::new();
        cache.save(&mut buf).unwrap();
        let restored = LCache::new();
        let n = restored.load(buf.as_slice()).unwrap();
        assert_eq!(n, 2);
        assert_eq!(restored.get_or_fill(5, CharIndex::Psi1, 2.5).unwrap(), a);
        // corrupted magic rejected
        let bad = b"MDSXX".to_vec();
        assert!(restored.load(bad.as_slice()).is_err());
    }
}
