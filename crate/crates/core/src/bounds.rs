//! Empirical laboratory for the inequality machinery behind the growth and
//! mean-square measurements: windowed second moments of dyadic coefficient
//! blocks, exhaustive near-diagonal lattice counts, quadratic-character
//! sieve ratios, smoothed first-moment sums over a dyadic window, the three
//! dyadic block-sum shapes that appear after reflection, growth scans along
//! the critical lines, and box mean squares of the critical vector.
//!
//! Nothing here proves an inequality.  Every operation evaluates a finite
//! object exactly and reports it (or a ratio against an envelope shape);
//! fitted constants are empirical and are pinned by the test suite.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::characters::{
    chi_star, conductor_data, decompose, kronecker, psi_value, spf_table, CharIndex,
};
use crate::critical::{
    analytic_conductor, reflect_left, sum_from_lines, CriticalEngine, LineCache, NodeFactors,
    CONTOUR_HEIGHT,
};
use crate::error::{MdsError, Result};
use crate::feq::{matrix_b, FEMatrix};
use crate::lfunctions::{l2_line, l2_value, LMethod};
use crate::parallel;
use crate::quad::panel_nodes;
use crate::rng::XorShift64;
use crate::zcore::majorant_exponent;

/// The fixed small exponent used wherever an envelope carries an
/// epsilon-style allowance (window growth, cap exponents, ratio scales).
pub const WINDOW_EPS: f64 = 0.05;

/// Cap on the dyadic block sizes of [`BlockInstance`] and the exhaustive
/// tuple counts (desk scale: the quadrature and the enumeration are exact,
/// so cost grows with the block area).
pub const BLOCK_SIZE_CAP: f64 = 64.0;

/// Total term budget across all dyadic blocks of [`dyadic_block_sum`].
pub const TERM_BUDGET: usize = 1 << 14;

/// Caps for [`bilinear_ratio`] (each side) and [`first_moment_ratio`].
pub const BILINEAR_CAP: usize = 1 << 14;
pub const FIRST_MOMENT_CAP: u64 = 1 << 12;
pub const FIRST_MOMENT_HEIGHT: f64 = 40.0;

/// Hard cap on the window scale of [`smoothed_line_sum`]: the term count
/// grows linearly with it, and every pinned usage sits far below.
pub const LINE_SUM_SCALE_CAP: f64 = 4096.0;

// ---------------------------------------------------------------------------
// Smooth compactly supported windows
// ---------------------------------------------------------------------------

/// A smooth compactly supported window on `[center - hw, center + hw]`.
///
/// With `margin = 1` this is the classical smooth bump
/// `exp(1 - 1/(1 - xi^2))` in the rescaled coordinate `xi`; with
/// `margin < 1` the plateau variant, identically `1` on the inner
/// `(1 - margin)` fraction of each half-width with a smooth ramp outside.
/// Both are infinitely differentiable and vanish with all derivatives at
/// the support boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    center: f64,
    half_width: f64,
    margin: f64,
}

impl Bump {
    /// Classical bump on `[center - half_width, center + half_width]`.
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() || !center.is_finite() {
            return Err(MdsError::InvalidInput(format!(
                "bump needs a finite center and positive half-width, got ({center}, {half_width})"
            )));
        }
        Ok(Bump { center, half_width, margin: 1.0 })
    }

    /// Plateau variant: `1` on the inner `(1 - margin)` fraction of each
    /// half-width, smooth ramp to `0` across the outer `margin` fraction.
    pub fn plateau(center: f64, half_width: f64, margin: f64) -> Result<Self> {
        let base = Bump::new(center, half_width)?;
        if !(margin > 0.0 && margin <= 1.0) {
            return Err(MdsError::InvalidInput(format!(
                "plateau margin must lie in (0, 1], got {margin}"
            )));
        }
        Ok(Bump { margin, ..base })
    }

    /// The symmetric window on `[-2, 2]` used by the block second moments.
    pub fn standard() -> Self {
        Bump { center: 0.0, half_width: 2.0, margin: 1.0 }
    }

    /// The window on `[1, 2]` used by the smoothed line sums.
    pub fn unit_window() -> Self {
        Bump { center: 1.5, half_width: 0.5, margin: 1.0 }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let xi = ((x - self.center) / self.half_width).abs();
        if xi >= 1.0 {
            return 0.0;
        }
        if self.margin >= 1.0 {
            return (1.0 - 1.0 / (1.0 - xi * xi)).exp();
        }
        if xi <= 1.0 - self.margin {
            return 1.0;
        }
        smooth_step((1.0 - xi) / self.margin)
    }

    /// Integral of the window over its support (Gauss-Legendre panels; the
    /// integrand is smooth so the value is converged far below 1e-9).
    pub fn mass(&self) -> f64 {
        let (lo, hi) = self.support();
        panel_nodes(lo, hi, 16).iter().map(|&(x, w)| w * self.eval(x)).sum()
    }
}

/// Smooth step: `0` for `y <= 0`, `1` for `y >= 1`, infinitely
/// differentiable in between (the standard `exp(-1/y)` construction).
fn smooth_step(y: f64) -> f64 {
    fn edge(y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            (-1.0 / y).exp()
        }
    }
    let a = edge(y);
    let b = edge(1.0 - y);
    a / (a + b)
}

// ---------------------------------------------------------------------------
// Dyadic blocks
// ---------------------------------------------------------------------------

/// Integers in the dyadic block `[size, 2 size)`.
fn block_integers(size: f64) -> Vec<u64> {
    let lo = size.ceil().max(1.0) as u64;
    let hi = (2.0 * size).ceil() as u64;
    (lo..hi).collect()
}

fn odd_block_integers(size: f64) -> Vec<u64> {
    block_integers(size).into_iter().filter(|d| d % 2 == 1).collect()
}

/// Dyadic sizes `1, 2, 4, ...` up to and including `cap`.
fn dyadic_sizes(cap: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut size = 1.0f64;
    while size <= cap {
        out.push(size);
        size *= 2.0;
    }
    out
}

// ---------------------------------------------------------------------------
// Windowed second moments of dyadic block sums
// ---------------------------------------------------------------------------

/// The two phase layouts of the block second moment: `Split` pairs each
/// summation variable with its own frequency (`n^{-it} d^{-iu}`), `Twisted`
/// couples them through a shared frequency (`n^{-iu} d^{+i(u+t)}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLayout {
    Split,
    Twisted,
}

/// One dyadic block of unit-modulus coefficients `f(d, n)` for
/// `d in [D, 2D)`, `n in [N, 2N)`, together with the window scales
/// `Y1, Y2 >= 1` and the two smooth windows of the second moment.
#[derive(Debug, Clone)]
pub struct BlockInstance {
    d_size: f64,
    n_size: f64,
    y1: f64,
    y2: f64,
    w1: Bump,
    w2: Bump,
    d_vals: Vec<u64>,
    n_vals: Vec<u64>,
    /// Row-major over `(d index, n index)`.
    f: Vec<Complex64>,
}

impl BlockInstance {
    pub fn new(
        d_size: f64,
        n_size: f64,
        y1: f64,
        y2: f64,
        mut f: impl FnMut(u64, u64) -> Complex64,
    ) -> Result<Self> {
        for (name, v) in [("D", d_size), ("N", n_size)] {
            if !(v > 0.0 && v <= BLOCK_SIZE_CAP) {
                return Err(MdsError::RangeCap {
                    what: format!("block size {name}"),
                    got: format!("{v}"),
                    cap: format!("0 < {name} <= {BLOCK_SIZE_CAP}"),
                });
            }
        }
        if !(y1 >= 1.0 && y2 >= 1.0) {
            return Err(MdsError::InvalidInput(format!(
                "window scales must satisfy Y1, Y2 >= 1, got ({y1}, {y2})"
            )));
        }
        let d_vals = block_integers(d_size);
        let n_vals = block_integers(n_size);
        let mut table = Vec::with_capacity(d_vals.len() * n_vals.len());
        for &d in &d_vals {
            for &n in &n_vals {
                let v = f(d, n);
                if v.norm() > 1.0 + 1e-12 {
                    return Err(MdsError::InvalidInput(format!(
                        "coefficient f({d}, {n}) has modulus {} > 1",
                        v.norm()
                    )));
                }
                table.push(v);
            }
        }
        Ok(BlockInstance {
            d_size,
            n_size,
            y1,
            y2,
            w1: Bump::standard(),
            w2: Bump::standard(),
            d_vals,
            n_vals,
            f: table,
        })
    }

    /// Replace the two windows (supports must sit inside `[-2, 2]`).
    pub fn with_windows(mut self, w1: Bump, w2: Bump) -> Result<Self> {
        for w in [&w1, &w2] {
            let (lo, hi) = w.support();
            if lo < -2.0 - 1e-9 || hi > 2.0 + 1e-9 {
                return Err(MdsError::InvalidInput(format!(
                    "window support [{lo}, {hi}] must sit inside [-2, 2]"
                )));
            }
        }
        self.w1 = w1;
        self.w2 = w2;
        Ok(self)
    }

    /// Random unit signs from a deterministic generator.
    pub fn random_signs(d_size: f64, n_size: f64, y1: f64, y2: f64, seed: u64) -> Result<Self> {
        let mut rng = XorShift64::new(seed);
        BlockInstance::new(d_size, n_size, y1, y2, |_, _| {
            Complex64::new(rng.next_sign(), 0.0)
        })
    }

    pub fn d_size(&self) -> f64 {
        self.d_size
    }

    pub fn n_size(&self) -> f64 {
        self.n_size
    }

    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn y2(&self) -> f64 {
        self.y2
    }

    /// The combined scale `X = Y1 Y2 D N`.
    pub fn scale(&self) -> f64 {
        self.y1 * self.y2 * self.d_size * self.n_size
    }
}

/// The windowed second moment of the block sum:
///
/// ```text
/// Int Int W1(t/Y1) W2(u/Y2) | Sum_{d,n} f(d,n) phase(d,n;t,u) |^2 du dt
/// ```
///
/// with the phase pairing chosen by `layout`, evaluated by tensorized
/// Gauss-Legendre quadrature of the explicit finite sum.  The quadrature is
/// verified by panel doubling; disagreement raises a quadrature error.
pub fn block_mean_square(inst: &BlockInstance, layout: PhaseLayout) -> Result<f64> {
    let panels_t = ((4.0 * inst.y1) / 1.5).ceil().max(4.0) as usize;
    let panels_u = ((4.0 * inst.y2) / 1.5).ceil().max(4.0) as usize;
    let coarse = block_moment_value(inst, layout, panels_t, panels_u);
    let fine = block_moment_value(inst, layout, 2 * panels_t, 2 * panels_u);
    let delta = (coarse - fine).abs();
    let tol = 1e-6;
    if delta > tol * (1.0 + fine.abs()) {
        return Err(MdsError::QuadratureNonConvergence { delta, tol });
    }
    Ok(fine)
}

fn block_moment_value(
    inst: &BlockInstance,
    layout: PhaseLayout,
    panels_t: usize,
    panels_u: usize,
) -> f64 {
    let tn = panel_nodes(-2.0 * inst.y1, 2.0 * inst.y1, panels_t);
    let un = panel_nodes(-2.0 * inst.y2, 2.0 * inst.y2, panels_u);
    let nd = inst.d_vals.len();
    let nn = inst.n_vals.len();
    let ln_d: Vec<f64> = inst.d_vals.iter().map(|&d| (d as f64).ln()).collect();
    let ln_n: Vec<f64> = inst.n_vals.iter().map(|&n| (n as f64).ln()).collect();

    // The node sum factors as S(t, u) = sum_d A[t][d] B[u][d] in both
    // layouts; only the tensor contents differ.
    let mut a_tensor = Vec::with_capacity(tn.len() * nd);
    for &(t, _) in &tn {
        for di in 0..nd {
            a_tensor.push(match layout {
                PhaseLayout::Split => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ni in 0..nn {
                        acc += inst.f[di * nn + ni] * Complex64::from_polar(1.0, -t * ln_n[ni]);
                    }
                    acc
                }
                PhaseLayout::Twisted => Complex64::from_polar(1.0, t * ln_d[di]),
            });
        }
    }
    let mut b_tensor = Vec::with_capacity(un.len() * nd);
    for &(u, _) in &un {
        for di in 0..nd {
            b_tensor.push(match layout {
                PhaseLayout::Split => Complex64::from_polar(1.0, -u * ln_d[di]),
                PhaseLayout::Twisted => {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ni in 0..nn {
                        acc += inst.f[di * nn + ni] * Complex64::from_polar(1.0, -u * ln_n[ni]);
                    }
                    acc * Complex64::from_polar(1.0, u * ln_d[di])
                }
            });
        }
    }

    let wu: Vec<f64> = un.iter().map(|&(u, w)| w * inst.w2.eval(u / inst.y2)).collect();
    let rows = parallel::map_ordered(tn.len(), |ti| {
        let (t, wt) = tn[ti];
        let weight_t = wt * inst.w1.eval(t / inst.y1);
        if weight_t == 0.0 {
            return 0.0;
        }
        let a_row = &a_tensor[ti * nd..(ti + 1) * nd];
        let mut acc = 0.0f64;
        for ui in 0..un.len() {
            if wu[ui] == 0.0 {
                continue;
            }
            let b_row = &b_tensor[ui * nd..(ui + 1) * nd];
            let mut s = Complex64::new(0.0, 0.0);
            for di in 0..nd {
                s += a_row[di] * b_row[di];
            }
            acc += wu[ui] * s.norm_sqr();
        }
        weight_t * acc
    });
    rows.into_iter().sum()
}

/// The envelope shape the second moment is compared against (no epsilon
/// factor; callers multiply their own allowance):
///
/// * `Split`:   `D N Y1 Y2 (1 + N/Y1)(1 + D/Y2)`
/// * `Twisted`: `N D Y1 Y2 + N D^2 min(Y1, Y2) + N^2 D Y1 + (N D)^2`
pub fn block_moment_envelope(inst: &BlockInstance, layout: PhaseLayout) -> f64 {
    let (d, n, y1, y2) = (inst.d_size, inst.n_size, inst.y1, inst.y2);
    match layout {
        PhaseLayout::Split => d * n * y1 * y2 * (1.0 + n / y1) * (1.0 + d / y2),
        PhaseLayout::Twisted => {
            n * d * y1 * y2 + n * d * d * y1.min(y2) + n * n * d * y1 + (n * d) * (n * d)
        }
    }
}

// ---------------------------------------------------------------------------
// Exhaustive near-diagonal tuple counts
// ---------------------------------------------------------------------------

/// Exhaustive count of the near-diagonal tuple set behind the `Twisted`
/// envelope, split by whether the two inner indices coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleCount {
    pub total: u64,
    pub equal_n: u64,
    pub distinct_n: u64,
}

/// Enumerates all `(d1, d2, n1, n2)` with `d1, d2 in [D, 2D)`,
/// `n1, n2 in [N, 2N)`, `|d1 - d2| <= D X^eps / Y1` and
/// `|n2 d1 - n1 d2| <= N D X^eps / Y2`, where `X = Y1 Y2 D N` and the
/// window constants are fixed to `1`.
pub fn near_diagonal_count(
    d_size: f64,
    n_size: f64,
    y1: f64,
    y2: f64,
    eps: f64,
) -> Result<TupleCount> {
    for (name, v) in [("D", d_size), ("N", n_size)] {
        if !(v > 0.0 && v <= BLOCK_SIZE_CAP) {
            return Err(MdsError::RangeCap {
                what: format!("tuple-count block size {name}"),
                got: format!("{v}"),
                cap: format!("0 < {name} <= {BLOCK_SIZE_CAP}"),
            });
        }
    }
    if !(y1 >= 1.0 && y2 >= 1.0) || !(0.0..=0.5).contains(&eps) {
        return Err(MdsError::InvalidInput(format!(
            "tuple count needs Y1, Y2 >= 1 and eps in [0, 1/2], got ({y1}, {y2}, {eps})"
        )));
    }
    let ds = block_integers(d_size);
    let ns = block_integers(n_size);
    let x = y1 * y2 * d_size * n_size;
    let win_a = d_size * x.powf(eps) / y1;
    let win_b = n_size * d_size * x.powf(eps) / y2;
    let mut equal_n = 0u64;
    let mut distinct_n = 0u64;
    for &d1 in &ds {
        for &d2 in &ds {
            if (d1 as i64 - d2 as i64).abs() as f64 > win_a {
                continue;
            }
            for &n1 in &ns {
                for &n2 in &ns {
                    let b = n2 as i64 * d1 as i64 - n1 as i64 * d2 as i64;
                    if b.abs() as f64 <= win_b {
                        if n1 == n2 {
                            equal_n += 1;
                        } else {
                            distinct_n += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(TupleCount { total: equal_n + distinct_n, equal_n, distinct_n })
}

// ---------------------------------------------------------------------------
// Quadratic-character sieve ratios
// ---------------------------------------------------------------------------

/// `|Sum_{m <= M odd} Sum_{n <= N} a_m b_n (n/m)| / (M + N)^{1/2 + eps}`
/// for coefficient sequences inside the `k^{-1/2+eps}` envelope
/// (`a` indexed by `m`, `b` by `n`, index 0 unused).
pub fn bilinear_ratio(
    m_max: usize,
    n_max: usize,
    a: &[Complex64],
    b: &[Complex64],
) -> Result<f64> {
    for (name, v) in [("M", m_max), ("N", n_max)] {
        if v == 0 || v > BILINEAR_CAP {
            return Err(MdsError::RangeCap {
                what: format!("bilinear ratio side {name}"),
                got: format!("{v}"),
                cap: format!("1 <= {name} <= {BILINEAR_CAP}"),
            });
        }
    }
    if a.len() <= m_max || b.len() <= n_max {
        return Err(MdsError::InvalidInput(format!(
            "coefficient slices too short: need indices through ({m_max}, {n_max})"
        )));
    }
    let envelope = |k: usize| (k as f64).powf(-0.5 + WINDOW_EPS) * (1.0 + 1e-9) + 1e-15;
    for m in (1..=m_max).step_by(2) {
        if a[m].norm() > envelope(m) {
            return Err(MdsError::InvalidInput(format!(
                "coefficient a[{m}] breaks the k^(-1/2+eps) envelope"
            )));
        }
    }
    for (n, bn) in b.iter().enumerate().take(n_max + 1).skip(1) {
        if bn.norm() > envelope(n) {
            return Err(MdsError::InvalidInput(format!(
                "coefficient b[{n}] breaks the k^(-1/2+eps) envelope"
            )));
        }
    }

    let spf = spf_table(n_max);
    let mut row = vec![0i8; n_max + 1];
    let mut total = Complex64::new(0.0, 0.0);
    for m in (1..=m_max).step_by(2) {
        if a[m].norm() == 0.0 {
            continue;
        }
        // (n/m) is completely multiplicative in n: sieve it from the
        // values at primes.
        row[1] = 1;
        for n in 2..=n_max {
            let p = spf[n] as usize;
            row[n] = if p == n {
                kronecker(n as i64, m as i64)?
            } else {
                row[n / p] * row[p]
            };
        }
        let mut inner = Complex64::new(0.0, 0.0);
        for n in 1..=n_max {
            if row[n] != 0 {
                inner += b[n] * row[n] as f64;
            }
        }
        total += a[m] * inner;
    }
    Ok(total.norm() / ((m_max + n_max) as f64).powf(0.5 + WINDOW_EPS))
}

/// First-moment ratio of the character line at height `t`:
/// `Sum_{d <= X odd} |L_2(1/2 + it, chi_d psi)| / (X^{1.05} (1 + |t|)^{1/4})`.
pub fn first_moment_ratio(x: u64, t: f64, psi: CharIndex) -> Result<f64> {
    if x == 0 || x > FIRST_MOMENT_CAP {
        return Err(MdsError::RangeCap {
            what: "first-moment range".into(),
            got: format!("{x}"),
            cap: format!("1 <= X <= {FIRST_MOMENT_CAP}"),
        });
    }
    if !t.is_finite() || t.abs() > FIRST_MOMENT_HEIGHT {
        return Err(MdsError::RangeCap {
            what: "first-moment height".into(),
            got: format!("{t}"),
            cap: format!("|t| <= {FIRST_MOMENT_HEIGHT}"),
        });
    }
    let line = l2_line(Complex64::new(0.5, t), x, psi)?;
    let total: f64 = line.iter().map(|v| v.norm()).sum();
    Ok(total / ((x as f64).powf(1.05) * (1.0 + t.abs()).powf(0.25)))
}

// ---------------------------------------------------------------------------
// Smoothed line sums over a dyadic window
// ---------------------------------------------------------------------------

/// The smoothed sum of character-line values over one dyadic window:
///
/// ```text
/// Sum_{d, m odd} L_2(1/2 + it, chi_d psi) psi'(d)
///                d^{-1/2 - iu} m^{-1 - 2i(u + t)} W(d m^2 / P)
/// ```
///
/// truncated by the window's support inside `[P, 2P]`.  The natural
/// operating range keeps `P` below roughly `((1+|u|)(1+|u+t|))^{0.6}`; the
/// hard cap only guards the term count.
pub fn smoothed_line_sum(
    t: f64,
    u: f64,
    p: f64,
    psi: CharIndex,
    psi_pr: CharIndex,
    window: &Bump,
    method: LMethod,
) -> Result<Complex64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(MdsError::InvalidInput(format!(
            "window scale must satisfy P >= 1, got {p}"
        )));
    }
    if p > LINE_SUM_SCALE_CAP {
        return Err(MdsError::RangeCap {
            what: "smoothed-sum scale".into(),
            got: format!("{p}"),
            cap: format!("P <= {LINE_SUM_SCALE_CAP}"),
        });
    }
    let (lo, hi) = window.support();
    if lo < 1.0 - 1e-9 || hi > 2.0 + 1e-9 {
        return Err(MdsError::InvalidInput(format!(
            "window support [{lo}, {hi}] must sit inside [1, 2]"
        )));
    }
    let s = Complex64::new(0.5, t);
    let d_exp = -Complex64::new(0.5, u);
    let m_exp = -Complex64::new(1.0, 2.0 * (u + t));
    let mut acc = Complex64::new(0.0, 0.0);
    let mut m = 1u64;
    while (m * m) as f64 <= 2.0 * p {
        let mm = (m * m) as f64;
        let d_lo = ((p / mm).floor() as u64).max(1);
        let d_hi = (2.0 * p / mm).ceil() as u64;
        let m_pow = (m_exp * (m as f64).ln()).exp();
        for d in d_lo..=d_hi {
            if d % 2 == 0 {
                continue;
            }
            let weight = window.eval(d as f64 * mm / p);
            if weight == 0.0 {
                continue;
            }
            let l = l2_value(s, d, psi, method)?;
            let d_pow = (d_exp * (d as f64).ln()).exp();
            acc += l * (psi_value(psi_pr, d as i64) as f64) * d_pow * m_pow * weight;
        }
        m += 2;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Dyadic block sums (the three post-reflection shapes)
// ---------------------------------------------------------------------------

/// The three block-sum shapes: `Primitive` runs over squarefree odd
/// conductors with the conductor power `delta0^{s/2}` and both frequency
/// signs; `Forward` and `Mirror` are the two conjugate twisted bilinear
/// arrangements over odd `d, n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DyadicSumKind {
    Primitive,
    Forward,
    Mirror,
}

/// Sum over dyadic blocks `D = 2^k <= d_cap`, `N = 2^k <= n_cap` of the
/// absolute values of the inner bilinear sums; the caps are
///
/// * `Primitive`: `d_cap = P^{1+eps}`,            `n_cap = (Y1 P)^{1/2+eps}`
/// * `Forward`:   `d_cap = (Y1 P)^{1/2+eps}`,     `n_cap = (Y1/P)^{1/2} Y2^{1+eps}`
/// * `Mirror`:    `d_cap = (Y1/P)^{1/2} Y2^{1+eps}`, `n_cap = (Y1 P)^{1/2} Y2^{eps}`
///
/// with `eps` the module-wide window exponent.  The total raw term count
/// across all blocks is capped by [`TERM_BUDGET`].
#[allow(clippy::too_many_arguments)]
pub fn dyadic_block_sum(
    kind: DyadicSumKind,
    t: f64,
    u: f64,
    p: f64,
    y1: f64,
    y2: f64,
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
) -> Result<f64> {
    if !(p >= 1.0 && y1 >= 1.0 && y2 >= 1.0) {
        return Err(MdsError::InvalidInput(format!(
            "block sums need P, Y1, Y2 >= 1, got ({p}, {y1}, {y2})"
        )));
    }
    let (d_cap, n_cap) = match kind {
        DyadicSumKind::Primitive => (p.powf(1.0 + WINDOW_EPS), (y1 * p).powf(0.5 + WINDOW_EPS)),
        DyadicSumKind::Forward => {
            ((y1 * p).powf(0.5 + WINDOW_EPS), (y1 / p).sqrt() * y2.powf(1.0 + WINDOW_EPS))
        }
        DyadicSumKind::Mirror => {
            ((y1 / p).sqrt() * y2.powf(1.0 + WINDOW_EPS), (y1 * p).sqrt() * y2.powf(WINDOW_EPS))
        }
    };
    let d_sizes = dyadic_sizes(d_cap);
    let n_sizes = dyadic_sizes(n_cap);
    let mut budget = 0usize;
    for &dsz in &d_sizes {
        for &nsz in &n_sizes {
            budget += block_integers(dsz).len() * block_integers(nsz).len();
        }
    }
    if budget > TERM_BUDGET {
        return Err(MdsError::RangeCap {
            what: "dyadic term budget".into(),
            got: format!("{budget}"),
            cap: format!("<= {TERM_BUDGET}"),
        });
    }
    let mut total = 0.0f64;
    for &dsz in &d_sizes {
        for &nsz in &n_sizes {
            for inner in block_sum_inner(kind, dsz, nsz, t, u, s, w, psi, psi_pr)? {
                total += inner.norm();
            }
        }
    }
    Ok(total)
}

/// Inner bilinear sums of one `(D, N)` block: two entries (both frequency
/// signs) for `Primitive`, one for `Forward`/`Mirror`.
#[allow(clippy::too_many_arguments)]
fn block_sum_inner(
    kind: DyadicSumKind,
    d_size: f64,
    n_size: f64,
    t: f64,
    u: f64,
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    match kind {
        DyadicSumKind::Primitive => {
            let e_n_plus = Complex64::new(0.5, t) - s;
            let e_n_minus = Complex64::new(0.5, -t) - s;
            let e_d = Complex64::new(0.5, u) - w;
            let n_vals = block_integers(n_size);
            let mut plus = zero;
            let mut minus = zero;
            for d0 in odd_block_integers(d_size) {
                let (_, square_part) = decompose(d0)?;
                if square_part != 1 {
                    continue;
                }
                let dec = conductor_data(d0, psi)?;
                let coef = (psi_value(psi_pr, d0 as i64) as f64)
                    * (0.5 * s * (dec.delta0 as f64).ln()).exp()
                    * (-e_d * (d0 as f64).ln()).exp();
                for &n in &n_vals {
                    let ch = chi_star(&dec, n as i64) as f64;
                    if ch == 0.0 {
                        continue;
                    }
                    let ln_n = (n as f64).ln();
                    plus += ch * coef * (-e_n_plus * ln_n).exp();
                    minus += ch * coef * (-e_n_minus * ln_n).exp();
                }
            }
            Ok(vec![plus, minus])
        }
        DyadicSumKind::Forward | DyadicSumKind::Mirror => {
            let (e_n, e_d) = match kind {
                DyadicSumKind::Forward => (
                    Complex64::new(0.5, -u) + w,
                    Complex64::new(0.5, u + t) - w + s,
                ),
                _ => (
                    Complex64::new(0.5, u) + w,
                    Complex64::new(0.5, -(u + t)) - w + s,
                ),
            };
            let n_vals = odd_block_integers(n_size);
            let mut acc = zero;
            for d in odd_block_integers(d_size) {
                let coef = (psi_value(psi_pr, d as i64) as f64) * (-e_d * (d as f64).ln()).exp();
                for &n in &n_vals {
                    let ch = kronecker(d as i64, n as i64)? as f64;
                    if ch == 0.0 {
                        continue;
                    }
                    let rho = psi_value(psi, n as i64) as f64;
                    acc += ch * rho * coef * (-e_n * (n as f64).ln()).exp();
                }
            }
            Ok(vec![acc])
        }
    }
}

// ---------------------------------------------------------------------------
// Log-log fits
// ---------------------------------------------------------------------------

/// Ordinary least squares of `ln y` against `ln x`.
#[derive(Debug, Clone)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

/// OLS fit of `ln ys` against `ln xs`; inputs must be positive and the
/// abscissas must not collapse to a point.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(MdsError::InvalidInput(format!(
            "log-log fit needs two matched samples at least, got ({}, {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(MdsError::InvalidInput(
            "log-log fit needs strictly positive finite samples".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|&v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|&v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(ly.iter()).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    if sxx < 1e-18 {
        return Err(MdsError::InvalidInput(
            "degenerate regression: all abscissas coincide".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> =
        lx.iter().zip(ly.iter()).map(|(&a, &b)| b - (intercept + slope * a)).collect();
    let ss_res: f64 = residuals.iter().map(|&r| r * r).sum();
    let ss_tot: f64 = ly.iter().map(|&v| (v - my) * (v - my)).sum();
    let r2 = if ss_tot < 1e-30 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LineFit { slope, intercept, r2, residuals })
}

// ---------------------------------------------------------------------------
// Growth scans along the critical lines
// ---------------------------------------------------------------------------

/// The measurement slice through the joint critical lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthSlice {
    /// `t = 0`: growth in the second coordinate alone.
    WLine,
    /// `u = -t`: the line `s + w = 1`.
    Antidiag,
    /// A generic ray `(t, u) = (x/3, x)`.
    Generic,
}

impl GrowthSlice {
    pub fn coordinates(self, x: f64) -> (f64, f64) {
        match self {
            GrowthSlice::WLine => (0.0, x),
            GrowthSlice::Antidiag => (x, -x),
            GrowthSlice::Generic => (x / 3.0, x),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            GrowthSlice::WLine => "w_line",
            GrowthSlice::Antidiag => "antidiag",
            GrowthSlice::Generic => "generic",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "w_line" => Ok(GrowthSlice::WLine),
            "antidiag" => Ok(GrowthSlice::Antidiag),
            "generic" => Ok(GrowthSlice::Generic),
            other => Err(MdsError::InvalidInput(format!(
                "unknown slice '{other}' (expected w_line, antidiag, or generic)"
            ))),
        }
    }
}

/// One growth measurement: the sixteen component magnitudes at a critical
/// point together with its joint conductor.
#[derive(Debug, Clone)]
pub struct GrowthSample {
    pub t: f64,
    pub u: f64,
    pub abs_z: [f64; 16],
    pub conductor: f64,
    pub slice: GrowthSlice,
}

impl GrowthSample {
    pub fn max_component(&self) -> f64 {
        self.abs_z.iter().copied().fold(0.0, f64::max)
    }
}

/// Growth scan result: the samples plus the log-log fit of the maximal
/// component magnitude against the joint conductor.
#[derive(Debug, Clone)]
pub struct GrowthFit {
    pub fit: LineFit,
    pub samples: Vec<GrowthSample>,
}

/// Evaluates the critical vector along a slice and regresses the log of the
/// maximal component magnitude against the log of the joint conductor.
pub fn growth_scan(
    slice: GrowthSlice,
    grid: &[f64],
    engine: &CriticalEngine,
) -> Result<GrowthFit> {
    if grid.len() < 2 {
        return Err(MdsError::InvalidInput(format!(
            "growth scan needs at least two grid points, got {}",
            grid.len()
        )));
    }
    let mut samples = Vec::with_capacity(grid.len());
    for &x in grid {
        let (t, u) = slice.coordinates(x);
        let zv = engine.eval(t, u)?;
        let abs_z = zv.values.map(|v| v.norm());
        if abs_z.iter().any(|m| !m.is_finite()) {
            return Err(MdsError::InvalidInput(format!(
                "non-finite magnitude at (t, u) = ({t}, {u})"
            )));
        }
        samples.push(GrowthSample {
            t,
            u,
            abs_z,
            conductor: analytic_conductor(t, u),
            slice,
        });
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.conductor).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.max_component()).collect();
    let fit = fit_loglog(&xs, &ys)?;
    Ok(GrowthFit { fit, samples })
}

// ---------------------------------------------------------------------------
// Box mean squares of the critical vector
// ---------------------------------------------------------------------------

/// Per-component box mean square of the critical vector.
#[derive(Debug, Clone)]
pub struct MeanSquareReport {
    pub y1: f64,
    pub y2: f64,
    pub spacing: f64,
    /// `Int_{-Y1}^{Y1} Int_{-Y2}^{Y2} |Z_c(1/2+it, 1/2+iu)|^2 du dt` per
    /// component.
    pub integrals: [f64; 16],
    /// `integrals / (Y1 Y2)`.
    pub ratios: [f64; 16],
    /// Worst per-component bound on the effect of the certified node-sum
    /// tails on the integral.
    pub uncertainty: f64,
    /// Number of lattice points evaluated.
    pub evaluations: usize,
}

/// Hard cap on the mean-square box heights.
pub const MEAN_SQUARE_CAP: f64 = 32.0;

/// Shared per-`t` state of the lattice evaluator: the character lines, the
/// fixed reflection factor, and the node sums tabulated over the shared
/// lattice of shifted heights `v = u + y`.
struct LatticeContext {
    t: f64,
    delta: f64,
    contour: f64,
    m_max: i64,
    q_off: i64,
    entries: Vec<LatticeEntry>,
}

struct LatticeEntry {
    vals: [Complex64; 16],
    reflected: [Complex64; 16],
    tail: f64,
    m_norm: f64,
}

fn lattice_context(
    engine: &CriticalEngine,
    t: f64,
    k2: i64,
    m_max: i64,
    delta: f64,
) -> Result<LatticeContext> {
    let cache: Arc<LineCache> = engine.line_cache(t)?;
    let s = Complex64::new(0.5, t);
    let b_s: FEMatrix = matrix_b(s)?;
    let c = engine.contour();
    let decay = majorant_exponent(0.5) - (0.5 + c);
    let tail_per_zeta =
        cache.c_max * (engine.plan().d_max as f64).powf(decay + 1.0) / (-1.0 - decay);
    let q_off = k2 + m_max;
    let mut entries = Vec::with_capacity(2 * q_off as usize);
    for q in -q_off..q_off {
        let v = (q as f64 + 0.5) * delta;
        let (vals, z2_norm) = sum_from_lines(&cache, s, Complex64::new(0.5 + c, v))?;
        let conj_v = vals.map(|x| x.conj());
        let (reflected, m_norm) = reflect_left(&b_s, s, Complex64::new(0.5 - c, v), &conj_v)?;
        entries.push(LatticeEntry { vals, reflected, tail: tail_per_zeta * z2_norm, m_norm });
    }
    Ok(LatticeContext { t, delta, contour: c, m_max, q_off, entries })
}

/// One lattice point `(t, u = (j + 1/2) delta)`: trapezoid sum of the two
/// contour lines over the shared `v = u + y` nodes.  Returns the component
/// vector and the transported tail bound.
fn lattice_point(ctx: &LatticeContext, j: i64) -> Result<([Complex64; 16], f64)> {
    let u = (j as f64 + 0.5) * ctx.delta;
    let factors = NodeFactors::new(ctx.t, u);
    let wgt = ctx.delta / (2.0 * PI);
    let mut values = [Complex64::new(0.0, 0.0); 16];
    let mut err = 0.0f64;
    for m in -ctx.m_max..=ctx.m_max {
        let y = m as f64 * ctx.delta;
        let fac_r = factors.eval(Complex64::new(ctx.contour, y));
        let fac_l = factors.eval(Complex64::new(-ctx.contour, y));
        let entry = &ctx.entries[(j + m + ctx.q_off) as usize];
        for i in 0..16 {
            values[i] += wgt * (fac_r * entry.vals[i] - fac_l * entry.reflected[i]);
        }
        err += wgt * (fac_r.norm() + fac_l.norm() * entry.m_norm) * entry.tail;
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MdsError::PoleProximity {
            what: "mean-square lattice integrand".into(),
            arg: format!("(t, u) = ({}, {u})", ctx.t),
            dist: 0.0,
        });
    }
    Ok((values, err))
}

/// Box mean square of the critical vector over
/// `[-Y1, Y1] x [-Y2, Y2]`, per component, by midpoint lattices of the
/// given spacing in `t` and `u` and a matching trapezoid lattice along the
/// contour height, so every node sum on the shifted line `v = u + y` is
/// computed once per `t` and shared across all `u`.  Halving `spacing`
/// doubles the quadrature nodes in every direction.
pub fn mean_square(
    y1: f64,
    y2: f64,
    spacing: f64,
    engine: &CriticalEngine,
) -> Result<MeanSquareReport> {
    if !(y1 > 0.0 && y1 <= y2) {
        return Err(MdsError::InvalidInput(format!(
            "mean square needs 0 < Y1 <= Y2, got ({y1}, {y2})"
        )));
    }
    if y2 > MEAN_SQUARE_CAP {
        return Err(MdsError::RangeCap {
            what: "mean-square box height".into(),
            got: format!("{y2}"),
            cap: format!("Y2 <= {MEAN_SQUARE_CAP}"),
        });
    }
    if !(0.05..=1.0).contains(&spacing) {
        return Err(MdsError::InvalidInput(format!(
            "lattice spacing must lie in [0.05, 1], got {spacing}"
        )));
    }
    if y1 < spacing {
        return Err(MdsError::InvalidInput(format!(
            "box half-width {y1} is thinner than the lattice spacing {spacing}"
        )));
    }
    let k1 = (y1 / spacing).round().max(1.0) as i64;
    let k2 = (y2 / spacing).round().max(1.0) as i64;
    let m_max = (CONTOUR_HEIGHT / spacing).ceil() as i64;

    struct Partial {
        integrals: [f64; 16],
        unc: [f64; 16],
        evals: usize,
    }
    let cell = spacing * spacing;
    let partials: Vec<Result<Partial>> = parallel::map_ordered(2 * k1 as usize, |ki| {
        let t = ((ki as i64 - k1) as f64 + 0.5) * spacing;
        let ctx = lattice_context(engine, t, k2, m_max, spacing)?;
        let mut out = Partial { integrals: [0.0; 16], unc: [0.0; 16], evals: 0 };
        for j in -k2..k2 {
            let (values, err) = lattice_point(&ctx, j)?;
            for i in 0..16 {
                let a = values[i].norm();
                out.integrals[i] += cell * a * a;
                out.unc[i] += cell * (2.0 * a * err + err * err);
            }
            out.evals += 1;
        }
        Ok(out)
    });

    let mut integrals = [0.0f64; 16];
    let mut unc = [0.0f64; 16];
    let mut evaluations = 0usize;
    for partial in partials {
        let partial = partial?;
        for i in 0..16 {
            integrals[i] += partial.integrals[i];
            unc[i] += partial.unc[i];
        }
        evaluations += partial.evals;
    }
    let ratios = integrals.map(|v| v / (y1 * y2));
    let uncertainty = unc.iter().copied().fold(0.0, f64::max);
    Ok(MeanSquareReport { y1, y2, spacing, integrals, ratios, uncertainty, evaluations })
}
