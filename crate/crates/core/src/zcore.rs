//! The sixteen-component double series in its three convergent
//! representations, with certified truncation tails.
//!
//! For characters `psi, psi'` mod 8 the object of study is
//!
//! ```text
//! Z(s, w; psi, psi') = zeta2(2s+2w-1) * sum_{d odd} L2(s, chi_d psi) psi'(d) d^{-w},
//! ```
//!
//! where `chi_d(n) = (d|n)` and `L2` is the L-series with its Euler factor
//! at 2 removed.  Three series arrangements of the same function converge on
//! different regions:
//!
//! * **direct** — the defining `d`-sum, one L-value per odd `d`;
//! * **region1** — group `d = d0 e^2` by squarefree kernel and sum the
//!   square part in closed form:
//!   `zeta2(2s+2w-1) zeta2(2w) sum_{d0 squarefree odd} L2(s, chi_{d0} psi)
//!   psi'(d0) d0^{-w} / L2(s+2w, chi_{d0} psi)`;
//! * **swapped** — open each L-value and regroup over its inner variable:
//!   `zeta2(2s+2w-1) sum_{n odd} psi(n) n^{-s} L2(w, chi*_n psi')` with
//!   `chi*_n(d) = ((-1)^((n-1)/2) n | d)`, exchanging the roles of
//!   `(s, psi)` and `(w, psi')`.
//!
//! All sixteen `(psi, psi')` components are evaluated together from shared
//! L-value lines; [`z_vector`] picks the representation whose convergence
//! region contains the point.  Every evaluation reports a truncation-tail
//! bound computed from a monotone majorant of the summand: the measured
//! growth constant `C = max |L2| / d^m` over the computed range times the
//! integral bound for `sum_{d > d_max} d^(m - Re w)`.  The majorant exponent
//! `m` follows the convexity shape of L-value growth in the conductor; its
//! extrapolation beyond the computed range is an empirical-majorant
//! assumption, which is why the bound is reported per value rather than
//! promised globally.

use std::fmt;

use num_complex::Complex64;

use crate::characters::{
    char_value_sieve, decompose_table, mobius_table, pair_index, psi_value, CharIndex, ALL_CHARS,
};
use crate::error::{MdsError, Result};
use crate::lfunctions::{l2_line_set, zeta, LineSet};

/// Guard distance around the polar lines `s = 1`, `w = 1` (trivial-character
/// component) inside which the affected components are refused.
pub const POLAR_GUARD: f64 = 1e-3;

/// Safety margin added to the majorant exponent when deciding whether a
/// representation's tail is certifiable at a point.
const DOMAIN_MARGIN: f64 = 0.05;

/// Length of the Möbius series used for the closed-form square-part
/// denominators `1/L2(s+2w, .)` in the region1 arrangement.  Its tail
/// `sum_{n > N} n^(-Re(s+2w))` enters the reported error bound, so the
/// constant trades time against a subdominant error term.
const MU_TERMS: usize = 3000;

/// Slack for comparisons against domain boundaries, so points exactly on a
/// documented boundary are accepted.
const EDGE: f64 = 1e-9;

/// Which series arrangement produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Defining `d`-sum.
    Direct,
    /// Squarefree-kernel arrangement with closed-form square parts.
    Region1,
    /// Arrangement over the inner L-series variable.
    Swapped,
    /// Value transported from a convergent region by a functional-equation
    /// word.
    Continued,
    /// Value assembled by the shifted-contour engine on the critical lines.
    Critical,
}

impl Representation {
    /// Stable lowercase name used in reports and file formats.
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Direct => "direct",
            Representation::Region1 => "region1",
            Representation::Swapped => "swapped",
            Representation::Continued => "continued",
            Representation::Critical => "critical",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Truncation request for the series evaluators.
///
/// `tail_bound` is the acceptance ceiling for the *certified* tail of the
/// truncated sums: evaluators always compute an honest bound from the
/// measured majorant of their summand (reported in [`ZVector::err`]) and,
/// when `tail_bound > 0`, refuse with
/// [`MdsError::InsufficientConvergence`] if the bound exceeds it.
/// `tail_bound = 0` means report-only: never refuse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan {
    /// Last outer summation index (`d`-sum, or squarefree kernels in
    /// region1).
    pub d_max: u64,
    /// Last inner summation index (the `n`-sum of the swapped arrangement).
    pub n_max: u64,
    /// Requested ceiling for the certified tail; `0` = report-only.
    pub tail_bound: f64,
}

impl Default for TruncationPlan {
    fn default() -> Self {
        TruncationPlan { d_max: 20_000, n_max: 20_000, tail_bound: 0.0 }
    }
}

/// All sixteen components of the double series at one point.
#[derive(Debug, Clone)]
pub struct ZVector {
    pub s: Complex64,
    pub w: Complex64,
    /// Component values ordered by `pair_index(psi, psi')`.
    pub values: [Complex64; 16],
    /// Arrangement that produced the values.
    pub rep: Representation,
    /// Certified truncation-tail bound (see [`TruncationPlan`]); may be
    /// `inf` where the majorant does not close, never negative or NaN.
    pub err: f64,
}

impl ZVector {
    /// The `(psi, psi')` component.
    pub fn component(&self, psi: CharIndex, psi_pr: CharIndex) -> Complex64 {
        self.values[pair_index(psi, psi_pr)]
    }
}

/// `zeta2(z) = (1 - 2^(-z)) zeta(z)`: the Riemann zeta function with its
/// Euler factor at 2 removed.  Keeps the pole at `z = 1` (the removed factor
/// is nonzero there).
pub fn zeta2(z: Complex64) -> Result<Complex64> {
    let dist = (z - Complex64::new(1.0, 0.0)).norm();
    if dist < 1e-9 {
        return Err(MdsError::PoleProximity {
            what: "zeta2".into(),
            arg: z.to_string(),
            dist,
        });
    }
    Ok((1.0 - (-z * std::f64::consts::LN_2).exp()) * zeta(z)?)
}

/// Majorant exponent `m(sigma)` for `|L2(sigma + it, chi_d psi)| <= C d^m`,
/// following the convexity shape of conductor growth: flat right of the
/// critical strip, linear interpolation through `m(1/2) = 0.3` inside it,
/// and the reflected slope left of it.  Includes a 0.05 safety margin.
pub fn majorant_exponent(sigma: f64) -> f64 {
    if sigma >= 1.0 {
        0.05
    } else if sigma >= 0.0 {
        0.5 * (1.0 - sigma) + 0.05
    } else {
        0.5 - sigma + 0.05
    }
}

/// `sum_{k > cut} k^exponent <= cut^(exponent+1) / (-1 - exponent)`, the
/// integral bound for a decreasing power tail; `inf` when the tail does not
/// converge absolutely under the majorant.
fn power_tail(prefactor: f64, cut: u64, exponent: f64) -> f64 {
    if exponent >= -1.0 {
        f64::INFINITY
    } else {
        prefactor * (cut as f64).powf(exponent + 1.0) / (-1.0 - exponent)
    }
}

fn polar_distance(x: Complex64) -> f64 {
    (x - Complex64::new(1.0, 0.0)).norm()
}

fn polar_error(line: &str, dist: f64) -> MdsError {
    MdsError::PolarLine { line: line.into(), dist, guard: POLAR_GUARD }
}

fn check_plan(plan: &TruncationPlan) -> Result<()> {
    if plan.d_max < 1 || plan.n_max < 1 {
        return Err(MdsError::InvalidInput(format!(
            "truncation plan needs d_max, n_max >= 1, got ({}, {})",
            plan.d_max, plan.n_max
        )));
    }
    if !(plan.tail_bound >= 0.0) {
        return Err(MdsError::InvalidInput(format!(
            "truncation plan needs tail_bound >= 0, got {}",
            plan.tail_bound
        )));
    }
    Ok(())
}

fn enforce_tolerance(v: &ZVector, plan: &TruncationPlan) -> Result<()> {
    if plan.tail_bound > 0.0 && !(v.err <= plan.tail_bound) {
        return Err(MdsError::InsufficientConvergence { tail: v.err, tol: plan.tail_bound });
    }
    Ok(())
}

/// Whether `x` is inside the supported line-fill window of the L-value
/// engine.
fn line_range_ok(x: Complex64) -> bool {
    (-2.0..=6.0).contains(&x.re) && x.im.abs() <= 1.0e4
}

fn check_direct_domain(s: Complex64, w: Complex64) -> Result<()> {
    if s.re < 0.5 - EDGE {
        return Err(MdsError::InvalidInput(format!(
            "direct arrangement needs Re s >= 1/2, got Re s = {}",
            s.re
        )));
    }
    let need = 1.0 + majorant_exponent(s.re) + DOMAIN_MARGIN;
    if w.re < need - EDGE {
        return Err(MdsError::InvalidInput(format!(
            "direct arrangement needs Re w >= {need:.3} at Re s = {}, got Re w = {}",
            s.re, w.re
        )));
    }
    Ok(())
}

fn check_region1_domain(s: Complex64, w: Complex64) -> Result<()> {
    if w.re < 1.1 - EDGE || s.re + w.re < 1.6 - EDGE {
        return Err(MdsError::InvalidInput(format!(
            "region1 arrangement needs Re w >= 1.1 and Re(s+w) >= 1.6, got ({}, {})",
            s.re, w.re
        )));
    }
    Ok(())
}

fn check_swapped_domain(s: Complex64, w: Complex64) -> Result<()> {
    if w.re < 0.5 - EDGE {
        return Err(MdsError::InvalidInput(format!(
            "swapped arrangement needs Re w >= 1/2, got Re w = {}",
            w.re
        )));
    }
    let need = 1.0 + majorant_exponent(w.re) + DOMAIN_MARGIN;
    if s.re < need - EDGE {
        return Err(MdsError::InvalidInput(format!(
            "swapped arrangement needs Re s >= {need:.3} at Re w = {}, got Re s = {}",
            w.re, s.re
        )));
    }
    Ok(())
}

/// Representation [`z_vector`] would dispatch to at `(s, w)`, if any.
/// Depends only on the real parts (plus the imaginary range cap of the
/// L-value engine), so continuation words built on top of it are functions
/// of `(Re s, Re w)` alone.
pub fn representation_for(s: Complex64, w: Complex64) -> Option<Representation> {
    let tail_ok = |outer: Complex64, other: Complex64| {
        other.re >= 1.0 + majorant_exponent(outer.re) + DOMAIN_MARGIN - EDGE
    };
    if s.re >= 1.05 - EDGE && line_range_ok(s) && tail_ok(s, w) {
        Some(Representation::Direct)
    } else if s.re >= 0.5 - EDGE
        && w.re >= 1.1 - EDGE
        && s.re + w.re >= 1.6 - EDGE
        && line_range_ok(s)
        && tail_ok(s, w)
    {
        // Left of the critical line the tail certificate would lean on an
        // extrapolated line majorant, so automatic dispatch declines there and
        // continuation words reflect into `Re s >= 1/2` instead.  The scalar
        // operation itself still accepts the wider domain with an honest
        // reported bound.
        Some(Representation::Region1)
    } else if w.re >= 0.5 - EDGE && line_range_ok(w) && tail_ok(w, s) {
        Some(Representation::Swapped)
    } else {
        None
    }
}

struct Core {
    values: [Complex64; 16],
    err: f64,
    /// Distance to the blocking polar line when the trivial-character
    /// components were suppressed.
    blocked: Option<f64>,
}

impl Core {
    fn into_vector(self, s: Complex64, w: Complex64, rep: Representation) -> ZVector {
        debug_assert!(self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        debug_assert!(self.err >= 0.0);
        ZVector { s, w, values: self.values, rep, err: self.err }
    }
}

/// Shared skeleton of the direct arrangement: accumulate the four character
/// lines at `s` against `d^{-w}` weights, bucketed by `d mod 8`, so the
/// sixteen components cost one pass.  When `s` sits within the polar guard
/// of the trivial-character line, that line is skipped entirely (its huge or
/// poisoned square-`d` entries feed only the suppressed components).
fn direct_core(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<Core> {
    let set: LineSet = l2_line_set(s, plan.d_max, true)?;
    let z2 = zeta2(2.0 * (s + w) - Complex64::new(1.0, 0.0))?;
    let dist = polar_distance(s);
    let blocked = (dist < POLAR_GUARD).then_some(dist);
    debug_assert!(!set.trivial_poisoned || blocked.is_some());
    let m = majorant_exponent(s.re);
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [[zero; 8]; 4];
    let mut c_obs = [0.0f64; 4];
    for d in (1..=plan.d_max as usize).step_by(2) {
        let ln_d = (d as f64).ln();
        let dw = (-w * ln_d).exp();
        let dm = (m * ln_d).exp();
        let r = d & 7;
        for psi in ALL_CHARS {
            if blocked.is_some() && psi == CharIndex::Psi1 {
                continue;
            }
            let v = set.lines[psi.ord()][d];
            acc[psi.ord()][r] += v * dw;
            let ratio = v.norm() / dm;
            if ratio > c_obs[psi.ord()] {
                c_obs[psi.ord()] = ratio;
            }
        }
    }
    let mut values = [zero; 16];
    for psi in ALL_CHARS {
        for psi_pr in ALL_CHARS {
            if blocked.is_some() && psi == CharIndex::Psi1 {
                continue;
            }
            let mut sum = zero;
            for r in [1usize, 3, 5, 7] {
                sum += psi_value(psi_pr, r as i64) as f64 * acc[psi.ord()][r];
            }
            values[pair_index(psi, psi_pr)] = z2 * sum;
        }
    }
    let c_max = c_obs.iter().fold(0.0f64, |a, &b| a.max(b));
    let err = power_tail(z2.norm() * c_max, plan.d_max, m - w.re);
    Ok(Core { values, err, blocked })
}

/// Squarefree-kernel arrangement: numerator lines at `s`, square parts in
/// closed form as `zeta2(2w) / L2(s+2w, .)` with the reciprocal evaluated by
/// a Möbius-weighted character sum (one Jacobi-symbol sieve per kernel
/// serves all four characters).  The reported bound adds the Möbius-series
/// tail, weighted by the accumulated numerator mass, to the kernel-sum tail,
/// whose majorant carries the odd-Euler-product bound for the reciprocal
/// denominators.
fn region1_core(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<Core> {
    let set: LineSet = l2_line_set(s, plan.d_max, true)?;
    let z2a = zeta2(2.0 * (s + w) - Complex64::new(1.0, 0.0))?;
    let z2b = zeta2(2.0 * w)?;
    let dist = polar_distance(s);
    let blocked = (dist < POLAR_GUARD).then_some(dist);
    debug_assert!(!set.trivial_poisoned || blocked.is_some());
    let m = majorant_exponent(s.re);
    let table = decompose_table(plan.d_max as usize);
    let mu = mobius_table(MU_TERMS);
    let zr = s + 2.0 * w;
    let mut pw = vec![Complex64::new(0.0, 0.0); MU_TERMS + 1];
    for (n, slot) in pw.iter_mut().enumerate().skip(1).step_by(2) {
        *slot = (-zr * (n as f64).ln()).exp();
    }
    let mut psi_sign = [[1i8; 8]; 4];
    for psi in ALL_CHARS {
        for r in [1usize, 3, 5, 7] {
            psi_sign[psi.ord()][r] = psi_value(psi, r as i64);
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut acc = [[zero; 8]; 4];
    let mut c_obs = [0.0f64; 4];
    let mut abs_sum = [0.0f64; 4];
    for d0 in (1..=plan.d_max as usize).step_by(2) {
        if table[d0].1 != 1 {
            continue; // not squarefree
        }
        let ln_d = (d0 as f64).ln();
        let dw = (-w * ln_d).exp();
        let dw_abs = (-w.re * ln_d).exp();
        let dm = (m * ln_d).exp();
        let jac = char_value_sieve(d0 as i64, MU_TERMS);
        // reciprocal denominators 1/L2(s+2w, chi_{d0} psi) for all four psi
        let mut inv = [zero; 4];
        for n in (1..=MU_TERMS).step_by(2) {
            let x = mu[n] * jac[n];
            if x == 0 {
                continue;
            }
            let base = pw[n] * x as f64;
            for psi in ALL_CHARS {
                if psi_sign[psi.ord()][n & 7] > 0 {
                    inv[psi.ord()] += base;
                } else {
                    inv[psi.ord()] -= base;
                }
            }
        }
        let r = d0 & 7;
        for psi in ALL_CHARS {
            if blocked.is_some() && psi == CharIndex::Psi1 {
                continue;
            }
            let v = set.lines[psi.ord()][d0];
            acc[psi.ord()][r] += v * inv[psi.ord()] * dw;
            abs_sum[psi.ord()] += v.norm() * dw_abs;
            let ratio = v.norm() / dm;
            if ratio > c_obs[psi.ord()] {
                c_obs[psi.ord()] = ratio;
            }
        }
    }
    let pref = z2a * z2b;
    let mut values = [zero; 16];
    for psi in ALL_CHARS {
        for psi_pr in ALL_CHARS {
            if blocked.is_some() && psi == CharIndex::Psi1 {
                continue;
            }
            let mut sum = zero;
            for r in [1usize, 3, 5, 7] {
                sum += psi_value(psi_pr, r as i64) as f64 * acc[psi.ord()][r];
            }
            values[pair_index(psi, psi_pr)] = pref * sum;
        }
    }
    // odd-Euler-product bound for the reciprocal denominators in the tail
    let b_inv = (zeta2(Complex64::new(zr.re, 0.0))? / zeta2(Complex64::new(2.0 * zr.re, 0.0))?)
        .re;
    let eps_mu = power_tail(1.0, MU_TERMS as u64, -zr.re);
    let d_tail = power_tail(1.0, plan.d_max, m - w.re);
    let err = (0..4)
        .map(|l| pref.norm() * (b_inv * c_obs[l] * d_tail + eps_mu * abs_sum[l]))
        .fold(0.0f64, f64::max);
    Ok(Core { values, err, blocked })
}

/// Arrangement over the inner variable: lines at `w`, summed against
/// `psi(n) n^{-s}`.  The twist attached to `n` resolves to the line of
/// `psi'` when `n = 1 mod 4` and of `psi_{-1} psi'` when `n = 3 mod 4`
/// (fundamental-discriminant bookkeeping of `(+-n | .)`), so the sixteen
/// components again cost one bucketed pass.  Near `w = 1` the
/// trivial-character entries (perfect-square `n` on the `psi_1` line) are
/// skipped and the `psi' = psi_1` components suppressed; the rest of that
/// line still feeds valid components and stays.
fn swapped_core(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<Core> {
    let set: LineSet = l2_line_set(w, plan.n_max, true)?;
    let z2 = zeta2(2.0 * (s + w) - Complex64::new(1.0, 0.0))?;
    let dist = polar_distance(w);
    let blocked = (dist < POLAR_GUARD).then_some(dist);
    debug_assert!(!set.trivial_poisoned || blocked.is_some());
    let m = majorant_exponent(w.re);
    let table = decompose_table(plan.n_max as usize);
    let zero = Complex64::new(0.0, 0.0);
    // acc[psi'.ord()][n mod 8]
    let mut acc = [[zero; 8]; 4];
    let mut c_obs = [0.0f64; 4];
    for n in (1..=plan.n_max as usize).step_by(2) {
        let ln_n = (n as f64).ln();
        let ns = (-s * ln_n).exp();
        let nm = (m * ln_n).exp();
        let r = n & 7;
        let flip = n & 3 == 3;
        let square_kernel = table[n].0 == 1;
        for psi_pr in ALL_CHARS {
            let line = if flip { CharIndex::PsiM1 * psi_pr } else { psi_pr };
            if blocked.is_some() && line == CharIndex::Psi1 && square_kernel {
                continue;
            }
            let v = set.lines[line.ord()][n];
            acc[psi_pr.ord()][r] += ns * v;
            let ratio = v.norm() / nm;
            if ratio > c_obs[line.ord()] {
                c_obs[line.ord()] = ratio;
            }
        }
    }
    let mut values = [zero; 16];
    for psi in ALL_CHARS {
        for psi_pr in ALL_CHARS {
            if blocked.is_some() && psi_pr == CharIndex::Psi1 {
                continue;
            }
            let mut sum = zero;
            for r in [1usize, 3, 5, 7] {
                sum += psi_value(psi, r as i64) as f64 * acc[psi_pr.ord()][r];
            }
            values[pair_index(psi, psi_pr)] = z2 * sum;
        }
    }
    let c_max = c_obs.iter().fold(0.0f64, |a, &b| a.max(b));
    let err = power_tail(z2.norm() * c_max, plan.n_max, m - s.re);
    Ok(Core { values, err, blocked })
}

/// All sixteen components by the direct arrangement.  Errors on the polar
/// line `s = 1` (any trivial-character component is affected).
pub fn z_direct_vector(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<ZVector> {
    check_plan(plan)?;
    check_direct_domain(s, w)?;
    let core = direct_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        return Err(polar_error("s = 1", dist));
    }
    let v = core.into_vector(s, w, Representation::Direct);
    enforce_tolerance(&v, plan)?;
    Ok(v)
}

/// One component by the direct arrangement.  On the polar line `s = 1` only
/// the `psi = psi_1` components are refused.
pub fn z_direct(
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
    plan: &TruncationPlan,
) -> Result<Complex64> {
    check_plan(plan)?;
    check_direct_domain(s, w)?;
    let core = direct_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        if psi == CharIndex::Psi1 {
            return Err(polar_error("s = 1", dist));
        }
    }
    let v = core.into_vector(s, w, Representation::Direct);
    enforce_tolerance(&v, plan)?;
    Ok(v.component(psi, psi_pr))
}

/// All sixteen components by the squarefree-kernel arrangement.
pub fn z_region1_vector(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<ZVector> {
    check_plan(plan)?;
    check_region1_domain(s, w)?;
    let core = region1_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        return Err(polar_error("s = 1", dist));
    }
    let v = core.into_vector(s, w, Representation::Region1);
    enforce_tolerance(&v, plan)?;
    Ok(v)
}

/// One component by the squarefree-kernel arrangement.  On the polar line
/// `s = 1` only the `psi = psi_1` components are refused: for non-trivial
/// `psi` the arrangement stays finite there.
pub fn z_region1(
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
    plan: &TruncationPlan,
) -> Result<Complex64> {
    check_plan(plan)?;
    check_region1_domain(s, w)?;
    let core = region1_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        if psi == CharIndex::Psi1 {
            return Err(polar_error("s = 1", dist));
        }
    }
    let v = core.into_vector(s, w, Representation::Region1);
    enforce_tolerance(&v, plan)?;
    Ok(v.component(psi, psi_pr))
}

/// All sixteen components by the swapped arrangement.  Errors on the polar
/// line `w = 1` (the `psi' = psi_1` components are affected).
pub fn z_swapped_vector(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<ZVector> {
    check_plan(plan)?;
    check_swapped_domain(s, w)?;
    let core = swapped_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        return Err(polar_error("w = 1", dist));
    }
    let v = core.into_vector(s, w, Representation::Swapped);
    enforce_tolerance(&v, plan)?;
    Ok(v)
}

/// One component by the swapped arrangement.  On the polar line `w = 1`
/// only the `psi' = psi_1` components are refused.
pub fn z_swapped(
    s: Complex64,
    w: Complex64,
    psi: CharIndex,
    psi_pr: CharIndex,
    plan: &TruncationPlan,
) -> Result<Complex64> {
    check_plan(plan)?;
    check_swapped_domain(s, w)?;
    let core = swapped_core(s, w, plan)?;
    if let Some(dist) = core.blocked {
        if psi_pr == CharIndex::Psi1 {
            return Err(polar_error("w = 1", dist));
        }
    }
    let v = core.into_vector(s, w, Representation::Swapped);
    enforce_tolerance(&v, plan)?;
    Ok(v.component(psi, psi_pr))
}

/// All sixteen components, dispatching to the representation whose
/// convergence region contains `(s, w)` (see [`representation_for`]).
pub fn z_vector(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<ZVector> {
    match representation_for(s, w) {
        Some(Representation::Direct) => z_direct_vector(s, w, plan),
        Some(Representation::Region1) => z_region1_vector(s, w, plan),
        Some(Representation::Swapped) => z_swapped_vector(s, w, plan),
        _ => Err(MdsError::NoRepresentation { s: s.to_string(), w: w.to_string() }),
    }
}
