//! Symmetry matrices of the sixteen-component vector and continuation along
//! them.
//!
//! The family satisfies two exact linear relations: an argument swap
//! `(s, w) -> (w, s)` realized by a constant rational matrix, and a reflection
//! `(s, w) -> (1 - s, s + w - 1/2)` realized by a block-diagonal matrix of
//! gamma quotients and dyadic exponentials.  The two point maps generate a
//! dihedral group of order twelve; composing three reflections and three swaps
//! yields the full reflection `(s, w) -> (1 - s, 1 - w)`.  This module builds
//! the matrices, exposes the group as exact affine maps, and continues the
//! vector to any non-polar point by transporting a convergent evaluation along
//! a group word.

use std::collections::VecDeque;
use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{MdsError, Result};
use crate::kernels::{gamma_pole_distance, log_gamma};
use crate::zcore::{
    representation_for, z_vector, Representation, TruncationPlan, ZVector, POLAR_GUARD,
};

/// Guard distance for matrix poles: the dyadic denominator `4^s - 4` and the
/// numerator gamma factors must stay at least this far from their zeros and
/// poles.
pub const MATRIX_POLE_GUARD: f64 = 1e-6;

/// Two orbit points closer than this make the orbit degenerate.
pub const ORBIT_GUARD: f64 = 1e-6;

/// Sign pattern of the swap matrix; the actual entries are half these values.
/// Each row expresses one component at `(s, w)` as a combination of four
/// components at `(w, s)`: the quadratic-character blocks (rows 0-7) close
/// among themselves, as do the blocks twisted by the even character (rows
/// 8-15).
const SWAP_PATTERN: [[i8; 16]; 16] = [
    [1, 1, 0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, -1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, -1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 1, 1, 0, 0],
    [1, 1, 0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, -1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 1, 1, 0, 0],
    [0, 0, 1, 1, 0, 0, 1, -1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, -1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, -1],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 1, 1],
    [0, 0, 1, 1, 0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, -1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, -1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 1, 1],
];

/// Which relation a matrix realizes, together with the parameters it was
/// built at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FEKind {
    /// Argument swap `(s, w) -> (w, s)`; constant matrix.
    Swap,
    /// Reflection `(s, w) -> (1 - s, s + w - 1/2)` built at `s`.
    Reflection { s: Complex64 },
    /// Full reflection `(s, w) -> (1 - s, 1 - w)` built at `(s, w)`.
    Composed { s: Complex64, w: Complex64 },
}

/// A dense 16x16 transport matrix for the component vector.
#[derive(Debug, Clone)]
pub struct FEMatrix {
    pub kind: FEKind,
    pub entries: [[Complex64; 16]; 16],
}

type Entries = [[Complex64; 16]; 16];

fn mat_zero() -> Entries {
    [[Complex64::new(0.0, 0.0); 16]; 16]
}

fn mat_identity() -> Entries {
    let mut m = mat_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn mat_mul(a: &Entries, b: &Entries) -> Entries {
    let mut out = mat_zero();
    for i in 0..16 {
        for k in 0..16 {
            let aik = a[i][k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            for j in 0..16 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_apply(m: &Entries, v: &[Complex64; 16]) -> [Complex64; 16] {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for i in 0..16 {
        for j in 0..16 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

fn mat_inf_norm(m: &Entries) -> f64 {
    m.iter()
        .map(|row| row.iter().map(|e| e.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl FEMatrix {
    pub fn apply(&self, v: &[Complex64; 16]) -> [Complex64; 16] {
        mat_apply(&self.entries, v)
    }

    /// Induced max-row-sum norm; transports additive error bounds.
    pub fn inf_norm(&self) -> f64 {
        mat_inf_norm(&self.entries)
    }

    /// Largest entry-wise deviation from another entry table.
    pub fn max_deviation(&self, other: &Entries) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..16 {
            for j in 0..16 {
                worst = worst.max((self.entries[i][j] - other[i][j]).norm());
            }
        }
        worst
    }
}

/// The constant swap matrix: entries in `{0, +1/2, -1/2}`, four per row, and
/// an exact involution.
pub fn matrix_a() -> FEMatrix {
    let mut entries = mat_zero();
    for i in 0..16 {
        for j in 0..16 {
            entries[i][j] = Complex64::new(0.5 * SWAP_PATTERN[i][j] as f64, 0.0);
        }
    }
    FEMatrix { kind: FEKind::Swap, entries }
}

/// `Gamma((1 - s + kappa)/2) / Gamma((s + kappa)/2)` with the numerator pole
/// guarded and denominator poles mapped to the exact zeros of the reciprocal.
fn reflection_gamma_quotient(s: Complex64, kappa: u32) -> Result<Complex64> {
    let k = kappa as f64;
    let num = 0.5 * (1.0 + k - s);
    let den = 0.5 * (s + k);
    let num_dist = gamma_pole_distance(num);
    if num_dist <= MATRIX_POLE_GUARD {
        return Err(MdsError::PoleProximity {
            what: format!("Gamma(({}-s)/2)", 1 + kappa),
            arg: format!("s = {s}"),
            dist: num_dist,
        });
    }
    if gamma_pole_distance(den) <= 1e-12 {
        // The reciprocal gamma has an exact zero here (e.g. the whole
        // even-parity pair of blocks vanishes at s = 0).
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok((log_gamma(num) - log_gamma(den)).exp())
}

/// The reflection matrix at `s`: block-diagonal over the four outer
/// characters.  The two blocks attached to quadratic inner twists mix the
/// four inner characters through dyadic exponentials; the two blocks attached
/// to even inner twists are scalar.
pub fn matrix_b(s: Complex64) -> Result<FEMatrix> {
    let four_s = (s * (2.0 * LN_2)).exp();
    let denom = four_s - 4.0;
    if denom.norm() <= MATRIX_POLE_GUARD {
        return Err(MdsError::PoleProximity {
            what: "4^s - 4".into(),
            arg: format!("s = {s}"),
            dist: denom.norm(),
        });
    }
    let q_even = reflection_gamma_quotient(s, 0)?;
    let q_odd = reflection_gamma_quotient(s, 1)?;
    let pi_pow = ((s - 0.5) * PI.ln()).exp();
    let pi8_pow = ((s - 0.5) * (PI / 8.0).ln()).exp();
    let prefactor = [
        pi_pow * q_even / denom,
        pi_pow * q_odd / denom,
        pi8_pow * q_even,
        pi8_pow * q_odd,
    ];

    let two_s = (s * LN_2).exp();
    let two_1ms = ((1.0 - s) * LN_2).exp();
    let four_1ms = ((1.0 - s) * (2.0 * LN_2)).exp();
    let g = two_1ms - two_s;
    let d = -four_1ms;
    let c_even = four_1ms - 2.0;
    let c_odd = 2.0 - four_1ms;

    let block_even = [
        [d, c_even, g, g],
        [c_even, d, g, g],
        [g, g, d, c_even],
        [g, g, c_even, d],
    ];
    let block_odd = [
        [d, c_odd, g, -g],
        [c_odd, d, -g, g],
        [g, -g, d, c_odd],
        [-g, g, c_odd, d],
    ];

    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = mat_zero();
    for (k, pref) in prefactor.iter().enumerate() {
        for i in 0..4 {
            for j in 0..4 {
                let raw = match k {
                    0 => block_even[i][j],
                    1 => block_odd[i][j],
                    _ => {
                        if i == j {
                            one
                        } else {
                            zero
                        }
                    }
                };
                entries[4 * k + i][4 * k + j] = pref * raw;
            }
        }
    }
    Ok(FEMatrix { kind: FEKind::Reflection { s }, entries })
}

/// Transport matrix of the full reflection `(s, w) -> (1 - s, 1 - w)`,
/// composed from three reflection factors interleaved with swaps.
pub fn matrix_m(s: Complex64, w: Complex64) -> Result<FEMatrix> {
    let a = matrix_a();
    let b_s = matrix_b(s)?;
    let b_mid = matrix_b(s + w - 0.5)?;
    let b_w = matrix_b(w)?;
    let mut m = mat_mul(&b_s.entries, &a.entries);
    m = mat_mul(&m, &b_mid.entries);
    m = mat_mul(&m, &a.entries);
    m = mat_mul(&m, &b_w.entries);
    m = mat_mul(&m, &a.entries);
    Ok(FEMatrix { kind: FEKind::Composed { s, w }, entries: m })
}

/// One generating symmetry of the point group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    /// `(s, w) -> (w, s)`
    Swap,
    /// `(s, w) -> (1 - s, s + w - 1/2)`
    Reflect,
}

impl Generator {
    /// Single-letter rendering used in words: `a` for the swap, `b` for the
    /// reflection.
    pub fn letter(self) -> char {
        match self {
            Generator::Swap => 'a',
            Generator::Reflect => 'b',
        }
    }
}

/// Render a word; the empty word prints as `e`.
pub fn word_string(word: &[Generator]) -> String {
    if word.is_empty() {
        "e".to_string()
    } else {
        word.iter().map(|g| g.letter()).collect()
    }
}

fn apply_generator(g: Generator, s: Complex64, w: Complex64) -> (Complex64, Complex64) {
    match g {
        Generator::Swap => (w, s),
        Generator::Reflect => (1.0 - s, s + w - 0.5),
    }
}

/// An exact affine self-map of the parameter plane: integer linear part and a
/// translation in half-integer steps, so that group relations hold exactly on
/// the coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    /// Row-major 2x2 integer linear part.
    pub linear: [[i64; 2]; 2],
    /// Translation numerators over the fixed denominator 2.
    pub shift_half: [i64; 2],
    /// Generator word realizing the map; the first letter acts first.
    pub word: Vec<Generator>,
}

impl PointMap {
    pub fn identity() -> Self {
        PointMap { linear: [[1, 0], [0, 1]], shift_half: [0, 0], word: Vec::new() }
    }

    fn generator_parts(g: Generator) -> ([[i64; 2]; 2], [i64; 2]) {
        match g {
            Generator::Swap => ([[0, 1], [1, 0]], [0, 0]),
            Generator::Reflect => ([[-1, 0], [1, 1]], [2, -1]),
        }
    }

    /// The map that applies `self` first and then `g`.
    pub fn then(&self, g: Generator) -> PointMap {
        let (gl, gs) = Self::generator_parts(g);
        let mut linear = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                linear[i][j] = gl[i][0] * self.linear[0][j] + gl[i][1] * self.linear[1][j];
            }
        }
        let mut shift_half = [0i64; 2];
        for (i, slot) in shift_half.iter_mut().enumerate() {
            *slot = gl[i][0] * self.shift_half[0] + gl[i][1] * self.shift_half[1] + gs[i];
        }
        let mut word = self.word.clone();
        word.push(g);
        PointMap { linear, shift_half, word }
    }

    pub fn apply(&self, s: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let l = &self.linear;
        (
            l[0][0] as f64 * s + l[0][1] as f64 * w + 0.5 * self.shift_half[0] as f64,
            l[1][0] as f64 * s + l[1][1] as f64 * w + 0.5 * self.shift_half[1] as f64,
        )
    }

    /// Coefficients only, independent of the word that produced the map.
    pub fn coefficients(&self) -> ([[i64; 2]; 2], [i64; 2]) {
        (self.linear, self.shift_half)
    }
}

/// All twelve maps of the point group, breadth-first: shortest words first,
/// the swap generator preferred on ties.
fn enumerate_maps() -> Vec<PointMap> {
    let identity = PointMap::identity();
    let mut seen = vec![identity.coefficients()];
    let mut out = vec![identity.clone()];
    let mut queue = VecDeque::from([identity]);
    while let Some(m) = queue.pop_front() {
        for g in [Generator::Swap, Generator::Reflect] {
            let n = m.then(g);
            if !seen.contains(&n.coefficients()) {
                seen.push(n.coefficients());
                out.push(n.clone());
                queue.push_back(n);
            }
        }
    }
    out
}

fn point_distance(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> f64 {
    ((a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()).sqrt()
}

/// Orbit of `(s, w)` under the point group: exactly twelve `(map, image)`
/// pairs in breadth-first word order.  Fails with `DegenerateOrbit` when two
/// distinct maps send the point to images closer than [`ORBIT_GUARD`].
pub fn group_orbit(
    s: Complex64,
    w: Complex64,
) -> Result<Vec<(PointMap, (Complex64, Complex64))>> {
    let orbit: Vec<(PointMap, (Complex64, Complex64))> = enumerate_maps()
        .into_iter()
        .map(|m| {
            let p = m.apply(s, w);
            (m, p)
        })
        .collect();
    debug_assert_eq!(orbit.len(), 12);
    for i in 0..orbit.len() {
        for j in i + 1..orbit.len() {
            let dist = point_distance(orbit[i].1, orbit[j].1);
            if dist < ORBIT_GUARD {
                return Err(MdsError::DegenerateOrbit {
                    a: format!(
                        "{} -> ({}, {})",
                        word_string(&orbit[i].0.word),
                        orbit[i].1 .0,
                        orbit[i].1 .1
                    ),
                    b: format!(
                        "{} -> ({}, {})",
                        word_string(&orbit[j].0.word),
                        orbit[j].1 .0,
                        orbit[j].1 .1
                    ),
                    dist,
                });
            }
        }
    }
    Ok(orbit)
}

fn check_polar_lines(s: Complex64, w: Complex64) -> Result<()> {
    let checks = [
        ((s - 1.0).norm(), "s = 1"),
        ((w - 1.0).norm(), "w = 1"),
        ((s + w - 1.5).norm() / SQRT_2, "s + w = 3/2"),
    ];
    for (dist, line) in checks {
        if dist < POLAR_GUARD {
            return Err(MdsError::PolarLine { line: line.into(), dist, guard: POLAR_GUARD });
        }
    }
    Ok(())
}

/// A continued evaluation: the value at the requested point, together with
/// the group word used, the convergent point it was transported from, and the
/// representation that evaluated there.
#[derive(Debug, Clone)]
pub struct Continuation {
    pub value: ZVector,
    pub word: Vec<Generator>,
    pub target: (Complex64, Complex64),
    pub target_rep: Representation,
}

fn transport(
    s: Complex64,
    w: Complex64,
    map: &PointMap,
    plan: &TruncationPlan,
) -> Result<Continuation> {
    let mut total = mat_identity();
    let (mut cs, mut cw) = (s, w);
    for &g in &map.word {
        let factor = match g {
            Generator::Swap => matrix_a().entries,
            Generator::Reflect => matrix_b(cs)?.entries,
        };
        total = mat_mul(&total, &factor);
        let next = apply_generator(g, cs, cw);
        cs = next.0;
        cw = next.1;
    }
    let base = z_vector(cs, cw, plan)?;
    let values = mat_apply(&total, &base.values);
    let err = mat_inf_norm(&total) * base.err;
    Ok(Continuation {
        value: ZVector { s, w, values, rep: Representation::Continued, err },
        word: map.word.clone(),
        target: (cs, cw),
        target_rep: base.rep,
    })
}

/// Evaluate the component vector at a point where no series representation
/// converges, by searching the group orbit breadth-first for a convergent
/// image and transporting it back through the corresponding matrix product.
///
/// The word found depends only on `(Re s, Re w)`: the breadth-first order is
/// fixed and the dispatcher it queries looks at real parts alone.
pub fn continue_z(s: Complex64, w: Complex64, plan: &TruncationPlan) -> Result<Continuation> {
    check_polar_lines(s, w)?;
    let identity = PointMap::identity();
    let mut seen = vec![identity.coefficients()];
    let mut queue = VecDeque::from([identity]);
    let mut last_err: Option<MdsError> = None;
    while let Some(m) = queue.pop_front() {
        let (ts, tw) = m.apply(s, w);
        if representation_for(ts, tw).is_some() {
            match transport(s, w, &m, plan) {
                Ok(c) => return Ok(c),
                // A transport factor or the base evaluation can still fail
                // (e.g. a reflection factor lands on a matrix pole); keep
                // searching longer words and surface the failure only if the
                // whole orbit is exhausted.
                Err(e) => last_err = Some(e),
            }
        }
        for g in [Generator::Swap, Generator::Reflect] {
            let n = m.then(g);
            if !seen.contains(&n.coefficients()) {
                seen.push(n.coefficients());
                queue.push_back(n);
            }
        }
    }
    Err(last_err
        .unwrap_or(MdsError::NoOrbitImage { s: s.to_string(), w: w.to_string() }))
}
