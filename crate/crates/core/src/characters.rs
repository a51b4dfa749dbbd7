//! Quadratic characters: Kronecker symbols, the four real characters mod 8,
//! squarefree decomposition, and conductor data of the attached primitive
//! characters.
//!
//! For odd positive `d` the character `chi_d(n) = (d/n)` is the Jacobi symbol
//! read with `d` as numerator.  At `n = 2` we use the value of the primitive
//! character inducing `chi_d`, which is determined by `d mod 8`:
//!
//! ```text
//! chi_d(2) = +1  if d = 1 (mod 8)
//! chi_d(2) = -1  if d = 5 (mod 8)
//! chi_d(2) =  0  if d = 3 (mod 4)      (the conductor is even)
//! ```
//!
//! and extend completely multiplicatively to all even `n`.  This is the
//! convention the series code relies on; at fundamental-discriminant first
//! arguments it coincides with the textbook Kronecker symbol.
//!
//! The four real characters mod 8 are indexed [`CharIndex::Psi1`] (principal),
//! [`CharIndex::PsiM1`] = (-1/.), [`CharIndex::Psi2`] = (2/.) and
//! [`CharIndex::PsiM2`] = (-2/.).  For odd squarefree `d0`, the product
//! `chi_{d0} psi` is induced by the primitive character attached to a
//! fundamental discriminant `disc(d0, psi)`; [`conductor_data`] returns its
//! modulus `delta0 = |disc|` and parity `kappa` (0 even, 1 odd).  A separate
//! [`conductor_search`] computes the same conductor by minimal-period search
//! and backs the closed form in tests.

use crate::error::{MdsError, Result};
use std::sync::{Arc, OnceLock, RwLock};

/// The four real Dirichlet characters mod 8, in the fixed vector order used
/// by the sixteen-component series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharIndex {
    /// principal character mod 8 (1 on odd integers)
    Psi1,
    /// (-1/.): +1 on n = 1 (mod 4), -1 on n = 3 (mod 4)
    PsiM1,
    /// (2/.): +1 on n = +-1 (mod 8), -1 on n = +-3 (mod 8)
    Psi2,
    /// (-2/.): +1 on n = 1, 3 (mod 8), -1 on n = 5, 7 (mod 8)
    PsiM2,
}

pub const ALL_CHARS: [CharIndex; 4] = [
    CharIndex::Psi1,
    CharIndex::PsiM1,
    CharIndex::Psi2,
    CharIndex::PsiM2,
];

impl CharIndex {
    pub fn ord(self) -> usize {
        match self {
            CharIndex::Psi1 => 0,
            CharIndex::PsiM1 => 1,
            CharIndex::Psi2 => 2,
            CharIndex::PsiM2 => 3,
        }
    }

    pub fn from_ord(k: usize) -> CharIndex {
        ALL_CHARS[k]
    }

    /// Parity: 0 for even characters (value 1 at -1), 1 for odd.
    pub fn parity(self) -> u32 {
        match self {
            CharIndex::Psi1 | CharIndex::Psi2 => 0,
            CharIndex::PsiM1 | CharIndex::PsiM2 => 1,
        }
    }

    /// Value at any integer (period 8; 0 on even integers).
    pub fn value(self, n: i64) -> i8 {
        let r = n.rem_euclid(8) as usize;
        if r % 2 == 0 {
            return 0;
        }
        // residues 1, 3, 5, 7 map to table positions 0..3
        const TABLE: [[i8; 4]; 4] = [
            [1, 1, 1, 1],    // psi_1
            [1, -1, 1, -1],  // psi_{-1}
            [1, -1, -1, 1],  // psi_2
            [1, 1, -1, -1],  // psi_{-2}
        ];
        TABLE[self.ord()][(r - 1) / 2]
    }

    pub fn label(self) -> &'static str {
        match self {
            CharIndex::Psi1 => "psi1",
            CharIndex::PsiM1 => "psi_m1",
            CharIndex::Psi2 => "psi2",
            CharIndex::PsiM2 => "psi_m2",
        }
    }

    pub fn parse(s: &str) -> Result<CharIndex> {
        match s {
            "psi1" | "1" => Ok(CharIndex::Psi1),
            "psi_m1" | "psi-1" | "m1" | "-1" => Ok(CharIndex::PsiM1),
            "psi2" | "2" => Ok(CharIndex::Psi2),
            "psi_m2" | "psi-2" | "m2" | "-2" => Ok(CharIndex::PsiM2),
            other => Err(MdsError::InvalidInput(format!(
                "unknown character name {other:?} (expected psi1, psi_m1, psi2, psi_m2)"
            ))),
        }
    }
}

impl std::ops::Mul for CharIndex {
    type Output = CharIndex;

    /// Pointwise product inside the (Z/2)^2 character group.
    fn mul(self, other: CharIndex) -> CharIndex {
        // encode as (a, b) with psi = psi_{-1}^a psi_2^b
        let enc = |c: CharIndex| match c {
            CharIndex::Psi1 => (0u8, 0u8),
            CharIndex::PsiM1 => (1, 0),
            CharIndex::Psi2 => (0, 1),
            CharIndex::PsiM2 => (1, 1),
        };
        let (a1, b1) = enc(self);
        let (a2, b2) = enc(other);
        match ((a1 ^ a2), (b1 ^ b2)) {
            (0, 0) => CharIndex::Psi1,
            (1, 0) => CharIndex::PsiM1,
            (0, 1) => CharIndex::Psi2,
            _ => CharIndex::PsiM2,
        }
    }
}

/// Component index of the pair `(psi, psi')` in the sixteen-vector.
pub fn pair_index(psi: CharIndex, psi_pr: CharIndex) -> usize {
    4 * psi.ord() + psi_pr.ord()
}

/// `psi(n)` as a free function, matching the operation table.
pub fn psi_value(psi: CharIndex, n: i64) -> i8 {
    psi.value(n)
}

/// Jacobi symbol `(a/m)` for odd positive `m`; the symbol is periodic in `a`
/// with period `m`, so negative `a` reduce mod `m`.
fn jacobi(a: i64, m: u64) -> i8 {
    debug_assert!(m % 2 == 1);
    let mut a = a.rem_euclid(m as i64) as u64;
    let mut m = m;
    let mut sign = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            sign = -sign;
        }
        a %= m;
    }
    if m == 1 {
        sign
    } else {
        0
    }
}

/// Value of `chi_d` at 2 under the primitive-character convention
/// (see module docs).
fn two_part(d: i64) -> i8 {
    match d.rem_euclid(8) {
        1 => 1,
        5 => -1,
        _ => 0, // 3, 7 (even conductor) and even d
    }
}

/// Kronecker symbol `chi_d(n) = (d/n)` in the convention of the module docs.
/// `d` may be negative; `n = 0` is rejected; negative `n` use
/// `(d/-1) = sign(d)`.
pub fn kronecker(d: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return Err(MdsError::InvalidInput(
            "kronecker symbol (d/0) is undefined".into(),
        ));
    }
    let mut sign = 1i8;
    let mut n_abs = if n < 0 {
        if d < 0 {
            sign = -1;
        }
        n.unsigned_abs()
    } else {
        n as u64
    };
    let k = n_abs.trailing_zeros();
    n_abs >>= k;
    let mut result = jacobi(d, n_abs);
    if k > 0 {
        let t = two_part(d);
        if t == 0 {
            return Ok(0);
        }
        if k % 2 == 1 && t == -1 {
            result = -result;
        }
    }
    Ok(sign * result)
}

/// Squarefree decomposition `d = d0 * d1^2` of an odd positive integer.
pub fn decompose(d: u64) -> Result<(u64, u64)> {
    if d == 0 || d % 2 == 0 {
        return Err(MdsError::InvalidInput(format!(
            "decompose expects an odd positive integer, got {d}"
        )));
    }
    let mut rest = d;
    let mut d0 = 1u64;
    let mut d1 = 1u64;
    let mut p = 3u64;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e % 2 == 1 {
                d0 *= p;
            }
            d1 *= p.pow(e / 2);
        }
        p += 2;
    }
    // remaining factor is 1 or prime
    d0 *= rest;
    Ok((d0, d1))
}

/// Conductor and parity data of the primitive character inducing
/// `chi_{d0} psi`, for the squarefree part `d0` of `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharDecomposition {
    /// squarefree part of `d`
    pub d0: u64,
    /// cofactor: `d = d0 * d1^2`
    pub d1: u64,
    /// fundamental discriminant indexing the primitive character
    pub disc: i64,
    /// conductor `|disc|` of the primitive character
    pub delta0: u64,
    /// parity of the primitive character (0 even, 1 odd)
    pub kappa: u32,
}

/// Fundamental discriminant attached to `(d0, psi)` for squarefree odd `d0`.
fn discriminant(d0: u64, psi: CharIndex) -> i64 {
    let d = d0 as i64;
    match psi {
        CharIndex::Psi1 => {
            if d0 % 4 == 1 {
                d
            } else {
                4 * d
            }
        }
        CharIndex::PsiM1 => {
            if d0 % 4 == 1 {
                -4 * d
            } else {
                -d
            }
        }
        CharIndex::Psi2 => 8 * d,
        CharIndex::PsiM2 => -8 * d,
    }
}

/// Decompose `d` and return the conductor data of `chi_{d0} psi`.
pub fn conductor_data(d: u64, psi: CharIndex) -> Result<CharDecomposition> {
    let (d0, d1) = decompose(d)?;
    Ok(conductor_data_parts(d0, d1, psi))
}

/// Conductor data from a precomputed factorization `d = d0 * d1^2` with
/// `d0` squarefree odd; skips the trial division of [`conductor_data`],
/// for bulk sweeps that already hold a decomposition table.
pub fn conductor_data_parts(d0: u64, d1: u64, psi: CharIndex) -> CharDecomposition {
    let disc = discriminant(d0, psi);
    CharDecomposition {
        d0,
        d1,
        disc,
        delta0: disc.unsigned_abs(),
        kappa: psi.parity(),
    }
}

/// Value of the primitive character attached to `dec` at any integer.
pub fn chi_star(dec: &CharDecomposition, n: i64) -> i8 {
    kronecker(dec.disc, n).expect("n != 0 checked by callers")
}

/// Conductor of `chi_{d0} psi` by minimal-period search: the smallest
/// divisor `q` of `8 d0` such that the character is trivial on the
/// subgroup `{a = 1 mod q, gcd(a, 8 d0) = 1}`.  Also returns the parity read
/// off from the value at `-1`.  Exhaustive; intended for cross-checking the
/// closed form at small `d0`.
pub fn conductor_search(d0: u64, psi: CharIndex) -> Result<(u64, u32)> {
    let (sf, d1) = decompose(d0)?;
    if d1 != 1 {
        return Err(MdsError::InvalidInput(format!(
            "conductor_search expects squarefree d0, got {d0}"
        )));
    }
    let m = 8 * sf;
    let chi = |n: u64| -> i8 {
        if gcd(n, m) != 1 {
            0
        } else {
            psi.value(n as i64) * jacobi(sf as i64, n)
        }
    };
    let mut divisors: Vec<u64> = (1..=m).filter(|q| m % q == 0).collect();
    divisors.sort_unstable();
    let mut conductor = m;
    'outer: for q in divisors {
        let mut a = 1 + q;
        while a < m + 1 {
            let r = a % m;
            if r != 1 && gcd(r, m) == 1 && chi(r) != 1 {
                continue 'outer;
            }
            a += q;
        }
        conductor = q;
        break;
    }
    let parity = if chi(m - 1) == 1 { 0 } else { 1 };
    Ok((conductor, parity))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `chi_tilde_n(d)`: the reciprocity companion of `chi_d(n)` for odd positive
/// arguments; equals `chi_n(d)` for `n = 1 (mod 4)` and `chi_{-n}(d)` for
/// `n = 3 (mod 4)`.
pub fn tilde_chi(n: u64, d: u64) -> Result<i8> {
    if n % 2 == 0 || d % 2 == 0 || n == 0 || d == 0 {
        return Err(MdsError::InvalidInput(format!(
            "tilde_chi expects odd positive arguments, got ({n}, {d})"
        )));
    }
    if n % 4 == 1 {
        kronecker(n as i64, d as i64)
    } else {
        kronecker(-(n as i64), d as i64)
    }
}

// ---------------------------------------------------------------------------
// Shared sieve infrastructure for bulk series work
// ---------------------------------------------------------------------------

static SPF: OnceLock<RwLock<Arc<Vec<u32>>>> = OnceLock::new();

/// Smallest-prime-factor table covering `0..=limit` (shared, grown on
/// demand).  `table[n]` is the smallest prime factor of `n` (and `n` itself
/// for `n` prime; entries 0 and 1 are 0).
pub fn spf_table(limit: usize) -> Arc<Vec<u32>> {
    let lock = SPF.get_or_init(|| RwLock::new(Arc::new(Vec::new())));
    {
        let cur = lock.read().unwrap();
        if cur.len() > limit {
            return cur.clone();
        }
    }
    let mut guard = lock.write().unwrap();
    if guard.len() > limit {
        return guard.clone();
    }
    let n = (limit + 1).next_power_of_two().max(1 << 10);
    let mut spf = vec![0u32; n];
    for i in 2..n {
        if spf[i] == 0 {
            for j in (i..n).step_by(i) {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
            }
        }
    }
    let arc = Arc::new(spf);
    *guard = arc.clone();
    arc
}

/// Squarefree decompositions for all `d <= limit`: `table[d] = (d0, d1)`
/// with `d = d0 * d1^2` (entry 0 is `(0, 0)`).
pub fn decompose_table(limit: usize) -> Vec<(u32, u32)> {
    let spf = spf_table(limit);
    let mut out = vec![(0u32, 0u32); limit + 1];
    if limit >= 1 {
        out[1] = (1, 1);
    }
    for d in 2..=limit {
        let p = spf[d] as usize;
        let mut e = 1;
        let mut rest = d / p;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        let (r0, r1) = out[rest];
        let d0 = r0 as usize * if e % 2 == 1 { p } else { 1 };
        let d1 = r1 as usize * p.pow((e / 2) as u32);
        out[d] = (d0 as u32, d1 as u32);
    }
    out
}

/// Möbius function over `0..=limit`, filled through the shared
/// smallest-prime-factor sieve by the standard linear recurrence.
pub fn mobius_table(limit: usize) -> Vec<i8> {
    let spf = spf_table(limit);
    let mut mu = vec![0i8; limit + 1];
    if limit >= 1 {
        mu[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        let m = n / p;
        mu[n] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

/// Values `chi(n)` for `n = 0..=limit` of the completely multiplicative
/// character attached to discriminant `disc`, filled through the
/// smallest-prime-factor table so only primes pay a symbol evaluation.
pub fn char_value_sieve(disc: i64, limit: usize) -> Vec<i8> {
    let spf = spf_table(limit);
    let mut out = vec![0i8; limit + 1];
    if limit >= 1 {
        out[1] = 1;
    }
    for n in 2..=limit {
        let p = spf[n] as usize;
        if p == n {
            out[n] = kronecker(disc, n as i64).expect("n >= 2");
        } else {
            out[n] = out[p] * out[n / p];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64;

    /// Legendre symbol by the Euler criterion: `d^((p-1)/2) mod p`.
    fn legendre_oracle(d: i64, p: u64) -> i8 {
        let dm = d.rem_euclid(p as i64) as u64;
        if dm == 0 {
            return 0;
        }
        let mut result = 1u64;
        let mut base = dm % p;
        let mut e = (p - 1) / 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        if result == 1 {
            1
        } else {
            -1
        }
    }

    fn odd_primes_to(n: u64) -> Vec<u64> {
        (3..=n).step_by(2).filter(|&p| (3..p).step_by(2).all(|q| q * q > p || p % q != 0)).collect()
    }

    #[test]
    fn jacobi_matches_euler_criterion_at_primes() {
        for p in odd_primes_to(199) {
            for d in -30i64..30 {
                assert_eq!(
                    kronecker(d, p as i64).unwrap(),
                    legendre_oracle(d, p),
                    "({d}/{p})"
                );
            }
        }
    }

    #[test]
    fn jacobi_factors_over_prime_denominators() {
        // (d/m1*m2) = (d/m1)(d/m2) for odd m's
        let mut rng = XorShift64::new(11);
        for _ in 0..2000 {
            let d = (rng.next_u64() % 4001) as i64 - 2000;
            let m1 = 2 * (rng.next_u64() % 200) + 1;
            let m2 = 2 * (rng.next_u64() % 200) + 1;
            let lhs = kronecker(d, (m1 * m2) as i64).unwrap();
            let rhs = kronecker(d, m1 as i64).unwrap() * kronecker(d, m2 as i64).unwrap();
            assert_eq!(lhs, rhs, "d={d}, m1={m1}, m2={m2}");
        }
    }

    #[test]
    fn known_symbol_values() {
        // classical worked example
        assert_eq!(kronecker(1001, 9907).unwrap(), -1);
        // small table entries
        assert_eq!(kronecker(3, 5).unwrap(), -1);
        assert_eq!(kronecker(-11, 3).unwrap(), 1);
        assert_eq!(kronecker(17, 2).unwrap(), 1);
        assert_eq!(kronecker(0, 1).unwrap(), 1);
        assert_eq!(kronecker(0, 5).unwrap(), 0);
        assert!(kronecker(5, 0).is_err());
    }

    #[test]
    fn value_at_two_follows_residue_table() {
        for d in (1i64..2000).step_by(2) {
            let want = match d % 8 {
                1 => 1,
                5 => -1,
                _ => 0,
            };
            assert_eq!(kronecker(d, 2).unwrap(), want, "d={d}");
            // complete multiplicativity through the 2-part
            for n in (1i64..40).step_by(2) {
                let lhs = kronecker(d, 2 * n).unwrap();
                let rhs = kronecker(d, 2).unwrap() * kronecker(d, n).unwrap();
                assert_eq!(lhs, rhs, "d={d}, n={n}");
            }
        }
    }

    #[test]
    fn numerator_multiplicativity() {
        let mut rng = XorShift64::new(3);
        for _ in 0..2000 {
            let a = (rng.next_u64() % 801) as i64 - 400;
            let b = (rng.next_u64() % 801) as i64 - 400;
            let n = 2 * (rng.next_u64() % 300) as i64 + 1;
            let lhs = kronecker(a * b, n).unwrap();
            let rhs = kronecker(a, n).unwrap() * kronecker(b, n).unwrap();
            assert_eq!(lhs, rhs, "a={a}, b={b}, n={n}");
        }
    }

    #[test]
    fn evenness_in_second_argument_for_positive_d() {
        for d in (1i64..200).step_by(2) {
            for n in 1i64..100 {
                assert_eq!(kronecker(d, n).unwrap(), kronecker(d, -n).unwrap());
            }
        }
    }

    #[test]
    fn reciprocity_in_tilde_form() {
        // chi_d(n) = tilde_chi_n(d) for odd positive d, n
        for d in (1u64..500).step_by(2) {
            for n in (1u64..500).step_by(2) {
                assert_eq!(
                    kronecker(d as i64, n as i64).unwrap(),
                    tilde_chi(n, d).unwrap(),
                    "d={d}, n={n}"
                );
            }
        }
    }

    #[test]
    fn decompose_splits_square_part() {
        assert_eq!(decompose(45).unwrap(), (5, 3));
        assert_eq!(decompose(1).unwrap(), (1, 1));
        assert_eq!(decompose(9907).unwrap(), (9907, 1));
        assert!(decompose(12).is_err());
        assert!(decompose(0).is_err());
        for d in (1u64..5000).step_by(2) {
            let (d0, d1) = decompose(d).unwrap();
            assert_eq!(d0 * d1 * d1, d);
            // d0 squarefree: no odd square divides it
            for q in (3u64..).step_by(2).take_while(|q| q * q <= d0) {
                assert!(d0 % (q * q) != 0, "d0={d0} not squarefree");
            }
        }
    }

    #[test]
    fn decompose_table_matches_pointwise() {
        let table = decompose_table(3000);
        for d in 1..=3000u64 {
            if d % 2 == 1 {
                let (d0, d1) = decompose(d).unwrap();
                assert_eq!((table[d as usize].0 as u64, table[d as usize].1 as u64), (d0, d1));
            }
        }
    }

    #[test]
    fn psi_values_match_symbols() {
        for n in (1i64..200).step_by(2) {
            assert_eq!(psi_value(CharIndex::Psi1, n), 1);
            assert_eq!(psi_value(CharIndex::PsiM1, n), kronecker(-1, n).unwrap());
            assert_eq!(psi_value(CharIndex::Psi2, n), kronecker(2, n).unwrap());
            assert_eq!(psi_value(CharIndex::PsiM2, n), kronecker(-2, n).unwrap());
            assert_eq!(psi_value(CharIndex::Psi1, 2 * n), 0);
        }
        // parities read off at -1
        for psi in ALL_CHARS {
            let at_minus_one = psi.value(-1);
            assert_eq!(at_minus_one == -1, psi.parity() == 1, "{psi:?}");
        }
    }

    #[test]
    fn char_group_table() {
        use CharIndex::*;
        assert_eq!(PsiM1 * Psi2, PsiM2);
        assert_eq!(PsiM2 * Psi2, PsiM1);
        assert_eq!(PsiM1 * PsiM1, Psi1);
        for a in ALL_CHARS {
            assert_eq!(a * Psi1, a);
            // products agree pointwise
            for b in ALL_CHARS {
                for n in (1i64..17).step_by(2) {
                    assert_eq!((a * b).value(n), a.value(n) * b.value(n));
                }
            }
        }
    }

    #[test]
    fn conductor_examples() {
        let c = conductor_data(5, CharIndex::Psi1).unwrap();
        assert_eq!((c.delta0, c.kappa), (5, 0));
        let c = conductor_data(3, CharIndex::Psi1).unwrap();
        assert_eq!((c.delta0, c.kappa), (12, 0));
        let c = conductor_data(1, CharIndex::PsiM2).unwrap();
        assert_eq!((c.delta0, c.kappa), (8, 1));
        let c = conductor_data(15, CharIndex::Psi2).unwrap();
        assert_eq!((c.delta0, c.kappa), (120, 0));
        // square part is stripped first
        let c = conductor_data(45, CharIndex::Psi1).unwrap();
        assert_eq!((c.d0, c.d1, c.delta0), (5, 3, 5));
        // complementary pairing for the odd twist
        let c = conductor_data(3, CharIndex::PsiM1).unwrap();
        assert_eq!((c.delta0, c.kappa), (3, 1));
        let c = conductor_data(5, CharIndex::PsiM1).unwrap();
        assert_eq!((c.delta0, c.kappa), (20, 1));
    }

    #[test]
    fn closed_form_matches_minimal_period_search() {
        for d0 in (1u64..300).step_by(2) {
            if decompose(d0).unwrap().1 != 1 {
                continue;
            }
            for psi in ALL_CHARS {
                let closed = conductor_data(d0, psi).unwrap();
                let (q, parity) = conductor_search(d0, psi).unwrap();
                assert_eq!(closed.delta0, q, "conductor at d0={d0}, {psi:?}");
                assert_eq!(closed.kappa, parity, "parity at d0={d0}, {psi:?}");
            }
        }
    }

    #[test]
    fn primitive_character_agrees_on_odd_arguments() {
        for d0 in (1u64..200).step_by(2) {
            if decompose(d0).unwrap().1 != 1 {
                continue;
            }
            for psi in ALL_CHARS {
                let dec = conductor_data(d0, psi).unwrap();
                for n in (1i64..150).step_by(2) {
                    let direct = psi.value(n) * jacobi(d0 as i64, n as u64);
                    assert_eq!(chi_star(&dec, n), direct, "d0={d0}, {psi:?}, n={n}");
                }
                // value at 2 vanishes exactly when the conductor is even
                let at2 = chi_star(&dec, 2);
                assert_eq!(at2 == 0, dec.delta0 % 2 == 0, "d0={d0}, {psi:?}");
            }
        }
    }

    #[test]
    fn char_sieve_matches_direct_symbols() {
        for (d0, psi) in [(5u64, CharIndex::Psi1), (3, CharIndex::PsiM1), (7, CharIndex::Psi2), (1, CharIndex::PsiM2)] {
            let dec = conductor_data(d0, psi).unwrap();
            let sieve = char_value_sieve(dec.disc, 500);
            for n in 1..=500i64 {
                assert_eq!(sieve[n as usize], chi_star(&dec, n), "disc={}, n={n}", dec.disc);
            }
        }
    }

    #[test]
    fn pair_index_layout() {
        assert_eq!(pair_index(CharIndex::Psi1, CharIndex::Psi1), 0);
        assert_eq!(pair_index(CharIndex::Psi1, CharIndex::PsiM2), 3);
        assert_eq!(pair_index(CharIndex::PsiM2, CharIndex::Psi1), 12);
        assert_eq!(pair_index(CharIndex::Psi2, CharIndex::PsiM1), 9);
    }

    #[test]
    fn mobius_table_matches_divisor_identity() {
        let mu = mobius_table(1000);
        assert_eq!(&mu[1..=12], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
        // sum over divisors of mu is the unit at n = 1
        for n in 1usize..=400 {
            let total: i32 = (1..=n).filter(|d| n % d == 0).map(|d| mu[d] as i32).sum();
            assert_eq!(total, i32::from(n == 1), "n={n}");
        }
        // running sum at 1000 (classical checkpoint value)
        let mertens: i32 = mu[1..=1000].iter().map(|&v| v as i32).sum();
        assert_eq!(mertens, 2);
    }
}
