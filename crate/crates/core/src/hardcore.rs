//! The hard-core model: every maximal unfriendly arrangement of a grid is
//! equally likely. Counts are Fibonacci numbers on the `Y_n` grids; laws
//! come from a short recurrence, a closed form, or a column transfer
//! matrix that also samples arrangements uniformly.

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{Rational, RationalPoly};
use crate::precision::{bits_for_digits, Ball};
use crate::seat::{build_config, Family, FamilyTag, Seat, SeatGrid};

/// Largest grid the brute-force enumerator accepts.
pub const ENUMERATION_LIMIT: usize = 48;

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FibCount {
    pub n: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub value: BigInt,
}

/// `N_n` with `N_0 = N_1 = 1`.
pub fn fib(n: usize) -> FibCount {
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for _ in 0..n {
        let c = &a + &b;
        a = std::mem::replace(&mut b, c);
    }
    FibCount { n, value: a }
}

fn ratio(a: &BigInt, b: &BigInt) -> Rational {
    Rational::new(a.clone(), b.clone())
}

fn check_tag(tag: FamilyTag) -> Result<()> {
    match tag {
        FamilyTag::X | FamilyTag::Y => Ok(()),
        _ => Err(Error::InvalidArgument(format!("the hard-core laws cover X and Y, not {tag}"))),
    }
}

/// `Y_0 ..= Y_n` from `Y_n = (tN_{n-1}/N_n) Y_{n-1} + (tN_{n-2}/N_n) Y_{n-2}`.
fn y_table(n: usize) -> Vec<RationalPoly> {
    let mut ys = vec![RationalPoly::one(), RationalPoly::t()];
    let mut fibs = vec![BigInt::one(), BigInt::one()];
    for k in 2..=n {
        fibs.push(&fibs[k - 1] + &fibs[k - 2]);
        let a = ys[k - 1].scale(&ratio(&fibs[k - 1], &fibs[k])).shift(1);
        let b = ys[k - 2].scale(&ratio(&fibs[k - 2], &fibs[k])).shift(1);
        ys.push(&a + &b);
    }
    ys.truncate(n + 1);
    ys
}

/// The law from the recurrence, with `X_n = tY_{n-1}` and `X_0 = 1`.
pub fn pgf_hardcore(tag: FamilyTag, n: usize) -> Result<RationalPoly> {
    check_tag(tag)?;
    Ok(match (tag, n) {
        (FamilyTag::X, 0) => RationalPoly::one(),
        (FamilyTag::X, _) => y_table(n - 1).pop().expect("nonempty").shift(1),
        _ => y_table(n).pop().expect("nonempty"),
    })
}

/// `X_n(t) = (t/N_{n-1}) Σ_j C(j, n-1-j) t^j` over every `j` with a nonzero
/// binomial, i.e. `⌈(n-1)/2⌉ ≤ j ≤ n-1`; `Y_n = X_{n+1}/t`.
pub fn pgf_hardcore_closed(tag: FamilyTag, n: usize) -> Result<RationalPoly> {
    check_tag(tag)?;
    let m = match tag {
        FamilyTag::X if n == 0 => return Ok(RationalPoly::one()),
        FamilyTag::X => n - 1,
        _ => n,
    };
    let mut num = vec![BigInt::zero(); m + 1];
    for (j, slot) in num.iter_mut().enumerate().skip(m.div_ceil(2)) {
        *slot = binomial(BigInt::from(j), BigInt::from(m - j));
    }
    let p = RationalPoly::from_scaled(num, fib(m).value);
    Ok(if tag == FamilyTag::X { p.shift(1) } else { p })
}

/// Every maximal independent set of the seats of `grid`, by backtracking
/// in column order.
pub fn enumerate_maximal(grid: &SeatGrid) -> Result<Vec<Vec<Seat>>> {
    if grid.len() > ENUMERATION_LIMIT {
        return Err(Error::OracleLimit {
            seats: grid.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut seats: Vec<Seat> = grid.seats().map(|(s, _)| s).collect();
    seats.sort_by_key(|s| (s.col, s.row));
    let index = |s: Seat| seats.iter().position(|&x| x == s);
    let nbrs: Vec<Vec<usize>> = seats
        .iter()
        .map(|&s| grid.neighbors(s).filter_map(index).collect())
        .collect();
    // seats whose neighborhood is fully decided once seat i is
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); seats.len()];
    for (i, ns) in nbrs.iter().enumerate() {
        let last = ns.iter().copied().chain([i]).max().expect("nonempty");
        due[last].push(i);
    }

    struct Walk<'a> {
        nbrs: &'a [Vec<usize>],
        due: &'a [Vec<usize>],
        taken: Vec<bool>,
        out: Vec<Vec<usize>>,
    }
    impl Walk<'_> {
        fn go(&mut self, i: usize) {
            if i == self.taken.len() {
                self.out.push((0..i).filter(|&k| self.taken[k]).collect());
                return;
            }
            for take in [true, false] {
                if take && self.nbrs[i].iter().any(|&k| k < i && self.taken[k]) {
                    continue;
                }
                self.taken[i] = take;
                let dominated = |k: usize| self.taken[k] || self.nbrs[k].iter().any(|&j| self.taken[j]);
                if self.due[i].iter().all(|&k| dominated(k)) {
                    self.go(i + 1);
                }
            }
            self.taken[i] = false;
        }
    }

    let mut walk = Walk {
        nbrs: &nbrs,
        due: &due,
        taken: vec![false; seats.len()],
        out: Vec::new(),
    };
    walk.go(0);
    Ok(walk
        .out
        .into_iter()
        .map(|set| set.into_iter().map(|i| seats[i]).collect())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arrangements {
    pub n: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub count: BigInt,
    pub sample: Option<Vec<Seat>>,
}

/// Enumerates the maximal arrangements of the `Y_n` grid (`n ≤ 20`), with
/// a uniform sample when a seed is given.
pub fn enumerate_arrangements(n: usize, seed: Option<u64>) -> Result<Arrangements> {
    if n > 20 {
        return Err(Error::InvalidArgument("full enumeration needs n <= 20; use the sampler".into()));
    }
    let all = enumerate_maximal(&build_config(Family::new(FamilyTag::Y, n)))?;
    let sample = seed.map(|s| all[ChaCha8Rng::seed_from_u64(s).random_range(0..all.len())].clone());
    Ok(Arrangements {
        n,
        count: BigInt::from(all.len()),
        sample,
    })
}

/// Column state: occupied rows, and empty rows still waiting for an
/// occupied neighbor (only the right neighbor can still supply one).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct State {
    occ: u8,
    open: u8,
}

const STATES: usize = 12;

impl State {
    fn index(self) -> usize {
        self.occ as usize * 4 + self.open as usize
    }
}

fn swap_rows(m: u8) -> u8 {
    ((m & 1) << 1) | ((m >> 1) & 1)
}

/// Valid next states after `prev` for a column holding the rows in `mask`.
fn transitions(prev: State, mask: u8) -> impl Iterator<Item = State> {
    [0u8, 1, 2].into_iter().filter_map(move |occ| {
        if occ & !mask != 0 || occ & prev.occ != 0 || prev.open & !occ != 0 {
            return None;
        }
        let open = mask & !occ & !prev.occ & !swap_rows(occ);
        Some(State { occ, open })
    })
}

/// Transfer matrix over the columns of a grid with at most two rows.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    first_col: i64,
    masks: Vec<u8>,
    /// `completions[c][s]`: ways to finish columns `c..` after state `s`.
    completions: Vec<Vec<BigInt>>,
}

impl TransferMatrix {
    pub fn new(grid: &SeatGrid) -> Self {
        let (lo, hi) = grid.column_span().unwrap_or((0, -1));
        let mut masks = vec![0u8; (hi - lo + 1).max(0) as usize];
        for (s, _) in grid.seats() {
            masks[(s.col - lo) as usize] |= 1 << s.row;
        }
        let cols = masks.len();
        let mut completions = vec![vec![BigInt::zero(); STATES]; cols + 1];
        for occ in 0..3u8 {
            completions[cols][State { occ, open: 0 }.index()] = BigInt::one();
        }
        for c in (0..cols).rev() {
            for occ in 0..3u8 {
                for open in 0..4u8 {
                    let s = State { occ, open };
                    let total = transitions(s, masks[c]).map(|t| completions[c + 1][t.index()].clone()).sum();
                    completions[c][s.index()] = total;
                }
            }
        }
        TransferMatrix {
            first_col: lo,
            masks,
            completions,
        }
    }

    /// Number of maximal arrangements.
    pub fn count(&self) -> BigInt {
        self.completions[0][State { occ: 0, open: 0 }.index()].clone()
    }

    /// Law of the number of occupied seats under the uniform measure.
    pub fn pgf(&self) -> RationalPoly {
        let seats: usize = self.masks.iter().map(|m| m.count_ones() as usize).sum();
        let mut layer: Vec<Vec<BigInt>> = vec![Vec::new(); STATES];
        layer[0] = vec![BigInt::one()];
        for &mask in &self.masks {
            let mut next: Vec<Vec<BigInt>> = vec![Vec::new(); STATES];
            for occ in 0..3u8 {
                for open in 0..4u8 {
                    let s = State { occ, open };
                    if layer[s.index()].is_empty() {
                        continue;
                    }
                    for t in transitions(s, mask) {
                        let k = t.occ.count_ones() as usize;
                        let dst = &mut next[t.index()];
                        if dst.len() < layer[s.index()].len() + k {
                            dst.resize(layer[s.index()].len() + k, BigInt::zero());
                        }
                        for (i, v) in layer[s.index()].iter().enumerate() {
                            dst[i + k] += v;
                        }
                    }
                }
            }
            layer = next;
        }
        let mut num = vec![BigInt::zero(); seats + 1];
        for occ in 0..3u8 {
            for (i, v) in layer[State { occ, open: 0 }.index()].iter().enumerate() {
                num[i] += v;
            }
        }
        RationalPoly::from_scaled(num, self.count())
    }

    /// A uniformly random maximal arrangement.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Seat> {
        let mut state = State { occ: 0, open: 0 };
        let mut out = Vec::new();
        for (c, &mask) in self.masks.iter().enumerate() {
            let total = &self.completions[c][state.index()];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let options: Vec<State> = transitions(state, mask)
                .filter(|t| !self.completions[c + 1][t.index()].is_zero())
                .collect();
            let mut chosen = *options.last().expect("a completion exists");
            for t in &options {
                acc += big_ratio(&self.completions[c + 1][t.index()], total);
                if u < acc {
                    chosen = *t;
                    break;
                }
            }
            for row in 0..2u8 {
                if chosen.occ & (1 << row) != 0 {
                    out.push(Seat::new(row, self.first_col + c as i64));
                }
            }
            state = chosen;
        }
        out
    }
}

/// `a/b` as `f64` for big integers of any size.
fn big_ratio(a: &BigInt, b: &BigInt) -> f64 {
    let shift = b.bits().saturating_sub(60);
    let a = (a >> shift).to_f64().unwrap_or(f64::INFINITY);
    let b = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    a / b
}

/// Occupied-seat counts of `trials` uniform arrangements of `grid`.
pub fn sample_occupancy(grid: &SeatGrid, trials: usize, seed: u64) -> Vec<usize> {
    let tm = TransferMatrix::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| tm.sample(&mut rng).len()).collect()
}

/// A one-row grid of `n` seats.
pub fn one_row_grid(n: usize) -> SeatGrid {
    SeatGrid::from_seats((1..=n as i64).map(|c| Seat::new(0, c))).expect("distinct seats")
}

#[derive(Clone, Debug)]
pub struct HardcoreBalls {
    pub density_2row: Ball,
    pub variance_2row: Ball,
    pub density_1row: Ball,
    pub variance_1row: Ball,
}

impl HardcoreBalls {
    pub fn new(prec: u32) -> Result<Self> {
        let wp = prec + 64;
        let int = |v: i64| Ball::exact_int(v, wp);
        let s5 = int(5).sqrt()?;
        let five_minus = int(5).sub(&s5);
        let density_2row = int(1).div(&five_minus)?;
        let variance_2row = int(3).sub(&s5).mul_int(2).div(&s5.mul(&five_minus.square()))?;

        let alpha = int(100).add(&int(69).sqrt()?.mul_int(12)).cbrt()?;
        let a2 = alpha.square();
        let a3 = a2.mul(&alpha);
        let a4 = a3.mul(&alpha);
        let density_1row = alpha
            .sub(&int(2))
            .mul(&alpha.add(&int(2)).square())
            .mul(&a3.sub(&int(192)))
            .div_int(4416);
        let top = a4
            .mul_int(3)
            .add(&a3.mul_int(17))
            .sub(&a2.mul_int(184))
            .add(&alpha.mul_int(68))
            .add(&int(48));
        let bottom = a2.sub(&alpha.mul_int(2)).add(&int(4)).square();
        let variance_1row = top.div(&bottom)?.mul_int(6).div_int(529);
        let p = |b: Ball| b.with_prec(prec);
        Ok(HardcoreBalls {
            density_2row: p(density_2row),
            variance_2row: p(variance_2row),
            density_1row: p(density_1row),
            variance_1row: p(variance_1row),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HardcoreConstants {
    pub digits: u32,
    pub density_2row: String,
    pub variance_2row: String,
    pub density_1row: String,
    pub variance_1row: String,
}

/// Densities and variance constants of both uniform models, truncated to
/// `digits` certified places.
pub fn hardcore_constants(digits: u32) -> Result<HardcoreConstants> {
    if digits < 10 {
        return Err(Error::InvalidArgument("constants need at least 10 digits".into()));
    }
    let d = digits as usize;
    let mut bits = bits_for_digits(digits);
    for _ in 0..8 {
        let b = HardcoreBalls::new(bits)?;
        let fields = [&b.density_2row, &b.variance_2row, &b.density_1row, &b.variance_1row].map(|x| x.to_decimal(d));
        if let [Some(a), Some(b), Some(c), Some(e)] = fields {
            return Ok(HardcoreConstants {
                digits,
                density_2row: a,
                variance_2row: b,
                density_1row: c,
                variance_1row: e,
            });
        }
        bits *= 2;
    }
    Err(Error::PrecisionEscalation {
        n: 0,
        digits: bits as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rational_to_f64;
    use crate::seat::ExactDistribution;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn fibonacci() {
        let v: Vec<i64> = (0..8).map(|n| fib(n).value.to_i64().unwrap()).collect();
        assert_eq!(v, [1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn small_laws() {
        assert_eq!(pgf_hardcore(FamilyTag::Y, 1).unwrap(), RationalPoly::t());
        assert_eq!(pgf_hardcore(FamilyTag::X, 2).unwrap(), RationalPoly::monomial(q(1, 1), 2));
        assert_eq!(
            pgf_hardcore(FamilyTag::Y, 2).unwrap(),
            RationalPoly::from_coeffs(&[q(0, 1), q(1, 2), q(1, 2)])
        );
        let x5 = pgf_hardcore_closed(FamilyTag::X, 5).unwrap();
        assert_eq!(x5, RationalPoly::from_coeffs(&[q(0, 1), q(0, 1), q(0, 1), q(1, 5), q(3, 5), q(1, 5)]));
        assert!(pgf_hardcore(FamilyTag::A, 3).is_err());
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for n in 0..=30 {
            for tag in [FamilyTag::X, FamilyTag::Y] {
                let r = pgf_hardcore(tag, n).unwrap();
                assert_eq!(r, pgf_hardcore_closed(tag, n).unwrap(), "{tag} {n}");
                assert_eq!(r.eval(&q(1, 1)), q(1, 1));
            }
        }
    }

    #[test]
    fn enumeration_counts_and_laws() {
        for n in 1..=10 {
            let grid = build_config(Family::new(FamilyTag::Y, n));
            let all = enumerate_maximal(&grid).unwrap();
            assert_eq!(BigInt::from(all.len()), fib(n).value, "{n}");
            let tm = TransferMatrix::new(&grid);
            assert_eq!(tm.count(), fib(n).value);
            let mut counts = std::collections::BTreeMap::new();
            for set in &all {
                *counts.entry(set.len()).or_insert(0i64) += 1;
            }
            let law = ExactDistribution::from_pmf(counts.into_iter().map(|(k, c)| (k, q(c, all.len() as i64))).collect());
            assert_eq!(law.pgf(), pgf_hardcore(FamilyTag::Y, n).unwrap());
            assert_eq!(tm.pgf(), law.pgf());
        }
        assert_eq!(enumerate_arrangements(2, None).unwrap().count, BigInt::from(2));
        assert_eq!(enumerate_arrangements(5, None).unwrap().count, BigInt::from(8));
    }

    #[test]
    fn samples_are_maximal() {
        let grid = build_config(Family::new(FamilyTag::Y, 30));
        let tm = TransferMatrix::new(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut g = grid.clone();
            for s in tm.sample(&mut rng) {
                g.occupy(s).unwrap();
            }
            assert!(g.is_jammed() && g.is_consistent());
        }
        let s = enumerate_arrangements(6, Some(9)).unwrap().sample.unwrap();
        let mut g = build_config(Family::new(FamilyTag::Y, 6));
        s.iter().for_each(|&x| g.occupy(x).unwrap());
        assert!(g.is_jammed());
    }

    #[test]
    fn one_row_counts_are_padovan() {
        // maximal independent sets of a path: 1, 2, 2, 3, 4, 5, 7, 9, 12
        let v: Vec<i64> = (1..=9)
            .map(|n| TransferMatrix::new(&one_row_grid(n)).count().to_i64().unwrap())
            .collect();
        assert_eq!(v, [1, 2, 2, 3, 4, 5, 7, 9, 12]);
    }

    #[test]
    fn constants() {
        let c = hardcore_constants(20).unwrap();
        assert!(c.density_2row.starts_with("0.36180"));
        assert!(c.variance_2row.starts_with("0.08944"));
        assert!(c.density_1row.starts_with("0.41149"));
        assert!(c.variance_1row.starts_with("0.01707"));
        let law = TransferMatrix::new(&one_row_grid(400)).pgf();
        let m = crate::pgf::MomentReport::from_pgf(400, &law);
        assert!((rational_to_f64(&m.mean) / 400.0 - 0.41149).abs() < 2e-3);
    }
}
