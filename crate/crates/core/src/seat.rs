//! Seat configurations, the sequential unfriendly seating process, a Monte
//! Carlo simulator and an exact oracle for small grids.
//!
//! Seats live on two rows (0 and 1) of integer columns. A seated diner makes
//! the left, right and opposite seats unavailable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{fmt_rational, PolyAccumulator, Rational, RationalPoly};

pub const DEFAULT_ORACLE_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seat {
    pub row: u8,
    pub col: i64,
}

impl Seat {
    pub fn new(row: u8, col: i64) -> Self {
        Seat { row, col }
    }

    fn neighbors(self) -> [Seat; 3] {
        [
            Seat::new(self.row, self.col - 1),
            Seat::new(self.row, self.col + 1),
            Seat::new(1 - self.row, self.col),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeatState {
    Free,
    Occupied,
    Forbidden,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeatGrid {
    seats: BTreeMap<Seat, SeatState>,
}

impl SeatGrid {
    /// A grid of free seats. Rejects duplicate seats and rows other than 0/1.
    pub fn from_seats<I: IntoIterator<Item = Seat>>(seats: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in seats {
            if s.row > 1 {
                return Err(Error::BadRow(s.row));
            }
            if map.insert(s, SeatState::Free).is_some() {
                return Err(Error::OverlappingSeat {
                    row: s.row,
                    col: s.col,
                });
            }
        }
        Ok(SeatGrid { seats: map })
    }

    /// Parses the two-line text form: `O` is a seat, `.` is empty, first
    /// line is row 0 and the first character is column 1.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty())
            .collect();
        if lines.is_empty() || lines.len() > 2 {
            return Err(Error::GridLineCount(lines.len()));
        }
        let mut seats = Vec::new();
        for (row, line) in lines.iter().enumerate() {
            for (i, ch) in line.chars().enumerate() {
                match ch {
                    'O' => seats.push(Seat::new(row as u8, i as i64 + 1)),
                    '.' => {}
                    _ => {
                        return Err(Error::GridParse {
                            line: row + 1,
                            col: i + 1,
                            ch,
                        })
                    }
                }
            }
        }
        Self::from_seats(seats)
    }

    /// Inverse of [`SeatGrid::parse`] for free seats; occupied seats print
    /// as `X` and forbidden ones as `-`.
    pub fn to_text(&self) -> String {
        let Some((lo, hi)) = self.column_span() else {
            return String::new();
        };
        let mut out = String::new();
        for row in 0..2u8 {
            let line: String = (lo..=hi)
                .map(|c| match self.seats.get(&Seat::new(row, c)) {
                    None => '.',
                    Some(SeatState::Free) => 'O',
                    Some(SeatState::Occupied) => 'X',
                    Some(SeatState::Forbidden) => '-',
                })
                .collect();
            out.push_str(line.trim_end_matches('.'));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.seats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }

    pub fn state(&self, seat: Seat) -> Option<SeatState> {
        self.seats.get(&seat).copied()
    }

    pub fn seats(&self) -> impl Iterator<Item = (Seat, SeatState)> + '_ {
        self.seats.iter().map(|(s, st)| (*s, *st))
    }

    pub fn free_seats(&self) -> impl Iterator<Item = Seat> + '_ {
        self.seats
            .iter()
            .filter(|(_, st)| **st == SeatState::Free)
            .map(|(s, _)| *s)
    }

    pub fn occupied_count(&self) -> usize {
        self.seats
            .values()
            .filter(|st| **st == SeatState::Occupied)
            .count()
    }

    pub fn column_span(&self) -> Option<(i64, i64)> {
        let lo = self.seats.keys().map(|s| s.col).min()?;
        let hi = self.seats.keys().map(|s| s.col).max()?;
        Some((lo, hi))
    }

    pub fn neighbors(&self, seat: Seat) -> impl Iterator<Item = Seat> + '_ {
        seat.neighbors()
            .into_iter()
            .filter(move |s| self.seats.contains_key(s))
    }

    /// Seats a diner and forbids the free neighbors.
    pub fn occupy(&mut self, seat: Seat) -> Result<()> {
        if self.state(seat) != Some(SeatState::Free) {
            return Err(Error::SeatNotFree {
                row: seat.row,
                col: seat.col,
            });
        }
        self.seats.insert(seat, SeatState::Occupied);
        for nb in seat.neighbors() {
            if let Some(st) = self.seats.get_mut(&nb) {
                if *st == SeatState::Free {
                    *st = SeatState::Forbidden;
                }
            }
        }
        Ok(())
    }

    pub fn is_jammed(&self) -> bool {
        self.free_seats().next().is_none()
    }

    /// No two occupied seats are adjacent and every forbidden seat touches
    /// an occupied one.
    pub fn is_consistent(&self) -> bool {
        self.seats.iter().all(|(s, st)| match st {
            SeatState::Occupied => self
                .neighbors(*s)
                .all(|nb| self.state(nb) != Some(SeatState::Occupied)),
            SeatState::Forbidden => self
                .neighbors(*s)
                .any(|nb| self.state(nb) == Some(SeatState::Occupied)),
            SeatState::Free => self
                .neighbors(*s)
                .all(|nb| self.state(nb) != Some(SeatState::Occupied)),
        })
    }

    fn transformed(&self, reverse: bool, swap: bool) -> SeatGrid {
        let Some((lo, hi)) = self.column_span() else {
            return self.clone();
        };
        let seats = self
            .seats
            .iter()
            .map(|(s, st)| {
                let col = if reverse { hi - (s.col - lo) } else { s.col } - lo + 1;
                let row = if swap { 1 - s.row } else { s.row };
                (Seat::new(row, col), *st)
            })
            .collect();
        SeatGrid { seats }
    }

    /// Row masks (seat, occupied, forbidden) for rows 0 and 1, column 1 first.
    fn encoding(&self) -> Vec<Vec<bool>> {
        let width = self.column_span().map(|(lo, hi)| (hi - lo + 1) as usize).unwrap_or(0);
        let lo = self.column_span().map(|(lo, _)| lo).unwrap_or(1);
        let mut masks = vec![vec![false; width]; 6];
        for (s, st) in &self.seats {
            let i = (s.col - lo) as usize;
            let r = s.row as usize;
            masks[r][i] = true;
            match st {
                SeatState::Occupied => masks[2 + r][i] = true,
                SeatState::Forbidden => masks[4 + r][i] = true,
                SeatState::Free => {}
            }
        }
        masks
    }

    /// Translates so the minimum column is 1 and picks, among the four
    /// reflections, the grid whose row masks (read as binary numbers with
    /// column 1 least significant, row 0 compared first) are least.
    pub fn canonical(&self) -> SeatGrid {
        let mut best = self.transformed(false, false);
        let mut best_key = best.encoding();
        for (rev, swap) in [(true, false), (false, true), (true, true)] {
            let g = self.transformed(rev, swap);
            let key = g.encoding();
            if cmp_mask_lists(&key, &best_key) == Ordering::Less {
                best = g;
                best_key = key;
            }
        }
        best
    }

    /// Column masks of the free seats (bit 0 = row 0, bit 1 = row 1).
    fn free_masks(&self) -> Vec<u8> {
        let free: Vec<Seat> = self.free_seats().collect();
        let Some(lo) = free.iter().map(|s| s.col).min() else {
            return Vec::new();
        };
        let hi = free.iter().map(|s| s.col).max().unwrap();
        let mut masks = vec![0u8; (hi - lo + 1) as usize];
        for s in free {
            masks[(s.col - lo) as usize] |= 1 << s.row;
        }
        masks
    }
}

fn cmp_binary(a: &[bool], b: &[bool]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn cmp_mask_lists(a: &[Vec<bool>], b: &[Vec<bool>]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_binary(x, y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

impl fmt::Display for SeatGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyTag {
    X,
    Y,
    A,
    B,
    /// The classical one-row configuration.
    Z,
}

impl FamilyTag {
    pub const TWO_ROW: [FamilyTag; 4] = [FamilyTag::X, FamilyTag::Y, FamilyTag::A, FamilyTag::B];
    pub const ALL: [FamilyTag; 5] = [
        FamilyTag::X,
        FamilyTag::Y,
        FamilyTag::A,
        FamilyTag::B,
        FamilyTag::Z,
    ];
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyTag::X => "X",
            FamilyTag::Y => "Y",
            FamilyTag::A => "A",
            FamilyTag::B => "B",
            FamilyTag::Z => "Z",
        };
        f.write_str(s)
    }
}

impl FromStr for FamilyTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "X" => Ok(FamilyTag::X),
            "Y" => Ok(FamilyTag::Y),
            "A" => Ok(FamilyTag::A),
            "B" => Ok(FamilyTag::B),
            "Z" => Ok(FamilyTag::Z),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Family {
    pub tag: FamilyTag,
    pub n: usize,
}

impl Family {
    pub fn new(tag: FamilyTag, n: usize) -> Self {
        Family { tag, n }
    }

    /// Nominal seat count: 2n, 2n-1, 2n, 2n, n (B_0 is the single seat).
    pub fn seat_count(&self) -> usize {
        let n = self.n;
        match self.tag {
            FamilyTag::X | FamilyTag::A => 2 * n,
            FamilyTag::Y => (2 * n).saturating_sub(1),
            FamilyTag::B => {
                if n == 0 {
                    1
                } else {
                    2 * n
                }
            }
            FamilyTag::Z => n,
        }
    }
}

/// The standard configuration of a family, in canonical form.
pub fn build_config(family: Family) -> SeatGrid {
    let n = family.n as i64;
    let mut seats = Vec::new();
    let mut row = |r: u8, lo: i64, hi: i64| {
        for c in lo..=hi {
            seats.push(Seat::new(r, c));
        }
    };
    match family.tag {
        FamilyTag::X => {
            row(0, 1, n);
            row(1, 1, n);
        }
        FamilyTag::Y => {
            row(0, 1, n - 1);
            row(1, 1, n);
        }
        FamilyTag::A => {
            row(0, 1, n);
            row(1, 2, n + 1);
        }
        FamilyTag::B => {
            if n == 0 {
                row(1, 1, 1);
            } else {
                row(0, 2, n);
                row(1, 1, n + 1);
            }
        }
        FamilyTag::Z => row(0, 1, n),
    }
    SeatGrid::from_seats(seats)
        .expect("family geometry has no duplicates")
        .canonical()
}

/// Exact law of a nonnegative integer outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistribution {
    pmf: BTreeMap<usize, Rational>,
}

impl ExactDistribution {
    pub fn point_mass(k: usize) -> Self {
        ExactDistribution {
            pmf: BTreeMap::from([(k, Rational::one())]),
        }
    }

    pub fn from_pgf(p: &RationalPoly) -> Self {
        let pmf = p
            .coeffs()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect::<BTreeMap<_, _>>();
        debug_assert!(pmf.values().all(|c| !c.is_negative()));
        ExactDistribution { pmf }
    }

    pub fn from_pmf(pmf: BTreeMap<usize, Rational>) -> Self {
        ExactDistribution {
            pmf: pmf.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }

    pub fn pgf(&self) -> RationalPoly {
        let len = self.support_max().map_or(0, |m| m + 1);
        let mut coeffs = vec![Rational::zero(); len];
        for (k, p) in &self.pmf {
            coeffs[*k] = p.clone();
        }
        RationalPoly::from_coeffs(&coeffs)
    }

    pub fn pmf(&self) -> &BTreeMap<usize, Rational> {
        &self.pmf
    }

    pub fn prob(&self, k: usize) -> Rational {
        self.pmf.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support_min(&self) -> Option<usize> {
        self.pmf.keys().next().copied()
    }

    pub fn support_max(&self) -> Option<usize> {
        self.pmf.keys().next_back().copied()
    }

    pub fn total(&self) -> Rational {
        self.pmf.values().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn is_normalized(&self) -> bool {
        self.total().is_one() && self.pmf.values().all(|p| !p.is_negative())
    }

    pub fn mean(&self) -> Rational {
        self.pmf
            .iter()
            .fold(Rational::zero(), |acc, (k, p)| acc + p * Rational::from_integer((*k).into()))
    }

    pub fn variance(&self) -> Rational {
        let m = self.mean();
        self.pmf.iter().fold(Rational::zero(), |acc, (k, p)| {
            let d = Rational::from_integer((*k).into()) - &m;
            acc + p * &d * &d
        })
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: i64) -> Rational {
        if x < 0 {
            return Rational::zero();
        }
        self.pmf
            .range(..=(x as usize))
            .fold(Rational::zero(), |a, (_, p)| a + p)
    }
}

impl Serialize for ExactDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.pmf.len()))?;
        for (k, p) in &self.pmf {
            m.serialize_entry(&k.to_string(), &fmt_rational(p))?;
        }
        m.end()
    }
}

/// Memoized exact law of the seated count for small grids.
///
/// Conditioning on the first seated diner splits the remaining free seats
/// into independent components, whose generating functions multiply. The
/// memo is keyed on the canonical column masks of a component.
#[derive(Debug)]
pub struct ExactOracle {
    limit: usize,
    memo: HashMap<Vec<u8>, RationalPoly>,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl ExactOracle {
    pub fn new() -> Self {
        Self::with_limit(DEFAULT_ORACLE_LIMIT)
    }

    pub fn with_limit(limit: usize) -> Self {
        ExactOracle {
            limit,
            memo: HashMap::new(),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// PGF of the total number of occupied seats once the grid jams,
    /// counting seats already occupied.
    pub fn pgf(&mut self, grid: &SeatGrid) -> Result<RationalPoly> {
        if grid.len() > self.limit {
            return Err(Error::OracleLimit {
                seats: grid.len(),
                limit: self.limit,
            });
        }
        let mut acc = RationalPoly::one().shift(grid.occupied_count());
        for comp in split_components(&grid.free_masks()) {
            let p = self.component(&comp);
            acc = &acc * &p;
        }
        Ok(acc)
    }

    pub fn distribution(&mut self, grid: &SeatGrid) -> Result<ExactDistribution> {
        Ok(ExactDistribution::from_pgf(&self.pgf(grid)?))
    }

    fn component(&mut self, masks: &[u8]) -> RationalPoly {
        let key = canonical_masks(masks);
        if let Some(p) = self.memo.get(&key) {
            return p.clone();
        }
        let seats: usize = key.iter().map(|m| m.count_ones() as usize).sum();
        let mut acc = PolyAccumulator::new();
        for c in 0..key.len() {
            for r in 0..2u8 {
                if key[c] & (1 << r) == 0 {
                    continue;
                }
                let mut rest = key.clone();
                rest[c] = 0;
                if c > 0 {
                    rest[c - 1] &= !(1 << r);
                }
                if c + 1 < rest.len() {
                    rest[c + 1] &= !(1 << r);
                }
                let mut prod = RationalPoly::one();
                for comp in split_components(&rest) {
                    let p = self.component(&comp);
                    prod = &prod * &p;
                }
                acc.add_poly(&prod);
            }
        }
        let seats_q = Rational::new(1.into(), (seats as i64).into());
        let p = acc.finish().scale(&seats_q).shift(1);
        self.memo.insert(key, p.clone());
        p
    }
}

/// Exact law with a fresh oracle at the default limit.
pub fn exact_distribution(grid: &SeatGrid) -> Result<ExactDistribution> {
    ExactOracle::new().distribution(grid)
}

/// Connected components of a column-mask strip. Adjacent columns connect
/// only through a shared row.
fn split_components(masks: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = Vec::new();
    for &m in masks {
        let connected = cur.last().is_some_and(|&prev| prev & m != 0);
        if !connected && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        if m != 0 {
            cur.push(m);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn canonical_masks(masks: &[u8]) -> Vec<u8> {
    let swap = |m: u8| ((m & 1) << 1) | ((m & 2) >> 1);
    let forward = masks.to_vec();
    let reversed: Vec<u8> = masks.iter().rev().copied().collect();
    let swapped: Vec<u8> = masks.iter().map(|&m| swap(m)).collect();
    let both: Vec<u8> = reversed.iter().map(|&m| swap(m)).collect();
    [reversed, swapped, both]
        .into_iter()
        .fold(forward, |best, cand| {
            if cmp_column_masks(&cand, &best) == Ordering::Less {
                cand
            } else {
                best
            }
        })
}

fn cmp_column_masks(a: &[u8], b: &[u8]) -> Ordering {
    for bit in [1u8, 2u8] {
        for i in (0..a.len()).rev() {
            match (a[i] & bit).cmp(&(b[i] & bit)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
    }
    Ordering::Equal
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMode {
    /// Pick uniformly among free seats.
    #[default]
    UniformFree,
    /// Pick uniformly among all seats, retrying until a free one comes up.
    Retry,
}

#[derive(Clone, Debug, Serialize)]
pub struct Simulation {
    pub counts: Vec<u32>,
    pub histogram: BTreeMap<usize, u64>,
}

impl Simulation {
    pub fn trials(&self) -> usize {
        self.counts.len()
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.counts.len() as f64
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.histogram.get(&k).copied().unwrap_or(0) as f64 / self.counts.len() as f64
    }
}

struct Adjacency {
    neighbors: Vec<Vec<usize>>,
    base: u32,
}

impl Adjacency {
    fn new(grid: &SeatGrid) -> Self {
        let free: Vec<Seat> = grid.free_seats().collect();
        let index: HashMap<Seat, usize> = free.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let neighbors = free
            .iter()
            .map(|s| {
                s.neighbors()
                    .iter()
                    .filter_map(|nb| index.get(nb).copied())
                    .collect()
            })
            .collect();
        Adjacency {
            neighbors,
            base: grid.occupied_count() as u32,
        }
    }

    fn run_uniform(&self, rng: &mut impl Rng) -> u32 {
        let m = self.neighbors.len();
        let mut free: Vec<usize> = (0..m).collect();
        let mut pos: Vec<usize> = (0..m).collect();
        let mut alive = vec![true; m];
        let mut seated = 0;
        let remove = |i: usize, free: &mut Vec<usize>, pos: &mut Vec<usize>, alive: &mut Vec<bool>| {
            alive[i] = false;
            let p = pos[i];
            let last = *free.last().unwrap();
            free.swap_remove(p);
            if last != i {
                pos[last] = p;
            }
        };
        while !free.is_empty() {
            let s = free[rng.random_range(0..free.len())];
            seated += 1;
            remove(s, &mut free, &mut pos, &mut alive);
            for &nb in &self.neighbors[s] {
                if alive[nb] {
                    remove(nb, &mut free, &mut pos, &mut alive);
                }
            }
        }
        self.base + seated
    }

    fn run_retry(&self, rng: &mut impl Rng) -> u32 {
        let m = self.neighbors.len();
        let mut alive = vec![true; m];
        let mut left = m;
        let mut seated = 0;
        while left > 0 {
            let s = rng.random_range(0..m);
            if !alive[s] {
                continue;
            }
            seated += 1;
            alive[s] = false;
            left -= 1;
            for &nb in &self.neighbors[s] {
                if alive[nb] {
                    alive[nb] = false;
                    left -= 1;
                }
            }
        }
        self.base + seated
    }
}

/// Runs `trials` independent seatings. Trial `i` draws from the ChaCha8
/// stream `i` under `seed`, so results do not depend on scheduling.
pub fn simulate(grid: &SeatGrid, trials: usize, seed: u64, mode: SelectionMode) -> Result<Simulation> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let adj = Adjacency::new(grid);
    let counts: Vec<u32> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            match mode {
                SelectionMode::UniformFree => adj.run_uniform(&mut rng),
                SelectionMode::Retry => adj.run_retry(&mut rng),
            }
        })
        .collect();
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c as usize).or_insert(0u64) += 1;
    }
    Ok(Simulation { counts, histogram })
}
