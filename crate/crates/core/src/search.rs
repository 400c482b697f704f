//! Exceptional abc triples: exhaustive search with radical-based pruning,
//! a naive reference scan, decomposition witnesses, coprime pair counts and
//! log-log exponent fitting.

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{radical, BoundParams, Filter, Threshold};
use crate::error::{Error, Result};
use crate::sieve::{mobius_table, RadicalIndex, SieveConfig, SieveTables};

/// Number of consecutive c values handed to one parallel work item.
const C_CHUNK: u64 = 512;

/// A coprime solution of `a + b = c` with `a ≤ b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbcTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub rad_abc: u128,
    pub quality: f64,
}

impl AbcTriple {
    /// Builds the triple `(a, b, a + b)` in canonical order, computing the
    /// radical by trial division.
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::domain("triple components must be positive"));
        }
        if a.gcd(&b) != 1 {
            return Err(Error::Precondition(format!("gcd({a}, {b}) ≠ 1")));
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let c = a.checked_add(b).ok_or_else(|| Error::Range("a + b overflows".into()))?;
        let rad_abc = radical(a)? as u128 * radical(b)? as u128 * radical(c)? as u128;
        Ok(Self::from_parts(a, b, c, rad_abc))
    }

    fn from_parts(a: u64, b: u64, c: u64, rad_abc: u128) -> Self {
        AbcTriple { a, b, c, rad_abc, quality: log_ratio(c, rad_abc) }
    }
}

fn log_ratio(c: u64, rad_abc: u128) -> f64 {
    (c as f64).ln() / (rad_abc as f64).ln()
}

/// `log c / log rad(abc)`.
pub fn quality(t: &AbcTriple) -> Result<f64> {
    if t.rad_abc < 2 {
        return Err(Error::domain("quality undefined for rad(abc) < 2"));
    }
    Ok(log_ratio(t.c, t.rad_abc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessPair {
    Ab,
    Ac,
    Bc,
}

impl WitnessPair {
    pub fn label(&self) -> &'static str {
        match self {
            WitnessPair::Ab => "ab",
            WitnessPair::Ac => "ac",
            WitnessPair::Bc => "bc",
        }
    }
}

/// The pair `xy ∈ {ab, ac, bc}` of smallest radical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionWitness {
    pub pair: WitnessPair,
    pub pair_radical: u128,
    /// `c^((2 - 2ε)/3)` in double precision.
    pub bound: f64,
}

/// Picks the smallest of `rad(ab), rad(ac), rad(bc)` given the three
/// radicals; ties go to the earlier label.
pub fn min_pair(rad_a: u64, rad_b: u64, rad_c: u64) -> (WitnessPair, u128) {
    let (ra, rb, rc) = (rad_a as u128, rad_b as u128, rad_c as u128);
    [(WitnessPair::Ab, ra * rb), (WitnessPair::Ac, ra * rc), (WitnessPair::Bc, rb * rc)]
        .into_iter()
        .fold((WitnessPair::Ab, u128::MAX), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// Witness for an exceptional triple, with `pair_radical^(3q) < c^(2q-2p)`
/// checked exactly.
pub fn decomposition_witness(t: &AbcTriple, params: &BoundParams) -> Result<DecompositionWitness> {
    let th = params.threshold();
    if !th.holds(t.rad_abc, t.c) {
        return Err(Error::Precondition(format!(
            "({}, {}, {}) is not exceptional for ε = {}",
            t.a, t.b, t.c, params.epsilon
        )));
    }
    let (pair, pair_radical) = min_pair(radical(t.a)?, radical(t.b)?, radical(t.c)?);
    if !th.pair_holds(pair_radical, t.c) {
        return Err(Error::Precondition(format!(
            "pair radical {pair_radical} not below c^((2-2ε)/3) for c = {}",
            t.c
        )));
    }
    let bound = ((2.0 - 2.0 * params.epsilon.to_f64()) / 3.0 * (t.c as f64).ln()).exp();
    Ok(DecompositionWitness { pair, pair_radical, bound })
}

/// E(N, ε) with tables built on the spot, single-threaded.
pub fn enumerate_exceptional(params: &BoundParams) -> Result<Vec<AbcTriple>> {
    let tables = SieveTables::build(params.n_max)?;
    enumerate_exceptional_with(&tables, params, 1)
}

/// E(N, ε) over prebuilt tables.
///
/// For each c the classes R(r, N) are walked in increasing r; since
/// `rad(a) rad(c) ≤ rad(abc)`, the walk stops once `r · rad(c)` reaches
/// `c^(1-ε)`, and c itself is skipped when `rad(c)` already does. The c
/// range is split into chunks whose results are concatenated in order, so
/// the output does not depend on `threads`.
pub fn enumerate_exceptional_with(
    tables: &SieveTables,
    params: &BoundParams,
    threads: usize,
) -> Result<Vec<AbcTriple>> {
    check_tables(tables, params)?;
    let index = tables.radical_index();
    let th = params.threshold();
    let n = params.n_max;
    let chunks: Vec<(u64, u64)> = (0..)
        .map(|k| (2 + k * C_CHUNK, (1 + (k + 1) * C_CHUNK).min(n)))
        .take_while(|&(lo, _)| lo <= n)
        .collect();
    let run_chunk = |&(lo, hi): &(u64, u64)| {
        let mut buf = Vec::new();
        for c in lo..=hi {
            scan_c(tables, &index, &th, c, &mut |t| buf.push(t));
        }
        buf
    };
    let parts: Vec<Vec<AbcTriple>> = if threads <= 1 {
        chunks.iter().map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Resource(format!("cannot start thread pool: {e}")))?;
        pool.install(|| chunks.par_iter().map(run_chunk).collect())
    };
    Ok(parts.into_iter().flatten().collect())
}

/// Streams E(N, ε) to `sink` in `(c, a)` order without buffering the set.
pub fn scan_exceptional(
    tables: &SieveTables,
    params: &BoundParams,
    mut sink: impl FnMut(AbcTriple),
) -> Result<()> {
    check_tables(tables, params)?;
    let index = tables.radical_index();
    let th = params.threshold();
    for c in 2..=params.n_max {
        scan_c(tables, &index, &th, c, &mut sink);
    }
    Ok(())
}

fn check_tables(tables: &SieveTables, params: &BoundParams) -> Result<()> {
    if tables.n_max() < params.n_max {
        return Err(Error::Precondition(format!(
            "tables cover N = {} but the search needs {}",
            tables.n_max(),
            params.n_max
        )));
    }
    Ok(())
}

fn scan_c(tables: &SieveTables, index: &RadicalIndex, th: &Threshold, c: u64, sink: &mut impl FnMut(AbcTriple)) {
    let rc = tables.rad(c) as u128;
    if th.filter(rc, c) == Filter::NotBelow {
        return;
    }
    let half = c / 2;
    let mut found: Vec<AbcTriple> = Vec::new();
    for (r, members) in index.groups() {
        let partial = r as u128 * rc;
        if th.filter(partial, c) == Filter::NotBelow {
            break;
        }
        let upto = members.partition_point(|&m| m <= half);
        for &a in &members[..upto] {
            let b = c - a;
            let full = partial * tables.rad(b) as u128;
            if th.filter(full, c) == Filter::NotBelow || a.gcd(&c) != 1 {
                continue;
            }
            if th.holds(full, c) {
                found.push(AbcTriple::from_parts(a, b, c, full));
            }
        }
    }
    found.sort_unstable_by_key(|t| t.a);
    found.into_iter().for_each(sink);
}

/// Reference scan over every canonical coprime pair, with radicals from
/// trial division and no pruning.
pub fn enumerate_exceptional_naive(params: &BoundParams) -> Result<Vec<AbcTriple>> {
    let th = params.threshold();
    let n = params.n_max;
    let rads: Vec<u64> = std::iter::once(Ok(0)).chain((1..=n).map(radical)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for c in 2..=n {
        for a in 1..=c / 2 {
            let b = c - a;
            if a.gcd(&b) != 1 {
                continue;
            }
            let rad_abc = rads[a as usize] as u128 * rads[b as usize] as u128 * rads[c as usize] as u128;
            if th.holds(rad_abc, c) {
                out.push(AbcTriple::from_parts(a, b, c, rad_abc));
            }
        }
    }
    Ok(out)
}

/// Ordered pairs `(a, b)` with `a + b ≤ N` and `gcd(a, b) = 1`, by Möbius
/// inversion over the common divisor: `Σ_d μ(d) T(⌊N/d⌋)` where
/// `T(m) = m(m-1)/2` counts all pairs with sum at most m.
pub fn coprime_pair_count(n_max: u64) -> Result<u64> {
    if n_max < 2 {
        return Err(Error::domain(format!("N must be at least 2, got {n_max}")));
    }
    let mu = mobius_table(n_max as usize);
    let total: i128 = (1..=n_max)
        .map(|d| {
            let m = (n_max / d) as i128;
            mu[d as usize] as i128 * (m * (m - 1) / 2)
        })
        .sum();
    Ok(total as u64)
}

/// Least-squares slope of `log count` against `log N`, ignoring zero counts.
pub fn fit_exponent(grid: &[(u64, f64)]) -> Result<f64> {
    if grid.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::domain("grid N values must be strictly increasing"));
    }
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .filter(|&&(_, count)| count > 0.0)
        .map(|&(n, count)| ((n as f64).ln(), count.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 grid points with a nonzero count, got {}",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// One triple as written by the report layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleRecord {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub rad_abc: u128,
    pub quality: f64,
    pub witness_pair: WitnessPair,
    pub witness_radical: u128,
}

impl TripleRecord {
    pub fn from_triple(tables: &SieveTables, t: &AbcTriple) -> Self {
        let (pair, r) = min_pair(tables.rad(t.a), tables.rad(t.b), tables.rad(t.c));
        TripleRecord {
            a: t.a,
            b: t.b,
            c: t.c,
            rad_abc: t.rad_abc,
            quality: t.quality,
            witness_pair: pair,
            witness_radical: r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub count_canonical: u64,
    pub count_ordered: u64,
}

/// |E(N, ε)| over a grid of N, with the fitted growth exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub params: BoundParams,
    pub grid: Vec<CensusRow>,
    pub fitted_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<Vec<TripleRecord>>,
}

/// Powers of ten from 10² up to `n_max`, plus `n_max` itself.
pub fn default_grid(n_max: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = std::iter::successors(Some(100u64), |&n| n.checked_mul(10))
        .take_while(|&n| n <= n_max)
        .collect();
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    grid
}

/// Runs one search at the largest grid point and counts the prefix for each
/// smaller one.
pub fn census(params: &BoundParams, grid: &[u64], threads: usize, include_triples: bool) -> Result<CensusReport> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid N values must be strictly increasing"));
    }
    if let Some(&bad) = grid.iter().find(|&&n| n < 2 || n > params.n_max) {
        return Err(Error::domain(format!("grid point {bad} outside [2, {}]", params.n_max)));
    }
    let config = SieveConfig { threads: threads.max(1), ..Default::default() };
    let tables = SieveTables::build_with(params.n_max, &config)?;
    census_with(&tables, params, grid, threads, include_triples)
}

/// [`census`] over prebuilt tables.
pub fn census_with(
    tables: &SieveTables,
    params: &BoundParams,
    grid: &[u64],
    threads: usize,
    include_triples: bool,
) -> Result<CensusReport> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("grid N values must be strictly increasing"));
    }
    if let Some(&bad) = grid.iter().find(|&&n| n < 2 || n > params.n_max) {
        return Err(Error::domain(format!("grid point {bad} outside [2, {}]", params.n_max)));
    }
    let triples = enumerate_exceptional_with(tables, params, threads)?;
    let rows: Vec<CensusRow> = grid
        .iter()
        .map(|&n| {
            let canonical = triples.partition_point(|t| t.c <= n) as u64;
            CensusRow { n, count_canonical: canonical, count_ordered: 2 * canonical }
        })
        .collect();
    let fit_points: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.count_canonical as f64)).collect();
    let fitted_exponent = fit_exponent(&fit_points).ok();
    let triples = include_triples.then(|| triples.iter().map(|t| TripleRecord::from_triple(tables, t)).collect());
    Ok(CensusReport { params: *params, grid: rows, fitted_exponent, triples })
}
