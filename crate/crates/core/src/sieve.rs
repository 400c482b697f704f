//! Bulk tables of rad(n) and τ(n), radical classes R(r, N), and counts of
//! integers with small radical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Default cap on the sieve length.
pub const DEFAULT_MAX_N: u64 = 100_000_000;

const CACHE_MAGIC: &[u8; 8] = b"RADSIEVE";
const CACHE_VERSION: u32 = 1;
const DEFAULT_SEGMENT: usize = 1 << 16;

/// Element width of the stored tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Storage {
    #[default]
    U64,
    /// Halves memory; only valid for N < 2^32.
    U32,
}

#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub max_n: u64,
    pub storage: Storage,
    /// 1 selects the plain serial sieve; more selects the segmented sieve
    /// run on a pool of that many threads.
    pub threads: usize,
    pub segment_len: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { max_n: DEFAULT_MAX_N, storage: Storage::U64, threads: 1, segment_len: DEFAULT_SEGMENT }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Column {
    U32(Vec<u32>),
    U64(Vec<u64>),
}

impl Column {
    #[inline]
    fn get(&self, i: usize) -> u64 {
        match self {
            Column::U32(v) => v[i] as u64,
            Column::U64(v) => v[i],
        }
    }
}

trait Cell: Copy + Send + Sync + Into<u64> + 'static {
    fn of(v: u64) -> Self;
    fn wrap(v: Vec<Self>) -> Column;
}

impl Cell for u32 {
    #[inline]
    fn of(v: u64) -> Self {
        v as u32
    }
    fn wrap(v: Vec<Self>) -> Column {
        Column::U32(v)
    }
}

impl Cell for u64 {
    #[inline]
    fn of(v: u64) -> Self {
        v
    }
    fn wrap(v: Vec<Self>) -> Column {
        Column::U64(v)
    }
}

/// rad(n) and τ(n) for every n in `1..=n_max`. Index 0 is unused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveTables {
    n_max: u64,
    rad: Column,
    tau: Column,
}

impl SieveTables {
    pub fn build(n_max: u64) -> Result<Self> {
        Self::build_with(n_max, &SieveConfig::default())
    }

    pub fn build_with(n_max: u64, config: &SieveConfig) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::domain(format!("sieve length must be at least 2, got {n_max}")));
        }
        if n_max > config.max_n {
            return Err(Error::Resource(format!(
                "sieve length {n_max} exceeds the configured budget {}",
                config.max_n
            )));
        }
        if config.storage == Storage::U32 && n_max >= 1 << 32 {
            return Err(Error::domain("32-bit storage requires N < 2^32"));
        }
        let n = usize::try_from(n_max).map_err(|_| Error::Resource("N does not fit in memory".into()))?;
        match config.storage {
            Storage::U32 => Self::build_typed::<u32>(n, config),
            Storage::U64 => Self::build_typed::<u64>(n, config),
        }
    }

    fn build_typed<T: Cell>(n: usize, config: &SieveConfig) -> Result<Self> {
        let (rad, tau) = if config.threads <= 1 {
            serial_tables::<T>(n)
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::Resource(format!("cannot start thread pool: {e}")))?;
            pool.install(|| segmented_tables::<T>(n, config.segment_len.max(1)))
        };
        Ok(SieveTables { n_max: n as u64, rad: T::wrap(rad), tau: T::wrap(tau) })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn storage(&self) -> Storage {
        match self.rad {
            Column::U32(_) => Storage::U32,
            Column::U64(_) => Storage::U64,
        }
    }

    /// rad(n) for `1 ≤ n ≤ N`.
    #[inline]
    pub fn rad(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n <= self.n_max);
        self.rad.get(n as usize)
    }

    /// τ(n) for `1 ≤ n ≤ N`.
    #[inline]
    pub fn tau(&self, n: u64) -> u64 {
        debug_assert!(n >= 1 && n <= self.n_max);
        self.tau.get(n as usize)
    }

    /// Number of n ≤ N with rad(n) ≤ ⌊N^λ⌋, by scanning the table.
    pub fn count_small_radical(&self, lambda: Ratio) -> Result<u64> {
        let cutoff = small_radical_cutoff(self.n_max, lambda)?;
        Ok((1..=self.n_max).filter(|&n| self.rad(n) <= cutoff).count() as u64)
    }

    /// Groups `1..=N` by radical, for scans that walk classes in order of
    /// increasing radical.
    pub fn radical_index(&self) -> RadicalIndex {
        let n = self.n_max as usize;
        let mut start = vec![0u32; n + 2];
        for i in 1..=n {
            start[self.rad.get(i) as usize + 1] += 1;
        }
        for r in 1..=n + 1 {
            start[r] += start[r - 1];
        }
        let mut fill = start.clone();
        let mut members = vec![0u64; n];
        for i in 1..=n {
            let r = self.rad.get(i) as usize;
            members[fill[r] as usize] = i as u64;
            fill[r] += 1;
        }
        let groups = (1..=n)
            .filter(|&r| start[r + 1] > start[r])
            .map(|r| (r as u64, start[r] as usize, start[r + 1] as usize))
            .collect();
        RadicalIndex { groups, members }
    }

    /// Writes the little-endian cache file.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let n = u32::try_from(self.n_max).map_err(|_| Error::Cache("cache files require N < 2^32".into()))?;
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        for col in [&self.rad, &self.tau] {
            for i in 1..=self.n_max as usize {
                w.write_all(&col.get(i).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path, storage: Storage) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|_| Error::Cache("truncated header".into()))?;
        if &header[..8] != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        if n < 2 {
            return Err(Error::Cache(format!("invalid N = {n}")));
        }
        let read_col = |r: &mut BufReader<File>| -> Result<Column> {
            let mut buf = [0u8; 8];
            let mut vals = Vec::with_capacity(n + 1);
            vals.push(0u64);
            for _ in 0..n {
                r.read_exact(&mut buf).map_err(|_| Error::Cache("truncated table".into()))?;
                vals.push(u64::from_le_bytes(buf));
            }
            Ok(match storage {
                Storage::U64 => Column::U64(vals),
                Storage::U32 => Column::U32(vals.into_iter().map(|v| v as u32).collect()),
            })
        };
        let rad = read_col(&mut r)?;
        let tau = read_col(&mut r)?;
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::Cache("trailing bytes".into()));
        }
        Ok(SieveTables { n_max: n as u64, rad, tau })
    }

    /// Loads `path` when it holds tables for exactly `n_max`, otherwise
    /// builds them and (re)writes the cache.
    pub fn load_or_build(path: &Path, n_max: u64, config: &SieveConfig) -> Result<Self> {
        if let Ok(t) = Self::read_cache(path, config.storage) {
            if t.n_max == n_max {
                return Ok(t);
            }
        }
        let t = Self::build_with(n_max, config)?;
        t.write_cache(path)?;
        Ok(t)
    }
}

/// Integers `1..=N` bucketed by radical, buckets in increasing radical and
/// members in increasing order.
#[derive(Clone, Debug)]
pub struct RadicalIndex {
    groups: Vec<(u64, usize, usize)>,
    members: Vec<u64>,
}

impl RadicalIndex {
    pub fn groups(&self) -> impl Iterator<Item = (u64, &[u64])> + '_ {
        self.groups.iter().map(|&(r, s, e)| (r, &self.members[s..e]))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

fn serial_tables<T: Cell>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut rad = vec![T::of(1); n + 1];
    rad[0] = T::of(0);
    for p in 2..=n {
        if rad[p].into() == 1 {
            for m in (p..=n).step_by(p) {
                rad[m] = T::of(rad[m].into() * p as u64);
            }
        }
    }

    let spf = smallest_prime_factors(n);
    let mut tau = vec![T::of(1); n + 1];
    tau[0] = T::of(0);
    let mut expo = vec![0u8; n + 1];
    for i in 2..=n {
        let p = spf[i] as usize;
        let m = i / p;
        if m > 1 && spf[m] as usize == p {
            expo[i] = expo[m] + 1;
            let t: u64 = tau[m].into();
            tau[i] = T::of(t / (expo[m] as u64 + 1) * (expo[i] as u64 + 1));
        } else {
            expo[i] = 1;
            tau[i] = T::of(tau[m].into() * 2);
        }
    }
    (rad, tau)
}

fn segmented_tables<T: Cell>(n: usize, segment: usize) -> (Vec<T>, Vec<T>) {
    let small = primes_up_to(n.sqrt());
    let mut rad = vec![T::of(0); n + 1];
    let mut tau = vec![T::of(0); n + 1];
    rad.par_chunks_mut(segment)
        .zip(tau.par_chunks_mut(segment))
        .enumerate()
        .for_each(|(k, (rad_seg, tau_seg))| {
            let lo = k * segment;
            let len = rad_seg.len();
            let mut rest: Vec<u64> = (lo..lo + len).map(|v| v as u64).collect();
            let mut r = vec![1u64; len];
            let mut t = vec![1u64; len];
            for &p in &small {
                let p = p as usize;
                let first = lo.div_ceil(p) * p;
                for v in (first.max(p)..lo + len).step_by(p) {
                    let j = v - lo;
                    let mut e = 0;
                    while rest[j] % p as u64 == 0 {
                        rest[j] /= p as u64;
                        e += 1;
                    }
                    r[j] *= p as u64;
                    t[j] *= e + 1;
                }
            }
            for j in 0..len {
                if lo + j == 0 {
                    continue;
                }
                if rest[j] > 1 {
                    r[j] *= rest[j];
                    t[j] *= 2;
                }
                rad_seg[j] = T::of(r[j]);
                tau_seg[j] = T::of(t[j]);
            }
        });
    (rad, tau)
}

/// Smallest prime factor of every n ≤ `n` (0 and 1 map to themselves).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=n as u32).collect();
    let mut i = 2;
    while i * i <= n {
        if spf[i] == i as u32 {
            for m in (i * i..=n).step_by(i) {
                if spf[m] == m as u32 {
                    spf[m] = i as u32;
                }
            }
        }
        i += 1;
    }
    spf
}

pub fn primes_up_to(n: usize) -> Vec<u32> {
    let spf = smallest_prime_factors(n);
    (2..=n).filter(|&i| spf[i] == i as u32).map(|i| i as u32).collect()
}

/// Euler's φ for `0..=n` (φ(0) stored as 0).
pub fn totient_table(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            for m in (p..=n).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    phi
}

/// Möbius μ for `0..=n` (μ(0) stored as 0).
pub fn mobius_table(n: usize) -> Vec<i8> {
    let spf = smallest_prime_factors(n);
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    for i in 2..=n {
        let p = spf[i] as usize;
        let m = i / p;
        mu[i] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

/// All squarefree integers in `[1, limit]`.
pub fn squarefree_list(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut keep = vec![true; n + 1];
    let mut k = 2usize;
    while k * k <= n {
        for m in (k * k..=n).step_by(k * k) {
            keep[m] = false;
        }
        k += 1;
    }
    (1..=n).filter(|&i| keep[i]).map(|i| i as u64).collect()
}

/// The set R(r, N) = { n ≤ N : rad(n) = r }.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadicalClass {
    pub r: u64,
    pub n_max: u64,
    pub members: Vec<u64>,
}

impl RadicalClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Enumerates R(r, N) by depth-first search over exponent vectors, primes
/// of `r` taken in increasing order and each exponent starting at 1.
pub fn enumerate_radical_class(r: u64, n_max: u64) -> Result<RadicalClass> {
    if r == 0 {
        return Err(Error::domain("radical class of 0"));
    }
    let f = factorize(r)?;
    if !f.is_squarefree() {
        return Err(Error::domain(format!("{r} is not squarefree")));
    }
    let mut members = Vec::new();
    if r <= n_max {
        let primes: Vec<u128> = f.primes().map(u128::from).collect();
        // suffix[i] = product of primes[i..], the least any completion can add.
        let mut suffix = vec![1u128; primes.len() + 1];
        for i in (0..primes.len()).rev() {
            suffix[i] = suffix[i + 1] * primes[i];
        }
        dfs(&primes, &suffix, 0, 1, n_max as u128, &mut members);
    }
    members.sort_unstable();
    Ok(RadicalClass { r, n_max, members })
}

fn dfs(primes: &[u128], suffix: &[u128], i: usize, partial: u128, limit: u128, out: &mut Vec<u64>) {
    if i == primes.len() {
        out.push(partial as u64);
        return;
    }
    let mut v = partial * primes[i];
    while v * suffix[i + 1] <= limit {
        dfs(primes, suffix, i + 1, v, limit, out);
        v *= primes[i];
    }
}

/// ⌊N^λ⌋ computed exactly as the q-th integer root of N^p.
pub fn small_radical_cutoff(n_max: u64, lambda: Ratio) -> Result<u64> {
    if lambda > Ratio::one() {
        return Err(Error::domain(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let q = u32::try_from(lambda.denom()).map_err(|_| Error::Range("lambda denominator too large".into()))?;
    let p = u32::try_from(lambda.numer()).map_err(|_| Error::Range("lambda numerator too large".into()))?;
    Ok(BigUint::from(n_max).pow(p).nth_root(q).to_u64().expect("root ≤ N"))
}

/// Number of n ≤ N with rad(n) ≤ ⌊N^λ⌋, from a freshly built table.
pub fn count_small_radical(n_max: u64, lambda: Ratio) -> Result<u64> {
    small_radical_cutoff(n_max, lambda)?;
    SieveTables::build(n_max)?.count_small_radical(lambda)
}

/// Same count as [`count_small_radical`], summed class by class over the
/// squarefree r ≤ N^λ.
pub fn count_small_radical_by_classes(n_max: u64, lambda: Ratio) -> Result<u64> {
    let cutoff = small_radical_cutoff(n_max, lambda)?;
    squarefree_list(cutoff)
        .into_iter()
        .map(|r| enumerate_radical_class(r, n_max).map(|c| c.len() as u64))
        .sum()
}
