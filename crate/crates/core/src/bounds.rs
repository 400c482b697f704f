//! Explicit constants from the divisor bound and the radical-class
//! estimate, the ε-optimizer, and the refined `c^(1 - κ/√(log c log log c))`
//! threshold.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::arith::factorize;
use crate::error::{Error, Result};
use crate::hp::{Dyadic, HpReal};
use crate::ratio::Ratio;

/// Fractional bits used when raising to an irrational exponent.
const REAL_POW_BITS: u32 = 64;

/// Working precision for the transcendental threshold.
const THRESHOLD_PRECISION: usize = 320;

/// Relative slack added around the transcendental threshold (2^-240).
const THRESHOLD_SLACK_BITS: u64 = 240;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `n^ε (2/ε)^(2^(1/ε))`, bounding τ(n).
    Divisor,
    /// `N^ε ∏_{p|r} 1/(p^ε - 1)`, bounding |R(r, N)|.
    RadicalClass,
    /// The divisor-style bound at the grid-optimal ε.
    Optimized,
}

#[derive(Clone, Debug)]
pub struct BoundEvaluation {
    pub epsilon: Ratio,
    pub n_scale: u64,
    pub bound_value: HpReal,
    pub kind: BoundKind,
}

impl BoundEvaluation {
    /// `n^ε · (2/ε)^(2^(1/ε))`.
    pub fn divisor(n: u64, epsilon: Ratio) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        let value = power_of_int(n, epsilon)?.mul(&divisor_bound_constant(epsilon)?);
        Ok(BoundEvaluation { epsilon, n_scale: n, bound_value: value, kind: BoundKind::Divisor })
    }

    pub fn radical_class(r: u64, n_max: u64, epsilon: Ratio) -> Result<Self> {
        Ok(BoundEvaluation {
            epsilon,
            n_scale: n_max,
            bound_value: radical_class_bound(r, n_max, epsilon)?,
            kind: BoundKind::RadicalClass,
        })
    }

    /// Divisor-style bound `N^ε* (2/ε*)^(2^(1/ε*))` at the optimizer's ε*.
    pub fn optimized(n_scale: u64) -> Result<Self> {
        let opt = optimize_epsilon(n_scale)?;
        let mut eval = Self::divisor(n_scale, opt.epsilon_star)?;
        eval.kind = BoundKind::Optimized;
        Ok(eval)
    }
}

fn check_epsilon(epsilon: Ratio, allow_one: bool) -> Result<()> {
    let upper_ok = if allow_one { epsilon <= Ratio::one() } else { epsilon.is_proper() };
    if epsilon.is_zero() || !upper_ok {
        return Err(Error::domain(format!("epsilon out of range: {epsilon}")));
    }
    Ok(())
}

/// `x^ε` for an integer `x`; exact roots when the denominator is small,
/// repeated square roots otherwise.
fn power_of_int(x: u64, epsilon: Ratio) -> Result<HpReal> {
    let base = HpReal::from_int(x);
    if epsilon.denom() <= 4096 {
        base.pow_ratio(epsilon)
    } else {
        base.pow_real(&HpReal::from_ratio(epsilon), REAL_POW_BITS)
    }
}

/// `(2/ε)^(2^(1/ε))` for `1/64 ≤ ε ≤ 1`.
pub fn divisor_bound_constant(epsilon: Ratio) -> Result<HpReal> {
    check_epsilon(epsilon, true)?;
    if epsilon < Ratio::new(1, 64)? {
        return Err(Error::Range(format!(
            "epsilon {epsilon} below 1/64: 2^(1/ε) overflows the exponent range"
        )));
    }
    let (p, q) = (epsilon.numer(), epsilon.denom());
    let base = HpReal::from_ratio(Ratio::new(2 * q, p)?);
    if q % p == 0 {
        let exponent = BigUint::one() << (q / p);
        return Ok(base.pow(&exponent));
    }
    // 2^(q/p) is irrational here.
    let exponent = power_of_int(2, Ratio::new(q % p, p)?)?;
    let exponent = exponent.mul(&HpReal::from_int(BigUint::one() << (q / p)));
    base.pow_real(&exponent, REAL_POW_BITS)
}

/// `N^ε · ∏_{p | r} 1/(p^ε - 1)`, an upper bound for |R(r, N)|.
pub fn radical_class_bound(r: u64, n_max: u64, epsilon: Ratio) -> Result<HpReal> {
    check_epsilon(epsilon, false)?;
    if r == 0 || n_max == 0 {
        return Err(Error::domain("r and N must be positive"));
    }
    let f = factorize(r)?;
    if !f.is_squarefree() {
        return Err(Error::domain(format!("{r} is not squarefree")));
    }
    let mut acc = power_of_int(n_max, epsilon)?;
    for p in f.primes() {
        let denom = power_of_int(p, epsilon)?.sub(&HpReal::one())?;
        acc = acc.div(&denom)?;
    }
    Ok(acc)
}

/// `g(ε) = ε log N + 2^(1/ε) log(2/ε)`, the log of `N^ε (2/ε)^(2^(1/ε))`.
pub fn log_divisor_bound(epsilon: f64, log_n: f64) -> f64 {
    epsilon * log_n + (1.0 / epsilon).exp2() * (2.0 / epsilon).ln()
}

#[derive(Clone, Debug)]
pub struct OptimizedEpsilon {
    pub epsilon_star: Ratio,
    pub log_bound: f64,
    /// Every grid point evaluated, in evaluation order.
    pub evaluated: Vec<(Ratio, f64)>,
}

const GRID_POINTS: usize = 256;
const REFINE_POINTS: usize = 64;
const REFINE_ROUNDS: usize = 2;
const GRID_DENOM: u64 = 1_000_000;

/// Grid search for the ε minimizing [`log_divisor_bound`].
pub fn optimize_epsilon(n_scale: u64) -> Result<OptimizedEpsilon> {
    if n_scale < 16 {
        return Err(Error::domain(format!("optimizer needs N ≥ 16, got {n_scale}")));
    }
    let log_n = (n_scale as f64).ln();
    let mut evaluated: Vec<(Ratio, f64)> = Vec::new();
    let eval_grid = |lo: f64, hi: f64, points: usize, include_hi: bool, out: &mut Vec<(Ratio, f64)>| {
        let span = if include_hi { points - 1 } else { points };
        let mut grid: Vec<Ratio> = (0..points)
            .map(|i| lo * (hi / lo).powf(i as f64 / span as f64))
            .map(|e| {
                let num = ((e * GRID_DENOM as f64).round() as u64).clamp(1, GRID_DENOM - 1);
                Ratio::new(num, GRID_DENOM).expect("nonzero denominator")
            })
            .collect();
        grid.dedup();
        let start = out.len();
        for e in grid {
            if out.iter().all(|&(seen, _)| seen != e) {
                out.push((e, log_divisor_bound(e.to_f64(), log_n)));
            }
        }
        start
    };

    eval_grid(1.0 / 64.0, 1.0, GRID_POINTS, false, &mut evaluated);
    let mut best = argmin(&evaluated);
    for _ in 0..REFINE_ROUNDS {
        let mut sorted: Vec<Ratio> = evaluated.iter().map(|&(e, _)| e).collect();
        sorted.sort();
        let pos = sorted.binary_search(&evaluated[best].0).expect("present");
        let lo = sorted[pos.saturating_sub(1)].to_f64();
        let hi = sorted[(pos + 1).min(sorted.len() - 1)].to_f64();
        eval_grid(lo, hi, REFINE_POINTS, true, &mut evaluated);
        best = argmin(&evaluated);
    }
    let (epsilon_star, log_bound) = evaluated[best];
    Ok(OptimizedEpsilon { epsilon_star, log_bound, evaluated })
}

fn argmin(points: &[(Ratio, f64)]) -> usize {
    points
        .iter()
        .enumerate()
        .fold(0, |best, (i, &(_, g))| if g < points[best].1 { i } else { best })
}

/// `c^(1 - κ/√(log c · log log c))` with natural logarithms.
pub fn refined_threshold(c: u64, kappa: Ratio) -> Result<HpReal> {
    if c < 16 {
        return Err(Error::domain(format!("refined threshold needs c ≥ 16, got {c}")));
    }
    if kappa.is_zero() {
        return Err(Error::domain("kappa must be positive"));
    }
    let p = THRESHOLD_PRECISION;
    let rm = RoundingMode::ToEven;
    let mut cc = Consts::new().map_err(|e| Error::Range(format!("{e:?}")))?;
    let big_c = BigFloat::from_u64(c, p);
    let ln_c = big_c.ln(p, rm, &mut cc);
    let ln_ln_c = ln_c.ln(p, rm, &mut cc);
    let root = ln_c.mul(&ln_ln_c, p, rm).sqrt(p, rm);
    let k = BigFloat::from_u64(kappa.numer(), p).div(&BigFloat::from_u64(kappa.denom(), p), p, rm);
    let exponent = BigFloat::from_u64(1, p).sub(&k.div(&root, p, rm), p, rm);
    let value = exponent.mul(&ln_c, p, rm).exp(p, rm, &mut cc);
    bigfloat_to_hp(&value)
}

fn bigfloat_to_hp(x: &BigFloat) -> Result<HpReal> {
    let (words, _bits, sign, e, _) = x
        .as_raw_parts()
        .ok_or_else(|| Error::Range("threshold evaluation produced a non-finite value".into()))?;
    if sign == Sign::Neg {
        return Err(Error::Range("negative threshold".into()));
    }
    let mant = words.iter().rev().fold(BigUint::default(), |acc, &w| (acc << 64u32) | BigUint::from(w));
    let exp = e as i128 - 64 * words.len() as i128;
    let k = THRESHOLD_SLACK_BITS;
    let scale = BigUint::one() << k;
    let lo = Dyadic::new(&mant * (&scale - 1u32), exp - k as i128);
    let hi = Dyadic::new(&mant * (&scale + 1u32), exp - k as i128);
    Ok(HpReal::from_bounds(lo, hi))
}
