//! Single-integer arithmetic: factorization, radical, divisor count,
//! coprimality and the exact test `rad < c^(1-ε)`.

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::Ratio;

/// Largest integer accepted by [`factorize`].
pub const MAX_FACTOR_INPUT: u64 = i64::MAX as u64;

/// Largest denominator allowed for ε in [`BoundParams`].
pub const MAX_EPSILON_DENOM: u64 = 1000;

/// Relative distance from equality below which the floating-point
/// pre-filter defers to exact integer comparison.
pub const FLOAT_FILTER_MARGIN: f64 = 1e-9;

/// Canonical prime factorization of a positive integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Builds a factorization from `(prime, exponent)` pairs, checking the
    /// ordering and exponent invariants. Primality of the bases is not
    /// re-verified.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut value: u64 = 1;
        let mut last = 1;
        for &(p, e) in &factors {
            if p <= last || e == 0 {
                return Err(Error::domain(
                    "factors must have strictly increasing bases and positive exponents",
                ));
            }
            last = p;
            let pe = p
                .checked_pow(e)
                .and_then(|pe| value.checked_mul(pe))
                .filter(|&v| v <= MAX_FACTOR_INPUT)
                .ok_or_else(|| Error::Range("factorization value exceeds 2^63 - 1".into()))?;
            value = pe;
        }
        Ok(Factorization { value, factors })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Multiplies the prime powers back together.
    pub fn recompose(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Trial division by 2, 3 and then the 6k ± 1 wheel up to √n.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::domain("cannot factorize 0"));
    }
    if n > MAX_FACTOR_INPUT {
        return Err(Error::domain(format!("{n} exceeds 2^63 - 1")));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut strip = |p: u64, rest: &mut u64| {
        if *rest % p == 0 {
            let mut e = 0;
            while *rest % p == 0 {
                *rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    };
    strip(2, &mut rest);
    strip(3, &mut rest);
    let mut k = 5u64;
    while k * k <= rest {
        strip(k, &mut rest);
        strip(k + 2, &mut rest);
        k += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { value: n, factors })
}

/// Product of the distinct primes dividing `n`; `radical(1) = 1`.
pub fn radical(n: u64) -> Result<u64> {
    Ok(factorize(n)?.radical())
}

/// τ(n), the number of positive divisors.
pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factorize(n)?.divisor_count())
}

pub fn is_squarefree(n: u64) -> Result<bool> {
    Ok(factorize(n)?.is_squarefree())
}

pub fn is_coprime(a: u64, b: u64) -> Result<bool> {
    if a == 0 || b == 0 {
        return Err(Error::domain("coprimality is only defined for positive integers"));
    }
    Ok(a.gcd(&b) == 1)
}

/// rad of a product of pairwise-coprime parts, formed as the product of
/// the individual radicals so the full product never materializes.
pub fn radical_of_coprime_product(parts: &[u64]) -> Result<u128> {
    for (i, &x) in parts.iter().enumerate() {
        if x == 0 {
            return Err(Error::domain("parts must be positive"));
        }
        for &y in &parts[i + 1..] {
            if x.gcd(&y) != 1 {
                return Err(Error::Precondition(format!(
                    "parts {x} and {y} are not coprime"
                )));
            }
        }
    }
    parts.iter().try_fold(1u128, |acc, &x| {
        acc.checked_mul(radical(x)? as u128)
            .ok_or_else(|| Error::Range("radical product exceeds 128 bits".into()))
    })
}

/// ε together with the search range N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundParams {
    pub epsilon: Ratio,
    pub n_max: u64,
}

impl BoundParams {
    pub fn new(epsilon: Ratio, n_max: u64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        if epsilon.denom() > MAX_EPSILON_DENOM {
            return Err(Error::domain(format!(
                "epsilon denominator {} exceeds {MAX_EPSILON_DENOM}",
                epsilon.denom()
            )));
        }
        if n_max < 2 {
            return Err(Error::domain(format!("N must be at least 2, got {n_max}")));
        }
        Ok(BoundParams { epsilon, n_max })
    }

    pub fn threshold(&self) -> Threshold {
        Threshold { p: self.epsilon.numer() as u32, q: self.epsilon.denom() as u32, exponent: 1.0 - self.epsilon.to_f64() }
    }
}

fn validate_epsilon(epsilon: Ratio) -> Result<()> {
    if epsilon.is_zero() || !epsilon.is_proper() {
        return Err(Error::domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Precomputed form of the test `rad < c^(1-ε)` for a fixed ε = p/q.
#[derive(Clone, Copy, Debug)]
pub struct Threshold {
    p: u32,
    q: u32,
    exponent: f64,
}

/// Outcome of the floating-point pre-filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Filter {
    Below,
    NotBelow,
    Undecided,
}

impl Threshold {
    pub fn new(epsilon: Ratio) -> Result<Self> {
        validate_epsilon(epsilon)?;
        let p = u32::try_from(epsilon.numer()).map_err(|_| Error::Range("epsilon numerator too large".into()))?;
        let q = u32::try_from(epsilon.denom()).map_err(|_| Error::Range("epsilon denominator too large".into()))?;
        Ok(Threshold { p, q, exponent: 1.0 - epsilon.to_f64() })
    }

    /// `c^(1-ε)` in double precision; only for pre-screening.
    pub fn approx(&self, c: u64) -> f64 {
        (self.exponent * (c as f64).ln()).exp()
    }

    /// Classifies `value < c^(1-ε)` in log space, refusing to decide inside
    /// the relative margin.
    pub fn filter(&self, value: u128, c: u64) -> Filter {
        let lhs = (value as f64).ln();
        let rhs = self.exponent * (c as f64).ln();
        if lhs < rhs - FLOAT_FILTER_MARGIN {
            Filter::Below
        } else if lhs > rhs + FLOAT_FILTER_MARGIN {
            Filter::NotBelow
        } else {
            Filter::Undecided
        }
    }

    /// `value^q < c^(q-p)` in integer arithmetic.
    pub fn exact(&self, value: u128, c: u64) -> bool {
        let (q, qp) = (self.q, self.q - self.p);
        if let (Some(lhs), Some(rhs)) = (value.checked_pow(q), (c as u128).checked_pow(qp)) {
            return lhs < rhs;
        }
        BigUint::from(value).pow(q) < BigUint::from(c).pow(qp)
    }

    pub fn holds(&self, value: u128, c: u64) -> bool {
        match self.filter(value, c) {
            Filter::Below => true,
            Filter::NotBelow => false,
            Filter::Undecided => self.exact(value, c),
        }
    }

    /// `value^(3q) < c^(2q-2p)`, i.e. `value < c^((2-2ε)/3)`.
    pub fn pair_holds(&self, value: u128, c: u64) -> bool {
        let (q3, qp2) = (3 * self.q, 2 * (self.q - self.p));
        BigUint::from(value).pow(q3) < BigUint::from(c).pow(qp2)
    }
}

/// Exact decision of `rad_value < c^(1-ε)`.
pub fn below_threshold(rad_value: u128, c: u64, epsilon: Ratio) -> Result<bool> {
    if rad_value == 0 || c == 0 {
        return Err(Error::domain("radical and c must be positive"));
    }
    Ok(Threshold::new(epsilon)?.holds(rad_value, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eps(p: u64, q: u64) -> Ratio {
        Ratio::new(p, q).unwrap()
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors().is_empty());
        assert_eq!(factorize(72).unwrap().factors(), &[(2, 3), (3, 2)]);
        assert_eq!(factorize(9973).unwrap().factors(), &[(9973, 1)]);
        assert!(factorize(0).is_err());
        assert!(factorize(u64::MAX).is_err());
        // 2^61 - 1 is prime; exercises the full wheel.
        let m61 = (1u64 << 61) - 1;
        assert_eq!(factorize(m61).unwrap().factors(), &[(m61, 1)]);
    }

    #[test]
    fn radical_examples() {
        assert_eq!(radical(1).unwrap(), 1);
        assert_eq!(radical(72).unwrap(), 6);
        assert_eq!(radical(6436341).unwrap(), 327);
        assert!(radical(0).is_err());
    }

    #[test]
    fn divisor_count_examples() {
        assert_eq!(divisor_count(1).unwrap(), 1);
        assert_eq!(divisor_count(32).unwrap(), 6);
        assert_eq!(divisor_count(12).unwrap(), 6);
        assert!(divisor_count(0).is_err());
    }

    #[test]
    fn coprime_examples() {
        assert!(is_coprime(1, 1).unwrap());
        assert!(is_coprime(8, 9).unwrap());
        assert!(!is_coprime(6, 9).unwrap());
        assert!(is_coprime(0, 3).is_err());
    }

    #[test]
    fn coprime_product_radical() {
        assert_eq!(radical_of_coprime_product(&[1, 8, 9]).unwrap(), 6);
        assert_eq!(radical_of_coprime_product(&[72]).unwrap(), 6);
        assert_eq!(radical_of_coprime_product(&[2, 3, 5]).unwrap(), 30);
        assert!(matches!(
            radical_of_coprime_product(&[4, 6]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn threshold_examples() {
        assert!(below_threshold(6, 9, eps(1, 10)).unwrap());
        assert!(!below_threshold(2, 2, eps(1, 10)).unwrap());
        for c in [2u64, 17, 1 << 40] {
            assert!(!below_threshold(c as u128, c, eps(3, 7)).unwrap());
        }
        assert!(below_threshold(6, 9, eps(0, 1)).is_err());
        assert!(below_threshold(6, 9, eps(5, 4)).is_err());
        assert!(below_threshold(6, 9, eps(1, 1)).is_err());
    }

    #[test]
    fn bound_params_validation() {
        assert!(BoundParams::new(eps(1, 10), 10).is_ok());
        assert!(BoundParams::new(eps(1, 10), 1).is_err());
        assert!(BoundParams::new(eps(1, 1001), 10).is_err());
        assert!(BoundParams::new(eps(1, 1), 10).is_err());
    }

    #[test]
    fn divisor_bound_at_half() {
        // τ(n) ≤ 256 √n  ⇔  τ(n)² ≤ 65536 n
        for n in 1..=100_000u64 {
            let t = divisor_count(n).unwrap();
            assert!(t * t <= 65536 * n, "n = {n}");
        }
    }

    fn naive_radical(n: u64) -> u64 {
        (2..=n).filter(|&p| n % p == 0 && (2..p).all(|d| p % d != 0)).product()
    }

    proptest! {
        #[test]
        fn radical_divides_and_is_squarefree(n in 1u64..1_000_000_000_000) {
            let r = radical(n).unwrap();
            prop_assert_eq!(n % r, 0);
            prop_assert!(is_squarefree(r).unwrap());
        }

        #[test]
        fn radical_matches_naive(n in 1u64..3000) {
            prop_assert_eq!(radical(n).unwrap(), naive_radical(n));
        }

        #[test]
        fn radical_is_multiplicative(m in 1u64..1_000_000, n in 1u64..1_000_000) {
            prop_assume!(m.gcd(&n) == 1);
            prop_assert_eq!(radical(m * n).unwrap(), radical(m).unwrap() * radical(n).unwrap());
        }

        #[test]
        fn factorization_round_trips(n in 1u64..=MAX_FACTOR_INPUT >> 24) {
            let f = factorize(n).unwrap();
            prop_assert_eq!(f.recompose(), n);
            let rebuilt = Factorization::from_factors(f.factors().to_vec()).unwrap();
            prop_assert_eq!(rebuilt.value(), n);
        }

        #[test]
        fn threshold_matches_bigint(
            rad in 1u128..(1u128 << 64),
            c in 2u64..(1u64 << 40),
            q in 2u64..=60,
            p_seed in 0u64..1000,
        ) {
            let p = 1 + p_seed % (q - 1);
            let e = eps(p, q);
            let (p, q) = (e.numer() as u32, e.denom() as u32);
            let expected = BigUint::from(rad).pow(q) < BigUint::from(c).pow(q - p);
            prop_assert_eq!(below_threshold(rad, c, e).unwrap(), expected);
        }
    }
}
