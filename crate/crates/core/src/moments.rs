//! Exact free moment/cumulant transforms and weighted partition counts.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::enumerate::{for_each_base, for_each_member, CategoryId};
use crate::error::{check_limit, Error, Result};
use crate::partition::Partition;

pub const MAX_SERIES_ORDER: usize = 14;
pub const MAX_CHARACTER_POINTS: usize = 10;
pub const MAX_GROUP_SIZE: usize = 6;
pub const MAX_GROUP_POWER: usize = 8;
pub const MAX_NCJOIN: usize = 7;

fn series_guard(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidParameters("series must have at least one term".into()));
    }
    check_limit("series order", len, MAX_SERIES_ORDER)
}

/// Moments `m_1..m_K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentSeries(Vec<BigRational>);

/// Free cumulants `κ_1..κ_K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantSeries(Vec<BigRational>);

macro_rules! series_impl {
    ($t:ident) => {
        impl $t {
            pub fn new(values: Vec<BigRational>) -> Result<Self> {
                if values.is_empty() {
                    return Err(Error::InvalidParameters("series must have at least one term".into()));
                }
                Ok(Self(values))
            }

            pub fn from_integers<I: IntoIterator<Item = i64>>(values: I) -> Result<Self> {
                Self::new(values.into_iter().map(|v| BigRational::from_integer(v.into())).collect())
            }

            pub fn values(&self) -> &[BigRational] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            /// The `k`-th term, 1-based.
            pub fn get(&self, k: usize) -> &BigRational {
                &self.0[k - 1]
            }

            fn truncated(&self, order: usize) -> Result<Vec<BigRational>> {
                series_guard(order)?;
                if order > self.0.len() {
                    return Err(Error::InvalidParameters(format!(
                        "order {order} exceeds series length {}",
                        self.0.len()
                    )));
                }
                Ok(self.0[..order].to_vec())
            }
        }
    };
}

series_impl!(MomentSeries);
series_impl!(CumulantSeries);

/// `m_n = Σ_{s=1}^{n} κ_s [z^{n-s}] M(z)^s` with `M(z) = 1 + Σ m_i z^i`,
/// evaluated incrementally for `n = 1..K`.
fn moments_of(kappa: &[BigRational]) -> Vec<BigRational> {
    let order = kappa.len();
    // series[i] = m_i, m_0 = 1
    let mut m: Vec<BigRational> = vec![BigRational::one()];
    for n in 1..=order {
        let mut total = BigRational::zero();
        // power holds the coefficients of M(z)^s up to degree n-1
        let mut power: Vec<BigRational> = {
            let mut v = vec![BigRational::zero(); n];
            v[0] = BigRational::one();
            v
        };
        for s in 1..=n {
            power = mul_truncated(&power, &m, n);
            if !kappa[s - 1].is_zero() {
                total += &kappa[s - 1] * &power[n - s];
            }
        }
        m.push(total);
    }
    m.remove(0);
    m
}

fn mul_truncated(a: &[BigRational], b: &[BigRational], len: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); len];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().take(len.saturating_sub(i)) {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn moments_from_cumulants(kappa: &CumulantSeries, order: usize) -> Result<MomentSeries> {
    MomentSeries::new(moments_of(&kappa.truncated(order)?))
}

/// Inverse of [`moments_from_cumulants`], one order at a time.
pub fn cumulants_from_moments(m: &MomentSeries, order: usize) -> Result<CumulantSeries> {
    let target = m.truncated(order)?;
    let mut kappa: Vec<BigRational> = Vec::with_capacity(order);
    for n in 1..=order {
        kappa.push(BigRational::zero());
        let partial = moments_of(&kappa);
        kappa[n - 1] = &target[n - 1] - &partial[n - 1];
    }
    CumulantSeries::new(kappa)
}

/// Free additive convolution through cumulant additivity.
pub fn free_convolve(a: &MomentSeries, b: &MomentSeries, order: usize) -> Result<MomentSeries> {
    let ka = cumulants_from_moments(a, order)?;
    let kb = cumulants_from_moments(b, order)?;
    let sum: Vec<BigRational> = ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect();
    moments_from_cumulants(&CumulantSeries(sum), order)
}

/// Law of `sX`: `m_k ↦ s^k m_k`.
pub fn dilate(m: &MomentSeries, s: &BigRational, order: usize) -> Result<MomentSeries> {
    let values = m.truncated(order)?;
    MomentSeries::new(
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * Pow::pow(s, i + 1))
            .collect(),
    )
}

/// Free Poisson law with rate `t`: all cumulants equal `t`.
pub fn free_poisson(t: &BigRational, order: usize) -> Result<MomentSeries> {
    series_guard(order)?;
    moments_from_cumulants(&CumulantSeries(vec![t.clone(); order]), order)
}

/// Block weight for [`character_count`].
#[derive(Clone)]
pub enum Weighting {
    Plain,
    PerBlock(Arc<dyn Fn(usize) -> BigUint + Send + Sync>),
}

impl Weighting {
    /// `w(b) = 2^{b-1}`.
    pub fn bulleted() -> Self {
        Weighting::PerBlock(Arc::new(|b| BigUint::one() << (b - 1)))
    }

    /// `w(b) = 2^{b-1} + 1`.
    pub fn bulleted_plus_one() -> Self {
        Weighting::PerBlock(Arc::new(|b| (BigUint::one() << (b - 1)) + 1u32))
    }

    pub fn constant(c: u64) -> Self {
        Weighting::PerBlock(Arc::new(move |_| BigUint::from(c)))
    }

    fn weight(&self, p: &Partition) -> BigUint {
        match self {
            Weighting::Plain => BigUint::one(),
            Weighting::PerBlock(w) => p.block_sizes().map(|b| w(b)).product(),
        }
    }
}

impl fmt::Debug for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weighting::Plain => f.write_str("Plain"),
            Weighting::PerBlock(_) => f.write_str("PerBlock(..)"),
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    /// `plain`, `bullet` (2^{b-1}), `bullet+1` (2^{b-1}+1) or an integer constant.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "1" => Ok(Weighting::Plain),
            "bullet" | "bulleted" => Ok(Weighting::bulleted()),
            "bullet+1" | "bulleted+1" => Ok(Weighting::bulleted_plus_one()),
            other => other
                .parse::<u64>()
                .map(Weighting::constant)
                .map_err(|_| Error::InvalidParameters(format!("unknown weighting {s}"))),
        }
    }
}

/// `Σ_{π ∈ cat(0,k)} Π_{b ∈ π} w(|b|)`.
pub fn character_count(cat: &CategoryId, k: usize, weighting: &Weighting) -> Result<BigUint> {
    check_limit("points", k, MAX_CHARACTER_POINTS)?;
    let mut total = BigUint::zero();
    for_each_member(cat, 0, k, &mut |d| total += weighting.weight(d.base()));
    Ok(total)
}

/// `Σ_{π ∈ cat(0,k)} 2^{e(π)}` with exponent `e` a function of `(k, #blocks)`;
/// used for closed weightings stated in terms of the block count.
pub fn block_count_sum(
    cat: &CategoryId,
    k: usize,
    exponent: impl Fn(usize, usize) -> i64,
) -> Result<BigRational> {
    check_limit("points", k, MAX_CHARACTER_POINTS)?;
    let two = BigRational::from_integer(2.into());
    let mut total = BigRational::zero();
    for_each_member(cat, 0, k, &mut |d| {
        let e = exponent(k, d.base().num_blocks());
        total += if e >= 0 {
            Pow::pow(&two, e as u64)
        } else {
            Pow::pow(&two, (-e) as u64).recip()
        };
    });
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiniteGroup {
    Sq,
    Hq,
}

impl FromStr for FiniteGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sq" | "s" => Ok(FiniteGroup::Sq),
            "hq" | "h" => Ok(FiniteGroup::Hq),
            _ => Err(Error::InvalidParameters(format!("unknown finite group {s}"))),
        }
    }
}

/// Average of `tr(g)^k` over the permutation (`Sq`) or signed permutation
/// (`Hq`) matrices of size `q`.
pub fn finite_group_moment(group: FiniteGroup, q: usize, k: usize) -> Result<BigInt> {
    check_limit("group size", q, MAX_GROUP_SIZE)?;
    check_limit("moment order", k, MAX_GROUP_POWER)?;
    let mut sum = BigInt::zero();
    let mut order = BigInt::zero();
    for perm in (0..q).permutations(q) {
        let fixed: Vec<usize> = (0..q).filter(|&i| perm[i] == i).collect();
        match group {
            FiniteGroup::Sq => {
                sum += Pow::pow(BigInt::from(fixed.len()), k);
                order += 1;
            }
            FiniteGroup::Hq => {
                // signs off the fixed points do not change the trace
                let free = BigInt::one() << (q - fixed.len());
                for signs in 0u32..(1u32 << fixed.len()) {
                    let minus = signs.count_ones() as i64;
                    let trace = BigInt::from(fixed.len() as i64 - 2 * minus);
                    sum += Pow::pow(trace, k) * &free;
                }
                order += BigInt::from(1u64 << q);
            }
        }
    }
    if !(&sum % &order).is_zero() {
        return Err(Error::PrecondFailed(format!(
            "average {sum}/{order} is not an integer"
        )));
    }
    Ok(sum / order)
}

/// Whether each row's points `2i+1, 2i+2` share a block.
pub fn is_pair_joined(p: &Partition) -> bool {
    let (k, l) = (p.k(), p.l());
    if k % 2 != 0 || l % 2 != 0 {
        return false;
    }
    let labels = p.labels();
    let joined = |a: usize| labels[a - 1] == labels[a];
    (1..k).step_by(2).all(joined) && (k + 1..k + l).step_by(2).all(joined)
}

/// Collapses each joined pair of a partition of `(2k, 2l)` points to one point.
pub fn collapse_pairs(p: &Partition) -> Option<Partition> {
    if !is_pair_joined(p) {
        return None;
    }
    let labels = p.labels();
    let collapsed: Vec<usize> = labels.iter().step_by(2).copied().collect();
    Some(Partition::from_labels(p.k() / 2, p.l() / 2, &collapsed))
}

/// `|{π ∈ NC(2k, 2l) : every pair (2i+1, 2i+2) of a row is joined}|`.
pub fn ncjoin_count(k: usize, l: usize) -> Result<BigUint> {
    check_limit("ncjoin points", k + l, MAX_NCJOIN)?;
    let mut n: u64 = 0;
    for_each_base(2 * k, 2 * l, true, None, &mut |p| {
        if is_pair_joined(p) {
            n += 1;
        }
    });
    Ok(BigUint::from(n))
}

/// Parses `a`, `a/b` or a decimal literal as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidParameters(format!("not a rational number: {s}"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = Pow::pow(BigInt::from(10), frac.len());
        let f = BigRational::new(frac.parse::<BigInt>().map_err(|_| bad())?, scale);
        let whole = BigRational::from_integer(int.abs()) + f;
        return Ok(if negative { -whole } else { whole });
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}
