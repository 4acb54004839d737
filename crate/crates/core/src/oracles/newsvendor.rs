//! Critical-fractile solution of the single-period newsvendor.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use super::OracleError;
use crate::money::Money;
use crate::process::Distribution;

/// `c_u / (c_u + c_o)`, exact.
pub fn critical_ratio(underage: Money, overage: Money) -> Result<Ratio<i64>, OracleError> {
    if underage.is_negative() || overage.is_negative() {
        return Err(OracleError::NegativeCost);
    }
    let total = underage.raw() + overage.raw();
    if total == 0 {
        return Err(OracleError::DegenerateCosts);
    }
    Ok(Ratio::new(underage.raw(), total))
}

/// Probability mass of `d` for the distributions with tractable support.
fn pmf(dist: &Distribution) -> Result<Box<dyn Fn(i64) -> f64 + '_>, OracleError> {
    match dist {
        Distribution::UniformInt { low, high } => {
            let n = (high - low + 1) as f64;
            Ok(Box::new(move |d| if (*low..=*high).contains(&d) { 1.0 / n } else { 0.0 }))
        }
        Distribution::Constant { value } => Ok(Box::new(move |d| if d == *value { 1.0 } else { 0.0 })),
        Distribution::Trace { values } => {
            let n = values.len() as f64;
            Ok(Box::new(move |d| values.iter().filter(|v| **v == d).count() as f64 / n))
        }
        Distribution::Poisson { lambda } => {
            let ln_lambda = lambda.ln();
            Ok(Box::new(move |d| {
                if d < 0 {
                    return 0.0;
                }
                let ln_fact: f64 = (1..=d).map(|k| (k as f64).ln()).sum();
                (-lambda + d as f64 * ln_lambda - ln_fact).exp()
            }))
        }
        Distribution::NormalTruncated { .. } => {
            Err(OracleError::UnsupportedDistribution(dist.kind_name()))
        }
    }
}

/// Whether `P(D <= q) >= ratio`, exactly where the distribution allows it.
fn cdf_reaches(dist: &Distribution, q: i64, ratio: Ratio<i64>) -> Result<bool, OracleError> {
    let (num, den) = (*ratio.numer() as i128, *ratio.denom() as i128);
    let meets = |count: i128, total: i128| count * den >= num * total;
    match dist {
        Distribution::UniformInt { low, high } => {
            let count = (q.min(*high) - low + 1).max(0) as i128;
            Ok(meets(count, (high - low + 1) as i128))
        }
        Distribution::Constant { value } => Ok(meets(i128::from(q >= *value), 1)),
        Distribution::Trace { values } => {
            let count = values.iter().filter(|v| **v <= q).count() as i128;
            Ok(meets(count, values.len() as i128))
        }
        Distribution::Poisson { .. } => {
            let p = pmf(dist)?;
            let cdf: f64 = (0..=q).map(&p).sum();
            Ok(cdf >= ratio.to_f64().unwrap_or(1.0))
        }
        Distribution::NormalTruncated { .. } => {
            Err(OracleError::UnsupportedDistribution(dist.kind_name()))
        }
    }
}

fn support_bounds(dist: &Distribution) -> Result<(i64, Option<i64>), OracleError> {
    match dist {
        Distribution::UniformInt { low, high } => Ok((*low, Some(*high))),
        Distribution::Constant { value } => Ok((*value, Some(*value))),
        Distribution::Trace { values } => {
            Ok((*values.iter().min().unwrap_or(&0), values.iter().max().copied()))
        }
        Distribution::Poisson { .. } => Ok((0, None)),
        Distribution::NormalTruncated { .. } => {
            Err(OracleError::UnsupportedDistribution(dist.kind_name()))
        }
    }
}

/// Smallest non-negative `q` with `P(D <= q) >= c_u / (c_u + c_o)`.
pub fn newsvendor_q_star(dist: &Distribution, underage: Money, overage: Money) -> Result<i64, OracleError> {
    let ratio = critical_ratio(underage, overage)?;
    dist.validate().map_err(|e| OracleError::InvalidInstance(e.to_string()))?;
    let (low, high) = support_bounds(dist)?;
    if ratio.is_zero() {
        return Ok(0);
    }
    let upper = match high {
        Some(h) => h,
        None => {
            if ratio == Ratio::from_integer(1) {
                return Err(OracleError::InvalidInstance(
                    "critical ratio 1 has no finite optimum for unbounded demand".into(),
                ));
            }
            i64::MAX
        }
    };
    let mut q = low.max(0);
    // below the support the CDF is zero and ratio > 0
    while q < upper && !cdf_reaches(dist, q, ratio)? {
        q += 1;
    }
    Ok(q)
}

/// `E[r * min(q, D)] - c * q`.
pub fn expected_profit(dist: &Distribution, q: i64, revenue: Money, unit_cost: Money) -> Result<f64, OracleError> {
    let p = pmf(dist)?;
    let (mut below_mass, mut below_mean) = (0.0, 0.0);
    for d in 0..q.max(0) {
        let m = p(d);
        below_mass += m;
        below_mean += d as f64 * m;
    }
    let expected_sales = below_mean + q as f64 * (1.0 - below_mass);
    Ok(revenue.to_f64() * expected_sales - unit_cost.to_f64() * q as f64)
}
