//! Optimal-decision references used to score agents.

pub mod dp;
pub mod expost;
pub mod newsvendor;

pub use dp::{brute_force_dp, exhaustive_search, DpSolution, QUANTITY_CAP, SLOT_CAP};
pub use expost::{evaluate_orders, expost_optimal, replenishment_period, ExPostSolution, MprInstance};
pub use newsvendor::{critical_ratio, expected_profit, newsvendor_q_star};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("underage and overage costs are both zero")]
    DegenerateCosts,
    #[error("costs must be non-negative")]
    NegativeCost,
    #[error("distribution `{0}` is not supported here")]
    UnsupportedDistribution(&'static str),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("arrival of order {index} ({arrival}) precedes the previous arrival ({previous})")]
    CrossingArrivals { index: usize, arrival: u32, previous: u32 },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

/// Euclidean distance between an order vector and the optimal one.
pub fn distance_to_optimal(orders: &[i64], optimal: &[i64]) -> Result<f64, OracleError> {
    if orders.len() != optimal.len() {
        return Err(OracleError::LengthMismatch { left: orders.len(), right: optimal.len() });
    }
    let sq: i128 = orders
        .iter()
        .zip(optimal)
        .map(|(a, b)| {
            let d = (*a - *b) as i128;
            d * d
        })
        .sum();
    Ok((sq as f64).sqrt())
}
