use crate::scalar::Real;

/// Sums `values` by recursive halving. The reduction tree depends only on
/// the slice length, so results are reproducible for a fixed input order.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
