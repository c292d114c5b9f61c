//! Field-order list parsing: a comma list is taken literally, while
//! `a:b` expands to every odd prime power in the inclusive range.

use anyhow::{bail, Context, Result};
use ffext::field::prime_power_split;

/// Parses `"a:b"` or `"q1,q2,..."` into a list of candidate orders.
///
/// Range syntax keeps only odd prime powers; a literal list is returned
/// as written and validated later, when each field is built.
pub fn parse_orders(text: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = text.split_once(':') {
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad range start {lo:?}"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad range end {hi:?}"))?;
        if lo > hi {
            bail!("empty range {lo}:{hi}");
        }
        let orders: Vec<u64> = (lo..=hi).filter(|&n| is_odd_prime_power(n)).collect();
        if orders.is_empty() {
            bail!("no odd prime powers in {lo}:{hi}");
        }
        return Ok(orders);
    }
    let orders: Vec<u64> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .with_context(|| format!("bad field order {part:?}"))
        })
        .collect::<Result<_>>()?;
    if orders.is_empty() {
        bail!("empty order list");
    }
    Ok(orders)
}

fn is_odd_prime_power(n: u64) -> bool {
    matches!(prime_power_split(n), Some((p, _)) if p % 2 == 1)
}
