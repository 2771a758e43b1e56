//! Dörfler marking.

use crate::error::{Error, Result};
use crate::mesh::MarkSet;

/// Smallest set of largest indicators whose squared sum reaches `θ²` of the
/// total. Ties are broken by element index; zero indicators are never marked.
pub fn dorfler_mark(eta: &[f64], theta: f64) -> Result<MarkSet> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta {theta} not in (0, 1]")));
    }
    if let Some(v) = eta.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::NonFinite {
            context: "marking indicator",
            value: *v,
        });
    }
    let total: f64 = eta.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Ok(MarkSet::empty());
    }
    let mut order: Vec<usize> = (0..eta.len()).filter(|&t| eta[t] > 0.0).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    let target = theta * theta * total;
    let mut acc = 0.0;
    let mut count = 0;
    for &t in &order {
        acc += eta[t] * eta[t];
        count += 1;
        // guard against round-off in the θ = 1 case
        if acc >= target * (1.0 - 1e-14) {
            break;
        }
    }
    order.truncate(count);
    MarkSet::new(order, eta.len())
}
