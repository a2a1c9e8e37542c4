use serde::{Deserialize, Serialize};
use libm::erfc;

use super::metrics::Metric;
use crate::error::{Error, Result};

/// Two-tailed p-value `2 (1 - Phi(|z|))`, evaluated as `erfc(|z| / sqrt 2)`
/// to keep precision in the tails.
pub fn p_from_z(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: Metric,
    pub p_two_tailed: Metric,
}

/// Pooled two-proportion z test on two accuracies. `z` is undefined when the
/// pooled proportion is 0 or 1.
pub fn two_proportion_ztest(acc1: f64, n1: usize, acc2: f64, n2: usize) -> Result<ZTest> {
    for acc in [acc1, acc2] {
        if !(0.0..=1.0).contains(&acc) {
            return Err(Error::InvalidArgument(format!(
                "accuracy {acc} outside [0, 1]"
            )));
        }
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument("sample counts must be >= 1".into()));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (acc1 * n1f + acc2 * n2f) / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if !(se > 0.0) {
        return Ok(ZTest {
            z: Metric::Undefined,
            p_two_tailed: Metric::Undefined,
        });
    }
    let z = (acc1 - acc2) / se;
    Ok(ZTest {
        z: Metric::Defined(z),
        p_two_tailed: Metric::Defined(p_from_z(z)),
    })
}
