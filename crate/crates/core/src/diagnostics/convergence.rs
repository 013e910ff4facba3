use crate::error::{Error, Result};

/// Observed order from three values at successively halved spacings,
/// `ln|(v2 - v1) / (v3 - v2)| / ln 2`.
pub fn convergence_order(v1: f64, v2: f64, v3: f64) -> Result<f64> {
    let den = v3 - v2;
    if den == 0.0 || v2 == v1 {
        return Err(Error::InvalidParameter("convergence order needs distinct successive values".into()));
    }
    Ok(((v2 - v1) / den).abs().ln() / std::f64::consts::LN_2)
}
