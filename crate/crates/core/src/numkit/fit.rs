use crate::error::{Error, Result};

/// Least-squares slope of `log err` against `log h`.
pub fn fit_order(h_values: &[f64], err_values: &[f64]) -> Result<f64> {
    if h_values.len() != err_values.len() {
        return Err(Error::Dimension { expected: h_values.len(), got: err_values.len() });
    }
    if h_values.len() < 3 {
        return Err(Error::Domain(format!("order fit needs at least 3 points, got {}", h_values.len())));
    }
    if let Some(bad) = h_values.iter().chain(err_values).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(format!("order fit needs positive finite values, got {bad}")));
    }
    let xs: Vec<f64> = h_values.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = err_values.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("order fit needs distinct step sizes".into()));
    }
    Ok(sxy / sxx)
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let h = [0.1, 0.01, 0.001];
        let e2: Vec<f64> = h.iter().map(|h| h * h).collect();
        assert!((fit_order(&h, &e2).unwrap() - 2.0).abs() < 1e-9);
        let e3: Vec<f64> = h.iter().map(|h| 3.0 * h * h * h).collect();
        assert!((fit_order(&h, &e3).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn dominant_term_regression() {
        let h = logspace(1e-3, 1e-1, 7);
        let e: Vec<f64> = h.iter().map(|h| h.powi(3) + h.powi(5)).collect();
        assert!((fit_order(&h, &e).unwrap() - 3.0).abs() < 0.1);
    }

    #[test]
    fn rejects_nonpositive_and_short_input() {
        assert!(fit_order(&[0.1, 0.0, 0.01], &[1.0, 1.0, 1.0]).is_err());
        assert!(fit_order(&[0.1, 0.2, 0.3], &[1.0, -1.0, 1.0]).is_err());
        assert!(fit_order(&[0.1, 0.2], &[1.0, 1.0]).is_err());
    }
}
