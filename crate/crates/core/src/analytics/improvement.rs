use crate::{Error, Result};

/// Relative improvement of the better of trials 4 and 5 over trial 1, in
/// percent: `100 − min(t₅, t₄)/t₁ × 100`. Negative when the last trials were
/// slower.
pub fn percent_improvement(times: &[f64]) -> Result<f64> {
    if times.len() != 5 {
        return Err(Error::InvalidInput(alloc::format!(
            "improvement needs exactly 5 trial times, got {}",
            times.len()
        )));
    }
    let (t1, t4, t5) = (times[0], times[3], times[4]);
    if [t1, t4, t5].iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("trial times must be positive".into()));
    }
    Ok(100.0 - t5.min(t4) / t1 * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let p = percent_improvement(&[200.0, 180.0, 160.0, 120.0, 150.0]).unwrap();
        assert!((p - 40.0).abs() < 1e-9);
        assert_eq!(percent_improvement(&[90.0, 1.0, 1.0, 90.0, 90.0]).unwrap(), 0.0);
        let p = percent_improvement(&[100.0, 1.0, 1.0, 150.0, 160.0]).unwrap();
        assert!((p + 50.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_times() {
        assert!(percent_improvement(&[0.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(percent_improvement(&[1.0, 1.0, 1.0, -1.0, 1.0]).is_err());
        assert!(percent_improvement(&[1.0, 1.0, 1.0]).is_err());
    }
}
