//! Small numeric helpers shared by the estimators.

/// Neumaier-compensated sum.
pub fn ksum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[inline]
pub fn energy(p: &[f64; 4]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]
}

#[inline]
pub fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    let d2 = a[2] - b[2];
    let d3 = a[3] - b[3];
    d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

/// Delete-one-group jackknife standard error of a mean, given equal-weight group means.
pub fn jackknife_se(group_means: &[f64]) -> f64 {
    let g = group_means.len();
    if g < 2 {
        return 0.0;
    }
    let total = ksum(group_means.iter().copied());
    let gf = g as f64;
    let loo: Vec<f64> = group_means
        .iter()
        .map(|m| (total - m) / (gf - 1.0))
        .collect();
    let mean = ksum(loo.iter().copied()) / gf;
    let ss = ksum(loo.iter().map(|v| (v - mean) * (v - mean)));
    ((gf - 1.0) / gf * ss).sqrt()
}

/// Hex rendering of a digest.
pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(1e-16, 10_000));
        assert!((ksum(v.iter().copied()) - (1.0 + 1e-12)).abs() < 1e-18);
    }

    #[test]
    fn jackknife_of_identical_groups_is_zero() {
        assert_eq!(jackknife_se(&[0.5; 10]), 0.0);
    }

    #[test]
    fn jackknife_matches_standard_error_of_mean() {
        // For the mean, the delete-one jackknife equals s / sqrt(n).
        let x = [1.0, 2.0, 4.0, 7.0, 11.0];
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let s2 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
        assert!((jackknife_se(&x) - (s2 / n).sqrt()).abs() < 1e-12);
    }
}
