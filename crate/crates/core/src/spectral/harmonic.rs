//! Harmonic measure of the upper half plane and value-distribution defects.

use std::f64::consts::FRAC_1_PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sort and merge possibly overlapping intervals; empty ones are dropped.
fn merge(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = intervals.iter().copied().filter(|(a, b)| a < b).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// `omega_z(S) = (1/pi) int_S y / ((t - x)^2 + y^2) dt` for `z = x + iy` and
/// `S` a finite union of intervals (endpoints may be infinite).
pub fn harmonic_measure(z: C64, set: &[(f64, f64)]) -> Result<f64> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return Err(Error::Argument(format!("z = {z} must lie in the open upper half plane")));
    }
    if set.iter().any(|(a, b)| a.is_nan() || b.is_nan()) {
        return Err(Error::Argument("interval endpoint is NaN".into()));
    }
    let angle = |t: f64| ((t - z.re) / z.im).atan();
    Ok(merge(set).iter().map(|&(a, b)| FRAC_1_PI * (angle(b) - angle(a))).sum())
}

/// `|int_A omega_{F(t)}(S) dt - int_A omega_{G(t)}(S) dt|` by the trapezoid
/// rule on the common grid `grid` of `A`.
pub fn value_distribution_defect(grid: &[f64], f: &[C64], g: &[C64], set: &[(f64, f64)]) -> Result<f64> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::Argument("samples must match the grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("grid must be strictly increasing".into()));
    }
    let integrand = |vals: &[C64]| -> Result<Vec<f64>> { vals.iter().map(|&w| harmonic_measure(w, set)).collect() };
    let (hf, hg) = (integrand(f)?, integrand(g)?);
    let trap = |h: &[f64]| -> f64 {
        grid.windows(2).zip(h.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
    };
    Ok((trap(&hf) - trap(&hg)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn examples() {
        let z = C64::new(3.0, 2.0);
        assert!((harmonic_measure(z, &[(-INF, INF)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((harmonic_measure(z, &[(-INF, 3.0)]).unwrap() - 0.5).abs() < 1e-15);
        assert!((harmonic_measure(C64::new(0.0, 1.0), &[(-1.0, 1.0)]).unwrap() - 0.5).abs() < 1e-15);
        assert!(harmonic_measure(C64::new(0.0, 0.0), &[(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn overlapping_intervals_count_once() {
        let z = C64::new(0.3, 0.7);
        let a = harmonic_measure(z, &[(-1.0, 1.0), (0.0, 2.0)]).unwrap();
        let b = harmonic_measure(z, &[(-1.0, 2.0)]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    /// midpoint rule on the Poisson kernel
    fn poisson_quadrature(z: C64, a: f64, b: f64) -> f64 {
        let n = 200_000;
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| {
                let t = a + (i as f64 + 0.5) * h;
                z.im / ((t - z.re).powi(2) + z.im * z.im)
            })
            .sum::<f64>()
            * h
            * FRAC_1_PI
    }

    #[test]
    fn matches_quadrature() {
        let z = C64::new(0.4, 0.3);
        let exact = harmonic_measure(z, &[(-0.5, 2.0)]).unwrap();
        assert!((exact - poisson_quadrature(z, -0.5, 2.0)).abs() < 1e-9);
    }

    #[test]
    fn identical_samples_have_no_defect() {
        let grid: Vec<f64> = (0..11).map(|i| 1.0 + 0.3 * i as f64).collect();
        let f: Vec<C64> = grid.iter().map(|&e| C64::new(0.0, 1.0) * C64::new(e, 0.1).sqrt()).collect();
        assert_eq!(value_distribution_defect(&grid, &f, &f, &[(0.0, 3.0)]).unwrap(), 0.0);
        assert!(value_distribution_defect(&grid, &f, &f[1..], &[(0.0, 3.0)]).is_err());
    }

    #[test]
    fn free_defect_decreases_with_y() {
        // m_+ = i sqrt(E + iy) for the free halfline
        let grid: Vec<f64> = (0..=300).map(|i| 1.0 + 3.0 * i as f64 / 300.0).collect();
        let m = |y: f64| -> Vec<C64> { grid.iter().map(|&e| C64::new(0.0, 1.0) * C64::new(e, y).sqrt()).collect() };
        let s = [(0.0, 3.0)];
        let d: Vec<f64> = [0.4, 0.1, 0.025]
            .iter()
            .map(|&y| value_distribution_defect(&grid, &m(y), &m(y / 2.0), &s).unwrap())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    proptest! {
        #[test]
        fn additive_and_monotone(x in -5.0f64..5.0, y in 0.01f64..5.0, a in -10.0f64..10.0, w1 in 0.0f64..5.0, w2 in 0.0f64..5.0) {
            let z = C64::new(x, y);
            let (b, c) = (a + w1, a + w1 + w2);
            let left = harmonic_measure(z, &[(a, b)]).unwrap();
            let right = harmonic_measure(z, &[(b, c)]).unwrap();
            let whole = harmonic_measure(z, &[(a, c)]).unwrap();
            prop_assert!((left + right - whole).abs() < 1e-12);
            prop_assert!(whole >= left - 1e-15 && whole >= right - 1e-15);
            prop_assert!((harmonic_measure(z, &[(-INF, a), (a, INF)]).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
