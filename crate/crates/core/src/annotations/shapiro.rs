//! Shapiro-Wilk W via Royston's polynomial approximation of the coefficients.

/// Inverse standard normal CDF (Beasley-Springer, AS 111), the quantile
/// routine of the reference W implementation.
fn ppnd(p: f64) -> f64 {
    const A: [f64; 4] = [
        2.506_628_238_84,
        -18.615_000_625_29,
        41.391_197_735_34,
        -25.441_060_496_37,
    ];
    const B: [f64; 4] = [
        -8.473_510_930_90,
        23.083_367_437_43,
        -21.062_241_018_26,
        3.130_829_098_33,
    ];
    const C: [f64; 4] = [
        -2.787_189_311_38,
        -2.297_964_791_34,
        4.850_141_271_35,
        2.321_212_768_58,
    ];
    const D: [f64; 2] = [3.543_889_247_62, 1.637_067_818_97];
    let q = p - 0.5;
    if q.abs() <= 0.42 {
        let r = q * q;
        let num = q * (((A[3] * r + A[2]) * r + A[1]) * r + A[0]);
        let den = (((B[3] * r + B[2]) * r + B[1]) * r + B[0]) * r + 1.0;
        return num / den;
    }
    let r = if q > 0.0 { 1.0 - p } else { p };
    if r <= 0.0 {
        return 0.0;
    }
    let r = (-r.ln()).sqrt();
    let v = (((C[3] * r + C[2]) * r + C[1]) * r + C[0]) / ((D[1] * r + D[0]) * r + 1.0);
    if q < 0.0 {
        -v
    } else {
        v
    }
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

/// Upper-half coefficients `a_n, a_{n-1}, ...` (positive, descending position).
fn coefficients(n: usize) -> Vec<f64> {
    const C1: [f64; 6] = [0.0, 0.221_157, -0.147_981, -2.071_19, 4.434_685, -2.706_056];
    const C2: [f64; 6] = [
        0.0, 0.042_981, -0.293_762, -1.752_461, 5.682_633, -3.582_633,
    ];
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| -ppnd((i as f64 - 0.375) / (an + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let u = 1.0 / an.sqrt();
    let mut a = vec![0.0; half];
    a[0] = poly(&C1, u) + m[0] / ssumm2;
    let (first_free, phi) = if n > 5 {
        a[1] = poly(&C2, u) + m[1] / ssumm2;
        let num = summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1];
        let den = 1.0 - 2.0 * a[0] * a[0] - 2.0 * a[1] * a[1];
        (2, num / den)
    } else {
        let num = summ2 - 2.0 * m[0] * m[0];
        let den = 1.0 - 2.0 * a[0] * a[0];
        (1, num / den)
    };
    let scale = phi.sqrt();
    for i in first_free..half {
        a[i] = m[i] / scale;
    }
    a
}

/// W statistic in (0, 1]; `None` for fewer than three values, non-finite
/// input, or zero range.
pub fn shapiro_wilk(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < 1e-19 {
        return None;
    }
    let half = coefficients(n);
    // full antisymmetric coefficient vector in sorted order
    let a: Vec<f64> = (0..n)
        .map(|i| {
            let j = n - 1 - i;
            if i < j {
                -half[i]
            } else if i > j {
                half[j]
            } else {
                0.0
            }
        })
        .collect();
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let mean_a = a.iter().sum::<f64>() / n as f64;
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (ai, xi) in a.iter().zip(&xs) {
        let da = ai - mean_a;
        let dx = xi - mean_x;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    Some((1.0 - w1).clamp(f64::MIN_POSITIVE, 1.0))
}
