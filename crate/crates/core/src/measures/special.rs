//! Exponential integral and incomplete gamma values used by the Gamma Lévy
//! measure.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E₁(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 is defined for positive arguments");
    if x <= 1.0 {
        // -γ - ln x + Σ_{k≥1} (-1)^{k+1} x^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// `(n-1)!` as a float.
pub fn factorial_f64(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Lower incomplete gamma `γ(j, x) = ∫_0^x s^{j-1} e^{-s} ds` for integer
/// `j ≥ 1`, summed as a series so that small `x` keeps full precision.
pub fn lower_incomplete_gamma_int(j: u32, x: f64) -> f64 {
    assert!(j >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    if x > 30.0 + j as f64 {
        return factorial_f64(j - 1) - upper_incomplete_gamma_int(j, x);
    }
    // x^j e^{-x} Σ_k x^k / (j (j+1) … (j+k))
    let mut term = 1.0 / j as f64;
    let mut sum = term;
    for k in 1..1000 {
        term *= x / (j + k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    x.powi(j as i32) * (-x).exp() * sum
}

/// Upper incomplete gamma `Γ(j, x) = (j-1)! e^{-x} Σ_{k<j} x^k/k!` for
/// integer `j ≥ 1`.
pub fn upper_incomplete_gamma_int(j: u32, x: f64) -> f64 {
    assert!(j >= 1);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..j {
        term *= x / k as f64;
        sum += term;
    }
    factorial_f64(j - 1) * (-x).exp() * sum
}
