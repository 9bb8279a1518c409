use statrs::function::gamma::ln_gamma;

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const DIRECT_MAX_DEGREE: usize = 1024;

/// `ln E[⟨u, u′⟩^d]` for independent uniform unit vectors in `R^n`.
/// Returns `-inf` for odd `d`, where the moment vanishes.
pub fn sphere_moment_ln(n: usize, d: usize) -> f64 {
    assert!(n >= 1, "sphere dimension must be positive");
    if d % 2 == 1 {
        return f64::NEG_INFINITY;
    }
    if d == 0 || n == 1 {
        return 0.0;
    }
    let (nf, df) = (n as f64, d as f64);
    if d <= DIRECT_MAX_DEGREE {
        // Γ-ratio unrolled; avoids cancelling two large ln Γ values.
        return (0..d / 2)
            .map(|j| {
                let j = j as f64;
                ((2.0 * j + 1.0) / (nf + 2.0 * j)).ln()
            })
            .sum();
    }
    ln_gamma(nf / 2.0) + ln_gamma((df + 1.0) / 2.0) - LN_SQRT_PI - ln_gamma((nf + df) / 2.0)
}

/// `E[⟨u, u′⟩^d] = Γ(n/2) Γ((d+1)/2) / (√π Γ((n+d)/2))` for even `d`, 0 for odd.
pub fn sphere_moment(n: usize, d: usize) -> f64 {
    sphere_moment_ln(n, d).exp()
}
