//! Closed-form quantities implied by the success-rate sampler, with an
//! independent quadrature cross-check.

/// Expected per-round credit payoff of a freshly drawn risky lab:
/// `u_r · ∫₀¹ max(0, c·x² − f) dx` in closed form.
///
/// For `f < c` the integrand is positive above `x₀ = √(f/c)` and the
/// integral evaluates to `c/3 − f + (2/3)·f^{3/2}/√c`; for `c ≤ f` it is
/// identically zero.
pub fn expected_risky_payoff(u_r: f64, c: f64, f: f64) -> f64 {
    if c <= f {
        return 0.0;
    }
    u_r * (c / 3.0 - f + 2.0 / 3.0 * f.powf(1.5) / c.sqrt())
}

/// The same integral evaluated by adaptive Simpson quadrature, kept as an
/// independent check on the closed form.
pub fn expected_risky_payoff_quadrature(u_r: f64, c: f64, f: f64) -> f64 {
    integrate(&|x| u_r * (c * x * x - f).max(0.0), 0.0, 1.0, 1e-12)
}

/// Probability that a fresh risky lab can never succeed:
/// `P(c·x² ≤ f) = min(1, √(f/c))`, and 1 when `c = 0`.
pub fn zero_success_fraction(c: f64, f: f64) -> f64 {
    if c == 0.0 {
        return 1.0;
    }
    (f / c).sqrt().min(1.0)
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }

    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 50)
}
