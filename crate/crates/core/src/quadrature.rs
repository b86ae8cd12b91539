//! Adaptive Simpson quadrature, used to check the closed-form distribution
//! results numerically.

const MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` to an absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Integrates `f` over `[0, horizon]` as a sum over the dyadic panels
/// `[h/2^(k+1), h/2^k]`, so features near zero that are much narrower than
/// the horizon are still resolved.
pub fn integrate_from_zero<F>(f: F, horizon: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    const PANELS: i32 = 60;
    let panel_tol = tol / f64::from(PANELS + 1);
    let mut total = adaptive_simpson(&f, 0.0, horizon * 0.5f64.powi(PANELS), panel_tol);
    for k in (0..PANELS).rev() {
        let hi = horizon * 0.5f64.powi(k);
        total += adaptive_simpson(&f, 0.5 * hi, hi, panel_tol);
    }
    total
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // differences at rounding level cannot be refined away
    let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(noise) || lm <= a || rm >= b {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
