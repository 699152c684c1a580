//! Slow, independent reference computations used to cross-check the fast
//! paths: derivative-free scalar minimization, exhaustive optimal
//! assignment, and adaptive quadrature. Nothing here shares code with the
//! routines it checks.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search on `[lo, hi]` for a unimodal objective, given only
/// an order oracle `less(a, b)` meaning `f(a) < f(b)`.
///
/// Taking a comparator rather than `f` lets callers evaluate `f(a) - f(b)`
/// in a cancellation-free form, which keeps the bracket shrinking well past
/// the `√ε` floor of plain function comparisons.
pub fn golden_section(
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    less: impl Fn(f64, f64) -> bool,
) -> f64 {
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    for _ in 0..500 {
        if hi - lo <= rel_tol * scale {
            break;
        }
        if less(x1, x2) {
            hi = x2;
            x2 = x1;
            x1 = hi - INV_PHI * (hi - lo);
        } else {
            lo = x1;
            x1 = x2;
            x2 = lo + INV_PHI * (hi - lo);
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer over `t > 0` of `-α log t + β t + (t - s)² / (2γ)` by golden
/// section (no closed form involved).
pub fn logbarrier_prox_by_search(gamma: f64, s: f64, alpha: f64, beta: f64) -> f64 {
    let b = s - gamma * beta;
    let hi = b.max(0.0) + (gamma * alpha).sqrt() + 1.0;
    // f(t1) - f(t2) evaluated without subtracting two large numbers.
    let diff = |t1: f64, t2: f64| {
        let dt = t1 - t2;
        let quad = dt * (beta + (t1 + t2 - 2.0 * s) / (2.0 * gamma));
        let barrier = if alpha == 0.0 {
            0.0
        } else {
            -alpha * (dt / t2).ln_1p()
        };
        quad + barrier
    };
    golden_section(0.0, hi, 1e-15, |a, b| diff(a, b) < 0.0)
}

/// Exact squared 2-Wasserstein distance between two equal-size, equally
/// weighted 1-D point sets, by enumerating all permutations. `n ≤ 8`.
pub fn w2_by_assignment(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() <= 8, "exhaustive assignment is factorial");
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let cost: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).powi(2))
            .sum();
        best = best.min(cost / n as f64);
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
