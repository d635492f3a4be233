//! Derivative-free 1-D maximization.

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Shrinks the bracket until its width drops below `tol` (or `max_evals`
/// function calls). Returns `(x_max, f_max)`. Assumes `f` is unimodal on the
/// bracket; callers scan a grid first and pass a single-peak bracket.
pub(crate) fn golden_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_evals: usize,
) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;

    while evals < max_evals && (hi - lo) > tol {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }

    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
