//! Derivative-free bounded scalar minimization.
//!
//! Brent's method: golden-section steps with parabolic interpolation when the
//! last few iterates allow it. The bracket never leaves `[lower, upper]`.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - √5)/2
const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedMinimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Width of the final bracket.
    pub bracket: f64,
    pub converged: bool,
}

/// Minimizes `f` on `[lower, upper]` until the bracket is narrower than
/// `tolerance` (plus a few ulps of `x`).
pub fn minimize_bounded<F>(f: F, lower: f64, upper: f64, tolerance: f64) -> BoundedMinimum
where
    F: Fn(f64) -> f64,
{
    assert!(lower <= upper, "empty interval [{lower}, {upper}]");
    let (mut a, mut b) = (lower, upper);
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        let mid = 0.5 * (a + b);
        let tol1 = 2.0 * f64::EPSILON * x.abs() + tolerance / 4.0;
        let tol2 = 2.0 * tol1;
        if b - a <= tolerance || (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(mid - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let u = u.clamp(lower, upper);
        let fu = f(u);

        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    // the bounds themselves are never probed by the interior iteration
    let mut best = (x, fx);
    for edge in [lower, upper] {
        let fe = f(edge);
        if fe < best.1 {
            best = (edge, fe);
        }
    }
    BoundedMinimum {
        x: best.0,
        value: best.1,
        iterations,
        bracket: b - a,
        converged,
    }
}
