//! Derivative-free one-dimensional minimization (Brent's method).

#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Minimizes `f` on `[lo, hi]` until the bracket half-width drops below
/// `tol` (absolute, in `x`), or `max_iter` is reached.
pub fn brent_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Minimum {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for iter in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Minimum { x, value: fx, iterations: iter, converged: true };
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabolic step through (v, w, x)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
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
    Minimum { x, value: fx, iterations: max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let m = brent_minimize(|x| (x - 1.234).powi(2) + 5.0, -10.0, 10.0, 1e-10, 200);
        assert!(m.converged);
        assert!((m.x - 1.234).abs() < 1e-8);
        assert!((m.value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn finds_boundary_minimum() {
        let m = brent_minimize(|x| x, 0.0, 1.0, 1e-9, 200);
        assert!(m.x < 1e-8);
    }

    #[test]
    fn reports_iteration_cap() {
        let m = brent_minimize(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-14, 3);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
