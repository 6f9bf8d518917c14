//! Limited-memory BFGS with a backtracking Armijo line search, for smooth
//! convex objectives over flat parameter vectors.

use std::collections::VecDeque;

use crate::scalar::{dot, norm_sq, Scalar};

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub memory: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct LbfgsOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct NonFinite {
    pub iteration: usize,
}

/// Minimizes `f`, which writes the gradient into its second argument and
/// returns the objective value.
pub(crate) fn minimize<T: Scalar, F>(
    mut f: F,
    x0: Vec<T>,
    settings: LbfgsSettings,
) -> Result<LbfgsOutcome<T>, NonFinite>
where
    F: FnMut(&[T], &mut [T]) -> T,
{
    let n = x0.len();
    let tol = T::lit(settings.gradient_tolerance);
    let c1 = T::lit(1e-4);
    let mut x = x0;
    let mut g = vec![T::zero(); n];
    let mut fx = f(&x, &mut g);
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(NonFinite { iteration: 0 });
    }
    let mut history: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(settings.memory);
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    let mut dir = vec![T::zero(); n];
    let mut alpha = vec![T::zero(); settings.memory];

    for iter in 0..settings.max_iterations {
        let gnorm = norm_sq(&g).sqrt();
        if gnorm < tol {
            return Ok(LbfgsOutcome {
                x,
                value: fx,
                gradient_norm: gnorm,
                iterations: iter,
                converged: true,
            });
        }

        // two-loop recursion: dir = -H g
        dir.copy_from_slice(&g);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = *rho * dot(s, &dir);
            alpha[k] = a;
            for (d, &yi) in dir.iter_mut().zip(y) {
                *d -= a * yi;
            }
        }
        let gamma = history
            .back()
            .map_or(T::one() / gnorm.max(T::one()), |(s, y, _)| dot(s, y) / norm_sq(y));
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = *rho * dot(y, &dir);
            for (d, &si) in dir.iter_mut().zip(s) {
                *d += (alpha[k] - b) * si;
            }
        }
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope = dot(&g, &dir);
        if slope >= T::zero() {
            // not a descent direction; restart from steepest descent
            history.clear();
            for (d, &gi) in dir.iter_mut().zip(&g) {
                *d = -gi / gnorm.max(T::one());
            }
            slope = dot(&g, &dir);
        }

        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            for ((xn, &xi), &di) in x_new.iter_mut().zip(&x).zip(&dir) {
                *xn = xi + step * di;
            }
            let f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + c1 * step * slope {
                if g_new.iter().any(|v| !v.is_finite()) {
                    return Err(NonFinite { iteration: iter + 1 });
                }
                let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > T::epsilon() * norm_sq(&y).sqrt() * norm_sq(&s).sqrt() {
                    if history.len() == settings.memory {
                        history.pop_front();
                    }
                    history.push_back((s, y, T::one() / sy));
                }
                std::mem::swap(&mut x, &mut x_new);
                std::mem::swap(&mut g, &mut g_new);
                fx = f_new;
                accepted = true;
                break;
            }
            step *= T::lit(0.5);
        }
        if !accepted {
            // no representable decrease left along the search direction
            let gradient_norm = norm_sq(&g).sqrt();
            return Ok(LbfgsOutcome {
                x,
                value: fx,
                gradient_norm,
                iterations: iter + 1,
                converged: gradient_norm < tol,
            });
        }
        if !fx.is_finite() {
            return Err(NonFinite { iteration: iter + 1 });
        }
    }
    let gradient_norm = norm_sq(&g).sqrt();
    Ok(LbfgsOutcome {
        x,
        value: fx,
        gradient_norm,
        iterations: settings.max_iterations,
        converged: gradient_norm < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> LbfgsSettings {
        LbfgsSettings {
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            memory: 10,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let center = [3.0, -1.0, 0.5];
        let scales = [1.0, 10.0, 100.0];
        let out = minimize(
            |x: &[f64], g: &mut [f64]| {
                let mut v = 0.0;
                for i in 0..3 {
                    let d = x[i] - center[i];
                    v += 0.5 * scales[i] * d * d;
                    g[i] = scales[i] * d;
                }
                v
            },
            vec![0.0; 3],
            settings(),
        )
        .unwrap();
        assert!(out.converged);
        for (x, c) in out.x.iter().zip(&center) {
            assert!((x - c).abs() < 1e-9);
        }
    }

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x: &[f64], g: &mut [f64]| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            vec![-1.2, 1.0],
            settings(),
        )
        .unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let err = minimize(|_: &[f64], _: &mut [f64]| f64::NAN, vec![0.0], settings()).unwrap_err();
        assert_eq!(err, NonFinite { iteration: 0 });
    }
}
