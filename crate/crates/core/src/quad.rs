//! Adaptive Simpson quadrature with error reporting.

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Summed local error estimates.
    pub error_estimate: f64,
    pub evaluations: u64,
    /// False when some subinterval hit the depth limit before meeting its
    /// error budget.
    pub converged: bool,
}

struct Quad<'a> {
    f: &'a dyn Fn(f64) -> f64,
    evaluations: u64,
    converged: bool,
    error_sum: f64,
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

impl Quad<'_> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
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
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (b - a) < 1e-14 * (a.abs() + b.abs()) {
            self.error_sum += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth == 0 {
            self.converged = false;
            self.error_sum += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates `f` over `[a, b]` to the requested absolute or relative
/// tolerance (whichever is larger at the initial estimate).
pub fn adaptive_simpson(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> QuadResult {
    if a == b {
        return QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let mut q = Quad {
        f: &f,
        evaluations: 0,
        converged: true,
        error_sum: 0.0,
    };
    let fa = q.eval(a);
    let m = 0.5 * (a + b);
    let fm = q.eval(m);
    let fb = q.eval(b);
    let whole = simpson(fa, fm, fb, b - a);
    let tol = abs_tol.max(rel_tol * whole.abs()).max(f64::MIN_POSITIVE);
    let value = q.recurse(a, b, fa, fm, fb, whole, tol, max_depth);
    QuadResult {
        value,
        error_estimate: q.error_sum,
        evaluations: q.evaluations,
        converged: q.converged,
    }
}
