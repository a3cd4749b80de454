//! Univariate real polynomials and real-root isolation.
//!
//! Roots are isolated by recursion on the derivative: the real roots of `p'`
//! split the search interval into pieces on which `p` is monotone, and each
//! piece holds at most one root, found by bisection. A critical point where
//! `|p|` is within rounding of zero is reported as a (multiple) root.

/// Coefficients in ascending order: `c[0] + c[1] x + … + c[n] xⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// `Σ |cᵢ| |x|ⁱ`, the magnitude scale of an evaluation at `x`.
    pub fn eval_abs(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::new(vec![0.0]);
        }
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect())
    }

    /// Every real root lies in `[−B, B]` with `B = 1 + max |cᵢ / cₙ|`.
    pub fn cauchy_bound(&self) -> f64 {
        let n = self.degree();
        let lead = self.coeffs[n];
        1.0 + self.coeffs[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max)
    }

    /// All distinct real roots in `[lo, hi]`, ascending.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        if self.degree() == 0 {
            return roots;
        }
        let mut knots = vec![lo];
        knots.extend(self.derivative().real_roots_in(lo, hi).into_iter().filter(|&x| x > lo && x < hi));
        knots.push(hi);

        for (idx, &x) in knots.iter().enumerate() {
            if self.is_numerical_zero(x) {
                roots.push(x);
            }
            if idx + 1 < knots.len() {
                let y = knots[idx + 1];
                let (fx, fy) = (self.eval(x), self.eval(y));
                if !self.is_numerical_zero(x) && !self.is_numerical_zero(y) && fx.signum() != fy.signum() {
                    roots.push(bisect(|t| self.eval(t), x, y));
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + a.abs().max(b.abs())));
        roots
    }

    fn is_numerical_zero(&self, x: f64) -> bool {
        self.eval(x).abs() <= 64.0 * f64::EPSILON * self.eval_abs(x)
    }
}

/// Bisection on a bracket with a sign change, run until the bracket cannot
/// shrink further in floating point.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
