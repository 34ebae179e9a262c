//! Dense univariate polynomials with f64 coefficients, ascending order.
//! Degrees stay tiny (<= 5) so everything is plain loops.

/// Coefficients `c[0] + c[1] x + c[2] x^2 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    fn trim(&mut self) {
        while self.0.len() > 1 && self.0.last() == Some(&0.0) {
            self.0.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Multiply by x.
    pub fn shift_up(&self) -> Poly {
        let mut out = vec![0.0];
        out.extend_from_slice(&self.0);
        Poly::new(out)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Divide through by the largest coefficient magnitude so sign scans and
    /// derivative thresholds are scale-free.
    pub fn normalized(&self) -> Poly {
        let m = self.max_abs_coeff();
        if m > 0.0 {
            self.scale(1.0 / m)
        } else {
            self.clone()
        }
    }
}

/// Bisect f on [lo, hi] assuming f(lo) and f(hi) have opposite signs.
/// Returns the midpoint once the bracket width falls below `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    0.5 * (lo + hi)
}

/// A few Newton iterations constrained to [lo, hi]; falls back to the seed
/// when the iteration wanders or stalls.
pub fn newton_polish(p: &Poly, dp: &Poly, seed: f64, lo: f64, hi: f64) -> f64 {
    let mut x = seed;
    let mut best = seed;
    let mut best_abs = p.eval(seed).abs();
    for _ in 0..40 {
        let fx = p.eval(x);
        let dfx = dp.eval(x);
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() || next < lo || next > hi {
            break;
        }
        let fnext = p.eval(next).abs();
        if fnext < best_abs {
            best_abs = fnext;
            best = next;
        }
        if (next - x).abs() <= f64::EPSILON * (1.0 + x.abs()) {
            x = next;
            break;
        }
        x = next;
    }
    let _ = x;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_roundtrip() {
        let a = Poly::new(vec![1.0, 2.0, 3.0]);
        let b = Poly::new(vec![-1.0, 4.0]);
        let prod = a.mul(&b);
        for x in [-2.0, -0.5, 0.0, 1.3, 7.0] {
            assert!((prod.eval(x) - a.eval(x) * b.eval(x)).abs() < 1e-12);
        }
        let sum = a.add(&b);
        assert!((sum.eval(2.0) - (a.eval(2.0) + b.eval(2.0))).abs() < 1e-12);
        assert_eq!(a.shift_up().eval(3.0), 3.0 * a.eval(3.0));
    }

    #[test]
    fn derivative_and_trim() {
        let p = Poly::new(vec![5.0, 0.0, 2.0, 0.0]);
        assert_eq!(p.degree(), 2);
        let dp = p.derivative();
        assert_eq!(dp.0, vec![0.0, 4.0]);
    }

    #[test]
    fn bisect_and_polish_find_simple_root() {
        // (x - 1.25)(x + 2)(x - 3)
        let p = Poly::new(vec![-1.25, 1.0])
            .mul(&Poly::new(vec![2.0, 1.0]))
            .mul(&Poly::new(vec![-3.0, 1.0]));
        let r = bisect(|x| p.eval(x), 1.0, 2.0, 1e-12);
        let r = newton_polish(&p, &p.derivative(), r, 1.0, 2.0);
        assert!((r - 1.25).abs() < 1e-13);
    }
}
