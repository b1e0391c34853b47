//! Real polynomials in time with exact integration.

use std::ops::{Add, Mul, Sub};

/// `c[0] + c[1] t + c[2] t² + …`
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn zero() -> Self {
        Poly::constant(0.0)
    }

    /// `(t − s)²`
    pub fn shifted_square(s: f64) -> Self {
        Poly::new(vec![s * s, -2.0 * s, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect())
    }

    /// Antiderivative vanishing at `t = 0`.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(self.coeffs.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        Poly::new(out)
    }

    /// `∫_a^b p(t) dt`. Evaluated about `a` so that short intervals far from
    /// the origin keep their precision.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        self.shift(a).antiderivative().eval(b - a)
    }

    /// `q(s) = p(s + a)`.
    pub fn shift(&self, a: f64) -> Self {
        // Horner in the polynomial ring: p(s + a) = (((c_n)(s+a) + c_{n-1})(s+a) + …)
        let base = Poly::new(vec![a, 1.0]);
        self.coeffs.iter().rev().fold(Poly::zero(), |acc, &c| &(&acc * &base) + &Poly::constant(c))
    }

    /// `max_{t∈[a,b]} |p(t)|`, exact for degree ≤ 3 (critical points from
    /// the quadratic derivative).
    pub fn max_abs_on(&self, a: f64, b: f64) -> f64 {
        assert!(self.degree() <= 3, "max_abs_on supports degree ≤ 3");
        let mut candidates = vec![a, b];
        let d = self.derivative();
        let c = d.coeffs();
        match d.degree() {
            2 => {
                let (qa, qb, qc) = (c[2], c[1], c[0]);
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    candidates.push((-qb + sq) / (2.0 * qa));
                    candidates.push((-qb - sq) / (2.0 * qa));
                }
            }
            1 if c[1] != 0.0 => candidates.push(-c[0] / c[1]),
            _ => {}
        }
        candidates
            .into_iter()
            .filter(|t| t.is_finite() && *t >= a && *t <= b)
            .map(|t| self.eval(t).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
