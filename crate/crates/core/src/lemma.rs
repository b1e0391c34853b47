//! Numeric check of the one-dimensional integral inequality behind the
//! Harnack chain argument.

use rand::Rng;

use crate::error::{Error, Result};
use crate::poly::Poly;

/// Largest interior grid tried before a violation is reported.
pub const MAX_GRID: usize = 1 << 20;
pub const LEMMA_TOL: f64 = 1e-9;

/// Anchor of the quadratic weight on `ψ2 − ψ1` in the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightAnchor {
    /// `(t − T2)²`, the inequality as usually quoted.
    #[default]
    End,
    /// `(t − T1)²`, the form produced by averaging over `s` with density
    /// `2(s − T1)/(T2 − T1)²`.
    Start,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaInstance {
    pub c: f64,
    pub alpha: f64,
    pub t1: f64,
    pub t2: f64,
    pub gamma: Poly,
    pub psi1: Poly,
    pub psi2: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    /// Grid minimum of the bracket; never below the true minimum.
    pub lhs: f64,
    pub argmin: f64,
    pub rhs: f64,
    /// Interior points in the final grid.
    pub grid: usize,
    pub holds: bool,
}

impl LemmaReport {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

impl LemmaInstance {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.c > 0.0) || !self.c.is_finite() {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.t1 < self.t2) {
            return bad(format!("need T1 < T2, got [{}, {}]", self.t1, self.t2));
        }
        if [&self.gamma, &self.psi1, &self.psi2].iter().any(|p| p.degree() > 3) {
            return bad("polynomials must have degree at most 3".into());
        }
        Ok(())
    }

    /// Random cubic data with `c, α ∈ [0.1, 5]`, `T1 ∈ [−1, 1]`,
    /// `T2 − T1 ∈ [0.05, 3]` and coefficients in `[−3, 3]` about `T1`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let t1 = rng.random_range(-1.0..1.0);
        let t2 = t1 + rng.random_range(0.05..3.0);
        let mut cubic = || {
            let degree = rng.random_range(0..=3);
            Poly::new((0..=degree).map(|_| rng.random_range(-3.0..3.0)).collect()).shift(-t1)
        };
        let (gamma, psi1, psi2) = (cubic(), cubic(), cubic());
        LemmaInstance {
            c: rng.random_range(0.1..5.0),
            alpha: rng.random_range(0.1..5.0),
            t1,
            t2,
            gamma,
            psi1,
            psi2,
        }
    }

    /// `c/(T2−T1) + α∫ψ1 + (α/(T2−T1)²)∫(t−a)²(ψ2−ψ1)` with `a` the anchor.
    pub fn rhs(&self, anchor: WeightAnchor) -> f64 {
        let span = self.t2 - self.t1;
        let diff = &self.psi2 - &self.psi1;
        let a = match anchor {
            WeightAnchor::End => self.t2,
            WeightAnchor::Start => self.t1,
        };
        self.c / span
            + self.alpha * self.psi1.integrate(self.t1, self.t2)
            + self.alpha / (span * span) * (&Poly::shifted_square(a) * &diff).integrate(self.t1, self.t2)
    }

    fn bracket(&self) -> Bracket {
        // everything in the local variable r = s − T1
        let span = self.t2 - self.t1;
        let gamma = self.gamma.shift(self.t1);
        let sq = (&gamma * &gamma).antiderivative();
        let p1 = self.psi1.shift(self.t1).antiderivative();
        let p2 = self.psi2.shift(self.t1).antiderivative();
        Bracket { sq_end: sq.eval(span), p2_end: p2.eval(span), gamma, sq, p1, p2, c: self.c, alpha: self.alpha }
    }
}

struct Bracket {
    gamma: Poly,
    sq: Poly,
    p1: Poly,
    p2: Poly,
    sq_end: f64,
    p2_end: f64,
    c: f64,
    alpha: f64,
}

impl Bracket {
    /// `γ(s) − (1/c)∫_s^{T2}γ² + α∫_{T1}^s ψ1 + α∫_s^{T2} ψ2` at `s = T1 + r`.
    fn eval(&self, r: f64) -> f64 {
        self.gamma.eval(r) - (self.sq_end - self.sq.eval(r)) / self.c
            + self.alpha * self.p1.eval(r)
            + self.alpha * (self.p2_end - self.p2.eval(r))
    }
}

/// Minimises the bracket over `grid` uniform interior points and compares
/// with the right-hand side. A violation triggers nested refinement
/// `n → 2n + 1` (which keeps all previous points) up to [`MAX_GRID`].
pub fn lemma_check(inst: &LemmaInstance, grid: usize) -> Result<LemmaReport> {
    lemma_check_with(inst, grid, WeightAnchor::End)
}

pub fn lemma_check_with(inst: &LemmaInstance, grid: usize, anchor: WeightAnchor) -> Result<LemmaReport> {
    inst.validate()?;
    if grid < 3 {
        return Err(Error::InvalidParameter(format!("grid needs at least 3 interior points, got {grid}")));
    }
    let span = inst.t2 - inst.t1;
    let bracket = inst.bracket();
    let rhs = inst.rhs(anchor);
    let mut n = grid;
    let mut best = (f64::INFINITY, 0.0);
    loop {
        let h = span / (n + 1) as f64;
        for i in 1..=n {
            let r = i as f64 * h;
            let v = bracket.eval(r);
            if v < best.0 {
                best = (v, r);
            }
        }
        let holds = best.0 <= rhs + LEMMA_TOL;
        if holds || 2 * n + 1 > MAX_GRID {
            return Ok(LemmaReport { lhs: best.0, argmin: inst.t1 + best.1, rhs, grid: n, holds });
        }
        n = 2 * n + 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(c: f64, alpha: f64, gamma: Poly, psi1: Poly, psi2: Poly) -> LemmaInstance {
        LemmaInstance { c, alpha, t1: 0.0, t2: 1.0, gamma, psi1, psi2 }
    }

    #[test]
    fn zero_data() {
        let inst = LemmaInstance { t1: 2.0, t2: 6.0, ..instance(2.0, 1.0, Poly::zero(), Poly::zero(), Poly::zero()) };
        let r = lemma_check(&inst, 9).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.5);
        assert!(r.holds);
    }

    #[test]
    fn constant_gamma() {
        for g in [-2.0, 0.5, 3.0] {
            let inst = instance(1.0, 1.0, Poly::constant(g), Poly::zero(), Poly::zero());
            let r = lemma_check(&inst, 999).unwrap();
            // bracket g − g²(1 − s) is monotone, so the grid minimum sits at
            // the first interior point
            assert_relative_eq!(r.lhs, g - g * g * (1.0 - 1e-3), max_relative = 1e-12);
            assert_eq!(r.rhs, 1.0);
            assert!(r.holds);
        }
    }

    #[test]
    fn equal_sources_drop_weighted_term() {
        let psi = Poly::new(vec![0.3, -1.0, 2.0]);
        let inst = LemmaInstance {
            t1: -0.5,
            t2: 1.5,
            ..instance(0.7, 1.3, Poly::constant(1.0), psi.clone(), psi.clone())
        };
        assert_relative_eq!(inst.rhs(WeightAnchor::End), 0.7 / 2.0 + 1.3 * psi.integrate(-0.5, 1.5), max_relative = 1e-14);
    }

    #[test]
    fn rejects_invalid() {
        let base = instance(1.0, 1.0, Poly::zero(), Poly::zero(), Poly::zero());
        assert!(lemma_check(&LemmaInstance { c: 0.0, ..base.clone() }, 5).is_err());
        assert!(lemma_check(&LemmaInstance { alpha: -1.0, ..base.clone() }, 5).is_err());
        assert!(lemma_check(&LemmaInstance { t2: 0.0, ..base.clone() }, 5).is_err());
        assert!(lemma_check(&LemmaInstance { gamma: Poly::new(vec![0.0; 5].into_iter().chain([1.0]).collect()), ..base.clone() }, 5).is_err());
        assert!(lemma_check(&base, 2).is_err());
    }

    #[test]
    fn refinement_never_raises_lhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let inst = LemmaInstance::random(&mut rng);
            let coarse = lemma_check(&inst, 7).unwrap();
            let fine = lemma_check(&inst, 15).unwrap();
            if coarse.holds && fine.grid == 15 {
                assert!(fine.lhs <= coarse.lhs);
            }
        }
    }

    #[test]
    fn end_anchored_weight_fails_on_sign_change() {
        // ψ2 − ψ1 = 2t − 1: the bracket is α(s − s²) ≥ 0 while the end
        // anchored weight gives c − α/6
        let inst = instance(0.1, 1.0, Poly::zero(), Poly::zero(), Poly::new(vec![-1.0, 2.0]));
        assert_relative_eq!(inst.rhs(WeightAnchor::End), 0.1 - 1.0 / 6.0, max_relative = 1e-14);
        let r = lemma_check(&inst, 7).unwrap();
        assert!(!r.holds);
        assert_eq!(r.grid, MAX_GRID - 1);
        assert!(r.lhs > 0.0 && r.lhs < 1e-5);

        assert_relative_eq!(inst.rhs(WeightAnchor::Start), 0.1 + 1.0 / 6.0, max_relative = 1e-14);
        assert!(lemma_check_with(&inst, 7, WeightAnchor::Start).unwrap().holds);
    }

    #[test]
    fn start_anchored_weight_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let inst = LemmaInstance::random(&mut rng);
            let r = lemma_check_with(&inst, 63, WeightAnchor::Start).unwrap();
            assert!(r.holds, "{inst:?} {r:?}");
        }
    }
}
