//! Power nonlinearities `f(u) = |u|^{p-1} u` and `f(u) = u_+^{p+} - u_-^{p-}`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityKind {
    Power { p: f64 },
    TwoPower { p_plus: f64, p_minus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    alpha_prime: f64,
}

impl NonlinearitySpec {
    /// Uses the midpoint of the admissible interval for `alpha'`.
    pub fn new(kind: NonlinearityKind) -> Result<Self> {
        let probe = NonlinearitySpec { kind, alpha_prime: 0.75 };
        probe.check_exponents()?;
        let hi = probe.alpha_prime_upper();
        NonlinearitySpec::with_alpha_prime(kind, 0.5 * (0.5 + hi))
    }

    pub fn with_alpha_prime(kind: NonlinearityKind, alpha_prime: f64) -> Result<Self> {
        let spec = NonlinearitySpec { kind, alpha_prime };
        spec.check_exponents()?;
        let hi = spec.alpha_prime_upper();
        if !(alpha_prime > 0.5 && alpha_prime < hi) {
            return Err(Error::Hypothesis(format!("alpha' = {alpha_prime} must lie strictly inside (1/2, {hi})")));
        }
        Ok(spec)
    }

    pub fn cubic() -> Self {
        NonlinearitySpec::new(NonlinearityKind::Power { p: 3.0 }).expect("p = 3 is admissible")
    }

    fn check_exponents(&self) -> Result<()> {
        let ok = |p: f64| p.is_finite() && p > 1.0;
        let valid = match self.kind {
            NonlinearityKind::Power { p } => ok(p),
            NonlinearityKind::TwoPower { p_plus, p_minus } => ok(p_plus) && ok(p_minus),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Hypothesis(format!("exponents of {:?} must be finite and above 1", self.kind)))
        }
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// Smaller growth exponent.
    pub fn p1(&self) -> f64 {
        match self.kind {
            NonlinearityKind::Power { p } => p,
            NonlinearityKind::TwoPower { p_plus, p_minus } => p_plus.min(p_minus),
        }
    }

    /// Larger growth exponent.
    pub fn p2(&self) -> f64 {
        match self.kind {
            NonlinearityKind::Power { p } => p,
            NonlinearityKind::TwoPower { p_plus, p_minus } => p_plus.max(p_minus),
        }
    }

    /// Exponent of the splitting inequalities, `min((p1 + 1) / 4, 1)`.
    pub fn alpha(&self) -> f64 {
        ((self.p1() + 1.0) / 4.0).min(1.0)
    }

    pub fn alpha_prime(&self) -> f64 {
        self.alpha_prime
    }

    fn alpha_prime_upper(&self) -> f64 {
        self.alpha().min(self.p1() / 2.0).min(1.0)
    }

    /// Exponent governing the branch of the given sign.
    pub fn exponent(&self, sign: i8) -> f64 {
        match self.kind {
            NonlinearityKind::Power { p } => p,
            NonlinearityKind::TwoPower { p_plus, p_minus } => {
                if sign >= 0 {
                    p_plus
                } else {
                    p_minus
                }
            }
        }
    }

    pub fn is_odd(&self) -> bool {
        match self.kind {
            NonlinearityKind::Power { .. } => true,
            NonlinearityKind::TwoPower { p_plus, p_minus } => p_plus == p_minus,
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        let p = self.exponent(if u >= 0.0 { 1 } else { -1 });
        if p == 3.0 {
            u * u * u
        } else {
            u.signum() * u.abs().powf(p)
        }
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        let p = self.exponent(if u >= 0.0 { 1 } else { -1 });
        if p == 3.0 {
            3.0 * u * u
        } else {
            p * u.abs().powf(p - 1.0)
        }
    }

    /// Antiderivative with `F(0) = 0`.
    #[inline]
    pub fn big_f(&self, u: f64) -> f64 {
        let p = self.exponent(if u >= 0.0 { 1 } else { -1 });
        if p == 3.0 {
            0.25 * (u * u) * (u * u)
        } else {
            u.abs().powf(p + 1.0) / (p + 1.0)
        }
    }

    /// Left and right sides of the two splitting inequalities for one tuple:
    /// `(|f(sum) - sum f|, sum_{i<j} |u_i u_j|^alpha,
    ///   |F(sum) - sum F - sum_{i != j} f(u_i) u_j|,
    ///   sum_{i<j} |u_i u_j|^{2 alpha} + sum_{i<j<k} |u_i u_j u_k|^{2/3})`.
    pub fn splitting_terms(&self, u: &[f64]) -> [f64; 4] {
        let a = self.alpha();
        let total: f64 = u.iter().sum();
        let lhs1 = (self.f(total) - u.iter().map(|&v| self.f(v)).sum::<f64>()).abs();
        let mut cross = 0.0;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    cross += self.f(u[i]) * u[j];
                }
            }
        }
        let lhs2 = (self.big_f(total) - u.iter().map(|&v| self.big_f(v)).sum::<f64>() - cross).abs();
        let (mut rhs1, mut rhs2) = (0.0, 0.0);
        for i in 0..u.len() {
            for j in (i + 1)..u.len() {
                let q = (u[i] * u[j]).abs();
                rhs1 += q.powf(a);
                rhs2 += q.powf(2.0 * a);
                for k in (j + 1)..u.len() {
                    rhs2 += (u[i] * u[j] * u[k]).abs().powf(2.0 / 3.0);
                }
            }
        }
        [lhs1, rhs1, lhs2, rhs2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_exponents() {
        let nl = NonlinearitySpec::cubic();
        assert_eq!(nl.alpha(), 1.0);
        assert_eq!(nl.alpha_prime(), 0.75);
        assert_eq!(nl.f(-2.0), -8.0);
        assert_eq!(nl.big_f(2.0), 4.0);
        assert_eq!(nl.df(-1.0), 3.0);
    }

    #[test]
    fn two_power_branches() {
        let nl = NonlinearitySpec::new(NonlinearityKind::TwoPower { p_plus: 3.0, p_minus: 2.0 }).unwrap();
        assert_eq!(nl.f(-2.0), -4.0);
        assert_eq!(nl.f(2.0), 8.0);
        assert!((nl.big_f(-3.0) - 9.0).abs() < 1e-12);
        assert_eq!(nl.alpha(), 0.75);
        assert!(!nl.is_odd());
        // (H4): f(u) u > 0 away from zero
        for u in [-3.0, -0.1, 0.2, 5.0] {
            assert!(nl.f(u) * u > 0.0);
        }
    }

    #[test]
    fn bad_exponents_and_alpha_prime() {
        assert!(NonlinearitySpec::new(NonlinearityKind::Power { p: 1.0 }).is_err());
        assert!(NonlinearitySpec::with_alpha_prime(NonlinearityKind::Power { p: 3.0 }, 1.0).is_err());
        assert!(NonlinearitySpec::with_alpha_prime(NonlinearityKind::Power { p: 3.0 }, 0.5).is_err());
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let nl = NonlinearitySpec::new(NonlinearityKind::TwoPower { p_plus: 2.5, p_minus: 1.7 }).unwrap();
        for u in [-1.3, -0.4, 0.3, 1.1] {
            let e = 1e-6;
            assert!(((nl.f(u + e) - nl.f(u - e)) / (2.0 * e) - nl.df(u)).abs() < 1e-6);
            assert!(((nl.big_f(u + e) - nl.big_f(u - e)) / (2.0 * e) - nl.f(u)).abs() < 1e-6);
        }
    }
}
