use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

/// Index of a program variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Var(pub usize);

/// `Σ cᵢ·xᵢ + constant` over program variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AffineExpr {
    terms: Vec<(Var, f64)>,
    constant: f64,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: Var, coeff: f64) -> Self {
        Self {
            terms: vec![(v, coeff)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Var, f64)>) -> Self {
        Self {
            terms: terms.into_iter().collect(),
            constant: 0.0,
        }
    }

    pub fn with_term(mut self, v: Var, coeff: f64) -> Self {
        self.terms.push((v, coeff));
        self
    }

    pub fn plus(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn push_term(&mut self, v: Var, coeff: f64) {
        self.terms.push((v, coeff));
    }

    pub fn terms(&self) -> &[(Var, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub(crate) fn into_terms(self) -> Vec<(Var, f64)> {
        self.simplified().terms
    }

    /// Merges repeated variables (sorted by index) and drops exact zeros.
    pub fn simplified(&self) -> Self {
        let mut merged = BTreeMap::new();
        for &(v, c) in &self.terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        Self {
            terms: merged.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            constant: self.constant,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * x[v.0])
    }

    pub fn scaled(mut self, k: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.1 *= k);
        self.constant *= k;
        self
    }
}

impl From<Var> for AffineExpr {
    fn from(v: Var) -> Self {
        Self::var(v)
    }
}

impl Add for AffineExpr {
    type Output = AffineExpr;

    fn add(mut self, rhs: AffineExpr) -> AffineExpr {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
        self
    }
}

impl Sub for AffineExpr {
    type Output = AffineExpr;

    fn sub(self, rhs: AffineExpr) -> AffineExpr {
        self + rhs.scaled(-1.0)
    }
}

impl Neg for AffineExpr {
    type Output = AffineExpr;

    fn neg(self) -> AffineExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for AffineExpr {
    type Output = AffineExpr;

    fn mul(self, k: f64) -> AffineExpr {
        self.scaled(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_eval() {
        let e = AffineExpr::var(Var(0)) * 2.0 - AffineExpr::term(Var(1), 3.0).plus(1.0);
        assert_eq!(e.eval(&[1.0, 1.0]), -2.0);
        assert_eq!(e.constant_term(), -1.0);
    }

    #[test]
    fn simplify_merges_and_drops_zeros() {
        let e = AffineExpr::from_terms([(Var(2), 1.0), (Var(0), 1.0), (Var(2), -1.0), (Var(0), 0.5)]);
        assert_eq!(e.simplified().terms(), &[(Var(0), 1.5)]);
    }
}
