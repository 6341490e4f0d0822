//! The classical transfer formulas for dg algebras, written directly on vectors.
//!
//! This module does not use graphs or trees; it is an independent reference for the
//! transfer engine in biarity (1,1). In the shifted convention,
//! `λ₁ = f`, `λ_n = Σ_{k=1}^{n-1} μ̃(ĥλ_k, ĥλ_{n-k})` with `ĥλ₁ = f`, `ĥλ_j = −hλ_j`,
//! `μ̃(a, b) = (−1)^{|a|} ab`, and `m_n = gλ_n`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::DgAlgebra;
use crate::linalg::{sign, GradedMap, LinComb};

pub struct Merkulov<'a> {
    pub alg: &'a DgAlgebra,
    pub f: &'a GradedMap,
    pub g: &'a GradedMap,
    pub h: &'a GradedMap,
}

impl<'a> Merkulov<'a> {
    pub fn new(alg: &'a DgAlgebra, f: &'a GradedMap, g: &'a GradedMap, h: &'a GradedMap) -> Result<Self> {
        if f.target() != alg.space() || g.source() != alg.space() || h.source() != alg.space() {
            return Err(Error::SpaceMismatch("retraction does not match the algebra".into()));
        }
        Ok(Merkulov { alg, f, g, h })
    }

    fn mu_tilde(&self, a: &LinComb<usize>, b: &LinComb<usize>) -> LinComb<usize> {
        let mut out = LinComb::zero();
        for (&i, x) in a.iter() {
            let s = sign(self.alg.space().degree(i) as i64);
            for (&j, y) in b.iter() {
                out.add_scaled(&self.alg.mult[i][j], &(&s * x * y));
            }
        }
        out
    }

    fn lambda(&self, xs: &[usize], memo: &mut HashMap<(usize, usize), LinComb<usize>>, lo: usize) -> LinComb<usize> {
        let key = (lo, xs.len());
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let v = if xs.len() == 1 {
            self.f.column(xs[0]).clone()
        } else {
            let mut acc = LinComb::zero();
            for k in 1..xs.len() {
                let a = self.hat(&xs[..k], memo, lo);
                let b = self.hat(&xs[k..], memo, lo + k);
                acc.add_assign(&self.mu_tilde(&a, &b));
            }
            acc
        };
        memo.insert(key, v.clone());
        v
    }

    fn hat(&self, xs: &[usize], memo: &mut HashMap<(usize, usize), LinComb<usize>>, lo: usize) -> LinComb<usize> {
        let l = self.lambda(xs, memo, lo);
        if xs.len() == 1 {
            l
        } else {
            self.h.apply(&l).negated()
        }
    }

    /// `m_n(x₁, …, x_n)` for basis elements of the reduced space.
    pub fn product(&self, xs: &[usize]) -> LinComb<usize> {
        if xs.is_empty() {
            return LinComb::zero();
        }
        let mut memo = HashMap::new();
        self.g.apply(&self.lambda(xs, &mut memo, 0))
    }
}
