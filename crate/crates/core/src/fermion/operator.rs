use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// One creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.mode, if self.dagger { "^" } else { "" })
    }
}

/// Sum of products of ladder operators. The empty product is the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOperator {
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(ops: Vec<Ladder>, coefficient: impl Into<Complex64>) -> Self {
        let mut f = Self::zero();
        f.add(ops, coefficient.into());
        f
    }

    /// `a+_p a_q`.
    pub fn hopping(p: usize, q: usize, coefficient: impl Into<Complex64>) -> Self {
        Self::term(vec![Ladder::create(p), Ladder::annihilate(q)], coefficient)
    }

    pub fn number(p: usize) -> Self {
        Self::hopping(p, p, 1.0)
    }

    pub fn add(&mut self, ops: Vec<Ladder>, coefficient: Complex64) {
        *self.terms.entry(ops).or_default() += coefficient;
    }

    pub fn add_operator(&mut self, other: &FermionOperator, scale: Complex64) {
        for (ops, c) in &other.terms {
            self.add(ops.clone(), c * scale);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Ladder>, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest mode index plus one.
    pub fn n_modes(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|ops| ops.iter().map(|l| l.mode + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (ops, c) in &self.terms {
            let rev = ops.iter().rev().map(|l| Ladder { mode: l.mode, dagger: !l.dagger }).collect();
            out.add(rev, c.conj());
        }
        out
    }

    /// Product `self * other`.
    pub fn multiply(&self, other: &FermionOperator) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut ops = a.clone();
                ops.extend_from_slice(b);
                out.add(ops, ca * cb);
            }
        }
        out
    }

    /// Canonical form: creators left of annihilators, each group in
    /// descending mode order, zero terms removed.
    pub fn normal_ordered(&self) -> Self {
        let mut out = Self::zero();
        for (ops, c) in &self.terms {
            normal_order_term(ops.clone(), *c, &mut out);
        }
        out.terms.retain(|_, c| c.norm() > 0.0);
        out
    }

    pub fn drop_below(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    /// True when every term has as many creators as annihilators.
    pub fn conserves_number(&self) -> bool {
        self.terms.keys().all(|ops| {
            let created = ops.iter().filter(|l| l.dagger).count();
            2 * created == ops.len()
        })
    }
}

fn normal_order_term(mut ops: Vec<Ladder>, coefficient: Complex64, out: &mut FermionOperator) {
    // Insertion sort with anticommutation; contractions spawn shorter terms.
    let mut sign = 1.0;
    let n = ops.len();
    for i in 1..n {
        let mut j = i;
        while j > 0 {
            let (left, right) = (ops[j - 1], ops[j]);
            let swap = match (left.dagger, right.dagger) {
                (false, true) => true,
                (true, true) | (false, false) => right.mode > left.mode,
                (true, false) => false,
            };
            if left.mode == right.mode && left.dagger == right.dagger {
                return;
            }
            if !swap {
                break;
            }
            if !left.dagger && right.dagger && left.mode == right.mode {
                // a_p a+_p = 1 - a+_p a_p
                let mut contracted = ops[..j - 1].to_vec();
                contracted.extend_from_slice(&ops[j + 1..]);
                normal_order_term(contracted, coefficient * sign, out);
            }
            ops.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in ops.windows(2) {
        if w[0] == w[1] {
            return;
        }
    }
    out.add(ops, coefficient * sign);
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ops, c) in &self.terms {
            let label: Vec<String> = ops.iter().map(|l| l.to_string()).collect();
            writeln!(f, "({:+e}{:+e}i) [{}]", c.re, c.im, label.join(" "))?;
        }
        Ok(())
    }
}
