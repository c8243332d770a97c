//! Weighted Pauli-string operators.
//!
//! A string over `n` qubits is stored as an x-mask and a z-mask, one bit per
//! qubit, with `X = (1,0)`, `Z = (0,1)` and `Y = (1,1)`. Multiplication is a
//! pair of XORs plus a popcount phase. Basis states use qubit 0 as the least
//! significant bit of the index.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Default magnitude below which combined coefficients are dropped.
pub const DEFAULT_DROP_THRESHOLD: f64 = 1e-12;

/// Default largest qubit count realized as an explicit matrix.
pub const DEFAULT_MAX_MATRIX_QUBITS: usize = 24;

/// Matrix qubit cap, overridable with `QCAT_MAX_QUBITS`.
pub fn max_matrix_qubits() -> usize {
    std::env::var("QCAT_MAX_QUBITS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_MATRIX_QUBITS)
}

const WORD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Rank used for lexicographic ordering, `I < X < Y < Z`.
    fn rank(x: bool, z: bool) -> u8 {
        match (x, z) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A power of `i`: one of `{1, i, -1, -i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(power: i64) -> Self {
        Phase(power.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Tensor product of single-qubit Pauli matrices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        let words = n_qubits.div_ceil(WORD);
        PauliString { n_qubits, x: vec![0; words], z: vec![0; words] }
    }

    /// Builds a string from `(qubit, letter)` pairs; later pairs overwrite earlier ones.
    pub fn from_letters(n_qubits: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits);
        for &(q, p) in letters {
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
            }
            s.set(q, p);
        }
        Ok(s)
    }

    /// Single-letter string.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        Self::from_letters(n_qubits, &[(qubit, p)])
    }

    /// Builds from masks for strings on at most 64 qubits.
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        assert!(n_qubits <= WORD);
        let mut s = Self::identity(n_qubits);
        if n_qubits > 0 {
            let keep = if n_qubits == WORD { u64::MAX } else { (1u64 << n_qubits) - 1 };
            s.x[0] = x & keep;
            s.z[0] = z & keep;
        }
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (x, z) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// True when the string contains only `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn num_y(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x & z).count_ones() as usize).sum()
    }

    /// Masks as single words; only valid for at most 64 qubits.
    pub fn masks(&self) -> (u64, u64) {
        assert!(self.n_qubits <= WORD, "mask access needs <= 64 qubits");
        (self.x.first().copied().unwrap_or(0), self.z.first().copied().unwrap_or(0))
    }

    /// Non-identity letters in qubit order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        (0..self.n_qubits).map(|q| (q, self.get(q))).filter(|&(_, p)| p != Pauli::I)
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    pub fn apply_to_basis(&self, basis: u64) -> (Complex64, u64) {
        let (x, z) = self.masks();
        let sign = if (basis & z).count_ones() % 2 == 1 { 2 } else { 0 };
        let phase = Phase::from_power(self.num_y() as i64 + sign);
        (phase.to_complex(), basis ^ x)
    }

    /// Whether two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((x1, z1), (x2, z2))| ((x1 & z2) ^ (z1 & x2)).count_ones())
            .sum();
        anti % 2 == 0
    }

    /// Shifts every letter up by `offset` qubits inside a register of `n_qubits`.
    pub fn embed(&self, n_qubits: usize, offset: usize) -> Result<PauliString> {
        if offset + self.n_qubits > n_qubits {
            return Err(Error::IndexOutOfRange { index: offset + self.n_qubits, limit: n_qubits });
        }
        let mut out = PauliString::identity(n_qubits);
        for (q, p) in self.letters() {
            out.set(q + offset, p);
        }
        Ok(out)
    }

    /// Tensor product with `other` placed on the qubits after `self`.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let n = self.n_qubits + other.n_qubits;
        let mut out = PauliString::identity(n);
        for (q, p) in self.letters() {
            out.set(q, p);
        }
        for (q, p) in other.letters() {
            out.set(q + self.n_qubits, p);
        }
        out
    }

    /// Parses `X0 Z3 Y7`; an empty string or `I` is the identity.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let mut s = Self::identity(n_qubits);
        for token in text.split_whitespace() {
            if token == "I" {
                continue;
            }
            let (letter, index) = token.split_at(1);
            let p = match letter {
                "X" => Pauli::X,
                "Y" => Pauli::Y,
                "Z" => Pauli::Z,
                "I" => Pauli::I,
                _ => return Err(Error::invalid(format!("bad Pauli letter in `{token}`"))),
            };
            let q: usize = index
                .parse()
                .map_err(|_| Error::invalid(format!("bad qubit index in `{token}`")))?;
            if q >= n_qubits {
                return Err(Error::IndexOutOfRange { index: q, limit: n_qubits });
            }
            s.set(q, p);
        }
        Ok(s)
    }

    /// Dense label, qubit 0 first, e.g. `XIZ`.
    pub fn dense_label(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).symbol()).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.letters() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.symbol(), q)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({})", self)
    }
}

impl Ord for PauliString {
    /// Lexicographic over letters from qubit 0 upward with `I < X < Y < Z`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            for w in 0..self.x.len() {
                let diff = (self.x[w] ^ other.x[w]) | (self.z[w] ^ other.z[w]);
                if diff != 0 {
                    let b = diff.trailing_zeros();
                    let a = Pauli::rank(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1);
                    let c = Pauli::rank(other.x[w] >> b & 1 == 1, other.z[w] >> b & 1 == 1);
                    return a.cmp(&c);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Product of two strings: `a * b = phase * product`.
pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::QubitMismatch { left: a.n_qubits, right: b.n_qubits });
    }
    let mut plus = 0i64;
    let mut minus = 0i64;
    let mut x = Vec::with_capacity(a.x.len());
    let mut z = Vec::with_capacity(a.z.len());
    for w in 0..a.x.len() {
        let (x1, z1, x2, z2) = (a.x[w], a.z[w], b.x[w], b.z[w]);
        // XY = iZ, YZ = iX, ZX = iY and the reversed products give -i.
        let pos = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
        let neg = (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2) | (x1 & !z1 & !x2 & z2);
        plus += pos.count_ones() as i64;
        minus += neg.count_ones() as i64;
        x.push(x1 ^ x2);
        z.push(z1 ^ z2);
    }
    Ok((Phase::from_power(plus - minus), PauliString { n_qubits: a.n_qubits, x, z }))
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(n_qubits: usize) -> Self {
        PauliOperator { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize, coefficient: impl Into<Complex64>) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(PauliString::identity(n_qubits), coefficient.into())
            .expect("identity shares the register");
        op
    }

    pub fn from_string(s: PauliString, coefficient: impl Into<Complex64>) -> Self {
        let mut op = Self::zero(s.n_qubits);
        op.terms.insert(s, coefficient.into());
        op
    }

    /// Collects terms, merging duplicates. No threshold is applied.
    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (PauliString, Complex64)>,
    ) -> Result<Self> {
        let mut op = Self::zero(n_qubits);
        for (s, c) in terms {
            op.add_term(s, c)?;
        }
        Ok(op)
    }

    /// Parses `"X0 Z1"`-style labels with coefficients.
    pub fn from_labels(n_qubits: usize, terms: &[(&str, f64)]) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            terms
                .iter()
                .map(|&(label, c)| Ok((PauliString::parse(n_qubits, label)?, Complex64::new(c, 0.0))))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic string order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, s: PauliString, c: Complex64) -> Result<()> {
        if s.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: s.n_qubits });
        }
        *self.terms.entry(s).or_default() += c;
        Ok(())
    }

    /// Removes terms with `|c| < threshold`.
    pub fn simplify(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        let f = factor.into();
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c * f)).collect(),
        }
    }

    /// Operator product, without dropping small terms.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let mut out = PauliOperator::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = pauli_multiply(a, b)?;
                *out.terms.entry(s).or_default() += ca * cb * phase.to_complex();
            }
        }
        Ok(out)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        PauliOperator {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(s, c)| (s.clone(), c.conj())).collect(),
        }
    }

    /// True when every coefficient is real within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// True when every string is built from `I` and `Z` only.
    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(PauliString::is_diagonal)
    }

    /// Sum of `|c|` over all terms; an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Embeds into a larger register starting at qubit `offset`.
    pub fn embed(&self, n_qubits: usize, offset: usize) -> Result<PauliOperator> {
        let mut out = PauliOperator::zero(n_qubits);
        for (s, c) in &self.terms {
            out.terms.insert(s.embed(n_qubits, offset)?, *c);
        }
        Ok(out)
    }

    /// Kronecker product with `other` on the qubits after `self`.
    pub fn tensor(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = PauliOperator::zero(self.n_qubits + other.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *out.terms.entry(a.tensor(b)).or_default() += ca * cb;
            }
        }
        out
    }

    fn check_matrix_size(&self, max_qubits: usize) -> Result<usize> {
        if self.n_qubits > max_qubits || self.n_qubits >= WORD {
            return Err(Error::CapExceeded {
                what: "explicit Pauli matrix".into(),
                requested: format!("2^{} basis states", self.n_qubits),
                cap: format!("2^{max_qubits}"),
            });
        }
        Ok(1usize << self.n_qubits)
    }

    /// Sparse matrix under [`max_matrix_qubits`].
    pub fn to_matrix(&self) -> Result<SparseMatrix> {
        self.to_matrix_with_cap(max_matrix_qubits())
    }

    pub fn to_matrix_with_cap(&self, max_qubits: usize) -> Result<SparseMatrix> {
        let dim = self.check_matrix_size(max_qubits)?;
        // Strings sharing an x-mask share their sparsity pattern.
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (s, c) in &self.terms {
            let (x, z) = s.masks();
            let phase = Phase::from_power(s.num_y() as i64).to_complex();
            groups.entry(x).or_default().push((z, c * phase));
        }
        let rows = (0..dim as u64)
            .map(|row| {
                groups
                    .iter()
                    .map(|(&x, zs)| {
                        let col = row ^ x;
                        let v: Complex64 = zs
                            .iter()
                            .map(|&(z, c)| if (col & z).count_ones() % 2 == 1 { -c } else { c })
                            .sum();
                        (col as usize, v)
                    })
                    .collect()
            })
            .collect();
        Ok(SparseMatrix::from_rows(dim, rows))
    }

    /// Dense matrix of the operator restricted to the given basis states.
    pub fn restricted_matrix(&self, basis: &[u64]) -> Result<DMatrix<Complex64>> {
        Ok(self.restricted_sparse(basis)?.to_dense())
    }

    /// Sparse matrix of the operator restricted to the given basis states,
    /// rows and columns in the order of `basis`. Amplitude leaking out of the
    /// listed states is discarded, so this is a compression onto the span.
    pub fn restricted_sparse(&self, basis: &[u64]) -> Result<SparseMatrix> {
        if self.n_qubits > WORD {
            return Err(Error::CapExceeded {
                what: "basis restriction".into(),
                requested: format!("{} qubits", self.n_qubits),
                cap: format!("{WORD}"),
            });
        }
        let position: std::collections::HashMap<u64, usize> =
            basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let mut rows = vec![Vec::new(); basis.len()];
        for (col, &b) in basis.iter().enumerate() {
            for (s, c) in &self.terms {
                let (phase, image) = s.apply_to_basis(b);
                if let Some(&row) = position.get(&image) {
                    rows[row].push((col, c * phase));
                }
            }
        }
        Ok(SparseMatrix::from_rows(basis.len(), rows))
    }

    /// Matrix-free action on a state vector of length `2^n`.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.check_matrix_size(WORD - 1)?;
        if input.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: input.len() });
        }
        out.iter_mut().for_each(|o| *o = Complex64::default());
        for (s, c) in &self.terms {
            apply_string_add(s, *c, input, out);
        }
        Ok(())
    }

    /// Values of a diagonal operator on every basis state.
    pub fn diagonal_values(&self) -> Result<Vec<f64>> {
        if !self.is_diagonal() {
            return Err(Error::invalid("operator is not diagonal in the computational basis"));
        }
        let dim = self.check_matrix_size(WORD - 1)?;
        Ok((0..dim as u64)
            .map(|b| {
                self.terms
                    .iter()
                    .map(|(s, c)| s.apply_to_basis(b).0 * c)
                    .sum::<Complex64>()
                    .re
            })
            .collect())
    }

    /// Pauli expansion of a `2^n x 2^n` matrix, dropping coefficients below
    /// `threshold`.
    pub fn from_matrix(m: &DMatrix<Complex64>, threshold: f64) -> Result<Self> {
        let n_qubits = matrix_qubits(m.nrows(), m.ncols())?;
        let dim = m.nrows();
        let mut op = Self::zero(n_qubits);
        let mut line = vec![Complex64::default(); dim];
        for x in 0..dim {
            // c(x, z) = i^{|x & z|} / dim * sum_c (-1)^{c.z} A[c, c ^ x]
            for (c, v) in line.iter_mut().enumerate() {
                *v = m[(c, c ^ x)];
            }
            walsh_hadamard(&mut line);
            for (z, v) in line.iter().enumerate() {
                let c = v * Phase::from_power((x & z).count_ones() as i64).to_complex() / dim as f64;
                if c.norm() >= threshold && c.norm() > 0.0 {
                    op.terms.insert(PauliString::from_masks(n_qubits, x as u64, z as u64), c);
                }
            }
        }
        Ok(op)
    }

    /// Z-string expansion of a diagonal operator given its values on every
    /// basis state.
    pub fn from_diagonal(values: &[f64], threshold: f64) -> Result<Self> {
        let n_qubits = matrix_qubits(values.len(), values.len())?;
        let mut line: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        walsh_hadamard(&mut line);
        let scale = 1.0 / values.len() as f64;
        let mut op = Self::zero(n_qubits);
        for (z, v) in line.iter().enumerate() {
            let c = v * scale;
            if c.norm() >= threshold && c.norm() > 0.0 {
                op.terms.insert(PauliString::from_masks(n_qubits, 0, z as u64), c);
            }
        }
        Ok(op)
    }

    /// Writes the text form: a `nqubits=<n>` header then `<re> <im> <string>` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("nqubits={}\n", self.n_qubits);
        for (s, c) in &self.terms {
            out.push_str(&format!("{:.16e} {:.16e} {}\n", c.re, c.im, s));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let n_qubits: usize = header
            .strip_prefix("nqubits=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(hline, "expected `nqubits=<n>`"))?;
        let mut op = PauliOperator::zero(n_qubits);
        for (lineno, line) in lines {
            let mut parts = line.splitn(3, char::is_whitespace);
            let re = parse_float(parts.next(), lineno)?;
            let im = parse_float(parts.next(), lineno)?;
            let label = parts.next().unwrap_or("").trim();
            let s = PauliString::parse(n_qubits, label).map_err(|e| Error::parse(lineno, e.to_string()))?;
            op.add_term(s, Complex64::new(re, im))?;
        }
        Ok(op)
    }
}

fn parse_float(token: Option<&str>, line: usize) -> Result<f64> {
    token
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(line, "expected a floating-point coefficient"))
}

fn matrix_qubits(rows: usize, cols: usize) -> Result<usize> {
    if rows != cols {
        return Err(Error::DimensionMismatch { expected: rows, actual: cols });
    }
    if !rows.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(rows));
    }
    Ok(rows.trailing_zeros() as usize)
}

/// In-place unnormalized transform `v[z] <- sum_c (-1)^{c.z} v[c]`.
fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// `out += c * P * input`.
pub(crate) fn apply_string_add(s: &PauliString, c: Complex64, input: &[Complex64], out: &mut [Complex64]) {
    let (x, z) = s.masks();
    let base = c * Phase::from_power(s.num_y() as i64).to_complex();
    for (b, amp) in input.iter().enumerate() {
        let b = b as u64;
        let v = if (b & z).count_ones() % 2 == 1 { -base } else { base };
        out[(b ^ x) as usize] += v * amp;
    }
}

/// Linear combination `sum_k w_k * op_k` with like terms merged and terms
/// below `drop_threshold` removed.
pub fn op_combine(ops: &[(Complex64, &PauliOperator)], drop_threshold: f64) -> Result<PauliOperator> {
    if drop_threshold < 0.0 {
        return Err(Error::invalid("drop threshold must be non-negative"));
    }
    let n = ops.first().map(|(_, op)| op.n_qubits).unwrap_or(0);
    let mut out = PauliOperator::zero(n);
    for (w, op) in ops {
        if op.n_qubits != n {
            return Err(Error::QubitMismatch { left: n, right: op.n_qubits });
        }
        for (s, c) in &op.terms {
            *out.terms.entry(s.clone()).or_default() += w * c;
        }
    }
    out.simplify(drop_threshold);
    Ok(out)
}
