//! FCIDUMP integral files.
//!
//! A Fortran namelist header (`&FCI NORB=.., NELEC=.., MS2=.., ... &END`)
//! followed by `value i j k l` lines with 1-based spatial indices:
//! `i j k l` two-electron, `i j 0 0` one-electron, `i 0 0 0` orbital energy,
//! `0 0 0 0` core energy. Two-electron integrals are in chemist notation
//! `(ij|kl)` and listed once per 8-fold permutation class. A non-standard
//! `CONV='PHYS'` header key declares physicist `<ij|kl>` values instead;
//! they are converted to chemist order on load.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerance for `h_ij = h_ji` when both triangles are listed.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralConvention {
    Chemist,
    Physicist,
}

/// Parsed integral file over spatial orbitals, 0-based, with all
/// permutational partners of the two-electron integrals expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralFile {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub orbsym: Vec<i64>,
    pub isym: i64,
    pub core_energy: f64,
    pub one_body: DMatrix<f64>,
    /// Chemist-notation `(ij|kl)` keyed by `[i, j, k, l]`.
    pub two_body: BTreeMap<[usize; 4], f64>,
    pub orbital_energies: Option<Vec<f64>>,
}

impl IntegralFile {
    pub fn new(norb: usize, nelec: usize, ms2: i64) -> Self {
        IntegralFile {
            norb,
            nelec,
            ms2,
            orbsym: vec![1; norb],
            isym: 1,
            core_energy: 0.0,
            one_body: DMatrix::zeros(norb, norb),
            two_body: BTreeMap::new(),
            orbital_energies: None,
        }
    }

    pub fn set_one_body(&mut self, i: usize, j: usize, v: f64) {
        self.one_body[(i, j)] = v;
        self.one_body[(j, i)] = v;
    }

    /// Stores `(ij|kl)` and its seven real-orbital partners.
    pub fn set_two_body(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        for key in permutations(i, j, k, l) {
            self.two_body.insert(key, v);
        }
    }

    pub fn eri(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.two_body.get(&[i, j, k, l]).copied().unwrap_or(0.0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let (header, body_start) = read_header(&lines)?;
        let norb = header.get_usize("NORB")?;
        let nelec = header.get_usize("NELEC").unwrap_or(0);
        let ms2 = header.get_int("MS2").unwrap_or(0);
        let convention = match header.values.get("CONV").and_then(|v| v.first()) {
            None => IntegralConvention::Chemist,
            Some(v) => match v.trim_matches(|c| c == '\'' || c == '"').to_ascii_uppercase().as_str() {
                "CHEM" | "CHEMIST" => IntegralConvention::Chemist,
                "PHYS" | "PHYSICIST" => IntegralConvention::Physicist,
                other => return Err(Error::parse(header.line, format!("unknown CONV `{other}`"))),
            },
        };
        let mut file = IntegralFile::new(norb, nelec, ms2);
        if let Some(sym) = header.values.get("ORBSYM") {
            file.orbsym = sym
                .iter()
                .map(|s| s.parse().map_err(|_| Error::parse(header.line, format!("bad ORBSYM `{s}`"))))
                .collect::<Result<_>>()?;
        }
        file.isym = header.get_int("ISYM").unwrap_or(1);

        let mut seen_one: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut energies: Vec<Option<f64>> = vec![None; norb];
        for (offset, raw) in lines[body_start..].iter().enumerate() {
            let lineno = body_start + offset + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::parse(lineno, format!("expected `value i j k l`, got `{line}`")));
            }
            let value = parse_fortran_float(fields[0]).ok_or_else(|| Error::parse(lineno, format!("bad value `{}`", fields[0])))?;
            let mut idx = [0usize; 4];
            for (slot, f) in idx.iter_mut().zip(&fields[1..]) {
                *slot = f.parse().map_err(|_| Error::parse(lineno, format!("bad index `{f}`")))?;
                if *slot > norb {
                    return Err(Error::parse(lineno, format!("index {slot} exceeds NORB = {norb}")));
                }
            }
            match idx {
                [0, 0, 0, 0] => file.core_energy = value,
                [i, 0, 0, 0] => energies[i - 1] = Some(value),
                [i, j, 0, 0] if j > 0 => {
                    let (i, j) = (i - 1, j - 1);
                    if let Some(&other) = seen_one.get(&(j, i)) {
                        if (other - value).abs() > HERMITIAN_TOL {
                            return Err(Error::NotHermitian { deviation: (other - value).abs() });
                        }
                    }
                    seen_one.insert((i, j), value);
                    file.set_one_body(i, j, value);
                }
                [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                    let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                    match convention {
                        IntegralConvention::Chemist => file.set_two_body(i, j, k, l, value),
                        // <ij|kl> = (ik|jl)
                        IntegralConvention::Physicist => file.set_two_body(i, k, j, l, value),
                    }
                }
                _ => return Err(Error::parse(lineno, format!("unsupported index pattern {idx:?}"))),
            }
        }
        if energies.iter().any(Option::is_some) {
            file.orbital_energies = Some(energies.into_iter().map(|e| e.unwrap_or(f64::NAN)).collect());
        }
        Ok(file)
    }

    pub fn read(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&crate::error::read_text(path)?)
    }

    /// Chemist-convention text with one entry per permutation class.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let orbsym: Vec<String> = self.orbsym.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(
            out,
            "&FCI NORB={}, NELEC={}, MS2={},\n  ORBSYM={},\n  ISYM={},\n&END",
            self.norb,
            self.nelec,
            self.ms2,
            orbsym.join(","),
            self.isym
        );
        let mut emitted = std::collections::BTreeSet::new();
        for (&[i, j, k, l], &v) in &self.two_body {
            let canonical = permutations(i, j, k, l).into_iter().min().expect("non-empty");
            if v != 0.0 && emitted.insert(canonical) {
                let [a, b, c, d] = canonical;
                let _ = writeln!(out, "{:.17e} {} {} {} {}", v, a + 1, b + 1, c + 1, d + 1);
            }
        }
        for i in 0..self.norb {
            for j in 0..=i {
                let v = self.one_body[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{:.17e} {} {} 0 0", v, i + 1, j + 1);
                }
            }
        }
        if let Some(e) = &self.orbital_energies {
            for (i, v) in e.iter().enumerate() {
                let _ = writeln!(out, "{:.17e} {} 0 0 0", v, i + 1);
            }
        }
        let _ = writeln!(out, "{:.17e} 0 0 0 0", self.core_energy);
        out
    }
}

fn permutations(i: usize, j: usize, k: usize, l: usize) -> [[usize; 4]; 8] {
    [
        [i, j, k, l],
        [j, i, k, l],
        [i, j, l, k],
        [j, i, l, k],
        [k, l, i, j],
        [l, k, i, j],
        [k, l, j, i],
        [l, k, j, i],
    ]
}

/// Accepts `1.0D-03`, `1.0d-3` and ordinary floats.
pub fn parse_fortran_float(s: &str) -> Option<f64> {
    s.replace(['D', 'd'], "E").parse().ok()
}

struct Header {
    line: usize,
    values: BTreeMap<String, Vec<String>>,
}

impl Header {
    fn get_usize(&self, key: &str) -> Result<usize> {
        self.values
            .get(key)
            .and_then(|v| v.first())
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(self.line, format!("missing or invalid {key}")))
    }

    fn get_int(&self, key: &str) -> Result<i64> {
        self.values
            .get(key)
            .and_then(|v| v.first())
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(self.line, format!("missing or invalid {key}")))
    }
}

fn read_header(lines: &[&str]) -> Result<(Header, usize)> {
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    if !lines[start].trim_start().to_ascii_uppercase().starts_with("&FCI") {
        return Err(Error::parse(start + 1, "expected `&FCI` namelist header"));
    }
    let mut text = String::new();
    let mut end = None;
    for (i, raw) in lines.iter().enumerate().skip(start) {
        let upper = raw.to_ascii_uppercase();
        let chunk = if i == start { upper.trim_start().trim_start_matches("&FCI").to_string() } else { upper };
        if let Some(pos) = chunk.find("&END").or_else(|| chunk.find('/')) {
            text.push_str(&chunk[..pos]);
            end = Some(i + 1);
            break;
        }
        // a bare `&` line also closes some writers' namelists
        if i != start && chunk.trim() == "&" {
            end = Some(i + 1);
            break;
        }
        text.push_str(&chunk);
        text.push(' ');
    }
    let end = end.ok_or_else(|| Error::parse(start + 1, "unterminated namelist header"))?;

    let normalized = text.replace(',', " ");
    let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut tokens = Vec::new();
    // split `KEY=VAL`, `KEY= VAL`, `KEY =VAL`
    for piece in normalized.split_whitespace() {
        let mut rest = piece;
        while let Some(eq) = rest.find('=') {
            let (key, after) = rest.split_at(eq);
            if !key.is_empty() {
                tokens.push(key.to_string());
            }
            tokens.push("=".to_string());
            rest = &after[1..];
        }
        if !rest.is_empty() {
            tokens.push(rest.to_string());
        }
    }
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() && tokens[i + 1] == "=" {
            current = Some(tokens[i].clone());
            values.entry(tokens[i].clone()).or_default();
            i += 2;
            continue;
        }
        match &current {
            Some(key) => values.get_mut(key).expect("inserted").push(tokens[i].clone()),
            None => return Err(Error::parse(start + 1, format!("stray token `{}` in header", tokens[i]))),
        }
        i += 1;
    }
    Ok((Header { line: start + 1, values }, end))
}
