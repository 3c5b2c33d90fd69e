//! Heisenberg Fock modules.
//!
//! States are exact rational combinations of PBW monomials in negative modes
//! over a highest-weight vector: the untwisted modules `pi^lambda` carry
//! integer modes with `b_0` acting by `lambda`, the twisted module `pi^sigma`
//! carries half-odd-integer modes. Mode indices are stored in half-units
//! (mode `-3/2` is `-3`, mode `-2` is `-4`) so that both sectors share one
//! integer representation.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::series::Coeff;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sector {
    /// `pi^lambda`: integer modes, `b_0` acts by `lambda`.
    Untwisted { lambda: Rat },
    /// `pi^sigma`: half-odd-integer modes.
    Twisted,
}

impl Sector {
    pub fn untwisted_zero() -> Sector {
        Sector::Untwisted { lambda: Rat::zero() }
    }

    pub fn is_twisted(&self) -> bool {
        matches!(self, Sector::Twisted)
    }

    /// Mode indices live in `offset/2 + Z` (half-units: parity of the key).
    pub fn mode_parity(&self) -> i32 {
        if self.is_twisted() {
            1
        } else {
            0
        }
    }

    pub fn admits_mode(&self, half: i32) -> bool {
        half.rem_euclid(2) == self.mode_parity()
    }

    /// Conformal weight of the highest-weight vector.
    pub fn ground_weight(&self) -> Rat {
        match self {
            Sector::Twisted => Rat::new(1, 16),
            Sector::Untwisted { lambda } => &(lambda * lambda) / &Rat::from(2),
        }
    }
}

/// PBW monomial: modes in half-units, all negative, sorted descending
/// (closest to zero first).
pub type Monomial = Vec<i32>;

pub fn monomial_degree_half(m: &Monomial) -> i64 {
    -m.iter().map(|&x| x as i64).sum::<i64>()
}

/// Parity of the monomial under the lift of `b -> -b`.
pub fn monomial_sign_flip(m: &Monomial) -> i32 {
    (m.len() % 2) as i32
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    sector: Sector,
    terms: BTreeMap<Monomial, Rat>,
}

impl FockVector {
    pub fn zero(sector: Sector) -> FockVector {
        FockVector {
            sector,
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(sector: Sector) -> FockVector {
        let mut v = FockVector::zero(sector);
        v.terms.insert(Vec::new(), Rat::one());
        v
    }

    pub fn from_monomial(sector: Sector, m: Monomial, c: Rat) -> FockVector {
        let mut v = FockVector::zero(sector);
        if !c.is_zero() {
            v.terms.insert(m, c);
        }
        v
    }

    pub fn sector(&self) -> &Sector {
        &self.sector
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: &Rat) {
        if c.is_zero() || other.is_zero() {
            return;
        }
        debug_assert!(self.terms.is_empty() || self.sector == other.sector);
        if self.terms.is_empty() {
            self.sector = other.sector.clone();
        }
        for (m, r) in other.terms() {
            self.add_term(m.clone(), &(r * c));
        }
    }

    /// Largest counting degree over the support, in half-units.
    pub fn max_degree_half(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| monomial_degree_half(m))
            .max()
            .unwrap_or(0)
    }

    /// Degree in half-units when homogeneous, else `None`.
    pub fn homogeneous_degree_half(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| monomial_degree_half(m));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// `sigma`-eigenvalue sign when the support has uniform mode count
    /// parity: `0` for fixed vectors, `1` for sign-flipped ones.
    pub fn sigma_parity(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| monomial_sign_flip(m));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Image under the involution `b -> -b`.
    pub fn sigma_image(&self) -> FockVector {
        let mut out = FockVector::zero(self.sector.clone());
        for (m, c) in self.terms() {
            let s = if monomial_sign_flip(m) == 1 {
                -c.clone()
            } else {
                c.clone()
            };
            out.add_term(m.clone(), &s);
        }
        out
    }

    /// Apply a single mode `b_(half/2)` to the vector.
    pub fn apply_mode(&self, half: i32) -> Result<FockVector> {
        if !self.sector.admits_mode(half) {
            return Err(Error::SectorMismatch(format!(
                "mode {} on sector {:?}",
                Rat::new(half as i64, 2),
                self.sector
            )));
        }
        let mut out = FockVector::zero(self.sector.clone());
        for (m, c) in self.terms() {
            apply_mode_monomial(&self.sector, half, m, c, &mut out);
        }
        Ok(out)
    }

    pub fn scale(&self, r: &Rat) -> FockVector {
        let mut out = FockVector::zero(self.sector.clone());
        out.add_scaled(self, r);
        out
    }
}

fn apply_mode_monomial(sector: &Sector, half: i32, m: &Monomial, c: &Rat, out: &mut FockVector) {
    if half < 0 {
        // creation: insert keeping descending order
        let mut nm = m.clone();
        let pos = nm.partition_point(|&x| x >= half);
        nm.insert(pos, half);
        out.add_term(nm, c);
        return;
    }
    if half == 0 {
        if let Sector::Untwisted { lambda } = sector {
            out.add_term(m.clone(), &(c * lambda));
        }
        return;
    }
    // annihilation: pair against matching creation modes; the pass-through
    // term hits the highest-weight vector and vanishes.
    let index = Rat::new(half as i64, 2);
    let mut i = 0;
    while i < m.len() {
        let v = m[i];
        let mut j = i;
        while j < m.len() && m[j] == v {
            j += 1;
        }
        if v == -half {
            let mult = (j - i) as i64;
            let mut nm = Vec::with_capacity(m.len() - 1);
            nm.extend_from_slice(&m[..i]);
            nm.extend_from_slice(&m[i + 1..]);
            out.add_term(nm, &(&(c * &index) * &Rat::from(mult)));
        }
        i = j;
    }
}

impl Coeff for FockVector {
    fn zero() -> Self {
        FockVector::zero(Sector::untwisted_zero())
    }
    fn is_zero(&self) -> bool {
        FockVector::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        if out.terms.is_empty() {
            return other.clone();
        }
        out.add_scaled(other, &Rat::one());
        out
    }
    fn scale(&self, r: &Rat) -> Self {
        FockVector::scale(self, r)
    }
}

/// All monomials of exact degree `d` (half-units) in the given sector,
/// lexicographically ordered.
pub fn monomials_of_degree(sector: &Sector, d: i64) -> Vec<Monomial> {
    let step = if sector.is_twisted() { 1 } else { 2 };
    let parity = sector.mode_parity() as i64;
    let mut out = Vec::new();
    let mut cur: Vec<i32> = Vec::new();
    // partitions of d into parts with part % 2 == parity, parts listed
    // non-increasing (modes non-decreasing in absolute value)
    fn rec(
        remaining: i64,
        max_part: i64,
        step: i64,
        parity: i64,
        cur: &mut Vec<i32>,
        out: &mut Vec<Monomial>,
    ) {
        if remaining == 0 {
            out.push(cur.iter().map(|&p| -(p as i32)).collect());
            return;
        }
        let mut part = max_part.min(remaining);
        while part >= step.max(1) {
            if part % 2 == parity % 2 && part <= remaining {
                cur.push(part as i32);
                rec(remaining - part, part, step, parity, cur, out);
                cur.pop();
            }
            part -= 1;
        }
    }
    if d == 0 {
        return vec![Vec::new()];
    }
    if d < 0 {
        return out;
    }
    rec(d, d, step, parity, &mut cur, &mut out);
    // normalize each monomial to descending order (closest to zero first)
    for m in &mut out {
        m.sort_unstable_by(|a, b| b.cmp(a));
    }
    out.sort();
    out
}

/// All monomials of degree `<= d` (half-units), ordered by degree then lex.
pub fn basis_up_to(sector: &Sector, d: i64) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=d {
        out.extend(monomials_of_degree(sector, deg));
    }
    out
}

// ---------------------------------------------------------------------------
// Text format: `b(-3/2)*b(-1/2)|0;tw>`, `b(-2)^2|lam=1>`
// ---------------------------------------------------------------------------

pub fn format_monomial(sector: &Sector, m: &Monomial) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < m.len() {
        let v = m[i];
        let mut j = i;
        while j < m.len() && m[j] == v {
            j += 1;
        }
        let count = j - i;
        if !s.is_empty() {
            s.push('*');
        }
        s.push_str(&format!("b({})", Rat::new(v as i64, 2)));
        if count > 1 {
            s.push_str(&format!("^{}", count));
        }
        i = j;
    }
    let ket = match sector {
        Sector::Twisted => "|0;tw>".to_string(),
        Sector::Untwisted { lambda } => {
            if lambda.is_zero() {
                "|0>".to_string()
            } else {
                format!("|lam={}>", lambda)
            }
        }
    };
    s.push_str(&ket);
    s
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{}*", a)?;
            }
            write!(f, "{}", format_monomial(&self.sector, m))?;
        }
        Ok(())
    }
}

/// Parse the Fock vector text format, e.g. `b(-3/2)*b(-1/2)|0;tw>` or
/// `3/2*b(-2)^2|lam=1> - b(-4)|lam=1>`.
pub fn parse_fock(input: &str) -> Result<FockVector> {
    let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Ok(FockVector::zero(Sector::untwisted_zero()));
    }
    // split into signed terms; '-' inside parens or kets is protected
    let mut terms_raw: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut in_ket = false;
    for (i, ch) in compact.chars().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '|' => in_ket = true,
            '>' => in_ket = false,
            '+' | '-' if depth == 0 && !in_ket && i > 0 => {
                terms_raw.push(std::mem::take(&mut cur));
                if ch == '-' {
                    cur.push('-');
                }
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        terms_raw.push(cur);
    }

    let mut result: Option<FockVector> = None;
    for t in &terms_raw {
        let ket_start = t
            .find('|')
            .ok_or_else(|| Error::Parse(format!("missing ket in `{}`", t)))?;
        let ket = &t[ket_start..];
        let sector = match ket {
            "|0;tw>" => Sector::Twisted,
            "|0>" => Sector::untwisted_zero(),
            _ => {
                let inner = ket
                    .strip_prefix("|lam=")
                    .and_then(|r| r.strip_suffix('>'))
                    .ok_or_else(|| Error::Parse(format!("bad ket `{}`", ket)))?;
                Sector::Untwisted { lambda: inner.parse()? }
            }
        };
        let mut body = &t[..ket_start];
        let mut coeff = Rat::one();
        if body.starts_with('-') {
            coeff = -coeff;
            body = &body[1..];
        }
        let mut modes: Monomial = Vec::new();
        for piece in body.split('*') {
            if piece.is_empty() {
                continue;
            }
            if let Some(rest) = piece.strip_prefix("b(") {
                let (mode_s, pow_s) = match rest.split_once(')') {
                    Some((m, p)) => (m, p),
                    None => return Err(Error::Parse(format!("bad factor `{}`", piece))),
                };
                let idx: Rat = mode_s.parse()?;
                let half = (&idx * &Rat::from(2))
                    .to_i64()
                    .ok_or_else(|| Error::Parse(format!("mode not half-integral: {}", idx)))?;
                if half >= 0 {
                    return Err(Error::Parse(format!("mode {} must be negative", idx)));
                }
                if !sector.admits_mode(half as i32) {
                    return Err(Error::SectorMismatch(format!(
                        "mode {} in sector of `{}`",
                        idx, ket
                    )));
                }
                let count: u32 = if pow_s.is_empty() {
                    1
                } else {
                    pow_s
                        .strip_prefix('^')
                        .and_then(|p| p.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("bad power `{}`", pow_s)))?
                };
                for _ in 0..count {
                    modes.push(half as i32);
                }
            } else {
                let c: Rat = piece.parse()?;
                coeff = &coeff * &c;
            }
        }
        modes.sort_unstable_by(|a, b| b.cmp(a));
        let v = FockVector::from_monomial(sector, modes, coeff);
        result = Some(match result {
            None => v,
            Some(mut acc) => {
                if acc.sector != v.sector && !acc.is_zero() && !v.is_zero() {
                    return Err(Error::SectorMismatch(
                        "mixed sectors in one vector".into(),
                    ));
                }
                acc.add_scaled(&v, &Rat::one());
                acc
            }
        });
    }
    result.ok_or_else(|| Error::Parse("empty vector".into()))
}
