//! Formal Laurent series in `z^(1/N)` with exact rational coefficients and an
//! explicit truncation window.
//!
//! Every series fixes its ramification `N` at construction; exponents are
//! stored as integer numerators over `N`. The window `[lo, hi]` is the range
//! of exponents on which coefficients are claimed. Outside the window nothing
//! is asserted, and every operation shrinks windows pessimistically so that a
//! coefficient is never reported unless all contributions to it are known.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::rat::Rat;

/// Coefficient ring of a series: scalars, vectors, or operator slices.
pub trait Coeff: Clone + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn scale(&self, r: &Rat) -> Self;
}

impl Coeff for Rat {
    fn zero() -> Self {
        Rat::zero()
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, r: &Rat) -> Self {
        self * r
    }
}

/// Window bound: finite exponent numerator (over the series ramification) or
/// an infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Bound {
    pub fn fin(self) -> Option<i64> {
        match self {
            Bound::Fin(k) => Some(k),
            _ => None,
        }
    }

    pub fn shift(self, d: i64) -> Bound {
        match self {
            Bound::Fin(k) => Bound::Fin(k + d),
            b => b,
        }
    }

    /// Sum of bounds, used by the product window rule.
    pub fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::NegInf, Bound::PosInf) | (Bound::PosInf, Bound::NegInf) => {
                panic!("indeterminate bound sum")
            }
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            (Bound::PosInf, _) | (_, Bound::PosInf) => Bound::PosInf,
            (Bound::Fin(a), Bound::Fin(b)) => Bound::Fin(a + b),
        }
    }

}

#[derive(Clone, Debug, PartialEq)]
pub struct FracSeries<C: Coeff> {
    ram: u32,
    lo: Bound,
    hi: Bound,
    terms: BTreeMap<i64, C>,
}

pub type ScalarSeries = FracSeries<Rat>;

impl<C: Coeff> FracSeries<C> {
    pub fn zero(ram: u32) -> Self {
        FracSeries {
            ram,
            lo: Bound::NegInf,
            hi: Bound::PosInf,
            terms: BTreeMap::new(),
        }
    }

    pub fn with_window(ram: u32, lo: Bound, hi: Bound) -> Self {
        FracSeries {
            ram,
            lo,
            hi,
            terms: BTreeMap::new(),
        }
    }

    /// Exact monomial `c * z^(k/ram)` (window is all of the exponent line).
    pub fn monomial(ram: u32, k: i64, c: C) -> Self {
        let mut s = FracSeries::zero(ram);
        if !c.is_zero() {
            s.terms.insert(k, c);
        }
        s
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    pub fn lo(&self) -> Bound {
        self.lo
    }

    pub fn hi(&self) -> Bound {
        self.hi
    }

    pub fn window_str(&self) -> String {
        let f = |b: Bound| match b {
            Bound::NegInf => "-inf".to_string(),
            Bound::PosInf => "inf".to_string(),
            Bound::Fin(k) => Rat::new(k, self.ram as i64).to_string(),
        };
        format!("[{},{}]", f(self.lo), f(self.hi))
    }

    fn in_window(&self, k: i64) -> bool {
        (match self.lo {
            Bound::NegInf => true,
            Bound::Fin(l) => k >= l,
            Bound::PosInf => false,
        }) && (match self.hi {
            Bound::PosInf => true,
            Bound::Fin(h) => k <= h,
            Bound::NegInf => false,
        })
    }

    /// Exponent of a stored key as an exact rational.
    pub fn exp_of(&self, k: i64) -> Rat {
        Rat::new(k, self.ram as i64)
    }

    pub fn key_of(&self, e: &Rat) -> Result<i64> {
        let scaled = e * &Rat::from(self.ram as i64);
        scaled
            .to_i64()
            .ok_or_else(|| Error::BadExponent(e.to_string(), self.ram))
    }

    pub fn coeff_at_key(&self, k: i64) -> C {
        self.terms.get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff(&self, e: &Rat) -> Result<C> {
        let k = self.key_of(e)?;
        if !self.in_window(k) {
            return Err(Error::InsufficientWindow(format!(
                "exponent {} outside window {}",
                e,
                self.window_str()
            )));
        }
        Ok(self.coeff_at_key(k))
    }

    pub fn set(&mut self, k: i64, c: C) {
        if !self.in_window(k) {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, c);
        }
    }

    pub fn add_to(&mut self, k: i64, c: &C) {
        if !self.in_window(k) || c.is_zero() {
            return;
        }
        let cur = self.coeff_at_key(k);
        self.set(k, cur.add_ref(c));
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &C)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn support_min(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn support_max(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_zero_series(&self) -> bool {
        self.terms.is_empty()
    }

    /// Mark the series as known-zero below its support. Sound whenever every
    /// operand that produced it was itself exact below its window.
    pub fn assume_exact_below(mut self) -> Self {
        self.lo = Bound::NegInf;
        self
    }

    pub fn clip_window(mut self, lo: Bound, hi: Bound) -> Self {
        self.lo = self.lo.max(lo);
        self.hi = self.hi.min(hi);
        let (l, h) = (self.lo, self.hi);
        self.terms.retain(|k, _| {
            (match l {
                Bound::NegInf => true,
                Bound::Fin(b) => *k >= b,
                Bound::PosInf => false,
            }) && (match h {
                Bound::PosInf => true,
                Bound::Fin(b) => *k <= b,
                Bound::NegInf => false,
            })
        });
        self
    }

    fn check_ram(&self, other: &FracSeries<C>) -> Result<()> {
        if self.ram != other.ram {
            Err(Error::MismatchedRamification(self.ram, other.ram))
        } else {
            Ok(())
        }
    }

    /// Termwise sum; window is the intersection of the operand windows.
    pub fn add(&self, other: &FracSeries<C>) -> Result<FracSeries<C>> {
        self.check_ram(other)?;
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        let mut out = FracSeries::with_window(self.ram, lo, hi);
        for (k, c) in self.iter() {
            out.add_to(k, c);
        }
        for (k, c) in other.iter() {
            out.add_to(k, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> FracSeries<C> {
        self.scale(&Rat::from(-1))
    }

    pub fn sub(&self, other: &FracSeries<C>) -> Result<FracSeries<C>> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rat) -> FracSeries<C> {
        let mut out = FracSeries::with_window(self.ram, self.lo, self.hi);
        if r.is_zero() {
            return out;
        }
        for (k, c) in self.iter() {
            out.set(k, c.scale(r));
        }
        out
    }

    /// Multiply by an exact monomial `r * z^(shift/ram)`.
    pub fn shift_scale(&self, shift: i64, r: &Rat) -> FracSeries<C> {
        let mut out = FracSeries::with_window(self.ram, self.lo.shift(shift), self.hi.shift(shift));
        if r.is_zero() {
            return out;
        }
        for (k, c) in self.iter() {
            out.set(k + shift, c.scale(r));
        }
        out
    }

    /// Termwise derivative in `z`: `z^q -> q z^(q-1)`. Window shifts by -1.
    pub fn derivative(&self) -> FracSeries<C> {
        let step = self.ram as i64;
        let mut out =
            FracSeries::with_window(self.ram, self.lo.shift(-step), self.hi.shift(-step));
        for (k, c) in self.iter() {
            out.set(k - step, c.scale(&Rat::new(k, step)));
        }
        out
    }

    /// Coefficient of `z^(-1)`; errors when the window does not cover it.
    pub fn residue(&self) -> Result<C> {
        let k = -(self.ram as i64);
        if !self.in_window(k) {
            return Err(Error::IndeterminateResidue(self.window_str()));
        }
        Ok(self.coeff_at_key(k))
    }

    /// Reinterpret on a finer (or compatible coarser) exponent grid.
    pub fn convert_ram(&self, new_ram: u32) -> Result<FracSeries<C>> {
        if new_ram == self.ram {
            return Ok(self.clone());
        }
        let conv = |k: i64| -> Result<i64> {
            let x = (k as i128) * (new_ram as i128);
            let r = self.ram as i128;
            if x % r != 0 {
                return Err(Error::BadExponent(
                    Rat::new(k, self.ram as i64).to_string(),
                    new_ram,
                ));
            }
            Ok((x / r) as i64)
        };
        let cb = |b: Bound| -> Result<Bound> {
            Ok(match b {
                Bound::Fin(k) => Bound::Fin(conv(k)?),
                x => x,
            })
        };
        let mut out = FracSeries::with_window(new_ram, cb(self.lo)?, cb(self.hi)?);
        for (k, c) in self.iter() {
            out.set(conv(k)?, c.clone());
        }
        Ok(out)
    }

    /// Semantic comparison across possibly different ramifications.
    pub fn same_series(&self, other: &FracSeries<C>) -> bool {
        let l = self.ram.lcm(&other.ram);
        match (self.convert_ram(l), other.convert_ram(l)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }

    /// Equal stored content, ignoring windows (and allowing different grids).
    pub fn terms_eq(&self, other: &FracSeries<C>) -> bool {
        let l = self.ram.lcm(&other.ram);
        match (self.convert_ram(l), other.convert_ram(l)) {
            (Ok(a), Ok(b)) => a.terms == b.terms,
            _ => false,
        }
    }

    /// Lowest exponent key at which the series can be nonzero: the support
    /// minimum (coefficients below the window are zero), or just past the
    /// window top for an empty truncated series, or `PosInf` for an exact
    /// zero.
    fn content_floor(&self) -> Bound {
        match self.support_min() {
            Some(k) => Bound::Fin(k),
            None => self.hi,
        }
    }
}

impl ScalarSeries {
    pub fn from_terms(ram: u32, terms: &[(i64, Rat)]) -> ScalarSeries {
        let mut s = FracSeries::zero(ram);
        for (k, c) in terms {
            s.add_to(*k, c);
        }
        s
    }

    /// Cauchy product. Coefficients below a window are zero and above it
    /// unknown, so a product coefficient at `e` is reported only when no
    /// unknown tail can reach it: window low `la + lb`, window high
    /// `min(ha + floor_b, hb + floor_a)` with `floor` the lowest possibly
    /// nonzero exponent of the other operand.
    pub fn mul(&self, other: &ScalarSeries) -> Result<ScalarSeries> {
        self.check_ram(other)?;
        let eff = |s: &ScalarSeries| match s.lo {
            Bound::NegInf => s.content_floor(),
            b => b,
        };
        let lo = eff(self).add(eff(other));
        let hi = (self.hi.add(other.content_floor())).min(other.hi.add(self.content_floor()));
        let mut out = FracSeries::with_window(self.ram, lo, hi);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                out.add_to(ka + kb, &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn pow_u(&self, n: u64) -> Result<ScalarSeries> {
        let mut acc = FracSeries::monomial(self.ram, 0, Rat::one());
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn leading(&self) -> Option<(i64, &Rat)> {
        self.terms.iter().next().map(|(k, c)| (*k, c))
    }

    /// Raise to an exact rational power `q`. The series must have a strictly
    /// positive leading exponent `m` unless `q` is a nonnegative integer; the
    /// leading coefficient must admit an exact rational `q`-th power. The
    /// binomial expansion of `(1+u)^q` is truncated to the relative precision
    /// the operand window supports.
    pub fn pow_frac(&self, q: &Rat) -> Result<ScalarSeries> {
        if let Some(n) = q.to_i64() {
            if n >= 0 {
                return self.pow_u(n as u64);
            }
        }
        let (mk, c) = self
            .leading()
            .ok_or(Error::ZeroLeadingCoefficient)?;
        let c = c.clone();
        let cq = c.pow_rat(q).ok_or_else(|| {
            Error::ScalingNotRepresentable(format!("({})^({})", c, q))
        })?;
        // u = self / (c z^m) - 1, exponents > 0
        let u = self.shift_scale(-mk, &c.inv()).add(&FracSeries::monomial(
            self.ram,
            0,
            -Rat::one(),
        ))?;
        if let Some(k) = u.support_min() {
            if k <= 0 {
                return Err(Error::NonPositiveInner);
            }
        }
        // relative precision of u inherited from the window; all series here
        // are exact below their support
        let u = u.assume_exact_below();
        let rel_hi = u.hi;
        let mut acc = FracSeries::with_window(self.ram, Bound::NegInf, rel_hi);
        acc.set(0, Rat::one());
        let mut upow = acc.clone();
        let step = u.support_min().unwrap_or(1).max(1);
        let mut j: u64 = 0;
        loop {
            j += 1;
            let reach = match rel_hi {
                Bound::PosInf => upow.support_min().is_some() || j == 1,
                Bound::Fin(h) => (j as i64) * step <= h,
                Bound::NegInf => false,
            };
            if !reach {
                break;
            }
            upow = upow.mul(&u)?.assume_exact_below();
            if upow.is_zero_series() && matches!(rel_hi, Bound::PosInf) {
                break;
            }
            acc = acc.add(&upow.scale(&Rat::binom(q, j)))?.assume_exact_below();
        }
        // multiply by c^q z^(q m) on a grid refined by the power denominator
        let qden = q
            .denom_i64()
            .ok_or_else(|| Error::BadExponent(q.to_string(), self.ram))?;
        let res_ram = self.ram * (qden as u32);
        let acc = acc.convert_ram(res_ram)?;
        let qm = q * &Rat::new(mk, self.ram as i64);
        let qmk = (&qm * &Rat::from(res_ram as i64))
            .to_i64()
            .ok_or_else(|| Error::BadExponent(qm.to_string(), res_ram))?;
        Ok(acc.shift_scale(qmk, &cq))
    }
}

/// Formal substitution `outer(inner)`. The inner series must have strictly
/// positive exponents; the outer window must be bounded below. The result is
/// reported on the grid of denominator `ram(outer) * ram(inner)` and on the
/// window the operands jointly support.
pub fn compose<C: Coeff>(outer: &FracSeries<C>, inner: &ScalarSeries) -> Result<FracSeries<C>> {
    let (in_min, _) = inner.leading().ok_or(Error::NonPositiveInner)?;
    if in_min <= 0 {
        return Err(Error::NonPositiveInner);
    }
    let lo_out = match outer.lo {
        Bound::Fin(k) => k,
        // an unbounded-below window means "exactly zero below the support"
        Bound::NegInf => match outer.content_floor() {
            Bound::Fin(k) => k,
            Bound::PosInf => return Ok(FracSeries::zero(outer.ram * inner.ram())),
            Bound::NegInf => {
                return Err(Error::InsufficientWindow(
                    "outer window unbounded below in composition".into(),
                ))
            }
        },
        Bound::PosInf => return Ok(FracSeries::zero(outer.ram * inner.ram())),
    };
    let ram_res = outer.ram * inner.ram();
    let m = Rat::new(in_min, inner.ram() as i64);
    // cap: min(hi_out * m, lo_out * m + (h_in - m))
    let to_key = |r: &Rat| -> Option<i64> { (r * &Rat::from(ram_res as i64)).to_i64() };
    let lo_rat = &Rat::new(lo_out, outer.ram as i64) * &m;
    let lo_res = Bound::Fin(to_key(&lo_rat).ok_or(Error::NonPositiveInner)?);
    let mut hi_res = match outer.hi {
        Bound::PosInf => Bound::PosInf,
        Bound::NegInf => Bound::NegInf,
        Bound::Fin(h) => {
            let r = &Rat::new(h, outer.ram as i64) * &m;
            Bound::Fin(to_key(&r).unwrap_or(i64::MAX / 2))
        }
    };
    if let Bound::Fin(h_in) = inner.hi() {
        let r = &lo_rat + &Rat::new(h_in - in_min, inner.ram() as i64);
        hi_res = hi_res.min(Bound::Fin(to_key(&r).unwrap_or(i64::MAX / 2)));
    }
    let mut out: FracSeries<C> = FracSeries::with_window(ram_res, lo_res, hi_res);
    for (k, c) in outer.iter() {
        let q = Rat::new(k, outer.ram as i64);
        let p = inner.pow_frac(&q)?.convert_ram(ram_res)?;
        for (pk, pc) in p.iter() {
            out.add_to(pk, &c.scale(pc));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Text format: `3/2*z^(-1/2) + z^(1) @window[-1/2,4]`
// ---------------------------------------------------------------------------

impl fmt::Display for ScalarSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (k, c) in self.iter() {
                let e = self.exp_of(k);
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
                if a.is_one() {
                    write!(f, "z^({})", e)?;
                } else {
                    write!(f, "{}*z^({})", a, e)?;
                }
            }
        }
        write!(f, " @window{}", self.window_str())
    }
}

fn parse_bound(s: &str, denoms: &mut Vec<i64>) -> Result<BoundSpec> {
    match s {
        "-inf" => Ok(BoundSpec::NegInf),
        "inf" | "+inf" => Ok(BoundSpec::PosInf),
        _ => {
            let r: Rat = s.parse()?;
            note_denom(&r, denoms)?;
            Ok(BoundSpec::Fin(r))
        }
    }
}

enum BoundSpec {
    NegInf,
    Fin(Rat),
    PosInf,
}

fn note_denom(r: &Rat, denoms: &mut Vec<i64>) -> Result<()> {
    match r.denom_i64() {
        Some(d) => {
            denoms.push(d);
            Ok(())
        }
        None => Err(Error::Parse(format!("exponent denominator too large: {}", r))),
    }
}

/// Parse the textual series format. Whitespace-insensitive; exponents and
/// coefficients are exact rationals; the window clause is mandatory, e.g.
/// `3/2*z^(-1/2) + z^(1) @window[-1/2,4]`.
pub fn parse_series(input: &str) -> Result<ScalarSeries> {
    let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let (body, win) = compact
        .split_once("@window[")
        .ok_or_else(|| Error::Parse("missing @window[lo,hi] clause".into()))?;
    let win = win
        .strip_suffix(']')
        .ok_or_else(|| Error::Parse("unterminated window clause".into()))?;
    let (lo_s, hi_s) = win
        .split_once(',')
        .ok_or_else(|| Error::Parse("window needs two bounds".into()))?;

    // split body into signed terms at top level (exponent parens protect '-')
    let mut terms_raw: Vec<String> = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for (i, ch) in body.chars().enumerate() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && i > 0 && !cur.ends_with('^') && !cur.ends_with('e') => {
                terms_raw.push(cur.clone());
                cur.clear();
                if ch == '-' {
                    cur.push('-');
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.is_empty() {
        terms_raw.push(cur);
    }

    let mut parsed: Vec<(Rat, Rat)> = Vec::new(); // (coefficient, exponent)
    let mut denoms: Vec<i64> = vec![1];
    for t in &terms_raw {
        if t == "0" || t.is_empty() {
            continue;
        }
        let (coeff_s, exp_s) = if let Some(pos) = t.find('z') {
            let c = &t[..pos];
            let rest = &t[pos + 1..];
            let e = if rest.is_empty() {
                "1".to_string()
            } else {
                let r = rest
                    .strip_prefix('^')
                    .ok_or_else(|| Error::Parse(format!("bad term `{}`", t)))?;
                r.trim_start_matches('(').trim_end_matches(')').to_string()
            };
            let c = c.trim_end_matches('*');
            let c = match c {
                "" | "+" => "1".to_string(),
                "-" => "-1".to_string(),
                other => other.to_string(),
            };
            (c, e)
        } else {
            (t.clone(), "0".to_string())
        };
        let coeff: Rat = coeff_s.parse()?;
        let exp: Rat = exp_s.parse()?;
        note_denom(&exp, &mut denoms)?;
        parsed.push((coeff, exp));
    }
    let lo = parse_bound(lo_s, &mut denoms)?;
    let hi = parse_bound(hi_s, &mut denoms)?;
    let ram = denoms.iter().fold(1i64, |a, b| a.lcm(b)) as u32;
    let to_key = |r: &Rat| -> Result<i64> {
        (r * &Rat::from(ram as i64))
            .to_i64()
            .ok_or_else(|| Error::BadExponent(r.to_string(), ram))
    };
    let lo = match lo {
        BoundSpec::NegInf => Bound::NegInf,
        BoundSpec::PosInf => Bound::PosInf,
        BoundSpec::Fin(r) => Bound::Fin(to_key(&r)?),
    };
    let hi = match hi {
        BoundSpec::NegInf => Bound::NegInf,
        BoundSpec::PosInf => Bound::PosInf,
        BoundSpec::Fin(r) => Bound::Fin(to_key(&r)?),
    };
    let mut s = FracSeries::with_window(ram, lo, hi);
    for (c, e) in parsed {
        s.add_to(to_key(&e)?, &c);
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Bivariate power series truncated by total degree
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries {
    order: u32,
    terms: BTreeMap<(u32, u32), Rat>,
}

impl BivariateSeries {
    pub fn zero(order: u32) -> Self {
        BivariateSeries {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeff(&self, m: u32, n: u32) -> Rat {
        self.terms.get(&(m, n)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, m: u32, n: u32, c: Rat) {
        if m + n > self.order {
            return;
        }
        if c.is_zero() {
            self.terms.remove(&(m, n));
        } else {
            self.terms.insert((m, n), c);
        }
    }

    pub fn add(&self, other: &BivariateSeries) -> BivariateSeries {
        let mut out = BivariateSeries::zero(self.order.min(other.order));
        for (&(m, n), c) in self.terms.iter().chain(other.terms.iter()) {
            let cur = out.coeff(m, n);
            out.set(m, n, &cur + c);
        }
        out
    }

    pub fn scale(&self, r: &Rat) -> BivariateSeries {
        let mut out = BivariateSeries::zero(self.order);
        for (&(m, n), c) in &self.terms {
            out.set(m, n, c * r);
        }
        out
    }

    pub fn mul(&self, other: &BivariateSeries) -> BivariateSeries {
        let mut out = BivariateSeries::zero(self.order.min(other.order));
        for (&(a, b), ca) in &self.terms {
            for (&(c, d), cb) in &other.terms {
                if a + c + b + d > out.order {
                    continue;
                }
                let cur = out.coeff(a + c, b + d);
                out.set(a + c, b + d, &cur + &(ca * cb));
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &Rat)> {
        self.terms.iter().map(|(&(m, n), c)| (m, n, c))
    }

    /// `(1 + v)^(1/2)` where `v` is the first (`x`) or second (`y`) variable.
    fn sqrt_one_plus(order: u32, in_x: bool) -> BivariateSeries {
        let mut s = BivariateSeries::zero(order);
        for k in 0..=order {
            let c = Rat::binom(&Rat::new(1, 2), k as u64);
            if in_x {
                s.set(k, 0, c);
            } else {
                s.set(0, k, c);
            }
        }
        s
    }
}

/// Coefficients `c_mn` of the quadratic correction operator, through total
/// degree `order`: the expansion of `-log(((1+x)^(1/2) + (1+y)^(1/2))/2)`.
pub fn delta_coefficients(order: u32) -> BivariateSeries {
    let sx = BivariateSeries::sqrt_one_plus(order, true);
    let sy = BivariateSeries::sqrt_one_plus(order, false);
    let mut w = sx.add(&sy).scale(&Rat::new(1, 2));
    // w := s - 1 has strictly positive total degree
    let one = w.coeff(0, 0);
    w.set(0, 0, &one - &Rat::one());
    // -log(1+w) = sum_{j>=1} (-1)^j w^j / j
    let mut acc = BivariateSeries::zero(order);
    let mut wp = w.clone();
    for j in 1..=order.max(1) {
        let sign = if j % 2 == 1 { -Rat::one() } else { Rat::one() };
        acc = acc.add(&wp.scale(&(&sign / &Rat::from(j as i64))));
        if j < order {
            wp = wp.mul(&w);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(input: &str) -> ScalarSeries {
        parse_series(input).unwrap()
    }

    #[test]
    fn add_examples() {
        // additive inverse
        let a = s("z^(1/2) @window[-inf,inf]");
        let b = s("-z^(1/2) @window[-inf,inf]");
        assert!(a.add(&b).unwrap().is_zero_series());
        // interleaving on the N=2 grid
        let a = s("1 + z^(1) @window[-inf,inf]").convert_ram(2).unwrap();
        let b = s("z^(1/2) @window[-inf,inf]");
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, s("1 + z^(1/2) + z^(1) @window[-inf,inf]"));
        // window intersection rule
        let a = s("z^(0) @window[-1,3]");
        let b = s("z^(0) @window[0,2]");
        let c = a.add(&b).unwrap();
        assert_eq!(c.lo(), Bound::Fin(0));
        assert_eq!(c.hi(), Bound::Fin(2));
    }

    #[test]
    fn mul_examples() {
        let a = s("z^(1/2) @window[-inf,inf]");
        assert!(a.mul(&a).unwrap().terms_eq(&s("z^(1) @window[-inf,inf]")));
        let p = s("1 + z^(1) @window[-inf,inf]");
        let q = s("1 - z^(1) @window[-inf,inf]");
        assert!(p.mul(&q).unwrap().terms_eq(&s("1 - z^(2) @window[-inf,inf]")));
        // truncated geometric series shifted by an exact monomial
        let g = s("1 + z^(1) + z^(2) + z^(3) @window[0,3]");
        let m = s("z^(-1) @window[-inf,inf]");
        let prod = g.mul(&m).unwrap();
        assert_eq!(prod, s("z^(-1) + 1 + z^(1) + z^(2) @window[-1,2]"));
    }

    #[test]
    fn derivative_examples() {
        let a = s("z^(1/2) @window[-inf,inf]");
        assert_eq!(a.derivative(), s("1/2*z^(-1/2) @window[-inf,inf]"));
        let c = s("5 @window[-inf,inf]");
        assert!(c.derivative().is_zero_series());
        let b = s("z^(-3/2) @window[-inf,inf]");
        assert_eq!(b.derivative(), s("-3/2*z^(-5/2) @window[-inf,inf]"));
    }

    #[test]
    fn residue_examples() {
        let a = s("3*z^(-1) + z^(-1/2) @window[-2,2]");
        assert_eq!(a.residue().unwrap(), Rat::from(3));
        let b = s("1 @window[-2,2]");
        assert_eq!(b.residue().unwrap(), Rat::zero());
        let c = s("1 @window[0,2]");
        assert!(matches!(c.residue(), Err(Error::IndeterminateResidue(_))));
    }

    #[test]
    fn residue_of_derivative_vanishes() {
        let f = s("2*z^(-3/2) + 5*z^(-1) - z^(0) + 7*z^(2) @window[-2,3]");
        let df = f.derivative();
        assert_eq!(df.residue().unwrap(), Rat::zero());
    }

    #[test]
    fn compose_examples() {
        let rho = s("z^(1/2) + z^(1) @window[1/2,5]");
        // identity outer reproduces the inner series coefficientwise
        let idp = s("z^(1) @window[-inf,inf]");
        let r = compose(&idp, &rho).unwrap();
        for (k, c) in rho.iter() {
            assert_eq!(&r.coeff(&rho.exp_of(k)).unwrap(), c);
        }
        // direct expansion: (z^(1/2) + z)^2 = z + 2 z^(3/2) + z^2
        let sq = s("z^(2) @window[-inf,inf]");
        let r = compose(&sq, &rho).unwrap();
        let expect = s("z^(1) + 2*z^(3/2) + z^(2) @window[-inf,inf]");
        for (k, c) in expect.iter() {
            let e = expect.exp_of(k);
            assert_eq!(&r.coeff(&e).unwrap(), c, "at exponent {}", e);
        }
    }

    #[test]
    fn pow_frac_examples() {
        // (z (1+z))^(1/2) = z^(1/2) (1 + z/2 - z^2/8 + ...)
        let f = s("z^(1) + z^(2) @window[1,6]");
        let r = f.pow_frac(&Rat::new(1, 2)).unwrap();
        assert_eq!(r.coeff(&Rat::new(1, 2)).unwrap(), Rat::one());
        assert_eq!(r.coeff(&Rat::new(3, 2)).unwrap(), Rat::new(1, 2));
        assert_eq!(r.coeff(&Rat::new(5, 2)).unwrap(), Rat::new(-1, 8));
        // irrational leading coefficient rejected for half powers
        let g = s("2*z^(1) @window[1,4]");
        assert!(g.pow_frac(&Rat::new(1, 2)).is_err());
        assert!(g.pow_frac(&Rat::from(3)).is_ok());
    }

    #[test]
    fn delta_low_order() {
        let t = delta_coefficients(4);
        assert_eq!(t.coeff(0, 0), Rat::zero());
        assert_eq!(t.coeff(1, 0), Rat::new(-1, 4));
        assert_eq!(t.coeff(0, 1), Rat::new(-1, 4));
        assert_eq!(t.coeff(1, 1), Rat::new(1, 16));
    }

    #[test]
    fn print_parse_roundtrip() {
        let a = s("3/2*z^(-1/2) + z^(1) @window[-1/2,4]");
        let b = parse_series(&a.to_string()).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn ring_laws(
            xs in proptest::collection::vec((-6i64..6, -9i64..9, 1i64..9), 0..5),
            ys in proptest::collection::vec((-6i64..6, -9i64..9, 1i64..9), 0..5),
            zs in proptest::collection::vec((-6i64..6, -9i64..9, 1i64..9), 0..5),
        ) {
            let build = |v: &Vec<(i64, i64, i64)>| {
                let mut t = FracSeries::with_window(2, Bound::Fin(-14), Bound::Fin(14));
                for (k, n, d) in v {
                    t.add_to(*k, &Rat::new(*n, *d));
                }
                t
            };
            let (a, b, c) = (build(&xs), build(&ys), build(&zs));
            // associativity and distributivity hold within shared windows
            let clip = |x: &FracSeries<Rat>, y: &FracSeries<Rat>| {
                let lo = x.lo().max(y.lo());
                let hi = x.hi().min(y.hi());
                (x.clone().clip_window(lo, hi), y.clone().clip_window(lo, hi))
            };
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            let (l, r) = clip(&ab_c, &a_bc);
            prop_assert_eq!(l, r);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            let (l, r) = clip(&lhs, &rhs);
            prop_assert_eq!(l, r);
        }

        #[test]
        fn derivative_kills_residue(
            xs in proptest::collection::vec((-10i64..10, -9i64..9, 1i64..9), 0..6),
        ) {
            let mut t = FracSeries::with_window(2, Bound::Fin(-30), Bound::Fin(30));
            for (k, n, d) in &xs {
                t.add_to(*k, &Rat::new(*n, *d));
            }
            prop_assert_eq!(t.derivative().residue().unwrap(), Rat::zero());
        }
    }
}
