//! The double cover `t -> s = t^2` of the projective line and its function
//! theory.
//!
//! Rational functions in `t` carry a parity under `t -> -t`. Functions
//! regular away from the marked fibers act on module insertions through
//! their Laurent expansions in the special coordinate at each fiber point:
//! `t` at the finite branch point, `1/t` at infinity, `t - t0` at a chosen
//! unramified point. Only the parity component matching the module grading
//! acts nontrivially; bases of both parities are built from monomials and
//! antisymmetrized partial fractions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;
use crate::series::{Bound, FracSeries, ScalarSeries};

// ---------------------------------------------------------------------------
// Polynomials over Q in one variable (ascending coefficients)
// ---------------------------------------------------------------------------

pub type Poly = Vec<Rat>;

fn poly_trim(p: &mut Poly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        for (j, cb) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(ca * cb);
        }
    }
    poly_trim(&mut out);
    out
}

pub fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] = &out[i] + c;
    }
    poly_trim(&mut out);
    out
}

pub fn poly_scale(a: &Poly, r: &Rat) -> Poly {
    let mut out: Poly = a.iter().map(|c| c * r).collect();
    poly_trim(&mut out);
    out
}

/// `p(-t)`.
pub fn poly_flip(a: &Poly) -> Poly {
    a.iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
        .collect()
}

/// `p(t0 + w)` by binomial expansion.
pub fn poly_shift(a: &Poly, t0: &Rat) -> Poly {
    let mut out = vec![Rat::zero(); a.len()];
    for (i, c) in a.iter().enumerate() {
        // (t0 + w)^i
        let mut pow = Rat::one();
        for j in 0..=i {
            // C(i, j) t0^(i-j) w^j ; iterate j descending in t0 powers
            let binom = Rat::binom(&Rat::from(i as i64), j as u64);
            let t0p = t0.pow((i - j) as i64);
            out[j] = &out[j] + &(&(c * &binom) * &t0p);
            let _ = &mut pow;
        }
    }
    poly_trim(&mut out);
    out
}

// ---------------------------------------------------------------------------
// Rational functions on the cover
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// A rational function of `t` with exact coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<RationalFn> {
        if den.iter().all(|c| c.is_zero()) {
            return Err(Error::Parse("zero denominator polynomial".into()));
        }
        let mut f = RationalFn { num, den };
        poly_trim(&mut f.num);
        poly_trim(&mut f.den);
        Ok(f)
    }

    pub fn monomial(k: i64) -> RationalFn {
        if k >= 0 {
            let mut num = vec![Rat::zero(); k as usize + 1];
            num[k as usize] = Rat::one();
            RationalFn { num, den: vec![Rat::one()] }
        } else {
            let mut den = vec![Rat::zero(); (-k) as usize + 1];
            den[(-k) as usize] = Rat::one();
            RationalFn { num: vec![Rat::one()], den }
        }
    }

    /// `1/(t - a)^r`.
    pub fn pole_at(a: &Rat, r: u32) -> RationalFn {
        let lin = vec![-a.clone(), Rat::one()];
        let mut den = vec![Rat::one()];
        for _ in 0..r {
            den = poly_mul(&den, &lin);
        }
        RationalFn { num: vec![Rat::one()], den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        let num = poly_add(
            &poly_mul(&self.num, &other.den),
            &poly_mul(&other.num, &self.den),
        );
        let den = poly_mul(&self.den, &other.den);
        RationalFn { num, den }
    }

    pub fn scale(&self, r: &Rat) -> RationalFn {
        RationalFn {
            num: poly_scale(&self.num, r),
            den: self.den.clone(),
        }
    }

    /// `f(-t)`.
    pub fn flip(&self) -> RationalFn {
        RationalFn {
            num: poly_flip(&self.num),
            den: poly_flip(&self.den),
        }
    }

    /// Exact parity under the involution, when the function has one.
    pub fn parity(&self) -> Option<Parity> {
        if self.is_zero() {
            return Some(Parity::Even);
        }
        let lhs = poly_mul(&poly_flip(&self.num), &self.den);
        let even = lhs == poly_mul(&self.num, &poly_flip(&self.den));
        if even {
            return Some(Parity::Even);
        }
        let odd = lhs == poly_scale(&poly_mul(&self.num, &poly_flip(&self.den)), &Rat::from(-1));
        odd.then_some(Parity::Odd)
    }

    /// Laurent expansion around `t = 0` in the variable `t`, coefficients for
    /// exponents up to `order`. Keys of the result are `t`-exponents.
    pub fn expand_at_zero(&self, order: i64) -> Result<ScalarSeries> {
        expand_quotient(&self.num, &self.den, order)
    }

    /// Laurent expansion around `t = infinity` in `u = 1/t`, keys are
    /// `u`-exponents up to `order`.
    pub fn expand_at_infinity(&self, order: i64) -> Result<ScalarSeries> {
        // f(1/u) = u^(deg den - deg num) * rev(num)(u) / rev(den)(u)
        let rev = |p: &Poly| -> Poly {
            let mut q: Poly = p.iter().rev().cloned().collect();
            poly_trim(&mut q);
            q
        };
        let dn = self.num.len() as i64 - 1;
        let dd = self.den.len() as i64 - 1;
        let s = expand_quotient(&rev(&self.num), &rev(&self.den), order - (dd - dn))?;
        Ok(s.shift_scale(dd - dn, &Rat::one()))
    }

    /// Taylor/Laurent expansion around a finite point `t0 != 0` in the local
    /// coordinate `w = t - t0`, keys are `w`-exponents up to `order`.
    pub fn expand_at(&self, t0: &Rat, order: i64) -> Result<ScalarSeries> {
        expand_quotient(&poly_shift(&self.num, t0), &poly_shift(&self.den, t0), order)
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &Poly| -> String {
            if p.is_empty() {
                return "0".to_string();
            }
            let mut parts = Vec::new();
            for (i, c) in p.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let body = match i {
                    0 => c.to_string(),
                    1 if c.is_one() => "t".to_string(),
                    1 => format!("{}*t", c),
                    _ if c.is_one() => format!("t^{}", i),
                    _ => format!("{}*t^{}", c, i),
                };
                parts.push(body);
            }
            parts.join(" + ")
        };
        if self.den.len() == 1 && self.den[0].is_one() {
            write!(f, "{}", show(&self.num))
        } else {
            write!(f, "({}) / ({})", show(&self.num), show(&self.den))
        }
    }
}

/// Expand `num/den` as a Laurent series in the polynomial variable, exact
/// below, claimed through `order`.
fn expand_quotient(num: &Poly, den: &Poly, order: i64) -> Result<ScalarSeries> {
    let mut n: ScalarSeries = FracSeries::zero(1);
    for (i, c) in num.iter().enumerate() {
        n.add_to(i as i64, c);
    }
    let mut d: ScalarSeries = FracSeries::zero(1);
    for (i, c) in den.iter().enumerate() {
        d.add_to(i as i64, c);
    }
    if d.is_zero_series() {
        return Err(Error::Parse("division by zero polynomial".into()));
    }
    if n.is_zero_series() {
        return Ok(FracSeries::with_window(1, Bound::NegInf, Bound::Fin(order)));
    }
    let val = d.support_min().unwrap();
    let lowest = n.support_min().unwrap() - val;
    if order < lowest {
        return Err(Error::PoleOrderExceedsWindow(format!(
            "expansion to order {} cannot hold the leading exponent {}",
            order, lowest
        )));
    }
    // truncate the denominator so that the geometric inversion terminates
    let rel = (order + 1 - lowest).max(1);
    let d = d.clip_window(Bound::NegInf, Bound::Fin(val + rel));
    let dinv = d.pow_frac(&Rat::from(-1))?.convert_ram(1)?;
    let prod = n.mul(&dinv)?;
    Ok(prod.clip_window(Bound::NegInf, Bound::Fin(order)))
}

/// Reinterpret a `t`- or `u`-expansion at a branch point as a series in the
/// base coordinate with half-integer exponents (`z = t^2`).
pub fn branch_series(s: &ScalarSeries) -> ScalarSeries {
    let mut out = FracSeries::with_window(2, s.lo(), s.hi());
    for (k, c) in s.iter() {
        out.add_to(k, c);
    }
    out
}

// ---------------------------------------------------------------------------
// Marked points and configurations
// ---------------------------------------------------------------------------

/// A point of the base line in the `s`-coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BasePoint {
    Zero,
    Infinity,
    Finite(String), // exact rational, kept as text for ordering/serialization
}

impl BasePoint {
    pub fn is_branch(&self) -> bool {
        matches!(self, BasePoint::Zero | BasePoint::Infinity)
    }

    pub fn finite_value(&self) -> Option<Rat> {
        match self {
            BasePoint::Finite(s) => s.parse().ok(),
            _ => None,
        }
    }
}

/// The weight datum of an untwisted insertion: a rational weight or an exact
/// square root of a rational.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaSpec {
    Rational(Rat),
    SqrtOf(Rat),
}

impl LambdaSpec {
    /// `lambda^2`.
    pub fn square(&self) -> Rat {
        match self {
            LambdaSpec::Rational(r) => r * r,
            LambdaSpec::SqrtOf(m) => m.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LambdaSpec::Rational(r) => r.is_zero(),
            LambdaSpec::SqrtOf(m) => m.is_zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModuleSpec {
    PiSigma,
    PiLambda(LambdaSpec),
    AffineVacuum { k: Rat },
    AffineTwisted { k: Rat },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Insertion {
    pub at: BasePoint,
    pub module: ModuleSpec,
    /// Chosen fiber point of an unramified insertion: `+sqrt(s)` or
    /// `-sqrt(s)`.
    pub plus_point: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverConfig {
    pub insertions: Vec<Insertion>,
    /// Total degree cutoff in half-units.
    pub degree_cutoff_half: i64,
    pub pole_bound: u32,
}

impl CoverConfig {
    /// Validate the marked-point discipline: distinct points, both branch
    /// points marked, branch points twisted, unramified fiber coordinates
    /// rational.
    pub fn validate(&self) -> Result<()> {
        let mut seen: Vec<&BasePoint> = Vec::new();
        for ins in &self.insertions {
            if seen.contains(&&ins.at) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate marked point {:?}",
                    ins.at
                )));
            }
            seen.push(&ins.at);
        }
        for b in [BasePoint::Zero, BasePoint::Infinity] {
            let ins = self
                .insertions
                .iter()
                .find(|i| i.at == b)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("branch point {:?} must be marked", b))
                })?;
            match ins.module {
                ModuleSpec::PiSigma | ModuleSpec::AffineTwisted { .. } => {}
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "branch point {:?} must carry a twisted insertion",
                        b
                    )))
                }
            }
        }
        for ins in &self.insertions {
            if let BasePoint::Finite(sv) = &ins.at {
                match ins.module {
                    ModuleSpec::PiSigma | ModuleSpec::AffineTwisted { .. } => {
                        return Err(Error::InvalidConfig(format!(
                            "unramified point s={} cannot carry a twisted insertion",
                            sv
                        )))
                    }
                    _ => {}
                }
                let s: Rat = sv
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?;
                self.fiber_coordinate(&s)?;
            }
        }
        Ok(())
    }

    /// The chosen square root of `s` as an exact rational.
    pub fn fiber_coordinate(&self, s: &Rat) -> Result<Rat> {
        s.pow_rat(&Rat::new(1, 2))
            .ok_or_else(|| Error::IrrationalFiberPoint(s.to_string()))
    }

    /// All fiber points of unramified insertions (both sheets).
    pub fn unramified_fiber_points(&self) -> Result<Vec<Rat>> {
        let mut out = Vec::new();
        for ins in &self.insertions {
            if let BasePoint::Finite(sv) = &ins.at {
                let s: Rat = sv
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?;
                let t0 = self.fiber_coordinate(&s)?;
                out.push(t0.clone());
                out.push(-t0);
            }
        }
        Ok(out)
    }

    /// Basis of rational functions of the given parity with poles confined
    /// to the marked fibers, pole orders at most `pole_bound`.
    pub fn function_basis(&self, parity: Parity, pole_bound: u32) -> Result<Vec<RationalFn>> {
        let mut out = Vec::new();
        let p = pole_bound as i64;
        // monomials: poles at the two branch fibers only
        let range: Vec<i64> = (-p..=p).collect();
        for k in range {
            let keep = match parity {
                Parity::Odd => k.rem_euclid(2) == 1,
                Parity::Even => k.rem_euclid(2) == 0,
            };
            if keep {
                out.push(RationalFn::monomial(k));
            }
        }
        // antisymmetrized / symmetrized partial fractions at unramified fibers
        for ins in &self.insertions {
            if let BasePoint::Finite(sv) = &ins.at {
                let s: Rat = sv
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?;
                let t0 = self.fiber_coordinate(&s)?;
                for r in 1..=pole_bound {
                    let f1 = RationalFn::pole_at(&t0, r);
                    let f2 = RationalFn::pole_at(&-t0.clone(), r);
                    let sign = if r % 2 == 0 { Rat::one() } else { -Rat::one() };
                    let g = match parity {
                        // 1/(t-t0)^r - (-1)^r / (t+t0)^r is odd
                        Parity::Odd => f1.add(&f2.scale(&-sign.clone())),
                        Parity::Even => f1.add(&f2.scale(&sign)),
                    };
                    debug_assert_eq!(g.parity(), Some(parity));
                    out.push(g);
                }
            }
        }
        Ok(out)
    }

    /// An odd function with the prescribed principal part at a chosen
    /// unramified fiber point, regular away from the marked fibers and the
    /// orbit of the point. `principal` lists `(pole order r >= 1, coeff)`.
    pub fn principal_part_solve(
        &self,
        at: &BasePoint,
        plus_point: bool,
        principal: &[(u32, Rat)],
    ) -> Result<RationalFn> {
        let s = match at {
            BasePoint::Finite(sv) => sv
                .parse::<Rat>()
                .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?,
            _ => return Err(Error::BranchPrincipalPart),
        };
        let mut t0 = self.fiber_coordinate(&s)?;
        if !plus_point {
            t0 = -t0;
        }
        let mut f0 = RationalFn::new(Vec::new(), vec![Rat::one()])?;
        for (r, c) in principal {
            if *r == 0 || c.is_zero() {
                continue;
            }
            f0 = f0.add(&RationalFn::pole_at(&t0, *r).scale(c));
        }
        // antisymmetrize; the flipped part is regular at t0 since t0 != 0
        let f = f0.add(&f0.flip().scale(&-Rat::one()));
        Ok(f)
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    marked: Vec<MarkedJson>,
    degree_cutoff: serde_json::Value,
    pole_bound: u32,
}

#[derive(Serialize, Deserialize)]
struct MarkedJson {
    s: String,
    module: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<String>,
}

pub fn parse_config(input: &str) -> Result<CoverConfig> {
    let j: ConfigJson =
        serde_json::from_str(input).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut insertions = Vec::new();
    for m in &j.marked {
        let at = match m.s.trim() {
            "inf" | "infinity" | "oo" => BasePoint::Infinity,
            other => {
                let r: Rat = other
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", other)))?;
                if r.is_zero() {
                    BasePoint::Zero
                } else {
                    BasePoint::Finite(r.to_string())
                }
            }
        };
        let module = parse_module_spec(&m.module)?;
        let plus_point = match m.point.as_deref() {
            None | Some("+") => true,
            Some("-") => false,
            Some(other) => {
                return Err(Error::InvalidConfig(format!("bad fiber point `{}`", other)))
            }
        };
        insertions.push(Insertion {
            at,
            module,
            plus_point,
        });
    }
    let degree_cutoff_half = parse_degree_half(&j.degree_cutoff)?;
    let cfg = CoverConfig {
        insertions,
        degree_cutoff_half,
        pole_bound: j.pole_bound,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_degree_half(v: &serde_json::Value) -> Result<i64> {
    let r: Rat = match v {
        serde_json::Value::Number(n) => {
            Rat::from(n.as_i64().ok_or_else(|| {
                Error::InvalidConfig("degree_cutoff must be an integer or rational string".into())
            })?)
        }
        serde_json::Value::String(s) => s
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad degree_cutoff `{}`", s)))?,
        _ => return Err(Error::InvalidConfig("bad degree_cutoff".into())),
    };
    (&r * &Rat::from(2))
        .to_i64()
        .ok_or_else(|| Error::InvalidConfig("degree_cutoff must be a half-integer".into()))
}

fn parse_module_spec(v: &serde_json::Value) -> Result<ModuleSpec> {
    match v {
        serde_json::Value::String(s) if s == "pi_sigma" => Ok(ModuleSpec::PiSigma),
        serde_json::Value::Object(map) => {
            if let Some(lv) = map.get("pi_lambda") {
                return match lv {
                    serde_json::Value::String(s) => Ok(ModuleSpec::PiLambda(
                        LambdaSpec::Rational(s.parse().map_err(|_| {
                            Error::InvalidConfig(format!("bad lambda `{}`", s))
                        })?),
                    )),
                    serde_json::Value::Object(inner) => {
                        let sq = inner.get("sq").and_then(|x| x.as_str()).ok_or_else(|| {
                            Error::InvalidConfig("pi_lambda object needs `sq`".into())
                        })?;
                        Ok(ModuleSpec::PiLambda(LambdaSpec::SqrtOf(
                            sq.parse().map_err(|_| {
                                Error::InvalidConfig(format!("bad lambda square `{}`", sq))
                            })?,
                        )))
                    }
                    _ => Err(Error::InvalidConfig("bad pi_lambda".into())),
                };
            }
            if let Some(av) = map.get("affine_vacuum") {
                let k = affine_level(av)?;
                return Ok(ModuleSpec::AffineVacuum { k });
            }
            if let Some(av) = map.get("affine_twisted") {
                let k = affine_level(av)?;
                return Ok(ModuleSpec::AffineTwisted { k });
            }
            Err(Error::InvalidConfig("unknown module spec".into()))
        }
        _ => Err(Error::InvalidConfig("unknown module spec".into())),
    }
}

fn affine_level(v: &serde_json::Value) -> Result<Rat> {
    let k = v
        .get("k")
        .and_then(|x| x.as_str())
        .ok_or_else(|| Error::InvalidConfig("affine module needs level `k`".into()))?;
    k.parse()
        .map_err(|_| Error::InvalidConfig(format!("bad level `{}`", k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_twisted(pole_bound: u32) -> CoverConfig {
        CoverConfig {
            insertions: vec![
                Insertion {
                    at: BasePoint::Zero,
                    module: ModuleSpec::PiSigma,
                    plus_point: true,
                },
                Insertion {
                    at: BasePoint::Infinity,
                    module: ModuleSpec::PiSigma,
                    plus_point: true,
                },
            ],
            degree_cutoff_half: 4,
            pole_bound,
        }
    }

    #[test]
    fn parity_detection() {
        assert_eq!(RationalFn::monomial(2).parity(), Some(Parity::Even));
        assert_eq!(RationalFn::monomial(-3).parity(), Some(Parity::Odd));
        let mixed = RationalFn::monomial(1).add(&RationalFn::monomial(2));
        assert_eq!(mixed.parity(), None);
        let g = RationalFn::pole_at(&Rat::from(1), 1)
            .add(&RationalFn::pole_at(&Rat::from(-1), 1));
        assert_eq!(g.parity(), Some(Parity::Odd));
    }

    #[test]
    fn expansions() {
        // t at 0: exactly t
        let f = RationalFn::monomial(1);
        let s = f.expand_at_zero(4).unwrap();
        assert_eq!(s.coeff(&Rat::from(1)).unwrap(), Rat::one());
        assert_eq!(s.coeff(&Rat::from(3)).unwrap(), Rat::zero());
        // 1/t at 0
        let f = RationalFn::monomial(-1);
        let s = f.expand_at_zero(2).unwrap();
        assert_eq!(s.coeff(&Rat::from(-1)).unwrap(), Rat::one());
        // t at infinity: u^(-1)
        let f = RationalFn::monomial(1);
        let s = f.expand_at_infinity(2).unwrap();
        assert_eq!(s.coeff(&Rat::from(-1)).unwrap(), Rat::one());
        // t at a finite point: t0 + w
        let s = RationalFn::monomial(1).expand_at(&Rat::from(2), 3).unwrap();
        assert_eq!(s.coeff(&Rat::from(0)).unwrap(), Rat::from(2));
        assert_eq!(s.coeff(&Rat::from(1)).unwrap(), Rat::one());
        // 1/(t-1) at 0: -1 - t - t^2 - ...
        let f = RationalFn::pole_at(&Rat::from(1), 1);
        let s = f.expand_at_zero(3).unwrap();
        for k in 0..=3 {
            assert_eq!(s.coeff(&Rat::from(k)).unwrap(), Rat::from(-1));
        }
        // and its expansion at its own pole
        let s = f.expand_at(&Rat::from(1), 2).unwrap();
        assert_eq!(s.coeff(&Rat::from(-1)).unwrap(), Rat::one());
        assert_eq!(s.coeff(&Rat::from(0)).unwrap(), Rat::zero());
    }

    #[test]
    fn odd_basis_two_twisted() {
        let cfg = two_twisted(7);
        let basis = cfg.function_basis(Parity::Odd, 7).unwrap();
        // monomials t^(+-1), t^(+-3), t^(+-5), t^(+-7)
        assert_eq!(basis.len(), 8);
        for f in &basis {
            assert_eq!(f.parity(), Some(Parity::Odd));
        }
        let even = cfg.function_basis(Parity::Even, 3).unwrap();
        // t^0, t^(+-2)
        assert_eq!(even.len(), 3);
    }

    #[test]
    fn odd_basis_with_unramified() {
        let mut cfg = two_twisted(3);
        cfg.insertions.push(Insertion {
            at: BasePoint::Finite("1".into()),
            module: ModuleSpec::PiLambda(LambdaSpec::Rational(Rat::zero())),
            plus_point: true,
        });
        let basis = cfg.function_basis(Parity::Odd, 3).unwrap();
        // 4 monomials + 3 partial-fraction combinations
        assert_eq!(basis.len(), 7);
        for f in &basis {
            assert_eq!(f.parity(), Some(Parity::Odd), "{}", f);
        }
    }

    #[test]
    fn principal_parts() {
        let mut cfg = two_twisted(3);
        cfg.insertions.push(Insertion {
            at: BasePoint::Finite("4".into()),
            module: ModuleSpec::PiLambda(LambdaSpec::Rational(Rat::zero())),
            plus_point: true,
        });
        let at = BasePoint::Finite("4".into());
        // prescribed 1/(t-2): the solution is odd with that principal part
        let f = cfg
            .principal_part_solve(&at, true, &[(1, Rat::one())])
            .unwrap();
        assert_eq!(f.parity(), Some(Parity::Odd));
        let s = f.expand_at(&Rat::from(2), 1).unwrap();
        assert_eq!(s.coeff(&Rat::from(-1)).unwrap(), Rat::one());
        // double pole
        let f = cfg
            .principal_part_solve(&at, true, &[(2, Rat::one())])
            .unwrap();
        assert_eq!(f.parity(), Some(Parity::Odd));
        let s = f.expand_at(&Rat::from(2), 1).unwrap();
        assert_eq!(s.coeff(&Rat::from(-2)).unwrap(), Rat::one());
        assert_eq!(s.coeff(&Rat::from(-1)).unwrap(), Rat::zero());
        // zero principal part gives the zero function
        let f = cfg.principal_part_solve(&at, true, &[]).unwrap();
        assert!(f.is_zero());
        // branch points refused
        assert!(matches!(
            cfg.principal_part_solve(&BasePoint::Zero, true, &[(1, Rat::one())]),
            Err(Error::BranchPrincipalPart)
        ));
    }

    #[test]
    fn config_json_roundtrip() {
        let text = r#"{"marked":[{"s":"0","module":"pi_sigma"},
            {"s":"inf","module":"pi_sigma"},
            {"s":"1","module":{"pi_lambda":"0"},"point":"+"}],
            "degree_cutoff":4,"pole_bound":7}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.insertions.len(), 3);
        assert_eq!(cfg.degree_cutoff_half, 8);
        assert_eq!(cfg.pole_bound, 7);
        // sqrt lambda
        let text = r#"{"marked":[{"s":"0","module":"pi_sigma"},
            {"s":"inf","module":"pi_sigma"},
            {"s":"1","module":{"pi_lambda":{"sq":"2"}}}],
            "degree_cutoff":"7/2","pole_bound":5}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.degree_cutoff_half, 7);
        match &cfg.insertions[2].module {
            ModuleSpec::PiLambda(LambdaSpec::SqrtOf(m)) => assert_eq!(m, &Rat::from(2)),
            other => panic!("unexpected {:?}", other),
        }
        // affine levels
        let text = r#"{"marked":[{"s":"0","module":{"affine_twisted":{"k":"1"}}},
            {"s":"inf","module":{"affine_twisted":{"k":"1"}}}],
            "degree_cutoff":1,"pole_bound":4}"#;
        let cfg = parse_config(text).unwrap();
        match &cfg.insertions[0].module {
            ModuleSpec::AffineTwisted { k } => assert_eq!(k, &Rat::one()),
            other => panic!("unexpected {:?}", other),
        }
        // invalid: missing branch point
        let text = r#"{"marked":[{"s":"0","module":"pi_sigma"}],
            "degree_cutoff":1,"pole_bound":2}"#;
        assert!(parse_config(text).is_err());
        // invalid: irrational fiber point
        let text = r#"{"marked":[{"s":"0","module":"pi_sigma"},
            {"s":"inf","module":"pi_sigma"},
            {"s":"2","module":{"pi_lambda":"0"}}],
            "degree_cutoff":1,"pole_bound":2}"#;
        assert!(parse_config(text).is_err());
    }
}
