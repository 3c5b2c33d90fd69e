//! Special coordinate changes and their actions.
//!
//! A coordinate change is a series `rho(z^(1/N)) = sum c_n z^n` with
//! exponents in `1/N + Z` and `c_(1/N) != 0`; these are exactly the
//! automorphisms of `C[[z^(1/N)]]` preserving `C[[z]]`. Internally the series
//! lives in the uniformizer `w = z^(1/N)`, where all exponents are integers
//! congruent to 1 mod N, so the group law is ordinary composition of
//! integer-exponent series.
//!
//! The group acts on twisted modules through `z^(k+1/N) d/d(z^(1/N)) ->
//! -N L_k` and on the vertex algebra through `t^(k+1) d/dt -> -L_k`;
//! unipotent parts exponentiate exactly on graded slices, scalings act
//! diagonally on the shifted grading, and the central root of unity acts by
//! the parity involution.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::FieldEngine;
use crate::fock::{FockVector, Sector};
use crate::rat::Rat;
use crate::series::{Bound, FracSeries, ScalarSeries};

/// Element of the group of special coordinate changes for ramification `N`.
/// Stored as a series in `w = z^(1/N)`: integer keys congruent to 1 mod N,
/// window `[1, order]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordChange {
    n: u32,
    w_series: ScalarSeries,
}

impl CoordChange {
    /// Build from `(w-exponent, coefficient)` pairs; `order` is the last
    /// `w`-exponent the series claims.
    pub fn new(n: u32, terms: &[(i64, Rat)], order: i64) -> Result<CoordChange> {
        let mut s = FracSeries::with_window(1, Bound::Fin(1), Bound::Fin(order));
        for (k, c) in terms {
            if (*k - 1).rem_euclid(n as i64) != 0 {
                return Err(Error::BadExponent(
                    format!("w-exponent {} not in 1 + {}Z", k, n),
                    n,
                ));
            }
            s.add_to(*k, c);
        }
        let cc = CoordChange { n, w_series: s };
        if cc.leading().is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(cc)
    }

    /// From coefficients listed by ascending exponent in `1/N + Z`:
    /// `[c_(1/N), c_(1/N + 1), ...]`.
    pub fn from_coeff_list(n: u32, coeffs: &[Rat]) -> Result<CoordChange> {
        let terms: Vec<(i64, Rat)> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (1 + (i as i64) * n as i64, c.clone()))
            .collect();
        let order = terms.last().map(|(k, _)| *k).unwrap_or(1);
        CoordChange::new(n, &terms, order)
    }

    pub fn identity(n: u32, order: i64) -> CoordChange {
        CoordChange::new(n, &[(1, Rat::one())], order).unwrap()
    }

    /// The central change `w -> eps w`.
    pub fn central(n: u32, eps: &Rat, order: i64) -> Result<CoordChange> {
        CoordChange::new(n, &[(1, eps.clone())], order)
    }

    pub fn ramification(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> i64 {
        self.w_series.hi().fin().unwrap_or(i64::MAX / 4)
    }

    pub fn leading(&self) -> Rat {
        self.w_series.coeff_at_key(1)
    }

    pub fn is_unipotent(&self) -> bool {
        self.leading().is_one()
    }

    /// The underlying series in `w`.
    pub fn w_series(&self) -> &ScalarSeries {
        &self.w_series
    }

    /// The same series read in `z` with fractional exponents (grid `1/N`).
    pub fn z_series(&self) -> ScalarSeries {
        let mut s = FracSeries::with_window(self.n, self.w_series.lo(), self.w_series.hi());
        for (k, c) in self.w_series.iter() {
            s.add_to(k, c);
        }
        s
    }

    /// Group law by substitution: `(self * other)(w) = self(other(w))`.
    pub fn compose(&self, other: &CoordChange) -> Result<CoordChange> {
        if self.n != other.n {
            return Err(Error::MismatchedRamification(self.n, other.n));
        }
        let composed = crate::series::compose(&self.w_series, &other.w_series)?;
        let w_series = composed.convert_ram(1)?;
        let cc = CoordChange {
            n: self.n,
            w_series,
        };
        if cc.leading().is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        Ok(cc)
    }

    /// Compositional inverse by reversion, exact within the window and
    /// checked by back-composition.
    pub fn invert(&self) -> Result<CoordChange> {
        let c1 = self.leading();
        if c1.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let order = self.order();
        let mut q: ScalarSeries = FracSeries::with_window(1, Bound::Fin(1), Bound::Fin(order));
        q.add_to(1, &c1.inv());
        loop {
            let test = crate::series::compose(&self.w_series, &q)?.convert_ram(1)?;
            let hi = match test.hi() {
                Bound::Fin(h) => h.min(order),
                _ => order,
            };
            let mut defect: Option<(i64, Rat)> = None;
            for k in 1..=hi {
                let want = if k == 1 { Rat::one() } else { Rat::zero() };
                let got = test.coeff_at_key(k);
                if got != want {
                    defect = Some((k, &got - &want));
                    break;
                }
            }
            match defect {
                None => break,
                Some((k, d)) => {
                    // self(q + e w^k) = self(q) + c1 e w^k + higher order
                    q.add_to(k, &-&(&d / &c1));
                }
            }
        }
        Ok(CoordChange {
            n: self.n,
            w_series: q,
        })
    }

    /// The induced change of the base coordinate: `mu(rho) = rho^N`, an
    /// integer-exponent series in `z`.
    pub fn mu(&self) -> Result<ScalarSeries> {
        let p = self.w_series.pow_u(self.n as u64)?;
        let conv = |b: Bound| match b {
            Bound::Fin(k) => Bound::Fin(k.div_euclid(self.n as i64)),
            b => b,
        };
        let mut out = FracSeries::with_window(1, conv(p.lo()), conv(p.hi()));
        for (k, c) in p.iter() {
            if k.rem_euclid(self.n as i64) != 0 {
                return Err(Error::BadExponent(format!("mu image exponent {}", k), 1));
            }
            out.add_to(k / self.n as i64, c);
        }
        Ok(out)
    }

    /// `mu(rho)` packaged as an integer coordinate change.
    pub fn mu_change(&self) -> Result<CoordChange> {
        let m = self.mu()?;
        let hi = m.hi().fin().unwrap_or(self.order());
        let terms: Vec<(i64, Rat)> = m.iter().map(|(k, c)| (k, c.clone())).collect();
        CoordChange::new(1, &terms, hi)
    }
}

// ---------------------------------------------------------------------------
// Lie algebra elements and the exponential on coordinates
// ---------------------------------------------------------------------------

/// Element of the Lie algebra of the special coordinate group:
/// `v(z^(1/N)) d/d(z^(1/N))` with `v = -sum_k v_k z^(k + 1/N)`, `k >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerElement {
    pub n: u32,
    pub coeffs: Vec<(u32, Rat)>,
}

impl DerElement {
    pub fn new(n: u32, coeffs: &[(u32, Rat)]) -> DerElement {
        DerElement {
            n,
            coeffs: coeffs
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .cloned()
                .collect(),
        }
    }

    /// `v(w)` as a `w`-series: `-sum v_k w^(kN + 1)`.
    pub fn v_w_series(&self, order: i64) -> ScalarSeries {
        let mut s = FracSeries::with_window(1, Bound::NegInf, Bound::Fin(order));
        for (k, c) in &self.coeffs {
            s.add_to(1 + (*k as i64) * self.n as i64, &-c.clone());
        }
        s
    }

    /// Image under the Lie algebra isomorphism: `u(z) = -N sum v_k z^(k+1)`,
    /// the integer vector field `u(z) d/dz` (exact polynomial).
    pub fn to_base_field(&self) -> ScalarSeries {
        let mut s = FracSeries::zero(1);
        for (k, c) in &self.coeffs {
            s.add_to(*k as i64 + 1, &-&(c * &Rat::from(self.n as i64)));
        }
        s
    }

    /// The module operator `r_v = N sum v_k L_k` applied to a vector.
    pub fn r_apply(&self, engine: &FieldEngine, v: &FockVector) -> Result<FockVector> {
        let mut out = FockVector::zero(v.sector().clone());
        for (k, c) in &self.coeffs {
            let w = engine.virasoro(*k as i64, v)?;
            out.add_scaled(&w, &(c * &Rat::from(self.n as i64)));
        }
        Ok(out)
    }

    /// Exponentiate on the coordinate: `exp(v(w) d/dw) . w`, truncated at
    /// `order`. The `k = 0` (scaling) direction has no rational exponential.
    pub fn exp_coordinate(&self, order: i64) -> Result<CoordChange> {
        if self.coeffs.iter().any(|(k, c)| *k == 0 && !c.is_zero()) {
            return Err(Error::ScalingNotRepresentable(
                "exponential of the scaling generator".into(),
            ));
        }
        let v = self.v_w_series(order);
        let w = exp_derivation_on_w(&v, order)?;
        Ok(CoordChange {
            n: self.n,
            w_series: w,
        })
    }
}

/// `exp(v(w) d/dw)` applied to `w`, truncated to `order`; `v` must have
/// valuation at least 2.
pub fn exp_derivation_on_w(v: &ScalarSeries, order: i64) -> Result<ScalarSeries> {
    if let Some(k) = v.support_min() {
        if k < 2 {
            return Err(Error::ScalingNotRepresentable(
                "derivation with linear or constant part".into(),
            ));
        }
    }
    let v = v.clone().assume_exact_below();
    let mut acc: ScalarSeries = FracSeries::with_window(1, Bound::NegInf, Bound::Fin(order));
    acc.add_to(1, &Rat::one());
    let mut layer = acc.clone();
    let mut r: i64 = 0;
    loop {
        r += 1;
        let df = layer.derivative();
        layer = v
            .mul(&df)?
            .assume_exact_below()
            .clip_window(Bound::NegInf, Bound::Fin(order))
            .scale(&Rat::new(1, r));
        if layer.is_zero_series() {
            break;
        }
        acc = acc.add(&layer)?;
    }
    Ok(acc)
}

/// Logarithm of a unipotent change: the `w`-series `v` with
/// `exp(v(w) d/dw) . w = rho(w)`, exact to the truncation order.
fn log_of_unipotent(rho: &ScalarSeries, order: i64) -> Result<ScalarSeries> {
    if !rho.coeff_at_key(1).is_one() {
        return Err(Error::NotUnipotent);
    }
    let mut v: ScalarSeries = FracSeries::with_window(1, Bound::NegInf, Bound::Fin(order));
    for d in 2..=order {
        let e = exp_derivation_on_w(&v, order)?;
        let delta = &rho.coeff_at_key(d) - &e.coeff_at_key(d);
        if !delta.is_zero() {
            v.add_to(d, &delta);
        }
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Module and algebra actions
// ---------------------------------------------------------------------------

/// The exponentiated action `R(rho)` of a coordinate change on a module.
///
/// Decomposition: `rho(w) = eps * a * rho_u(w)` with `eps = +-1`, `a > 0`
/// and `rho_u` unipotent; `R(rho) = exp(N sum v_k L_k) . a^(-N (L_0 - g)) .
/// S^eps` with `g` the ground weight of the sector.
#[derive(Clone, Debug)]
pub struct ModuleAction {
    sector: Sector,
    n: u32,
    eps_flip: bool,
    scale: Rat,
    nil: Vec<(i64, Rat)>,
}

impl ModuleAction {
    pub fn from_coord_change(rho: &CoordChange, sector: &Sector) -> Result<ModuleAction> {
        let n = rho.ramification();
        match sector {
            Sector::Twisted => {
                if n != 2 {
                    return Err(Error::MismatchedRamification(n, 2));
                }
            }
            Sector::Untwisted { .. } => {
                if n != 1 {
                    return Err(Error::MismatchedRamification(n, 1));
                }
            }
        }
        let c1 = rho.leading();
        let (eps_flip, a) = if n == 2 && c1.is_negative() {
            (true, -c1.clone())
        } else {
            (false, c1.clone())
        };
        let unip = rho
            .w_series
            .scale(&c1.inv())
            .clip_window(Bound::Fin(1), rho.w_series.hi());
        let v = log_of_unipotent(&unip, rho.order())?;
        let mut nil = Vec::new();
        for (wk, c) in v.iter() {
            let k = (wk - 1) / n as i64;
            nil.push((k, -c.clone()));
        }
        Ok(ModuleAction {
            sector: sector.clone(),
            n,
            eps_flip,
            scale: a,
            nil,
        })
    }

    pub fn identity(sector: &Sector) -> ModuleAction {
        ModuleAction {
            sector: sector.clone(),
            n: if sector.is_twisted() { 2 } else { 1 },
            eps_flip: false,
            scale: Rat::one(),
            nil: Vec::new(),
        }
    }

    /// Apply to a vector. Errors when the scaling part admits no exact
    /// rational graded power.
    pub fn apply(&self, engine: &FieldEngine, v: &FockVector) -> Result<FockVector> {
        if !v.is_zero() && v.sector() != &self.sector {
            return Err(Error::SectorMismatch(format!(
                "action on {:?} applied to {:?}",
                self.sector,
                v.sector()
            )));
        }
        let mut cur = if self.eps_flip {
            FieldEngine::s_sigma(v)
        } else {
            v.clone()
        };
        if !self.scale.is_one() {
            let mut scaled = FockVector::zero(self.sector.clone());
            for (m, c) in cur.terms() {
                let dh = crate::fock::monomial_degree_half(m);
                // a^(-N d) with d the shifted degree dh/2
                let e_num = -(self.n as i64) * dh;
                if e_num.rem_euclid(2) != 0 {
                    return Err(Error::ScalingNotRepresentable(format!(
                        "graded power {}^({}/2)",
                        self.scale, e_num
                    )));
                }
                let f = self.scale.pow(e_num / 2);
                scaled.add_term(m.clone(), &(c * &f));
            }
            cur = scaled;
        }
        // exp(N sum v_k L_k); k >= 1 lowers degree, so the sum terminates
        let mut acc = cur.clone();
        let mut layer = cur;
        let mut r: i64 = 0;
        loop {
            r += 1;
            let mut next = FockVector::zero(self.sector.clone());
            for (k, vk) in &self.nil {
                let w = engine.virasoro(*k, &layer)?;
                next.add_scaled(&w, &(vk * &Rat::from(self.n as i64)));
            }
            if next.is_zero() {
                break;
            }
            layer = next.scale(&Rat::new(1, r));
            acc.add_scaled(&layer, &Rat::one());
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// Taylor families: tau(z+t) - tau(z) expanded in t
// ---------------------------------------------------------------------------

/// The expansion `tau_z(t) = sum_j tau^(j)(z)/j! t^j`: a `t`-coordinate
/// change whose coefficients are `z`-series.
#[derive(Clone, Debug)]
pub struct CoordFamily {
    coeffs: Vec<ScalarSeries>,
    t_order: usize,
}

impl CoordFamily {
    /// Expand `tau(z+t) - tau(z)` in powers of `t` through `t^t_order`.
    pub fn expand(tau: &ScalarSeries, t_order: usize) -> CoordFamily {
        let mut coeffs = Vec::with_capacity(t_order);
        let mut d = tau.clone();
        let mut fact = Rat::one();
        for j in 1..=t_order {
            d = d.derivative();
            fact = &fact * &Rat::from(j as i64);
            coeffs.push(d.scale(&fact.inv()));
        }
        CoordFamily { coeffs, t_order }
    }

    pub fn coeff_t(&self, j: usize) -> ScalarSeries {
        if j >= 1 && j <= self.t_order {
            self.coeffs[j - 1].clone()
        } else {
            FracSeries::zero(1)
        }
    }

    /// Apply `R(tau_z)^(-1)` to an algebra vector; the result is a `z`-series
    /// of vectors. Exact on states of degree below `t_order`.
    pub fn act_inverse(
        &self,
        engine: &FieldEngine,
        a: &FockVector,
    ) -> Result<FracSeries<FockVector>> {
        let lead = &self.coeffs[0]; // tau'(z)
        let lead_inv = lead.pow_frac(&Rat::from(-1))?.convert_ram(1)?;
        let mut unip: Vec<ScalarSeries> = Vec::with_capacity(self.t_order);
        for j in 1..=self.t_order {
            unip.push(self.coeff_t(j).mul(&lead_inv)?);
        }
        let g = t_family_log(&unip, self.t_order)?;
        // R(u_z)^(-1) = exp(+ sum_j g_j(z) L_j)
        let mut acc: FracSeries<FockVector> = FracSeries::zero(1);
        acc.add_to(0, a);
        let mut layer = acc.clone();
        let mut r: i64 = 0;
        loop {
            r += 1;
            let mut next: FracSeries<FockVector> = FracSeries::zero(1);
            let mut any = false;
            for (j0, gj) in g.iter().enumerate() {
                let j = j0 as i64 + 1;
                if gj.is_zero_series() {
                    continue;
                }
                let mut lj: FracSeries<FockVector> =
                    FracSeries::with_window(1, layer.lo(), layer.hi());
                for (k, vec) in layer.iter() {
                    let w = engine.virasoro(j, vec)?;
                    if !w.is_zero() {
                        lj.add_to(k, &w);
                    }
                }
                if lj.is_zero_series() {
                    continue;
                }
                let prod = mul_scalar_series(gj, &lj)?;
                any = true;
                next = next.add(&prod)?.assume_exact_below();
            }
            if !any {
                break;
            }
            layer = next.scale(&Rat::new(1, r));
            acc = acc.add(&layer)?.assume_exact_below();
        }
        // R(s)^(-1): multiply each degree-d component by tau'(z)^d
        let mut out: FracSeries<FockVector> = FracSeries::with_window(1, acc.lo(), acc.hi());
        let mut powers: BTreeMap<i64, ScalarSeries> = BTreeMap::new();
        for (k, vec) in acc.iter() {
            for (m, c) in vec.terms() {
                let dh = crate::fock::monomial_degree_half(m);
                let d = dh / 2;
                let p = match powers.get(&d) {
                    Some(p) => p.clone(),
                    None => {
                        let p = lead.pow_frac(&Rat::from(d))?.convert_ram(1)?;
                        powers.insert(d, p.clone());
                        p
                    }
                };
                if let Bound::Fin(h) = p.hi() {
                    let cap = Bound::Fin(k + h);
                    if cap < out.hi() {
                        let lo = out.lo();
                        out = out.clip_window(lo, cap);
                    }
                }
                for (pk, pc) in p.iter() {
                    let term =
                        FockVector::from_monomial(vec.sector().clone(), m.clone(), c * pc);
                    out.add_to(k + pk, &term);
                }
            }
        }
        Ok(out)
    }
}

/// Multiply a vector-valued series by a scalar series on the same grid, with
/// the pessimistic product window.
pub fn mul_scalar_series(
    s: &ScalarSeries,
    f: &FracSeries<FockVector>,
) -> Result<FracSeries<FockVector>> {
    if s.ram() != f.ram() {
        return Err(Error::MismatchedRamification(s.ram(), f.ram()));
    }
    let floor_s = s.support_min().map(Bound::Fin).unwrap_or_else(|| s.hi());
    let floor_f = f.support_min().map(Bound::Fin).unwrap_or_else(|| f.hi());
    let eff = |lo: Bound, floor: Bound| match lo {
        Bound::NegInf => floor,
        b => b,
    };
    let lo = eff(s.lo(), floor_s).add(eff(f.lo(), floor_f));
    let hi = s.hi().add(floor_f).min(f.hi().add(floor_s));
    let mut out = FracSeries::with_window(f.ram(), lo, hi);
    for (ks, cs) in s.iter() {
        for (kf, cf) in f.iter() {
            out.add_to(ks + kf, &cf.scale(cs));
        }
    }
    Ok(out)
}

/// Log of a unipotent `t`-family (coefficients are `z`-series): returns
/// `g_1..g_(t_order-1)` with derivation `sum_j g_j(z) t^(j+1) d/dt`.
fn t_family_log(unip: &[ScalarSeries], t_order: usize) -> Result<Vec<ScalarSeries>> {
    let mut g: Vec<ScalarSeries> = vec![FracSeries::zero(1); t_order.saturating_sub(1)];
    for d in 2..=t_order {
        let e = t_family_exp(&g, t_order)?;
        let delta = unip[d - 1].sub(&e[d - 1])?;
        g[d - 2] = g[d - 2]
            .add(&delta)
            .map(|s| s.assume_exact_below())
            .unwrap_or(delta);
    }
    Ok(g)
}

/// `exp(sum_j g_j t^(j+1) d/dt) . t` as `t`-coefficients `1..=t_order`.
fn t_family_exp(g: &[ScalarSeries], t_order: usize) -> Result<Vec<ScalarSeries>> {
    let mut acc: Vec<ScalarSeries> = vec![FracSeries::zero(1); t_order];
    let mut one = FracSeries::zero(1);
    one.add_to(0, &Rat::one());
    acc[0] = one;
    let mut layer = acc.clone();
    let mut r: i64 = 0;
    loop {
        r += 1;
        let mut next: Vec<ScalarSeries> = vec![FracSeries::zero(1); t_order];
        let mut any = false;
        for (i0, ai) in layer.iter().enumerate() {
            let i = i0 + 1;
            if ai.is_zero_series() {
                continue;
            }
            for (j0, gj) in g.iter().enumerate() {
                let j = j0 + 1;
                if gj.is_zero_series() || i + j > t_order {
                    continue;
                }
                let term = gj.mul(&ai.scale(&Rat::from(i as i64)))?;
                next[i + j - 1] = next[i + j - 1]
                    .add(&term)
                    .map(|s| s.assume_exact_below())
                    .unwrap_or(term);
                any = true;
            }
        }
        if !any {
            break;
        }
        let inv_r = Rat::new(1, r);
        layer = next.iter().map(|s| s.scale(&inv_r)).collect();
        for (i, l) in layer.iter().enumerate() {
            if !l.is_zero_series() {
                acc[i] = acc[i]
                    .add(l)
                    .map(|s| s.assume_exact_below())
                    .unwrap_or_else(|_| l.clone());
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Transformation-law checks
// ---------------------------------------------------------------------------

use crate::field::Witness;
use crate::fock::basis_up_to;

/// Infinitesimal transformation law on the twisted module:
/// `[r_v, Y(A, z^(1/N))] = -sum_{m>=-1} (1/(m+1)!) (d^(m+1) u)(z) Y(L_m A)`
/// with `u(z) = -N sum v_k z^(k+1)`, checked coefficientwise on a slice.
pub fn infinitesimal_transform_check(
    engine: &FieldEngine,
    d: &DerElement,
    a: &FockVector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    let sector = Sector::Twisted;
    let u = d.to_base_field(); // exact polynomial in z
    let deg_a_true = a.max_degree_half() / 2;
    // precompute (1/(m+1)!) d^(m+1) u and L_m A for m = -1 ..= deg(A)
    let mut pieces: Vec<(ScalarSeries, FockVector)> = Vec::new();
    let mut du = u.clone(); // d^(m+1) u for the current m
    let mut fact = Rat::one(); // (m+1)!
    for m in -1..=deg_a_true {
        let la = if m == -1 {
            engine.translate(a)?
        } else {
            engine.virasoro(m, a)?
        };
        if !la.is_zero() && !du.is_zero_series() {
            pieces.push((du.scale(&fact.inv()), la));
        }
        du = du.derivative();
        fact = &fact * &Rat::from(m + 2);
    }
    for mono in basis_up_to(&sector, slice_deg) {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        let rv_v = d.r_apply(engine, &v)?;
        for e in window.0..=window.1 {
            let ye_v = engine.field_coeff(a, &sector, e, &v)?;
            let mut lhs = d.r_apply(engine, &ye_v)?;
            lhs.add_scaled(&engine.field_coeff(a, &sector, e, &rv_v)?, &Rat::from(-1));
            let mut rhs = FockVector::zero(sector.clone());
            for (series, la) in &pieces {
                for (q, c) in series.iter() {
                    // q is an integer z-power; the field exponent shifts by 2q
                    let w = engine.field_coeff(la, &sector, e - 2 * q, &v)?;
                    rhs.add_scaled(&w, &-c.clone());
                }
            }
            if lhs != rhs {
                return Ok(Witness::fail(format!(
                    "infinitesimal law fails at e={} on {}: lhs={}, rhs={}",
                    Rat::new(e, 2),
                    crate::fock::format_monomial(&sector, &mono),
                    lhs,
                    rhs
                )));
            }
        }
    }
    Ok(Witness::pass())
}

/// Cache of integer powers of a coordinate change, read in the uniformizer.
struct PowerCache<'a> {
    rho: &'a CoordChange,
    powers: BTreeMap<i64, ScalarSeries>,
}

impl<'a> PowerCache<'a> {
    fn new(rho: &'a CoordChange) -> PowerCache<'a> {
        PowerCache {
            rho,
            powers: BTreeMap::new(),
        }
    }

    /// Coefficient of `w^x` in `rho(w)^kappa`; errors when the truncation
    /// cannot prove it.
    fn coeff(&mut self, kappa: i64, x: i64) -> Result<Rat> {
        if !self.powers.contains_key(&kappa) {
            let p = self
                .rho
                .w_series()
                .pow_frac(&Rat::from(kappa))?
                .convert_ram(1)?;
            self.powers.insert(kappa, p);
        }
        let p = &self.powers[&kappa];
        p.coeff(&Rat::from(x))
    }
}

/// The substituted, conjugated field coefficient
/// `[R(rho) Y(states(z), rho(z^(1/N))) R(rho)^(-1)]_e v` for a z-series of
/// algebra states. `e` in half-units; the z-power `q` of a state coefficient
/// contributes `2q`.
#[allow(clippy::too_many_arguments)]
fn conjugated_substituted_coeff(
    engine: &FieldEngine,
    powers: &mut PowerCache<'_>,
    act: &ModuleAction,
    act_inv: &ModuleAction,
    states: &FracSeries<FockVector>,
    state_deg_cap: i64,
    e_half: i64,
    v: &FockVector,
) -> Result<FockVector> {
    let sector = Sector::Twisted;
    let v1 = act_inv.apply(engine, v)?;
    let deg_v1 = v1.max_degree_half();
    // states beyond the claimed z-window must be unable to reach e: an
    // unknown state at z-power q > hi acts at field exponents
    // kappa = e - 2q >= -(deg v1 + state_deg_cap)
    if let Bound::Fin(hi) = states.hi() {
        if e_half >= 2 * (hi + 1) - deg_v1 - state_deg_cap {
            return Err(Error::InsufficientWindow(format!(
                "state series truncated at z^{} cannot certify exponent {}",
                hi,
                Rat::new(e_half, 2)
            )));
        }
    }
    let mut acc = FockVector::zero(sector.clone());
    for (q, state) in states.iter() {
        if state.is_zero() {
            continue;
        }
        let kappa_min = -(deg_v1 + state.max_degree_half());
        let kappa_max = e_half - 2 * q;
        let mut kappa = kappa_min;
        while kappa <= kappa_max {
            let c = powers.coeff(kappa, e_half - 2 * q)?;
            if !c.is_zero() {
                let w = engine.field_coeff(state, &sector, kappa, &v1)?;
                acc.add_scaled(&w, &c);
            }
            kappa += 1;
        }
    }
    act.apply(engine, &acc)
}

/// Group transformation law on the twisted module:
/// `R(rho) Y(R^V((rho^N)_z)^(-1) A, rho(z^(1/N))) R(rho)^(-1) = Y(A, z^(1/N))`
/// for unipotent `rho`, checked coefficientwise on a slice.
pub fn group_transform_check(
    engine: &FieldEngine,
    rho: &CoordChange,
    a: &FockVector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    if !rho.is_unipotent() {
        return Err(Error::NotUnipotent);
    }
    let sector = Sector::Twisted;
    let tau = rho.mu()?; // integer coordinate change of the base
    let t_order = (a.max_degree_half() / 2 + 1).max(2) as usize;
    let fam = CoordFamily::expand(&tau, t_order);
    let atilde = fam.act_inverse(engine, a)?;
    let act = ModuleAction::from_coord_change(rho, &sector)?;
    let act_inv = ModuleAction::from_coord_change(&rho.invert()?, &sector)?;
    let mut powers = PowerCache::new(rho);
    for mono in basis_up_to(&sector, slice_deg).into_iter().rev() {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        for e in (window.0..=window.1).rev() {
            let lhs = conjugated_substituted_coeff(
                engine,
                &mut powers,
                &act,
                &act_inv,
                &atilde,
                a.max_degree_half(),
                e,
                &v,
            )?;
            let rhs = engine.field_coeff(a, &sector, e, &v)?;
            if lhs != rhs {
                return Ok(Witness::fail(format!(
                    "transformation law fails at e={} on {}: lhs={}, rhs={}",
                    Rat::new(e, 2),
                    crate::fock::format_monomial(&sector, &mono),
                    lhs,
                    rhs
                )));
            }
        }
    }
    Ok(Witness::pass())
}

/// Verify that a state is primary: `L_0 A = Delta A`, `L_k A = 0` for
/// `k >= 1`. Returns `Delta` in true units.
pub fn primary_weight(engine: &FieldEngine, a: &FockVector) -> Result<i64> {
    let dh = a
        .homogeneous_degree_half()
        .ok_or_else(|| Error::NotPrimary("state is not homogeneous".into()))?;
    if dh % 2 != 0 {
        return Err(Error::NotPrimary("non-integral weight".into()));
    }
    let delta = dh / 2;
    for k in 1..=delta.max(1) {
        if !engine.virasoro(k, a)?.is_zero() {
            return Err(Error::NotPrimary(format!("L_{} A != 0", k)));
        }
    }
    Ok(delta)
}

/// Primary-field law on the twisted module: for primary `A` of weight
/// `Delta` and unipotent `rho`,
/// `R(rho) Y(A, rho(z^(1/N))) R(rho)^(-1) (d/dz rho^N(z^(1/N)))^Delta
///  = Y(A, z^(1/N))`.
pub fn primary_transform_check(
    engine: &FieldEngine,
    rho: &CoordChange,
    a: &FockVector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    if !rho.is_unipotent() {
        return Err(Error::NotUnipotent);
    }
    let delta = primary_weight(engine, a)?;
    let sector = Sector::Twisted;
    let scalar = rho
        .mu()?
        .derivative()
        .pow_frac(&Rat::from(delta))?
        .convert_ram(2)?;
    let act = ModuleAction::from_coord_change(rho, &sector)?;
    let act_inv = ModuleAction::from_coord_change(&rho.invert()?, &sector)?;
    let mut powers = PowerCache::new(rho);
    let mut states: FracSeries<FockVector> = FracSeries::zero(1);
    states.add_to(0, a);
    for mono in basis_up_to(&sector, slice_deg).into_iter().rev() {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        for e in (window.0..=window.1).rev() {
            // scalar factor: sum over its stored exponents x (half-units)
            let mut lhs = FockVector::zero(sector.clone());
            let floor_conj = -(v.max_degree_half() + a.max_degree_half());
            if let Bound::Fin(h) = scalar.hi() {
                if e - floor_conj > h {
                    return Err(Error::InsufficientWindow(format!(
                        "scalar window [,{}] cannot certify exponent {}",
                        Rat::new(h, 2),
                        Rat::new(e, 2)
                    )));
                }
            }
            for (x, c) in scalar.iter() {
                if c.is_zero() {
                    continue;
                }
                let inner = conjugated_substituted_coeff(
                    engine,
                    &mut powers,
                    &act,
                    &act_inv,
                    &states,
                    a.max_degree_half(),
                    e - x,
                    &v,
                )?;
                lhs.add_scaled(&inner, c);
            }
            let rhs = engine.field_coeff(a, &sector, e, &v)?;
            if lhs != rhs {
                return Ok(Witness::fail(format!(
                    "primary law fails at e={} on {}: lhs={}, rhs={}",
                    Rat::new(e, 2),
                    crate::fock::format_monomial(&sector, &mono),
                    lhs,
                    rhs
                )));
            }
        }
    }
    Ok(Witness::pass())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{basis_up_to, parse_fock};

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn mu_examples() {
        let rho = CoordChange::central(2, &Rat::from(-1), 9).unwrap();
        let m = rho.mu().unwrap();
        assert_eq!(m.coeff_at_key(1), Rat::one());
        assert_eq!(m.iter().filter(|(k, _)| *k != 1).count(), 0);
        let rho = CoordChange::identity(2, 9);
        assert_eq!(rho.mu().unwrap().coeff_at_key(1), Rat::one());
        // (z^(1/2) + z^(3/2))^2 = z + 2 z^2 + z^3
        let rho = CoordChange::new(2, &[(1, Rat::one()), (3, Rat::one())], 7).unwrap();
        let m = rho.mu().unwrap();
        assert_eq!(m.coeff_at_key(1), Rat::one());
        assert_eq!(m.coeff_at_key(2), Rat::from(2));
        assert_eq!(m.coeff_at_key(3), Rat::one());
        assert_eq!(m.coeff_at_key(4), Rat::zero());
    }

    #[test]
    fn group_laws() {
        let rho =
            CoordChange::new(2, &[(1, Rat::one()), (3, rat(1, 2)), (5, rat(-2, 3))], 11).unwrap();
        let inv = rho.invert().unwrap();
        let id = rho.compose(&inv).unwrap();
        for k in 1..=9 {
            let want = if k == 1 { Rat::one() } else { Rat::zero() };
            assert_eq!(id.w_series().coeff_at_key(k), want, "at w^{}", k);
        }
        let e1 = CoordChange::central(2, &Rat::from(-1), 5).unwrap();
        let c = e1.compose(&e1).unwrap();
        assert_eq!(c.leading(), Rat::one());
        // reversion: invert(w + w^3) = w - w^3 + 3 w^5 + O(w^7)
        let rho = CoordChange::new(2, &[(1, Rat::one()), (3, Rat::one())], 7).unwrap();
        let inv = rho.invert().unwrap();
        assert_eq!(inv.w_series().coeff_at_key(1), Rat::one());
        assert_eq!(inv.w_series().coeff_at_key(3), Rat::from(-1));
        assert_eq!(inv.w_series().coeff_at_key(5), Rat::from(3));
    }

    #[test]
    fn mu_image_compose_consistency() {
        // composing an integer series with mu(rho) agrees with rewriting it
        // on the half grid and composing with rho itself
        let rho = CoordChange::new(2, &[(1, Rat::one()), (3, rat(1, 2))], 13).unwrap();
        let mut f: ScalarSeries = FracSeries::with_window(1, Bound::NegInf, Bound::Fin(5));
        f.add_to(-1, &Rat::from(3));
        f.add_to(0, &Rat::one());
        f.add_to(2, &rat(-2, 7));
        let lhs = crate::series::compose(&f, &rho.mu().unwrap()).unwrap();
        // rewrite f in the uniformizer: z^q = w^(2q)
        let mut f_w: ScalarSeries = FracSeries::with_window(
            1,
            Bound::NegInf,
            match f.hi() {
                Bound::Fin(h) => Bound::Fin(2 * h),
                b => b,
            },
        );
        for (k, c) in f.iter() {
            f_w.add_to(2 * k, c);
        }
        let rhs = crate::series::compose(&f_w, rho.w_series()).unwrap();
        // rhs keys are w-exponents; every surviving one is even and halving
        // them collects the integer exponents of lhs
        for (k, c) in rhs.iter() {
            assert_eq!(k.rem_euclid(2), 0, "odd exponent survived");
            let e = Rat::new(k / 2, 1);
            if let Ok(want) = lhs.coeff(&e) {
                assert_eq!(&want, c, "at z^{}", e);
            }
        }
    }

    #[test]
    fn mu_is_homomorphism() {
        let a = CoordChange::new(2, &[(1, Rat::one()), (3, rat(1, 3))], 13).unwrap();
        let b = CoordChange::new(2, &[(1, Rat::one()), (5, rat(-1, 2))], 13).unwrap();
        let lhs = a.compose(&b).unwrap().mu().unwrap();
        let ma = a.mu().unwrap();
        let mb = b.mu().unwrap();
        let rhs = crate::series::compose(&ma, &mb)
            .unwrap()
            .convert_ram(1)
            .unwrap();
        for k in 1..=5 {
            assert_eq!(lhs.coeff_at_key(k), rhs.coeff_at_key(k), "z^{}", k);
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let d = DerElement::new(2, &[(1, rat(1, 2)), (2, rat(-1, 3))]);
        let rho = d.exp_coordinate(11).unwrap();
        assert!(rho.is_unipotent());
        let v = log_of_unipotent(rho.w_series(), 11).unwrap();
        assert_eq!(v, d.v_w_series(11));
        // the mu-diagram commutes: mu(exp d) = exp(u(z) d/dz) applied to z
        let u = d.to_base_field();
        let mu_rho = rho.mu().unwrap();
        let exp_u = exp_derivation_on_w(&u, 5).unwrap();
        for k in 1..=5 {
            assert_eq!(mu_rho.coeff_at_key(k), exp_u.coeff_at_key(k), "z^{}", k);
        }
        let z = DerElement::new(2, &[]);
        assert!(z.to_base_field().is_zero_series());
    }

    #[test]
    fn module_action_examples() {
        let engine = FieldEngine::new();
        let rho = CoordChange::identity(2, 9);
        let act = ModuleAction::from_coord_change(&rho, &Sector::Twisted).unwrap();
        let v = parse_fock("b(-3/2)*b(-1/2)|0;tw>").unwrap();
        assert_eq!(act.apply(&engine, &v).unwrap(), v);
        // central flip negates odd states
        let rho = CoordChange::central(2, &Rat::from(-1), 9).unwrap();
        let act = ModuleAction::from_coord_change(&rho, &Sector::Twisted).unwrap();
        let v = parse_fock("b(-1/2)|0;tw>").unwrap();
        assert_eq!(act.apply(&engine, &v).unwrap(), v.scale(&Rat::from(-1)));
        // unipotent changes fix the twisted vacuum
        let rho = CoordChange::new(2, &[(1, Rat::one()), (3, rat(1, 2))], 9).unwrap();
        let act = ModuleAction::from_coord_change(&rho, &Sector::Twisted).unwrap();
        let vac = FockVector::vacuum(Sector::Twisted);
        assert_eq!(act.apply(&engine, &vac).unwrap(), vac);
    }

    #[test]
    fn algebra_action_examples() {
        let engine = FieldEngine::new();
        let alg = Sector::untwisted_zero();
        // tau = 2z scales degree-Delta states by 2^(-Delta)
        let tau = CoordChange::new(1, &[(1, Rat::from(2))], 6).unwrap();
        let act = ModuleAction::from_coord_change(&tau, &alg).unwrap();
        let b = parse_fock("b(-1)|0>").unwrap();
        assert_eq!(act.apply(&engine, &b).unwrap(), b.scale(&rat(1, 2)));
        let omega = FieldEngine::omega();
        assert_eq!(act.apply(&engine, &omega).unwrap(), omega.scale(&rat(1, 4)));
        // a unipotent tau fixes a primary of weight 1
        let tau =
            CoordChange::new(1, &[(1, Rat::one()), (2, Rat::one()), (3, Rat::one())], 6).unwrap();
        let act = ModuleAction::from_coord_change(&tau, &alg).unwrap();
        assert_eq!(act.apply(&engine, &b).unwrap(), b);
    }

    #[test]
    fn inverse_action_on_slice() {
        let engine = FieldEngine::new();
        let rho =
            CoordChange::new(2, &[(1, Rat::one()), (3, rat(1, 2)), (7, rat(2, 5))], 13).unwrap();
        let act = ModuleAction::from_coord_change(&rho, &Sector::Twisted).unwrap();
        let inv =
            ModuleAction::from_coord_change(&rho.invert().unwrap(), &Sector::Twisted).unwrap();
        for m in basis_up_to(&Sector::Twisted, 6) {
            let v = FockVector::from_monomial(Sector::Twisted, m, Rat::one());
            let w = inv
                .apply(&engine, &act.apply(&engine, &v).unwrap())
                .unwrap();
            assert_eq!(w, v);
        }
    }

    #[test]
    fn infinitesimal_law_small() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let d0 = DerElement::new(2, &[(0, Rat::one())]);
        let w = infinitesimal_transform_check(&engine, &d0, &b, 4, (-5, 4)).unwrap();
        assert!(w.ok, "{:?}", w.detail);
        // vacuum state: both sides vanish
        let vac = FockVector::vacuum(Sector::untwisted_zero());
        let w = infinitesimal_transform_check(&engine, &d0, &vac, 4, (-4, 4)).unwrap();
        assert!(w.ok, "{:?}", w.detail);
        // k = 1 generator against omega exercises the translation term
        let d1 = DerElement::new(2, &[(1, Rat::one())]);
        let w = infinitesimal_transform_check(&engine, &d1, &FieldEngine::omega(), 4, (-4, 3))
            .unwrap();
        assert!(w.ok, "{:?}", w.detail);
    }

    #[test]
    fn group_law_identity_and_small() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let id = CoordChange::identity(2, 13);
        let w = group_transform_check(&engine, &id, &b, 4, (-4, 3)).unwrap();
        assert!(w.ok, "{:?}", w.detail);
        let rho = CoordChange::new(2, &[(1, Rat::one()), (3, Rat::one())], 13).unwrap();
        let w = group_transform_check(&engine, &rho, &b, 2, (-2, 1)).unwrap();
        assert!(w.ok, "{:?}", w.detail);
    }

    #[test]
    fn primary_law_small() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let id = CoordChange::identity(2, 13);
        let w = primary_transform_check(&engine, &id, &b, 4, (-3, 3)).unwrap();
        assert!(w.ok, "{:?}", w.detail);
        // omega is not primary for the rank-one boson
        let err = primary_transform_check(&engine, &id, &FieldEngine::omega(), 2, (-2, 2));
        assert!(matches!(err, Err(Error::NotPrimary(_))));
    }

    #[test]
    fn taylor_family_examples() {
        // tau = z^2: tau_z = 2 z t + t^2
        let mut tau = FracSeries::zero(1);
        tau.add_to(2, &Rat::one());
        let fam = CoordFamily::expand(&tau, 4);
        assert_eq!(fam.coeff_t(1).coeff_at_key(1), Rat::from(2));
        assert_eq!(fam.coeff_t(2).coeff_at_key(0), Rat::one());
        assert!(fam.coeff_t(3).is_zero_series());
        // tau = z + z^2: tau_z = (1 + 2z) t + t^2
        let mut tau = FracSeries::zero(1);
        tau.add_to(1, &Rat::one());
        tau.add_to(2, &Rat::one());
        let fam = CoordFamily::expand(&tau, 4);
        assert_eq!(fam.coeff_t(1).coeff_at_key(0), Rat::one());
        assert_eq!(fam.coeff_t(1).coeff_at_key(1), Rat::from(2));
        assert_eq!(fam.coeff_t(2).coeff_at_key(0), Rat::one());
    }
}
