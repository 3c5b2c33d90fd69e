//! The level-`k` sl2 vertex algebra, its order-two twist, and affine
//! coinvariants on the double cover.
//!
//! The Cartan involution `e <-> f`, `h -> -h` splits sl2 into the fixed line
//! spanned by `e + f` and the flipped plane spanned by `e - f` and `h`. In
//! the twisted module the fixed generator carries integer modes and the
//! flipped ones half-odd-integer modes; the module is induced from the
//! trivial representation of the nonnegative modes at level `k`. Functions on
//! the cover pair with the eigenspaces by parity, and coinvariants are
//! computed by the same exact elimination as the Heisenberg engine.

use std::collections::BTreeMap;

use crate::blocks::{Elim, QCtx, QScalar};
use crate::cover::{BasePoint, CoverConfig, Insertion, ModuleSpec, Parity, RationalFn};
use crate::error::{Error, Result};
use crate::field::Witness;
use crate::rat::Rat;

pub const DUAL_COXETER: i64 = 2;

// ---------------------------------------------------------------------------
// sl2 data
// ---------------------------------------------------------------------------

/// Untwisted basis indices.
pub const E: u8 = 0;
pub const H: u8 = 1;
pub const F: u8 = 2;

/// Twisted (eigenbasis) indices: `A = e + f`, `B = e - f`, `C = h`.
pub const TA: u8 = 0;
pub const TB: u8 = 1;
pub const TC: u8 = 2;

/// Structure constants in the untwisted basis: `[x, y] = sum c_g g`.
pub fn bracket_untwisted(x: u8, y: u8) -> Vec<(u8, Rat)> {
    match (x, y) {
        (H, E) => vec![(E, Rat::from(2))],
        (E, H) => vec![(E, Rat::from(-2))],
        (H, F) => vec![(F, Rat::from(-2))],
        (F, H) => vec![(F, Rat::from(2))],
        (E, F) => vec![(H, Rat::one())],
        (F, E) => vec![(H, Rat::from(-1))],
        _ => Vec::new(),
    }
}

/// Normalized invariant form in the untwisted basis.
pub fn form_untwisted(x: u8, y: u8) -> Rat {
    match (x, y) {
        (H, H) => Rat::from(2),
        (E, F) | (F, E) => Rat::one(),
        _ => Rat::zero(),
    }
}

/// Structure constants in the eigenbasis.
pub fn bracket_twisted(x: u8, y: u8) -> Vec<(u8, Rat)> {
    match (x, y) {
        (TA, TB) => vec![(TC, Rat::from(-2))],
        (TB, TA) => vec![(TC, Rat::from(2))],
        (TA, TC) => vec![(TB, Rat::from(-2))],
        (TC, TA) => vec![(TB, Rat::from(2))],
        (TB, TC) => vec![(TA, Rat::from(-2))],
        (TC, TB) => vec![(TA, Rat::from(2))],
        _ => Vec::new(),
    }
}

/// Normalized invariant form in the eigenbasis.
pub fn form_twisted(x: u8, y: u8) -> Rat {
    match (x, y) {
        (TA, TA) => Rat::from(2),
        (TB, TB) => Rat::from(-2),
        (TC, TC) => Rat::from(2),
        _ => Rat::zero(),
    }
}

/// Involution eigenvalue exponent of a twisted-basis generator: `0` for the
/// fixed line, `1` for the flipped plane.
pub fn parity_of(g: u8) -> i32 {
    if g == TA {
        0
    } else {
        1
    }
}

/// The involution in the untwisted basis: `e <-> f`, `h -> -h`.
pub fn sigma_untwisted(g: u8) -> (u8, Rat) {
    match g {
        E => (F, Rat::one()),
        F => (E, Rat::one()),
        _ => (H, Rat::from(-1)),
    }
}

/// Expansion of a twisted-basis generator over the untwisted basis.
pub fn eigen_to_untwisted(g: u8) -> Vec<(u8, Rat)> {
    match g {
        TA => vec![(E, Rat::one()), (F, Rat::one())],
        TB => vec![(E, Rat::one()), (F, Rat::from(-1))],
        _ => vec![(H, Rat::one())],
    }
}

// ---------------------------------------------------------------------------
// PBW vectors
// ---------------------------------------------------------------------------

/// PBW monomial: `(mode in half-units, generator)` sorted ascending; all
/// modes negative.
pub type AffMono = Vec<(i32, u8)>;

pub fn aff_degree_half(m: &AffMono) -> i64 {
    -m.iter().map(|(k, _)| *k as i64).sum::<i64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffVector {
    pub terms: BTreeMap<AffMono, Rat>,
}

impl AffVector {
    pub fn zero() -> AffVector {
        AffVector {
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum() -> AffVector {
        let mut v = AffVector::zero();
        v.terms.insert(Vec::new(), Rat::one());
        v
    }

    pub fn from_monomial(m: AffMono, c: Rat) -> AffVector {
        let mut v = AffVector::zero();
        if !c.is_zero() {
            v.terms.insert(m, c);
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: AffMono, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let cur = self.terms.get(&m).cloned().unwrap_or_else(Rat::zero);
        let s = &cur + c;
        if s.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, s);
        }
    }

    pub fn add_scaled(&mut self, other: &AffVector, c: &Rat) {
        for (m, r) in &other.terms {
            self.add_term(m.clone(), &(r * c));
        }
    }

    pub fn scale(&self, c: &Rat) -> AffVector {
        let mut out = AffVector::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn max_degree_half(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| aff_degree_half(m))
            .max()
            .unwrap_or(0)
    }
}

/// One affine current algebra instance: a sector (which fixes mode parities
/// and the bracket table) at level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffAlgebra {
    pub twisted: bool,
    pub k: Rat,
}

impl AffAlgebra {
    pub fn untwisted(k: Rat) -> AffAlgebra {
        AffAlgebra { twisted: false, k }
    }

    pub fn twisted(k: Rat) -> AffAlgebra {
        AffAlgebra { twisted: true, k }
    }

    fn bracket(&self, x: u8, y: u8) -> Vec<(u8, Rat)> {
        if self.twisted {
            bracket_twisted(x, y)
        } else {
            bracket_untwisted(x, y)
        }
    }

    fn form(&self, x: u8, y: u8) -> Rat {
        if self.twisted {
            form_twisted(x, y)
        } else {
            form_untwisted(x, y)
        }
    }

    /// Half-unit parity a generator's modes must have.
    pub fn mode_parity(&self, g: u8) -> i32 {
        if self.twisted {
            parity_of(g)
        } else {
            0
        }
    }

    pub fn admits(&self, g: u8, mode_half: i32) -> bool {
        mode_half.rem_euclid(2) == self.mode_parity(g)
    }

    /// Apply the current mode `g_(mode)` to a vector, rewriting to the PBW
    /// basis. The bracket is
    /// `[x_m, y_n] = [x,y]_(m+n) + m (x,y) delta_(m,-n) k`.
    pub fn apply(&self, g: u8, mode_half: i32, v: &AffVector) -> Result<AffVector> {
        if !self.admits(g, mode_half) {
            return Err(Error::SectorMismatch(format!(
                "mode {} on generator {} in this sector",
                Rat::new(mode_half as i64, 2),
                g
            )));
        }
        let mut out = AffVector::zero();
        for (m, c) in &v.terms {
            let w = self.apply_mono(g, mode_half, m)?;
            out.add_scaled(&w, c);
        }
        Ok(out)
    }

    fn apply_mono(&self, g: u8, mode_half: i32, mono: &AffMono) -> Result<AffVector> {
        // creation in canonical position: prepend
        if mono.is_empty() || (mode_half, g) <= mono[0] {
            if mode_half >= 0 {
                return Ok(AffVector::zero()); // nonnegative modes kill the vacuum
            }
            let mut nm = Vec::with_capacity(mono.len() + 1);
            nm.push((mode_half, g));
            nm.extend_from_slice(mono);
            return Ok(AffVector::from_monomial(nm, Rat::one()));
        }
        // commute past the head: x_m y_n rest = y_n x_m rest + [x_m, y_n] rest
        let (n_half, y) = mono[0];
        let rest: AffMono = mono[1..].to_vec();
        let mut out = AffVector::zero();
        // y_n * (x_m rest)
        let tail = self.apply_mono(g, mode_half, &rest)?;
        for (m2, c2) in &tail.terms {
            let w = self.apply_mono(y, n_half, m2)?;
            out.add_scaled(&w, c2);
        }
        // bracket part
        for (zg, zc) in self.bracket(g, y) {
            let w = self.apply_mono(zg, mode_half + n_half, &rest)?;
            out.add_scaled(&w, &zc);
        }
        if mode_half + n_half == 0 {
            let central = &(&self.form(g, y) * &Rat::new(mode_half as i64, 2)) * &self.k;
            if !central.is_zero() {
                out.add_scaled(&AffVector::from_monomial(rest, Rat::one()), &central);
            }
        }
        Ok(out)
    }

    /// Basis monomials of exact degree `d` (half-units).
    pub fn monomials_of_degree(&self, d: i64) -> Vec<AffMono> {
        fn rec(
            alg: &AffAlgebra,
            remaining: i64,
            min_entry: (i32, u8),
            cur: &mut AffMono,
            out: &mut Vec<AffMono>,
        ) {
            if remaining == 0 {
                let mut m = cur.clone();
                m.sort();
                out.push(m);
                return;
            }
            for g in [0u8, 1, 2] {
                let parity = alg.mode_parity(g);
                let mut mode = -1 - ((parity + 1) % 2); // most shallow negative admissible
                while mode.rem_euclid(2) != parity {
                    mode -= 1;
                }
                while (-(mode as i64)) <= remaining {
                    let entry = (mode, g);
                    if entry >= min_entry {
                        cur.push(entry);
                        rec(alg, remaining + mode as i64, entry, cur, out);
                        cur.pop();
                    }
                    mode -= 2;
                }
            }
        }
        if d == 0 {
            return vec![Vec::new()];
        }
        if d < 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        rec(self, d, (i32::MIN, 0), &mut cur, &mut out);
        out.sort();
        out.dedup();
        out
    }

    pub fn basis_up_to(&self, d: i64) -> Vec<AffMono> {
        let mut out = Vec::new();
        for deg in 0..=d {
            out.extend(self.monomials_of_degree(deg));
        }
        out
    }

    /// Sugawara mode `L_n` on the untwisted vacuum module:
    /// `1/(2(k+2)) sum_a sum_j :J_(a,j) J^a_(n-j):` applied exactly.
    pub fn sugawara(&self, n: i64, v: &AffVector) -> Result<AffVector> {
        if self.twisted {
            return Err(Error::SectorMismatch(
                "Sugawara modes are provided on the untwisted module".into(),
            ));
        }
        if self.k == Rat::from(-DUAL_COXETER) {
            return Err(Error::CriticalLevel);
        }
        // dual pairs (J_a, J^a): (e, f), (f, e), (h, h/2)
        let pairs: [(u8, u8, Rat); 3] = [
            (E, F, Rat::one()),
            (F, E, Rat::one()),
            (H, H, Rat::new(1, 2)),
        ];
        let bound = v.max_degree_half() / 2 + n.abs() + 2;
        let mut acc = AffVector::zero();
        for j in -bound..=bound {
            let i2 = 2 * j as i32;
            let l2 = 2 * (n - j) as i32;
            for (x, y, w) in &pairs {
                // normal order: annihilators (mode >= 0) to the right, i.e.
                // applied before the creation half
                let (first, fg, second, sg) = if i2 >= 0 && l2 < 0 {
                    (l2, *y, i2, *x)
                } else {
                    (i2, *x, l2, *y)
                };
                let inner = self.apply(sg, second, v)?;
                if inner.is_zero() {
                    continue;
                }
                let outer = self.apply(fg, first, &inner)?;
                acc.add_scaled(&outer, w);
            }
        }
        let pref = Rat::one() / (&Rat::from(2) * &(&self.k + &Rat::from(DUAL_COXETER)));
        Ok(acc.scale(&pref))
    }
}

// ---------------------------------------------------------------------------
// Abstract Lie-algebra checks
// ---------------------------------------------------------------------------

/// Formal element of the affine Lie algebra: current modes plus a central
/// part.
#[derive(Clone, Debug, PartialEq)]
struct LieElt {
    modes: BTreeMap<(i32, u8), Rat>,
    central: Rat,
}

impl LieElt {
    fn zero() -> LieElt {
        LieElt {
            modes: BTreeMap::new(),
            central: Rat::zero(),
        }
    }

    fn gen(g: u8, mode_half: i32) -> LieElt {
        let mut e = LieElt::zero();
        e.modes.insert((mode_half, g), Rat::one());
        e
    }

    fn add_scaled(&mut self, o: &LieElt, c: &Rat) {
        for (k, v) in &o.modes {
            let cur = self.modes.get(k).cloned().unwrap_or_else(Rat::zero);
            let s = &cur + &(v * c);
            if s.is_zero() {
                self.modes.remove(k);
            } else {
                self.modes.insert(*k, s);
            }
        }
        self.central = &self.central + &(&o.central * c);
    }

    fn is_zero(&self) -> bool {
        self.modes.is_empty() && self.central.is_zero()
    }
}

fn lie_bracket(alg: &AffAlgebra, a: &LieElt, b: &LieElt) -> LieElt {
    let mut out = LieElt::zero();
    for ((m, x), cx) in &a.modes {
        for ((n, y), cy) in &b.modes {
            let c = cx * cy;
            for (z, zc) in alg.bracket(*x, *y) {
                let mut e = LieElt::gen(z, m + n);
                e.central = Rat::zero();
                out.add_scaled(&e, &(&c * &zc));
            }
            if m + n == 0 {
                let cen = &(&alg.form(*x, *y) * &Rat::new(*m as i64, 2)) * &alg.k;
                out.central = &out.central + &(&c * &cen);
            }
        }
    }
    out
}

/// Jacobi identity on all generator triples with modes bounded by
/// `mode_bound` (true units), in the given sector.
pub fn jacobi_check(alg: &AffAlgebra, mode_bound: i64) -> Witness {
    let gens: Vec<(u8, i32)> = {
        let mut v = Vec::new();
        for g in [0u8, 1, 2] {
            let parity = alg.mode_parity(g);
            let mut m = -(2 * mode_bound) as i32;
            while m as i64 <= 2 * mode_bound {
                if m.rem_euclid(2) == parity {
                    v.push((g, m));
                }
                m += 1;
            }
        }
        v
    };
    for &(g1, m1) in &gens {
        for &(g2, m2) in &gens {
            for &(g3, m3) in &gens {
                let a = LieElt::gen(g1, m1);
                let b = LieElt::gen(g2, m2);
                let c = LieElt::gen(g3, m3);
                let mut total = lie_bracket(alg, &a, &lie_bracket(alg, &b, &c));
                total.add_scaled(&lie_bracket(alg, &b, &lie_bracket(alg, &c, &a)), &Rat::one());
                total.add_scaled(&lie_bracket(alg, &c, &lie_bracket(alg, &a, &b)), &Rat::one());
                if !total.is_zero() {
                    return Witness::fail(format!(
                        "Jacobi fails on ({},{}),({},{}),({},{})",
                        g1, m1, g2, m2, g3, m3
                    ));
                }
            }
        }
    }
    Witness::pass()
}

/// Sugawara grading: `[L_0, a_n] = -n a_n` on a basis slice of the untwisted
/// module.
pub fn sugawara_grading_check(k: &Rat, slice_deg: i64, mode_bound: i64) -> Result<Witness> {
    let alg = AffAlgebra::untwisted(k.clone());
    for mono in alg.basis_up_to(slice_deg) {
        let v = AffVector::from_monomial(mono, Rat::one());
        for g in [E, H, F] {
            let mut n = -mode_bound;
            while n <= mode_bound {
                let av = alg.apply(g, 2 * n as i32, &v)?;
                let lhs_a = alg.sugawara(0, &av)?;
                let lhs_b = alg.apply(g, 2 * n as i32, &alg.sugawara(0, &v)?)?;
                let mut lhs = lhs_a;
                lhs.add_scaled(&lhs_b, &Rat::from(-1));
                let rhs = av.scale(&Rat::from(-n));
                if lhs != rhs {
                    return Ok(Witness::fail(format!(
                        "Sugawara grading fails for generator {} at n={}",
                        g, n
                    )));
                }
                n += 1;
            }
        }
    }
    Ok(Witness::pass())
}

// ---------------------------------------------------------------------------
// The outer algebra on the cover and coinvariants
// ---------------------------------------------------------------------------

/// Basis of the outer algebra: eigenbasis generators paired with functions of
///的 matching parity.
pub fn g_out_basis(cfg: &CoverConfig, pole_bound: u32) -> Result<Vec<(u8, RationalFn)>> {
    let mut out = Vec::new();
    for g in [TA, TB, TC] {
        let parity = if parity_of(g) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        };
        for f in cfg.function_basis(parity, pole_bound)? {
            out.push((g, f));
        }
    }
    Ok(out)
}

/// Closure of the outer algebra under the bracket: eigenspace parities add
/// and function parities multiply accordingly.
pub fn g_out_closure_check(cfg: &CoverConfig, pole_bound: u32) -> Result<Witness> {
    let basis = g_out_basis(cfg, pole_bound)?;
    for (g1, f1) in &basis {
        for (g2, f2) in &basis {
            let target = (parity_of(*g1) + parity_of(*g2)) % 2;
            let prod = RationalFn::new(
                crate::cover::poly_mul(&f1.num, &f2.num),
                crate::cover::poly_mul(&f1.den, &f2.den),
            )?;
            let want = if target == 0 { Parity::Even } else { Parity::Odd };
            if !prod.is_zero() && prod.parity() != Some(want) {
                return Ok(Witness::fail(format!(
                    "function parity mismatch for [{}x, {}x]",
                    g1, g2
                )));
            }
            for (z, _) in bracket_twisted(*g1, *g2) {
                if parity_of(z) != target {
                    return Ok(Witness::fail(format!(
                        "eigenspace parity mismatch in [{}, {}]",
                        g1, g2
                    )));
                }
            }
        }
    }
    Ok(Witness::pass())
}

#[derive(Clone, Debug)]
enum AffSlotGeom {
    BranchZero,
    BranchInfinity,
    Unramified { t0: Rat },
}

/// An affine configuration realized for computation.
pub struct AffSetup {
    pub cfg: CoverConfig,
    slots: Vec<(AffSlotGeom, AffAlgebra)>,
}

pub type AffTensorMono = Vec<AffMono>;

pub fn aff_tensor_degree(tm: &AffTensorMono) -> i64 {
    tm.iter().map(|m| aff_degree_half(m)).sum()
}

impl AffSetup {
    pub fn from_config(cfg: &CoverConfig) -> Result<AffSetup> {
        cfg.validate()?;
        let mut slots = Vec::new();
        for ins in &cfg.insertions {
            let geom = match &ins.at {
                BasePoint::Zero => AffSlotGeom::BranchZero,
                BasePoint::Infinity => AffSlotGeom::BranchInfinity,
                BasePoint::Finite(sv) => {
                    let s: Rat = sv
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?;
                    let mut t0 = cfg.fiber_coordinate(&s)?;
                    if !ins.plus_point {
                        t0 = -t0;
                    }
                    AffSlotGeom::Unramified { t0 }
                }
            };
            let alg = match &ins.module {
                ModuleSpec::AffineTwisted { k } => {
                    if !ins.at.is_branch() {
                        return Err(Error::InvalidConfig(
                            "twisted affine insertions go at branch points".into(),
                        ));
                    }
                    AffAlgebra::twisted(k.clone())
                }
                ModuleSpec::AffineVacuum { k } => {
                    if ins.at.is_branch() {
                        return Err(Error::InvalidConfig(
                            "vacuum affine insertions go at unramified points".into(),
                        ));
                    }
                    AffAlgebra::untwisted(k.clone())
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "Heisenberg insertion {:?} in the affine engine",
                        other
                    )))
                }
            };
            slots.push((geom, alg));
        }
        let levels: Vec<&Rat> = slots.iter().map(|(_, a)| &a.k).collect();
        if let Some(first) = levels.first() {
            if levels.iter().any(|k| k != first) {
                return Err(Error::InvalidConfig("mixed levels".into()));
            }
        }
        Ok(AffSetup {
            cfg: cfg.clone(),
            slots,
        })
    }

    /// Mode combination of `a (x) f` at a slot: the Laurent expansion of `f`
    /// in the slot's special coordinate paired with the current modes. At a
    /// twisted slot only the parity-matched exponents appear; at an
    /// unramified slot the eigenbasis generator expands over `e, h, f`.
    fn slot_combo(
        &self,
        slot: usize,
        gen: u8,
        f: &RationalFn,
        order: i64,
    ) -> Result<Vec<(u8, i32, Rat)>> {
        let (geom, alg) = &self.slots[slot];
        let mut out = Vec::new();
        match geom {
            AffSlotGeom::BranchZero | AffSlotGeom::BranchInfinity => {
                let exp = match geom {
                    AffSlotGeom::BranchZero => f.expand_at_zero(order)?,
                    _ => f.expand_at_infinity(order)?,
                };
                for (j, c) in exp.iter() {
                    let j = j as i32;
                    if alg.admits(gen, j) {
                        out.push((gen, j, c.clone()));
                    } else if !c.is_zero() {
                        return Err(Error::SectorMismatch(format!(
                            "function pairs generator {} with a forbidden mode {}",
                            gen,
                            Rat::new(j as i64, 2)
                        )));
                    }
                }
            }
            AffSlotGeom::Unramified { t0 } => {
                let exp = f.expand_at(t0, order)?;
                for (ug, uc) in eigen_to_untwisted(gen) {
                    for (j, c) in exp.iter() {
                        out.push((ug, 2 * j as i32, c * &uc));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn tensor_basis_of_degree(&self, d: i64) -> Vec<AffTensorMono> {
        fn rec(
            setup: &AffSetup,
            slot: usize,
            remaining: i64,
            cur: &mut AffTensorMono,
            out: &mut Vec<AffTensorMono>,
        ) {
            if slot == setup.slots.len() {
                if remaining == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for d in 0..=remaining {
                for m in setup.slots[slot].1.monomials_of_degree(d) {
                    cur.push(m);
                    rec(setup, slot + 1, remaining - d, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = Vec::new();
        rec(self, 0, d, &mut cur, &mut out);
        out.sort();
        out
    }

    pub fn tensor_basis_up_to(&self, d: i64) -> Vec<AffTensorMono> {
        let mut out = Vec::new();
        for deg in 0..=d {
            out.extend(self.tensor_basis_of_degree(deg));
        }
        out
    }

    /// Action of an outer-algebra element on a tensor monomial.
    pub fn act(
        &self,
        gen: u8,
        f: &RationalFn,
        order: i64,
        tm: &AffTensorMono,
    ) -> Result<Vec<(AffTensorMono, Rat)>> {
        let mut acc: BTreeMap<AffTensorMono, Rat> = BTreeMap::new();
        for slot in 0..self.slots.len() {
            let combo = self.slot_combo(slot, gen, f, order)?;
            let alg = &self.slots[slot].1;
            for (g, mode, c) in combo {
                if c.is_zero() {
                    continue;
                }
                let v = AffVector::from_monomial(tm[slot].clone(), Rat::one());
                let w = alg.apply(g, mode, &v)?;
                for (nm, nc) in &w.terms {
                    let mut ntm = tm.clone();
                    ntm[slot] = nm.clone();
                    let cur = acc.get(&ntm).cloned().unwrap_or_else(Rat::zero);
                    let s = &cur + &(nc * &c);
                    if s.is_zero() {
                        acc.remove(&ntm);
                    } else {
                        acc.insert(ntm, s);
                    }
                }
            }
        }
        Ok(acc.into_iter().collect())
    }
}

/// Graded affine coinvariant dimensions with the stabilization probe.
pub fn affine_coinvariant_dims(cfg: &CoverConfig) -> Result<crate::blocks::DimTable> {
    let dims = affine_dims_at(cfg, cfg.pole_bound)?;
    let probe = affine_dims_at(cfg, cfg.pole_bound + 2)?;
    let stabilized = dims == probe;
    Ok(crate::blocks::DimTable {
        dims: dims
            .into_iter()
            .map(|(d, n)| (Rat::new(d, 2).to_string(), n))
            .collect(),
        pole_bound: cfg.pole_bound,
        stabilized,
    })
}

fn affine_dims_at(cfg: &CoverConfig, pole_bound: u32) -> Result<Vec<(i64, usize)>> {
    let setup = AffSetup::from_config(cfg)?;
    let dcut = cfg.degree_cutoff_half;
    let mut columns = setup.tensor_basis_up_to(dcut);
    columns.sort_by_key(|tm| (-aff_tensor_degree(tm), tm.clone()));
    let col_index: BTreeMap<AffTensorMono, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, tm)| (tm.clone(), i))
        .collect();
    // see the Heisenberg engine: above-cutoff sources never contribute
    let sources = setup.tensor_basis_up_to(dcut);
    let order = dcut + 2 * pole_bound as i64 + 4;
    let basis = g_out_basis(cfg, pole_bound)?;
    let mut elim = Elim::new(QCtx::rational(), columns.len());
    for (gen, f) in &basis {
        for src in &sources {
            let img = setup.act(*gen, f, order, src)?;
            if img.is_empty() {
                continue;
            }
            if img.iter().any(|(tm, _)| aff_tensor_degree(tm) > dcut) {
                continue;
            }
            let row: Vec<(usize, QScalar)> = img
                .into_iter()
                .map(|(tm, c)| (col_index[&tm], QScalar::from_rat(&c)))
                .collect();
            elim.insert(row);
        }
    }
    let mut per_degree: BTreeMap<i64, usize> = BTreeMap::new();
    for tm in &columns {
        *per_degree.entry(aff_tensor_degree(tm)).or_insert(0) += 1;
    }
    let mut pivot_deg: BTreeMap<i64, usize> = BTreeMap::new();
    for col in elim.pivots.keys() {
        let d = aff_tensor_degree(&columns[*col]);
        *pivot_deg.entry(d).or_insert(0) += 1;
    }
    Ok(per_degree
        .into_iter()
        .map(|(d, m)| (d, m - pivot_deg.get(&d).copied().unwrap_or(0)))
        .collect())
}

/// Insert an affine vacuum module at an extra unramified point and compare.
pub fn affine_vacuum_propagation(
    cfg: &CoverConfig,
    extra_s: &Rat,
) -> Result<(crate::blocks::DimTable, crate::blocks::DimTable)> {
    let base = affine_coinvariant_dims(cfg)?;
    let k = match &cfg.insertions[0].module {
        ModuleSpec::AffineTwisted { k } | ModuleSpec::AffineVacuum { k } => k.clone(),
        _ => return Err(Error::InvalidConfig("not an affine configuration".into())),
    };
    let mut cfg2 = cfg.clone();
    cfg2.insertions.push(Insertion {
        at: BasePoint::Finite(extra_s.to_string()),
        module: ModuleSpec::AffineVacuum { k },
        plus_point: true,
    });
    cfg2.validate()?;
    let extended = affine_coinvariant_dims(&cfg2)?;
    Ok((base, extended))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_twisted(k: i64, dcut_half: i64, pole_bound: u32) -> CoverConfig {
        CoverConfig {
            insertions: vec![
                Insertion {
                    at: BasePoint::Zero,
                    module: ModuleSpec::AffineTwisted { k: Rat::from(k) },
                    plus_point: true,
                },
                Insertion {
                    at: BasePoint::Infinity,
                    module: ModuleSpec::AffineTwisted { k: Rat::from(k) },
                    plus_point: true,
                },
            ],
            degree_cutoff_half: dcut_half,
            pole_bound,
        }
    }

    #[test]
    fn finite_dim_brackets() {
        // sigma is an automorphism: check it preserves brackets
        for x in [E, H, F] {
            for y in [E, H, F] {
                let (sx, cx) = sigma_untwisted(x);
                let (sy, cy) = sigma_untwisted(y);
                let mut lhs: BTreeMap<u8, Rat> = BTreeMap::new();
                for (z, c) in bracket_untwisted(sx, sy) {
                    lhs.insert(z, &c * &(&cx * &cy));
                }
                let mut rhs: BTreeMap<u8, Rat> = BTreeMap::new();
                for (z, c) in bracket_untwisted(x, y) {
                    let (sz, cz) = sigma_untwisted(z);
                    rhs.insert(sz, &c * &cz);
                }
                lhs.retain(|_, c| !c.is_zero());
                rhs.retain(|_, c| !c.is_zero());
                assert_eq!(lhs, rhs, "sigma breaks [{}, {}]", x, y);
            }
        }
        // the form is sigma-invariant
        for x in [E, H, F] {
            for y in [E, H, F] {
                let (sx, cx) = sigma_untwisted(x);
                let (sy, cy) = sigma_untwisted(y);
                assert_eq!(form_untwisted(sx, sy), &form_untwisted(x, y) * &(&cx * &cy));
            }
        }
    }

    #[test]
    fn central_term_examples() {
        let alg = AffAlgebra::untwisted(Rat::from(3));
        // e_1 f_{-1} |0> = k |0>
        let v = alg
            .apply(F, -2, &AffVector::vacuum())
            .unwrap();
        let w = alg.apply(E, 2, &v).unwrap();
        assert_eq!(w, AffVector::vacuum().scale(&Rat::from(3)));
        // twisted: (e-f)_(1/2) (e-f)_(-1/2) |0> = -k |0>
        let alg = AffAlgebra::twisted(Rat::from(3));
        let v = alg.apply(TB, -1, &AffVector::vacuum()).unwrap();
        let w = alg.apply(TB, 1, &v).unwrap();
        assert_eq!(w, AffVector::vacuum().scale(&Rat::from(-3)));
    }

    #[test]
    fn jacobi_both_sectors() {
        for k in [Rat::one(), Rat::new(-1, 2)] {
            let w = jacobi_check(&AffAlgebra::untwisted(k.clone()), 2);
            assert!(w.ok, "{:?}", w.detail);
            let w = jacobi_check(&AffAlgebra::twisted(k), 2);
            assert!(w.ok, "{:?}", w.detail);
        }
    }

    #[test]
    fn sugawara_weights() {
        let alg = AffAlgebra::untwisted(Rat::one());
        assert!(alg.sugawara(0, &AffVector::vacuum()).unwrap().is_zero());
        // currents have conformal weight one
        for g in [E, H, F] {
            let v = alg.apply(g, -2, &AffVector::vacuum()).unwrap();
            assert_eq!(alg.sugawara(0, &v).unwrap(), v);
        }
        // L_{-1} e_{-1}|0> = e_{-2}|0>
        let v = alg.apply(E, -2, &AffVector::vacuum()).unwrap();
        let w = alg.sugawara(-1, &v).unwrap();
        assert_eq!(w, alg.apply(E, -4, &AffVector::vacuum()).unwrap());
        // critical level rejected
        let crit = AffAlgebra::untwisted(Rat::from(-2));
        assert!(matches!(
            crit.sugawara(0, &AffVector::vacuum()),
            Err(Error::CriticalLevel)
        ));
    }

    #[test]
    fn sugawara_grading() {
        let w = sugawara_grading_check(&Rat::one(), 4, 2).unwrap();
        assert!(w.ok, "{:?}", w.detail);
    }

    #[test]
    fn g_out_parity_examples() {
        let cfg = two_twisted(1, 2, 3);
        let basis = g_out_basis(&cfg, 2).unwrap();
        // (e+f) (x) t^2 admitted
        assert!(basis
            .iter()
            .any(|(g, f)| *g == TA && *f == RationalFn::monomial(2)));
        // h (x) t admitted
        assert!(basis
            .iter()
            .any(|(g, f)| *g == TC && *f == RationalFn::monomial(1)));
        // h (x) t^2 rejected
        assert!(!basis
            .iter()
            .any(|(g, f)| *g == TC && *f == RationalFn::monomial(2)));
        let w = g_out_closure_check(&cfg, 3).unwrap();
        assert!(w.ok, "{:?}", w.detail);
    }

    #[test]
    fn central_terms_cancel_globally() {
        // sum over points of the bracket central terms vanishes: the residue
        // sum of f dg over the whole line is zero
        let cfg = two_twisted(1, 2, 3);
        let setup = AffSetup::from_config(&cfg).unwrap();
        let f = RationalFn::monomial(1); // odd: pairs with B, C
        let g = RationalFn::monomial(-1);
        let order = 12;
        // compute [B (x) f, C (x) g] acting on the vacuum minus the
        // pointwise bracket action; the difference is the net central term
        let vac: AffTensorMono = vec![Vec::new(), Vec::new()];
        let apply = |gen: u8, func: &RationalFn, v: &Vec<(AffTensorMono, Rat)>| {
            let mut out: BTreeMap<AffTensorMono, Rat> = BTreeMap::new();
            for (tm, c) in v {
                for (ntm, nc) in setup.act(gen, func, order, tm).unwrap() {
                    let cur = out.get(&ntm).cloned().unwrap_or_else(Rat::zero);
                    let s = &cur + &(&nc * c);
                    if s.is_zero() {
                        out.remove(&ntm);
                    } else {
                        out.insert(ntm, s);
                    }
                }
            }
            out.into_iter().collect::<Vec<_>>()
        };
        let v0 = vec![(vac.clone(), Rat::one())];
        let fg = apply(TB, &f, &apply(TC, &g, &v0));
        let gf = apply(TC, &g, &apply(TB, &f, &v0));
        // [B f, C g] = [B, C] (x) fg pointwise (central parts cancel in the sum)
        let mut comm: BTreeMap<AffTensorMono, Rat> = BTreeMap::new();
        for (tm, c) in fg {
            let e = comm.entry(tm).or_insert_with(Rat::zero);
            *e = &*e + &c;
        }
        for (tm, c) in gf {
            let e = comm.entry(tm).or_insert_with(Rat::zero);
            *e = &*e - &c;
        }
        comm.retain(|_, c| !c.is_zero());
        let prod = RationalFn::new(
            crate::cover::poly_mul(&f.num, &g.num),
            crate::cover::poly_mul(&f.den, &g.den),
        )
        .unwrap();
        let mut want: BTreeMap<AffTensorMono, Rat> = BTreeMap::new();
        for (z, zc) in bracket_twisted(TB, TC) {
            for (tm, c) in setup.act(z, &prod, order, &vac).unwrap() {
                let e = want.entry(tm).or_insert_with(Rat::zero);
                *e = &*e + &(&c * &zc);
            }
        }
        want.retain(|_, c| !c.is_zero());
        assert_eq!(comm, want);
    }

    #[test]
    fn affine_dims_and_vacuum_insertion() {
        let cfg = two_twisted(1, 2, 4);
        let table = affine_coinvariant_dims(&cfg).unwrap();
        assert!(table.stabilized);
        assert_eq!(table.dims[0].1, 1, "vacuum line survives");
        let (base, ext) = affine_vacuum_propagation(&cfg, &Rat::from(1)).unwrap();
        assert_eq!(base.dims, ext.dims);
    }
}
