//! Coinvariants of the odd function algebra on tensor products of Fock
//! insertions.
//!
//! Functions regular away from the marked fibers act slotwise through the
//! residue pairing with the weight-one form of each insertion: at a branch
//! point the pairing of `f` against the form is `2 sum_(j odd) a_j b_(j/2)`
//! in terms of the local expansion `f = sum a_j t^j`, and at an unramified
//! fiber both sheets contribute Taylor-coefficient multiples of the integer
//! modes, the companion sheet with the conjugated (negated) generator action.
//! Coinvariant dimensions are computed by exact Gaussian elimination with a
//! fixed column order, so tables are reproducible bit for bit.
//!
//! Weights `lambda = sqrt(M)` of untwisted insertions live in the quadratic
//! extension `Q(sqrt(M))`; all arithmetic stays exact there.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::cover::{BasePoint, CoverConfig, Insertion, LambdaSpec, ModuleSpec, Parity, RationalFn};
use crate::error::{Error, Result};
use crate::fock::{monomials_of_degree, Monomial};
use crate::rat::Rat;

// ---------------------------------------------------------------------------
// Quadratic extension scalars
// ---------------------------------------------------------------------------

/// Field context `Q(sqrt(m))`; `m = 0` means plain rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct QCtx {
    pub m: Rat,
}

impl QCtx {
    pub fn rational() -> QCtx {
        QCtx { m: Rat::zero() }
    }

    pub fn new(m: Rat) -> Result<QCtx> {
        if m.is_zero() {
            return Ok(QCtx::rational());
        }
        if m.pow_rat(&Rat::new(1, 2)).is_some() {
            return Err(Error::InvalidConfig(format!(
                "square radicand {} should be folded into the rational part",
                m
            )));
        }
        Ok(QCtx { m })
    }

    pub fn add(&self, x: &QScalar, y: &QScalar) -> QScalar {
        QScalar {
            a: &x.a + &y.a,
            b: &x.b + &y.b,
        }
    }

    pub fn sub(&self, x: &QScalar, y: &QScalar) -> QScalar {
        QScalar {
            a: &x.a - &y.a,
            b: &x.b - &y.b,
        }
    }

    pub fn mul(&self, x: &QScalar, y: &QScalar) -> QScalar {
        QScalar {
            a: &(&x.a * &y.a) + &(&(&x.b * &y.b) * &self.m),
            b: &(&x.a * &y.b) + &(&x.b * &y.a),
        }
    }

    pub fn inv(&self, x: &QScalar) -> QScalar {
        let norm = &(&x.a * &x.a) - &(&(&x.b * &x.b) * &self.m);
        assert!(!norm.is_zero(), "inverse of zero in quadratic extension");
        QScalar {
            a: &x.a / &norm,
            b: -&(&x.b / &norm),
        }
    }

    pub fn neg(&self, x: &QScalar) -> QScalar {
        QScalar {
            a: -&x.a,
            b: -&x.b,
        }
    }
}

/// Element `a + b sqrt(m)` of the configured quadratic extension.
#[derive(Clone, Debug, PartialEq)]
pub struct QScalar {
    pub a: Rat,
    pub b: Rat,
}

impl QScalar {
    pub fn zero() -> QScalar {
        QScalar {
            a: Rat::zero(),
            b: Rat::zero(),
        }
    }

    pub fn one() -> QScalar {
        QScalar {
            a: Rat::one(),
            b: Rat::zero(),
        }
    }

    pub fn from_rat(r: &Rat) -> QScalar {
        QScalar {
            a: r.clone(),
            b: Rat::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl fmt::Display for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}*r", self.b)
        } else {
            write!(f, "{}+{}*r", self.a, self.b)
        }
    }
}

// ---------------------------------------------------------------------------
// Slots of a Heisenberg configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum SlotGeom {
    BranchZero,
    BranchInfinity,
    Unramified { t0: Rat },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub geom: SlotGeom,
    pub twisted: bool,
    /// Highest weight of an untwisted slot in `Q(sqrt(m))`.
    pub lambda: QScalar,
}

impl Slot {
    fn mode_parity(&self) -> i32 {
        if self.twisted {
            1
        } else {
            0
        }
    }
}

/// A Heisenberg configuration realized for computation: slots in insertion
/// order, scalars in `Q(sqrt(m))`.
pub struct HeisSetup {
    pub ctx: QCtx,
    pub slots: Vec<Slot>,
    pub cfg: CoverConfig,
}

impl HeisSetup {
    pub fn from_config(cfg: &CoverConfig) -> Result<HeisSetup> {
        cfg.validate()?;
        // a single radicand class is supported per configuration
        let mut m = Rat::zero();
        for ins in &cfg.insertions {
            if let ModuleSpec::PiLambda(LambdaSpec::SqrtOf(m0)) = &ins.module {
                if m0.pow_rat(&Rat::new(1, 2)).is_some() {
                    continue; // rational square, folds away
                }
                if m.is_zero() {
                    m = m0.clone();
                } else if &m != m0 {
                    return Err(Error::InvalidConfig(format!(
                        "mixed radicands {} and {} are not supported",
                        m, m0
                    )));
                }
            }
        }
        let ctx = QCtx::new(m)?;
        let mut slots = Vec::new();
        for ins in &cfg.insertions {
            let geom = match &ins.at {
                BasePoint::Zero => SlotGeom::BranchZero,
                BasePoint::Infinity => SlotGeom::BranchInfinity,
                BasePoint::Finite(sv) => {
                    let s: Rat = sv
                        .parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad point `{}`", sv)))?;
                    let mut t0 = cfg.fiber_coordinate(&s)?;
                    if !ins.plus_point {
                        t0 = -t0;
                    }
                    SlotGeom::Unramified { t0 }
                }
            };
            let (twisted, lambda) = match &ins.module {
                ModuleSpec::PiSigma => (true, QScalar::zero()),
                ModuleSpec::PiLambda(spec) => {
                    let lam = match spec {
                        LambdaSpec::Rational(r) => QScalar::from_rat(r),
                        LambdaSpec::SqrtOf(m0) => match m0.pow_rat(&Rat::new(1, 2)) {
                            Some(root) => QScalar::from_rat(&root),
                            None => QScalar {
                                a: Rat::zero(),
                                b: Rat::one(),
                            },
                        },
                    };
                    (false, lam)
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "affine insertion {:?} in the Heisenberg engine",
                        other
                    )))
                }
            };
            slots.push(Slot {
                geom,
                twisted,
                lambda,
            });
        }
        Ok(HeisSetup {
            ctx,
            slots,
            cfg: cfg.clone(),
        })
    }

    /// Residue pairing of `f` against the weight-one form of slot `i`:
    /// the mode combination `sum_j c_j b_(j/2)` as `(half-units mode, coeff)`
    /// pairs, both fiber points included.
    pub fn pair_one_form(&self, slot: usize, f: &RationalFn, order: i64) -> Result<Vec<(i32, Rat)>> {
        let s = &self.slots[slot];
        let mut combo: BTreeMap<i32, Rat> = BTreeMap::new();
        let mut push = |j: i32, c: Rat| {
            if c.is_zero() {
                return;
            }
            let e = combo.entry(j).or_insert_with(Rat::zero);
            *e = &*e + &c;
            if e.is_zero() {
                combo.remove(&j);
            }
        };
        match &s.geom {
            SlotGeom::BranchZero | SlotGeom::BranchInfinity => {
                let exp = match &s.geom {
                    SlotGeom::BranchZero => f.expand_at_zero(order)?,
                    _ => f.expand_at_infinity(order)?,
                };
                for (j, c) in exp.iter() {
                    if j.rem_euclid(2) == 1 {
                        // Res(f w) = 2 sum_(j odd) a_j b_(j/2)
                        push(j as i32, c * &Rat::from(2));
                    }
                }
            }
            SlotGeom::Unramified { t0 } => {
                // chosen sheet: Taylor coefficients pair with the modes
                let exp = f.expand_at(t0, order)?;
                for (j, c) in exp.iter() {
                    push(2 * j as i32, c.clone());
                }
                // companion sheet: expansion of f(-t) at t0, conjugated action
                let exp = f.flip().expand_at(t0, order)?;
                for (j, c) in exp.iter() {
                    push(2 * j as i32, -c.clone());
                }
            }
        }
        Ok(combo.into_iter().collect())
    }

    /// Apply a single mode to a slot monomial; the zero mode multiplies by
    /// the slot weight.
    fn slot_apply_mode(&self, slot: usize, mono: &Monomial, half: i32) -> Vec<(Monomial, QScalar)> {
        let s = &self.slots[slot];
        debug_assert_eq!(half.rem_euclid(2), s.mode_parity());
        if half < 0 {
            let mut nm = mono.clone();
            let pos = nm.partition_point(|&x| x >= half);
            nm.insert(pos, half);
            return vec![(nm, QScalar::one())];
        }
        if half == 0 {
            if s.lambda.is_zero() {
                return Vec::new();
            }
            return vec![(mono.clone(), s.lambda.clone())];
        }
        let mut out = Vec::new();
        let index = Rat::new(half as i64, 2);
        let mut i = 0;
        while i < mono.len() {
            let v = mono[i];
            let mut j = i;
            while j < mono.len() && mono[j] == v {
                j += 1;
            }
            if v == -half {
                let mult = (j - i) as i64;
                let mut nm = Vec::with_capacity(mono.len() - 1);
                nm.extend_from_slice(&mono[..i]);
                nm.extend_from_slice(&mono[i + 1..]);
                out.push((nm, QScalar::from_rat(&(&index * &Rat::from(mult)))));
            }
            i = j;
        }
        out
    }

    /// Tensor basis of total degree exactly `d` (half-units).
    pub fn tensor_basis_of_degree(&self, d: i64) -> Vec<TensorMono> {
        fn rec(
            setup: &HeisSetup,
            slot: usize,
            remaining: i64,
            cur: &mut TensorMono,
            out: &mut Vec<TensorMono>,
        ) {
            if slot == setup.slots.len() {
                if remaining == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            let sector = if setup.slots[slot].twisted {
                crate::fock::Sector::Twisted
            } else {
                crate::fock::Sector::untwisted_zero()
            };
            for d in 0..=remaining {
                for m in monomials_of_degree(&sector, d) {
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

    pub fn tensor_basis_up_to(&self, d: i64) -> Vec<TensorMono> {
        let mut out = Vec::new();
        for deg in 0..=d {
            out.extend(self.tensor_basis_of_degree(deg));
        }
        out
    }

    /// The action of `f` on a tensor monomial: the sum over slots and fiber
    /// points of the residue modes, as an exact combination of tensor
    /// monomials.
    pub fn act(
        &self,
        combos: &[Vec<(i32, Rat)>],
        tm: &TensorMono,
    ) -> Vec<(TensorMono, QScalar)> {
        let mut acc: BTreeMap<TensorMono, QScalar> = BTreeMap::new();
        for (slot, combo) in combos.iter().enumerate() {
            for (mode, coeff) in combo {
                for (nm, c) in self.slot_apply_mode(slot, &tm[slot], *mode) {
                    let mut ntm = tm.clone();
                    ntm[slot] = nm;
                    let term = self.ctx.mul(&c, &QScalar::from_rat(coeff));
                    if term.is_zero() {
                        continue;
                    }
                    let e = acc.entry(ntm).or_insert_with(QScalar::zero);
                    *e = self.ctx.add(e, &term);
                }
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    /// Residue-pairing combinations of `f` for every slot.
    pub fn combos_for(&self, f: &RationalFn, order: i64) -> Result<Vec<Vec<(i32, Rat)>>> {
        (0..self.slots.len())
            .map(|i| self.pair_one_form(i, f, order))
            .collect()
    }
}

pub type TensorMono = Vec<Monomial>;

pub fn tensor_degree_half(tm: &TensorMono) -> i64 {
    tm.iter()
        .map(|m| crate::fock::monomial_degree_half(m))
        .sum()
}

// ---------------------------------------------------------------------------
// Exact elimination over the quadratic extension
// ---------------------------------------------------------------------------

/// Row echelon accumulator over `Q(sqrt(m))` with a fixed column order.
/// Column 0 is the most significant (highest degree); each inserted row is
/// reduced against the current pivots.
pub struct Elim {
    ctx: QCtx,
    pub ncols: usize,
    /// pivot column -> reduced row (sorted by column, leading coeff 1)
    pub pivots: BTreeMap<usize, Vec<(usize, QScalar)>>,
}

impl Elim {
    pub fn new(ctx: QCtx, ncols: usize) -> Elim {
        Elim {
            ctx,
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    /// Reduce and insert; returns the pivot column when the row was new.
    pub fn insert(&mut self, row: Vec<(usize, QScalar)>) -> Option<usize> {
        let mut row = row;
        loop {
            row.retain(|(_, c)| !c.is_zero());
            row.sort_by_key(|(j, _)| *j);
            let (lead, lc) = match row.first() {
                None => return None,
                Some((j, c)) => (*j, c.clone()),
            };
            match self.pivots.get(&lead) {
                None => {
                    let inv = self.ctx.inv(&lc);
                    let norm: Vec<(usize, QScalar)> = row
                        .iter()
                        .map(|(j, c)| (*j, self.ctx.mul(c, &inv)))
                        .collect();
                    self.pivots.insert(lead, norm);
                    return Some(lead);
                }
                Some(p) => {
                    // row -= lc * pivot
                    let mut merged: BTreeMap<usize, QScalar> = row.into_iter().collect();
                    for (j, c) in p {
                        let sub = self.ctx.mul(c, &lc);
                        let e = merged.entry(*j).or_insert_with(QScalar::zero);
                        *e = self.ctx.sub(e, &sub);
                    }
                    row = merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Back-substitute so that every pivot row vanishes on all other pivot
    /// columns.
    pub fn reduce_fully(&mut self) {
        let cols: Vec<usize> = self.pivots.keys().cloned().collect();
        for &col in cols.iter().rev() {
            let row = self.pivots[&col].clone();
            let keys: Vec<usize> = self.pivots.keys().cloned().collect();
            for k in keys {
                if k == col {
                    continue;
                }
                let target = self.pivots[&k].clone();
                let coeff = target
                    .iter()
                    .find(|(j, _)| *j == col)
                    .map(|(_, c)| c.clone());
                if let Some(c) = coeff {
                    let mut merged: BTreeMap<usize, QScalar> = target.into_iter().collect();
                    for (j, rc) in &row {
                        let sub = self.ctx.mul(rc, &c);
                        let e = merged.entry(*j).or_insert_with(QScalar::zero);
                        *e = self.ctx.sub(e, &sub);
                    }
                    let new: Vec<(usize, QScalar)> =
                        merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                    self.pivots.insert(k, new);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Coinvariant dimension tables
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimTable {
    /// `(degree, dimension)` per half-integer degree `<= cutoff`, degree
    /// rendered as an exact rational.
    pub dims: Vec<(String, usize)>,
    pub pole_bound: u32,
    pub stabilized: bool,
}

impl DimTable {
    pub fn total(&self) -> usize {
        self.dims.iter().map(|(_, d)| *d).sum()
    }
}

/// The computation behind a dimension table: the span of the kept action
/// images inside the filtered tensor space, eliminated by descending degree.
pub struct CoinvariantRun {
    pub setup: HeisSetup,
    pub columns: Vec<TensorMono>,
    pub col_index: BTreeMap<TensorMono, usize>,
    pub elim: Elim,
    pub degree_cutoff_half: i64,
}

const MEMORY_GUARD_ENTRIES: usize = 50_000_000;

pub fn coinvariant_run(cfg: &CoverConfig, pole_bound: u32) -> Result<CoinvariantRun> {
    let setup = HeisSetup::from_config(cfg)?;
    let dcut = cfg.degree_cutoff_half;
    // columns ordered by descending degree, then lex: pivots sit at the
    // highest-degree component of each generator
    let mut columns = setup.tensor_basis_up_to(dcut);
    columns.sort_by_key(|tm| (-tensor_degree_half(tm), tm.clone()));
    let col_index: BTreeMap<TensorMono, usize> = columns
        .iter()
        .enumerate()
        .map(|(i, tm)| (tm.clone(), i))
        .collect();
    let basis = setup.function_bases(pole_bound)?;
    // every nonconstant function has a pole at some marked fiber, so its
    // action has a creation component there; a source above the cutoff is
    // pushed further above it and never yields a kept generator
    let sources = setup.tensor_basis_up_to(dcut);
    let order = dcut + 2 * pole_bound as i64 + 4;
    let mut elim = Elim::new(setup.ctx.clone(), columns.len());
    let mut entries = 0usize;
    for f in &basis {
        let combos = setup.combos_for(f, order)?;
        for src in &sources {
            let img = setup.act(&combos, src);
            if img.is_empty() {
                continue;
            }
            // keep only generators entirely inside the cutoff
            if img
                .iter()
                .any(|(tm, _)| tensor_degree_half(tm) > dcut)
            {
                continue;
            }
            let row: Vec<(usize, QScalar)> = img
                .into_iter()
                .map(|(tm, c)| (col_index[&tm], c))
                .collect();
            entries += row.len();
            if entries > MEMORY_GUARD_ENTRIES {
                return Err(Error::MemoryGuard(format!(
                    "more than {} matrix entries",
                    MEMORY_GUARD_ENTRIES
                )));
            }
            elim.insert(row);
        }
    }
    Ok(CoinvariantRun {
        setup,
        columns,
        col_index,
        elim,
        degree_cutoff_half: dcut,
    })
}

impl HeisSetup {
    fn function_bases(&self, pole_bound: u32) -> Result<Vec<RationalFn>> {
        self.cfg.function_basis(Parity::Odd, pole_bound)
    }
}

impl CoinvariantRun {
    /// Dimensions of the graded pieces of the filtered quotient.
    pub fn dims(&self) -> Vec<(i64, usize)> {
        let mut per_degree: BTreeMap<i64, usize> = BTreeMap::new();
        for tm in &self.columns {
            *per_degree.entry(tensor_degree_half(tm)).or_insert(0) += 1;
        }
        let mut pivot_deg: BTreeMap<i64, usize> = BTreeMap::new();
        for col in self.elim.pivots.keys() {
            let d = tensor_degree_half(&self.columns[*col]);
            *pivot_deg.entry(d).or_insert(0) += 1;
        }
        per_degree
            .into_iter()
            .map(|(d, m)| (d, m - pivot_deg.get(&d).copied().unwrap_or(0)))
            .collect()
    }
}

/// Graded coinvariant dimensions with a stabilization probe: the table is
/// recomputed at an increased pole bound and flagged stable when unchanged.
pub fn coinvariant_dims(cfg: &CoverConfig) -> Result<DimTable> {
    let run = coinvariant_run(cfg, cfg.pole_bound)?;
    let dims = run.dims();
    let probe = coinvariant_run(cfg, cfg.pole_bound + 2)?;
    let stabilized = probe.dims() == dims;
    Ok(DimTable {
        dims: dims
            .into_iter()
            .map(|(d, n)| (Rat::new(d, 2).to_string(), n))
            .collect(),
        pole_bound: cfg.pole_bound,
        stabilized,
    })
}

/// Insert the vacuum module at an extra unramified point and compare tables.
pub fn vacuum_propagation_check(cfg: &CoverConfig, extra_s: &Rat) -> Result<(DimTable, DimTable)> {
    let base = coinvariant_dims(cfg)?;
    let mut cfg2 = cfg.clone();
    cfg2.insertions.push(Insertion {
        at: BasePoint::Finite(extra_s.to_string()),
        module: ModuleSpec::PiLambda(LambdaSpec::Rational(Rat::zero())),
        plus_point: true,
    });
    cfg2.validate()?;
    let extended = coinvariant_dims(&cfg2)?;
    Ok((base, extended))
}

// ---------------------------------------------------------------------------
// Functionals and the residue-sum property
// ---------------------------------------------------------------------------

/// A functional on the filtered tensor space, given by its values on the
/// column basis.
#[derive(Clone, Debug)]
pub struct Functional {
    pub values: Vec<QScalar>,
}

impl Functional {
    pub fn apply(&self, ctx: &QCtx, v: &[(usize, QScalar)]) -> QScalar {
        let mut acc = QScalar::zero();
        for (j, c) in v {
            acc = ctx.add(&acc, &ctx.mul(&self.values[*j], c));
        }
        acc
    }
}

impl CoinvariantRun {
    /// Dual basis of the quotient: one functional per non-pivot column,
    /// corrected along the fully reduced pivot rows so that it annihilates
    /// the image span.
    pub fn quotient_functionals(&mut self) -> Vec<Functional> {
        self.elim.reduce_fully();
        let ctx = self.setup.ctx.clone();
        let mut out = Vec::new();
        for j in 0..self.columns.len() {
            if self.elim.pivots.contains_key(&j) {
                continue;
            }
            let mut values = vec![QScalar::zero(); self.columns.len()];
            values[j] = QScalar::one();
            // phi(pivot row) = 0 forces phi(e_pivot) = -coeff at j
            for (p, row) in &self.elim.pivots {
                if let Some((_, c)) = row.iter().find(|(col, _)| *col == j) {
                    values[*p] = ctx.neg(c);
                }
            }
            out.push(Functional { values });
        }
        out
    }

    /// The raw coefficient-extraction functional of one column.
    pub fn raw_functional(&self, col: usize) -> Functional {
        let mut values = vec![QScalar::zero(); self.columns.len()];
        values[col] = QScalar::one();
        Functional { values }
    }

    /// `sum_i sum_p Res_p <phi-contracted one-form, f>` on a tensor basis
    /// vector: the per-point residue contributions contracted with `phi` and
    /// summed. Components leaving the filtered window are rejected.
    pub fn residue_sum(
        &self,
        phi: &Functional,
        f: &RationalFn,
        src: &TensorMono,
    ) -> Result<QScalar> {
        let order = self.degree_cutoff_half + 2 * self.setup.cfg.pole_bound as i64 + 4;
        let mut total = QScalar::zero();
        for slot in 0..self.setup.slots.len() {
            let combo = self.setup.pair_one_form(slot, f, order)?;
            let mut combos: Vec<Vec<(i32, Rat)>> =
                vec![Vec::new(); self.setup.slots.len()];
            combos[slot] = combo;
            let img = self.setup.act(&combos, src);
            let mut row = Vec::new();
            for (tm, c) in img {
                match self.col_index.get(&tm) {
                    Some(j) => row.push((*j, c)),
                    None => {
                        return Err(Error::InsufficientWindow(format!(
                            "action leaves the degree window at {:?}",
                            self.setup.slots[slot].geom
                        )))
                    }
                }
            }
            total = self.setup.ctx.add(&total, &phi.apply(&self.setup.ctx, &row));
        }
        Ok(total)
    }
}

/// Every even function acts as zero on every tensor state.
pub fn parity_annihilation_check(
    cfg: &CoverConfig,
    pole_bound: u32,
) -> Result<crate::field::Witness> {
    let setup = HeisSetup::from_config(cfg)?;
    let dcut = cfg.degree_cutoff_half;
    let order = dcut + 2 * pole_bound as i64 + 4;
    let even = cfg.function_basis(Parity::Even, pole_bound)?;
    for f in &even {
        let combos = setup.combos_for(f, order)?;
        for src in &setup.tensor_basis_up_to(dcut) {
            let img = setup.act(&combos, src);
            if !img.is_empty() {
                return Ok(crate::field::Witness::fail(format!(
                    "even function {} acts nontrivially",
                    f
                )));
            }
        }
    }
    Ok(crate::field::Witness::pass())
}

/// The function action is abelian: `[f., g.] = 0` on the filtered space.
pub fn abelian_action_check(cfg: &CoverConfig, pole_bound: u32) -> Result<crate::field::Witness> {
    let setup = HeisSetup::from_config(cfg)?;
    let dcut = cfg.degree_cutoff_half;
    let order = 2 * dcut + 4 * pole_bound as i64 + 8;
    let odd = cfg.function_basis(Parity::Odd, pole_bound)?;
    let apply =
        |combos: &[Vec<(i32, Rat)>], v: &BTreeMap<TensorMono, QScalar>| -> BTreeMap<TensorMono, QScalar> {
            let mut out: BTreeMap<TensorMono, QScalar> = BTreeMap::new();
            for (tm, c) in v {
                for (ntm, nc) in setup.act(combos, tm) {
                    let term = setup.ctx.mul(&nc, c);
                    let e = out.entry(ntm).or_insert_with(QScalar::zero);
                    *e = setup.ctx.add(e, &term);
                }
            }
            out.retain(|_, c| !c.is_zero());
            out
        };
    for (i, f) in odd.iter().enumerate() {
        for g in odd.iter().skip(i + 1) {
            let cf = setup.combos_for(f, order)?;
            let cg = setup.combos_for(g, order)?;
            for src in &setup.tensor_basis_up_to(dcut.min(4)) {
                let mut v0: BTreeMap<TensorMono, QScalar> = BTreeMap::new();
                v0.insert(src.clone(), QScalar::one());
                let fg = apply(&cf, &apply(&cg, &v0));
                let gf = apply(&cg, &apply(&cf, &v0));
                if fg != gf {
                    return Ok(crate::field::Witness::fail(format!(
                        "action commutator of {} and {} is nonzero on a slice",
                        f, g
                    )));
                }
            }
        }
    }
    Ok(crate::field::Witness::pass())
}
