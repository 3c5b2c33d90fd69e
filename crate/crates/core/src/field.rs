//! Vertex operators on Fock modules.
//!
//! A field coefficient is evaluated lazily and exactly: for a state `A` of
//! the boson vertex algebra, a module sector, a series exponent `e` and a
//! module vector `v`, the engine returns the exact vector `[Y(A)]_e v`.
//! Untwisted fields are Wick-ordered products of derivative fields; the
//! twisted field on `pi^sigma` is the Wick product applied to
//! `exp(Delta_z) A`, where `Delta_z` is the quadratic annihilator correction
//! with the bivariate log coefficients.
//!
//! All evaluations are memoized per (state monomial, sector, exponent, input
//! monomial); results are exact and independent of evaluation order.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::fock::{basis_up_to, monomial_degree_half, FockVector, Monomial, Sector};
use crate::rat::Rat;
use crate::series::{delta_coefficients, BivariateSeries, Bound, FracSeries};

const DELTA_TABLE_ORDER: u32 = 20;

#[derive(Hash, PartialEq, Eq, Clone)]
struct MemoKey {
    state: Monomial,
    sector: Sector,
    e_half: i64,
    input: Monomial,
}

pub struct FieldEngine {
    delta: BivariateSeries,
    memo: RefCell<HashMap<MemoKey, FockVector>>,
    expdelta: RefCell<HashMap<Monomial, Vec<(i64, FockVector)>>>,
}

impl Default for FieldEngine {
    fn default() -> Self {
        FieldEngine::new()
    }
}

impl FieldEngine {
    pub fn new() -> FieldEngine {
        FieldEngine {
            delta: delta_coefficients(DELTA_TABLE_ORDER),
            memo: RefCell::new(HashMap::new()),
            expdelta: RefCell::new(HashMap::new()),
        }
    }

    pub fn delta_table(&self) -> &BivariateSeries {
        &self.delta
    }

    /// `Delta_z` applied once: sum over `m, n >= 0`, `m + n >= 1` of
    /// `c_mn b_m b_n v z^(-m-n)`. Zero modes act by the module weight, so on
    /// the vertex algebra itself only `m, n >= 1` contribute.
    pub fn delta_once(&self, v: &FockVector) -> Result<Vec<(i64, FockVector)>> {
        let deg = v.max_degree_half() / 2 + 1;
        let mut out: BTreeMap<i64, FockVector> = BTreeMap::new();
        for m in 0..=(deg as u32) {
            for n in 0..=(deg as u32) {
                if m + n == 0 {
                    continue;
                }
                let c = self.delta.coeff(m, n);
                if c.is_zero() {
                    continue;
                }
                let w = v.apply_mode(2 * n as i32)?.apply_mode(2 * m as i32)?;
                if w.is_zero() {
                    continue;
                }
                let shift = -2 * (m as i64 + n as i64);
                out.entry(shift)
                    .or_insert_with(|| FockVector::zero(v.sector().clone()))
                    .add_scaled(&w, &c);
            }
        }
        Ok(out.into_iter().filter(|(_, w)| !w.is_zero()).collect())
    }

    /// `exp(Delta_z) v` as a finite list of `(z-shift in half-units, vector)`.
    /// Terminates because each application strictly lowers the degree.
    pub fn exp_delta(&self, v: &FockVector) -> Result<Vec<(i64, FockVector)>> {
        let mut total: BTreeMap<i64, FockVector> = BTreeMap::new();
        let mut layer: Vec<(i64, FockVector)> = vec![(0, v.clone())];
        total.insert(0, v.clone());
        let mut r: i64 = 0;
        while !layer.is_empty() {
            r += 1;
            let mut next: BTreeMap<i64, FockVector> = BTreeMap::new();
            for (s, u) in &layer {
                for (ds, w) in self.delta_once(u)? {
                    next.entry(s + ds)
                        .or_insert_with(|| FockVector::zero(v.sector().clone()))
                        .add_scaled(&w, &Rat::one());
                }
            }
            let inv_r = Rat::new(1, r);
            layer = next
                .into_iter()
                .map(|(s, w)| (s, w.scale(&inv_r)))
                .filter(|(_, w)| !w.is_zero())
                .collect();
            for (s, w) in &layer {
                total
                    .entry(*s)
                    .or_insert_with(|| FockVector::zero(v.sector().clone()))
                    .add_scaled(w, &Rat::one());
            }
        }
        Ok(total.into_iter().filter(|(_, w)| !w.is_zero()).collect())
    }

    /// Memoized per-monomial coefficient of the (twisted or untwisted) field:
    /// `[Y(state)]_{e} input` where `e` is in half-units.
    fn field_mono(
        &self,
        state: &Monomial,
        sector: &Sector,
        e_half: i64,
        input: &Monomial,
    ) -> Result<FockVector> {
        let key = MemoKey {
            state: state.clone(),
            sector: sector.clone(),
            e_half,
            input: input.clone(),
        };
        if let Some(hit) = self.memo.borrow().get(&key) {
            return Ok(hit.clone());
        }
        let result = if sector.is_twisted() {
            let pieces = {
                let cache = self.expdelta.borrow();
                cache.get(state).cloned()
            };
            let pieces = match pieces {
                Some(p) => p,
                None => {
                    let v = FockVector::from_monomial(
                        Sector::untwisted_zero(),
                        state.clone(),
                        Rat::one(),
                    );
                    let p = self.exp_delta(&v)?;
                    self.expdelta.borrow_mut().insert(state.clone(), p.clone());
                    p
                }
            };
            let mut acc = FockVector::zero(sector.clone());
            for (shift, vec) in &pieces {
                for (mono, c) in vec.terms() {
                    let w = self.w_mono(mono, sector, e_half - shift, input)?;
                    acc.add_scaled(&w, c);
                }
            }
            acc
        } else {
            self.w_mono(state, sector, e_half, input)?
        };
        self.memo.borrow_mut().insert(key, result.clone());
        Ok(result)
    }

    /// Wick-ordered product coefficient: `[W(state)]_{e} input`, with
    /// `W(b_{n_1}...b_{n_k}|0>) = prod 1/(-n_i-1)! :prod d^(-n_i-1) b(z):`.
    fn w_mono(
        &self,
        state: &Monomial,
        sector: &Sector,
        e_half: i64,
        input: &Monomial,
    ) -> Result<FockVector> {
        let state_deg = monomial_degree_half(state);
        let in_deg = monomial_degree_half(input);
        let out_deg = in_deg + state_deg + e_half;
        let mut out = FockVector::zero(sector.clone());
        if out_deg < 0 {
            return Ok(out);
        }
        // each factor mode is odd (twisted) or even (untwisted) in half-units
        let target_sum = -(e_half + state_deg);
        let k = state.len() as i64;
        let parity = sector.mode_parity() as i64;
        if (target_sum - k * parity).rem_euclid(2) != 0 {
            return Ok(out);
        }
        // groups of identical factors: derivative order j = -n - 1 for each
        // state mode n (true units)
        let mut groups: Vec<(u32, u32)> = Vec::new();
        {
            let mut i = 0;
            while i < state.len() {
                let v = state[i];
                let mut jn = i;
                while jn < state.len() && state[jn] == v {
                    jn += 1;
                }
                let j = (-(v as i64) / 2 - 1) as u32;
                groups.push((j, (jn - i) as u32));
                i = jn;
            }
        }
        // annihilator candidates: negated distinct input modes with their
        // multiplicities
        let mut ann: Vec<(i32, u32)> = Vec::new();
        {
            let mut i = 0;
            while i < input.len() {
                let v = input[i];
                let mut jn = i;
                while jn < input.len() && input[jn] == v {
                    jn += 1;
                }
                ann.push((-v, (jn - i) as u32));
                i = jn;
            }
        }
        let lambda_nonzero = match sector {
            Sector::Untwisted { lambda } => !lambda.is_zero(),
            Sector::Twisted => false,
        };
        let mut chosen: Vec<(i32, u32, u32)> = Vec::new();
        self.enumerate_modes(
            &groups,
            0,
            target_sum,
            &ann,
            lambda_nonzero,
            sector,
            input,
            &mut chosen,
            &mut out,
        )?;
        Ok(out)
    }

    /// Recursively choose, group by group, a descending multiset of modes.
    #[allow(clippy::too_many_arguments)]
    fn enumerate_modes(
        &self,
        groups: &[(u32, u32)],
        gi: usize,
        remaining_sum: i64,
        ann: &[(i32, u32)],
        lambda_nonzero: bool,
        sector: &Sector,
        input: &Monomial,
        chosen: &mut Vec<(i32, u32, u32)>,
        out: &mut FockVector,
    ) -> Result<()> {
        if gi == groups.len() {
            if remaining_sum == 0 {
                self.apply_choice(chosen, sector, input, out)?;
            }
            return Ok(());
        }
        let (j, count) = groups[gi];
        let rest: i64 = groups[gi + 1..].iter().map(|(_, c)| *c as i64).sum();
        let max_ann = ann.iter().map(|(m, _)| *m as i64).max().unwrap_or(0).max(0);
        self.pick_group_modes(
            groups,
            gi,
            j,
            count,
            i32::MAX,
            remaining_sum,
            rest,
            max_ann,
            ann,
            lambda_nonzero,
            sector,
            input,
            chosen,
            out,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn pick_group_modes(
        &self,
        groups: &[(u32, u32)],
        gi: usize,
        j: u32,
        left: u32,
        max_mode: i32,
        remaining_sum: i64,
        rest_factors: i64,
        max_ann: i64,
        ann: &[(i32, u32)],
        lambda_nonzero: bool,
        sector: &Sector,
        input: &Monomial,
        chosen: &mut Vec<(i32, u32, u32)>,
        out: &mut FockVector,
    ) -> Result<()> {
        if left == 0 {
            return self.enumerate_modes(
                groups,
                gi + 1,
                remaining_sum,
                ann,
                lambda_nonzero,
                sector,
                input,
                chosen,
                out,
            );
        }
        // every remaining factor contributes at most max_ann to the sum
        let total_left = left as i64 + rest_factors;
        if remaining_sum > total_left * max_ann {
            return Ok(());
        }
        // candidate modes for this group, all strictly below max_mode so that
        // multisets are enumerated once (descending)
        let mut candidates: Vec<(i32, u32)> = Vec::new();
        for (m, avail) in ann {
            if *m < max_mode {
                candidates.push((*m, (*avail).min(left)));
            }
        }
        if !sector.is_twisted() && lambda_nonzero && max_mode > 0 {
            candidates.push((0, left));
        }
        let parity = sector.mode_parity();
        let step = 2;
        let mut m = if parity == 1 { -1 } else { -2 };
        while m >= max_mode {
            m -= step;
        }
        // this mode must not undershoot the sum the other factors can reach
        let m_min = remaining_sum - (total_left - 1) * max_ann;
        while (m as i64) >= m_min {
            candidates.push((m, left));
            m -= step;
        }
        for (mode, avail) in candidates {
            for take in (1..=avail).rev() {
                chosen.push((mode, j, take));
                self.pick_group_modes(
                    groups,
                    gi,
                    j,
                    left - take,
                    mode,
                    remaining_sum - (mode as i64) * (take as i64),
                    rest_factors,
                    max_ann,
                    ann,
                    lambda_nonzero,
                    sector,
                    input,
                    chosen,
                    out,
                )?;
                chosen.pop();
            }
        }
        Ok(())
    }

    /// Apply one fully chosen normal-ordered monomial to the input.
    fn apply_choice(
        &self,
        chosen: &[(i32, u32, u32)],
        sector: &Sector,
        input: &Monomial,
        out: &mut FockVector,
    ) -> Result<()> {
        // weight: per mode, binom(-index - 1, j); per group, the multinomial
        // counting ordered assignments of the multiset to identical factors
        let mut coeff = Rat::one();
        let mut group_sizes: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (mode, j, take) in chosen {
            let idx = Rat::new(*mode as i64, 2);
            let w = Rat::binom(&(-&(&idx + &Rat::one())), *j as u64);
            if w.is_zero() {
                return Ok(());
            }
            coeff = &coeff * &w.pow(*take as i64);
            group_sizes.entry(*j).or_default().push(*take);
        }
        for (_, takes) in group_sizes {
            let total: u32 = takes.iter().sum();
            let mut multinom = Rat::factorial(total as u64);
            for t in takes {
                multinom = &multinom / &Rat::factorial(t as u64);
            }
            coeff = &coeff * &multinom;
        }
        // normal-ordered application: annihilators and zero modes first
        // (ascending), then creations
        let mut current = FockVector::from_monomial(sector.clone(), input.clone(), coeff);
        let mut ann_modes: Vec<(i32, u32)> = chosen
            .iter()
            .filter(|(m, _, _)| *m >= 0)
            .map(|(m, _, t)| (*m, *t))
            .collect();
        ann_modes.sort_unstable();
        for (m, t) in ann_modes {
            for _ in 0..t {
                current = current.apply_mode(m)?;
                if current.is_zero() {
                    return Ok(());
                }
            }
        }
        for (m, _, t) in chosen.iter().filter(|(m, _, _)| *m < 0) {
            for _ in 0..*t {
                current = current.apply_mode(*m)?;
            }
        }
        out.add_scaled(&current, &Rat::one());
        Ok(())
    }

    /// Coefficient of `z^(e_half/2)` of the field of `state` on the module of
    /// the given sector, applied to `v`. The state must be untwisted of
    /// weight zero (an element of the vertex algebra).
    pub fn field_coeff(
        &self,
        state: &FockVector,
        sector: &Sector,
        e_half: i64,
        v: &FockVector,
    ) -> Result<FockVector> {
        if state.sector() != &Sector::untwisted_zero() {
            return Err(Error::SectorMismatch(
                "field states must lie in the vertex algebra (untwisted, weight 0)".into(),
            ));
        }
        if !v.is_zero() && v.sector() != sector {
            return Err(Error::SectorMismatch(format!(
                "vector sector {:?} differs from module {:?}",
                v.sector(),
                sector
            )));
        }
        let mut acc = FockVector::zero(sector.clone());
        for (sm, sc) in state.terms() {
            for (vm, vc) in v.terms() {
                let w = self.field_mono(sm, sector, e_half, vm)?;
                acc.add_scaled(&w, &(sc * vc));
            }
        }
        Ok(acc)
    }

    /// Plain Wick-ordered field (no `exp(Delta_z)` correction): the operator
    /// `W(state, z)` on the twisted module, or the untwisted field itself.
    pub fn w_coeff(
        &self,
        state: &FockVector,
        sector: &Sector,
        e_half: i64,
        v: &FockVector,
    ) -> Result<FockVector> {
        let mut acc = FockVector::zero(sector.clone());
        for (sm, sc) in state.terms() {
            if sm.iter().any(|&m| m >= 0) {
                return Err(Error::SectorMismatch(
                    "Wick products are defined for states with negative modes only".into(),
                ));
            }
            for (vm, vc) in v.terms() {
                let w = self.w_mono(sm, sector, e_half, vm)?;
                acc.add_scaled(&w, &(sc * vc));
            }
        }
        Ok(acc)
    }

    /// Mode operator `A_(n) v`: the coefficient of `z^(-n-1)`, `n` in
    /// half-units.
    pub fn mode_apply(
        &self,
        state: &FockVector,
        sector: &Sector,
        n_half: i64,
        v: &FockVector,
    ) -> Result<FockVector> {
        self.field_coeff(state, sector, -n_half - 2, v)
    }

    /// Conformal vector `omega = 1/2 b_{-1}^2 |0>`.
    pub fn omega() -> FockVector {
        FockVector::from_monomial(Sector::untwisted_zero(), vec![-2, -2], Rat::new(1, 2))
    }

    /// Virasoro mode `L_k` on the module of `v`: coefficient of `z^(-k-2)` of
    /// the field of `omega`. `k` in true (integer) units.
    pub fn virasoro(&self, k: i64, v: &FockVector) -> Result<FockVector> {
        self.field_coeff(&Self::omega(), v.sector(), -2 * k - 4, v)
    }

    /// Translation `T = L_{-1}` inside the vertex algebra.
    pub fn translate(&self, a: &FockVector) -> Result<FockVector> {
        self.virasoro(-1, a)
    }

    /// `S_sigma` on `pi^sigma`: `(-1)^(2 (L_0 - 1/16))`, the sign of the mode
    /// count. Its own inverse.
    pub fn s_sigma(v: &FockVector) -> FockVector {
        v.sigma_image()
    }
}

// ---------------------------------------------------------------------------
// Materialized operator-valued series over an explicit basis slice
// ---------------------------------------------------------------------------

/// A linear operator recorded by its images on an explicit set of monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceOp {
    pub images: BTreeMap<Monomial, FockVector>,
}

/// Operator-valued series: exponent (half-units) to operator slice.
#[derive(Clone, Debug)]
pub struct FieldSlice {
    pub window: (i64, i64),
    pub coeffs: BTreeMap<i64, SliceOp>,
}

impl FieldSlice {
    /// Materialize the field of `state` over all basis monomials of degree
    /// `<= domain_deg` (half-units) and exponents within `window`.
    pub fn materialize(
        engine: &FieldEngine,
        state: &FockVector,
        sector: &Sector,
        window: (i64, i64),
        domain_deg: i64,
    ) -> Result<FieldSlice> {
        let mut coeffs = BTreeMap::new();
        for e in window.0..=window.1 {
            let mut images = BTreeMap::new();
            for m in basis_up_to(sector, domain_deg) {
                let v = FockVector::from_monomial(sector.clone(), m.clone(), Rat::one());
                let w = engine.field_coeff(state, sector, e, &v)?;
                if !w.is_zero() {
                    images.insert(m, w);
                }
            }
            if !images.is_empty() {
                coeffs.insert(e, SliceOp { images });
            }
        }
        Ok(FieldSlice { window, coeffs })
    }

    /// Grading law: the coefficient at exponent `e` maps degree `d` to degree
    /// `d + Delta + e` (half-units), the graded form of `(Delta-k-1) B_(k)`.
    pub fn grading_ok(&self, state_deg_half: i64) -> bool {
        for (e, op) in &self.coeffs {
            for (m, img) in &op.images {
                let d = monomial_degree_half(m);
                if let Some(od) = img.homogeneous_degree_half() {
                    if od != d + state_deg_half + e {
                        return false;
                    }
                } else if !img.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Outcome of an identity check, with the first discrepancy when it fails.
#[derive(Clone, Debug)]
pub struct Witness {
    pub ok: bool,
    pub detail: Option<String>,
}

impl Witness {
    pub fn pass() -> Witness {
        Witness {
            ok: true,
            detail: None,
        }
    }

    pub fn fail(detail: String) -> Witness {
        Witness {
            ok: false,
            detail: Some(detail),
        }
    }
}

/// Commutator formula `[A_(m), B_(k)] = sum_{n>=0} C(m,n) (A_(n) B)_(m+k-n)`
/// evaluated on every basis monomial of degree `<= slice_deg` (half-units).
/// Mode indices `m`, `k` in half-units.
pub fn commutator_check(
    engine: &FieldEngine,
    a: &FockVector,
    b: &FockVector,
    m_half: i64,
    k_half: i64,
    sector: &Sector,
    slice_deg: i64,
) -> Result<Witness> {
    let alg = Sector::untwisted_zero();
    let deg_a = a.max_degree_half();
    let deg_b = b.max_degree_half();
    let n_cap = (deg_a + deg_b) / 2;
    let m_rat = Rat::new(m_half, 2);
    for mono in basis_up_to(sector, slice_deg) {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        let bkv = engine.mode_apply(b, sector, k_half, &v)?;
        let amv = engine.mode_apply(a, sector, m_half, &v)?;
        let mut lhs = engine.mode_apply(a, sector, m_half, &bkv)?;
        lhs.add_scaled(&engine.mode_apply(b, sector, k_half, &amv)?, &Rat::from(-1));
        let mut rhs = FockVector::zero(sector.clone());
        for n in 0..=n_cap {
            let anb = engine.mode_apply(a, &alg, 2 * n, b)?;
            if anb.is_zero() {
                continue;
            }
            let c = Rat::binom(&m_rat, n as u64);
            if c.is_zero() {
                continue;
            }
            let w = engine.mode_apply(&anb, sector, m_half + k_half - 2 * n, &v)?;
            rhs.add_scaled(&w, &c);
        }
        if lhs != rhs {
            return Ok(Witness::fail(format!(
                "commutator mismatch at m={}, k={}, v={}: lhs={}, rhs={}",
                Rat::new(m_half, 2),
                Rat::new(k_half, 2),
                crate::fock::format_monomial(sector, &mono),
                lhs,
                rhs
            )));
        }
    }
    Ok(Witness::pass())
}

/// Translation lemma `Y(T A) = d/dz Y(A)`, checked coefficientwise on a slice.
pub fn ta_lemma_check(
    engine: &FieldEngine,
    a: &FockVector,
    sector: &Sector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    let ta = engine.translate(a)?;
    for mono in basis_up_to(sector, slice_deg) {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        for e in window.0..=window.1 {
            let lhs = engine.field_coeff(&ta, sector, e, &v)?;
            let hi = engine.field_coeff(a, sector, e + 2, &v)?;
            let rhs = hi.scale(&Rat::new(e + 2, 2));
            if lhs != rhs {
                return Ok(Witness::fail(format!(
                    "translation lemma fails at e={} on {}",
                    Rat::new(e, 2),
                    crate::fock::format_monomial(sector, &mono)
                )));
            }
        }
    }
    Ok(Witness::pass())
}

/// Mode support: for `sigma(A) = (-1)^p A`, every nonzero twisted mode index
/// lies in `p/2 + Z`: field coefficients at the wrong coset vanish.
pub fn mode_support_check(
    engine: &FieldEngine,
    a: &FockVector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    let sector = Sector::Twisted;
    let p = match a.sigma_parity() {
        Some(p) => p,
        None => return Ok(Witness::fail("state is not a sigma eigenvector".into())),
    };
    for mono in basis_up_to(&sector, slice_deg) {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        for e in window.0..=window.1 {
            let n_half = -e - 2;
            if n_half.rem_euclid(2) == (p as i64).rem_euclid(2) {
                continue; // admissible coset
            }
            let w = engine.field_coeff(a, &sector, e, &v)?;
            if !w.is_zero() {
                return Ok(Witness::fail(format!(
                    "unexpected mode at n={} for parity {}",
                    Rat::new(n_half, 2),
                    p
                )));
            }
        }
    }
    Ok(Witness::pass())
}

/// Equivariance under the involution:
/// `S_sigma^{-1} Y(sigma A) S_sigma = Y(A)` on a basis slice.
pub fn sigma_conjugation_check(
    engine: &FieldEngine,
    a: &FockVector,
    slice_deg: i64,
    window: (i64, i64),
) -> Result<Witness> {
    let sector = Sector::Twisted;
    let sa = a.sigma_image();
    for mono in basis_up_to(&sector, slice_deg) {
        let v = FockVector::from_monomial(sector.clone(), mono.clone(), Rat::one());
        let sv = FieldEngine::s_sigma(&v);
        for e in window.0..=window.1 {
            let mid = engine.field_coeff(&sa, &sector, e, &sv)?;
            let lhs = FieldEngine::s_sigma(&mid);
            let rhs = engine.field_coeff(a, &sector, e, &v)?;
            if lhs != rhs {
                return Ok(Witness::fail(format!(
                    "sigma conjugation fails at e={} on {}",
                    Rat::new(e, 2),
                    crate::fock::format_monomial(&sector, &mono)
                )));
            }
        }
    }
    Ok(Witness::pass())
}

/// `exp(Delta_z) v` as a series in `z` with vector coefficients, truncated to
/// the window.
pub fn delta_operator(
    engine: &FieldEngine,
    v: &FockVector,
    window: (Bound, Bound),
) -> Result<FracSeries<FockVector>> {
    let mut out: FracSeries<FockVector> = FracSeries::with_window(2, window.0, window.1);
    for (shift, vec) in engine.exp_delta(v)? {
        out.add_to(shift, &vec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::parse_fock;

    fn tw() -> Sector {
        Sector::Twisted
    }

    fn alg() -> Sector {
        Sector::untwisted_zero()
    }

    #[test]
    fn identity_field() {
        let engine = FieldEngine::new();
        let vac = FockVector::vacuum(alg());
        let v = parse_fock("b(-3/2)|0;tw>").unwrap();
        assert_eq!(engine.field_coeff(&vac, &tw(), 0, &v).unwrap(), v);
        for e in [-4i64, -2, -1, 1, 2, 3] {
            assert!(engine.field_coeff(&vac, &tw(), e, &v).unwrap().is_zero());
        }
    }

    #[test]
    fn generator_field_is_mode_series() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let vac_tw = FockVector::vacuum(tw());
        let w = engine.field_coeff(&b, &tw(), -1, &vac_tw).unwrap();
        assert_eq!(w, parse_fock("b(-1/2)|0;tw>").unwrap());
        // creation-state recovery in the untwisted module
        let vac = FockVector::vacuum(alg());
        let w = engine.field_coeff(&b, &alg(), 0, &vac).unwrap();
        assert_eq!(w, b);
    }

    #[test]
    fn exp_delta_examples() {
        let engine = FieldEngine::new();
        let vac = FockVector::vacuum(alg());
        assert_eq!(engine.exp_delta(&vac).unwrap(), vec![(0, vac.clone())]);
        let b = parse_fock("b(-1)|0>").unwrap();
        assert_eq!(engine.exp_delta(&b).unwrap(), vec![(0, b.clone())]);
        // the conformal vector picks up the 1/16 anomaly
        let omega = FieldEngine::omega();
        let pieces = engine.exp_delta(&omega).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].0, -4);
        assert_eq!(
            pieces[0].1,
            FockVector::vacuum(alg()).scale(&Rat::new(1, 16))
        );
        assert_eq!(pieces[1], (0, omega));
    }

    #[test]
    fn twisted_vacuum_weight() {
        let engine = FieldEngine::new();
        let vac = FockVector::vacuum(tw());
        let w = engine.virasoro(0, &vac).unwrap();
        assert_eq!(w, vac.scale(&Rat::new(1, 16)));
    }

    #[test]
    fn untwisted_weights() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        assert_eq!(engine.virasoro(0, &b).unwrap(), b);
        let hw = parse_fock("|lam=3>").unwrap();
        assert_eq!(engine.virasoro(0, &hw).unwrap(), hw.scale(&Rat::new(9, 2)));
        let b2 = parse_fock("b(-2)|0>").unwrap();
        assert_eq!(engine.translate(&b).unwrap(), b2);
    }

    #[test]
    fn w_normal_ordering_on_vacuum() {
        let engine = FieldEngine::new();
        // W(b_{-1}^2|0>, z) |0;tw> at z^(-1): only the double creation
        // b_{-1/2}^2 survives normal ordering
        let st = parse_fock("b(-1)^2|0>").unwrap();
        let vac = FockVector::vacuum(tw());
        let w = engine.w_coeff(&st, &tw(), -2, &vac).unwrap();
        assert_eq!(w, parse_fock("b(-1/2)^2|0;tw>").unwrap());
        assert!(w.coeff(&vec![]).is_zero());
    }

    #[test]
    fn twisted_l0_on_excited() {
        let engine = FieldEngine::new();
        let v = parse_fock("b(-1/2)|0;tw>").unwrap();
        let w = engine.virasoro(0, &v).unwrap();
        assert_eq!(w, v.scale(&Rat::new(9, 16))); // 1/16 + 1/2
    }

    #[test]
    fn commutator_generators() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let w = commutator_check(&engine, &b, &b, 1, -1, &tw(), 6).unwrap();
        assert!(w.ok, "{:?}", w.detail);
        let vac = FockVector::vacuum(alg());
        let w = commutator_check(&engine, &vac, &b, 0, 1, &tw(), 4).unwrap();
        assert!(w.ok);
    }

    #[test]
    fn commutator_l0_grading() {
        let engine = FieldEngine::new();
        let omega = FieldEngine::omega();
        let b = parse_fock("b(-1)|0>").unwrap();
        // m = 1 so A_(m) = L_0; [L_0, B_(k)] = (Delta - k - 1) B_(k)
        let w = commutator_check(&engine, &omega, &b, 2, -3, &tw(), 5).unwrap();
        assert!(w.ok, "{:?}", w.detail);
    }

    #[test]
    fn ta_lemma_small() {
        let engine = FieldEngine::new();
        for s in ["b(-1)|0>", "b(-1)^2|0>", "b(-2)|0>"] {
            let a = parse_fock(s).unwrap();
            let w = ta_lemma_check(&engine, &a, &tw(), 4, (-6, 4)).unwrap();
            assert!(w.ok, "{} : {:?}", s, w.detail);
        }
    }

    #[test]
    fn mode_support_small() {
        let engine = FieldEngine::new();
        for s in ["b(-1)|0>", "b(-1)^2|0>", "b(-3)|0>", "b(-1)^3|0>"] {
            let a = parse_fock(s).unwrap();
            let w = mode_support_check(&engine, &a, 4, (-7, 5)).unwrap();
            assert!(w.ok, "{} : {:?}", s, w.detail);
        }
    }

    #[test]
    fn sigma_conjugation_small() {
        let engine = FieldEngine::new();
        for s in ["b(-1)|0>", "b(-2)|0>", "b(-1)^2|0>"] {
            let a = parse_fock(s).unwrap();
            let w = sigma_conjugation_check(&engine, &a, 4, (-6, 4)).unwrap();
            assert!(w.ok, "{} : {:?}", s, w.detail);
        }
    }

    #[test]
    fn grading_invariant_slice() {
        let engine = FieldEngine::new();
        let b = parse_fock("b(-1)|0>").unwrap();
        let fs = FieldSlice::materialize(&engine, &b, &tw(), (-5, 5), 5).unwrap();
        assert!(fs.grading_ok(2));
        let fs =
            FieldSlice::materialize(&engine, &FieldEngine::omega(), &tw(), (-6, 2), 4).unwrap();
        assert!(fs.grading_ok(4));
    }
}
