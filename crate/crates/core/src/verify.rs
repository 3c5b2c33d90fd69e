//! Named verification suites with machine-readable reports.
//!
//! Each suite drives one family of identity checks over caller-supplied
//! cutoffs and returns per-check witnesses. The CLI serializes reports as
//! JSON and encodes the outcome in its exit status, so CI can gate on the
//! identities directly.

use serde::Serialize;

use crate::coords::{
    group_transform_check, infinitesimal_transform_check, primary_transform_check, CoordChange,
    DerElement, ModuleAction,
};
use crate::error::{Error, Result};
use crate::field::{commutator_check, ta_lemma_check, FieldEngine, Witness};
use crate::fock::{basis_up_to, FockVector, Sector};
use crate::orbit::{
    intertwiner_laws_check, involution_consistency_check, section_independence_check, FiberShape,
    OrbitModule,
};
use crate::rat::Rat;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<CheckReport>,
    pub ok: bool,
}

impl SuiteReport {
    fn new(suite: &str, params: serde_json::Value) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            params,
            checks: Vec::new(),
            ok: true,
        }
    }

    fn push(&mut self, name: String, w: Witness) {
        self.ok &= w.ok;
        self.checks.push(CheckReport {
            name,
            ok: w.ok,
            witness: w.detail,
        });
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Degree bound for states, in true units.
    pub deg: i64,
    /// Bound on twisted mode indices.
    pub modes: Rat,
    /// Truncation order of coordinate changes (top claimed `z`-exponent).
    pub order: i64,
    /// Degree bound of the evaluation slice, true units.
    pub slice: i64,
    /// Pole bound for function bases.
    pub pole_bound: u32,
    /// Coefficients of the coordinate change used by the transform suites,
    /// listed by ascending exponent in `1/2 + Z`.
    pub rho: Vec<Rat>,
}

impl Default for SuiteOptions {
    fn default() -> SuiteOptions {
        SuiteOptions {
            deg: 4,
            modes: Rat::new(7, 2),
            order: 6,
            slice: 4,
            pole_bound: 7,
            rho: vec![Rat::one(), Rat::one(), Rat::new(-1, 2), Rat::new(1, 3)],
        }
    }
}

impl SuiteOptions {
    fn params(&self) -> serde_json::Value {
        serde_json::json!({
            "deg": self.deg,
            "modes": self.modes.to_string(),
            "order": self.order,
            "slice": self.slice,
            "pole_bound": self.pole_bound,
            "rho": self.rho.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    /// The coordinate change of the transform suites: coefficients on the
    /// exponents `1/2, 3/2, ...`, claimed through `z`-order `order`.
    pub fn rho_change(&self) -> Result<CoordChange> {
        let terms: Vec<(i64, Rat)> = self
            .rho
            .iter()
            .enumerate()
            .map(|(i, c)| (1 + 2 * i as i64, c.clone()))
            .collect();
        CoordChange::new(2, &terms, 2 * self.order + 1)
    }
}

/// States of the vertex algebra up to a degree, as basis monomials.
pub fn algebra_states(deg: i64) -> Vec<FockVector> {
    basis_up_to(&Sector::untwisted_zero(), 2 * deg)
        .into_iter()
        .map(|m| FockVector::from_monomial(Sector::untwisted_zero(), m, Rat::one()))
        .collect()
}

/// Retry an exponent-window check, lowering the top until the truncated data
/// certifies it. Errors out when the window empties.
pub fn shrink_window<F>(lo: i64, hi0: i64, mut f: F) -> Result<(Witness, (i64, i64))>
where
    F: FnMut((i64, i64)) -> Result<Witness>,
{
    let mut hi = hi0;
    loop {
        if hi < lo {
            return Err(Error::InsufficientWindow(
                "no certifiable window for the given truncation".into(),
            ));
        }
        match f((lo, hi)) {
            Err(Error::InsufficientWindow(_)) => hi -= 1,
            other => return other.map(|w| (w, (lo, hi))),
        }
    }
}

pub fn commutator_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("commutator", opts.params());
    let states = algebra_states(opts.deg);
    let sector = Sector::Twisted;
    let mode_cap = (&opts.modes * &Rat::from(2))
        .to_i64()
        .ok_or_else(|| Error::Parse("mode bound must be a half-integer".into()))?;
    let slice = 2 * opts.slice;
    for a in &states {
        let pa = a.sigma_parity().unwrap_or(0) as i64;
        let mut worst = Witness::pass();
        'scan: for b in &states {
            let pb = b.sigma_parity().unwrap_or(0) as i64;
            for m in -mode_cap..=mode_cap {
                if m.rem_euclid(2) != pa.rem_euclid(2) {
                    continue;
                }
                for k in -mode_cap..=mode_cap {
                    if k.rem_euclid(2) != pb.rem_euclid(2) {
                        continue;
                    }
                    let w = commutator_check(engine, a, b, m, k, &sector, slice)?;
                    if !w.ok {
                        worst = w;
                        break 'scan;
                    }
                }
            }
        }
        report.push(format!("commutator[A={}]", a), worst);
    }
    Ok(report)
}

pub fn ta_lemma_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("ta-lemma", opts.params());
    for a in algebra_states(opts.deg) {
        let w = ta_lemma_check(engine, &a, &Sector::Twisted, 2 * opts.slice, (-9, 7))?;
        report.push(format!("ta[A={}]", a), w);
    }
    Ok(report)
}

pub fn infinitesimal_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("infinitesimal", opts.params());
    for k in 0..=3u32 {
        let d = DerElement::new(2, &[(k, Rat::one())]);
        for a in algebra_states(opts.deg.min(3)) {
            let w = infinitesimal_transform_check(
                engine,
                &d,
                &a,
                2 * opts.slice.min(3),
                (-12, 12),
            )?;
            report.push(format!("infinitesimal[k={},A={}]", k, a), w);
        }
    }
    Ok(report)
}

/// The group transformation law, the exponential consistency of the module
/// action, and the central flip, for the configured coordinate change.
pub fn transform_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("transform", opts.params());
    let rho = opts.rho_change()?;
    if !rho.is_unipotent() {
        return Err(Error::NotUnipotent);
    }
    let states = [
        FockVector::vacuum(Sector::untwisted_zero()),
        crate::fock::parse_fock("b(-1)|0>").unwrap(),
        FieldEngine::omega(),
    ];
    for a in &states {
        let slice = 2 * opts.slice.min(2);
        let (w, window) = shrink_window(-9, 5, |win| {
            group_transform_check(engine, &rho, a, slice, win)
        })?;
        report.push(
            format!(
                "transform[A={},window=[{},{}]]",
                a,
                Rat::new(window.0, 2),
                Rat::new(window.1, 2)
            ),
            w,
        );
    }
    // one-parameter consistency: R(exp d) = R(exp d/2)^2 on a slice
    let d = DerElement::new(2, &[(1, Rat::one()), (2, Rat::new(-1, 2))]);
    let full = d.exp_coordinate(2 * opts.order + 1)?;
    let half = DerElement::new(2, &[(1, Rat::new(1, 2)), (2, Rat::new(-1, 4))])
        .exp_coordinate(2 * opts.order + 1)?;
    let act_full = ModuleAction::from_coord_change(&full, &Sector::Twisted)?;
    let act_half = ModuleAction::from_coord_change(&half, &Sector::Twisted)?;
    let mut w = Witness::pass();
    for mono in basis_up_to(&Sector::Twisted, 2 * opts.slice.min(3)) {
        let v = FockVector::from_monomial(Sector::Twisted, mono, Rat::one());
        let lhs = act_full.apply(engine, &v)?;
        let rhs = act_half.apply(engine, &act_half.apply(engine, &v)?)?;
        if lhs != rhs {
            w = Witness::fail(format!("exp consistency fails on {}", v));
            break;
        }
    }
    report.push("exp-consistency".into(), w);
    // the central flip realizes the parity conjugation
    let eps = CoordChange::central(2, &Rat::from(-1), 2 * opts.order + 1)?;
    let act = ModuleAction::from_coord_change(&eps, &Sector::Twisted)?;
    let mut w = Witness::pass();
    for mono in basis_up_to(&Sector::Twisted, 2 * opts.slice.min(3)) {
        let v = FockVector::from_monomial(Sector::Twisted, mono, Rat::one());
        if act.apply(engine, &v)? != FieldEngine::s_sigma(&v) {
            w = Witness::fail(format!("central flip differs from parity on {}", v));
            break;
        }
    }
    report.push("central-flip".into(), w);
    Ok(report)
}

pub fn primary_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("primary", opts.params());
    let rho = opts.rho_change()?;
    let b = crate::fock::parse_fock("b(-1)|0>").unwrap();
    let slice = 2 * opts.slice.min(2);
    let (w, window) = shrink_window(-9, 5, |win| {
        primary_transform_check(engine, &rho, &b, slice, win)
    })?;
    report.push(
        format!(
            "primary[A={},window=[{},{}]]",
            b,
            Rat::new(window.0, 2),
            Rat::new(window.1, 2)
        ),
        w,
    );
    // non-primary states are rejected
    let rejected = matches!(
        primary_transform_check(engine, &rho, &FieldEngine::omega(), slice, (-4, -2)),
        Err(Error::NotPrimary(_))
    );
    report.push(
        "primary-rejects-omega".into(),
        if rejected {
            Witness::pass()
        } else {
            Witness::fail("conformal vector accepted as primary".into())
        },
    );
    Ok(report)
}

pub fn orbit_suite(engine: &FieldEngine, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("orbit", opts.params());
    let slice = 2 * opts.slice.min(2);
    let ram = OrbitModule::build(FiberShape::Ramified, Sector::Twisted)?;
    report.push(
        "intertwiner-laws[ramified]".into(),
        intertwiner_laws_check(engine, &ram, slice, (-4, 3))?,
    );
    let unram = OrbitModule::build(
        FiberShape::Unramified { chosen_plus: true },
        Sector::Untwisted { lambda: Rat::from(1) },
    )?;
    report.push(
        "intertwiner-laws[unramified]".into(),
        intertwiner_laws_check(engine, &unram, slice, (-4, 3))?,
    );
    report.push(
        "involution-consistency".into(),
        involution_consistency_check(engine, &Rat::from(1), slice, (-3, 3))?,
    );
    let rho = opts.rho_change()?;
    let b = crate::fock::parse_fock("b(-1)|0>").unwrap();
    let (w, _) = shrink_window(-7, 3, |win| {
        section_independence_check(engine, &ram, &rho, &b, slice, win)
    })?;
    report.push("section-independence[ramified]".into(), w);
    let unram0 = OrbitModule::build(
        FiberShape::Unramified { chosen_plus: true },
        Sector::untwisted_zero(),
    )?;
    let id1 = CoordChange::identity(1, opts.order);
    report.push(
        "section-independence[unramified]".into(),
        section_independence_check(engine, &unram0, &id1, &b, slice, (-4, 3))?,
    );
    Ok(report)
}

pub fn parity_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("parity", opts.params());
    let two = crate::cover::parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],
            "degree_cutoff":2,"pole_bound":7}"#,
    )?;
    report.push(
        "even-acts-as-zero[two-twisted]".into(),
        crate::blocks::parity_annihilation_check(&two, opts.pole_bound)?,
    );
    let three = crate::cover::parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"},
            {"s":"1","module":{"pi_lambda":"0"},"point":"+"}],
            "degree_cutoff":2,"pole_bound":7}"#,
    )?;
    report.push(
        "even-acts-as-zero[with-vacuum-point]".into(),
        crate::blocks::parity_annihilation_check(&three, opts.pole_bound)?,
    );
    report.push(
        "abelian-action".into(),
        crate::blocks::abelian_action_check(&two, opts.pole_bound.min(4))?,
    );
    Ok(report)
}

pub const SUITES: [&str; 6] = [
    "commutator",
    "ta-lemma",
    "transform",
    "primary",
    "orbit",
    "parity",
];

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let engine = FieldEngine::new();
    match name {
        "commutator" => commutator_suite(&engine, opts),
        "ta-lemma" => ta_lemma_suite(&engine, opts),
        "transform" => transform_suite(&engine, opts),
        "primary" => primary_suite(&engine, opts),
        "orbit" => orbit_suite(&engine, opts),
        "parity" => parity_suite(opts),
        other => Err(Error::InvalidConfig(format!(
            "unknown suite `{}`; expected one of {:?}",
            other, SUITES
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let opts = SuiteOptions {
            deg: 2,
            modes: Rat::new(3, 2),
            order: 5,
            slice: 2,
            pole_bound: 4,
            ..SuiteOptions::default()
        };
        for suite in ["ta-lemma", "primary", "orbit", "parity"] {
            let report = run_suite(suite, &opts).unwrap();
            assert!(report.ok, "{}: {:?}", suite, report.checks);
        }
    }

    #[test]
    fn unknown_suite_rejected() {
        assert!(run_suite("nope", &SuiteOptions::default()).is_err());
    }
}
