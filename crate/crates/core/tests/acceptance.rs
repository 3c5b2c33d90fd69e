//! Acceptance suite: one test per criterion, exact arithmetic throughout,
//! each printing a pass/fail line (run with `--nocapture` to see them all).

use std::collections::BTreeMap;
use std::time::Instant;

use orbifock::affine::{
    affine_coinvariant_dims, affine_vacuum_propagation, g_out_closure_check, jacobi_check,
    sugawara_grading_check, AffAlgebra,
};
use orbifock::blocks::{
    coinvariant_dims, coinvariant_run, parity_annihilation_check, vacuum_propagation_check,
};
use orbifock::coords::{
    group_transform_check, infinitesimal_transform_check, primary_transform_check, CoordChange,
    DerElement,
};
use orbifock::cover::{parse_config, Parity};
use orbifock::field::{
    commutator_check, mode_support_check, sigma_conjugation_check, ta_lemma_check, FieldEngine,
};
use orbifock::fock::{parse_fock, FockVector, Sector};
use orbifock::rat::Rat;
use orbifock::series::delta_coefficients;
use orbifock::verify::{algebra_states, shrink_window};

fn conclude(n: u32, what: &str, ok: bool, t: Instant) {
    println!(
        "criterion {:>2} {}: {} ({:?})",
        n,
        if ok { "PASS" } else { "FAIL" },
        what,
        t.elapsed()
    );
    assert!(ok, "criterion {} failed: {}", n, what);
}

// ---------------------------------------------------------------------------
// Criterion 1: an independent symbolic-differentiation oracle for the
// bivariate log expansion. Work in the variables a = sqrt(1+x),
// b = sqrt(1+y): mixed partials of -log((a+b)/2) are rational functions of
// (a, b), with d/dx = (1/2a) d/da and d/dy = (1/2b) d/db; Taylor coefficients
// come from evaluation at a = b = 1.
// ---------------------------------------------------------------------------

type BPoly = BTreeMap<(u32, u32), Rat>;

fn bp_zero() -> BPoly {
    BTreeMap::new()
}

fn bp_term(i: u32, j: u32, c: Rat) -> BPoly {
    let mut p = bp_zero();
    if !c.is_zero() {
        p.insert((i, j), c);
    }
    p
}

fn bp_add(x: &BPoly, y: &BPoly) -> BPoly {
    let mut out = x.clone();
    for (k, c) in y {
        let e = out.entry(*k).or_insert_with(Rat::zero);
        *e = &*e + c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn bp_mul(x: &BPoly, y: &BPoly) -> BPoly {
    let mut out = bp_zero();
    for ((i1, j1), c1) in x {
        for ((i2, j2), c2) in y {
            let k = (i1 + i2, j1 + j2);
            let e = out.entry(k).or_insert_with(Rat::zero);
            *e = &*e + &(c1 * c2);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn bp_scale(x: &BPoly, r: &Rat) -> BPoly {
    let mut out = bp_zero();
    for (k, c) in x {
        let v = c * r;
        if !v.is_zero() {
            out.insert(*k, v);
        }
    }
    out
}

fn bp_d(x: &BPoly, in_a: bool) -> BPoly {
    let mut out = bp_zero();
    for ((i, j), c) in x {
        if in_a && *i > 0 {
            out.insert((i - 1, *j), c * &Rat::from(*i as i64));
        }
        if !in_a && *j > 0 {
            out.insert((*i, j - 1), c * &Rat::from(*j as i64));
        }
    }
    out
}

fn bp_eval_one(x: &BPoly) -> Rat {
    let mut acc = Rat::zero();
    for (_, c) in x {
        acc = &acc + c;
    }
    acc
}

#[derive(Clone)]
struct BFrac {
    num: BPoly,
    den: BPoly,
}

impl BFrac {
    /// d/dx (in_a) or d/dy: chain rule through a = sqrt(1+x) plus quotient
    /// rule, with the extra 1/(2a) (resp. 1/(2b)) absorbed by multiplying the
    /// denominator by 2a (resp. 2b).
    fn derive(&self, in_a: bool) -> BFrac {
        let dn = bp_d(&self.num, in_a);
        let dd = bp_d(&self.den, in_a);
        let num = bp_add(
            &bp_mul(&dn, &self.den),
            &bp_scale(&bp_mul(&self.num, &dd), &Rat::from(-1)),
        );
        let mut den = bp_mul(&self.den, &self.den);
        let var = if in_a {
            bp_term(1, 0, Rat::from(2))
        } else {
            bp_term(0, 1, Rat::from(2))
        };
        den = bp_mul(&den, &var);
        BFrac { num, den }
    }

    fn eval_one(&self) -> Rat {
        let d = bp_eval_one(&self.den);
        assert!(!d.is_zero());
        &bp_eval_one(&self.num) / &d
    }
}

/// Oracle value of the coefficient `c_mn`, `(m, n) != (0, 0)`.
fn delta_oracle(m: u32, n: u32) -> Rat {
    // start from d f / dx = -1/(2 a (a + b)) when m >= 1, else from
    // d f / dy = -1/(2 b (a + b))
    let aplusb = bp_add(&bp_term(1, 0, Rat::one()), &bp_term(0, 1, Rat::one()));
    let (mut f, mut dm, mut dn) = if m >= 1 {
        (
            BFrac {
                num: bp_term(0, 0, -Rat::one()),
                den: bp_mul(&bp_term(1, 0, Rat::from(2)), &aplusb),
            },
            m - 1,
            n,
        )
    } else {
        (
            BFrac {
                num: bp_term(0, 0, -Rat::one()),
                den: bp_mul(&bp_term(0, 1, Rat::from(2)), &aplusb),
            },
            0,
            n - 1,
        )
    };
    while dm > 0 {
        f = f.derive(true);
        dm -= 1;
    }
    while dn > 0 {
        f = f.derive(false);
        dn -= 1;
    }
    let mut fact = Rat::one();
    for i in 1..=m as i64 {
        fact = &fact * &Rat::from(i);
    }
    for j in 1..=n as i64 {
        fact = &fact * &Rat::from(j);
    }
    &f.eval_one() / &fact
}

#[test]
fn criterion_01_delta_coefficients() {
    let t = Instant::now();
    let table = delta_coefficients(8);
    let mut ok = table.coeff(0, 0) == Rat::zero();
    ok &= table.coeff(1, 0) == Rat::new(-1, 4);
    ok &= table.coeff(0, 1) == Rat::new(-1, 4);
    ok &= table.coeff(1, 1) == Rat::new(1, 16);
    for m in 0..=8u32 {
        for n in 0..=(8 - m) {
            ok &= table.coeff(m, n) == table.coeff(n, m);
            if (m, n) != (0, 0) {
                ok &= table.coeff(m, n) == delta_oracle(m, n);
            }
        }
    }
    conclude(1, "delta coefficients match the Taylor oracle", ok, t);
}

#[test]
fn criterion_02_twisted_vacuum_weight() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let vac = FockVector::vacuum(Sector::Twisted);
    let w = engine.virasoro(0, &vac).unwrap();
    let ok = w == vac.scale(&Rat::new(1, 16));
    conclude(2, "twisted vacuum conformal weight is 1/16", ok, t);
}

#[test]
fn criterion_03_commutator_formula() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let sector = Sector::Twisted;
    let states = algebra_states(4);
    let mut ok = true;
    'outer: for a in &states {
        let pa = a.sigma_parity().unwrap() as i64;
        for b in &states {
            let pb = b.sigma_parity().unwrap() as i64;
            for m in (-7i64..=7).filter(|m| m.rem_euclid(2) == pa.rem_euclid(2)) {
                for k in (-7i64..=7).filter(|k| k.rem_euclid(2) == pb.rem_euclid(2)) {
                    let w = commutator_check(&engine, a, b, m, k, &sector, 8).unwrap();
                    if !w.ok {
                        eprintln!("witness: {:?}", w.detail);
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
    }
    conclude(3, "commutator formula on the degree-4 slice", ok, t);
}

#[test]
fn criterion_04_translation_lemma() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let mut ok = true;
    for a in algebra_states(5) {
        let w = ta_lemma_check(&engine, &a, &Sector::Twisted, 8, (-9, 7)).unwrap();
        if !w.ok {
            eprintln!("witness: {:?}", w.detail);
            ok = false;
            break;
        }
    }
    conclude(4, "translation lemma for states of degree <= 5", ok, t);
}

#[test]
fn criterion_05_mode_support() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let mut ok = true;
    for a in algebra_states(5) {
        let w = mode_support_check(&engine, &a, 6, (-11, 9)).unwrap();
        if !w.ok {
            eprintln!("witness: {:?}", w.detail);
            ok = false;
            break;
        }
    }
    conclude(5, "twisted mode support matches the parity coset", ok, t);
}

#[test]
fn criterion_06_infinitesimal_transformation() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let mut ok = true;
    'outer: for k in 0..=3u32 {
        let d = DerElement::new(2, &[(k, Rat::one())]);
        for a in algebra_states(3) {
            let w = infinitesimal_transform_check(&engine, &d, &a, 6, (-12, 12)).unwrap();
            if !w.ok {
                eprintln!("witness at k={}: {:?}", k, w.detail);
                ok = false;
                break 'outer;
            }
        }
    }
    conclude(6, "infinitesimal transformation identity, window radius 6", ok, t);
}

#[test]
fn criterion_07_group_and_primary_transformation() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    // unipotent rho claimed through z-order 6
    let rho = CoordChange::from_coeff_list(
        2,
        &[
            Rat::one(),
            Rat::one(),
            Rat::new(-1, 2),
            Rat::new(1, 3),
            Rat::from(-1),
            Rat::new(2, 7),
        ],
    )
    .unwrap();
    assert_eq!(rho.order(), 11);
    let mut ok = true;
    for s in ["|0>", "b(-1)|0>"] {
        let a = parse_fock(s).unwrap();
        let (w, win) = shrink_window(-9, 5, |win| {
            group_transform_check(&engine, &rho, &a, 4, win)
        })
        .unwrap();
        ok &= w.ok && win.0 <= win.1;
        if !w.ok {
            eprintln!("witness for {}: {:?}", s, w.detail);
        }
    }
    let omega = FieldEngine::omega();
    let (w, win) = shrink_window(-9, 5, |win| {
        group_transform_check(&engine, &rho, &omega, 4, win)
    })
    .unwrap();
    ok &= w.ok && win.0 <= win.1;
    if !w.ok {
        eprintln!("witness for omega: {:?}", w.detail);
    }
    let b = parse_fock("b(-1)|0>").unwrap();
    let (w, win) = shrink_window(-9, 5, |win| {
        primary_transform_check(&engine, &rho, &b, 4, win)
    })
    .unwrap();
    ok &= w.ok && win.0 <= win.1;
    if !w.ok {
        eprintln!("primary witness: {:?}", w.detail);
    }
    conclude(
        7,
        "group transformation and primary-field laws at order 6",
        ok,
        t,
    );
}

#[test]
fn criterion_08_sigma_conjugation() {
    let t = Instant::now();
    let engine = FieldEngine::new();
    let mut ok = true;
    for a in algebra_states(4) {
        let w = sigma_conjugation_check(&engine, &a, 8, (-9, 7)).unwrap();
        if !w.ok {
            eprintln!("witness: {:?}", w.detail);
            ok = false;
            break;
        }
    }
    conclude(8, "parity conjugation of twisted fields on the degree-4 slice", ok, t);
}

#[test]
fn criterion_09_parity_annihilation() {
    let t = Instant::now();
    let two = parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],
            "degree_cutoff":2,"pole_bound":7}"#,
    )
    .unwrap();
    let mut ok = parity_annihilation_check(&two, 7).unwrap().ok;
    let three = parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"},
            {"s":"1","module":{"pi_lambda":"1"},"point":"+"}],
            "degree_cutoff":2,"pole_bound":7}"#,
    )
    .unwrap();
    ok &= parity_annihilation_check(&three, 7).unwrap().ok;
    conclude(9, "even functions act as zero at pole bound 7", ok, t);
}

#[test]
fn criterion_10_vacuum_propagation() {
    let t = Instant::now();
    let mut ok = true;
    // two twisted insertions
    let two = parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],
            "degree_cutoff":3,"pole_bound":5}"#,
    )
    .unwrap();
    let base = coinvariant_dims(&two).unwrap();
    ok &= base.stabilized;
    let (b, e) = vacuum_propagation_check(&two, &Rat::from(1)).unwrap();
    ok &= b.dims == e.dims;
    // three-point configurations with lambda = 0 and lambda = sqrt(2)
    for module in [r#"{"pi_lambda":"0"}"#, r#"{"pi_lambda":{"sq":"2"}}"#] {
        let cfg = parse_config(&format!(
            r#"{{"marked":[{{"s":"0","module":"pi_sigma"}},{{"s":"inf","module":"pi_sigma"}},
                {{"s":"1","module":{},"point":"+"}}],
                "degree_cutoff":3,"pole_bound":5}}"#,
            module
        ))
        .unwrap();
        let table = coinvariant_dims(&cfg).unwrap();
        ok &= table.stabilized;
        let (b, e) = vacuum_propagation_check(&cfg, &Rat::from(4)).unwrap();
        ok &= b.dims == e.dims;
        // a second vacuum point composes
        let mut cfg2 = cfg.clone();
        cfg2.insertions.push(orbifock::cover::Insertion {
            at: orbifock::cover::BasePoint::Finite("4".into()),
            module: orbifock::cover::ModuleSpec::PiLambda(
                orbifock::cover::LambdaSpec::Rational(Rat::zero()),
            ),
            plus_point: true,
        });
        cfg2.validate().unwrap();
        let (b2, e2) = vacuum_propagation_check(&cfg2, &Rat::from(9)).unwrap();
        ok &= b2.dims == e2.dims && b2.dims == b.dims;
    }
    conclude(
        10,
        "coinvariant tables are invariant under vacuum insertions",
        ok,
        t,
    );
}

#[test]
fn criterion_11_residue_sum() {
    let t = Instant::now();
    let cfg = parse_config(
        r#"{"marked":[{"s":"0","module":"pi_sigma"},{"s":"inf","module":"pi_sigma"}],
            "degree_cutoff":2,"pole_bound":4}"#,
    )
    .unwrap();
    let mut run = coinvariant_run(&cfg, 4).unwrap();
    let functionals = run.quotient_functionals();
    let odd = cfg.function_basis(Parity::Odd, 3).unwrap();
    let mut ok = !functionals.is_empty();
    for phi in &functionals {
        for f in &odd {
            for src in run.setup.tensor_basis_up_to(2) {
                if let Ok(val) = run.residue_sum(phi, f, &src) {
                    if !val.is_zero() {
                        eprintln!("nonzero residue sum for {} on {:?}", f, src);
                        ok = false;
                    }
                }
            }
        }
    }
    // a deliberately non-invariant functional yields a nonzero witness
    let raw = run.raw_functional(run.col_index[&vec![vec![-1], Vec::<i32>::new()]]);
    let mut witness = false;
    'outer: for f in &odd {
        for src in run.setup.tensor_basis_up_to(2) {
            if let Ok(val) = run.residue_sum(&raw, f, &src) {
                if !val.is_zero() {
                    witness = true;
                    break 'outer;
                }
            }
        }
    }
    ok &= witness;
    conclude(
        11,
        "coinvariant functionals annihilate the action; raw ones do not",
        ok,
        t,
    );
}

#[test]
fn criterion_12_affine_sector() {
    let t = Instant::now();
    let mut ok = true;
    for k in [Rat::one()] {
        ok &= jacobi_check(&AffAlgebra::untwisted(k.clone()), 2).ok;
        ok &= jacobi_check(&AffAlgebra::twisted(k.clone()), 2).ok;
    }
    ok &= sugawara_grading_check(&Rat::one(), 4, 2).unwrap().ok;
    let cfg = parse_config(
        r#"{"marked":[{"s":"0","module":{"affine_twisted":{"k":"1"}}},
            {"s":"inf","module":{"affine_twisted":{"k":"1"}}}],
            "degree_cutoff":1,"pole_bound":4}"#,
    )
    .unwrap();
    ok &= g_out_closure_check(&cfg, 4).unwrap().ok;
    let table = affine_coinvariant_dims(&cfg).unwrap();
    ok &= table.stabilized;
    let (b, e) = affine_vacuum_propagation(&cfg, &Rat::from(1)).unwrap();
    ok &= b.dims == e.dims;
    conclude(
        12,
        "affine Jacobi, closure, and stable twisted coinvariants at k = 1",
        ok,
        t,
    );
}
