//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them). Tolerances are
//! pinned here, not configurable.

use finsler_lab::alphabeta::{audit_closed_forms, PhiFamily};
use finsler_lab::fields::{
    ChartPoint, Domain, FiberVector, MetricSpec, MonomialTerm, OneFormFieldSpec, RiemannFieldSpec,
};
use finsler_lab::geodesics::{compare_traces, integrate_geodesic};
use finsler_lab::identity::audit_identity;
use finsler_lab::jet::Jet4;
use finsler_lab::projective::{
    check_douglas_quadratic, check_isotropic_mean_berwald, check_killing_constant_length,
    check_matsumoto_douglas, check_spray_proportional, check_projective_characterization, SamplePlan,
};
use finsler_lab::spray::{
    berwald_from_jets, douglas_from_jets, douglas_tensor, half_trace_berwald, max_abs,
    mean_berwald, spray_jets, spray_via_alphabeta, spray_via_definition, PointContext,
};
use finsler_lab::testkit::{random_sample, random_spec};

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn flat_pair() -> (MetricSpec, MetricSpec) {
    let f = MetricSpec {
        dim: 3,
        alpha: RiemannFieldSpec::Euclidean,
        beta: OneFormFieldSpec::Constant {
            values: vec![0.2, 0.0, 0.1],
        },
        phi: PhiFamily::Quadratic {
            epsilon: 0.9,
            k: 1.3,
        },
        domain: Domain {
            min: vec![-2.0; 3],
            max: vec![2.0; 3],
        },
    };
    let g = MetricSpec {
        phi: PhiFamily::Matsumoto,
        ..f.clone()
    };
    (f, g)
}

/// Criterion 1: the two spray routes agree within 1e-7 relative on 500
/// random regular samples spanning both φ-families and all three α-families.
#[test]
fn criterion_1_spray_identity() {
    let mut used = 0;
    let mut idx = 0;
    let mut worst: f64 = 0.0;
    let mut alpha_seen = [false; 3];
    let mut phi_seen = [false; 2];
    while used < 500 {
        let spec = random_spec(2024, idx, 2 + idx % 3);
        let (xv, yv) = random_sample(&spec, 31, idx);
        idx += 1;
        let x = ChartPoint::new(xv).unwrap();
        let y = FiberVector::new(yv).unwrap();
        let ctx = PointContext::new(&spec, &x).unwrap();
        if !ctx.fiber_regular(&y) {
            continue;
        }
        let ga = spray_via_alphabeta(&spec, &x, &y).unwrap();
        let gd = spray_via_definition(&spec, &x, &y).unwrap();
        let denom = 1.0f64.max(max_abs(&gd));
        for (a, d) in ga.iter().zip(&gd) {
            worst = worst.max((a - d).abs() / denom);
        }
        alpha_seen[match spec.alpha {
            RiemannFieldSpec::Euclidean => 0,
            RiemannFieldSpec::DiagonalPolynomial { .. } => 1,
            RiemannFieldSpec::ConformallyFlat { .. } => 2,
        }] = true;
        phi_seen[match spec.phi {
            PhiFamily::Quadratic { .. } => 0,
            PhiFamily::Matsumoto => 1,
        }] = true;
        used += 1;
    }
    let covered = alpha_seen.iter().all(|&s| s) && phi_seen.iter().all(|&s| s);
    report(
        "1 spray-identity",
        worst < 1e-7 && covered,
        &format!("max rel residual {worst:.3e} over {used} samples, all families covered: {covered}"),
    );
}

/// Criterion 2: closed-form Q/Θ/Ψ match the generic route within 1e-10 on
/// 1000 samples per family; any mismatch is localized to a single function
/// and the re-derived variant closes it.
#[test]
fn criterion_2_closed_forms() {
    let mats = audit_closed_forms(&PhiFamily::Matsumoto, 1000, 901).unwrap();
    let quad = audit_closed_forms(
        &PhiFamily::Quadratic {
            epsilon: 0.8,
            k: 1.2,
        },
        1000,
        902,
    )
    .unwrap();
    let quad_neg = audit_closed_forms(
        &PhiFamily::Quadratic {
            epsilon: -0.5,
            k: -0.6,
        },
        1000,
        903,
    )
    .unwrap();

    let mats_ok = mats.mismatched.is_empty() && mats.max_rel.iter().all(|&r| r < 1e-10);
    // for the quadratic family only Θ may deviate, and its re-derivation
    // (cubic final numerator term) must close the gap
    let quad_ok = |a: &finsler_lab::alphabeta::ClosedFormAudit| {
        a.max_rel[0] < 1e-10
            && a.max_rel[2] < 1e-10
            && (a.mismatched.is_empty() || a.mismatched == vec!["Theta"])
            && a.rederived_theta_max_rel.unwrap() < 1e-10
    };
    let pass = mats_ok && quad_ok(&quad) && quad_ok(&quad_neg);
    if !quad.mismatched.is_empty() {
        println!(
            "  suspected typo: tabulated quadratic Theta numerator deviates by {:.3e} \
             (generic route), re-derived cubic-term variant agrees to {:.3e}",
            quad.max_rel[1],
            quad.rederived_theta_max_rel.unwrap()
        );
    }
    report(
        "2 closed-form q/theta/psi",
        pass,
        &format!(
            "matsumoto max {:?}, quadratic max {:?} (mismatch localized to {:?})",
            mats.max_rel, quad.max_rel, quad.mismatched
        ),
    );
}

/// Criterion 3: Douglas characterizations for both families plus the
/// non-closed-β counterexample.
#[test]
fn criterion_3_douglas_characterizations() {
    let (f, g) = flat_pair();
    let plan = SamplePlan::generate(&f.domain, 6, 12, 303);

    // (a) matsumoto with parallel β
    let va = check_matsumoto_douglas(&g, &plan).unwrap();
    let a_ok = va.pass && va.fitted["max_douglas"][0] < 1e-7;

    // (b) quadratic satisfying the covariant ansatz with fitted τ
    let vb = check_douglas_quadratic(&f, &plan).unwrap();
    let b_ok = vb.pass && vb.fitted["max_douglas"][0] < 1e-7;

    // (c) non-closed β violates both the ansatz and D ≈ 0
    let mut bad = f.clone();
    bad.beta = OneFormFieldSpec::Affine {
        constant: vec![0.1, 0.0, 0.0],
        linear: vec![
            vec![0.0, 0.12, 0.0],
            vec![-0.12, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ],
    };
    let vc = check_douglas_quadratic(&bad, &plan).unwrap();
    let c_ok = !vc.pass && vc.fitted["max_douglas"][0] > 1e-7;

    report(
        "3 douglas-characterizations",
        a_ok && b_ok && c_ok,
        &format!(
            "matsumoto D {:.3e}; quadratic D {:.3e}; witness residual {:.3e} with D {:.3e}",
            va.fitted["max_douglas"][0],
            vb.fitted["max_douglas"][0],
            vc.residual,
            vc.fitted["max_douglas"][0]
        ),
    );
}

/// Criterion 4: the Douglas tensor is invariant under spray perturbations
/// G^i → G^i + P y^i for P ∈ {β, α, α+β}, within 1e-8 on 200 samples.
#[test]
fn criterion_4_projective_invariance() {
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut idx = 0;
    while used < 200 {
        let spec = random_spec(404, idx, 3);
        let (xv, yv) = random_sample(&spec, 41, idx);
        idx += 1;
        let x = ChartPoint::new(xv).unwrap();
        let y = FiberVector::new(yv).unwrap();
        let ctx = PointContext::new(&spec, &x).unwrap();
        if !ctx.fiber_regular(&y) {
            continue;
        }
        let gjets = spray_jets(&ctx, &y).unwrap();
        let d0 = douglas_from_jets(&gjets, &y.coords);
        let n = 3;

        let alpha2 = Jet4::quadratic_form(&ctx.rd.a, &y.coords);
        let alpha = alpha2.sqrt().unwrap();
        let beta = Jet4::linear(&ctx.bc.b, &y.coords);
        for p in [beta.clone(), alpha.clone(), alpha.add(&beta)] {
            let perturbed: Vec<Jet4> = (0..n)
                .map(|i| gjets[i].add(&p.mul(&Jet4::coordinate(&y.coords, i))))
                .collect();
            let d1 = douglas_from_jets(&perturbed, &y.coords);
            for (a, b) in d0.iter().zip(&d1) {
                worst = worst.max((a - b).abs());
            }
        }
        used += 1;
    }
    report(
        "4 douglas-projective-invariance",
        worst < 1e-8,
        &format!("max |ΔD| {worst:.3e} over {used} samples x 3 perturbations"),
    );
}

/// Criterion 5: the flat witness pair satisfies the three characterization
/// conditions, is spray-proportional with |P| ≤ 1e-9, and 20 geodesic pairs
/// coincide as point sets within 1e-6 (t_end = 1, dt = 1e-3).
#[test]
fn criterion_5_flat_witness_sufficiency() {
    let (f, g) = flat_pair();
    let plan = SamplePlan::generate(&f.domain, 8, 16, 505);

    let cond = check_projective_characterization(&f, &g, &plan).unwrap();
    let sp = check_spray_proportional(&f, &g, &plan).unwrap();
    let p_bound = sp.fitted["P"].iter().fold(0.0f64, |m, p| m.max(p.abs()));

    let mut max_dist: f64 = 0.0;
    for i in 0..20 {
        let angle = i as f64 * 0.31;
        let x0 = ChartPoint::new(vec![
            0.3 * (angle.cos()),
            0.3 * (angle.sin()),
            0.1 * ((i % 5) as f64 - 2.0),
        ])
        .unwrap();
        let y0 = FiberVector::new(vec![
            angle.cos(),
            angle.sin(),
            0.4 * ((i % 3) as f64 - 1.0),
        ])
        .unwrap();
        let ta = integrate_geodesic(&f, &x0, &y0, 1.0, 1e-3).unwrap();
        let tb = integrate_geodesic(&g, &x0, &y0, 1.0, 1e-3).unwrap();
        max_dist = max_dist.max(compare_traces(&ta, &tb).unwrap());
    }
    let pass = cond.pass && sp.pass && p_bound <= 1e-9 && max_dist < 1e-6;
    report(
        "5 flat-witness-sufficiency",
        pass,
        &format!(
            "conditions pass {}, spray residual {:.3e}, |P| ≤ {p_bound:.3e}, trace distance {max_dist:.3e}",
            cond.pass, sp.residual
        ),
    );
}

/// Criterion 6: the Killing-constant-length witness has E = 0 within 1e-8;
/// a non-constant gradient β has r_00 ≠ 0 and its isotropic-mean-Berwald fit
/// is rejected or carries a nonzero c.
#[test]
fn criterion_6_killing_chain() {
    // rotation field around the x³ axis with the axis as the sample set
    let witness = MetricSpec {
        dim: 3,
        alpha: RiemannFieldSpec::Euclidean,
        beta: OneFormFieldSpec::Affine {
            constant: vec![0.0, 0.0, 0.25],
            linear: vec![
                vec![0.0, 0.2, 0.0],
                vec![-0.2, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
            ],
        },
        phi: PhiFamily::Quadratic {
            epsilon: 0.8,
            k: 1.0,
        },
        domain: Domain {
            min: vec![-1.0; 3],
            max: vec![1.0; 3],
        },
    };
    let axis = SamplePlan::new(
        vec![
            ChartPoint::new(vec![0.0, 0.0, -0.6]).unwrap(),
            ChartPoint::new(vec![0.0, 0.0, -0.2]).unwrap(),
            ChartPoint::new(vec![0.0, 0.0, 0.3]).unwrap(),
            ChartPoint::new(vec![0.0, 0.0, 0.7]).unwrap(),
        ],
        12,
        606,
    );
    let killing = check_killing_constant_length(&witness, &axis).unwrap();
    let mut max_e: f64 = 0.0;
    for (idx, x) in axis.points.iter().enumerate() {
        let ctx = PointContext::new(&witness, x).unwrap();
        for y in axis.fibers(idx) {
            max_e = max_e.max(max_abs(&mean_berwald(&ctx, &y).unwrap()));
        }
    }

    let gradient = MetricSpec {
        beta: OneFormFieldSpec::GradientOfPolynomial {
            potential: vec![MonomialTerm {
                coeff: 0.15,
                powers: vec![1, 1, 0],
            }],
        },
        ..witness.clone()
    };
    let plan = SamplePlan::generate(&gradient.domain, 5, 10, 607);
    let killing_grad = check_killing_constant_length(&gradient, &plan).unwrap();
    let iso = check_isotropic_mean_berwald(&gradient, &plan).unwrap();
    let grad_rejected = !iso.pass || iso.fitted["c"].iter().any(|c| c.abs() > 1e-9);

    let pass = killing.pass && max_e < 1e-8 && !killing_grad.pass && grad_rejected;
    report(
        "6 killing-chain",
        pass,
        &format!(
            "witness r00/s0 {:.3e}, E {max_e:.3e}; gradient r00 {:.3e}, isotropy rejected {grad_rejected}",
            killing.residual, killing_grad.residual
        ),
    );
}

/// Criterion 7: the identity audit over 100 random regular samples either
/// confirms the tabulated coefficient tables (residual < 1e-6) or produces a
/// deterministic term-isolation report naming the first inconsistent group.
#[test]
fn criterion_7_identity_audit() {
    let f = MetricSpec {
        dim: 3,
        alpha: RiemannFieldSpec::Euclidean,
        beta: OneFormFieldSpec::Affine {
            constant: vec![0.12, -0.05, 0.08],
            linear: vec![
                vec![0.0, 0.06, -0.02],
                vec![-0.03, 0.0, 0.05],
                vec![0.02, -0.04, 0.0],
            ],
        },
        phi: PhiFamily::Quadratic {
            epsilon: 0.7,
            k: 1.1,
        },
        domain: Domain {
            min: vec![-1.0; 3],
            max: vec![1.0; 3],
        },
    };
    let g = MetricSpec {
        phi: PhiFamily::Matsumoto,
        beta: OneFormFieldSpec::Affine {
            constant: vec![0.10, 0.04, -0.06],
            linear: vec![
                vec![0.0, -0.05, 0.03],
                vec![0.04, 0.0, -0.02],
                vec![-0.01, 0.03, 0.0],
            ],
        },
        ..f.clone()
    };
    let plan = SamplePlan::generate(&f.domain, 10, 10, 707);
    let audit = audit_identity(&f, &g, &plan).unwrap();
    let audit2 = audit_identity(&f, &g, &plan).unwrap();

    let derived_ok = audit.max_residual_derived < 1e-6;
    let outcome_ok = audit.tables_confirmed
        || (!audit.mismatched_groups.is_empty() && audit.first_mismatch.is_some());
    let reproducible = audit.mismatched_groups == audit2.mismatched_groups
        && audit.max_residual_tabulated == audit2.max_residual_tabulated;
    if !audit.tables_confirmed {
        println!(
            "  term-isolation report: first inconsistent group {:?}, all {:?}; \
             complete-denominator reading closes: {}, short reading closes: {}",
            audit.first_mismatch,
            audit.mismatched_groups,
            audit.l_full_closes,
            audit.l_short_closes
        );
    }
    let pass = audit.samples_used >= 100 && derived_ok && outcome_ok && reproducible
        && audit.l_full_closes
        && !audit.l_short_closes;
    report(
        "7 identity-audit",
        pass,
        &format!(
            "{} samples, tabulated residual {:.3e}, derived residual {:.3e}, groups {:?}",
            audit.samples_used,
            audit.max_residual_tabulated,
            audit.max_residual_derived,
            audit.mismatched_groups
        ),
    );
}

/// Criterion 8: exact symmetry of B and D, the trace identity E = ½B^m_m,
/// the Riemannian reduction, and the RK4 convergence ratio.
#[test]
fn criterion_8_berwald_structure() {
    // symmetry + trace identity on a curved sample
    let spec = random_spec(808, 5, 3);
    let (xv, yv) = random_sample(&spec, 81, 5);
    let x = ChartPoint::new(xv).unwrap();
    let y = FiberVector::new(yv).unwrap();
    let ctx = PointContext::new(&spec, &x).unwrap();
    let gjets = spray_jets(&ctx, &y).unwrap();
    let b = berwald_from_jets(&gjets);
    let d = douglas_from_jets(&gjets, &y.coords);
    let n = 3;
    let mut symmetric = true;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let idx = ((i * n + j) * n + k) * n + l;
                    for (jj, kk, ll) in [(j, l, k), (k, j, l), (l, k, j)] {
                        let p = ((i * n + jj) * n + kk) * n + ll;
                        symmetric &= b[idx] == b[p] && d[idx] == d[p];
                    }
                }
            }
        }
    }
    let e_div = mean_berwald(&ctx, &y).unwrap();
    let e_tr = half_trace_berwald(&b, n);
    let mut trace_err: f64 = 0.0;
    for (a, c) in e_div.iter().zip(&e_tr) {
        trace_err = trace_err.max((a - c).abs() / (1.0 + c.abs()));
    }

    // Riemannian reduction
    let riem = MetricSpec {
        dim: 2,
        alpha: RiemannFieldSpec::ConformallyFlat {
            exponent: vec![MonomialTerm {
                coeff: 0.4,
                powers: vec![1, 0],
            }],
        },
        beta: OneFormFieldSpec::Constant {
            values: vec![0.0, 0.0],
        },
        phi: PhiFamily::Quadratic {
            epsilon: 0.6,
            k: 0.9,
        },
        domain: Domain {
            min: vec![-5.0, -5.0],
            max: vec![5.0, 5.0],
        },
    };
    let xr = ChartPoint::new(vec![0.2, -0.3]).unwrap();
    let yr = FiberVector::new(vec![0.7, 0.4]).unwrap();
    let ctx_r = PointContext::new(&riem, &xr).unwrap();
    let jets_r = spray_jets(&ctx_r, &yr).unwrap();
    let reduction = max_abs(&berwald_from_jets(&jets_r))
        .max(max_abs(&douglas_tensor(&ctx_r, &yr).unwrap()))
        .max(max_abs(&mean_berwald(&ctx_r, &yr).unwrap()));

    // RK4 convergence ratio on the conformal Riemannian problem
    let x0 = ChartPoint::new(vec![0.0, 0.1]).unwrap();
    let y0 = FiberVector::new(vec![0.7, -0.3]).unwrap();
    let endpoint = |dt: f64| {
        let tr = integrate_geodesic(&riem, &x0, &y0, 1.0, dt).unwrap();
        tr.points.last().unwrap().coords.clone()
    };
    let dist = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    };
    let (e1, e2, e3) = (endpoint(4e-2), endpoint(2e-2), endpoint(1e-2));
    let ratio = dist(&e1, &e2) / dist(&e2, &e3);

    let pass = symmetric
        && trace_err < 1e-9
        && reduction < 1e-10
        && (ratio - 16.0).abs() <= 0.3 * 16.0;
    report(
        "8 berwald-structure",
        pass,
        &format!(
            "symmetry exact {symmetric}, trace defect {trace_err:.3e}, riemannian reduction {reduction:.3e}, rk4 ratio {ratio:.2}"
        ),
    );
}
