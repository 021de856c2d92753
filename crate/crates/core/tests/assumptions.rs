use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sgula_core::assumptions::{
    check_convexity_at_infinity, check_dissipativity, check_finite_difference, check_linear_growth,
    check_semi_convexity, estimate_regularity, piecewise_radius, InfinityVariant, ProbePlan,
};
use sgula_core::constants::dissipativity_b;
use sgula_core::potentials::{
    build_regression_potential, AbsQuadratic, L1Norm, MaxQuadratic, MogLaplace, MogLaplaceSpec, OneDComposite, Penalty,
    Potential, Quadratic, RegressionData, ScadSpec,
};

fn toy_data() -> RegressionData<f64> {
    let (n, d) = (30, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let beta = [2.0, 0.0, -1.0, 0.0];
    let y: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|j| x[i * d + j] * beta[j]).sum::<f64>() + 0.3 * { let e: f64 = StandardNormal.sample(&mut rng); e })
        .collect();
    let mut sigma = vec![0.0; d * d];
    (0..d).for_each(|i| sigma[i * d + i] = 1.0);
    RegressionData::new(n, d, x, y, Some(beta.to_vec()), sigma).unwrap()
}

fn all_checks_pass(model: &dyn Potential<f64>, plan: &ProbePlan) {
    let reg = model.regularity();
    assert!(reg.is_complete(), "{} lacks declared constants", model.name());
    let (m, l, k, mu, r) = (reg.m.unwrap(), reg.l.unwrap(), reg.k.unwrap(), reg.mu.unwrap(), reg.r.unwrap());
    let b = dissipativity_b(m, l, mu, r, reg.h0_norm).unwrap().max(1e-12);
    let reports = [
        check_linear_growth(model, m, l, plan).unwrap(),
        check_semi_convexity(model, k, plan).unwrap(),
        check_convexity_at_infinity(model, mu, r, plan, InfinityVariant::Pairwise).unwrap(),
        check_dissipativity(model, mu, b, plan).unwrap(),
    ];
    for rep in reports {
        assert!(rep.pass && rep.margin >= 0.0, "{}: {rep:?}", model.name());
    }
}

#[test]
fn catalog_models_satisfy_declared_constants() {
    let data = toy_data();
    let models: Vec<Box<dyn Potential<f64>>> = vec![
        Box::new(Quadratic::new(3, 2.0).unwrap()),
        Box::new(AbsQuadratic::new(3).unwrap()),
        Box::new(MaxQuadratic::new(2).unwrap()),
        Box::new(OneDComposite),
        Box::new(build_regression_potential(data.clone(), Penalty::Scad(ScadSpec::new(3.7, 0.5).unwrap()), 10.0).unwrap()),
        Box::new(build_regression_potential(data.clone(), Penalty::Lasso { gamma: 0.5 }, 10.0).unwrap()),
    ];
    for model in &models {
        all_checks_pass(model.as_ref(), &ProbePlan::cube(model.dim(), 5.0, 20_000, 20_000, 3));
    }
}

#[test]
fn max_quadratic_radius_from_the_piecewise_construction() {
    // inside the unit ball both gradient pieces have norm at most 1; the outer piece is 1-strongly convex
    let r = piecewise_radius(1.0, 1.0).unwrap();
    let model = MaxQuadratic::new(2).unwrap();
    let plan = ProbePlan::cube(2, 2.0, 1000, 20_000, 5);
    let rep = check_convexity_at_infinity::<f64>(&model, 0.5, r, &plan, InfinityVariant::Pairwise).unwrap();
    assert!(rep.pass, "{rep:?}");
    assert!(check_semi_convexity::<f64>(&model, 1.0, &plan).unwrap().pass);
    assert!(!check_semi_convexity::<f64>(&model, 0.5, &plan).unwrap().pass);
}

#[test]
fn bimodal_mixture_fails_convexity_at_small_radius() {
    let spec = MogLaplaceSpec {
        weights: vec![0.5, 0.5],
        means: vec![vec![-2.0], vec![2.0]],
        variances: vec![0.3, 0.3],
        laplace_scale: 0.0,
    };
    let model = MogLaplace::new(spec).unwrap();
    let rep = check_convexity_at_infinity(&model, 0.5, 0.1, &ProbePlan::cube(1, 3.0, 100, 20_000, 1), InfinityVariant::Pairwise)
        .unwrap();
    assert!(!rep.pass && rep.margin < 0.0 && rep.witness.len() == 2);
}

#[test]
fn absolute_value_dissipativity_with_formula_constant() {
    let model = L1Norm::new(1, 1.0).unwrap();
    let mu = 0.05;
    // <x, h(x)> = |x| grows linearly, so the inequality can only hold on a bounded region
    for r in [1.0, 10.0, 40.0] {
        let b = dissipativity_b(1.0, 0.0, mu, r, 0.0).unwrap();
        let plan = ProbePlan::cube(1, r, 20_000, 1, 2).with_tail_fraction(0.0);
        let rep = check_dissipativity(&model, mu, b, &plan).unwrap();
        assert!(rep.pass, "R = {r}: {rep:?}");
    }
    let b = dissipativity_b(1.0, 0.0, mu, 10.0, 0.0).unwrap();
    let rep = check_dissipativity(&model, mu, b, &ProbePlan::cube(1, 10.0, 20_000, 1, 2)).unwrap();
    assert!(!rep.pass && rep.witness[0][0].abs() > 10.0);
}

#[test]
fn loosening_constants_never_breaks_a_pass() {
    let model = OneDComposite;
    let plan = ProbePlan::cube(1, 5.0, 5000, 5000, 4);
    for k in [0.0, 4.0, 12.0, 16.0, 30.0] {
        let tight = check_semi_convexity::<f64>(&model, k, &plan).unwrap();
        let loose = check_semi_convexity::<f64>(&model, k + 1.0, &plan).unwrap();
        assert!(!tight.pass || loose.pass);
        assert!(loose.margin >= tight.margin);
    }
    let tight = check_linear_growth::<f64>(&model, 63.0, 4.0, &plan).unwrap();
    let loose = check_linear_growth::<f64>(&model, 70.0, 4.5, &plan).unwrap();
    assert!(tight.pass && loose.pass && loose.margin >= tight.margin);
}

#[test]
fn subgradients_match_finite_differences() {
    let data = toy_data();
    let scad = build_regression_potential(data.clone(), Penalty::Scad(ScadSpec::new(3.7, 0.5).unwrap()), 10.0).unwrap();
    let models: Vec<Box<dyn Potential<f64>>> = vec![
        Box::new(AbsQuadratic::new(3).unwrap()),
        Box::new(MaxQuadratic::new(3).unwrap()),
        Box::new(OneDComposite),
        Box::new(MogLaplace::new(MogLaplaceSpec::k5(0.15)).unwrap()),
        Box::new(scad),
    ];
    for model in &models {
        let rep = check_finite_difference(model.as_ref(), &ProbePlan::cube(model.dim(), 4.0, 5000, 1, 8), 1e-6, 1e-5).unwrap();
        assert!(rep.pass && rep.probes > 4000, "{}: {rep:?}", model.name());
    }
}

#[test]
fn estimates_fill_unset_fields_only() {
    let mog = MogLaplace::new(MogLaplaceSpec::k3(0.15)).unwrap();
    let plan = ProbePlan::cube(2, 6.0, 5000, 5000, 9);
    let est = estimate_regularity(&mog, &plan).unwrap();
    assert!(est.is_complete(), "{est:?}");
    let (m, l) = (est.m.unwrap(), est.l.unwrap());
    assert!(check_linear_growth(&mog, m, l, &plan).unwrap().pass);
    assert!(check_semi_convexity(&mog, est.k.unwrap(), &plan).unwrap().pass);

    let q = Quadratic::new(2, 1.0).unwrap();
    assert_eq!(estimate_regularity(&q, &plan).unwrap(), q.regularity());
}
