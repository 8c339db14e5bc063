use holodimer::glauber::sample;
use holodimer::reduction::reduce_model;
use holodimer::{
    conditional_probability, Color, ConditionEvent, ConditionOptions, EdgeType, HoneyTorus, LocalConfig, Observable,
    OneTwoParams, ReducedCell, VertexModel, VertexSignature,
};

fn finite_probability(params: &OneTwoParams, n: usize, targets: &[(usize, LocalConfig)]) -> f64 {
    let r = VertexSignature::one_two(params.a, params.b, params.c);
    let model = VertexModel::periodic(n, r, r).unwrap();
    let cell = ReducedCell::orthogonal(r, r, 1e-9).unwrap();
    let red = reduce_model(&model, &cell.bases.expand(model.lattice())).unwrap();
    let event = ConditionEvent::new(model.lattice(), targets.to_vec()).unwrap();
    conditional_probability(&model, &red, &event, ConditionOptions::default()).unwrap().probability
}

fn within_three_se(est: &holodimer::glauber::Estimate, exact: f64) {
    let z = (est.mean - exact).abs() / est.std_error;
    assert!(z < 3.0, "{:?}: {} +- {} vs {exact} ({z:.2} SE)", est.observable, est.mean, est.std_error);
}

#[test]
fn critical_chain_matches_pfaffian_on_small_torus() {
    let params = OneTwoParams::new(4.0, 1.0, 1.0).unwrap();
    let config: LocalConfig = "011".parse().unwrap();
    let h = HoneyTorus::new(4).unwrap();
    let exact = finite_probability(&params, 4, &[(h.black(1, 2), config)]);
    let obs = [Observable::ConfigDensity { color: Color::Black, config }];
    let report = sample(&params, 4, 20_000_000, 17, &obs).unwrap().0;
    within_three_se(&report.estimates[0], exact);
}

#[test]
fn uniform_dimer_density_matches_pfaffian() {
    let params = OneTwoParams::new(1.0, 1.0, 1.0).unwrap();
    let h = HoneyTorus::new(6).unwrap();
    let a: LocalConfig = "100".parse().unwrap();
    let exact = finite_probability(&params, 6, &[(h.black(2, 3), a), (h.white(2, 3), a)]);
    let obs = [Observable::DimerDensity { edge_type: EdgeType::A }];
    let report = sample(&params, 6, 10_000_000, 5, &obs).unwrap().0;
    within_three_se(&report.estimates[0], exact);
}
