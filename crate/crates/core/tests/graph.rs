use quantreactor::cli::{
    reference_grid, reference_params, FAILURE_A_RATES, FAILURE_B_RATES, REFERENCE_RATES,
};
use quantreactor::controller::DilutionSchedule;
use quantreactor::graph::*;
use quantreactor::quantizer::{DomainLabel, QuantizerKind, RegionSet};
use quantreactor::simulator::*;

use DomainLabel::{Regular as R, Switching as S};

fn a1() -> RegionSet<f64> {
    quantreactor::cli::reference_regions(QuantizerKind::Perfect)
}

fn sched(r: [f64; 4]) -> DilutionSchedule<f64> {
    DilutionSchedule::new(r.to_vec()).unwrap()
}

fn chain() -> Vec<Edge> {
    vec![
        (R(1), S(1)),
        (S(1), R(2)),
        (R(2), S(2)),
        (S(2), R(3)),
        (R(3), S(3)),
        (S(3), R(4)),
    ]
}

fn observed(rates: [f64; 4], mode: SimMode) -> TransitionGraph {
    let cfg = SimConfig {
        mode,
        t_max: 300.0,
        ..SimConfig::default()
    };
    let runs = batch_simulate(
        &reference_params(),
        &a1(),
        &sched(rates),
        &reference_grid(),
        &cfg,
        1,
    )
    .unwrap();
    empirical_graph(runs.iter().map(|r| r.outcome.as_ref().unwrap())).unwrap()
}

#[test]
fn predicted_reference_topology() {
    let g = predict_graph(&reference_params(), &a1(), &sched(REFERENCE_RATES)).unwrap();
    assert_eq!(g.edges().iter().copied().collect::<Vec<_>>(), chain());
    assert!(g.is_deterministic());
    let eq: Vec<DomainLabel> = g
        .nodes()
        .filter(|(_, i)| i.equilibrium)
        .map(|(l, _)| l)
        .collect();
    assert_eq!(eq, vec![R(4)]);
    assert!(g.node(R(4)).unwrap().invariant);
}

#[test]
fn predicted_failure_a_has_reverse_edge() {
    let g = predict_graph(&reference_params(), &a1(), &sched(FAILURE_A_RATES)).unwrap();
    assert_eq!(g.downward_edges(), vec![(R(2), S(1))]);
    assert!(g.node(S(1)).unwrap().equilibrium);
    assert!(!g.is_deterministic());
    let dot = export_dot(&g);
    assert!(dot.contains("\"Y2\" -> \"Y1|2\";"));
    assert!(dot.contains("\"Y1|2\" [shape=box, style=filled, fillcolor=grey];"));
}

#[test]
fn predicted_failure_b_traps_in_region_three() {
    let g = predict_graph(&reference_params(), &a1(), &sched(FAILURE_B_RATES)).unwrap();
    assert!(g.downward_edges().is_empty());
    assert!(g.node(R(3)).unwrap().equilibrium);
    assert!(g.node(R(4)).unwrap().invariant);
    assert!(!g.node(R(3)).unwrap().is_transient());
}

#[test]
fn empirical_matches_prediction() {
    for rates in [REFERENCE_RATES, FAILURE_A_RATES, FAILURE_B_RATES] {
        let predicted = predict_graph(&reference_params(), &a1(), &sched(rates)).unwrap();
        let seen = observed(rates, SimMode::PerfectEvent);
        let diff = compare(&predicted, &seen);
        assert!(diff.is_exact(), "{rates:?}: {diff:?}");
    }
}

#[test]
fn empirical_reference_graph_is_a_chain() {
    let g = observed(REFERENCE_RATES, SimMode::DiscreteRandom);
    assert_eq!(g.edges().iter().copied().collect::<Vec<_>>(), chain());
    assert!(g.is_deterministic());
    let top = g.node(R(4)).unwrap();
    assert!(top.equilibrium && top.invariant);
}

#[test]
fn stationary_run_gives_single_node() {
    let p = reference_params();
    let xi = p.xi_a(0.47).unwrap();
    let cfg = SimConfig {
        t_max: 20.0,
        ..SimConfig::default()
    };
    let (_, out) = simulate(&p, &a1(), &sched(REFERENCE_RATES), xi, &cfg).unwrap();
    let g = empirical_graph([&out]).unwrap();
    assert_eq!(g.nodes().count(), 1);
    assert!(g.edges().is_empty());
    let info = g.node(R(4)).unwrap();
    assert!(info.equilibrium && info.invariant);
}

#[test]
fn empty_batch_is_an_error() {
    assert!(empirical_graph(std::iter::empty::<&SimOutcome<f64>>()).is_err());
}

#[test]
fn json_lists_nodes_in_order() {
    let g = predict_graph(&reference_params(), &a1(), &sched(REFERENCE_RATES)).unwrap();
    let j = g.to_json();
    let ids: Vec<&str> = j.nodes.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(ids, ["Y1", "Y1|2", "Y2", "Y2|3", "Y3", "Y3|4", "Y4"]);
    assert!(j.deterministic);
    let back: GraphJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
    assert_eq!(back, j);
}
