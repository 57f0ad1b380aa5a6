use shapeopt::constellation::{
    amplitude_classes, apply_class_state, build_product_qam, mb_pmf, Constellation4D, ENERGY_REL_TOL,
};
use shapeopt::optimizer::{
    candidate_state, evaluate_candidate, optimize, optimize_with, read_trace, shaping_gain, AwgnEvaluator,
    EntropyEvaluator, Evaluator, NdjsonSink, OptimizerConfig, OptimizerTrace, TraceEvent,
};
use shapeopt::Error;

fn small_cfg() -> OptimizerConfig {
    OptimizerConfig {
        prob_grid: vec![0.0, 0.5, 1.0, 2.0],
        scale_grid: vec![0.95, 1.0, 1.05],
        max_epochs: 3,
        eval_symbols: 2000,
        ..OptimizerConfig::default()
    }
}

fn peaked16() -> Constellation4D {
    mb_pmf(&build_product_qam(16).unwrap(), 1.5).unwrap()
}

fn bits(c: &Constellation4D) -> Vec<u64> {
    c.points().iter().flatten().chain(c.pmf()).map(|v| v.to_bits()).collect()
}

fn run_with_events(base: &Constellation4D, ev: &dyn Evaluator, cfg: &OptimizerConfig) -> (OptimizerTrace, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let t = optimize_with(base, ev, cfg, None, &mut |e| {
        events.push(e.clone());
        Ok(())
    })
    .unwrap();
    (t, events)
}

#[test]
fn entropy_stub_drives_the_pmf_to_uniform() {
    let base = peaked16();
    let cfg = OptimizerConfig { max_epochs: 20, ..OptimizerConfig::default() };
    let t = optimize(&base, &EntropyEvaluator, &cfg).unwrap();
    assert!(t.converged);
    let h = t.final_constellation.entropy_bits();
    assert!(h > 7.99, "entropy {h}");
    assert_eq!(t.nonzero_points, 256);
}

#[test]
fn epoch_mi_never_decreases() {
    let t = optimize(&peaked16(), &AwgnEvaluator::new(9.0), &small_cfg()).unwrap();
    let mut prev = t.initial.mi_bits_per_4d;
    for m in &t.epoch_mi {
        assert!(*m >= prev, "{:?}", t.epoch_mi);
        prev = *m;
    }
}

#[test]
fn runs_are_deterministic() {
    let ev = AwgnEvaluator::new(9.0);
    let (a, ea) = run_with_events(&peaked16(), &ev, &small_cfg());
    let (b, eb) = run_with_events(&peaked16(), &ev, &small_cfg());
    assert_eq!(ea, eb);
    assert_eq!(bits(&a.final_constellation), bits(&b.final_constellation));
}

#[test]
fn identity_candidate_reproduces_the_incumbent() {
    let base = peaked16();
    let state = amplitude_classes(&base, ENERGY_REL_TOL);
    let ev = AwgnEvaluator::new(9.0);
    let incumbent = ev.evaluate(&apply_class_state(&base, &state).unwrap(), 11, 3000).unwrap();
    for k in 0..state.len() {
        assert_eq!(candidate_state(&state, k, 1.0, 1.0).unwrap(), state);
        let r = evaluate_candidate(&state, k, 1.0, 1.0, &base, &ev, 11, 3000).unwrap().unwrap();
        assert_eq!(r.mi_bits_per_4d.to_bits(), incumbent.mi_bits_per_4d.to_bits());
        assert_eq!(r.group_means, incumbent.group_means);
    }
}

#[test]
fn zero_factor_prunes_and_keeps_the_other_ratios() {
    let state = amplitude_classes(&peaked16(), ENERGY_REL_TOL);
    for k in 0..state.len() {
        let next = candidate_state(&state, k, 0.0, 1.0).unwrap();
        assert!(next.classes[k].is_pruned());
        assert_eq!(next.classes[k].shadow_probability, state.classes[k].probability);
        assert!((next.total_probability() - 1.0).abs() < 1e-12);
        let (i, j) = if k == 0 { (1, 2) } else { (0, if k == 1 { 2 } else { 1 }) };
        let before = state.classes[i].probability / state.classes[j].probability;
        let after = next.classes[i].probability / next.classes[j].probability;
        assert!((before - after).abs() <= 1e-12 * before, "{before} vs {after}");
        // pruning twice is not a candidate; reviving restores the shadow
        assert!(candidate_state(&next, k, 0.0, 1.0).is_none());
        let back = candidate_state(&next, k, 1.0, 1.0).unwrap();
        assert!((back.classes[k].probability - state.classes[k].probability).abs() < 1e-15);
    }
}

#[test]
fn redistribution_keeps_ratios_for_every_factor() {
    let state = amplitude_classes(&peaked16(), ENERGY_REL_TOL);
    for &pf in &[0.25, 0.5, 0.8, 1.25, 2.0, 4.0] {
        let next = candidate_state(&state, 2, pf, 1.0).unwrap();
        assert!((next.classes[2].probability - (state.classes[2].probability * pf).min(1.0)).abs() < 1e-15);
        assert!((next.total_probability() - 1.0).abs() < 1e-12);
        if next.classes[2].probability == 1.0 {
            assert_eq!(next.nonzero_classes(), 1);
            continue;
        }
        for (i, j) in [(0, 1), (1, 3), (3, 4)] {
            let before = state.classes[i].probability / state.classes[j].probability;
            let after = next.classes[i].probability / next.classes[j].probability;
            assert!((before - after).abs() <= 1e-12 * before);
        }
    }
}

#[test]
fn single_class_base_stops_after_one_epoch() {
    let base = build_product_qam(4).unwrap();
    let t = optimize(&base, &AwgnEvaluator::new(6.0), &small_cfg()).unwrap();
    assert_eq!(t.epochs.len(), 1);
    assert!(t.converged);
    assert_eq!(t.accepted().count(), 0);
    assert_eq!(bits(&t.final_constellation), bits(&base));
}

#[test]
fn pruned_points_do_not_change_the_rate() {
    let base = build_product_qam(16).unwrap();
    let state = amplitude_classes(&base, ENERGY_REL_TOL);
    let pruned = apply_class_state(&base, &candidate_state(&state, 4, 0.0, 1.0).unwrap()).unwrap();
    let compact = pruned.without_pruned().unwrap();
    assert!(compact.len() < pruned.len());
    let ev = AwgnEvaluator::new(8.0);
    let a = ev.evaluate(&pruned, 5, 4000).unwrap();
    let b = ev.evaluate(&compact, 5, 4000).unwrap();
    assert_eq!(a.mi_bits_per_4d.to_bits(), b.mi_bits_per_4d.to_bits());
}

#[test]
fn shaping_gain_is_paired_and_guarded() {
    let base = build_product_qam(16).unwrap();
    let ev = AwgnEvaluator::new(9.0);
    let a = ev.evaluate(&base, 3, 4000).unwrap();
    let g = shaping_gain(&a, &a).unwrap();
    assert_eq!((g.gain, g.se), (0.0, 0.0));

    let other = AwgnEvaluator::new(10.0).evaluate(&base, 3, 4000).unwrap();
    assert!(matches!(shaping_gain(&a, &other), Err(Error::InvalidComparison(_))));

    let b = ev.evaluate(&base, 4, 4000).unwrap();
    let g = shaping_gain(&a, &b).unwrap();
    assert!(g.se > 0.0);
    assert!(g.gain.abs() < 3.0 * g.se, "{g:?}");
}

#[test]
fn resume_from_a_torn_trace_reaches_the_same_result() {
    let ev = AwgnEvaluator::new(9.0);
    let cfg = small_cfg();
    let (full, events) = run_with_events(&peaked16(), &ev, &cfg);
    assert!(full.epochs.len() >= 2, "need two epochs, got {}", full.epochs.len());
    let first_end = events.iter().position(|e| matches!(e, TraceEvent::EpochEnd(_))).unwrap();
    // first epoch plus a few steps of the second
    let prefix = &events[..first_end + 4];
    let (resumed, tail) = {
        let mut tail = Vec::new();
        let t = optimize_with(&peaked16(), &ev, &cfg, Some(prefix), &mut |e| {
            tail.push(e.clone());
            Ok(())
        })
        .unwrap();
        (t, tail)
    };
    assert_eq!(bits(&resumed.final_constellation), bits(&full.final_constellation));
    assert_eq!(resumed.epoch_mi, full.epoch_mi);
    assert_eq!(resumed.evaluations, full.evaluations);
    assert_eq!(tail, events[first_end + 1..].to_vec());

    let wrong = OptimizerConfig { seed: 2, ..cfg };
    assert!(optimize_with(&peaked16(), &ev, &wrong, Some(prefix), &mut |_| Ok(())).is_err());
}

#[test]
fn trace_round_trips_through_ndjson() {
    let (_, events) = run_with_events(&peaked16(), &AwgnEvaluator::new(9.0), &small_cfg());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.ndjson");
    {
        let mut sink = NdjsonSink::append(&path).unwrap();
        for e in &events {
            sink.write(e).unwrap();
        }
    }
    assert_eq!(read_trace(&path).unwrap(), events);
    // a torn final line is dropped
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{\"event\":\"step\",\"epo");
    std::fs::write(&path, text).unwrap();
    assert_eq!(read_trace(&path).unwrap(), events);
}

#[test]
fn validation_seed_is_never_a_training_seed() {
    let t = optimize(&peaked16(), &AwgnEvaluator::new(9.0), &small_cfg()).unwrap();
    let seeds = t.seeds();
    assert!(!seeds.is_empty());
    let validation = shapeopt::experiment::ExperimentSpec::default().validation_seed;
    assert!(!seeds.contains(&validation));
}
