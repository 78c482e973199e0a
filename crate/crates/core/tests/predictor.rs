use nileztn::netsim::{generate_trace, unshaped_throughput, ShapingModel};
use nileztn::predictor::{make_windows, train_hybrid, HybridConfig, Normalizer};

fn id_throughput(seed: u64) -> Vec<f64> {
    let trace = generate_trace(seed, 300, 310.0, 560.0, 5).unwrap();
    unshaped_throughput(&trace, &ShapingModel::default(), seed)
}

#[test]
fn hybrid_beats_last_value_baseline_on_held_in_data() {
    let series = id_throughput(42);
    let (model, losses, stage_mse) = train_hybrid(&series, 560.0, &HybridConfig::default()).unwrap();
    assert!(losses.last() <= losses.first());
    assert!(stage_mse.windows(2).all(|w| w[1] <= w[0]));

    let n = model.window();
    let norm = Normalizer::new(560.0).unwrap();
    let windows = make_windows(&series, n, &norm).unwrap();
    let (mut mae_model, mut mae_naive) = (0.0, 0.0);
    for (i, _) in windows.iter().enumerate() {
        let w = &series[i..i + n];
        let target = series[i + n];
        mae_model += (model.predict(w).unwrap() - target).abs();
        mae_naive += (w[n - 1] - target).abs();
    }
    let k = windows.len() as f64;
    assert!(mae_model < mae_naive, "hybrid {} vs last-value {}", mae_model / k, mae_naive / k);
}
