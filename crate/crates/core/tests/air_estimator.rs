use shapeopt::air::{
    awgn_mi_oracle, fit_gaussian_auxiliary, mutual_information, AwgnOracle, CovarianceMode, FitOptions,
};
use shapeopt::channel::{sample_symbols, simulate_awgn};
use shapeopt::constellation::{build_product_qam, mb_pmf};

/// 16QAM² is a product of four 4-PAM coordinates, so its MI is four times the
/// 4-PAM MI at the same per-dimension SNR; that one-dimensional integral was
/// evaluated by adaptive quadrature (absolute tolerance 1e-13).
fn qam16sq_quadrature(snr_db: f64) -> f64 {
    match snr_db as i32 {
        6 => 4.407267099651469,
        9 => 5.853764360462364,
        10 => 6.327886376101375,
        14 => 7.706047622115724,
        _ => unreachable!(),
    }
}

/// First value produced by the Monte-Carlo oracle; frozen. The log-sum-exp
/// cutoff may move it by up to ~1e-5, hence the tolerance below.
const ORACLE_QAM16SQ_9DB: f64 = 5.850683606917925;

#[test]
fn oracle_agrees_with_quadrature() {
    let c = build_product_qam(16).unwrap();
    for snr in [6.0, 9.0, 10.0, 14.0] {
        let mc = awgn_mi_oracle(&c, snr).unwrap();
        assert!((mc - qam16sq_quadrature(snr)).abs() < 0.01, "{snr} dB: {mc}");
    }
}

#[test]
fn oracle_regression_value() {
    let c = build_product_qam(16).unwrap();
    let v = awgn_mi_oracle(&c, 9.0).unwrap();
    assert!((v - ORACLE_QAM16SQ_9DB).abs() < 1e-5, "{v:?}");
}

#[test]
fn mismatched_decoding_matches_oracle_on_awgn() {
    let c = build_product_qam(16).unwrap();
    for (k, snr) in [6.0, 10.0, 14.0].into_iter().enumerate() {
        let tx = sample_symbols(&c, 100_000, 10 + k as u64).unwrap();
        let b = simulate_awgn(&c, &tx, snr, 20 + k as u64).unwrap();
        let aux = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
        let r = mutual_information(&b, &c, &aux).unwrap();
        let oracle = awgn_mi_oracle(&c, snr).unwrap();
        assert!((r.mi_bits_per_4d - oracle).abs() < 0.02, "{snr} dB: {} vs {oracle}", r.mi_bits_per_4d);
        assert!(r.mi_bits_per_4d <= r.entropy_bits);
    }
}

#[test]
fn full_covariance_agrees_on_white_noise() {
    let c = build_product_qam(16).unwrap();
    let tx = sample_symbols(&c, 20_000, 1).unwrap();
    let b = simulate_awgn(&c, &tx, 10.0, 2).unwrap();
    let iso = fit_gaussian_auxiliary(&b, FitOptions::default()).unwrap();
    let full = fit_gaussian_auxiliary(
        &b,
        FitOptions { covariance: CovarianceMode::FullCovariance, ..FitOptions::default() },
    )
    .unwrap();
    let a = mutual_information(&b, &c, &iso).unwrap().mi_bits_per_4d;
    let f = mutual_information(&b, &c, &full).unwrap().mi_bits_per_4d;
    assert!((a - f).abs() < 0.01, "{a} vs {f}");
}

#[test]
fn oracle_noise_is_common_across_pmfs() {
    // Pruning one shell leaves every other point's noise untouched, so the
    // densities of unaffected points agree and the comparison is smooth.
    let base = build_product_qam(16).unwrap();
    let w: Vec<f64> = base.energies().iter().map(|e| if *e > 1.7 { 0.0 } else { 1.0 }).collect();
    let pruned = base.with_pmf(w).unwrap();
    let o = AwgnOracle::fast();
    let a = o.estimate(&pruned, 9.0).unwrap();
    let b = o.estimate(&pruned, 9.0).unwrap();
    assert_eq!(a, b);
    assert!(a.mi_bits <= pruned.entropy_bits());
}

#[test]
fn shaped_pmf_gains_on_awgn() {
    let c = build_product_qam(16).unwrap();
    let shaped = mb_pmf(&c, 0.5).unwrap();
    assert!(awgn_mi_oracle(&shaped, 9.0).unwrap() >= awgn_mi_oracle(&c, 9.0).unwrap() - 0.01);
}
