use ecgid_core::stats::{
    kendall, kendall_with, spearman, spearman_with, summarize_row, PermutationConfig,
};
use proptest::prelude::*;

/// Published per-method minimum accuracy over the 12 leads and the
/// max-minus-min spread, in percent, thirteen methods in table order.
const PUBLISHED_MIN: [f64; 13] = [
    96.0, 41.0, 69.0, 92.0, 86.0, 82.0, 82.0, 92.0, 50.0, 6.0, 36.0, 52.0, 59.0,
];
const PUBLISHED_SPREAD: [f64; 13] = [
    2.0, 19.0, 9.0, 5.0, 9.0, 10.0, 11.0, 6.0, 13.0, 8.0, 10.0, 21.0, 13.0,
];

/// Ranks by counting: rank = 1 + #smaller + (#equal - 1) / 2.
fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|v| {
            let less = x.iter().filter(|w| *w < v).count() as f64;
            let equal = x.iter().filter(|w| *w == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn brute_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (counting_ranks(x), counting_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i >= j {
                continue;
            }
            let sx = (x[i] - x[j]).signum() * if x[i] == x[j] { 0.0 } else { 1.0 };
            let sy = (y[i] - y[j]).signum() * if y[i] == y[j] { 0.0 } else { 1.0 };
            match (sx == 0.0, sy == 0.0) {
                (true, true) => {
                    tx += 1.0;
                    ty += 1.0;
                }
                (true, false) => tx += 1.0,
                (false, true) => ty += 1.0,
                _ if sx == sy => c += 1.0,
                _ => d += 1.0,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    (c - d) / ((n0 - tx) * (n0 - ty)).sqrt()
}

#[test]
fn published_columns_brute_force() {
    let s = brute_spearman(&PUBLISHED_MIN, &PUBLISHED_SPREAD);
    let t = brute_tau_b(&PUBLISHED_MIN, &PUBLISHED_SPREAD);
    let rs = spearman(&PUBLISHED_MIN, &PUBLISHED_SPREAD).unwrap();
    let rt = kendall(&PUBLISHED_MIN, &PUBLISHED_SPREAD).unwrap();
    assert!((rs.coefficient - s).abs() < 1e-12);
    assert!((rt.coefficient - t).abs() < 1e-12);
    // what the thirteen pairs actually give
    assert!((s - (-0.5957)).abs() < 1e-3, "{s}");
    assert!((t - (-0.4904)).abs() < 1e-3, "{t}");
    assert_eq!(rs.n, 13);
}

#[test]
fn kendall_hand_enumeration() {
    // pairs (1,2),(1,3),(1,4),(2,3),(2,4) concordant, (3,4) discordant
    let r = kendall(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 4.0, 3.0]).unwrap();
    assert_eq!(r.coefficient, 4.0 / 6.0);
}

#[test]
fn published_mlp_row_summary() {
    let mlp = [
        97.0, 98.0, 96.0, 96.0, 97.0, 96.0, 97.0, 97.0, 98.0, 98.0, 97.0, 98.0,
    ];
    let s = summarize_row(&mlp).unwrap();
    assert_eq!((s.min, s.spread), (96.0, 2.0));
}

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..25).prop_flat_map(|n| {
        (
            prop::collection::vec((-20i32..20).prop_map(f64::from), n),
            prop::collection::vec((-20i32..20).prop_map(f64::from), n),
        )
    })
}

fn cfg() -> PermutationConfig {
    PermutationConfig {
        permutations: 199,
        seed: 9,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_match_brute_force((x, y) in pairs()) {
        if let Ok(r) = spearman_with(&x, &y, &cfg()) {
            prop_assert!((r.coefficient - brute_spearman(&x, &y)).abs() < 1e-9);
        }
        if let Ok(r) = kendall_with(&x, &y, &cfg()) {
            prop_assert!((r.coefficient - brute_tau_b(&x, &y)).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric((x, y) in pairs()) {
        if let (Ok(a), Ok(b)) = (spearman_with(&x, &y, &cfg()), spearman_with(&y, &x, &cfg())) {
            prop_assert!((a.coefficient - b.coefficient).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (kendall_with(&x, &y, &cfg()), kendall_with(&y, &x, &cfg())) {
            prop_assert!((a.coefficient - b.coefficient).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_invariant((x, y) in pairs()) {
        let fx: Vec<f64> = x.iter().map(|v| v.exp() + 3.0 * v).collect();
        if let (Ok(a), Ok(b)) = (spearman_with(&x, &y, &cfg()), spearman_with(&fx, &y, &cfg())) {
            prop_assert!((a.coefficient - b.coefficient).abs() < 1e-12);
        }
        if let (Ok(a), Ok(b)) = (kendall_with(&x, &y, &cfg()), kendall_with(&fx, &y, &cfg())) {
            prop_assert!((a.coefficient - b.coefficient).abs() < 1e-12);
        }
    }

    #[test]
    fn p_values_bounded_and_reproducible((x, y) in pairs()) {
        let c = cfg();
        if let Ok(a) = spearman_with(&x, &y, &c) {
            prop_assert!(a.coefficient.abs() <= 1.0);
            prop_assert!(a.p_value >= 1.0 / (c.permutations + 1) as f64 && a.p_value <= 1.0);
            prop_assert_eq!(a, spearman_with(&x, &y, &c).unwrap());
        }
        if let Ok(a) = kendall_with(&x, &y, &c) {
            prop_assert!(a.coefficient.abs() <= 1.0);
            prop_assert!(a.p_value >= 1.0 / (c.permutations + 1) as f64 && a.p_value <= 1.0);
            prop_assert_eq!(a, kendall_with(&x, &y, &c).unwrap());
        }
    }
}
