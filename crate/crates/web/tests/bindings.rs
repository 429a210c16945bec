use qwalk_web::{distribution_data, sigma_curve_data, trajectory_data, MAX_STEPS};

fn binomial_marginals(t: usize) -> Vec<f64> {
    // classical ±1 walk; odd offsets from -T are unreachable
    let mut row = vec![1.0f64];
    for _ in 0..t {
        let mut next = vec![0.0; row.len() + 1];
        for (k, v) in row.iter().enumerate() {
            next[k] += v / 2.0;
            next[k + 1] += v / 2.0;
        }
        row = next;
    }
    let mut out = vec![0.0; 2 * t + 1];
    for (k, v) in row.into_iter().enumerate() {
        out[2 * k] = v;
    }
    out
}

#[test]
fn pure_walk_at_two_steps() {
    let d = distribution_data(2, 0.0, "both", "plus").unwrap();
    assert_eq!(d.len(), 5 + 2);
    let expected = [0.25, 0.0, 0.5, 0.0, 0.25, 0.0, 2f64.sqrt()];
    for (a, b) in d.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn classical_limit_is_binomial() {
    let t = 30;
    let d = distribution_data(t, 1.0, "coin", "symmetric").unwrap();
    for (a, b) in d.iter().zip(binomial_marginals(t)) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((d[2 * t + 2] - (t as f64).sqrt()).abs() < 1e-9);
}

#[test]
fn sigma_curve_decreases_and_respects_bound() {
    let c = sigma_curve_data(40, "both", "symmetric", 1e-3, 6).unwrap();
    assert_eq!(c.len(), 18);
    assert!((c[0] - 1e-3).abs() < 1e-15 && c[15] == 1.0);
    assert!(c
        .chunks(3)
        .zip(c.chunks(3).skip(1))
        .all(|(a, b)| b[1] < a[1]));
    assert!((c[16] - 40f64.sqrt()).abs() < 1e-9);
    assert!(c[1] <= c[2] + 0.5);
    assert!(c[17].is_nan());
}

#[test]
fn trajectories_match_binomial_at_full_dephasing() {
    let t = 10;
    let h = trajectory_data(t, 1.0, "both", "symmetric", 20_000, 3).unwrap();
    let (probs, errs) = h.split_at(2 * t + 1);
    for ((q, e), b) in probs.iter().zip(errs).zip(binomial_marginals(t)) {
        assert!((q - b).abs() <= 5.0 * e.max(1e-3));
    }
    assert_eq!(
        h,
        trajectory_data(t, 1.0, "both", "symmetric", 20_000, 3).unwrap()
    );
}

#[test]
fn rejects_bad_input() {
    assert!(distribution_data(MAX_STEPS + 1, 0.0, "both", "plus").is_err());
    assert!(distribution_data(5, 1.5, "both", "plus").is_err());
    assert!(distribution_data(5, 0.1, "sideways", "plus").is_err());
    assert!(distribution_data(5, 0.1, "both", "up").is_err());
    assert!(sigma_curve_data(5, "both", "plus", 0.0, 4).is_err());
    assert!(trajectory_data(5, 0.1, "both", "plus", 0, 1).is_err());
}
