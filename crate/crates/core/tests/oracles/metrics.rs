use chunkqe::eval::{average_precision_at_k, ndcg_at_k, paired_ttest, precision_at_k, Judgments};
use chunkqe::RankedList;

use super::Check;

pub fn list(ids: &[String]) -> RankedList {
    let n = ids.len() as f64;
    RankedList::from_scores(
        "q",
        ids.iter().enumerate().map(|(i, d)| (d.clone(), n - i as f64)).collect(),
    )
}

fn letters(s: &str) -> Vec<String> {
    s.chars().map(String::from).collect()
}

fn judgments(pairs: &[(char, u32)]) -> Judgments {
    pairs.iter().map(|(d, g)| (d.to_string(), *g)).collect()
}

// ranking, judgments, k, P@k, NDCG@k, AP@k (denominator: every relevant document)
type Case = (&'static str, &'static [(char, u32)], usize, f64, f64, f64);

pub const CASES: &[Case] = &[
    ("abcde", &[('a', 1), ('c', 2), ('f', 1)], 5, 0.4, 0.6387878865, 0.5555555556),
    ("abcde", &[('a', 1), ('c', 2), ('f', 1)], 3, 0.6666666667, 0.6387878865, 0.5555555556),
    ("abcde", &[('e', 1)], 5, 0.2, 0.3868528072, 0.2),
    ("abcde", &[('e', 1)], 4, 0.0, 0.0, 0.0),
    ("abcde", &[('a', 3), ('b', 2), ('c', 1)], 5, 0.6, 1.0, 1.0),
    ("abcde", &[('a', 3), ('b', 2), ('c', 1)], 2, 1.0, 1.0, 0.6666666667),
    ("cba", &[('a', 3), ('b', 2), ('c', 1)], 3, 1.0, 0.7899980042, 1.0),
    ("abcde", &[], 5, 0.0, 0.0, 0.0),
    ("abcde", &[('a', 0), ('b', 0)], 5, 0.0, 0.0, 0.0),
    ("ab", &[('a', 1), ('b', 1), ('x', 1), ('y', 1)], 10, 0.2, 0.6366824387, 0.5),
    ("xaybz", &[('a', 2), ('b', 1)], 5, 0.4, 0.6433224083, 0.5),
    ("abcdefghij", &[('b', 1), ('d', 1), ('f', 1), ('h', 1), ('j', 1)], 10, 0.5, 0.6858983355, 0.5),
];

pub fn check_metric_cases() -> Check {
    for (i, &(ranking, judged, k, p, ndcg, ap)) in CASES.iter().enumerate() {
        let l = list(&letters(ranking));
        let j = judgments(judged);
        for (name, got, want) in [
            ("P", precision_at_k(&l, &j, k), p),
            ("NDCG", ndcg_at_k(&l, &j, k), ndcg),
            ("AP", average_precision_at_k(&l, &j, k), ap),
        ] {
            ensure!((got - want).abs() < 1e-6, "case {i} {name}@{k}: {got} vs {want}");
        }
    }
    Ok(())
}

/// Two-sided p-value of Student's t with `df` degrees of freedom. Substituting
/// t = sqrt(df) tan(theta) turns the density into cos^(df-1)(theta), so the
/// tail mass is a ratio of two integrals, each done by composite Simpson.
pub fn simpson_p(t: f64, df: f64) -> f64 {
    let f = |x: f64| x.cos().powf(df - 1.0);
    let simpson = |a: f64, b: f64| {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta = (t.abs() / df.sqrt()).atan();
    simpson(theta, half_pi) / simpson(0.0, half_pi)
}

pub fn oracle_t(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    mean / (var / n).sqrt()
}

pub fn check_ttest() -> Check {
    for n in [5usize, 10, 50] {
        let a: Vec<f64> = (0..n).map(|i| 0.5 + 0.3 * (i as f64).sin()).collect();
        let b: Vec<f64> = a
            .iter()
            .enumerate()
            .map(|(i, x)| x - 0.05 - 0.1 * (1.7 * i as f64).cos())
            .collect();
        let got = paired_ttest(&a, &b).map_err(|e| e.to_string())?;
        let t = oracle_t(&a, &b);
        ensure!(got.n == n && got.df == n as f64 - 1.0, "n={n}: wrong sample size or df");
        ensure!((got.t - t).abs() < 1e-9, "n={n}: t {} vs {t}", got.t);
        let p = simpson_p(t, n as f64 - 1.0);
        ensure!((got.p - p).abs() < 1e-6, "n={n}: p {} vs {p}", got.p);
    }
    Ok(())
}
