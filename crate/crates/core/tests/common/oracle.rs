//! Independent reference implementations used as test oracles.

use astro_float::{BigFloat, Consts, RoundingMode};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat) -> f64 {
    let s = format!("{x}");
    s.parse()
        .unwrap_or_else(|_| panic!("cannot read {s} as f64"))
}

/// SLERP of `a` and `b` evaluated elementwise in 256-bit arithmetic, with the
/// same linear fallback rule (zero operand or `sin(omega) < eps`).
pub fn slerp_reference(a: &[f32], b: &[f32], lambda: f64, eps: f64) -> Vec<f64> {
    let mut cc = Consts::new().unwrap();
    let zero = big(0.0);
    let (mut dot, mut na, mut nb) = (zero.clone(), zero.clone(), zero);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (big(x as f64), big(y as f64));
        dot = dot.add(&x.mul(&y, P, RM), P, RM);
        na = na.add(&x.mul(&x, P, RM), P, RM);
        nb = nb.add(&y.mul(&y, P, RM), P, RM);
    }
    let l = big(lambda);
    let one = big(1.0);
    let linear = |wa: &BigFloat, wb: &BigFloat| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let v = wa.mul(&big(x as f64), P, RM).add(&wb.mul(&big(y as f64), P, RM), P, RM);
                to_f64(&v)
            })
            .collect()
    };
    if na.is_zero() || nb.is_zero() {
        return linear(&one.sub(&l, P, RM), &l);
    }
    let norm = na.sqrt(P, RM).mul(&nb.sqrt(P, RM), P, RM);
    let mut cos = dot.div(&norm, P, RM);
    if cos > one {
        cos = one.clone();
    }
    let minus_one = big(-1.0);
    if cos < minus_one {
        cos = minus_one;
    }
    let omega = cos.acos(P, RM, &mut cc);
    let sin = omega.sin(P, RM, &mut cc);
    if sin < big(eps) {
        return linear(&one.sub(&l, P, RM), &l);
    }
    let wa = one.sub(&l, P, RM).mul(&omega, P, RM).sin(P, RM, &mut cc).div(&sin, P, RM);
    let wb = l.mul(&omega, P, RM).sin(P, RM, &mut cc).div(&sin, P, RM);
    linear(&wa, &wb)
}

/// `||got - want|| / ||want||` (absolute when `want` is zero).
pub fn relative_error(got: &[f32], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(&g, &w)| (g as f64 - w).powi(2)).sum::<f64>().sqrt();
    let den: f64 = want.iter().map(|w| w * w).sum::<f64>().sqrt();
    if den == 0.0 { num } else { num / den }
}

/// O(n^2) non-dominated set on (accuracy up, ECE down).
pub fn brute_force_frontier(axes: &[(f64, f64)]) -> Vec<usize> {
    (0..axes.len())
        .filter(|&i| {
            !axes.iter().any(|&q| {
                let p = axes[i];
                q.0 >= p.0 && q.1 <= p.1 && (q.0 > p.0 || q.1 < p.1)
            })
        })
        .collect()
}

/// ECE accumulated in a plain loop, no sorting.
pub fn naive_ece(conf: &[f64], correct: &[bool], bins: usize) -> f64 {
    let mut sum_c = vec![0.0; bins];
    let mut hits = vec![0usize; bins];
    let mut cnt = vec![0usize; bins];
    for (&c, &ok) in conf.iter().zip(correct) {
        let mut b = (c * bins as f64) as usize;
        if b >= bins {
            b = bins - 1;
        }
        sum_c[b] += c;
        hits[b] += ok as usize;
        cnt[b] += 1;
    }
    let n = conf.len() as f64;
    (0..bins)
        .filter(|&b| cnt[b] > 0)
        .map(|b| {
            let k = cnt[b] as f64;
            (k / n) * (hits[b] as f64 / k - sum_c[b] / k).abs()
        })
        .sum()
}

/// Total variation based smoothness computed from the definition:
/// 1 - (TV - U) / 2 with U = (max - first) + (max - last).
pub fn smoothness_reference(curve: &[f64]) -> f64 {
    let tv: f64 = curve.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let u = (max - curve[0]) + (max - curve[curve.len() - 1]);
    (1.0 - (tv - u) / 2.0).clamp(0.0, 1.0)
}

/// ECE of the given f64 inputs in 256-bit arithmetic, rounded to f64 once.
pub fn exact_ece(conf: &[f64], correct: &[bool], bins: usize) -> f64 {
    let zero = big(0.0);
    let mut sum_c = vec![zero.clone(); bins];
    let mut hits = vec![0usize; bins];
    let mut cnt = vec![0usize; bins];
    for (&c, &ok) in conf.iter().zip(correct) {
        let b = ((c * bins as f64) as usize).min(bins - 1);
        sum_c[b] = sum_c[b].add(&big(c), P, RM);
        hits[b] += ok as usize;
        cnt[b] += 1;
    }
    let n = big(conf.len() as f64);
    let mut total = zero;
    for b in (0..bins).filter(|&b| cnt[b] > 0) {
        // (n_b / n) * |hits_b / n_b - sum_b / n_b| = |hits_b - sum_b| / n
        let gap = big(hits[b] as f64).sub(&sum_c[b], P, RM).abs();
        total = total.add(&gap.div(&n, P, RM), P, RM);
    }
    to_f64(&total)
}
