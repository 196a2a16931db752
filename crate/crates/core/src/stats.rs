//! Hypothesis-testing primitives: paired two-tailed t test, two-sample
//! Kolmogorov-Smirnov test, Bonferroni correction, empirical permutation
//! p-values.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Outcome of a single hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom; set by the t test only.
    pub df: Option<f64>,
}

/// Paired two-tailed t test on the differences x_i - y_i.
///
/// t = mean(d) / (sd(d)/sqrt(n)) with the sample (n-1) standard deviation,
/// df = n - 1. When every difference is identical the sd is 0 and the test
/// degenerates: p = 1 if the mean is also 0 (no evidence), else p = 0; the
/// reported statistic saturates at +/-f64::MAX to stay finite.
pub fn paired_t_test(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / nf;
    let ssq = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>();
    let df = nf - 1.0;
    let (statistic, p_value) = if ssq == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::MAX.copysign(mean), 0.0)
        }
    } else {
        let sd = (ssq / df).sqrt();
        let t = mean / (sd / nf.sqrt());
        (t, student_t_two_tailed_p(t, df))
    };
    Ok(TestResult {
        statistic,
        p_value,
        df: Some(df),
    })
}

/// Two-tailed Student-t tail probability, 2*P(T >= |t|), through the
/// regularized incomplete beta function: I_x(df/2, 1/2) at x = df/(df + t^2).
///
/// Monotone non-increasing in |t|; exactly 1 at t = 0.
pub fn student_t_two_tailed_p(t: f64, df: f64) -> f64 {
    debug_assert!(df > 0.0, "degrees of freedom must be positive");
    let x = df / (df + t * t);
    reg_inc_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Regularized incomplete beta I_x(a, b) by the continued fraction, switched
/// at the standard crossover so the fraction always converges from the fast
/// side.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    // The iteration cap covers extreme df (~1e6); convergence there needs on
    // the order of sqrt(a) steps.
    const MAX_ITER: usize = 4000;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// D is the largest gap between the two empirical CDFs, found by a sorted
/// merge; the p-value is the asymptotic Kolmogorov tail at
/// lambda = (sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)) * D with the effective size
/// n_e = |x||y|/(|x|+|y|).
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let nx = xs.len() as f64;
    let ny = ys.len() as f64;
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        // Step both CDFs past the smallest remaining value, then look at the
        // gap; ties must advance together before the gap is read.
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        let gap = (i as f64 / nx - j as f64 / ny).abs();
        if gap > d {
            d = gap;
        }
    }
    let n_e = nx * ny / (nx + ny);
    let sqrt_ne = n_e.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    Ok(TestResult {
        statistic: d,
        p_value: kolmogorov_tail(lambda),
        df: None,
    })
}

/// Q(lambda) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), truncated once
/// a term falls below 1e-10. Near lambda = 0 the series does not shrink; if
/// the cutoff is never reached the tail saturates at its supremum, 1.
fn kolmogorov_tail(lambda: f64) -> f64 {
    const TERM_CUTOFF: f64 = 1e-10;
    const MAX_TERMS: usize = 1000;
    let neg_two_l2 = -2.0 * lambda * lambda;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=MAX_TERMS {
        let term = (neg_two_l2 * (j * j) as f64).exp();
        sum += sign * term;
        if term < TERM_CUTOFF {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    1.0
}

/// Bonferroni decision over a family of p-values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BonferroniOutcome {
    pub reject: bool,
    /// The corrected threshold alpha / m.
    pub threshold: f64,
    pub min_p: f64,
    /// Index of the smallest p-value (first one on ties).
    pub argmin_dim: usize,
}

/// Rejects iff min(p) < alpha/m, m = number of p-values.
pub fn bonferroni_reject(p_values: &[f64], alpha: f64) -> Result<BonferroniOutcome> {
    if p_values.is_empty() {
        return Err(Error::EmptySample);
    }
    debug_assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    let mut min_p = f64::INFINITY;
    let mut argmin_dim = 0;
    for (i, &p) in p_values.iter().enumerate() {
        if p < min_p {
            min_p = p;
            argmin_dim = i;
        }
    }
    let threshold = alpha / p_values.len() as f64;
    Ok(BonferroniOutcome {
        reject: min_p < threshold,
        threshold,
        min_p,
        argmin_dim,
    })
}

/// Fraction of permutation distances at least as extreme as the observed one:
/// (1/B) * sum of 1{|d_b| >= |d|}. Ties count.
pub fn empirical_p_value(d: f64, d_perm: &[f64]) -> Result<f64> {
    if d_perm.is_empty() {
        return Err(Error::EmptyPermutations);
    }
    let extreme = d_perm.iter().filter(|&&db| db.abs() >= d.abs()).count();
    Ok(extreme as f64 / d_perm.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    #[test]
    fn t_tail_at_zero_is_one() {
        assert_eq!(student_t_two_tailed_p(0.0, 5.0), 1.0);
    }

    #[test]
    fn t_tail_cauchy_quartile() {
        // df = 1 is the Cauchy distribution; |T| >= 1 has probability 1/2.
        assert_relative_eq!(student_t_two_tailed_p(1.0, 1.0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn t_tail_matches_critical_value_table() {
        let p = student_t_two_tailed_p(2.042, 30.0);
        assert!((p - 0.050).abs() < 0.001, "p = {p}");
    }

    #[test]
    fn t_tail_approaches_gaussian_for_large_df() {
        let p = student_t_two_tailed_p(1.96, 1e6);
        assert!((p - 0.05).abs() < 0.001, "p = {p}");
    }

    #[test]
    fn t_tail_is_monotone_in_magnitude() {
        let df = 7.0;
        let mut last = 1.0;
        for i in 0..200 {
            let t = i as f64 * 0.1;
            let p = student_t_two_tailed_p(t, df);
            assert!(p <= last + 1e-15, "p rose at t = {t}");
            last = p;
        }
    }

    #[test]
    fn paired_t_zero_mean_alternating() {
        let x = vec![-1.0, 1.0, -1.0, 1.0];
        let y = vec![0.0; 4];
        let r = paired_t_test(&x, &y).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, Some(3.0));
    }

    #[test]
    fn paired_t_degenerate_constant_differences() {
        let x = vec![2.0, 2.0, 2.0, 2.0];
        let y = vec![0.0; 4];
        let r = paired_t_test(&x, &y).unwrap();
        assert_eq!(r.p_value, 0.0);
        let r0 = paired_t_test(&y, &y).unwrap();
        assert_eq!(r0.p_value, 1.0);
    }

    #[test]
    fn paired_t_known_value() {
        // Differences with mean exactly 1 and sample sd exactly 1, n = 10.
        let x = vec![2.5, -0.5, 2.5, -0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let y = vec![0.0; 10];
        let r = paired_t_test(&x, &y).unwrap();
        assert_relative_eq!(r.statistic, 10f64.sqrt(), epsilon = 1e-12);
        assert_eq!(r.df, Some(9.0));
        assert!((r.p_value - 0.01150).abs() < 5e-5, "p = {}", r.p_value);
    }

    #[test]
    fn paired_t_swap_negates_statistic() {
        let x = vec![0.3, 1.2, -0.7, 0.4, 2.2];
        let y = vec![0.1, 0.9, 0.2, -0.3, 1.0];
        let a = paired_t_test(&x, &y).unwrap();
        let b = paired_t_test(&y, &x).unwrap();
        assert_eq!(a.statistic, -b.statistic);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn paired_t_input_checks() {
        assert_eq!(
            paired_t_test(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        );
        assert_eq!(
            paired_t_test(&[1.0], &[1.0]),
            Err(Error::TooFewSamples { needed: 2, got: 1 })
        );
    }

    #[test]
    fn ks_disjoint_supports() {
        let r = ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn ks_interleaved() {
        let r = ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.5);
    }

    #[test]
    fn ks_identical_samples() {
        let x = vec![0.3, -1.0, 2.5, 0.3];
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_empty_is_rejected() {
        assert_eq!(ks_two_sample(&[], &[1.0]), Err(Error::EmptySample));
    }

    #[test]
    fn ks_d_invariant_under_monotone_transform() {
        let x = vec![0.1, 0.7, -2.0, 1.4, 0.0];
        let y = vec![0.5, -0.1, 0.2, 2.2];
        let f = |v: f64| (3.0 * v).exp();
        let before = ks_two_sample(&x, &y).unwrap().statistic;
        let tx: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let ty: Vec<f64> = y.iter().map(|&v| f(v)).collect();
        let after = ks_two_sample(&tx, &ty).unwrap().statistic;
        assert_eq!(before, after);
    }

    #[test]
    fn bonferroni_examples() {
        let a = bonferroni_reject(&[0.2, 0.3], 0.05).unwrap();
        assert!(!a.reject);
        let b = bonferroni_reject(&[0.0004, 0.9], 0.05).unwrap();
        assert!(b.reject);
        assert_eq!(b.threshold, 0.025);
        assert_eq!(b.argmin_dim, 0);
        // Boundary: 100 p-values of 0.0006 against 0.05/100 = 0.0005.
        let c = bonferroni_reject(&[0.0006; 100], 0.05).unwrap();
        assert!(!c.reject);
    }

    #[test]
    fn empirical_p_value_examples() {
        assert_eq!(empirical_p_value(0.0, &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(empirical_p_value(5.0, &[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(empirical_p_value(2.0, &[-3.0, 1.0, 2.0, -2.0]).unwrap(), 0.75);
        assert_eq!(empirical_p_value(1.0, &[]), Err(Error::EmptyPermutations));
    }
}
