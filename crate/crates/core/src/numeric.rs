//! Log-domain accumulation primitives.
//!
//! Configuration weights reach e^1140 at the lattice sizes used in the
//! experiments, so every sum of weights in this crate is carried as a
//! running log-sum-exp. Signed accumulation covers the dual factors of
//! antiferromagnetic edges, whose odd entry 4 sinh J is negative.

/// log(e^a + e^b) without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// log(e^a - e^b) for a >= b; returns -inf when the difference underflows.
pub fn log_diff_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a <= b {
        return f64::NEG_INFINITY;
    }
    a + (-((b - a).exp())).ln_1p()
}

/// Streaming log-sum-exp over a sequence of log-domain terms.
///
/// Tracks the running maximum and a sum rescaled by it, so pushes are O(1)
/// and the result is exact up to ordinary floating-point rounding. Merging
/// two accumulators gives the same value as accumulating the concatenated
/// stream (associativity up to rounding).
#[derive(Debug, Clone, Copy, Default)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
    count: u64,
}

impl LogSumExp {
    pub fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
            count: 0,
        }
    }

    pub fn push(&mut self, lw: f64) {
        self.count += 1;
        if self.count == 1 {
            self.max = lw;
            self.scaled = if lw == f64::NEG_INFINITY { 0.0 } else { 1.0 };
            return;
        }
        if lw <= self.max {
            self.scaled += (lw - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - lw).exp() + 1.0;
            self.max = lw;
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// ln of the accumulated sum; -inf for an empty accumulator.
    pub fn ln_sum(&self) -> f64 {
        if self.count == 0 || self.scaled == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + self.scaled.ln()
    }
}

/// Log-domain sum of signed terms, kept as separate positive and negative
/// log-sum-exp parts.
#[derive(Debug, Clone, Copy, Default)]
pub struct SignedLogSum {
    pos: LogSumExp,
    neg: LogSumExp,
}

impl SignedLogSum {
    pub fn new() -> Self {
        SignedLogSum {
            pos: LogSumExp::new(),
            neg: LogSumExp::new(),
        }
    }

    pub fn push(&mut self, ln_abs: f64, negative: bool) {
        if negative {
            self.neg.push(ln_abs);
        } else {
            self.pos.push(ln_abs);
        }
    }

    pub fn merge(&mut self, other: &SignedLogSum) {
        self.pos.merge(&other.pos);
        self.neg.merge(&other.neg);
    }

    /// (ln |sum|, sum < 0). A fully cancelled sum reports (-inf, false).
    pub fn ln_abs_sum(&self) -> (f64, bool) {
        let p = self.pos.ln_sum();
        let n = self.neg.ln_sum();
        if p >= n {
            (log_diff_exp(p, n), false)
        } else {
            (log_diff_exp(n, p), true)
        }
    }
}

/// Running log-domain mean of exponentials, with enough state to report an
/// empirical standard error of the log-mean.
///
/// For terms y_k = e^{l_k} this tracks ln Σ y_k and ln Σ y_k², giving
/// ln(mean y) and SE[ln(mean y)] ≈ SD(y) / (√K · mean y) by the delta
/// method, both evaluated without leaving the log domain.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningLogMean {
    sum: LogSumExp,
    sum_sq: LogSumExp,
}

impl RunningLogMean {
    pub fn new() -> Self {
        RunningLogMean {
            sum: LogSumExp::new(),
            sum_sq: LogSumExp::new(),
        }
    }

    pub fn push(&mut self, lw: f64) {
        self.sum.push(lw);
        self.sum_sq.push(2.0 * lw);
    }

    pub fn merge(&mut self, other: &RunningLogMean) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.sum.count()
    }

    /// ln((1/K) Σ e^{l_k}).
    pub fn log_mean(&self) -> f64 {
        let k = self.count();
        if k == 0 {
            return f64::NEG_INFINITY;
        }
        self.sum.ln_sum() - (k as f64).ln()
    }

    /// Empirical standard error of `log_mean()`; 0 for degenerate streams.
    pub fn se_of_log_mean(&self) -> f64 {
        let k = self.count();
        if k < 2 {
            return 0.0;
        }
        let kf = k as f64;
        let lm = self.log_mean();
        if lm == f64::NEG_INFINITY {
            return 0.0;
        }
        // ln Var = ln(mean(y²) - mean(y)²) + ln(K/(K-1)), then
        // SE[ln mean] = exp(ln SD - ln √K - ln mean).
        let ln_mean_sq = self.sum_sq.ln_sum() - kf.ln();
        let ln_var = log_diff_exp(ln_mean_sq, 2.0 * lm) + (kf / (kf - 1.0)).ln();
        if ln_var == f64::NEG_INFINITY {
            return 0.0;
        }
        (0.5 * ln_var - 0.5 * kf.ln() - lm).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_matches_naive_in_range() {
        assert_relative_eq!(log_sum_exp(0.5, 2.0), (0.5f64.exp() + 2.0f64.exp()).ln());
        assert_relative_eq!(log_sum_exp(2.0, 0.5), (0.5f64.exp() + 2.0f64.exp()).ln());
    }

    #[test]
    fn pairwise_survives_huge_arguments() {
        // naive evaluation overflows to inf here
        let v = log_sum_exp(1234.0, 1232.0);
        assert_relative_eq!(v, 1234.0 + (1.0 + (-2.0f64).exp()).ln(), epsilon = 1e-12);
        assert!((1234.0f64.exp() + 1232.0f64.exp()).is_infinite());
    }

    #[test]
    fn neg_infinity_is_the_additive_identity() {
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert_eq!(log_sum_exp(3.0, f64::NEG_INFINITY), 3.0);
    }

    #[test]
    fn accumulator_matches_pairwise() {
        let terms = [0.3, -5.0, 12.0, 11.9, f64::NEG_INFINITY, 0.0];
        let mut acc = LogSumExp::new();
        let mut expect = f64::NEG_INFINITY;
        for &t in &terms {
            acc.push(t);
            expect = log_sum_exp(expect, t);
        }
        assert_relative_eq!(acc.ln_sum(), expect, epsilon = 1e-12);
        assert_eq!(acc.count(), 6);
    }

    #[test]
    fn accumulator_of_zeros_is_exact() {
        let mut acc = LogSumExp::new();
        for _ in 0..1024 {
            acc.push(0.0);
        }
        assert_eq!(acc.ln_sum(), 1024f64.ln());
    }

    #[test]
    fn signed_sum_cancels_and_orders() {
        let mut s = SignedLogSum::new();
        s.push(2.0f64.ln(), false);
        s.push(3.0f64.ln(), true);
        let (ln_abs, negative) = s.ln_abs_sum();
        assert!(negative);
        assert_relative_eq!(ln_abs, 1.0f64.ln(), epsilon = 1e-12);

        s.push(5.0f64.ln(), false);
        let (ln_abs, negative) = s.ln_abs_sum();
        assert!(!negative);
        assert_relative_eq!(ln_abs, 4.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn signed_sum_exact_cancellation_is_zero() {
        let mut s = SignedLogSum::new();
        s.push(1.5, false);
        s.push(1.5, true);
        let (ln_abs, _) = s.ln_abs_sum();
        assert_eq!(ln_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn running_mean_and_se_match_direct_computation() {
        let lws: [f64; 6] = [0.1, -0.4, 0.9, 0.0, 0.3, -1.2];
        let ys: Vec<f64> = lws.iter().map(|l| l.exp()).collect();
        let mean: f64 = ys.iter().sum::<f64>() / ys.len() as f64;
        let var: f64 =
            ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (ys.len() as f64 - 1.0);
        let se_log = (var / ys.len() as f64).sqrt() / mean;

        let mut acc = RunningLogMean::new();
        for &l in &lws {
            acc.push(l);
        }
        assert_relative_eq!(acc.log_mean(), mean.ln(), epsilon = 1e-12);
        assert_relative_eq!(acc.se_of_log_mean(), se_log, epsilon = 1e-9);
    }

    #[test]
    fn constant_stream_has_zero_se() {
        let mut acc = RunningLogMean::new();
        for _ in 0..100 {
            acc.push(0.0);
        }
        assert_eq!(acc.log_mean(), 0.0);
        assert_eq!(acc.se_of_log_mean(), 0.0);
    }

    mod prop {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // merging two accumulators == accumulating the concatenation
            #[test]
            fn merge_is_concatenation(
                xs in proptest::collection::vec(-50.0f64..50.0, 1..40),
                ys in proptest::collection::vec(-50.0f64..50.0, 1..40),
            ) {
                let mut a = RunningLogMean::new();
                for &x in &xs { a.push(x); }
                let mut b = RunningLogMean::new();
                for &y in &ys { b.push(y); }
                a.merge(&b);

                let mut whole = RunningLogMean::new();
                for &x in xs.iter().chain(ys.iter()) { whole.push(x); }

                prop_assert!((a.log_mean() - whole.log_mean()).abs() < 1e-12);
                prop_assert_eq!(a.count(), whole.count());
            }

            #[test]
            fn lse_merge_is_concatenation(
                xs in proptest::collection::vec(-700.0f64..700.0, 1..30),
                ys in proptest::collection::vec(-700.0f64..700.0, 1..30),
            ) {
                let mut a = LogSumExp::new();
                for &x in &xs { a.push(x); }
                let mut b = LogSumExp::new();
                for &y in &ys { b.push(y); }
                a.merge(&b);

                let mut whole = LogSumExp::new();
                for &x in xs.iter().chain(ys.iter()) { whole.push(x); }

                let rel = (a.ln_sum() - whole.ln_sum()).abs()
                    / whole.ln_sum().abs().max(1.0);
                prop_assert!(rel < 1e-12);
            }
        }
    }
}
