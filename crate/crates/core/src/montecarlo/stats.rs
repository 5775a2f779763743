use serde::{Deserialize, Serialize};

/// Running `(count, mean, M2)` summary; `merge` is associative and
/// commutative up to rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn single(x: f64) -> Self {
        Self {
            count: 1,
            mean: x,
            m2: 0.0,
        }
    }

    pub fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / n as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        Self { count: n, mean, m2 }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Fixed-shape binary tree reduction, bitwise reproducible for a given
/// input order.
pub fn pairwise(values: &[f64]) -> Welford {
    match values.len() {
        0 => Welford::default(),
        1 => Welford::single(values[0]),
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise(l).merge(pairwise(r))
        }
    }
}

/// Two-sided Kolmogorov–Smirnov test of `sample` against `cdf`; returns
/// `(D, p-value)` from the asymptotic Kolmogorov distribution.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_survival(lambda))
}

fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, 2.5, -3.0, 7.25];
        let mut w = Welford::default();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((w.mean - mean).abs() < 1e-14 && (w.variance() - var).abs() < 1e-13);
        let p = pairwise(&xs);
        assert!((p.mean - mean).abs() < 1e-14 && (p.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn ks_accepts_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let (d, p) = ks_test(&xs, |x| x.clamp(0.0, 1.0));
        assert!(d < 1e-3 && p > 0.99);
        let (_, p) = ks_test(&xs, |x| (x * x).clamp(0.0, 1.0));
        assert!(p < 1e-6);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(xs in proptest::collection::vec(-1e3f64..1e3, 2..60), cut in 1usize..59) {
            let cut = cut.min(xs.len() - 1);
            let (a, b) = xs.split_at(cut);
            let (wa, wb) = (pairwise(a), pairwise(b));
            let ab = wa.merge(wb);
            let ba = wb.merge(wa);
            prop_assert_eq!(ab.count, xs.len() as u64);
            prop_assert!((ab.mean - ba.mean).abs() <= 1e-12 * (1.0 + ab.mean.abs()));
            prop_assert!((ab.m2 - ba.m2).abs() <= 1e-9 * (1.0 + ab.m2.abs()));
            let mut seq = Welford::default();
            xs.iter().for_each(|&x| seq.push(x));
            prop_assert!((seq.mean - ab.mean).abs() <= 1e-10 * (1.0 + ab.mean.abs()));
            prop_assert!((seq.m2 - ab.m2).abs() <= 1e-8 * (1.0 + ab.m2.abs()));
        }
    }
}
