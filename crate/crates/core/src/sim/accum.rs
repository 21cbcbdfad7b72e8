//! One-pass moment accumulation with an associative merge.
//!
//! Means and co-moments follow Welford's update; third and fourth central
//! moments of each coordinate follow Pébay's single-sample and pairwise
//! formulas. They feed the standard error of the sample variance.

#![allow(clippy::needless_range_loop)]

#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    count: u64,
    mean: Vec<f64>,
    /// Row-major `k×k` sum of centered cross products.
    comoment: Vec<f64>,
    m3: Vec<f64>,
    m4: Vec<f64>,
    scratch: Vec<f64>,
}

impl MomentAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            comoment: vec![0.0; dim * dim],
            m3: vec![0.0; dim],
            m4: vec![0.0; dim],
            scratch: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) {
        let k = self.dim();
        debug_assert_eq!(x.len(), k);
        self.count += 1;
        let m = self.count as f64;
        for i in 0..k {
            let delta = x[i] - self.mean[i];
            self.scratch[i] = delta;
            let dn = delta / m;
            let dn2 = dn * dn;
            let term1 = delta * dn * (m - 1.0);
            let m2 = self.comoment[i * k + i];
            self.m4[i] += term1 * dn2 * (m * m - 3.0 * m + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * self.m3[i];
            self.m3[i] += term1 * dn * (m - 2.0) - 3.0 * dn * m2;
            self.mean[i] += dn;
        }
        for i in 0..k {
            let di = self.scratch[i];
            for j in 0..k {
                self.comoment[i * k + j] += di * (x[j] - self.mean[j]);
            }
        }
    }

    /// Combines two disjoint samples; `self` stays on the left.
    pub fn merge(&mut self, other: &Self) {
        let k = self.dim();
        assert_eq!(k, other.dim());
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            let d = delta[i];
            let (m2a, m2b) = (self.comoment[i * k + i], other.comoment[i * k + i]);
            let (m3a, m3b) = (self.m3[i], other.m3[i]);
            self.m4[i] += other.m4[i]
                + d.powi(4) * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
                + 6.0 * d * d * (na * na * m2b + nb * nb * m2a) / (n * n)
                + 4.0 * d * (na * m3b - nb * m3a) / n;
            self.m3[i] += m3b
                + d.powi(3) * na * nb * (na - nb) / (n * n)
                + 3.0 * d * (na * m2b - nb * m2a) / n;
        }
        for i in 0..k {
            for j in 0..k {
                self.comoment[i * k + j] += other.comoment[i * k + j] + delta[i] * delta[j] * na * nb / n;
            }
        }
        for i in 0..k {
            self.mean[i] += delta[i] * nb / n;
        }
        self.count += other.count;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Sample covariance with the `1/(m−1)` correction.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.comoment[i * self.dim() + j] / (self.count - 1) as f64
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.covariance(i, i).max(0.0)
    }

    /// `s / √m`.
    pub fn std_error_of_mean(&self, i: usize) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        (self.variance(i) / self.count as f64).sqrt()
    }

    /// Plug-in standard error of the sample variance,
    /// `√((μ₄ − σ⁴(m−3)/(m−1)) / m)`.
    pub fn std_error_of_variance(&self, i: usize) -> f64 {
        if self.count < 4 {
            return 0.0;
        }
        let m = self.count as f64;
        let mu4 = self.m4[i] / m;
        let s2 = self.variance(i);
        ((mu4 - s2 * s2 * (m - 3.0) / (m - 1.0)).max(0.0) / m).sqrt()
    }

    pub fn fourth_central_moment(&self, i: usize) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m4[i] / self.count as f64
        }
    }
}
