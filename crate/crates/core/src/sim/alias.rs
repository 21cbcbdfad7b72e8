use rand::Rng;

/// Vose alias table for O(1) categorical draws.
#[derive(Debug, Clone)]
pub struct AliasTable {
    accept: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// `weights` must be non-negative with a positive sum; they need not be
    /// normalized.
    pub fn new(weights: &[f64]) -> Self {
        let len = weights.len();
        assert!(len > 0, "alias table needs at least one category");
        let total: f64 = weights.iter().sum();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * len as f64 / total).collect();
        let mut accept = vec![1.0; len];
        let mut alias: Vec<usize> = (0..len).collect();

        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..len).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // leftovers are 1 up to rounding
        for i in small.into_iter().chain(large) {
            accept[i] = 1.0;
        }
        Self { accept, alias }
    }

    pub fn len(&self) -> usize {
        self.accept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accept.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.accept.len());
        if rng.random::<f64>() < self.accept[i] {
            i
        } else {
            self.alias[i]
        }
    }

    /// Probability mass the table assigns to each category.
    pub fn implied_probabilities(&self) -> Vec<f64> {
        let len = self.len() as f64;
        let mut p = vec![0.0; self.len()];
        for (i, (&a, &j)) in self.accept.iter().zip(&self.alias).enumerate() {
            p[i] += a / len;
            p[j] += (1.0 - a) / len;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_reproduces_weights() {
        let w = [0.5, 0.2, 0.15, 0.1, 0.05];
        let p = AliasTable::new(&w).implied_probabilities();
        for (a, b) in p.iter().zip(w) {
            assert!((a - b).abs() < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn uniform_table_never_aliases() {
        let t = AliasTable::new(&[1.0; 7]);
        assert!(t.accept.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn empirical_frequencies() {
        let w = [0.6, 0.3, 0.1];
        let t = AliasTable::new(&w);
        let mut rng = super::super::rng::replicate_stream(1, 0);
        let m = 200_000;
        let mut hits = [0usize; 3];
        for _ in 0..m {
            hits[t.sample(&mut rng)] += 1;
        }
        for (h, p) in hits.iter().zip(w) {
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((*h as f64 / m as f64 - p).abs() < 5.0 * se);
        }
    }
}
