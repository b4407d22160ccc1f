//! Exact unit marginals by enumerating every joint assignment of a tiny corpus.
//!
//! θ and φ are integrated out analytically, so each assignment is weighted by
//! a product of Dirichlet-multinomial terms, times the transition factor
//! between consecutive units when the chain is on.

use statrs::function::gamma::ln_gamma;

pub struct Instance {
    pub codes: Vec<Vec<usize>>,
    pub num_units: usize,
    pub vocab_size: usize,
    pub alpha: Vec<f64>,
    /// Row-major `num_units x vocab_size`.
    pub beta: Vec<f64>,
    /// Self-transition weight; `None` for the bag-of-codes model.
    pub self_transition: Option<f64>,
}

fn ln_dirichlet_multinomial(prior: &[f64], counts: &[usize]) -> f64 {
    let a0: f64 = prior.iter().sum();
    let n: usize = counts.iter().sum();
    let mut s = ln_gamma(a0) - ln_gamma(a0 + n as f64);
    for (a, &c) in prior.iter().zip(counts) {
        s += ln_gamma(a + c as f64) - ln_gamma(*a);
    }
    s
}

impl Instance {
    pub fn ln_weight(&self, z: &[usize]) -> f64 {
        let k = self.num_units;
        let v = self.vocab_size;
        let mut w = 0.0;
        let mut unit_code = vec![0usize; k * v];
        let mut i = 0;
        for codes in &self.codes {
            let mut counts = vec![0usize; k];
            for (pos, &code) in codes.iter().enumerate() {
                let zi = z[i + pos];
                counts[zi] += 1;
                unit_code[zi * v + code] += 1;
                if let (Some(a), true) = (self.self_transition, pos > 0) {
                    let prev = z[i + pos - 1];
                    w += if prev == zi { a.ln() } else { 0.0 };
                }
            }
            w += ln_dirichlet_multinomial(&self.alpha, &counts);
            i += codes.len();
        }
        for unit in 0..k {
            w += ln_dirichlet_multinomial(&self.beta[unit * v..(unit + 1) * v], &unit_code[unit * v..(unit + 1) * v]);
        }
        w
    }

    /// Posterior marginal of every token's unit, utterance by utterance.
    pub fn marginals(&self) -> Vec<Vec<Vec<f64>>> {
        let k = self.num_units;
        let total: usize = self.codes.iter().map(Vec::len).sum();
        let count = k.pow(total as u32);
        let mut z = vec![0usize; total];
        let mut lws = Vec::with_capacity(count);
        let mut assignments = Vec::with_capacity(count);
        for mut idx in 0..count {
            for zi in z.iter_mut() {
                *zi = idx % k;
                idx /= k;
            }
            lws.push(self.ln_weight(&z));
            assignments.push(z.clone());
        }
        let max = lws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut flat = vec![vec![0.0; k]; total];
        let mut norm = 0.0;
        for (lw, z) in lws.iter().zip(&assignments) {
            let p = (lw - max).exp();
            norm += p;
            for (i, &zi) in z.iter().enumerate() {
                flat[i][zi] += p;
            }
        }
        let mut out = Vec::new();
        let mut it = flat.into_iter().map(|m| m.into_iter().map(|x| x / norm).collect::<Vec<f64>>());
        for codes in &self.codes {
            out.push(it.by_ref().take(codes.len()).collect());
        }
        out
    }
}
