//! Independent reference computations for the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// `exp(-|a - b|^2 / sigma^2)` evaluated directly.
pub fn exact_kernel(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let mut d2 = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        d2 += d * d;
    }
    (-d2 / (sigma * sigma)).exp()
}

/// Two-pass sample covariance between the columns of `a` and `b` (rows are samples).
pub fn batch_cross_cov(a: &[Vec<f64>], b: &[Vec<f64>]) -> DMatrix<f64> {
    let n = a.len();
    let (p, d) = (a[0].len(), b[0].len());
    let mut ma = vec![0.0; p];
    let mut mb = vec![0.0; d];
    for k in 0..n {
        for i in 0..p {
            ma[i] += a[k][i];
        }
        for j in 0..d {
            mb[j] += b[k][j];
        }
    }
    ma.iter_mut().for_each(|x| *x /= n as f64);
    mb.iter_mut().for_each(|x| *x /= n as f64);
    let mut s = DMatrix::zeros(p, d);
    for k in 0..n {
        for i in 0..p {
            for j in 0..d {
                s[(i, j)] += (a[k][i] - ma[i]) * (b[k][j] - mb[j]);
            }
        }
    }
    s / (n as f64 - 1.0)
}

pub fn rel_frobenius(got: &DMatrix<f64>, want: &DMatrix<f64>) -> f64 {
    let scale = want.norm().max(f64::MIN_POSITIVE);
    (got - want).norm() / scale
}

/// One agent's online Lagrangian, coded term by term. `old_w[i], old_rho[i]` are every
/// agent's current estimates (this agent included) and `own` is this agent's index.
pub struct Lagrangian {
    pub z: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub eta: f64,
    pub old_w: Vec<Vec<f64>>,
    pub old_rho: Vec<f64>,
    pub own: usize,
}

impl Lagrangian {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// `x = (w, rho)`; the slack is already eliminated through the box on lambda.
    pub fn value(&self, x: &[f64], lambda: f64) -> f64 {
        let d = self.dim();
        let (w, rho) = (&x[..d], x[d]);
        let mut v = 0.0;
        for k in 0..d {
            v += 0.5 * w[k] * w[k];
        }
        v -= rho;
        let mut zw = 0.0;
        for k in 0..d {
            zw += self.z[k] * w[k];
        }
        v += lambda * (rho - zw);
        for k in 0..d {
            v += 2.0 * self.alpha[k] * w[k];
        }
        v += 2.0 * self.beta * rho;
        let wj = &self.old_w[self.own];
        let rj = self.old_rho[self.own];
        for (wi, &ri) in self.old_w.iter().zip(&self.old_rho) {
            for k in 0..d {
                let m = 0.5 * (wj[k] + wi[k]);
                v += 0.5 * self.eta * (w[k] - m) * (w[k] - m);
            }
            let m = 0.5 * (rj + ri);
            v += 0.5 * self.eta * (rho - m) * (rho - m);
        }
        v
    }

    /// Central differences with step `h`.
    pub fn gradient(&self, x: &[f64], lambda: f64, h: f64) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for k in 0..x.len() {
            xp[k] = x[k] + h;
            let fp = self.value(&xp, lambda);
            xp[k] = x[k] - h;
            let fm = self.value(&xp, lambda);
            xp[k] = x[k];
            g[k] = (fp - fm) / (2.0 * h);
        }
        g
    }

    /// `min_x L(x, lambda)` built from the Hessian and linear term recovered by unit
    /// differences, which are exact for a quadratic.
    pub fn dual_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        let n = self.dim() + 1;
        let zero = vec![0.0; n];
        let unit = |k: usize, s: f64| {
            let mut e = zero.clone();
            e[k] = s;
            e
        };
        let f0 = self.value(&zero, 0.0);
        let mut hess = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                let mut pp = zero.clone();
                pp[k] += 1.0;
                pp[l] += 1.0;
                let mut pm = zero.clone();
                pm[k] += 1.0;
                pm[l] -= 1.0;
                let mut mp = zero.clone();
                mp[k] -= 1.0;
                mp[l] += 1.0;
                let mut mm = zero.clone();
                mm[k] -= 1.0;
                mm[l] -= 1.0;
                hess[(k, l)] =
                    (self.value(&pp, 0.0) - self.value(&pm, 0.0) - self.value(&mp, 0.0) + self.value(&mm, 0.0)) / 4.0;
            }
        }
        let lin = |lambda: f64| {
            DVector::from_iterator(
                n,
                (0..n).map(|k| (self.value(&unit(k, 1.0), lambda) - self.value(&unit(k, -1.0), lambda)) / 2.0),
            )
        };
        let g0 = lin(0.0);
        let g1 = lin(1.0) - &g0;
        let c1 = self.value(&zero, 1.0) - f0;
        let inv = hess.try_inverse().expect("Hessian is positive definite");
        move |lambda: f64| {
            let g = &g0 + g1.scale(lambda);
            f0 + c1 * lambda - 0.5 * g.dot(&(&inv * &g))
        }
    }
}

/// Grid maximizer of `f` over `[lo, hi]` with `n` evenly spaced points.
pub fn grid_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let mut best = (f64::NEG_INFINITY, lo);
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let v = f(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// `n` draws from `N(mean, cov)` through a Cholesky factor.
pub fn gaussian_samples(
    rng: &mut impl rand::Rng,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    n: usize,
) -> Vec<DVector<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let chol = cov.clone().cholesky().expect("covariance is positive definite").l();
    (0..n)
        .map(|_| {
            let e = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| -> f64 { StandardNormal.sample(rng) }));
            mean + &chol * e
        })
        .collect()
}

/// Bit patterns, for exact state comparisons.
pub fn bits(xs: impl IntoIterator<Item = f64>) -> Vec<u64> {
    xs.into_iter().map(f64::to_bits).collect()
}
