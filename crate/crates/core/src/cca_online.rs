//! Streaming canonical correlation analysis for the VL pairs carried by one PL.
//!
//! Each VL feeds `(u, y)` = (upstream VN features, downstream VN features). The tracker
//! keeps running means and centered scatter matrices, the model is refit from them, and
//! the residual between the two canonical projections is scored with a T² statistic.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTracker {
    pub count: usize,
    pub mean_u: DVector<f64>,
    pub mean_y: DVector<f64>,
    pub scatter_uu: DMatrix<f64>,
    pub scatter_yy: DMatrix<f64>,
    pub scatter_uy: DMatrix<f64>,
}

fn column_mean<T: AsRef<[f64]>>(rows: &[T], dim: usize) -> DVector<f64> {
    let mut m = DVector::zeros(dim);
    for r in rows {
        m += DVector::from_column_slice(r.as_ref());
    }
    m / rows.len() as f64
}

impl CovarianceTracker {
    pub fn dim_u(&self) -> usize {
        self.mean_u.len()
    }

    pub fn dim_y(&self) -> usize {
        self.mean_y.len()
    }

    /// Means and centered cross-product sums of an initial batch.
    pub fn init<U: AsRef<[f64]>, Y: AsRef<[f64]>>(u_batch: &[U], y_batch: &[Y]) -> Result<Self> {
        if u_batch.len() != y_batch.len() {
            return Err(Error::DimensionMismatch { expected: u_batch.len(), got: y_batch.len() });
        }
        if u_batch.len() < 2 {
            return Err(Error::TooFewSamples { need: 2, got: u_batch.len() });
        }
        let p = u_batch[0].as_ref().len();
        let d = y_batch[0].as_ref().len();
        if p == 0 || d == 0 {
            return Err(Error::InvalidDimension("empty sample vector".into()));
        }
        for (u, y) in u_batch.iter().zip(y_batch) {
            if u.as_ref().len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: u.as_ref().len() });
            }
            if y.as_ref().len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: y.as_ref().len() });
            }
        }
        let mean_u = column_mean(u_batch, p);
        let mean_y = column_mean(y_batch, d);
        let mut scatter_uu = DMatrix::zeros(p, p);
        let mut scatter_yy = DMatrix::zeros(d, d);
        let mut scatter_uy = DMatrix::zeros(p, d);
        for (u, y) in u_batch.iter().zip(y_batch) {
            let du = DVector::from_column_slice(u.as_ref()) - &mean_u;
            let dy = DVector::from_column_slice(y.as_ref()) - &mean_y;
            scatter_uu += &du * du.transpose();
            scatter_yy += &dy * dy.transpose();
            scatter_uy += &du * dy.transpose();
        }
        Ok(Self { count: u_batch.len(), mean_u, mean_y, scatter_uu, scatter_yy, scatter_uy })
    }

    /// Rank-one correction with weight `t/(t+1)` against the old means.
    pub fn update(&mut self, u: &[f64], y: &[f64]) -> Result<()> {
        if u.len() != self.dim_u() {
            return Err(Error::DimensionMismatch { expected: self.dim_u(), got: u.len() });
        }
        if y.len() != self.dim_y() {
            return Err(Error::DimensionMismatch { expected: self.dim_y(), got: y.len() });
        }
        let t = self.count as f64;
        let k = t / (t + 1.0);
        let du = &self.mean_u - DVector::from_column_slice(u);
        let dy = &self.mean_y - DVector::from_column_slice(y);
        self.scatter_uu.ger(k, &du, &du, 1.0);
        self.scatter_yy.ger(k, &dy, &dy, 1.0);
        self.scatter_uy.ger(k, &du, &dy, 1.0);
        for (m, x) in self.mean_u.iter_mut().zip(u) {
            *m = (t * *m + x) / (t + 1.0);
        }
        for (m, x) in self.mean_y.iter_mut().zip(y) {
            *m = (t * *m + x) / (t + 1.0);
        }
        self.count += 1;
        Ok(())
    }

    /// `(Sigma_U, Sigma_Y, Sigma_UY)` with divisor `count - 1`.
    pub fn covariances(&self) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        if self.count < 2 {
            return Err(Error::TooFewSamples { need: 2, got: self.count });
        }
        let c = (self.count - 1) as f64;
        Ok((&self.scatter_uu / c, &self.scatter_yy / c, &self.scatter_uy / c))
    }
}

pub fn init_tracker<U: AsRef<[f64]>, Y: AsRef<[f64]>>(u_batch: &[U], y_batch: &[Y]) -> Result<CovarianceTracker> {
    CovarianceTracker::init(u_batch, y_batch)
}

pub fn update_tracker(tracker: &CovarianceTracker, u: &[f64], y: &[f64]) -> Result<CovarianceTracker> {
    let mut next = tracker.clone();
    next.update(u, y)?;
    Ok(next)
}

/// `M^(-1/2)` through the symmetric eigendecomposition, eigenvalues floored at `floor`.
pub fn inv_sqrt_psd(m: &DMatrix<f64>, floor: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-8 {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let scales = eig.eigenvalues.map(|l| 1.0 / l.max(floor).sqrt());
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&scales) * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcaModel {
    /// `p x kappa`
    pub j: DMatrix<f64>,
    /// `d x kappa`
    pub l: DMatrix<f64>,
    /// Canonical correlations, non-increasing, in [0, 1].
    pub sigma_k: DVector<f64>,
    pub mean_u: DVector<f64>,
    pub mean_y: DVector<f64>,
    pub kappa: usize,
    pub floor: f64,
}

/// SVD of the whitened cross-covariance, truncated to `min(p, d)` directions.
pub fn fit_cca(tracker: &CovarianceTracker, floor: f64) -> Result<CcaModel> {
    let (su, sy, suy) = tracker.covariances()?;
    let iu = inv_sqrt_psd(&su, floor)?;
    let iy = inv_sqrt_psd(&sy, floor)?;
    let k = &iu * suy * &iy;
    let kappa = k.nrows().min(k.ncols());
    let svd = k.svd(true, true);
    let r = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").transpose();

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let order = &order[..kappa];
    let r = r.select_columns(order);
    let v = v.select_columns(order);
    let sigma_k = DVector::from_iterator(kappa, order.iter().map(|&i| svd.singular_values[i].clamp(0.0, 1.0)));

    Ok(CcaModel {
        j: iu * r,
        l: iy * v,
        sigma_k,
        mean_u: tracker.mean_u.clone(),
        mean_y: tracker.mean_y.clone(),
        kappa,
        floor,
    })
}

/// `J'(u - mean_u) - diag(sigma) L'(y - mean_y)`
pub fn residual(model: &CcaModel, u: &[f64], y: &[f64]) -> Result<DVector<f64>> {
    if u.len() != model.mean_u.len() {
        return Err(Error::DimensionMismatch { expected: model.mean_u.len(), got: u.len() });
    }
    if y.len() != model.mean_y.len() {
        return Err(Error::DimensionMismatch { expected: model.mean_y.len(), got: y.len() });
    }
    let du = DVector::from_column_slice(u) - &model.mean_u;
    let dy = DVector::from_column_slice(y) - &model.mean_y;
    let pu = model.j.tr_mul(&du);
    let py = model.l.tr_mul(&dy);
    Ok(pu - py.component_mul(&model.sigma_k))
}

/// `r' (I - diag(sigma)^2)^-1 r`, each variance floored.
pub fn t2_score(model: &CcaModel, r: &DVector<f64>) -> Result<f64> {
    if r.len() != model.kappa {
        return Err(Error::DimensionMismatch { expected: model.kappa, got: r.len() });
    }
    Ok(r.iter().zip(model.sigma_k.iter()).map(|(ri, s)| ri * ri / (1.0 - s * s).max(model.floor)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlVerdict {
    pub time: usize,
    pub per_vl_scores: Vec<f64>,
    pub threshold: f64,
    pub is_anomalous: bool,
    /// Equal to `!is_anomalous` unless rollback is disabled.
    pub committed: bool,
}

/// Trackers of every VL mapped onto one PL.
#[derive(Debug, Clone, PartialEq)]
pub struct PlDetector {
    pub trackers: Vec<CovarianceTracker>,
    pub floor: f64,
    pub rollback: bool,
}

impl PlDetector {
    pub fn new(trackers: Vec<CovarianceTracker>) -> Self {
        Self { trackers, floor: DEFAULT_FLOOR, rollback: true }
    }

    /// Unconditional update of every tracker.
    pub fn absorb(&mut self, pairs: &[(&[f64], &[f64])]) -> Result<()> {
        self.check_pairs(pairs)?;
        for (tr, (u, y)) in self.trackers.iter_mut().zip(pairs) {
            tr.update(u, y)?;
        }
        Ok(())
    }

    pub fn models(&self) -> Result<Vec<CcaModel>> {
        self.trackers.iter().map(|t| fit_cca(t, self.floor)).collect()
    }

    fn check_pairs(&self, pairs: &[(&[f64], &[f64])]) -> Result<()> {
        if pairs.len() != self.trackers.len() {
            return Err(Error::DimensionMismatch { expected: self.trackers.len(), got: pairs.len() });
        }
        Ok(())
    }

    pub fn step(&mut self, time: usize, pairs: &[(&[f64], &[f64])], threshold: f64) -> Result<PlVerdict> {
        pl_step(self, time, pairs, threshold)
    }
}

/// Provisional update, refit, and score of the new pair for every VL. The updates are kept
/// only if every score is within the threshold.
pub fn pl_step(
    detector: &mut PlDetector,
    time: usize,
    pairs: &[(&[f64], &[f64])],
    threshold: f64,
) -> Result<PlVerdict> {
    detector.check_pairs(pairs)?;
    let mut next = Vec::with_capacity(pairs.len());
    let mut per_vl_scores = Vec::with_capacity(pairs.len());
    for (tr, (u, y)) in detector.trackers.iter().zip(pairs) {
        let provisional = update_tracker(tr, u, y)?;
        let model = fit_cca(&provisional, detector.floor)?;
        per_vl_scores.push(t2_score(&model, &residual(&model, u, y)?)?);
        next.push(provisional);
    }
    let is_anomalous = per_vl_scores.iter().any(|&s| s > threshold);
    let committed = !is_anomalous || !detector.rollback;
    if committed {
        detector.trackers = next;
    }
    Ok(PlVerdict { time, per_vl_scores, threshold, is_anomalous, committed })
}
