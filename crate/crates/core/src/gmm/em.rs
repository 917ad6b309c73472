use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{log_sum_exp, EmConfig, Gmm, GmmError};

/// Frames per E-step work unit. Partial sums are reduced in chunk order, so
/// results do not depend on how chunks are scheduled across threads.
const CHUNK: usize = 2048;

#[derive(Debug, Clone)]
pub struct EmFit {
    pub gmm: Gmm,
    /// Mean per-frame log-likelihood before each M-step, plus the final model's.
    pub log_likelihoods: Vec<f64>,
    /// Number of M-steps performed.
    pub iterations: usize,
    pub converged: bool,
}

impl EmFit {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihoods.last().expect("trace is never empty")
    }
}

struct Stats {
    log_lik: f64,
    nk: Array1<f64>,
    sx: Array2<f64>,
    sxx: Array2<f64>,
}

impl Stats {
    fn zeros(k: usize, d: usize) -> Self {
        Self { log_lik: 0.0, nk: Array1::zeros(k), sx: Array2::zeros((k, d)), sxx: Array2::zeros((k, d)) }
    }

    fn add(&mut self, other: &Stats) {
        self.log_lik += other.log_lik;
        self.nk += &other.nk;
        self.sx += &other.sx;
        self.sxx += &other.sxx;
    }
}

fn chunk_stats(gmm: &Gmm, frames: ArrayView2<f64>) -> Stats {
    let (k, d) = (gmm.n_components(), gmm.dim());
    let mut st = Stats::zeros(k, d);
    let mut lj = vec![0.0; k];
    for frame in frames.rows() {
        gmm.log_joint(frame, &mut lj);
        let lse = log_sum_exp(&lj);
        st.log_lik += lse;
        for c in 0..k {
            let r = (lj[c] - lse).exp();
            if r == 0.0 {
                continue;
            }
            st.nk[c] += r;
            let mut sx = st.sx.row_mut(c);
            for (acc, x) in sx.iter_mut().zip(frame.iter()) {
                *acc += r * x;
            }
            let mut sxx = st.sxx.row_mut(c);
            for (acc, x) in sxx.iter_mut().zip(frame.iter()) {
                *acc += r * x * x;
            }
        }
    }
    st
}

fn e_step(gmm: &Gmm, frames: ArrayView2<f64>) -> Stats {
    let chunks: Vec<ArrayView2<f64>> = frames.axis_chunks_iter(Axis(0), CHUNK).collect();
    #[cfg(feature = "parallel")]
    let partial: Vec<Stats> = {
        use rayon::prelude::*;
        chunks.par_iter().map(|c| chunk_stats(gmm, *c)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Stats> = chunks.iter().map(|c| chunk_stats(gmm, *c)).collect();

    let mut total = Stats::zeros(gmm.n_components(), gmm.dim());
    for p in &partial {
        total.add(p);
    }
    total
}

fn m_step(prev: &Gmm, st: &Stats, var_floor: f64) -> Gmm {
    let (k, d) = (prev.n_components(), prev.dim());
    let total: f64 = st.nk.sum();
    let mut means = prev.means.clone();
    let mut variances = prev.variances.clone();
    let mut weights = Vec::with_capacity(k);
    for c in 0..k {
        let nk = st.nk[c];
        weights.push(nk / total);
        // an emptied component keeps its parameters; its weight is ~0
        if nk <= f64::MIN_POSITIVE * 1e3 {
            continue;
        }
        for j in 0..d {
            let mean = st.sx[[c, j]] / nk;
            means[[c, j]] = mean;
            variances[[c, j]] = (st.sxx[[c, j]] / nk - mean * mean).max(var_floor);
        }
    }
    Gmm::from_parts(weights, means, variances)
}

/// k-means++ seeding: first centre uniform, then proportional to squared
/// distance from the nearest chosen centre.
fn init_means(frames: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let m = frames.nrows();
    let mut means = Array2::zeros((k, frames.ncols()));
    let first = rng.gen_range(0..m);
    means.row_mut(0).assign(&frames.row(first));
    let sq_dist = |a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let mut nearest: Vec<f64> = frames.rows().into_iter().map(|f| sq_dist(f, frames.row(first))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            nearest
                .iter()
                .position(|d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or(m - 1)
        } else {
            rng.gen_range(0..m)
        };
        means.row_mut(c).assign(&frames.row(pick));
        for (i, f) in frames.rows().into_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(f, frames.row(pick)));
        }
    }
    means
}

/// Fit a diagonal GMM to the rows of `frames` (`M × D`) by EM.
pub fn em_fit(frames: ArrayView2<f64>, cfg: &EmConfig) -> Result<EmFit, GmmError> {
    cfg.validate()?;
    let (m, d) = frames.dim();
    if m < cfg.k {
        return Err(GmmError::TooFewFrames { k: cfg.k, frames: m });
    }
    if d == 0 {
        return Err(GmmError::InvalidModel("frames have zero dimensions".into()));
    }
    if frames.iter().any(|v| !v.is_finite()) {
        return Err(GmmError::NonFinite);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let means = init_means(frames, cfg.k, &mut rng);
    let global_mean = frames.mean_axis(Axis(0)).expect("m >= 1");
    let global_var = frames
        .axis_iter(Axis(1))
        .zip(global_mean.iter())
        .map(|(col, mu)| (col.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m as f64).max(cfg.var_floor))
        .collect::<Vec<_>>();
    let variances = Array2::from_shape_fn((cfg.k, d), |(_, j)| global_var[j]);
    let mut gmm = Gmm::from_parts(vec![1.0 / cfg.k as f64; cfg.k], means, variances);

    let mut trace = Vec::with_capacity(cfg.max_iters + 1);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let stats = e_step(&gmm, frames);
        let ll = stats.log_lik / m as f64;
        if let Some(&prev) = trace.last() {
            debug_assert!(ll >= prev - 1e-8, "EM log-likelihood decreased: {prev} -> {ll}");
            if ll - prev < cfg.rel_tol * f64::abs(prev) {
                converged = true;
            }
        }
        trace.push(ll);
        if converged || iterations == cfg.max_iters {
            break;
        }
        gmm = m_step(&gmm, &stats, cfg.var_floor);
        iterations += 1;
    }
    Ok(EmFit { gmm, log_likelihoods: trace, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    // uniform on ±0.173 has variance ~0.01
    fn clusters(seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((1000, 2), |(i, _)| if i < 500 { 0.0 } else { 10.0 } + rng.gen_range(-0.173..0.173))
    }

    #[test]
    fn log_likelihood_never_decreases() {
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(20..120);
            let x = Array2::from_shape_fn((m, 3), |_| rng.gen_range(-3.0..3.0f64).powi(3));
            let fit = em_fit(x.view(), &EmConfig { k: 4, max_iters: 20, rel_tol: 0.0, seed, ..Default::default() })
                .unwrap();
            for w in fit.log_likelihoods.windows(2) {
                assert!(w[1] >= w[0] - 1e-8, "seed {seed}: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn single_component_is_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((200, 3), |(_, j)| rng.gen_range(-1.0..1.0) * (j + 1) as f64);
        let fit = em_fit(x.view(), &EmConfig { k: 1, ..Default::default() }).unwrap();
        let mean = x.mean_axis(Axis(0)).unwrap();
        let var = x.var_axis(Axis(0), 0.0);
        assert!((fit.gmm.weights()[0] - 1.0).abs() < 1e-9);
        for j in 0..3 {
            assert!((fit.gmm.means()[[0, j]] - mean[j]).abs() < 1e-9);
            assert!((fit.gmm.variances()[[0, j]] - var[j].max(1e-6)).abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_two_clusters() {
        let x = clusters(11);
        let fit = em_fit(x.view(), &EmConfig { k: 2, seed: 5, ..Default::default() }).unwrap();
        let g = &fit.gmm;
        let (lo, hi) = if g.means()[[0, 0]] < g.means()[[1, 0]] { (0, 1) } else { (1, 0) };
        for j in 0..2 {
            assert!(g.means()[[lo, j]].abs() < 0.05);
            assert!((g.means()[[hi, j]] - 10.0).abs() < 0.05);
        }
        assert!((g.weights()[0] - 0.5).abs() < 0.05);
    }

    #[test]
    fn responsibilities_normalised() {
        let x = clusters(2);
        let fit = em_fit(x.view(), &EmConfig { k: 4, max_iters: 5, ..Default::default() }).unwrap();
        for f in x.rows().into_iter().step_by(37) {
            let r = fit.gmm.responsibilities(f).unwrap();
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_frames_hit_the_floor() {
        let x = Array2::from_elem((50, 4), 0.25);
        let fit = em_fit(x.view(), &EmConfig { k: 3, ..Default::default() }).unwrap();
        assert!(fit.iterations <= 2);
        assert!(fit.converged);
        assert!(fit.gmm.variances().iter().all(|&v| v == 1e-6));
    }

    #[test]
    fn rejects_bad_input() {
        let x = Array2::zeros((3, 2));
        assert!(matches!(
            em_fit(x.view(), &EmConfig { k: 4, ..Default::default() }),
            Err(GmmError::TooFewFrames { k: 4, frames: 3 })
        ));
        let mut y = Array2::zeros((10, 2));
        y[[3, 1]] = f64::NAN;
        assert!(matches!(em_fit(y.view(), &EmConfig { k: 1, ..Default::default() }), Err(GmmError::NonFinite)));
        assert!(em_fit(y.view(), &EmConfig { k: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn deterministic() {
        let x = clusters(4);
        let cfg = EmConfig { k: 3, seed: 9, ..Default::default() };
        let a = em_fit(x.view(), &cfg).unwrap();
        let b = em_fit(x.view(), &cfg).unwrap();
        assert_eq!(a.gmm, b.gmm);
        assert_eq!(a.log_likelihoods, b.log_likelihoods);
    }

    #[test]
    fn max_iters_bounds_m_steps() {
        let x = clusters(8);
        let fit = em_fit(x.view(), &EmConfig { k: 5, max_iters: 2, rel_tol: 0.0, ..Default::default() }).unwrap();
        assert_eq!(fit.iterations, 2);
        assert_eq!(fit.log_likelihoods.len(), 3);
        assert!(!fit.converged);
    }
}
