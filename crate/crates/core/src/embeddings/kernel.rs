//! Negative-sampling SGD shared by the skip-gram and PV-DBOW trainers.
//!
//! Weight matrices are accessed through [`Rows`], which has a
//! single-threaded implementation over a plain slice and a lock-free one over
//! relaxed `AtomicU32` bit patterns. Concurrent workers in parallel mode may
//! overwrite each other's updates; every individual load and store is still
//! a well-defined atomic operation.

use std::cell::Cell;
use std::ops::Range;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NoiseSampler, TrainConfig, TrainStats};

pub(super) trait Rows {
    fn load(&self, row: usize, dst: &mut [f32]);
    /// Runs `f` on a mutable view of `row`. `scratch` backs the view when
    /// the storage cannot lend a plain slice.
    fn with_row<T>(&self, row: usize, scratch: &mut Vec<f32>, f: impl FnOnce(&mut [f32]) -> T) -> T;
}

/// Exclusive single-threaded access to a matrix.
pub(super) struct SliceRows<'a> {
    data: &'a [Cell<f32>],
    dim: usize,
}

impl<'a> SliceRows<'a> {
    pub fn new(data: &'a mut [f32], dim: usize) -> Self {
        SliceRows {
            data: Cell::from_mut(data).as_slice_of_cells(),
            dim,
        }
    }
}

impl Rows for SliceRows<'_> {
    #[inline]
    fn load(&self, row: usize, dst: &mut [f32]) {
        let src = &self.data[row * self.dim..(row + 1) * self.dim];
        for (d, s) in dst.iter_mut().zip(src) {
            *d = s.get();
        }
    }

    #[inline]
    fn with_row<T>(&self, row: usize, _scratch: &mut Vec<f32>, f: impl FnOnce(&mut [f32]) -> T) -> T {
        let cells = &self.data[row * self.dim..(row + 1) * self.dim];
        // SAFETY: `Cell<f32>` has the layout of `f32` and permits mutation
        // through a shared reference. `SliceRows` is !Sync, and no other view
        // of these cells is used while `f` runs.
        let view = unsafe { std::slice::from_raw_parts_mut(cells.as_ptr() as *mut f32, cells.len()) };
        f(view)
    }
}

pub(super) struct AtomicRows {
    data: Vec<AtomicU32>,
    dim: usize,
}

impl AtomicRows {
    pub fn new(data: Vec<f32>, dim: usize) -> Self {
        AtomicRows {
            data: data.into_iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
            dim,
        }
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.data
            .into_iter()
            .map(|x| f32::from_bits(x.into_inner()))
            .collect()
    }
}

impl Rows for AtomicRows {
    #[inline]
    fn load(&self, row: usize, dst: &mut [f32]) {
        let src = &self.data[row * self.dim..(row + 1) * self.dim];
        for (d, s) in dst.iter_mut().zip(src) {
            *d = f32::from_bits(s.load(Ordering::Relaxed));
        }
    }

    /// Copies the row out, runs `f`, and stores the result back. Updates
    /// other workers make in between are lost.
    #[inline]
    fn with_row<T>(&self, row: usize, scratch: &mut Vec<f32>, f: impl FnOnce(&mut [f32]) -> T) -> T {
        scratch.resize(self.dim, 0.0);
        self.load(row, scratch);
        let out = f(scratch);
        let dst = &self.data[row * self.dim..(row + 1) * self.dim];
        for (d, &s) in dst.iter().zip(scratch.iter()) {
            d.store(s.to_bits(), Ordering::Relaxed);
        }
        out
    }
}

/// Which row of the "center" matrix predicts which target word.
#[derive(Debug, Clone, Copy)]
pub(super) enum Objective {
    /// Center word predicts each word inside a sampled window.
    SkipGram,
    /// Document vector predicts each of its words.
    DistributedBagOfWords,
}

pub(super) struct Job<'a> {
    pub sequences: &'a [Vec<u32>],
    pub noise: &'a NoiseSampler,
    pub config: &'a TrainConfig,
    pub objective: Objective,
}

impl Job<'_> {
    fn total_positions(&self) -> u64 {
        let per_epoch: u64 = self.sequences.iter().map(|s| s.len() as u64).sum();
        per_epoch * self.config.epochs as u64
    }
}

/// Uniform init in `[-0.5/dim, 0.5/dim)` for `rows` vectors.
pub(super) fn init_uniform(rows: usize, dim: usize, seed: u64) -> Vec<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let half = 0.5 / dim as f32;
    (0..rows * dim).map(|_| rng.random_range(-half..half)).collect()
}

/// Trains `centers` and `outputs` in place and returns the run summary.
pub(super) fn train(job: &Job<'_>, centers: &mut Vec<f32>, outputs: &mut Vec<f32>) -> TrainStats {
    let dim = job.config.dim;
    let total = job.total_positions();
    let progress = AtomicU64::new(0);
    let workers = job.config.workers().min(job.sequences.len()).max(1);

    let last_lr = if workers == 1 {
        let c = SliceRows::new(centers, dim);
        let o = SliceRows::new(outputs, dim);
        run_worker(job, &c, &o, 0..job.sequences.len(), 0, &progress, total)
    } else {
        let c = AtomicRows::new(std::mem::take(centers), dim);
        let o = AtomicRows::new(std::mem::take(outputs), dim);
        let n = job.sequences.len();
        let lrs: Vec<f32> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range = (w * n / workers)..((w + 1) * n / workers);
                    let (c, o, progress) = (&c, &o, &progress);
                    scope.spawn(move || run_worker(job, c, o, range, w as u64, progress, total))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
        });
        *centers = c.into_inner();
        *outputs = o.into_inner();
        lrs.into_iter().fold(f32::INFINITY, f32::min)
    };
    TrainStats {
        last_lr: if total == 0 { job.config.initial_lr } else { last_lr },
        positions: total,
    }
}

fn run_worker<R: Rows>(
    job: &Job<'_>,
    centers: &R,
    outputs: &R,
    docs: Range<usize>,
    stream: u64,
    progress: &AtomicU64,
    total: u64,
) -> f32 {
    let cfg = job.config;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut bufs = Buffers::new(cfg.dim);
    let lr_span = cfg.initial_lr - cfg.final_lr;
    let mut lr = cfg.initial_lr;

    for _ in 0..cfg.epochs {
        for d in docs.clone() {
            let seq = &job.sequences[d];
            for t in 0..seq.len() {
                let done = progress.fetch_add(1, Ordering::Relaxed);
                lr = (cfg.initial_lr - lr_span * (done as f64 / total as f64) as f32).max(cfg.final_lr);
                match job.objective {
                    Objective::SkipGram => {
                        let radius = rng.random_range(1..=cfg.window);
                        let lo = t.saturating_sub(radius);
                        let hi = (t + radius).min(seq.len() - 1);
                        for c in lo..=hi {
                            if c != t {
                                sgd_step(
                                    centers, seq[t] as usize, outputs, seq[c] as usize,
                                    job, lr, &mut rng, &mut bufs,
                                );
                            }
                        }
                    }
                    Objective::DistributedBagOfWords => {
                        sgd_step(centers, d, outputs, seq[t] as usize, job, lr, &mut rng, &mut bufs);
                    }
                }
            }
        }
    }
    lr
}

struct Buffers {
    center: Vec<f32>,
    grad: Vec<f32>,
    scratch: Vec<f32>,
    ops: &'static VecOps,
}

impl Buffers {
    fn new(dim: usize) -> Self {
        Buffers {
            center: vec![0.0; dim],
            grad: vec![0.0; dim],
            scratch: Vec::new(),
            ops: VecOps::detect(),
        }
    }
}

/// One positive and `negatives` noise updates of `centers[center]` against
/// `outputs[target]`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn sgd_step<R: Rows>(
    centers: &R,
    center: usize,
    outputs: &R,
    target: usize,
    job: &Job<'_>,
    lr: f32,
    rng: &mut ChaCha8Rng,
    bufs: &mut Buffers,
) {
    let ops = bufs.ops;
    centers.load(center, &mut bufs.center);
    bufs.grad.iter_mut().for_each(|g| *g = 0.0);
    for k in 0..=job.config.negatives {
        let (word, label) = if k == 0 {
            (target, 1.0)
        } else {
            let w = job.noise.sample(rng);
            if w == target {
                continue;
            }
            (w, 0.0)
        };
        let (c, grad) = (&bufs.center, &mut bufs.grad);
        outputs.with_row(word, &mut bufs.scratch, |out| {
            let g = (label - sigmoid((ops.dot)(c, out))) * lr;
            (ops.update)(out, grad, c, g);
        });
    }
    let grad = &bufs.grad;
    centers.with_row(center, &mut bufs.scratch, |row| (ops.axpy)(row, 1.0, grad));
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Vector routines, picked once per worker for the running CPU.
struct VecOps {
    dot: fn(&[f32], &[f32]) -> f32,
    /// `y += a * x`
    axpy: fn(&mut [f32], f32, &[f32]),
    /// `grad += g * out; out += g * center`, reading `out` before writing it.
    update: fn(&mut [f32], &mut [f32], &[f32], f32),
}

static PORTABLE: VecOps = VecOps {
    dot: portable::dot,
    axpy: portable::axpy,
    update: portable::update,
};

#[cfg(target_arch = "x86_64")]
static AVX2: VecOps = VecOps {
    dot: avx2::dot,
    axpy: avx2::axpy,
    update: avx2::update,
};

impl VecOps {
    fn detect() -> &'static VecOps {
        #[cfg(target_arch = "x86_64")]
        if is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma") {
            return &AVX2;
        }
        &PORTABLE
    }
}

mod portable {
    #[inline]
    pub fn dot(a: &[f32], b: &[f32]) -> f32 {
        // Independent accumulators let the loop vectorize.
        let mut acc = [0.0f32; 8];
        let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
        let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
        for (x, y) in ca.zip(cb) {
            for i in 0..8 {
                acc[i] += x[i] * y[i];
            }
        }
        acc.iter().sum::<f32>() + tail
    }

    #[inline]
    pub fn axpy(y: &mut [f32], a: f32, x: &[f32]) {
        for (y, &x) in y.iter_mut().zip(x) {
            *y += a * x;
        }
    }

    #[inline]
    pub fn update(out: &mut [f32], grad: &mut [f32], center: &[f32], g: f32) {
        for ((o, acc), &c) in out.iter_mut().zip(grad.iter_mut()).zip(center) {
            *acc += g * *o;
            *o += g * c;
        }
    }
}

#[cfg(target_arch = "x86_64")]
mod avx2 {
    use std::arch::x86_64::*;

    pub fn dot(a: &[f32], b: &[f32]) -> f32 {
        // SAFETY: only reachable after AVX2 and FMA were detected.
        unsafe { dot_impl(a, b) }
    }

    pub fn axpy(y: &mut [f32], a: f32, x: &[f32]) {
        // SAFETY: as above.
        unsafe { axpy_impl(y, a, x) }
    }

    pub fn update(out: &mut [f32], grad: &mut [f32], center: &[f32], g: f32) {
        // SAFETY: as above.
        unsafe { update_impl(out, grad, center, g) }
    }

    #[target_feature(enable = "avx2,fma")]
    unsafe fn dot_impl(a: &[f32], b: &[f32]) -> f32 {
        let n = a.len().min(b.len());
        let lanes = n / 16 * 16;
        let (mut s0, mut s1) = (_mm256_setzero_ps(), _mm256_setzero_ps());
        let mut i = 0;
        while i < lanes {
            let (pa, pb) = (a.as_ptr().add(i), b.as_ptr().add(i));
            s0 = _mm256_fmadd_ps(_mm256_loadu_ps(pa), _mm256_loadu_ps(pb), s0);
            s1 = _mm256_fmadd_ps(_mm256_loadu_ps(pa.add(8)), _mm256_loadu_ps(pb.add(8)), s1);
            i += 16;
        }
        let mut lane = [0.0f32; 8];
        _mm256_storeu_ps(lane.as_mut_ptr(), _mm256_add_ps(s0, s1));
        let mut sum: f32 = lane.iter().sum();
        for j in lanes..n {
            sum += a[j] * b[j];
        }
        sum
    }

    #[target_feature(enable = "avx2,fma")]
    unsafe fn axpy_impl(y: &mut [f32], a: f32, x: &[f32]) {
        let n = y.len().min(x.len());
        let lanes = n / 8 * 8;
        let av = _mm256_set1_ps(a);
        let mut i = 0;
        while i < lanes {
            let py = y.as_mut_ptr().add(i);
            _mm256_storeu_ps(py, _mm256_fmadd_ps(av, _mm256_loadu_ps(x.as_ptr().add(i)), _mm256_loadu_ps(py)));
            i += 8;
        }
        for j in lanes..n {
            y[j] += a * x[j];
        }
    }

    #[target_feature(enable = "avx2,fma")]
    unsafe fn update_impl(out: &mut [f32], grad: &mut [f32], center: &[f32], g: f32) {
        let n = out.len().min(grad.len()).min(center.len());
        let lanes = n / 8 * 8;
        let gv = _mm256_set1_ps(g);
        let mut i = 0;
        while i < lanes {
            let po = out.as_mut_ptr().add(i);
            let pg = grad.as_mut_ptr().add(i);
            let o = _mm256_loadu_ps(po);
            _mm256_storeu_ps(pg, _mm256_fmadd_ps(gv, o, _mm256_loadu_ps(pg)));
            _mm256_storeu_ps(po, _mm256_fmadd_ps(gv, _mm256_loadu_ps(center.as_ptr().add(i)), o));
            i += 8;
        }
        for j in lanes..n {
            grad[j] += g * out[j];
            out[j] += g * center[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, scale: f32) -> Vec<f32> {
        (0..n).map(|i| ((i * 7 % 13) as f32 - 6.0) * scale).collect()
    }

    #[test]
    fn vector_ops_agree_with_portable() {
        let ops = VecOps::detect();
        for n in [0, 3, 8, 19, 128] {
            let (a, b) = (sample(n, 0.1), sample(n, -0.03));
            assert!(((ops.dot)(&a, &b) - portable::dot(&a, &b)).abs() < 1e-4);

            let (mut y1, mut y2) = (a.clone(), a.clone());
            (ops.axpy)(&mut y1, 0.5, &b);
            portable::axpy(&mut y2, 0.5, &b);
            assert!(y1.iter().zip(&y2).all(|(p, q)| (p - q).abs() < 1e-5));

            let (mut o1, mut g1) = (a.clone(), b.clone());
            let (mut o2, mut g2) = (a.clone(), b.clone());
            let c = sample(n, 0.2);
            (ops.update)(&mut o1, &mut g1, &c, 0.3);
            portable::update(&mut o2, &mut g2, &c, 0.3);
            assert!(o1.iter().zip(&o2).all(|(p, q)| (p - q).abs() < 1e-5));
            assert!(g1.iter().zip(&g2).all(|(p, q)| (p - q).abs() < 1e-5));
        }
    }

    #[test]
    fn portable_dot_matches_naive() {
        let (a, b) = (sample(19, 0.5), sample(19, 0.1));
        let naive: f32 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((portable::dot(&a, &b) - naive).abs() < 1e-4);
    }

    #[test]
    fn sigmoid_saturates_without_nan() {
        assert_eq!(sigmoid(-1e4), 0.0);
        assert_eq!(sigmoid(1e4), 1.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-7);
    }

    #[test]
    fn slice_and_atomic_rows_agree() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut scratch = Vec::new();
        let rows = SliceRows::new(&mut a, 2);
        rows.with_row(1, &mut scratch, |r| portable::axpy(r, 0.5, &[2.0, 2.0]));
        let atomic = AtomicRows::new(vec![1.0, 2.0, 3.0, 4.0], 2);
        atomic.with_row(1, &mut scratch, |r| portable::axpy(r, 0.5, &[2.0, 2.0]));
        let mut buf = [0.0; 2];
        atomic.load(1, &mut buf);
        assert_eq!(buf, [4.0, 5.0]);
        assert_eq!(atomic.into_inner(), a);
    }
}
