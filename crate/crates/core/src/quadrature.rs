//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued
//! integrands, plus a tangent map for integrals over the whole real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// QUADPACK qk21 abscissae (descending, positive half) and weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of interval bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_subdivisions: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Estimated absolute error, max-norm over components.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// One K21 panel with its embedded G10 error estimate.
fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Panel
where
    F: FnMut(f64, &mut [f64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    f(center, buf);
    for k in 0..dim {
        kron[k] += WGK[10] * buf[k];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        for x in [center - dx, center + dx] {
            f(x, buf);
            for k in 0..dim {
                kron[k] += WGK[j] * buf[k];
                if j % 2 == 1 {
                    gauss[k] += WG[j / 2] * buf[k];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for k in 0..dim {
        kron[k] *= half;
        gauss[k] *= half;
        err = err.max((kron[k] - gauss[k]).abs());
    }
    Panel {
        a,
        b,
        value: kron,
        error: err,
    }
}

/// Integrates a vector-valued `f` over `[a, b]`, split first at `breaks`.
///
/// `f(x, out)` writes `dim` components into `out`. Panels are bisected in
/// order of decreasing error until the total error estimate drops below
/// `max(abs_tol, rel_tol·‖I‖∞)`.
pub fn integrate_vec<F>(mut f: F, dim: usize, a: f64, b: f64, breaks: &[f64], opts: &QuadOptions) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    points.push(a);
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        heap.push(kronrod(&mut f, w[0], w[1], dim, &mut buf));
        evaluations += 21;
    }

    let sum = |heap: &BinaryHeap<Panel>| {
        let mut total = vec![0.0; dim];
        let mut error = 0.0;
        for p in heap.iter() {
            for k in 0..dim {
                total[k] += p.value[k];
            }
            error += p.error;
        }
        (total, error)
    };

    let (mut total, mut error) = sum(&heap);
    let mut subdivisions = 0;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * max_norm(&total));
        if error <= target || subdivisions >= opts.max_subdivisions {
            // Resum to shed the drift of the running totals.
            let (total, error) = sum(&heap);
            return QuadResult {
                value: total,
                error,
                evaluations,
                converged: error <= target,
            };
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval can no longer be split in floating point.
            error -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            subdivisions += 1;
            continue;
        }
        let left = kronrod(&mut f, worst.a, mid, dim, &mut buf);
        let right = kronrod(&mut f, mid, worst.b, dim, &mut buf);
        for k in 0..dim {
            total[k] += left.value[k] + right.value[k] - worst.value[k];
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        evaluations += 42;
        subdivisions += 1;
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> QuadResult
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), 1, a, b, &[], opts)
}

/// Integrates over the whole real line through `ω = scale·tan θ`.
///
/// `breaks` are given in `ω` and mapped to `θ`, so resonances can be pinned.
/// The integrand must decay at least as fast as `1/ω²` for the mapped
/// integrand to stay bounded at the endpoints.
pub fn integrate_real_line<F>(mut f: F, dim: usize, scale: f64, breaks: &[f64], opts: &QuadOptions) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta_breaks: Vec<f64> = breaks.iter().map(|&w| (w / scale).atan()).collect();
    integrate_vec(
        |theta, out| {
            let t = theta.tan();
            let w = scale * t;
            let jac = scale * (1.0 + t * t);
            if !w.is_finite() {
                out.iter_mut().for_each(|v| *v = 0.0);
                return;
            }
            f(w, out);
            out.iter_mut().for_each(|v| *v *= jac);
        },
        dim,
        -half_pi,
        half_pi,
        &theta_breaks,
        opts,
    )
}

/// Fails with a numerical error unless the estimate met its tolerance.
pub fn require_converged(r: QuadResult, context: &'static str, rel_tol: f64) -> Result<QuadResult> {
    let scale = max_norm(&r.value);
    if r.converged || r.error <= rel_tol * scale {
        Ok(r)
    } else {
        Err(Error::numerical(
            context,
            format!("quadrature error estimate {:.3e} (relative {:.3e})", r.error, r.error / scale.max(f64::MIN_POSITIVE)),
        ))
    }
}
