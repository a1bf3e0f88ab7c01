//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued
//! integrands on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

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

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, ..., 9).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFailure {
    pub intervals: usize,
    pub estimated_error: f64,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    // weighted error used for ordering
    key: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn kronrod<const N: usize, F>(f: &mut F, a: f64, b: f64) -> ([f64; N], [f64; N])
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for c in 0..N {
        k[c] = fc[c] * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for c in 0..N {
            let s = f1[c] + f2[c];
            k[c] += WGK[j] * s;
            if j % 2 == 1 {
                g[c] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        value[c] = k[c] * half;
        error[c] = ((k[c] - g[c]) * half).abs();
    }
    (value, error)
}

/// Integrates `f` over the union of consecutive intervals given by
/// `breakpoints` (sorted, at least two entries). Refinement continues until
/// the summed error of every component is below `rel_tol` times the
/// magnitude of that component's integral (or below `abs_tol`).
pub fn integrate<const N: usize, F>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<[f64; N], QuadratureFailure>
where
    F: FnMut(f64) -> [f64; N],
{
    integrate_coupled(f, breakpoints, rel_tol, abs_tol, 0.0, max_intervals)
}

/// Like [`integrate`], but every component is also accepted once its error
/// is below `rel_tol * coupling * |first component|`. Useful when later
/// components are derivatives that may cross zero.
pub fn integrate_coupled<const N: usize, F>(
    mut f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    coupling: f64,
    max_intervals: usize,
) -> Result<[f64; N], QuadratureFailure>
where
    F: FnMut(f64) -> [f64; N],
{
    debug_assert!(breakpoints.len() >= 2);
    let mut heap: BinaryHeap<Piece<N>> = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let mut pieces = Vec::with_capacity(breakpoints.len());
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            let (v, e) = kronrod(&mut f, w[0], w[1]);
            for c in 0..N {
                total[c] += v[c];
                total_err[c] += e[c];
            }
            pieces.push((w[0], w[1], v, e));
        }
    }
    let floor = |tot: &[f64; N], c: usize| tot[c].abs().max(coupling * tot[0].abs()).max(abs_tol);
    let weigh = |err: &[f64; N], tot: &[f64; N]| -> f64 {
        let mut key = 0.0;
        for c in 0..N {
            key += err[c] / floor(tot, c).max(f64::MIN_POSITIVE);
        }
        key
    };
    for (a, b, value, error) in pieces {
        let key = weigh(&error, &total);
        heap.push(Piece { a, b, value, error, key });
    }
    let converged = |tot: &[f64; N], err: &[f64; N]| {
        (0..N).all(|c| err[c] <= rel_tol * floor(tot, c) || err[c] <= abs_tol)
    };
    let mut count = heap.len();
    while !converged(&total, &total_err) {
        if count >= max_intervals {
            let worst = (0..N)
                .map(|c| total_err[c] / floor(&total, c))
                .fold(0.0, f64::max);
            return Err(QuadratureFailure { intervals: count, estimated_error: worst });
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval cannot be split further in floating point
            let worst = (0..N)
                .map(|c| total_err[c] / floor(&total, c))
                .fold(0.0, f64::max);
            return Err(QuadratureFailure { intervals: count, estimated_error: worst });
        }
        let (v1, e1) = kronrod(&mut f, p.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, p.b);
        for c in 0..N {
            total[c] += v1[c] + v2[c] - p.value[c];
            total_err[c] += e1[c] + e2[c] - p.error[c];
        }
        heap.push(Piece { a: p.a, b: mid, value: v1, error: e1, key: weigh(&e1, &total) });
        heap.push(Piece { a: mid, b: p.b, value: v2, error: e2, key: weigh(&e2, &total) });
        count += 1;
    }
    // re-sum from the pieces to shed the drift of incremental updates
    let mut out = [0.0; N];
    for p in heap.iter() {
        for c in 0..N {
            out[c] += p.value[c];
        }
    }
    Ok(out)
}
