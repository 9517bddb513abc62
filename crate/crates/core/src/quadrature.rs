//! Globally adaptive 21-point Gauss–Kronrod quadrature for small vector
//! integrands, so a value and its parameter derivative share every
//! integrand evaluation.

use crate::error::{Error, Result};

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
    0.123_491_976_262_065_851_077_208_643_474_262,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    /// Estimated absolute error per component.
    pub error: [f64; K],
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
}

impl<const K: usize> Segment<K> {
    fn worst(&self) -> f64 {
        self.error.iter().fold(0.0, |m, e| m.max(*e))
    }
}

fn kronrod<const K: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<K>>
where
    F: FnMut(f64) -> Result<[f64; K]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut gauss = [0.0; K];
    let mut kron = [0.0; K];
    for k in 0..K {
        kron[k] = fc[k] * WGK[10];
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for k in 0..K {
            let s = f1[k] + f2[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for k in 0..K {
        value[k] = kron[k] * half;
        error[k] = ((kron[k] - gauss[k]) * half).abs();
    }
    Ok(Segment { a, b, value, error })
}

/// Integrate `f` over the union of consecutive intervals given by
/// `breakpoints` (ascending, at least two entries).
///
/// Refinement bisects the interval with the largest error until every
/// component satisfies `error ≤ max(abs_tol, rel_tol·|value|)`.
pub fn integrate<const K: usize, F>(mut f: F, breakpoints: &[f64], cfg: QuadConfig) -> Result<QuadResult<K>>
where
    F: FnMut(f64) -> Result<[f64; K]>,
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return crate::error::domain("quadrature breakpoints must be strictly ascending");
    }
    let mut segments: Vec<Segment<K>> = Vec::with_capacity(64);
    for w in breakpoints.windows(2) {
        segments.push(kronrod(&mut f, w[0], w[1])?);
    }
    loop {
        let (value, error) = totals(&segments);
        let converged = (0..K).all(|k| error[k] <= cfg.abs_tol.max(cfg.rel_tol * value[k].abs()));
        if converged {
            return Ok(QuadResult { value, error, intervals: segments.len() });
        }
        if segments.len() >= cfg.max_intervals {
            let worst = (0..K).max_by(|&i, &j| error[i].total_cmp(&error[j])).unwrap_or(0);
            return Err(Error::Quadrature {
                value: value[0],
                achieved: error[worst],
                requested: cfg.abs_tol.max(cfg.rel_tol * value[worst].abs()),
                intervals: segments.len(),
            });
        }
        let idx = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.worst().total_cmp(&y.1.worst()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(kronrod(&mut f, seg.a, mid)?);
        segments.push(kronrod(&mut f, mid, seg.b)?);
    }
}

fn totals<const K: usize>(segments: &[Segment<K>]) -> ([f64; K], [f64; K]) {
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for s in segments {
        for k in 0..K {
            value[k] += s.value[k];
            error[k] += s.error[k];
        }
    }
    (value, error)
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate::<1, _>(|x| Ok([f(x)]), &[a, b], cfg)?;
    Ok((r.value[0], r.error[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let r = integrate::<1, _>(|x| Ok([x.powi(18) - 3.0 * x.powi(7)]), &[-1.0, 2.0], QuadConfig::default()).unwrap();
        let exact = (2f64.powi(19) + 1.0) / 19.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((r.value[0] - exact).abs() < 1e-9 * exact.abs());
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let (v, _) = integrate_scalar(|x| (40.0 * x).cos(), 0.0, 3.0, QuadConfig::default()).unwrap();
        assert!((v - (120.0f64).sin() / 40.0).abs() < 1e-12);
    }

    #[test]
    fn vector_components_are_independent() {
        let r = integrate::<2, _>(|x| Ok([x.exp(), x.sin()]), &[0.0, 0.5, 1.0], QuadConfig::default()).unwrap();
        assert!((r.value[0] - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!((r.value[1] - (1.0 - 1f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn exhausted_budget_reports_achieved_error() {
        let cfg = QuadConfig { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 3 };
        let err = integrate_scalar(|x| (1.0 / x.max(1e-300)).sin(), 1e-3, 1.0, cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { intervals: 3, .. }));
    }
}
