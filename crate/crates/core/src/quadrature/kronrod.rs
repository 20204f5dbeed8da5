//! 21-point Gauss–Kronrod rule with the embedded 10-point Gauss rule.
//!
//! Abscissae and weights are the QUADPACK `qk21` tables.

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
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

pub(crate) const NODES: usize = 21;

/// Abscissae of the rule mapped onto `[lo, hi]`, in a fixed order:
/// the centre first, then symmetric pairs from the outside in.
pub(crate) fn abscissae(lo: f64, hi: f64) -> [f64; NODES] {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut xs = [center; NODES];
    for j in 0..10 {
        let d = half * XGK[j];
        xs[1 + 2 * j] = center - d;
        xs[2 + 2 * j] = center + d;
    }
    xs
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// Applies the rule to one component given its 21 samples (ordered as in
/// [`abscissae`]). Returns `(kronrod estimate, error estimate)`.
pub(crate) fn apply(samples: &[f64; NODES], half_len: f64) -> (f64, f64) {
    let f_center = samples[0];
    let mut res_kronrod = WGK[10] * f_center;
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    for j in 0..10 {
        let f1 = samples[1 + 2 * j];
        let f2 = samples[2 + 2 * j];
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        // Gauss nodes are the odd-indexed Kronrod abscissae.
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((samples[1 + 2 * j] - mean).abs() + (samples[2 + 2 * j] - mean).abs());
    }
    let h = half_len.abs();
    let err = (res_kronrod - res_gauss) * half_len;
    let value = res_kronrod * half_len;
    (value, rescale_error(err, res_abs * h, res_asc * h))
}
