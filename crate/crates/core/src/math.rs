//! Scalar math that routes to the platform libm under `std` and to the
//! pure-Rust `libm` crate otherwise.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn tanh(x: f64) -> f64 {
        x.tanh()
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        x.powf(y)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        x.floor()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn tanh(x: f64) -> f64 {
        libm::tanh(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
}

pub use imp::*;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp(-x))
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
/// 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits.
const ROUND_MAGIC: f64 = 6_755_399_441_055_744.0;

/// Branch-free `exp` for the activation kernels, accurate to a few ulp on
/// `[-708, 709]` and saturating outside it. Written so loops over slices
/// vectorize.
#[inline(always)]
fn exp_kernel(x: f64) -> f64 {
    let x = x.clamp(-708.0, 709.0);
    let t = x * core::f64::consts::LOG2_E + ROUND_MAGIC;
    let k = t - ROUND_MAGIC;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    // Taylor polynomial on |r| <= ln2 / 2.
    let mut p = 1.0 / 6_227_020_800.0;
    p = p * r + 1.0 / 479_001_600.0;
    p = p * r + 1.0 / 39_916_800.0;
    p = p * r + 1.0 / 3_628_800.0;
    p = p * r + 1.0 / 362_880.0;
    p = p * r + 1.0 / 40_320.0;
    p = p * r + 1.0 / 5_040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // 2^k from the rounded integer sitting in the low bits of `t`.
    let scale = f64::from_bits(t.to_bits().wrapping_add(1023) << 52);
    p * scale
}

#[inline(always)]
fn sigmoid_body(values: &mut [f64]) {
    for v in values {
        *v = 1.0 / (1.0 + exp_kernel(-*v));
    }
}

#[inline(always)]
fn tanh_body(values: &mut [f64]) {
    for v in values {
        *v = 1.0 - 2.0 / (exp_kernel(2.0 * *v) + 1.0);
    }
}

/// Wider-vector builds of the loops above. The arithmetic is unchanged (no
/// fused multiply-add), so results are bit-identical to the baseline build.
#[cfg(all(feature = "std", target_arch = "x86_64"))]
mod wide {
    #[target_feature(enable = "avx2")]
    pub(super) fn sigmoid(values: &mut [f64]) {
        super::sigmoid_body(values)
    }

    #[target_feature(enable = "avx2")]
    pub(super) fn tanh(values: &mut [f64]) {
        super::tanh_body(values)
    }
}

/// Logistic function applied in place.
pub fn sigmoid_slice(values: &mut [f64]) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    if std::is_x86_feature_detected!("avx2") {
        // SAFETY: the required CPU feature was detected at runtime.
        return unsafe { wide::sigmoid(values) };
    }
    sigmoid_body(values)
}

/// Hyperbolic tangent applied in place.
pub fn tanh_slice(values: &mut [f64]) {
    #[cfg(all(feature = "std", target_arch = "x86_64"))]
    if std::is_x86_feature_detected!("avx2") {
        // SAFETY: the required CPU feature was detected at runtime.
        return unsafe { wide::tanh(values) };
    }
    tanh_body(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_exp_matches_libm() {
        let mut worst = 0.0f64;
        let mut x = -700.0;
        while x < 700.0 {
            let rel = ((exp_kernel(x) - libm::exp(x)) / libm::exp(x)).abs();
            worst = worst.max(rel);
            x += 0.0137;
        }
        assert!(worst < 1e-15, "worst relative error {worst}");
        assert_eq!(exp_kernel(0.0), 1.0);
        assert_eq!(exp_kernel(-1e6), exp_kernel(-708.0));
        assert!(exp_kernel(1e6).is_finite());
    }

    #[test]
    fn activation_slices_match_scalar_forms() {
        let xs: alloc::vec::Vec<f64> = (-4000..4000).map(|i| i as f64 * 0.01).collect();
        let mut s = xs.clone();
        let mut t = xs.clone();
        sigmoid_slice(&mut s);
        tanh_slice(&mut t);
        for ((x, s), t) in xs.iter().zip(&s).zip(&t) {
            assert!((s - sigmoid(*x)).abs() < 1e-15);
            assert!((t - libm::tanh(*x)).abs() < 1e-15);
            assert!(*s > 0.0 && *s <= 1.0 && t.abs() <= 1.0);
        }
        let mut z = [0.0];
        tanh_slice(&mut z);
        assert_eq!(z[0], 0.0);
    }
}
