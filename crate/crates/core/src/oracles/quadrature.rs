//! Globally adaptive 7/15-point Gauss-Kronrod quadrature for vector-valued integrands.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_MAX_SEGMENTS: usize = 2000;

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Segment
where
    F: FnMut(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for s in nodes {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(c + s * h * x, buf);
            for j in 0..dim {
                k[j] += w * buf[j];
                if i % 2 == 1 {
                    g[j] += WG[i / 2] * buf[j];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for j in 0..dim {
        k[j] *= h;
        g[j] *= h;
        err = err.max((k[j] - g[j]).abs());
    }
    Segment {
        a,
        b,
        value: k,
        err,
    }
}

/// Integrates `f` over `[a, b]` until the summed per-segment error estimate
/// (max over components) falls below `abs_tol`. `f` writes `dim` values.
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    abs_tol: f64,
    max_segments: usize,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if a == b {
        return Ok(vec![0.0; dim]);
    }
    let mut buf = vec![0.0; dim];
    let mut segs = vec![kronrod(&mut f, a, b, dim, &mut buf)];
    loop {
        let total: f64 = segs.iter().map(|s| s.err).sum();
        if total <= abs_tol {
            break;
        }
        if segs.len() >= max_segments {
            return Err(Error::Quadrature(format!(
                "error estimate {total:.3e} above {abs_tol:.1e} after {max_segments} segments"
            )));
        }
        let (worst, _) =
            segs.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, s)| if s.err > acc.1 { (i, s.err) } else { acc },
            );
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature(format!(
                "segment [{}, {}] cannot be bisected further",
                s.a, s.b
            )));
        }
        segs.push(kronrod(&mut f, s.a, mid, dim, &mut buf));
        segs.push(kronrod(&mut f, mid, s.b, dim, &mut buf));
    }
    let mut out = vec![0.0; dim];
    for s in &segs {
        for (o, v) in out.iter_mut().zip(&s.value) {
            *o += v;
        }
    }
    Ok(out)
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(
        |x, out| out[0] = f(x),
        a,
        b,
        1,
        abs_tol,
        DEFAULT_MAX_SEGMENTS,
    )
    .map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        for deg in [0, 1, 7, 13, 20, 22] {
            let mut buf = [0.0];
            let seg = kronrod(
                &mut |x: f64, o: &mut [f64]| o[0] = x.powi(deg),
                0.0,
                1.0,
                1,
                &mut buf,
            );
            assert_relative_eq!(seg.value[0], 1.0 / (deg as f64 + 1.0), max_relative = 1e-14);
        }
        // The embedded 7-point Gauss rule integrates degree 13 exactly.
        let mut buf = [0.0];
        let seg = kronrod(
            &mut |x: f64, o: &mut [f64]| o[0] = x.powi(13),
            -1.0,
            2.0,
            1,
            &mut buf,
        );
        assert!(seg.err < 1e-12);
    }

    #[test]
    fn smooth_and_oscillatory_integrals() {
        let v = integrate_scalar(f64::exp, 0.0, 3.0, 1e-13).unwrap();
        assert_relative_eq!(v, 3f64.exp() - 1.0, max_relative = 1e-14);
        let v = integrate_scalar(|x| (40.0 * x).sin() * x, 0.0, 2.0, 1e-13).unwrap();
        let exact = ((80.0f64).sin() - 80.0 * (80.0f64).cos()) / 1600.0;
        assert!((v - exact).abs() < 1e-12);
        let v = integrate_scalar(|x| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn vector_integrand_and_reversed_limits() {
        let v = integrate(
            |x, o| {
                o[0] = x;
                o[1] = x * x;
            },
            1.0,
            0.0,
            2,
            1e-14,
            100,
        )
        .unwrap();
        assert_relative_eq!(v[0], -0.5, max_relative = 1e-14);
        assert_relative_eq!(v[1], -1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x, o| o[0] = 1.0 / x, 0.0, 1.0, 1, 1e-12, 20);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
