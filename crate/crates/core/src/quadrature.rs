//! Globally adaptive Gauss–Kronrod (7/15) quadrature of matrix-valued
//! integrands over the whole real line.
//!
//! The line is mapped onto (−π/2, π/2) by ω = s·tan θ. Integrands that decay
//! like 1/ω² become bounded and smooth in θ, so no truncation window is
//! needed. Known peak locations are passed as breakpoints; panels are then
//! bisected worst-first until the summed error estimate meets the target.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::SMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Frequency scale s of the map ω = s·tan θ, rad/s.
    pub scale: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadOptions {
    pub fn with_scale(scale: f64) -> Self {
        Self {
            scale,
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_panels: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<const R: usize, const C: usize> {
    pub value: SMatrix<Complex64, R, C>,
    /// Entrywise absolute error estimate.
    pub error: SMatrix<f64, R, C>,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel<const R: usize, const C: usize> {
    a: f64,
    b: f64,
    value: SMatrix<Complex64, R, C>,
    error: SMatrix<f64, R, C>,
    worst: f64,
}

impl<const R: usize, const C: usize> PartialEq for Panel<R, C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const R: usize, const C: usize> Eq for Panel<R, C> {}
impl<const R: usize, const C: usize> PartialOrd for Panel<R, C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const R: usize, const C: usize> Ord for Panel<R, C> {
    // worst error first; ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst
            .total_cmp(&other.worst)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<const R: usize, const C: usize, F>(f: &F, a: f64, b: f64) -> Panel<R, C>
where
    F: Fn(f64) -> SMatrix<Complex64, R, C>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = SMatrix::<Complex64, R, C>::zeros();
    let mut gauss = SMatrix::<Complex64, R, C>::zeros();
    let mut abs_sum = SMatrix::<f64, R, C>::zeros();
    let mut add = |x: f64, wk: f64, wg: Option<f64>| {
        let v = f(x);
        kronrod += v * Complex64::from(wk);
        if let Some(wg) = wg {
            gauss += v * Complex64::from(wg);
        }
        abs_sum += v.map(|z| z.norm() * wk);
    };
    for (j, &x) in XGK.iter().enumerate() {
        let wg = (j % 2 == 1).then(|| WG[j / 2]);
        if x == 0.0 {
            add(center, WGK[j], wg);
        } else {
            let dx = half * x;
            add(center - dx, WGK[j], wg);
            add(center + dx, WGK[j], wg);
        }
    }
    let value = kronrod * Complex64::from(half);
    let roundoff = 50.0 * f64::EPSILON * half.abs();
    let error = SMatrix::<f64, R, C>::from_fn(|i, j| {
        let e = ((kronrod[(i, j)] - gauss[(i, j)]) * half).norm();
        e.max(roundoff * abs_sum[(i, j)])
    });
    let worst = error.max();
    Panel {
        a,
        b,
        value,
        error,
        worst,
    }
}

/// ∫_{−∞}^{∞} f(ω) dω. `breakpoints` are frequencies where f has sharp
/// features; they seed the initial panel partition.
pub fn integrate_real_line<const R: usize, const C: usize, F>(
    f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<R, C>>
where
    F: Fn(f64) -> SMatrix<Complex64, R, C>,
{
    let s = opts.scale;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Numerical(format!(
            "quadrature scale must be > 0, got {s}"
        )));
    }
    let mapped = |theta: f64| {
        let c = theta.cos();
        f(s * theta.tan()) * Complex64::from(s / (c * c))
    };

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .filter(|w| w.is_finite())
        .map(|w| (w / s).atan())
        .filter(|t| t.abs() < FRAC_PI_2)
        .collect();
    cuts.push(-FRAC_PI_2);
    cuts.push(FRAC_PI_2);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

    let mut heap: BinaryHeap<Panel<R, C>> =
        cuts.windows(2).map(|w| gk15(&mapped, w[0], w[1])).collect();
    let mut evaluations = 15 * heap.len();

    let totals = |heap: &BinaryHeap<Panel<R, C>>| {
        let mut panels: Vec<&Panel<R, C>> = heap.iter().collect();
        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        let mut value = SMatrix::<Complex64, R, C>::zeros();
        let mut error = SMatrix::<f64, R, C>::zeros();
        for p in panels {
            value += p.value;
            error += p.error;
        }
        (value, error)
    };

    let mut check_every = 1usize;
    let mut since_check = 0usize;
    loop {
        since_check += 1;
        if since_check >= check_every {
            since_check = 0;
            let (value, error) = totals(&heap);
            let vmax = value.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let target = opts.abs_tol.max(opts.rel_tol * vmax);
            let achieved = error.max();
            if achieved <= target {
                return Ok(QuadResult {
                    value,
                    error,
                    panels: heap.len(),
                    evaluations,
                });
            }
            if heap.len() >= opts.max_panels {
                return Err(Error::Quadrature {
                    target,
                    achieved,
                    panels: heap.len(),
                });
            }
            // rescanning every panel is O(n); space the checks out as n grows
            check_every = (heap.len() / 16).max(1);
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            let (_, error) = totals(&heap);
            return Err(Error::Quadrature {
                target: opts.abs_tol,
                achieved: error.max() + worst.worst,
                panels: heap.len() + 1,
            });
        }
        heap.push(gk15(&mapped, worst.a, mid));
        heap.push(gk15(&mapped, mid, worst.b));
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar<F: Fn(f64) -> f64>(f: F) -> impl Fn(f64) -> SMatrix<Complex64, 1, 1> {
        move |x| SMatrix::<Complex64, 1, 1>::new(Complex64::from(f(x)))
    }

    #[test]
    fn lorentzian_integrates_to_pi() {
        let w = 3.0;
        let r = integrate_real_line(
            scalar(|x| w / (x * x + w * w)),
            &[0.0],
            &QuadOptions::with_scale(1.0),
        )
        .unwrap();
        assert!(
            (r.value[(0, 0)].re - PI).abs() < 1e-10,
            "{}",
            r.value[(0, 0)]
        );
        assert!(r.error[(0, 0)] < 1e-9);
    }

    #[test]
    fn narrow_offset_peak_with_breakpoints() {
        // width 1e-3 at 1e2 on a scale-1 map
        let (c, w) = (1e2, 1e-3);
        let bps: Vec<f64> = [-10.0, -1.0, 0.0, 1.0, 10.0]
            .iter()
            .map(|k| c + k * w)
            .collect();
        let r = integrate_real_line(
            scalar(|x| w / ((x - c) * (x - c) + w * w)),
            &bps,
            &QuadOptions::with_scale(1.0),
        )
        .unwrap();
        assert!(
            (r.value[(0, 0)].re - PI).abs() < 1e-8,
            "{}",
            r.value[(0, 0)]
        );
    }

    #[test]
    fn squared_lorentzian_closed_form() {
        // ∫ 1/(x² + a²)² dx = π/(2a³)
        let a = 0.7;
        let r = integrate_real_line(
            scalar(|x| 1.0 / (x * x + a * a).powi(2)),
            &[],
            &QuadOptions::with_scale(2.0),
        )
        .unwrap();
        assert!((r.value[(0, 0)].re - PI / (2.0 * a * a * a)).abs() < 1e-10);
    }

    #[test]
    fn reports_failure_when_budget_too_small() {
        let opts = QuadOptions {
            max_panels: 4,
            abs_tol: 1e-15,
            rel_tol: 0.0,
            ..QuadOptions::with_scale(1.0)
        };
        let w = 1e-6;
        let r = integrate_real_line(scalar(|x| w / ((x - 50.0).powi(2) + w * w)), &[], &opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
