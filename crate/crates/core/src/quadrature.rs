//! Numerical integration: double-exponential (tanh-sinh) rule for 1-D
//! integrals with endpoint singularities, and adaptive rectangle subdivision
//! for 2-D integrals.

use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Tanh-sinh quadrature of `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `f(x, x - a, b - x)` receives the distances to both endpoints computed
/// without cancellation, so integrands such as `(1 - u)^{-1/2}` can be
/// evaluated accurately right up to the boundary.
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let weight = half * FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        if weight == 0.0 || !weight.is_finite() {
            return 0.0;
        }
        let (x, da, db) = if s >= 0.0 {
            let db = 2.0 * half / (1.0 + (2.0 * s).exp());
            (b - db, 2.0 * half - db, db)
        } else {
            let da = 2.0 * half / (1.0 + (-2.0 * s).exp());
            (a + da, da, 2.0 * half - da)
        };
        if da <= 0.0 || db <= 0.0 {
            return 0.0;
        }
        weight * f(x, da, db)
    };

    const T_MAX: f64 = 4.5;
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = h * sum;
    for level in 1..=14 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let refined = h * sum;
        if level >= 3 && (refined - estimate).abs() <= rel_tol * refined.abs() {
            return Ok(refined);
        }
        estimate = refined;
    }
    Err(Error::BudgetExceeded(format!(
        "tanh-sinh did not reach relative tolerance {rel_tol}"
    )))
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Clone, Copy, Debug)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn quarters(&self) -> [Rect; 4] {
        let xm = 0.5 * (self.x0 + self.x1);
        let ym = 0.5 * (self.y0 + self.y1);
        [
            Rect {
                x1: xm,
                y1: ym,
                ..*self
            },
            Rect {
                x0: xm,
                y1: ym,
                ..*self
            },
            Rect {
                x1: xm,
                y0: ym,
                ..*self
            },
            Rect {
                x0: xm,
                y0: ym,
                ..*self
            },
        ]
    }

    fn gauss(&self, f: &impl Fn(f64, f64) -> f64) -> f64 {
        let (hx, hy) = (0.5 * (self.x1 - self.x0), 0.5 * (self.y1 - self.y0));
        let (cx, cy) = (0.5 * (self.x1 + self.x0), 0.5 * (self.y1 + self.y0));
        let mut total = 0.0;
        for (xi, wx) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let mut row = 0.0;
            for (yi, wy) in GL_NODES.iter().zip(GL_WEIGHTS) {
                row += wy * f(cx + hx * xi, cy + hy * yi);
            }
            total += wx * row;
        }
        total * hx * hy
    }
}

struct Cell {
    rect: Rect,
    refined: f64,
    error: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive 2-D integral of `f` over `[x0, x1] x [y0, y1]` to absolute tolerance `abs_tol`.
///
/// Each cell carries an 8x8 Gauss–Legendre estimate and the sum over its four
/// quarters; the cell with the largest discrepancy is split until the summed
/// discrepancy drops below the tolerance.
pub fn adaptive_2d(
    f: impl Fn(f64, f64) -> f64,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    abs_tol: f64,
) -> Result<f64> {
    let make = |rect: Rect| -> Cell {
        let coarse = rect.gauss(&f);
        let refined: f64 = rect.quarters().iter().map(|q| q.gauss(&f)).sum();
        Cell {
            rect,
            refined,
            error: (refined - coarse).abs(),
        }
    };
    let mut heap = BinaryHeap::new();
    let mut total_error = 0.0;
    let root = Rect { x0, x1, y0, y1 };
    for q in root.quarters() {
        let cell = make(q);
        total_error += cell.error;
        heap.push(cell);
    }
    const MAX_CELLS: usize = 200_000;
    loop {
        if total_error <= abs_tol {
            let mut parts: Vec<f64> = heap.iter().map(|c| c.refined).collect();
            parts.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
            return Ok(parts.iter().sum());
        }
        if heap.len() > MAX_CELLS {
            return Err(Error::BudgetExceeded(format!(
                "2-D quadrature stalled at error {total_error:e}"
            )));
        }
        let worst = heap.pop().expect("heap is nonempty");
        total_error -= worst.error;
        for q in worst.rect.quarters() {
            let cell = make(q);
            total_error += cell.error;
            heap.push(cell);
        }
        // running sum drifts; resync occasionally
        if heap.len() % 4096 < 3 {
            total_error = heap.iter().map(|c| c.error).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_smooth_and_singular() {
        let v = tanh_sinh(|x, _, _| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        // integral of (1-x)^{-1/2} over [0,1] is 2
        let v = tanh_sinh(|_, _, db| db.powf(-0.5), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn adaptive_2d_product() {
        let v = adaptive_2d(|x, y| (-x - y).exp(), (0.0, 30.0), (0.0, 30.0), 1e-10).unwrap();
        let expect = (1.0 - (-30.0f64).exp()).powi(2);
        assert!((v - expect).abs() < 1e-9, "{v}");
    }
}
