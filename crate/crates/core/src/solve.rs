//! Deterministic one-dimensional solvers shared by the threshold, adoption
//! and repair modules.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::families::{require, require_finite_pos};

pub const DEFAULT_MAX_ITER: usize = 200;
pub const DEFAULT_ARG_TOL: f64 = 1e-10;

/// Solver settings a scenario may override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Argument tolerance of golden-section refinement.
    pub golden_tol: f64,
    /// Grid points of the global scan preceding every optimization.
    pub optimizer_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            golden_tol: 1e-9,
            optimizer_grid: 2001,
        }
    }
}

impl Tolerances {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        require_finite_pos(prefix, "golden_tol", self.golden_tol)?;
        require(
            self.optimizer_grid >= 3,
            format!("{prefix}.optimizer_grid"),
            "optimizer_grid must be at least 3",
        )
    }

    pub fn maximizer(&self) -> Maximizer {
        Maximizer {
            grid_points: self.optimizer_grid,
            tol: self.golden_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootResult {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Midpoint bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` or `f` hits zero exactly.
/// The returned value is the endpoint of the final bracket with the smaller
/// `|f|`, so it always lies in the final bracket.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<RootResult>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(RootResult { value: a, residual: 0.0, iterations: 0, bracket: (a, a) });
    }
    if fb == 0.0 {
        return Ok(RootResult { value: b, residual: 0.0, iterations: 0, bracket: (b, b) });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(ModelError::NoCrossing(format!(
            "f({lo})={fa} and f({hi})={fb} do not bracket a root"
        )));
    }
    let mut fb = fb;
    let mut iterations = 0;
    while (b - a).abs() > tol && iterations < max_iter {
        iterations += 1;
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(RootResult { value: m, residual: 0.0, iterations, bracket: (m, m) });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    let (value, residual) = if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) };
    Ok(RootResult { value, residual, iterations, bracket: (a, b) })
}

/// Smallest `x` in `[lo, hi]` with `f(x) >= 0`, assuming `f` is
/// nondecreasing. Bisects on the predicate, so the result is the right end
/// of the final bracket and satisfies `f(x) >= 0`.
pub fn bisect_first_nonneg<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> f64
where
    F: FnMut(f64) -> f64,
{
    if f(lo) >= 0.0 {
        return lo;
    }
    let (mut a, mut b) = (lo, hi);
    let mut it = 0;
    while b - a > tol && it < max_iter {
        it += 1;
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) >= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

/// Evenly spaced grid of `n` points spanning `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut it = 0;
    while (b - a) > tol && it < max_iter {
        it += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    // Endpoints can beat the interior when the maximum sits on the boundary.
    [(m, fm), (lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((m, fm), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Outcome of a grid scan for the maximum of a scalar function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridScan {
    pub argmax_index: usize,
    pub argmax: f64,
    pub max: f64,
    /// Interior strict local maxima found on the grid (plus boundary maxima).
    pub local_maxima: usize,
}

pub fn grid_scan(grid: &[f64], values: &[f64]) -> GridScan {
    assert_eq!(grid.len(), values.len());
    assert!(!grid.is_empty());
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    // Count peaks of the sequence with plateaus collapsed.
    let mut peaks = 0;
    let n = values.len();
    let mut rising = true;
    for i in 1..n {
        if values[i] > values[i - 1] {
            rising = true;
        } else if values[i] < values[i - 1] {
            if rising {
                peaks += 1;
            }
            rising = false;
        }
    }
    if rising {
        peaks += 1;
    }
    GridScan {
        argmax_index: best,
        argmax: grid[best],
        max: values[best],
        local_maxima: peaks,
    }
}

/// Maximizer of `f` on `[lo, hi]`: a grid scan locates the global cell, golden
/// section refines inside it, and when `derivative` is supplied and changes
/// sign across the cell, bisection on it polishes the result.
pub struct Maximizer {
    pub grid_points: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxResult {
    pub argmax: f64,
    pub max: f64,
    pub scan: GridScan,
}

impl Maximizer {
    pub fn run<F, D>(&self, mut f: F, derivative: Option<D>, lo: f64, hi: f64) -> MaxResult
    where
        F: FnMut(f64) -> f64,
        D: FnMut(f64) -> f64,
    {
        let grid = linspace(lo, hi, self.grid_points.max(3));
        let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        let scan = grid_scan(&grid, &values);
        let i = scan.argmax_index;
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let (mut best_x, mut best_f) = golden_section_max(&mut f, a, b, self.tol, DEFAULT_MAX_ITER);
        if let Some(mut d) = derivative {
            let (da, db) = (d(a), d(b));
            if da.is_finite() && db.is_finite() && da > 0.0 && db < 0.0 {
                if let Ok(root) = bisect(&mut d, a, b, 1e-14, DEFAULT_MAX_ITER) {
                    let fr = f(root.value);
                    if fr >= best_f {
                        best_x = root.value;
                        best_f = fr;
                    }
                }
            }
        }
        if scan.max > best_f {
            best_x = scan.argmax;
            best_f = scan.max;
        }
        MaxResult { argmax: best_x, max: best_f, scan }
    }
}
