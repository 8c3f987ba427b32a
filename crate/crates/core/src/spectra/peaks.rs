//! Peak and linewidth helpers for sampled spectra.

use crate::scalar::{lit, Real};

/// Index of the largest value.
pub fn global_peak<T: Real>(y: &[T]) -> Option<usize> {
    y.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, T)>, (i, v)| match best {
            Some((_, b)) if *v <= b => best,
            _ => Some((i, *v)),
        })
        .map(|(i, _)| i)
}

/// Interior strict local maxima whose height exceeds `min_rel` of the
/// global maximum, in axis order.
pub fn local_maxima<T: Real>(y: &[T], min_rel: T) -> Vec<usize> {
    let top = y.iter().fold(T::zero(), |a, v| a.max(*v));
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= top * min_rel)
        .collect()
}

/// Vertex of the parabola through the three samples around `i`.
pub fn refine_peak<T: Real>(x: &[T], y: &[T], i: usize) -> T {
    if i == 0 || i + 1 >= x.len() {
        return x[i];
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    if a < T::zero() {
        let v = -b / (lit::<T>(2.0) * a);
        if v >= x0 && v <= x2 {
            return v;
        }
    }
    x1
}

/// Full width at half of `y[i]`, from linear interpolation of the nearest
/// half-maximum crossings on either side.
pub fn fwhm_around<T: Real>(x: &[T], y: &[T], i: usize) -> Option<T> {
    let half = y[i] * lit(0.5);
    let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    let left = (0..i).rev().find(|&k| y[k] < half).map(|k| cross(k, k + 1))?;
    let right = (i + 1..y.len()).find(|&k| y[k] < half).map(|k| cross(k - 1, k))?;
    Some(right - left)
}

/// Positions of the two highest local maxima in axis order (refined).
pub fn doublet<T: Real>(x: &[T], y: &[T], min_rel: T) -> Option<(T, T)> {
    let mut peaks = local_maxima(y, min_rel);
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|a, b| y[*b].partial_cmp(&y[*a]).expect("finite spectrum"));
    let (mut a, mut b) = (peaks[0], peaks[1]);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    Some((refine_peak(x, y, a), refine_peak(x, y, b)))
}
