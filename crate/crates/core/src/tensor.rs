//! Row-major dense tensors and axis-sequential line transforms.

/// Applies `f(line_in, line_out)` to every 1-D fibre along `axis`, replacing
/// that axis' extent by `new_len`. Axis 0 varies slowest.
pub(crate) fn map_axis(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    new_len: usize,
    mut f: impl FnMut(&[f64], &mut [f64]),
) -> Vec<f64> {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let len = shape[axis];
    let mut out = vec![0.0; outer * new_len * inner];
    let mut line = vec![0.0; len];
    let mut line_out = vec![0.0; new_len];
    for o in 0..outer {
        let base_in = o * len * inner;
        let base_out = o * new_len * inner;
        for i in 0..inner {
            for (t, v) in line.iter_mut().enumerate() {
                *v = data[base_in + t * inner + i];
            }
            f(&line, &mut line_out);
            for (t, v) in line_out.iter().enumerate() {
                out[base_out + t * inner + i] = *v;
            }
        }
    }
    out
}

/// Row-major flat index of `idx` in a tensor of `shape`.
#[inline]
pub(crate) fn flat_index(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Inverse of [`flat_index`], written into `idx`.
#[inline]
pub(crate) fn unflatten(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for (slot, &n) in idx.iter_mut().zip(shape).rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Pairwise summation; the fixed split order makes results reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
