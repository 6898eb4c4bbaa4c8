//! Row-major multi-index arithmetic shared by tensors and kernels.

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub(crate) fn flat(idx: &[usize], strides: &[usize]) -> usize {
    idx.iter().zip(strides).map(|(i, s)| i * s).sum()
}

/// Advances `idx` like an odometer; returns false after the last cell.
pub(crate) fn advance(idx: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

/// For every cell of the full tensor, the flat index of its projection onto
/// `keep` (positions into `dims`, in the order given).
pub(crate) fn projection(dims: &[usize], keep: &[usize]) -> Vec<usize> {
    let kept_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let kept_strides = strides(&kept_dims);
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0; dims.len()];
    for _ in 0..total {
        out.push(
            keep.iter()
                .zip(&kept_strides)
                .map(|(&p, s)| idx[p] * s)
                .sum(),
        );
        advance(&mut idx, dims);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_matches_manual() {
        let dims = [2, 3];
        assert_eq!(projection(&dims, &[1]), vec![0, 1, 2, 0, 1, 2]);
        assert_eq!(projection(&dims, &[1, 0]), vec![0, 2, 4, 1, 3, 5]);
        assert_eq!(projection(&dims, &[]), vec![0; 6]);
    }
}
