use ndarray::Array2;

/// Orthonormal DCT-II matrix, `n_out × n`; row `k` is
/// `s_k · cos(π k (2i + 1) / 2n)` with `s_0 = √(1/n)` and `s_k = √(2/n)`.
pub fn dct2_matrix(n_out: usize, n: usize) -> Array2<f64> {
    let nf = n as f64;
    Array2::from_shape_fn((n_out, n), |(k, i)| {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        scale * (std::f64::consts::PI * k as f64 * (2.0 * i as f64 + 1.0) / (2.0 * nf)).cos()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_orthonormal() {
        let d = dct2_matrix(80, 80);
        let id = d.t().dot(&d);
        for ((i, j), v) in id.indexed_iter() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-10, "({i},{j}) = {v}");
        }
    }

    #[test]
    fn constant_maps_to_first_coefficient() {
        let d = dct2_matrix(80, 80);
        let c = ndarray::Array1::from_elem(80, -3.0);
        let out = d.dot(&c);
        assert!((out[0] - 80f64.sqrt() * -3.0).abs() < 1e-12);
        assert!(out.iter().skip(1).all(|v| v.abs() < 1e-12));
    }
}
