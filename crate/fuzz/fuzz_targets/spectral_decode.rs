#![no_main]

use libfuzzer_sys::fuzz_target;

use gsqg::{forward_transform, fractional_laplacian, inverse_transform, Complex64, Grid, SpectralField};

// Layout: one byte selecting n ∈ {8, 16, 32}, one byte for the exponent,
// then little-endian f64 pairs (re, im) filling the coefficient array in
// row-major order; missing values are zero.
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else {
        return;
    };
    let Some((&exp_byte, body)) = rest.split_first() else {
        return;
    };
    let n = 8usize << (head % 3);
    let grid = Grid::new(n).unwrap();
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let coeffs = ndarray::Array2::from_shape_fn((n, n), |_| {
        Complex64::new(values.next().unwrap_or(0.0), values.next().unwrap_or(0.0))
    });
    let samples = coeffs.mapv(|c| c.re);
    let Ok(field) = SpectralField::from_coeffs(&grid, coeffs) else {
        return;
    };
    let _ = inverse_transform(&field);
    let exponent = (exp_byte as f64 - 128.0) / 32.0;
    let _ = fractional_laplacian(&field, exponent);
    let _ = forward_transform(&samples, &grid);
});
