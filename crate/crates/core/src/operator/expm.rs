//! Matrix exponential by Pade(13) approximation with scaling and squaring.

use nalgebra::DMatrix;
use num_complex::Complex64;

const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(A)` for a dense complex matrix.
pub fn matrix_exponential(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let dim = a.nrows();
    assert_eq!(dim, a.ncols(), "matrix_exponential requires a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a * Complex64::new(0.5f64.powi(squarings as i32), 0.0);

    let id = DMatrix::<Complex64>::identity(dim, dim);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let b = |k: usize| Complex64::new(PADE_13[k], 0.0);
    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u = &scaled * (&a6 * u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = &a6 * v_inner + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Pade denominator is nonsingular for scaled matrices");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
