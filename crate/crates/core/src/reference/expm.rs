use nalgebra::{DMatrix, DVector};

/// `exp(A T) u0` through nalgebra's scaling-and-squaring Padé exponential.
pub fn expm_oracle(a: &DMatrix<f64>, u0: &[f64], t: f64) -> Vec<f64> {
    let e = (a * t).exp();
    (e * DVector::from_column_slice(u0)).iter().copied().collect()
}

/// Independent route to `exp(A T) u0`: `steps` Taylor steps of order 20.
pub fn taylor_propagate(a: &DMatrix<f64>, u0: &[f64], t: f64, steps: usize) -> Vec<f64> {
    let h = t / steps as f64;
    let mut u = DVector::from_column_slice(u0);
    for _ in 0..steps {
        let mut term = u.clone();
        let mut acc = u.clone();
        for k in 1..=20 {
            term = a * term * (h / k as f64);
            acc += &term;
        }
        u = acc;
    }
    u.iter().copied().collect()
}
