use ndarray::{Array1, Array2, ArrayView1};

/// `out = Aᵀz`, accumulated row by row over the row-major matrix.
pub(crate) fn transpose_dot(a: &Array2<f64>, z: ArrayView1<f64>, out: &mut Array1<f64>) {
    out.fill(0.0);
    for (row, &zi) in a.rows().into_iter().zip(z.iter()) {
        out.scaled_add(zi, &row);
    }
}

pub(crate) fn norm(x: &Array1<f64>) -> f64 {
    x.dot(x).sqrt()
}
