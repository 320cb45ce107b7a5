use ndarray::{Array1, Array2, ArrayView1};

use crate::{Error, Real, Result};

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub(crate) fn cholesky<T: Real>(a: &Array2<T>) -> Result<Array2<T>> {
    let n = a.nrows();
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag = diag - l[[j, k]] * l[[j, k]];
        }
        if !(diag > T::zero()) {
            return Err(Error::numerical(format!("matrix not positive definite at pivot {j}")));
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s = s - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the lower factor.
pub(crate) fn cholesky_solve<T: Real>(l: &Array2<T>, b: ArrayView1<'_, T>) -> Array1<T> {
    let n = l.nrows();
    let mut y = b.to_owned();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s = s - l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

/// `out = X v`, row by row.
pub(crate) fn mat_vec<T: Real>(x: &ndarray::ArrayView2<'_, T>, v: &Array1<T>, out: &mut Array1<T>) {
    for (o, row) in out.iter_mut().zip(x.rows()) {
        *o = row.dot(v);
    }
}

/// `out = X^T u`, accumulated as a combination of the rows of `X`.
pub(crate) fn mat_t_vec<T: Real>(x: &ndarray::ArrayView2<'_, T>, u: &Array1<T>, out: &mut Array1<T>) {
    out.fill(T::zero());
    for (&ui, row) in u.iter().zip(x.rows()) {
        out.scaled_add(ui, &row);
    }
}
