//! Small dense helpers: determinants and cofactor matrices that stay valid for singular input.

use nalgebra::DMatrix;

pub(crate) fn det(m: &DMatrix<f64>) -> f64 {
    match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    }
}

pub(crate) fn minor(m: &DMatrix<f64>, row: usize, col: usize) -> DMatrix<f64> {
    m.clone().remove_row(row).remove_column(col)
}

/// Classical cofactor matrix `cof[i][j] = (-1)^(i+j) det(minor(i, j))`.
///
/// For symmetric input only the upper triangle is computed and mirrored.
pub(crate) fn cofactor_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut cof = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * det(&minor(m, i, j));
            cof[(i, j)] = c;
            cof[(j, i)] = c;
        }
    }
    cof
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cofactor_of_singular_matrix() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let cof = cofactor_symmetric(&s);
        assert_eq!(cof, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(det(&s), 0.0);
    }

    #[test]
    fn adjugate_identity() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -1.0, 0.5, 1.0, 0.25, -1.0, 0.25, 3.0]);
        let prod = &s * cofactor_symmetric(&s);
        let d = det(&s);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { d } else { 0.0 };
                assert!((prod[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }
}
