//! Tiny fixed-size matrix helpers for the d <= 3 elliptical families.
//!
//! Correlation matrices are carried around in packed form (off-diagonal
//! entries in the order r12, r13, r23); determinants and inverses use the
//! explicit 2x2/3x3 adjugate.

pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) fn unpack_corr(packed: &[f64], d: usize) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate().take(d) {
        row[i] = 1.0;
    }
    match d {
        1 => {}
        2 => {
            m[0][1] = packed[0];
            m[1][0] = packed[0];
        }
        3 => {
            m[0][1] = packed[0];
            m[1][0] = packed[0];
            m[0][2] = packed[1];
            m[2][0] = packed[1];
            m[1][2] = packed[2];
            m[2][1] = packed[2];
        }
        _ => unreachable!("dimension {d} unsupported"),
    }
    m
}

/// Determinant and inverse via the explicit adjugate.
pub(crate) fn det_inv(m: &Mat3, d: usize) -> (f64, Mat3) {
    let mut inv = [[0.0; 3]; 3];
    let det = match d {
        1 => {
            inv[0][0] = 1.0 / m[0][0];
            m[0][0]
        }
        2 => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            inv[0][0] = m[1][1] / det;
            inv[1][1] = m[0][0] / det;
            inv[0][1] = -m[0][1] / det;
            inv[1][0] = -m[1][0] / det;
            det
        }
        3 => {
            let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
            let c01 = -(m[1][0] * m[2][2] - m[1][2] * m[2][0]);
            let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
            let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
            let c10 = -(m[0][1] * m[2][2] - m[0][2] * m[2][1]);
            let c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
            let c12 = -(m[0][0] * m[2][1] - m[0][1] * m[2][0]);
            let c20 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
            let c21 = -(m[0][0] * m[1][2] - m[0][2] * m[1][0]);
            let c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            // inverse = adjugate / det; adjugate = cofactor matrix transposed
            inv[0][0] = c00 / det;
            inv[0][1] = c10 / det;
            inv[0][2] = c20 / det;
            inv[1][0] = c01 / det;
            inv[1][1] = c11 / det;
            inv[1][2] = c21 / det;
            inv[2][0] = c02 / det;
            inv[2][1] = c12 / det;
            inv[2][2] = c22 / det;
            det
        }
        _ => unreachable!(),
    };
    (det, inv)
}

/// Cofactor of entry (i, j).
pub(crate) fn cofactor(m: &Mat3, d: usize, i: usize, j: usize) -> f64 {
    match d {
        2 => {
            let minor = m[1 - i][1 - j];
            if (i + j).is_multiple_of(2) {
                minor
            } else {
                -minor
            }
        }
        3 => {
            let ri: Vec<usize> = (0..3).filter(|&r| r != i).collect();
            let cj: Vec<usize> = (0..3).filter(|&c| c != j).collect();
            let minor = m[ri[0]][cj[0]] * m[ri[1]][cj[1]] - m[ri[0]][cj[1]] * m[ri[1]][cj[0]];
            if (i + j).is_multiple_of(2) {
                minor
            } else {
                -minor
            }
        }
        _ => unreachable!(),
    }
}

/// Lower Cholesky factor; `None` if a pivot falls below `tol`.
pub(crate) fn cholesky(m: &Mat3, d: usize, tol: f64) -> Option<Mat3> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s < tol {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

pub(crate) fn mat_vec(m: &Mat3, v: &[f64], d: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..d {
        for j in 0..d {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub(crate) fn quad_form(inv: &Mat3, z: &[f64], d: usize) -> f64 {
    let u = mat_vec(inv, z, d);
    (0..d).map(|i| z[i] * u[i]).sum()
}
