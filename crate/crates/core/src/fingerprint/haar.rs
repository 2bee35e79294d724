//! Orthonormal 2-D Haar transform, full pyramid decomposition.
//!
//! Each level halves the current approximation block along every axis that is
//! still longer than one, rows first. Non-square shapes keep decomposing the
//! longer axis once the shorter one reaches length one, so the result ends in
//! a single approximation coefficient.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{param, Result};

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if !rows.is_power_of_two() || !cols.is_power_of_two() {
        return param(format!("Haar transform needs power-of-two dimensions, got {rows}x{cols}"));
    }
    if rows * cols != len {
        return param(format!("matrix of {len} values does not have shape {rows}x{cols}"));
    }
    Ok(())
}

fn levels(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let (mut h, mut w) = (rows, cols);
    let mut out = Vec::new();
    while h > 1 || w > 1 {
        out.push((h, w));
        h = (h / 2).max(1);
        w = (w / 2).max(1);
    }
    out
}

fn forward_rows(m: &mut [f64], cols: usize, h: usize, w: usize, tmp: &mut [f64]) {
    let half = w / 2;
    for r in 0..h {
        let row = &mut m[r * cols..r * cols + w];
        for j in 0..half {
            let (a, b) = (row[2 * j], row[2 * j + 1]);
            tmp[j] = (a + b) * FRAC_1_SQRT_2;
            tmp[half + j] = (a - b) * FRAC_1_SQRT_2;
        }
        row.copy_from_slice(&tmp[..w]);
    }
}

fn forward_cols(m: &mut [f64], cols: usize, h: usize, w: usize, tmp: &mut [f64]) {
    let half = h / 2;
    for c in 0..w {
        for i in 0..half {
            let (a, b) = (m[2 * i * cols + c], m[(2 * i + 1) * cols + c]);
            tmp[i] = (a + b) * FRAC_1_SQRT_2;
            tmp[half + i] = (a - b) * FRAC_1_SQRT_2;
        }
        for i in 0..h {
            m[i * cols + c] = tmp[i];
        }
    }
}

fn inverse_rows(m: &mut [f64], cols: usize, h: usize, w: usize, tmp: &mut [f64]) {
    let half = w / 2;
    for r in 0..h {
        let row = &mut m[r * cols..r * cols + w];
        for j in 0..half {
            let (s, d) = (row[j], row[half + j]);
            tmp[2 * j] = (s + d) * FRAC_1_SQRT_2;
            tmp[2 * j + 1] = (s - d) * FRAC_1_SQRT_2;
        }
        row.copy_from_slice(&tmp[..w]);
    }
}

fn inverse_cols(m: &mut [f64], cols: usize, h: usize, w: usize, tmp: &mut [f64]) {
    let half = h / 2;
    for c in 0..w {
        for i in 0..half {
            let (s, d) = (m[i * cols + c], m[(half + i) * cols + c]);
            tmp[2 * i] = (s + d) * FRAC_1_SQRT_2;
            tmp[2 * i + 1] = (s - d) * FRAC_1_SQRT_2;
        }
        for i in 0..h {
            m[i * cols + c] = tmp[i];
        }
    }
}

/// In-place forward transform of a row-major `rows x cols` matrix.
pub fn haar2d_in_place(m: &mut [f64], rows: usize, cols: usize) -> Result<()> {
    check_shape(rows, cols, m.len())?;
    let mut tmp = vec![0.0; rows.max(cols)];
    for (h, w) in levels(rows, cols) {
        if w > 1 {
            forward_rows(m, cols, h, w, &mut tmp);
        }
        if h > 1 {
            forward_cols(m, cols, h, w, &mut tmp);
        }
    }
    Ok(())
}

pub fn inverse_haar2d_in_place(m: &mut [f64], rows: usize, cols: usize) -> Result<()> {
    check_shape(rows, cols, m.len())?;
    let mut tmp = vec![0.0; rows.max(cols)];
    for (h, w) in levels(rows, cols).into_iter().rev() {
        if h > 1 {
            inverse_cols(m, cols, h, w, &mut tmp);
        }
        if w > 1 {
            inverse_rows(m, cols, h, w, &mut tmp);
        }
    }
    Ok(())
}

pub fn haar2d(m: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let mut out = m.to_vec();
    haar2d_in_place(&mut out, rows, cols)?;
    Ok(out)
}

pub fn inverse_haar2d(c: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let mut out = c.to_vec();
    inverse_haar2d_in_place(&mut out, rows, cols)?;
    Ok(out)
}
