//! Three-level 2-D dual-tree complex wavelet transform and the magnitude
//! features derived from it.
//!
//! Level 1 uses the (13, 19)-tap near-symmetric biorthogonal pair, coarser
//! levels the 14-tap quarter-shift orthonormal pair. Subbands are returned in
//! the usual orientation order 15°, 45°, 75°, 105°, 135°, 165°.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, GrayImage};

pub const LEVELS: usize = 3;
pub const ORIENTATIONS: [u32; 6] = [15, 45, 75, 105, 135, 165];
pub const DTCWT_COUNT: usize = LEVELS * 6 + 1;

/// Level-1 analysis lowpass, 13 taps (sums to 1).
pub const H0O: [f64; 13] = [
    -0.0017578125,
    0.0,
    0.022265625,
    -0.046875,
    -0.0482421875,
    0.296875,
    0.55546875,
    0.296875,
    -0.0482421875,
    -0.046875,
    0.022265625,
    0.0,
    -0.0017578125,
];

/// Level-1 analysis highpass, 19 taps.
#[allow(clippy::excessive_precision)]
pub const H1O: [f64; 19] = [
    -7.0626351009237651e-05,
    0.0,
    0.0013419009042691043,
    -0.0018833693602463373,
    -0.0071568063116946266,
    0.023856018165615982,
    0.055643121624093975,
    -0.051688059211182233,
    -0.2997575898656592,
    0.55943082081162521,
    -0.2997575898656592,
    -0.051688059211182233,
    0.055643121624093975,
    0.023856018165615982,
    -0.0071568063116946266,
    -0.0018833693602463373,
    0.0013419009042691043,
    0.0,
    -7.0626351009237651e-05,
];

/// Quarter-shift lowpass of tree a, 14 taps (orthonormal, sums to √2).
pub const H0A: [f64; 14] = [
    0.00325314276365318,
    -0.00388321199915849,
    0.0346603468448535,
    -0.0388728012688278,
    -0.117203887699115,
    0.275295384668882,
    0.756145643892522,
    0.568810420712123,
    0.0118660920337970,
    -0.106711804686665,
    0.0238253847949203,
    0.0170252238815540,
    -0.00543947595894370,
    -0.00455689562847549,
];

/// Quarter-shift filter bank: tree b is the time reverse of tree a and the
/// highpass filters are alternating flips of the lowpass ones.
#[derive(Debug, Clone)]
pub struct QShift {
    pub h0a: [f64; 14],
    pub h0b: [f64; 14],
    pub h1a: [f64; 14],
    pub h1b: [f64; 14],
}

impl QShift {
    pub fn new() -> Self {
        let h0a = H0A;
        let mut h0b = h0a;
        h0b.reverse();
        let mut h1a = [0.0; 14];
        for (n, v) in h1a.iter_mut().enumerate() {
            *v = if n % 2 == 0 { h0b[n] } else { -h0b[n] };
        }
        let mut h1b = h1a;
        h1b.reverse();
        Self { h0a, h0b, h1a, h1b }
    }
}

impl Default for QShift {
    fn default() -> Self {
        Self::new()
    }
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                *t.at_mut(c, r) = self.at(r, c);
            }
        }
        t
    }
}

/// Half-sample symmetric extension: `x[-1] = x[0]`, `x[n] = x[n-1]`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Convolves every column with an odd-length filter, same output size.
pub fn colfilter(x: &Mat, h: &[f64]) -> Mat {
    let m = h.len();
    let half = (m / 2) as isize;
    let mut y = Mat::zeros(x.rows, x.cols);
    for r in 0..x.rows {
        for (k, &hk) in h.iter().enumerate() {
            // output[r] = sum_k h[k] * ext[r + m - 1 - k], ext offset by -half
            let src = reflect_index(r as isize + (m - 1 - k) as isize - half, x.rows);
            for c in 0..x.cols {
                *y.at_mut(r, c) += hk * x.at(src, c);
            }
        }
    }
    y
}

/// Column filtering with decimation by two for the quarter-shift levels.
/// Output rows alternate between tree a (`ha`) and tree b (`hb`).
pub fn coldfilt(x: &Mat, ha: &[f64], hb: &[f64]) -> Result<Mat> {
    let r = x.rows;
    if r % 4 != 0 {
        return Err(Error::param("rows", "must be a multiple of 4"));
    }
    let m = ha.len();
    if hb.len() != m || m % 2 != 0 {
        return Err(Error::param("filters", "need equal even lengths"));
    }
    let ext = |i: isize| reflect_index(i - m as isize, r);
    let hao: Vec<f64> = ha.iter().step_by(2).copied().collect();
    let hae: Vec<f64> = ha.iter().skip(1).step_by(2).copied().collect();
    let hbo: Vec<f64> = hb.iter().step_by(2).copied().collect();
    let hbe: Vec<f64> = hb.iter().skip(1).step_by(2).copied().collect();
    let t: Vec<isize> = (5..(r + 2 * m - 2) as isize).step_by(4).collect();
    let taps = m / 2;
    let r2 = r / 2;
    let same_sign = ha.iter().zip(hb).map(|(a, b)| a * b).sum::<f64>() > 0.0;
    let (s1, s2) = if same_sign { (0, 1) } else { (1, 0) };

    // valid convolution of the rows of X[ext[t + shift]] with `h`
    let conv = |shift: isize, h: &[f64], out_row: usize, c: usize| -> f64 {
        let mut acc = 0.0;
        for (k, &hk) in h.iter().enumerate() {
            let ti = t[out_row + taps - 1 - k];
            acc += hk * x.at(ext(ti + shift), c);
        }
        acc
    };

    let mut y = Mat::zeros(r2, x.cols);
    for i in 0..r2 / 2 {
        for c in 0..x.cols {
            *y.at_mut(2 * i + s1, c) = conv(-1, &hao, i, c) + conv(-3, &hae, i, c);
            *y.at_mut(2 * i + s2, c) = conv(0, &hbo, i, c) + conv(-2, &hbe, i, c);
        }
    }
    Ok(y)
}

/// (real, imaginary).
type Complex = (f64, f64);

/// Complex subband coefficient pair from a 2x2 polyphase quad.
fn q2c(y: &Mat) -> (Vec<Complex>, Vec<Complex>) {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut z1 = Vec::with_capacity(y.rows * y.cols / 4);
    let mut z2 = Vec::with_capacity(y.rows * y.cols / 4);
    for r in (0..y.rows).step_by(2) {
        for c in (0..y.cols).step_by(2) {
            let (a, b) = (y.at(r, c), y.at(r, c + 1));
            let (cc, d) = (y.at(r + 1, c), y.at(r + 1, c + 1));
            z1.push(((a - d) * s, (b + cc) * s));
            z2.push(((a + d) * s, (b - cc) * s));
        }
    }
    (z1, z2)
}

/// One decomposition level: six complex subbands of `rows x cols` each.
#[derive(Debug, Clone)]
pub struct Highpass {
    pub rows: usize,
    pub cols: usize,
    pub bands: [Vec<(f64, f64)>; 6],
}

#[derive(Debug, Clone)]
pub struct Pyramid {
    pub lowpass: Mat,
    pub highpasses: Vec<Highpass>,
}

fn assemble(rows: usize, cols: usize, horiz: &Mat, diag: &Mat, vert: &Mat) -> Highpass {
    let (h15, h165) = q2c(horiz);
    let (d45, d135) = q2c(diag);
    let (v75, v105) = q2c(vert);
    Highpass {
        rows,
        cols,
        bands: [h15, d45, v75, v105, d135, h165],
    }
}

/// Forward transform. Both sides must be multiples of `2^levels` (and of 8
/// for three levels).
pub fn forward(x: &Mat, levels: usize) -> Result<Pyramid> {
    let unit = 1usize << levels.max(1);
    if x.rows % unit.max(4) != 0 || x.cols % unit.max(4) != 0 {
        return Err(Error::param("image", "sides must be multiples of 2^levels"));
    }
    let q = QShift::new();
    let mut highpasses = Vec::with_capacity(levels);
    let mut lolo = x.clone();
    if levels >= 1 {
        let lo = colfilter(x, &H0O).transpose();
        let hi = colfilter(x, &H1O).transpose();
        lolo = colfilter(&lo, &H0O).transpose();
        let horiz = colfilter(&hi, &H0O).transpose();
        let diag = colfilter(&hi, &H1O).transpose();
        let vert = colfilter(&lo, &H1O).transpose();
        highpasses.push(assemble(x.rows / 2, x.cols / 2, &horiz, &diag, &vert));
    }
    for _ in 1..levels {
        let lo = coldfilt(&lolo, &q.h0b, &q.h0a)?.transpose();
        let hi = coldfilt(&lolo, &q.h1b, &q.h1a)?.transpose();
        lolo = coldfilt(&lo, &q.h0b, &q.h0a)?.transpose();
        let horiz = coldfilt(&hi, &q.h0b, &q.h0a)?.transpose();
        let diag = coldfilt(&hi, &q.h1b, &q.h1a)?.transpose();
        let vert = coldfilt(&lo, &q.h1b, &q.h1a)?.transpose();
        highpasses.push(assemble(horiz.rows / 2, horiz.cols / 2, &horiz, &diag, &vert));
    }
    Ok(Pyramid {
        lowpass: lolo,
        highpasses,
    })
}

/// Mean coefficient magnitude for every (level, orientation) followed by the
/// RMS of the final lowpass image; all restricted to coefficients whose
/// footprint overlaps the mask.
///
/// Pixels outside the mask are replaced by the masked mean before the
/// transform, then the patch is reflect-padded up to a multiple of 8.
pub fn dtcwt_features(patch: &GrayImage, mask: &BinaryMask) -> Result<[f64; DTCWT_COUNT]> {
    patch.same_dims(mask)?;
    let n = mask.count();
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    let mean = patch
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v as f64)
        .sum::<f64>()
        / n as f64;
    let (w, h) = patch.dims();
    let pw = w.div_ceil(8).max(1) * 8;
    let ph = h.div_ceil(8).max(1) * 8;
    let mut x = Mat::zeros(ph, pw);
    let mut pmask = vec![false; ph * pw];
    for r in 0..ph {
        for c in 0..pw {
            let (sx, sy) = (reflect_index(c as isize, w), reflect_index(r as isize, h));
            let inside = *mask.get(sx, sy);
            x.data[r * pw + c] = if inside { *patch.get(sx, sy) as f64 } else { mean };
            pmask[r * pw + c] = inside && r < h && c < w;
        }
    }

    let pyr = forward(&x, LEVELS)?;
    let footprint = |rows: usize, cols: usize| -> Vec<bool> {
        let bs = ph / rows;
        let mut fp = vec![false; rows * cols];
        for r in 0..ph {
            for c in 0..pw {
                if pmask[r * pw + c] {
                    fp[(r / bs) * cols + c / bs] = true;
                }
            }
        }
        fp
    };

    let mut out = [0.0; DTCWT_COUNT];
    for (l, hp) in pyr.highpasses.iter().enumerate() {
        let fp = footprint(hp.rows, hp.cols);
        let count = fp.iter().filter(|&&b| b).count() as f64;
        for (o, band) in hp.bands.iter().enumerate() {
            let s: f64 = band
                .iter()
                .zip(&fp)
                .filter(|(_, &f)| f)
                .map(|(&(re, im), _)| (re * re + im * im).sqrt())
                .sum();
            out[l * 6 + o] = s / count;
        }
    }
    let low = &pyr.lowpass;
    let fp = footprint(low.rows, low.cols);
    let count = fp.iter().filter(|&&b| b).count() as f64;
    let ss: f64 = low.data.iter().zip(&fp).filter(|(_, &f)| f).map(|(v, _)| v * v).sum();
    out[DTCWT_COUNT - 1] = (ss / count).sqrt();
    Ok(out)
}
