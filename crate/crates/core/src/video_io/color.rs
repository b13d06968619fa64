//! RGB ⇄ YCbCr on real-valued samples.
//!
//! Cb and Cr are signed (no +128 offset); the Y4M reader and writer apply
//! the offset at the byte boundary.

const FORWARD: [[f64; 3]; 3] = [
    [0.2989, 0.5866, 0.1145],
    [-0.1687, -0.3312, 0.5],
    [0.5, -0.4183, -0.0816],
];

const INVERSE: [[f64; 3]; 3] = invert(FORWARD);

const fn invert(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    [
        [
            c00 / det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det,
        ],
        [
            c01 / det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det,
        ],
        [
            c02 / det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det,
        ],
    ]
}

#[inline]
fn apply(m: &[[f64; 3]; 3], v: (f64, f64, f64)) -> (f64, f64, f64) {
    let row = |r: &[f64; 3]| r[0] * v.0 + r[1] * v.1 + r[2] * v.2;
    (row(&m[0]), row(&m[1]), row(&m[2]))
}

pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    apply(&FORWARD, (r, g, b))
}

pub fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> (f64, f64, f64) {
    apply(&INVERSE, (y, cb, cr))
}
