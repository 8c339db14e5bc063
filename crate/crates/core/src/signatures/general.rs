//! The realizability polynomial `sum X_ijk Y_i Z_j W_k` for a vertex with
//! signature `x` and neighbor signatures across its a-, b- and c-edges.

use super::VertexSignature;

fn x_coefficients(x: &VertexSignature) -> [[[f64; 3]; 3]; 3] {
    let [x1, x2, x3, x4, x5, x6, x7, x8] = x.0;
    let mut c = [[[0.0; 3]; 3]; 3];
    c[0][0][0] = x1 * x1 * (x3 * x6 + x2 * x7 + x4 * x5 - x1 * x8) - 2.0 * x1 * x2 * x3 * x5;
    c[0][0][1] = x1 * x1 * (x6 * x4 - x2 * x8) + x2 * x2 * (x1 * x7 - x3 * x5);
    c[0][0][2] = x2 * x2 * (x2 * x7 - x1 * x8 - x3 * x6 - x4 * x5) + 2.0 * x1 * x2 * x4 * x6;
    c[0][1][0] = x3 * x3 * (x1 * x6 - x2 * x5) + x1 * x1 * (x7 * x4 - x3 * x8);
    c[0][1][1] = x1 * x2 * (x4 * x7 - x3 * x8) + x3 * x4 * (x1 * x6 - x2 * x5);
    c[0][1][2] = x2 * x2 * (x4 * x7 - x3 * x8) + x4 * x4 * (x1 * x6 - x2 * x5);
    c[0][2][0] = x3 * x3 * (x3 * x6 - x2 * x7 - x4 * x5 - x1 * x8) + 2.0 * x1 * x4 * x3 * x7;
    c[0][2][1] = x4 * x4 * (x1 * x7 - x3 * x5) + x3 * x3 * (x6 * x4 - x2 * x8);
    c[0][2][2] = x4 * x4 * (x2 * x7 + x1 * x8 + x3 * x6 - x4 * x5) - 2.0 * x2 * x3 * x4 * x8;
    c[1][0][0] = x5 * x5 * (x1 * x4 - x2 * x3) + x1 * x1 * (x6 * x7 - x5 * x8);
    c[1][0][1] = x1 * x2 * (x6 * x7 - x5 * x8) + x5 * x6 * (x1 * x4 - x2 * x3);
    c[1][0][2] = x6 * x6 * (x1 * x4 - x2 * x3) + x2 * x2 * (x6 * x7 - x5 * x8);
    c[1][1][0] = x1 * x3 * (x7 * x6 - x5 * x8) + x5 * x7 * (x1 * x4 - x2 * x3);
    c[1][1][1] = x1 * x4 * x6 * x7 - x2 * x3 * x5 * x8;
    c[1][1][2] = x4 * x8 * (x1 * x6 - x2 * x5) + x2 * x6 * (x4 * x7 - x3 * x8);
    c[1][2][0] = x7 * x7 * (x1 * x4 - x2 * x3) + x3 * x3 * (x6 * x7 - x5 * x8);
    c[1][2][1] = x3 * x7 * (x4 * x6 - x2 * x8) + x4 * x8 * (x1 * x7 - x3 * x5);
    c[1][2][2] = x8 * x8 * (x1 * x4 - x2 * x3) + x4 * x4 * (x6 * x7 - x5 * x8);
    c[2][0][0] = x5 * x5 * (x4 * x5 - x1 * x8 - x3 * x6 - x2 * x7) + 2.0 * x1 * x5 * x6 * x7;
    c[2][0][1] = x5 * x5 * (x6 * x4 - x2 * x8) + x6 * x6 * (x1 * x7 - x3 * x5);
    c[2][0][2] = x6 * x6 * (x1 * x8 + x2 * x7 + x4 * x5 - x3 * x6) - 2.0 * x5 * x6 * x2 * x8;
    c[2][1][0] = x5 * x5 * (x4 * x7 - x3 * x8) + x7 * x7 * (x1 * x6 - x2 * x5);
    c[2][1][1] = x6 * x8 * (x1 * x7 - x3 * x5) + x5 * x7 * (x4 * x6 - x2 * x8);
    c[2][1][2] = x8 * x8 * (x1 * x6 - x2 * x5) + x6 * x6 * (x4 * x7 - x3 * x8);
    c[2][2][0] = x7 * x7 * (x1 * x8 + x3 * x6 + x4 * x5 - x2 * x7) - 2.0 * x3 * x8 * x5 * x7;
    c[2][2][1] = x8 * x8 * (x1 * x7 - x3 * x5) + x7 * x7 * (x6 * x4 - x2 * x8);
    c[2][2][2] = x8 * x8 * (x1 * x8 - x3 * x6 - x2 * x7 - x4 * x5) + 2.0 * x7 * x8 * x6 * x4;
    c
}

// The a-neighbor pairs digits 2,3; the b-neighbor 1,3; the c-neighbor 1,2.
fn a_quadratics(y: &VertexSignature) -> [f64; 3] {
    let [y1, y2, y3, y4, y5, y6, y7, y8] = y.0;
    [y1 * y4 - y2 * y3, y1 * y8 + y4 * y5 - y2 * y7 - y3 * y6, y5 * y8 - y6 * y7]
}

fn b_quadratics(z: &VertexSignature) -> [f64; 3] {
    let [z1, z2, z3, z4, z5, z6, z7, z8] = z.0;
    [z1 * z6 - z2 * z5, z1 * z8 + z3 * z6 - z4 * z5 - z2 * z7, z3 * z8 - z4 * z7]
}

fn c_quadratics(w: &VertexSignature) -> [f64; 3] {
    let [w1, w2, w3, w4, w5, w6, w7, w8] = w.0;
    [w1 * w7 - w3 * w5, w1 * w8 + w2 * w7 - w5 * w4 - w3 * w6, w2 * w8 - w6 * w4]
}

/// All 27 products `X_ijk Y_i Z_j W_k`.
pub fn general_terms(
    x: &VertexSignature,
    y_a: &VertexSignature,
    z_b: &VertexSignature,
    w_c: &VertexSignature,
) -> [f64; 27] {
    let c = x_coefficients(x);
    let (ya, zb, wc) = (a_quadratics(y_a), b_quadratics(z_b), c_quadratics(w_c));
    let mut out = [0.0; 27];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[9 * i + 3 * j + k] = c[i][j][k] * ya[i] * zb[j] * wc[k];
            }
        }
    }
    out
}

/// `(value, largest term magnitude)` of the realizability polynomial.
pub fn general_polynomial(
    x: &VertexSignature,
    y_a: &VertexSignature,
    z_b: &VertexSignature,
    w_c: &VertexSignature,
) -> (f64, f64) {
    let t = general_terms(x, y_a, z_b, w_c);
    (t.iter().sum(), t.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
