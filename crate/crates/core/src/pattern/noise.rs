//! Seeded 2D simplex noise in roughly `[-1, 1]`.

const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        -std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    ),
    (
        -std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
    ),
];

fn hash(i: i64, j: i64, seed: i64) -> usize {
    let mut h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (j as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ (seed as u64).wrapping_mul(0x1656_67B1_9E37_79F9);
    h ^= h >> 33;
    h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    h ^= h >> 33;
    (h & 7) as usize
}

pub fn simplex2(x: f64, y: f64, seed: i64) -> f64 {
    let f2 = 0.5 * (3f64.sqrt() - 1.0);
    let g2 = (3.0 - 3f64.sqrt()) / 6.0;
    let s = (x + y) * f2;
    let i = (x + s).floor();
    let j = (y + s).floor();
    let t = (i + j) * g2;
    let x0 = x - (i - t);
    let y0 = y - (j - t);
    let (i1, j1) = if x0 > y0 { (1.0, 0.0) } else { (0.0, 1.0) };
    let corners = [
        (x0, y0, 0.0, 0.0),
        (x0 - i1 + g2, y0 - j1 + g2, i1, j1),
        (x0 - 1.0 + 2.0 * g2, y0 - 1.0 + 2.0 * g2, 1.0, 1.0),
    ];
    let mut total = 0.0;
    for (dx, dy, oi, oj) in corners {
        let r = 0.5 - dx * dx - dy * dy;
        if r > 0.0 {
            let (gx, gy) = GRADIENTS[hash((i + oi) as i64, (j + oj) as i64, seed)];
            total += r.powi(4) * (gx * dx + gy * dy);
        }
    }
    70.0 * total
}
