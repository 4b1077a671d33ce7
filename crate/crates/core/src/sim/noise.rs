//! Seedable lattice-gradient (Perlin-style) noise in two dimensions.

use std::f64::consts::TAU;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn lattice_gradient(seed: u64, ix: i64, iy: i64) -> (f64, f64) {
    let h = splitmix64(
        seed ^ splitmix64((ix as u64).wrapping_mul(0x632B_E59B_D9B4_E019))
            ^ splitmix64((iy as u64).wrapping_mul(0x8CB9_2BA7_2F3D_8DD7).rotate_left(17)),
    );
    let angle = (h >> 11) as f64 / (1u64 << 53) as f64 * TAU;
    let (s, c) = angle.sin_cos();
    (c, s)
}

#[inline]
fn smootherstep(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

/// Classic gradient noise with unit lattice spacing. Zero at lattice points,
/// zero-mean, bounded by `√2 / 2`.
pub fn gradient_noise(seed: u64, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let ix = x0 as i64;
    let iy = y0 as i64;

    let dot = |cx: i64, cy: i64, dx: f64, dy: f64| {
        let (gx, gy) = lattice_gradient(seed, cx, cy);
        gx * dx + gy * dy
    };
    let n00 = dot(ix, iy, fx, fy);
    let n10 = dot(ix + 1, iy, fx - 1.0, fy);
    let n01 = dot(ix, iy + 1, fx, fy - 1.0);
    let n11 = dot(ix + 1, iy + 1, fx - 1.0, fy - 1.0);

    let u = smootherstep(fx);
    let v = smootherstep(fy);
    let a = n00 + u * (n10 - n00);
    let b = n01 + u * (n11 - n01);
    a + v * (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_on_lattice() {
        for i in -3..3 {
            for j in -3..3 {
                assert_eq!(gradient_noise(7, i as f64, j as f64), 0.0);
            }
        }
    }

    #[test]
    fn bounded_and_continuous() {
        let mut prev = gradient_noise(3, 0.0, 0.3);
        for k in 1..10_000 {
            let x = k as f64 * 1e-3;
            let n = gradient_noise(3, x, 0.3);
            assert!(n.abs() <= std::f64::consts::FRAC_1_SQRT_2 + 1e-12);
            assert!((n - prev).abs() < 1e-2);
            prev = n;
        }
    }

    #[test]
    fn seeds_differ() {
        let a: Vec<f64> = (0..20).map(|k| gradient_noise(1, k as f64 * 0.37, 0.5)).collect();
        let b: Vec<f64> = (0..20).map(|k| gradient_noise(2, k as f64 * 0.37, 0.5)).collect();
        assert_ne!(a, b);
    }
}
