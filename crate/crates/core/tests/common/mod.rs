//! Reference implementations used as test oracles. They are written
//! independently of the library code and favour obviousness over speed.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regionfer::features::{FeatureKinds, FeatureTable};
use regionfer::image::Image;
use regionfer::landmarks::Point;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bin of an 8-bit code: uniform codes (at most two circular bit changes)
/// numbered in ascending order, the rest share the last bin.
pub fn oracle_bin(code: u8) -> usize {
    let changes = |c: u8| (0..8).filter(|&k| ((c >> k) & 1) != ((c >> ((k + 1) % 8)) & 1)).count();
    if changes(code) > 2 {
        return 58;
    }
    (0..code).filter(|&c| changes(c) <= 2).count()
}

/// Sum over the 8 neighbours of `s(g_p - g_c) 2^p`, with p = 7 at the
/// top-left neighbour and p decreasing clockwise.
pub fn oracle_lbp_code(img: &Image, x: usize, y: usize) -> u8 {
    let weighted: [(i32, i32, u32); 8] = [
        (-1, -1, 7),
        (0, -1, 6),
        (1, -1, 5),
        (1, 0, 4),
        (1, 1, 3),
        (0, 1, 2),
        (-1, 1, 1),
        (-1, 0, 0),
    ];
    let gc = img.get(x, y) as i32;
    let mut code = 0u32;
    for (dx, dy, p) in weighted {
        let gp = img.get((x as i32 + dx) as usize, (y as i32 + dy) as usize) as i32;
        if gp - gc >= 0 {
            code += 1 << p;
        }
    }
    code as u8
}

/// Raw 59-bin histogram over interior pixels accepted by `inside`.
pub fn oracle_histogram(img: &Image, inside: impl Fn(usize, usize) -> bool) -> [u64; 59] {
    let mut h = [0u64; 59];
    for y in 1..img.height() - 1 {
        for x in 1..img.width() - 1 {
            if inside(x, y) {
                h[oracle_bin(oracle_lbp_code(img, x, y))] += 1;
            }
        }
    }
    h
}

/// Classic even-odd crossing test.
pub fn pnpoly(poly: &[Point], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

pub fn random_polygon(r: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(r.random_range(lo..hi), r.random_range(lo..hi)))
        .collect()
}

pub fn random_image(r: &mut impl Rng, w: usize, h: usize, max: u8) -> Image {
    let data = (0..w * h).map(|_| r.random_range(0..=max)).collect();
    Image::new(w, h, data).unwrap()
}

/// `m_pq = sum x^p y^q`, exact.
pub fn oracle_raw(pixels: &[(usize, usize)], p: u32, q: u32) -> i128 {
    pixels.iter().map(|&(x, y)| (x as i128).pow(p) * (y as i128).pow(q)).sum()
}

/// Central moment from the definition, computed exactly as
/// `sum (m00 x - m10)^p (m00 y - m01)^q / m00^(p+q)`.
pub fn oracle_mu(pixels: &[(usize, usize)], p: u32, q: u32) -> f64 {
    let m00 = pixels.len() as i128;
    let m10 = oracle_raw(pixels, 1, 0);
    let m01 = oracle_raw(pixels, 0, 1);
    let num: i128 = pixels
        .iter()
        .map(|&(x, y)| (m00 * x as i128 - m10).pow(p) * (m00 * y as i128 - m01).pow(q))
        .sum();
    num as f64 / (m00 as f64).powi((p + q) as i32)
}

pub fn oracle_nu(pixels: &[(usize, usize)], p: u32, q: u32) -> f64 {
    oracle_mu(pixels, p, q) / (pixels.len() as f64).powf((p + q) as f64 / 2.0 + 1.0)
}

pub fn kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>()).exp()
}

pub fn dual_value(alpha: &[f64], x: &[Vec<f64>], y: &[f64], gamma: f64) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(&x[i], &x[j], gamma);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Grid maximization of the SVM dual. The first n-1 multipliers range over
/// a grid, the last one is fixed by `sum a_i y_i = 0` and must land in
/// `[0, C]`. The grid is refined around the incumbent several times; the
/// dual is concave, so the refinement converges to the global maximum.
pub fn brute_force_dual(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64) -> f64 {
    let n = x.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * kernel(&x[i], &x[j], gamma)).collect())
        .collect();
    let value = |a: &[f64]| {
        let quad: f64 = (0..n).map(|i| (0..n).map(|j| a[i] * a[j] * q[i][j]).sum::<f64>()).sum();
        a.iter().sum::<f64>() - 0.5 * quad
    };
    let free = n - 1;
    let steps = match free {
        1 => 400,
        2 => 60,
        3 => 24,
        _ => 12,
    };
    let mut center = vec![c / 2.0; free];
    let mut half = c / 2.0;
    let mut best = f64::NEG_INFINITY;
    for _ in 0..40 {
        let lo: Vec<f64> = center.iter().map(|&m| (m - half).max(0.0)).collect();
        let hi: Vec<f64> = center.iter().map(|&m| (m + half).min(c)).collect();
        let mut idx = vec![0usize; free];
        let mut alpha = vec![0.0; n];
        let mut incumbent = center.clone();
        loop {
            for k in 0..free {
                alpha[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / steps as f64;
            }
            let last = -y[n - 1] * (0..free).map(|k| alpha[k] * y[k]).sum::<f64>();
            if (-1e-12..=c + 1e-12).contains(&last) {
                alpha[n - 1] = last.clamp(0.0, c);
                let v = value(&alpha);
                if v > best {
                    best = v;
                    incumbent.copy_from_slice(&alpha[..free]);
                }
            }
            let mut k = 0;
            while k < free {
                idx[k] += 1;
                if idx[k] <= steps {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == free {
                break;
            }
        }
        center = incumbent;
        half *= 0.6;
    }
    best
}

/// Six classes over `regions` blocks of `dim` values each. Class `c` is
/// encoded jointly by two regions: `signal_a` carries `c % 2` and
/// `signal_b` carries `c / 2` (one region carries `c` itself when both
/// indices coincide); every other block is uniform noise.
pub fn two_signal_table(
    per_class: usize,
    names: &[&str],
    signal_a: usize,
    signal_b: usize,
    dim: usize,
    seed: u64,
) -> (FeatureTable, Vec<usize>, Vec<String>) {
    let mut r = rng(seed);
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    for k in 0..per_class * 6 {
        let class = k % 6;
        labels.push(class);
        let sample = (0..names.len())
            .map(|region| {
                (0..dim)
                    .map(|d| {
                        let noise: f64 = r.random_range(0.0..1.0);
                        let level = if region == signal_a && signal_a == signal_b {
                            class as f64 / 5.0
                        } else if region == signal_a {
                            (class % 2) as f64
                        } else if region == signal_b {
                            (class / 2) as f64 / 2.0
                        } else {
                            return noise;
                        };
                        if d == 0 {
                            level * 4.0 + 0.3 * noise
                        } else {
                            noise
                        }
                    })
                    .collect()
            })
            .collect();
        blocks.push(sample);
    }
    let table = FeatureTable {
        region_names: names.iter().map(|s| s.to_string()).collect(),
        kinds: FeatureKinds::Lbp,
        blocks,
    };
    let classes = (0..6).map(|c| format!("class{c}")).collect();
    (table, labels, classes)
}

/// Gaussian-ish blobs (sum of uniforms) around the given centers.
pub fn blobs(centers: &[(f64, f64)], per: usize, spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut r = rng(seed);
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..per {
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            let mut g = || (0..4).map(|_| r.random_range(-1.0..1.0)).sum::<f64>() * spread / 2.0;
            x.push(vec![cx + g(), cy + g()]);
            labels.push(c);
        }
    }
    (x, labels)
}
