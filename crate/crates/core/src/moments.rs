//! Spatial, central and normalized central moments of binary region masks.
//!
//! Pixels of the mask have intensity 1, everything else 0. Spatial moments
//! use absolute image coordinates. Central moments are evaluated from exact
//! integer power sums taken relative to the mask's bounding-box corner, so
//! they do not depend on where the mask sits in the image, and the first
//! order central moments come out as exactly zero.

use crate::error::{Error, Result};
use crate::geometry::RegionMask;

/// Order-2 and order-3 `(j, i)` exponent pairs, in descriptor order:
/// nu20, nu11, nu02, nu30, nu21, nu12, nu03.
pub const NCM_ORDERS: [(u32, u32); 7] = [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
pub const NCM_LEN: usize = 7;

/// Moments of a mask up to total order 3, indexed `[j][i]` for `x^j y^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    pub m: [[f64; 4]; 4],
    pub centroid: (f64, f64),
    pub mu: [[f64; 4]; 4],
    pub nu: [f64; NCM_LEN],
}

impl MomentSet {
    pub fn compute(mask: &RegionMask) -> Result<MomentSet> {
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        let mut m = [[0.0; 4]; 4];
        for (x, y) in mask.pixels() {
            let (x, y) = (x as f64, y as f64);
            for (j, row) in m.iter_mut().enumerate() {
                for (i, cell) in row.iter_mut().enumerate().take(4 - j) {
                    *cell += x.powi(j as i32) * y.powi(i as i32);
                }
            }
        }
        let centroid = (m[1][0] / m[0][0], m[0][1] / m[0][0]);
        let mu = central_moments(mask);
        let m00 = m[0][0];
        let mut nu = [0.0; NCM_LEN];
        for (slot, &(j, i)) in nu.iter_mut().zip(NCM_ORDERS.iter()) {
            *slot = mu[j as usize][i as usize] / m00.powf((i + j) as f64 / 2.0 + 1.0);
        }
        Ok(MomentSet { m, centroid, mu, nu })
    }
}

fn binomial(n: u32, k: u32) -> i128 {
    (0..k).fold(1i128, |acc, t| acc * (n - t) as i128 / (t + 1) as i128)
}

/// Central moments `mu[j][i]` for `j + i <= 3`.
fn central_moments(mask: &RegionMask) -> [[f64; 4]; 4] {
    let bbox = mask.bbox();
    // local power sums s[p][q] = sum u^p v^q, exact
    let mut s = [[0i128; 4]; 4];
    for (x, y) in mask.pixels() {
        let (u, v) = ((x - bbox.x0) as i128, (y - bbox.y0) as i128);
        let up = [1, u, u * u, u * u * u];
        let vp = [1, v, v * v, v * v * v];
        for p in 0..4 {
            for q in 0..4 - p {
                s[p][q] += up[p] * vp[q];
            }
        }
    }
    exact_central(&s).unwrap_or_else(|| float_central(mask))
}

/// `mu_pq = T_pq / s00^(p+q)` with
/// `T_pq = sum_{a,b} C(p,a) C(q,b) s_ab (-s10)^(p-a) (-s01)^(q-b) s00^(a+b)`.
/// Returns None on i128 overflow (masks far beyond face scale).
fn exact_central(s: &[[i128; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let (s00, s10, s01) = (s[0][0], s[1][0], s[0][1]);
    let mut mu = [[0.0; 4]; 4];
    for p in 0..4u32 {
        for q in 0..4 - p {
            let mut t: i128 = 0;
            for a in 0..=p {
                for b in 0..=q {
                    let term = binomial(p, a)
                        .checked_mul(binomial(q, b))?
                        .checked_mul(s[a as usize][b as usize])?
                        .checked_mul((-s10).checked_pow(p - a)?)?
                        .checked_mul((-s01).checked_pow(q - b)?)?
                        .checked_mul(s00.checked_pow(a + b)?)?;
                    t = t.checked_add(term)?;
                }
            }
            let denom = (s00 as f64).powi((p + q) as i32);
            mu[p as usize][q as usize] = t as f64 / denom;
        }
    }
    Some(mu)
}

fn float_central(mask: &RegionMask) -> [[f64; 4]; 4] {
    let bbox = mask.bbox();
    let local = || mask.pixels().map(|(x, y)| ((x - bbox.x0) as f64, (y - bbox.y0) as f64));
    let n = mask.pixel_count() as f64;
    let (su, sv) = local().fold((0.0, 0.0), |(a, b), (u, v)| (a + u, b + v));
    let (cu, cv) = (su / n, sv / n);
    let mut mu = [[0.0; 4]; 4];
    for (u, v) in local() {
        let (du, dv) = (u - cu, v - cv);
        for (p, row) in mu.iter_mut().enumerate() {
            for (q, cell) in row.iter_mut().enumerate().take(4 - p) {
                *cell += du.powi(p as i32) * dv.powi(q as i32);
            }
        }
    }
    mu[1][0] = 0.0;
    mu[0][1] = 0.0;
    mu
}

pub fn spatial_moment(mask: &RegionMask, j: u32, i: u32) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mask
        .pixels()
        .map(|(x, y)| (x as f64).powi(j as i32) * (y as f64).powi(i as i32))
        .sum())
}

pub fn centroid(mask: &RegionMask) -> Result<(f64, f64)> {
    let m00 = spatial_moment(mask, 0, 0)?;
    Ok((spatial_moment(mask, 1, 0)? / m00, spatial_moment(mask, 0, 1)? / m00))
}

/// Central moment `mu_ji`; orders above 3 are summed directly about the centroid.
pub fn central_moment(mask: &RegionMask, j: u32, i: u32) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if j + i <= 3 {
        return Ok(central_moments(mask)[j as usize][i as usize]);
    }
    let (cx, cy) = centroid(mask)?;
    Ok(mask
        .pixels()
        .map(|(x, y)| (x as f64 - cx).powi(j as i32) * (y as f64 - cy).powi(i as i32))
        .sum())
}

/// The 7-entry shape descriptor (nu20, nu11, nu02, nu30, nu21, nu12, nu03).
pub fn normalized_central_moments(mask: &RegionMask) -> Result<[f64; NCM_LEN]> {
    Ok(MomentSet::compute(mask)?.nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(x0: usize, y0: usize, w: usize, h: usize) -> RegionMask {
        let pixels: Vec<_> = (y0..y0 + h)
            .flat_map(|y| (x0..x0 + w).map(move |x| (x, y)))
            .collect();
        RegionMask::from_pixels(0, &pixels)
    }

    #[test]
    fn single_pixel() {
        let mask = RegionMask::from_pixels(0, &[(3, 5)]);
        assert_eq!(spatial_moment(&mask, 0, 0).unwrap(), 1.0);
        assert_eq!(spatial_moment(&mask, 1, 0).unwrap(), 3.0);
        assert_eq!(spatial_moment(&mask, 0, 1).unwrap(), 5.0);
        assert_eq!(centroid(&mask).unwrap(), (3.0, 5.0));
    }

    #[test]
    fn two_by_two_block() {
        let mask = block(0, 0, 2, 2);
        assert_eq!(spatial_moment(&mask, 0, 0).unwrap(), 4.0);
        assert_eq!(spatial_moment(&mask, 1, 0).unwrap(), 2.0);
        assert_eq!(spatial_moment(&mask, 0, 1).unwrap(), 2.0);
        assert_eq!(centroid(&mask).unwrap(), (0.5, 0.5));
        assert_eq!(central_moment(&mask, 2, 0).unwrap(), 1.0);
        assert_eq!(normalized_central_moments(&mask).unwrap()[0], 0.0625);
    }

    #[test]
    fn ten_by_ten_m10() {
        assert_eq!(spatial_moment(&block(0, 0, 10, 10), 1, 0).unwrap(), 450.0);
    }

    #[test]
    fn l_shape_centroid() {
        let mask = RegionMask::from_pixels(0, &[(0, 0), (1, 0), (0, 1)]);
        let (cx, cy) = centroid(&mask).unwrap();
        assert!((cx - 1.0 / 3.0).abs() < 1e-15 && (cy - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn first_order_central_moments_vanish() {
        let mask = RegionMask::from_pixels(0, &[(4, 9), (5, 9), (4, 10), (11, 3), (7, 7)]);
        let set = MomentSet::compute(&mask).unwrap();
        assert_eq!(set.mu[1][0], 0.0);
        assert_eq!(set.mu[0][1], 0.0);
        assert_eq!(set.mu[0][0], 5.0);
    }

    #[test]
    fn symmetric_mask_odd_moments_vanish() {
        // symmetric about the vertical line x = 5
        let mask = RegionMask::from_pixels(0, &[(3, 0), (7, 0), (4, 1), (6, 1), (5, 2), (5, 4)]);
        assert_eq!(central_moment(&mask, 1, 1).unwrap(), 0.0);
        assert_eq!(central_moment(&mask, 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn higher_orders_fall_back_to_direct_sum() {
        let mask = block(0, 0, 2, 2);
        // four corners at distance 0.5 each way: 4 * 0.5^4
        assert_eq!(central_moment(&mask, 4, 0).unwrap(), 0.25);
    }

    #[test]
    fn empty_mask() {
        let empty = RegionMask::from_pixels(0, &[]);
        assert!(matches!(spatial_moment(&empty, 0, 0), Err(Error::EmptyMask)));
        assert!(matches!(normalized_central_moments(&empty), Err(Error::EmptyMask)));
    }

    #[test]
    fn exact_and_float_paths_agree() {
        let pixels: Vec<_> = (0..40usize)
            .flat_map(|y| (0..30usize).filter(move |x| (x * 7 + y * 3) % 5 != 0).map(move |x| (x + 2, y)))
            .collect();
        let mask = RegionMask::from_pixels(0, &pixels);
        let exact = central_moments(&mask);
        let float = float_central(&mask);
        for p in 0..4 {
            for q in 0..4 - p {
                let scale = exact[2][0].abs().max(1.0).powf((p + q) as f64 / 2.0);
                assert!((exact[p][q] - float[p][q]).abs() <= 1e-9 * scale * 1200.0);
            }
        }
    }
}
