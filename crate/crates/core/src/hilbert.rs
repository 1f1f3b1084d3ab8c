//! Hilbert space-filling curve index mapping.
//!
//! Orientation is fixed to the quadrant-rotation convention with index 0 at
//! (0, 0) and index `4^order - 1` at (`2^order - 1`, 0). Coordinates are
//! (x, y) = (column, row).

use crate::error::{Error, Result};

/// Number of cells along one side of the order-`order` curve.
#[inline]
pub fn side(order: u32) -> u64 {
    1u64 << order
}

/// Total number of cells of the order-`order` curve.
#[inline]
pub fn cell_count(order: u32) -> u64 {
    1u64 << (2 * order)
}

fn check_order(order: u32) -> Result<()> {
    if order == 0 || order > 31 {
        return Err(Error::Config(format!(
            "hilbert order must be in 1..=31, got {order}"
        )));
    }
    Ok(())
}

#[inline]
fn rotate(s: u64, x: &mut u64, y: &mut u64, rx: u64, ry: u64) {
    if ry == 0 {
        if rx == 1 {
            *x = s - 1 - *x;
            *y = s - 1 - *y;
        }
        std::mem::swap(x, y);
    }
}

/// Map a curve index to (x, y) cell coordinates.
pub fn hilbert_d2xy(order: u32, d: u64) -> Result<(u32, u32)> {
    check_order(order)?;
    if d >= cell_count(order) {
        return Err(Error::HilbertIndexOutOfRange { index: d, order });
    }
    let n = side(order);
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = d;
    let mut s = 1u64;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    Ok((x as u32, y as u32))
}

/// Map (x, y) cell coordinates to the curve index. Inverse of [`hilbert_d2xy`].
pub fn hilbert_xy2d(order: u32, x: u32, y: u32) -> Result<u64> {
    check_order(order)?;
    let n = side(order);
    if u64::from(x) >= n || u64::from(y) >= n {
        return Err(Error::HilbertCoordOutOfRange { x, y, order });
    }
    let (mut x, mut y) = (u64::from(x), u64::from(y));
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        // Reduce to the quadrant-local coordinates before rotating.
        x &= s - 1;
        y &= s - 1;
        rotate(s, &mut x, &mut y, rx, ry);
        s /= 2;
    }
    Ok(d)
}
