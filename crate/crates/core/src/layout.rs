//! Tile layout: the bijection between linear byte offsets and 2-D pixel
//! coordinates.
//!
//! The byte stream is split into `w*w`-byte chunks; each chunk fills one
//! `w x w` square tile along the Hilbert curve, and tiles are stacked
//! vertically. With the default tile width 256 one tile covers exactly one
//! classifier patch.

use crate::error::{Error, Result};
use crate::hilbert::{hilbert_d2xy, hilbert_xy2d};

/// Default tile width for full-resolution images.
pub const DEFAULT_TILE_WIDTH: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileLayout {
    tile_width: u32,
    order: u32,
    n_bytes: u64,
    n_tiles: u64,
}

impl TileLayout {
    pub fn new(tile_width: u32, n_bytes: u64) -> Result<Self> {
        if tile_width < 2 || !tile_width.is_power_of_two() {
            return Err(Error::Config(format!(
                "tile width must be a power of two >= 2, got {tile_width}"
            )));
        }
        if n_bytes == 0 {
            return Err(Error::Empty("layout over zero bytes".into()));
        }
        let order = tile_width.trailing_zeros();
        let tile_cells = u64::from(tile_width) * u64::from(tile_width);
        let n_tiles = n_bytes.div_ceil(tile_cells);
        Ok(Self {
            tile_width,
            order,
            n_bytes,
            n_tiles,
        })
    }

    #[inline]
    pub fn tile_width(&self) -> u32 {
        self.tile_width
    }

    /// Hilbert order of one tile (`log2` of the tile width).
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub fn n_bytes(&self) -> u64 {
        self.n_bytes
    }

    #[inline]
    pub fn n_tiles(&self) -> u64 {
        self.n_tiles
    }

    /// Bytes covered by one tile (`w * w`).
    #[inline]
    pub fn tile_cells(&self) -> u64 {
        u64::from(self.tile_width) * u64::from(self.tile_width)
    }

    /// Total pixel count, including tail padding of the last tile.
    #[inline]
    pub fn pixel_count(&self) -> u64 {
        self.n_tiles * self.tile_cells()
    }

    #[inline]
    pub fn image_width(&self) -> u32 {
        self.tile_width
    }

    pub fn image_height(&self) -> u32 {
        let h = self.n_tiles * u64::from(self.tile_width);
        u32::try_from(h).expect("image height exceeds u32")
    }

    /// Map a byte offset to (row, col) pixel coordinates.
    pub fn offset_to_pixel(&self, offset: u64) -> Result<(u32, u32)> {
        if offset >= self.pixel_count() {
            return Err(Error::OffsetOutOfRange {
                offset,
                len: self.pixel_count(),
            });
        }
        let cells = self.tile_cells();
        let tile = offset / cells;
        let (x, y) = hilbert_d2xy(self.order, offset % cells)?;
        Ok((u32::try_from(tile * u64::from(self.tile_width)).unwrap() + y, x))
    }

    /// Exact inverse of [`TileLayout::offset_to_pixel`].
    pub fn pixel_to_offset(&self, row: u32, col: u32) -> Result<u64> {
        if row >= self.image_height() || col >= self.image_width() {
            return Err(Error::PixelOutOfBounds {
                row,
                col,
                height: self.image_height(),
                width: self.image_width(),
            });
        }
        let tile = u64::from(row / self.tile_width);
        let y = row % self.tile_width;
        let d = hilbert_xy2d(self.order, col, y)?;
        Ok(tile * self.tile_cells() + d)
    }

    /// Intra-tile curve as a flat lookup table: entry `d` holds the pixel
    /// index `y * w + x` within one tile. Shared by every tile.
    pub fn curve_table(&self) -> Vec<u32> {
        let w = self.tile_width;
        let cells = self.tile_cells() as usize;
        let mut table = vec![0u32; cells];
        for (d, slot) in table.iter_mut().enumerate() {
            let (x, y) = hilbert_d2xy(self.order, d as u64).expect("in-range index");
            *slot = y * w + x;
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_maps_to_origin() {
        for w in [2, 4, 16, 256] {
            let layout = TileLayout::new(w, 1000).unwrap();
            assert_eq!(layout.offset_to_pixel(0).unwrap(), (0, 0));
        }
    }

    #[test]
    fn tile_stacking() {
        // Start of tile 1 with w=4 lands on the curve origin of the next band.
        let layout = TileLayout::new(4, 32).unwrap();
        assert_eq!(layout.offset_to_pixel(16).unwrap(), (4, 0));
    }

    #[test]
    fn offset_7_matches_order2_oracle() {
        // Frozen from the order-2 curve enumeration: index 7 sits at (x=1, y=2).
        let layout = TileLayout::new(4, 16).unwrap();
        assert_eq!(layout.offset_to_pixel(7).unwrap(), (2, 1));
    }

    #[test]
    fn pixel_to_offset_inverts() {
        assert_eq!(
            TileLayout::new(4, 32)
                .unwrap()
                .pixel_to_offset(4, 0)
                .unwrap(),
            16
        );
        assert_eq!(
            TileLayout::new(4, 16)
                .unwrap()
                .pixel_to_offset(2, 1)
                .unwrap(),
            7
        );
        let layout = TileLayout::new(8, 1000).unwrap();
        for offset in 0..layout.pixel_count() {
            let (r, c) = layout.offset_to_pixel(offset).unwrap();
            assert_eq!(layout.pixel_to_offset(r, c).unwrap(), offset);
        }
    }

    #[test]
    fn tile_count_rounds_up() {
        let layout = TileLayout::new(4, 17).unwrap();
        assert_eq!(layout.n_tiles(), 2);
        assert_eq!(layout.image_height(), 8);
        assert_eq!(layout.pixel_count(), 32);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(TileLayout::new(3, 100).is_err());
        assert!(TileLayout::new(0, 100).is_err());
        assert!(TileLayout::new(4, 0).is_err());
        let layout = TileLayout::new(4, 16).unwrap();
        assert!(layout.offset_to_pixel(16).is_err());
        assert!(layout.pixel_to_offset(4, 0).is_err());
    }

    #[test]
    fn curve_table_agrees_with_offset_map() {
        let layout = TileLayout::new(16, 999).unwrap();
        let table = layout.curve_table();
        for d in 0..layout.tile_cells() {
            let (r, c) = layout.offset_to_pixel(d).unwrap();
            assert_eq!(table[d as usize], r * 16 + c);
        }
    }
}
