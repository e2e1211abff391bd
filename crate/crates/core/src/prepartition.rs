//! Reduction of an RGB histogram to weighted cube cells.
//!
//! The 256³ color cube is cut into axis-aligned cubes of side `side`
//! (32 by default, giving 8 per axis and at most 512 cells). Every occupied
//! cube becomes one point at its geometric center, weighted by the number of
//! pixels that fall inside it. Cells are listed in ascending lexicographic
//! order of their `(i, j, k)` index, which fixes the chromosome layout.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image_io::ImageRgb;

pub const DEFAULT_CUBE_SIDE: u32 = 32;

/// Pixel count per exact RGB color.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorHistogram {
    pub entries: BTreeMap<[u8; 3], u64>,
}

impl ColorHistogram {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }
}

/// One occupied cube of the pre-partition.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedCell {
    pub index: [u8; 3],
    pub center: [f64; 3],
    pub weight: u64,
}

pub fn build_histogram(image: &ImageRgb) -> ColorHistogram {
    let mut entries = BTreeMap::new();
    for px in image.pixels() {
        *entries.entry(*px).or_insert(0) += 1;
    }
    ColorHistogram { entries }
}

fn check_side(side: u32) -> Result<()> {
    if side == 0 || side > 256 || !side.is_power_of_two() {
        return Err(Error::arg(format!(
            "cube side {side} must be a power of two in [1, 256]"
        )));
    }
    Ok(())
}

/// Cube index of `color` with the default side of 32.
pub fn cell_of_color(color: [u8; 3]) -> [u8; 3] {
    cell_of_color_with(color, DEFAULT_CUBE_SIDE)
}

pub fn cell_of_color_with(color: [u8; 3], side: u32) -> [u8; 3] {
    color.map(|c| (u32::from(c) / side) as u8)
}

/// Geometric center of cube `index`: `side * i + (side - 1) / 2` per axis.
pub fn cell_center(index: [u8; 3], side: u32) -> [f64; 3] {
    let half = (f64::from(side) - 1.0) / 2.0;
    index.map(|i| f64::from(side) * f64::from(i) + half)
}

pub fn partition_cells(hist: &ColorHistogram) -> Result<Vec<WeightedCell>> {
    partition_cells_with(hist, DEFAULT_CUBE_SIDE)
}

pub fn partition_cells_with(hist: &ColorHistogram, side: u32) -> Result<Vec<WeightedCell>> {
    check_side(side)?;
    if hist.is_empty() {
        return Err(Error::arg("cannot partition an empty histogram"));
    }
    let mut cells: BTreeMap<[u8; 3], u64> = BTreeMap::new();
    for (&color, &count) in &hist.entries {
        *cells.entry(cell_of_color_with(color, side)).or_insert(0) += count;
    }
    Ok(cells
        .into_iter()
        .filter(|&(_, w)| w > 0)
        .map(|(index, weight)| WeightedCell {
            index,
            center: cell_center(index, side),
            weight,
        })
        .collect())
}

/// Position of the cell holding `color` in a sorted cell list.
pub fn cell_position(cells: &[WeightedCell], color: [u8; 3], side: u32) -> Option<usize> {
    let idx = cell_of_color_with(color, side);
    cells.binary_search_by(|c| c.index.cmp(&idx)).ok()
}
