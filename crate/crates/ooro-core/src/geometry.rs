//! Binary mask decoding and bounding-box arithmetic for the baselines.
//!
//! Masks arrive as COCO-style `segmentation` fields: polygon lists or RLE
//! objects (integer counts or the compressed string form). RLE runs are
//! column-major and alternate zero/one starting with zeros. Polygon
//! rasterization sets a pixel iff its center `(c+0.5, r+0.5)` lies inside the
//! polygon under the even-odd rule; the convention is fixed so that any
//! systematic bias cancels when two masks are compared over the same region.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("RLE counts sum to {actual}, expected {expected} (height x width)")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("polygon has {vertices} vertices, need at least 3")]
    DegeneratePolygon { vertices: usize },
    #[error("polygon coordinate list has odd length {count}")]
    OddCoordinateCount { count: usize },
    #[error("polygon coordinate is not finite")]
    NonFiniteCoordinate,
    #[error("malformed RLE count string: {0}")]
    MalformedRleString(String),
}

/// Axis-aligned box in pixel coordinates; `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Bottom edge `y + h`; larger means lower in the image.
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Overlap rectangle, or `None` when the overlap area is zero.
    /// Touching edges count as no overlap.
    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        if x1 > x0 && y1 > y0 {
            Some(BBox::new(x0, y0, x1 - x0, y1 - y0))
        } else {
            None
        }
    }

    /// Clamps the box to `[0,width] x [0,height]`, shrinking as needed.
    pub fn clamp_to(&self, width: f64, height: f64) -> BBox {
        let x0 = self.x.clamp(0.0, width);
        let y0 = self.y.clamp(0.0, height);
        let x1 = (self.x + self.w).clamp(x0, width);
        let y1 = (self.y + self.h).clamp(y0, height);
        BBox::new(x0, y0, x1 - x0, y1 - y0)
    }
}

/// Dense row-major boolean pixel grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of set pixels whose centers fall inside `region`
    /// (half-open `[x, x+w) x [y, y+h)`, clamped to the mask bounds).
    pub fn count_in_region(&self, region: &BBox) -> usize {
        let region = region.clamp_to(self.width as f64, self.height as f64);
        if region.w <= 0.0 || region.h <= 0.0 {
            return 0;
        }
        let col_start = pixel_range_start(region.x);
        let col_end = pixel_range_end(region.x + region.w, self.width);
        let row_start = pixel_range_start(region.y);
        let row_end = pixel_range_end(region.y + region.h, self.height);
        let mut count = 0;
        for r in row_start..row_end {
            for c in col_start..col_end {
                if self.bits[r * self.width + c] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Tightest box covering all set pixels, or `None` for an empty mask.
    pub fn tight_bbox(&self) -> Option<BBox> {
        let mut min_r = usize::MAX;
        let mut max_r = 0usize;
        let mut min_c = usize::MAX;
        let mut max_c = 0usize;
        let mut any = false;
        for r in 0..self.height {
            for c in 0..self.width {
                if self.bits[r * self.width + c] {
                    any = true;
                    min_r = min_r.min(r);
                    max_r = max_r.max(r);
                    min_c = min_c.min(c);
                    max_c = max_c.max(c);
                }
            }
        }
        any.then(|| {
            BBox::new(
                min_c as f64,
                min_r as f64,
                (max_c - min_c + 1) as f64,
                (max_r - min_r + 1) as f64,
            )
        })
    }
}

/// First pixel index whose center `i + 0.5` is >= `lo`.
fn pixel_range_start(lo: f64) -> usize {
    ((lo - 0.5).ceil().max(0.0)) as usize
}

/// One past the last pixel index whose center `i + 0.5` is < `hi`.
fn pixel_range_end(hi: f64, limit: usize) -> usize {
    (((hi - 0.5).ceil()).max(0.0) as usize).min(limit)
}

/// Decodes uncompressed RLE counts (column-major, zero-run first).
pub fn decode_rle(counts: &[u32], height: usize, width: usize) -> Result<BinaryMask, GeometryError> {
    let total: usize = counts.iter().map(|&c| c as usize).sum();
    if total != height * width {
        return Err(GeometryError::LengthMismatch {
            expected: height * width,
            actual: total,
        });
    }
    let mut mask = BinaryMask::new(width, height);
    if height == 0 || width == 0 {
        return Ok(mask);
    }
    let mut pos = 0usize;
    let mut value = false;
    for &run in counts {
        if value {
            for p in pos..pos + run as usize {
                // column-major: position p covers pixel (p % height, p / height)
                mask.set(p % height, p / height, true);
            }
        }
        pos += run as usize;
        value = !value;
    }
    Ok(mask)
}

/// Encodes a mask to RLE counts: column-major runs, zero-run first
/// (the leading count is 0 when the mask starts with a set pixel).
pub fn encode_rle(mask: &BinaryMask) -> Vec<u32> {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for c in 0..mask.width() {
        for r in 0..mask.height() {
            let bit = mask.get(r, c);
            if bit == current {
                run += 1;
            } else {
                counts.push(run);
                current = bit;
                run = 1;
            }
        }
    }
    if mask.width() * mask.height() > 0 {
        counts.push(run);
    }
    counts
}

/// Expands the compressed COCO count string (6-bit chars, offset 48,
/// deltas against the count two positions back from the fourth count on).
pub fn rle_counts_from_string(s: &str) -> Result<Vec<u32>, GeometryError> {
    let bytes = s.as_bytes();
    let mut counts: Vec<i64> = Vec::new();
    let mut pos = 0usize;
    while pos < bytes.len() {
        let mut x: i64 = 0;
        let mut k = 0u32;
        loop {
            if pos >= bytes.len() {
                return Err(GeometryError::MalformedRleString(
                    "truncated chunk".to_string(),
                ));
            }
            let c = bytes[pos] as i64 - 48;
            if !(0..64).contains(&c) {
                return Err(GeometryError::MalformedRleString(format!(
                    "byte {} out of range at position {pos}",
                    bytes[pos]
                )));
            }
            x |= (c & 0x1f) << (5 * k);
            pos += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        if counts.len() > 2 {
            x += counts[counts.len() - 2];
        }
        counts.push(x);
    }
    counts
        .into_iter()
        .map(|c| {
            u32::try_from(c)
                .map_err(|_| GeometryError::MalformedRleString(format!("negative count {c}")))
        })
        .collect()
}

/// Inverse of [`rle_counts_from_string`]; used to build fixtures.
pub fn rle_string_from_counts(counts: &[u32]) -> String {
    let mut out = String::new();
    for (i, &count) in counts.iter().enumerate() {
        let mut x = count as i64;
        if i > 2 {
            x -= counts[i - 2] as i64;
        }
        loop {
            let c = x & 0x1f;
            x >>= 5;
            let more = if c & 0x10 != 0 { x != -1 } else { x != 0 };
            let byte = (c | if more { 0x20 } else { 0 }) + 48;
            out.push(byte as u8 as char);
            if !more {
                break;
            }
        }
    }
    out
}

/// Rasterizes one polygon part given as a flat `[x0,y0,x1,y1,...]` list.
pub fn rasterize_polygon(
    points: &[f64],
    height: usize,
    width: usize,
) -> Result<BinaryMask, GeometryError> {
    let mut mask = BinaryMask::new(width, height);
    rasterize_into(points, &mut mask)?;
    Ok(mask)
}

/// Rasterizes several polygon parts and unions the results.
pub fn rasterize_polygons(
    parts: &[Vec<f64>],
    height: usize,
    width: usize,
) -> Result<BinaryMask, GeometryError> {
    let mut mask = BinaryMask::new(width, height);
    for part in parts {
        rasterize_into(part, &mut mask)?;
    }
    Ok(mask)
}

/// Scanline fill: for each pixel row, collect edge crossings with the
/// horizontal line through the pixel centers and fill between alternate
/// crossings. Equivalent to an even-odd point-in-polygon test per center.
fn rasterize_into(points: &[f64], mask: &mut BinaryMask) -> Result<(), GeometryError> {
    if points.len() % 2 != 0 {
        return Err(GeometryError::OddCoordinateCount {
            count: points.len(),
        });
    }
    let vertices = points.len() / 2;
    if vertices < 3 {
        return Err(GeometryError::DegeneratePolygon { vertices });
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFiniteCoordinate);
    }
    let vs: Vec<(f64, f64)> = points.chunks_exact(2).map(|p| (p[0], p[1])).collect();
    let mut crossings: Vec<f64> = Vec::new();
    for row in 0..mask.height() {
        let py = row as f64 + 0.5;
        crossings.clear();
        for i in 0..vertices {
            let (x1, y1) = vs[i];
            let (x2, y2) = vs[(i + 1) % vertices];
            // half-open rule: an edge crosses iff exactly one endpoint is at or below py
            if (y1 <= py) != (y2 <= py) {
                crossings.push(x1 + (py - y1) * (x2 - x1) / (y2 - y1));
            }
        }
        crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in crossings.chunks_exact(2) {
            let start = pixel_range_start(pair[0]);
            let end = pixel_range_end(pair[1], mask.width());
            for c in start..end {
                mask.set(row, c, true);
            }
        }
    }
    Ok(())
}

/// COCO-style `segmentation` field: polygon parts or an RLE object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle {
        /// `[height, width]`, per the COCO convention.
        size: [u32; 2],
        counts: RleCounts,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Raw(Vec<u32>),
    Encoded(String),
}

impl Segmentation {
    /// Decodes to a mask of the given image dimensions. RLE sizes must agree
    /// with the image; polygons are rasterized onto it.
    pub fn decode(&self, height: usize, width: usize) -> Result<BinaryMask, GeometryError> {
        match self {
            Segmentation::Polygons(parts) => rasterize_polygons(parts, height, width),
            Segmentation::Rle { size, counts } => {
                let (h, w) = (size[0] as usize, size[1] as usize);
                if (h, w) != (height, width) {
                    return Err(GeometryError::LengthMismatch {
                        expected: height * width,
                        actual: h * w,
                    });
                }
                match counts {
                    RleCounts::Raw(c) => decode_rle(c, h, w),
                    RleCounts::Encoded(s) => decode_rle(&rle_counts_from_string(s)?, h, w),
                }
            }
        }
    }
}
