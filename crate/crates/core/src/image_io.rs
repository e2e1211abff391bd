//! Netpbm I/O: PPM (P3/P6, maxval 255) in, PGM (P5) label maps and masks out.

use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRgb {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::arg(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }
}

/// Per-pixel cluster labels, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<usize>,
}

impl LabelImage {
    pub fn new(width: usize, height: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::arg(format!(
                "expected {} labels for {width}x{height}, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if start >= self.bytes.len() {
                Error::parse(start, format!("unexpected end of data reading {what}"))
            } else {
                Error::parse(start, format!("expected decimal {what}"))
            });
        }
        if self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            return Err(Error::parse(self.pos, format!("junk after {what}")));
        }
        // Digits only, so from_utf8 cannot fail; overflow can.
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(start, format!("{what} out of range")))
    }
}

/// Decodes a P3 or P6 pixmap with maxval 255.
pub fn read_ppm(bytes: &[u8]) -> Result<ImageRgb> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::parse(0, "missing netpbm magic"));
    }
    let binary = match bytes[1] {
        b'3' => false,
        b'6' => true,
        _ => return Err(Error::parse(1, "only P3 and P6 pixmaps are supported")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() && bytes[cur.pos] != b'#' {
        return Err(Error::parse(cur.pos, "junk after magic"));
    }
    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::parse(cur.pos, "zero image dimension"));
    }
    cur.skip_whitespace_and_comments();
    let maxval_at = cur.pos;
    let maxval = cur.read_uint("maxval")?;
    if maxval != 255 {
        return Err(Error::parse(
            maxval_at,
            format!("maxval {maxval} unsupported, only 255"),
        ));
    }
    let count = width
        .checked_mul(height)
        .filter(|n| n.checked_mul(3).is_some())
        .ok_or_else(|| Error::parse(0, "image dimensions overflow"))?;

    let mut pixels = Vec::with_capacity(count);
    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = cur.pos + 1;
        let end = start + count * 3;
        if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::parse(cur.pos, "expected whitespace before raster"));
        }
        if cur.pos >= bytes.len() || end > bytes.len() {
            return Err(Error::parse(
                bytes.len(),
                format!(
                    "truncated raster: need {} bytes, have {}",
                    count * 3,
                    bytes.len().saturating_sub(start)
                ),
            ));
        }
        pixels.extend(
            bytes[start..end]
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]]),
        );
    } else {
        for _ in 0..count {
            let mut px = [0u8; 3];
            for ch in px.iter_mut() {
                let at = {
                    cur.skip_whitespace_and_comments();
                    cur.pos
                };
                let v = cur.read_uint("sample")?;
                if v > maxval {
                    return Err(Error::parse(at, format!("sample {v} exceeds maxval {maxval}")));
                }
                *ch = v as u8;
            }
            pixels.push(px);
        }
    }
    ImageRgb::new(width, height, pixels)
}

/// Encodes as ASCII P3, one pixel per line.
pub fn encode_p3(img: &ImageRgb) -> Vec<u8> {
    let mut out = format!("P3\n{} {}\n255\n", img.width, img.height);
    for [r, g, b] in &img.pixels {
        out.push_str(&format!("{r} {g} {b}\n"));
    }
    out.into_bytes()
}

/// Encodes as binary P6.
pub fn encode_p6(img: &ImageRgb) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 3);
    for px in &img.pixels {
        out.extend_from_slice(px);
    }
    out
}

fn pgm(width: usize, height: usize, raster: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(raster);
    out
}

/// Gray level used for `label` in a `clusters`-way label map.
pub fn label_gray(label: usize, clusters: usize) -> u8 {
    (label * 255 / clusters.saturating_sub(1).max(1)) as u8
}

/// Renders a label map as P5 with gray = floor(label * 255 / max(c - 1, 1)).
pub fn write_label_pgm(labels: &LabelImage, clusters: usize) -> Result<Vec<u8>> {
    if clusters == 0 || clusters > 256 {
        return Err(Error::arg(format!("cluster count {clusters} outside [1, 256]")));
    }
    if let Some(bad) = labels.labels.iter().find(|&&l| l >= clusters) {
        return Err(Error::Invariant(format!(
            "label {bad} not below cluster count {clusters}"
        )));
    }
    Ok(pgm(
        labels.width,
        labels.height,
        labels.labels.iter().map(|&l| label_gray(l, clusters)),
    ))
}

/// Binary P5 mask: 255 where the pixel belongs to `cluster`, 0 elsewhere.
///
/// `clusters` is the run's cluster count and bounds `cluster`.
pub fn write_cluster_mask(labels: &LabelImage, cluster: usize, clusters: usize) -> Result<Vec<u8>> {
    if cluster >= clusters {
        return Err(Error::arg(format!(
            "cluster {cluster} out of range for {clusters} clusters"
        )));
    }
    Ok(pgm(
        labels.width,
        labels.height,
        labels
            .labels
            .iter()
            .map(|&l| if l == cluster { 255 } else { 0 }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raster(bytes: &[u8]) -> &[u8] {
        // Header produced by `pgm` has exactly three newlines.
        let mut newlines = 0;
        let idx = bytes
            .iter()
            .position(|&b| {
                if b == b'\n' {
                    newlines += 1;
                }
                newlines == 3
            })
            .unwrap();
        &bytes[idx + 1..]
    }

    #[test]
    fn minimal_p3() {
        let img = read_ppm(b"P3\n1 1\n255\n0 0 0\n").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[[0, 0, 0]]);
    }

    #[test]
    fn hand_built_p6() {
        let mut bytes = b"P6\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0xFF, 0x00, 0x00, 0x00, 0xFF, 0x00]);
        let img = read_ppm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[[255, 0, 0], [0, 255, 0]]);
    }

    #[test]
    fn comments_in_header() {
        let img = read_ppm(b"P3 # made by hand\n# another\n2 # w\n1\n255\n1 2 3 4 5 6").unwrap();
        assert_eq!(img.pixels(), &[[1, 2, 3], [4, 5, 6]]);
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = read_ppm(b"P3\n1 1\n65535\n0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 7, .. }), "{err}");
    }

    #[test]
    fn rejects_truncated_and_out_of_range() {
        let mut short = b"P6\n2 1\n255\n".to_vec();
        short.extend_from_slice(&[1, 2, 3, 4]);
        assert!(matches!(read_ppm(&short), Err(Error::Parse { .. })));
        assert!(matches!(
            read_ppm(b"P3\n1 1\n255\n0 0"),
            Err(Error::Parse { .. })
        ));
        match read_ppm(b"P3\n1 1\n255\n0 256 0\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("{other:?}"),
        }
        assert!(read_ppm(b"P5\n1 1\n255\n\0").is_err());
        assert!(read_ppm(b"P3\n1 x\n255\n").is_err());
        assert!(read_ppm(b"").is_err());
    }

    #[test]
    fn label_gray_levels() {
        let one = |l| {
            let img = LabelImage::new(1, 1, vec![l]).unwrap();
            raster(&write_label_pgm(&img, 6).unwrap())[0]
        };
        assert_eq!(one(0), 0);
        assert_eq!(one(5), 255);
        assert_eq!(one(2), 102);
        let img = LabelImage::new(1, 1, vec![6]).unwrap();
        assert!(matches!(write_label_pgm(&img, 6), Err(Error::Invariant(_))));
        // single cluster maps to black
        let img = LabelImage::new(1, 1, vec![0]).unwrap();
        assert_eq!(raster(&write_label_pgm(&img, 1).unwrap()), &[0]);
    }

    #[test]
    fn gray_levels_distinct_up_to_256_clusters() {
        for c in 1..=256 {
            let mut grays: Vec<u8> = (0..c).map(|l| label_gray(l, c)).collect();
            grays.dedup();
            assert_eq!(grays.len(), c);
        }
    }

    #[test]
    fn masks() {
        let all = LabelImage::new(2, 2, vec![3; 4]).unwrap();
        assert_eq!(raster(&write_cluster_mask(&all, 3, 6).unwrap()), &[255; 4]);
        assert_eq!(raster(&write_cluster_mask(&all, 1, 6).unwrap()), &[0; 4]);

        let checker = LabelImage::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let m0 = write_cluster_mask(&checker, 0, 2).unwrap();
        let m1 = write_cluster_mask(&checker, 1, 2).unwrap();
        assert_eq!(raster(&m0), &[255, 0, 0, 255]);
        assert_eq!(raster(&m1), &[0, 255, 255, 0]);
        assert!(matches!(
            write_cluster_mask(&checker, 2, 2),
            Err(Error::Argument(_))
        ));
    }

    fn small_image() -> impl Strategy<Value = ImageRgb> {
        (1usize..6, 1usize..6).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<[u8; 3]>(), w * h)
                .prop_map(move |px| ImageRgb::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn ppm_round_trip(img in small_image()) {
            prop_assert_eq!(read_ppm(&encode_p3(&img)).unwrap(), img.clone());
            prop_assert_eq!(read_ppm(&encode_p6(&img)).unwrap(), img);
        }

        #[test]
        fn masks_partition_pixels(labels in proptest::collection::vec(0usize..5, 1..40)) {
            let n = labels.len();
            let img = LabelImage::new(n, 1, labels).unwrap();
            let mut hits = vec![0u32; n];
            for c in 0..5 {
                let mask = write_cluster_mask(&img, c, 5).unwrap();
                for (h, &v) in hits.iter_mut().zip(raster(&mask)) {
                    if v == 255 { *h += 1; }
                }
            }
            prop_assert!(hits.iter().all(|&h| h == 1));
        }
    }
}
