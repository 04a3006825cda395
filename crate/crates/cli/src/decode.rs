use std::path::Path;

use image::DynamicImage;
use kyc_core::dedup::LumaMatrix;

/// Decodes a raster file to luminance `0.299 R + 0.587 G + 0.114 B`, scaled
/// to `[0, 1]`. Alpha is ignored.
pub fn decode_image(path: &Path) -> Result<LumaMatrix<f64>, String> {
    let img = image::ImageReader::open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?
        .with_guessed_format()
        .map_err(|e| format!("{}: {e}", path.display()))?
        .decode()
        .map_err(|e| format!("{}: {e}", path.display()))?;
    luminance(&img).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn luminance(img: &DynamicImage) -> Result<LumaMatrix<f64>, String> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    // integer weights in thousandths keep primaries exact: 255 red -> 0.299
    let weigh = |r: u32, g: u32, b: u32, max: u32| {
        (f64::from(299 * r + 587 * g + 114 * b) / (1000.0 * f64::from(max))).min(1.0)
    };
    let values: Vec<f64> = match img {
        DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_) => img
            .to_rgb16()
            .pixels()
            .map(|p| weigh(p[0].into(), p[1].into(), p[2].into(), 65535))
            .collect(),
        _ => img.to_rgb8().pixels().map(|p| weigh(p[0].into(), p[1].into(), p[2].into(), 255)).collect(),
    };
    LumaMatrix::new(h, w, values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    fn one_pixel(rgb: [u8; 3]) -> LumaMatrix<f64> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.png");
        RgbImage::from_pixel(1, 1, Rgb(rgb)).save(&path).unwrap();
        decode_image(&path).unwrap()
    }

    #[test]
    fn primaries() {
        assert_eq!(one_pixel([255, 255, 255]).values(), &[1.0]);
        assert_eq!(one_pixel([0, 0, 0]).values(), &[0.0]);
        assert_eq!(one_pixel([255, 0, 0]).values(), &[0.299]);
        assert_eq!(one_pixel([0, 255, 0]).values(), &[0.587]);
    }

    #[test]
    fn layout_is_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = RgbImage::from_fn(3, 2, |x, y| if (x, y) == (2, 0) { Rgb([255, 255, 255]) } else { Rgb([0, 0, 0]) });
        img.save(&path).unwrap();
        let m = decode_image(&path).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 3));
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.get(1, 2), 0.0);
    }

    #[test]
    fn corrupt_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        std::fs::write(&path, b"not an image").unwrap();
        assert!(decode_image(&path).unwrap_err().contains("bad.png"));
    }
}
