//! 8-bit luminance rasters and the denoise/binarize front end of the
//! labeling pipeline.

use std::io::Cursor;

use image::DynamicImage;

use crate::error::{Error, Result};

/// Row-major 8-bit luminance image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Parameter(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Parameter(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width as usize * height as usize,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Constant image. Panics on zero dimensions.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    /// Encodes as an 8-bit grayscale PNG.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let img = image::GrayImage::from_raw(self.width, self.height, self.pixels.clone())
            .expect("pixel buffer matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(out.into_inner())
    }
}

/// ITU-R BT.601 luma, rounded to nearest.
pub fn luma_bt601(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((weighted + 500) / 1000) as u8
}

/// Decodes an image and converts it to 8-bit luminance.
///
/// Gray inputs are taken verbatim; color inputs go through BT.601 luma.
/// Alpha is composited over white paper.
pub fn load_grayscale(bytes: &[u8]) -> Result<RasterImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| Error::Format(e.to_string()))?;
    let (width, height) = (decoded.width(), decoded.height());
    let pixels = match decoded {
        DynamicImage::ImageLuma8(gray) => gray.into_raw(),
        other => other
            .to_rgba8()
            .pixels()
            .map(|p| {
                let [r, g, b, a] = p.0;
                let over_white = |c: u8| {
                    let a = a as u32;
                    ((c as u32 * a + 255 * (255 - a) + 127) / 255) as u8
                };
                luma_bt601(over_white(r), over_white(g), over_white(b))
            })
            .collect(),
    };
    RasterImage::new(width, height, pixels)
}

/// Median filter over a `kernel`x`kernel` window with edge replication.
pub fn median_denoise(img: &RasterImage, kernel: usize) -> Result<RasterImage> {
    if kernel == 0 || kernel.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "median kernel must be odd and positive, got {kernel}"
        )));
    }
    if kernel == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width as i64, img.height as i64);
    let half = (kernel / 2) as i64;
    let mid = kernel * kernel / 2;
    let mut window = vec![0u8; kernel * kernel];
    let mut out = Vec::with_capacity(img.pixels.len());
    for y in 0..h {
        for x in 0..w {
            let mut k = 0;
            for dy in -half..=half {
                let row = (y + dy).clamp(0, h - 1) as usize * w as usize;
                for dx in -half..=half {
                    window[k] = img.pixels[row + (x + dx).clamp(0, w - 1) as usize];
                    k += 1;
                }
            }
            let (_, median, _) = window.select_nth_unstable(mid);
            out.push(*median);
        }
    }
    RasterImage::new(img.width, img.height, out)
}

/// Foreground mask: `true` marks paper (region candidate), `false` marks ink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    white: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, white: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || white.len() != width as usize * height as usize {
            return Err(Error::Parameter("mask dimensions do not match data".into()));
        }
        Ok(Self {
            width,
            height,
            white,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn is_white(&self, x: u32, y: u32) -> bool {
        self.white[y as usize * self.width as usize + x as usize]
    }

    pub fn data(&self) -> &[bool] {
        &self.white
    }

    pub fn ink_count(&self) -> usize {
        self.white.iter().filter(|w| !**w).count()
    }
}

/// Pixels strictly brighter than `threshold` are paper; the rest is ink.
pub fn binarize(img: &RasterImage, threshold: u8) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        white: img.pixels.iter().map(|&p| p > threshold).collect(),
    }
}
