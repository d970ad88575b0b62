use crate::error::{check_len, LbdError, Result};
use crate::field::{Field, Patch};
use image::DynamicImage;
use std::io::Write;
use std::path::Path;

/// Grayscale image with values in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

/// Top-left corner of a patch inside an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl GrayImage {
    /// Values are clamped into `[0, 1]`.
    pub fn new(width: usize, height: usize, mut values: Vec<f64>) -> Result<Self> {
        check_len(width * height, values.len())?;
        for v in &mut values {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values).expect("size matches")
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// The `side × side` block whose top-left corner is `pos`.
    pub fn patch_at(&self, pos: Position, side: usize) -> Result<Patch> {
        if pos.x + side > self.width || pos.y + side > self.height {
            return Err(LbdError::Parameter(format!(
                "patch of side {side} at ({}, {}) leaves the {}x{} image",
                pos.x, pos.y, self.width, self.height
            )));
        }
        let field = Field::from_fn(side, |x, y| self.get(pos.x + x, pos.y + y));
        Patch::try_from(field)
    }

    /// 8-bit quantization `round(255 v)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.values.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }

    /// Binary PGM (P5, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_bytes());
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(&self.to_pgm())?;
        Ok(())
    }

    /// Reads PGM or PNG (any format the decoder recognizes). Color images are
    /// reduced to BT.601 luma.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let img = image::ImageReader::open(path)?.with_guessed_format()?.decode()?;
        Self::from_dynamic(&img)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        Self::from_dynamic(&image::load_from_memory(bytes)?)
    }

    fn from_dynamic(img: &DynamicImage) -> Result<Self> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img {
            DynamicImage::ImageLuma8(g) => Self::from_bytes(w, h, g.as_raw()),
            DynamicImage::ImageLuma16(g) => {
                Self::new(w, h, g.as_raw().iter().map(|&v| f64::from(v) / 65535.0).collect())
            }
            DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
                Self::from_bytes(w, h, img.to_luma8().as_raw())
            }
            _ => {
                let rgb = img.to_rgb8();
                let values = rgb
                    .pixels()
                    .map(|p| {
                        let [r, g, b] = p.0.map(f64::from);
                        (0.299 * r + 0.587 * g + 0.114 * b) / 255.0
                    })
                    .collect();
                Self::new(w, h, values)
            }
        }
    }
}
