use std::path::Path;

use image::{DynamicImage, ImageFormat, Luma};
use sonoscape_core::{GrayImage, SalientMask};

use crate::{Error, Result};

/// Rec. 601 luma, rounded to the nearest level.
fn luma601(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

/// Loads a PNG or PGM (or any PNM) as 8-bit gray. Colour images are reduced
/// with Rec. 601 weights; alpha is ignored.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw(),
        DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| p[0]).collect(),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
            img.to_luma16().pixels().map(|p| (p[0] as f64 / 257.0).round() as u8).collect()
        }
        other => other.to_rgb8().pixels().map(|p| luma601(p[0], p[1], p[2])).collect(),
    };
    Ok(GrayImage::new(w, h, data)?)
}

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(ImageFormat::Png),
        Some("pgm") | Some("pnm") => Ok(ImageFormat::Pnm),
        _ => Err(Error::Invalid(format!("{}: output must be .png or .pgm", path.display()))),
    }
}

pub fn save_gray(path: &Path, img: &GrayImage) -> Result<()> {
    let format = format_for(path)?;
    let buf = image::ImageBuffer::<Luma<u8>, _>::from_raw(img.width() as u32, img.height() as u32, img.as_raw().to_vec())
        .expect("buffer matches dimensions");
    let mut bytes = std::io::Cursor::new(Vec::new());
    if format == ImageFormat::Pnm {
        // Binary PGM rather than the encoder's default choice.
        let enc = image::codecs::pnm::PnmEncoder::new(&mut bytes)
            .with_subtype(image::codecs::pnm::PnmSubtype::Graymap(image::codecs::pnm::SampleEncoding::Binary));
        buf.write_with_encoder(enc)
    } else {
        buf.write_to(&mut bytes, format)
    }
    .map_err(|source| Error::Image {
        path: path.to_owned(),
        source,
    })?;
    super::write_bytes(path, bytes.get_ref())
}

/// Salient pixels white, the rest black.
pub fn save_mask(path: &Path, mask: &SalientMask) -> Result<()> {
    let (w, h) = mask.dimensions();
    let img = GrayImage::from_fn(w, h, |x, y| if mask.get(x, y) { 255 } else { 0 })?;
    save_gray(path, &img)
}
