use crate::error::{Error, Result};
use crate::video_io::Plane;

/// PSNR in dB with the peak taken from the original region:
/// `10·log10(N·max(I)² / Σ(I − I_w)²)`. Identical inputs give `f64::INFINITY`.
pub fn psnr(original: &[f64], modified: &[f64]) -> Result<f64> {
    if original.len() != modified.len() {
        return Err(Error::Shape(format!(
            "PSNR regions differ in size: {} vs {}",
            original.len(),
            modified.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::Shape("PSNR of an empty region".into()));
    }
    let peak = original.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak <= 0.0 {
        return Err(Error::Domain(
            "PSNR undefined: original peak is zero".into(),
        ));
    }
    let sse: f64 = original
        .iter()
        .zip(modified)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (original.len() as f64 * peak * peak / sse).log10())
}

pub fn psnr_planes(original: &Plane, modified: &Plane) -> Result<f64> {
    if (original.width(), original.height()) != (modified.width(), modified.height()) {
        return Err(Error::Shape(format!(
            "PSNR planes differ: {}x{} vs {}x{}",
            original.width(),
            original.height(),
            modified.width(),
            modified.height()
        )));
    }
    psnr(original.data(), modified.data())
}

/// Cosine similarity of two equally sized sample vectors, in [-1, 1].
pub fn similarity(w_star: &[f64], w: &[f64]) -> Result<f64> {
    if w_star.len() != w.len() {
        return Err(Error::Shape(format!(
            "similarity inputs differ in length: {} vs {}",
            w_star.len(),
            w.len()
        )));
    }
    let dot: f64 = w_star.iter().zip(w).map(|(a, b)| a * b).sum();
    let na = w_star.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nb = w.iter().map(|b| b * b).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain(
            "similarity undefined for a zero vector".into(),
        ));
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}
