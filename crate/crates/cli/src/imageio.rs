use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use lanecue_core::RgbImage;

pub fn load_png(path: &Path) -> Result<RgbImage> {
    let img = image::open(path)
        .with_context(|| format!("reading image {}", path.display()))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(RgbImage::new(w, h, img.into_raw())?)
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .context("image buffer size")?;
    buf.save_with_format(path, image::ImageFormat::Png)
        .with_context(|| format!("writing image {}", path.display()))
}

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:06}")
}

/// PNG files in `dir` as `(frame_id, path)`, sorted by file name.
pub fn list_frames(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing frames in {}", dir.display()))? {
        let path = entry?.path();
        let is_png = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if !is_png || !path.is_file() {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            frames.push((stem.to_string(), path.clone()));
        }
    }
    frames.sort();
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_and_listing() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::new(3, 2, (0..18).collect()).unwrap();
        for i in [2, 1] {
            save_png(&img, &dir.path().join(format!("{}.png", frame_name(i)))).unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let frames = list_frames(dir.path()).unwrap();
        let ids: Vec<&str> = frames.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["frame_000001", "frame_000002"]);
        assert_eq!(load_png(&frames[0].1).unwrap(), img);
    }
}
