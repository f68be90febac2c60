//! Directory layout shared by training and evaluation data:
//! `root/<term>/<image>` with optional same-named masks in `root/<term>/masks/`.
//! A missing mask means the whole image carries the term.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image_io::{load_lab_image, load_mask, LabImage};
use crate::scalar::Real;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "ppm", "pnm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub term: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
}

impl DatasetEntry {
    /// Stable identifier `term/file`.
    pub fn id(&self) -> String {
        let file = self
            .image
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        format!("{}/{}", self.term, file)
    }

    /// Decodes the image and returns it with the selection mask.
    pub fn load<T: Real>(&self) -> Result<(LabImage<T>, Vec<bool>)> {
        let img = load_lab_image::<T>(&self.image)?;
        let mask = match &self.mask {
            None => vec![true; img.len()],
            Some(p) => {
                let (w, h, m) = load_mask(p)?;
                if (w, h) != (img.width, img.height) {
                    return Err(Error::format(
                        p,
                        format!("mask is {w}x{h} but image is {}x{}", img.width, img.height),
                    ));
                }
                m
            }
        };
        Ok((img, mask))
    }
}

fn is_image(path: &Path) -> bool {
    path.is_file()
        && path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false)
}

fn sorted_children(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

/// Lists every image of one term directory.
pub fn scan_term_dir(term: &str, dir: &Path) -> Result<Vec<DatasetEntry>> {
    let masks = dir.join("masks");
    let mut out = Vec::new();
    for path in sorted_children(dir)? {
        if !is_image(&path) {
            continue;
        }
        let mask = path
            .file_name()
            .map(|f| masks.join(f))
            .filter(|m| m.is_file());
        out.push(DatasetEntry {
            term: term.to_string(),
            image: path,
            mask,
        });
    }
    Ok(out)
}

/// Lists every image under `root`, grouped by term directory in sorted order.
pub fn scan_dataset(root: &Path) -> Result<Vec<DatasetEntry>> {
    if !root.is_dir() {
        return Err(Error::format(root, "not a directory"));
    }
    let mut out = Vec::new();
    for dir in sorted_children(root)? {
        if !dir.is_dir() {
            continue;
        }
        let Some(term) = dir.file_name().and_then(|n| n.to_str()).map(str::to_string) else {
            continue;
        };
        out.extend(scan_term_dir(&term, &dir)?);
    }
    if out.is_empty() {
        return Err(Error::format(
            root,
            "no images found in <term>/ subdirectories",
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_io::{encode_grey_png, encode_rgb_png};

    #[test]
    fn layout_with_and_without_masks() {
        let dir = tempfile::tempdir().unwrap();
        let red = dir.path().join("red");
        fs::create_dir_all(red.join("masks")).unwrap();
        fs::create_dir_all(dir.path().join("blue")).unwrap();
        fs::write(red.join("a.png"), encode_rgb_png(1, 1, &[[255, 0, 0]])).unwrap();
        fs::write(red.join("masks/a.png"), encode_grey_png(1, 1, &[255])).unwrap();
        fs::write(red.join("notes.txt"), "x").unwrap();
        fs::write(
            dir.path().join("blue/b.png"),
            encode_rgb_png(1, 1, &[[0, 0, 255]]),
        )
        .unwrap();
        let entries = scan_dataset(dir.path()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].term, "blue");
        assert!(entries[0].mask.is_none());
        assert_eq!(entries[1].id(), "red/a.png");
        assert!(entries[1].mask.is_some());
        let (img, mask) = entries[1].load::<f64>().unwrap();
        assert_eq!(img.len(), 1);
        assert_eq!(mask, vec![true]);
    }

    #[test]
    fn missing_root_is_an_error() {
        assert!(scan_dataset(Path::new("/definitely/not/here")).is_err());
    }

    #[test]
    fn mismatched_mask_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let red = dir.path().join("red");
        fs::create_dir_all(red.join("masks")).unwrap();
        fs::write(red.join("a.png"), encode_rgb_png(2, 1, &[[255, 0, 0]; 2])).unwrap();
        fs::write(red.join("masks/a.png"), encode_grey_png(1, 1, &[255])).unwrap();
        let entries = scan_dataset(dir.path()).unwrap();
        assert!(entries[0].load::<f64>().is_err());
    }
}
