//! RGB-D images plus their plain-text dumps (ASCII PPM for color, a
//! whitespace-separated grid for depth).

use std::fmt::Write as _;
use std::path::Path as FsPath;

use crate::error::{Error, Result};
use crate::geometry::Camera;

/// Depth written for rays that hit nothing.
pub const DEFAULT_FAR_SENTINEL: f64 = 100.0;

/// Row-major RGB-D image. `rgb` channels live in `[0, 1]`, depth in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdImage {
    width: usize,
    height: usize,
    pub rgb: Vec<[f64; 3]>,
    pub depth: Vec<f64>,
    pub far: f64,
}

impl RgbdImage {
    pub fn filled(width: usize, height: usize, color: [f64; 3], depth: f64, far: f64) -> Self {
        Self {
            width,
            height,
            rgb: vec![color; width * height],
            depth: vec![depth; width * height],
            far,
        }
    }

    pub fn for_camera(camera: &Camera, color: [f64; 3], far: f64) -> Self {
        Self::filled(camera.width, camera.height, color, far, far)
    }

    pub fn from_parts(
        width: usize,
        height: usize,
        rgb: Vec<[f64; 3]>,
        depth: Vec<f64>,
        far: f64,
    ) -> Result<Self> {
        let n = width * height;
        if rgb.len() != n || depth.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} pixels, got {} rgb and {} depth",
                rgb.len(),
                depth.len()
            )));
        }
        Ok(Self {
            width,
            height,
            rgb,
            depth,
            far,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    /// True when the depth at `idx` carries the no-hit sentinel.
    pub fn is_far(&self, idx: usize) -> bool {
        self.depth[idx] >= self.far
    }

    pub fn check_matches(&self, camera: &Camera) -> Result<()> {
        if self.dims() != (camera.width, camera.height) {
            return Err(Error::DimensionMismatch {
                expected: (camera.width, camera.height),
                actual: self.dims(),
            });
        }
        Ok(())
    }

    /// ASCII (P3) portable pixmap, 8 bits per channel.
    pub fn to_ppm(&self) -> String {
        let mut out = format!("P3\n{} {}\n255\n", self.width, self.height);
        for row in self.rgb.chunks(self.width) {
            let line: Vec<String> = row
                .iter()
                .map(|c| {
                    let q = |x: f64| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
                    format!("{} {} {}", q(c[0]), q(c[1]), q(c[2]))
                })
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// One row of depths per line, values separated by single spaces.
    pub fn to_depth_grid(&self) -> String {
        let mut out = String::new();
        for row in self.depth.chunks(self.width) {
            for (i, d) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{d}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_ppm(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_ppm()).map_err(|e| Error::io(path, e))
    }

    pub fn write_depth_grid(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_depth_grid()).map_err(|e| Error::io(path, e))
    }
}

/// Parses a depth grid written by [`RgbdImage::to_depth_grid`]: `(width, height, values)`.
pub fn parse_depth_grid(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut width = None;
    let mut values = Vec::new();
    let mut height = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse(format!("ragged depth grid row {height}")));
            }
            _ => {}
        }
        values.extend(row);
        height += 1;
    }
    Ok((width.unwrap_or(0), height, values))
}
