use crate::error::{Error, Result};

/// One depth-ordered sample entering a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelSample {
    pub rho: f64,
    pub color: [f64; 3],
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelContribution {
    pub rho: f64,
    /// `1 - exp(-rho)`.
    pub alpha: f64,
    /// Transmittance in front of this sample.
    pub transmittance_before: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub color: [f64; 3],
    pub depth: f64,
    pub weight_sum: f64,
    pub contributions: Vec<PixelContribution>,
}

/// Front-to-back compositing of `samples`, which must be sorted by depth.
///
/// Residual transmittance is filled with `background` and `far`.
pub fn composite_pixel(samples: &[PixelSample], background: [f64; 3], far: f64) -> Result<Composite> {
    for pair in samples.windows(2) {
        if pair[1].depth < pair[0].depth {
            return Err(Error::UnsortedContributions {
                previous: pair[0].depth,
                next: pair[1].depth,
            });
        }
    }
    let mut color = [0.0; 3];
    let mut depth = 0.0;
    let mut t = 1.0;
    let mut contributions = Vec::with_capacity(samples.len());
    for s in samples {
        let keep = (-s.rho).exp();
        let alpha = 1.0 - keep;
        let w = t * alpha;
        for (c, sc) in color.iter_mut().zip(s.color) {
            *c += w * sc;
        }
        depth += w * s.depth;
        contributions.push(PixelContribution {
            rho: s.rho,
            alpha,
            transmittance_before: t,
        });
        t *= keep;
    }
    for (c, b) in color.iter_mut().zip(background) {
        *c += t * b;
    }
    depth += t * far;
    Ok(Composite {
        color,
        depth,
        weight_sum: 1.0 - t,
        contributions,
    })
}
