//! Receptive-field geometry arithmetic and the feature-grid data model.
//!
//! Axis convention, fixed once and enforced everywhere: a cell index is
//! `(i, j) = (row, col)` and maps to pixel coordinates `(x, y)` with
//! `x ↔ j` and `y ↔ i`. Cell `(i, j)` has its receptive-field center at
//! `(center_offset + j·stride, center_offset + i·stride)`.

mod grid;
mod io;

pub use grid::FeatureGrid;
pub use io::{read_grid, write_grid};

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact rational pixel coordinate. Receptive-field centers are always
/// multiples of 1/2, which this represents without drift in deep stacks.
pub type Rational = Ratio<i64>;

/// One convolution/pooling layer, for geometry purposes only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    /// Kernel side in pixels, ≥ 1.
    pub kernel: u32,
    /// Step in pixels, ≥ 1.
    pub stride: u32,
    /// Symmetric zero padding in pixels.
    pub pad: u32,
}

impl LayerSpec {
    pub fn new(kernel: u32, stride: u32, pad: u32) -> Result<Self> {
        if kernel < 1 || stride < 1 {
            return Err(Error::invalid(format!(
                "layer kernel and stride must be ≥ 1 (got kernel={kernel}, stride={stride})"
            )));
        }
        Ok(LayerSpec {
            kernel,
            stride,
            pad,
        })
    }
}

/// Cumulative (stride, rf size, center offset) of a layer stack: the mapping
/// from grid cells to input pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridGeometry {
    /// Cell-to-cell step in input pixels.
    pub stride: u32,
    /// Receptive-field side in input pixels.
    pub rf_size: u32,
    /// Input-pixel coordinate of cell (0,0)'s rf center, per axis.
    pub center_offset: Rational,
}

/// Axis-aligned pixel rectangle, half-open in both axes:
/// `x ∈ [x0, x0 + width)`, `y ∈ [y0, y0 + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelRect {
    pub x0: i64,
    pub y0: i64,
    pub width: u32,
    pub height: u32,
}

impl GridGeometry {
    pub fn new(stride: u32, rf_size: u32, center_offset: Rational) -> Result<Self> {
        if stride < 1 || rf_size < 1 {
            return Err(Error::invalid(format!(
                "geometry stride and rf_size must be ≥ 1 (got stride={stride}, rf_size={rf_size})"
            )));
        }
        Ok(GridGeometry {
            stride,
            rf_size,
            center_offset,
        })
    }

    /// Geometry of the identity stack: stride 1, rf 1, offset 0.
    pub fn identity() -> Self {
        GridGeometry {
            stride: 1,
            rf_size: 1,
            center_offset: Rational::from_integer(0),
        }
    }

    /// Receptive-field center of cell `(i, j)` in exact pixel coordinates,
    /// returned as `(x, y)`.
    pub fn rf_center(&self, cell: (usize, usize)) -> (Rational, Rational) {
        let (i, j) = cell;
        let s = Rational::from_integer(self.stride as i64);
        let x = self.center_offset + Rational::from_integer(j as i64) * s;
        let y = self.center_offset + Rational::from_integer(i as i64) * s;
        (x, y)
    }

    /// `rf_center` as `f64` (exact: centers are dyadic rationals).
    pub fn rf_center_f64(&self, cell: (usize, usize)) -> (f64, f64) {
        let (x, y) = self.rf_center(cell);
        (ratio_to_f64(x), ratio_to_f64(y))
    }

    /// The in-bounds cell of an `height × width` grid whose rf center lies
    /// closest (Euclidean) to `pixel = (x, y)`. Out-of-image pixels clamp to
    /// the nearest border cell; exact ties break toward the smaller index,
    /// row before column.
    ///
    /// Squared distance separates per axis over the full cell lattice, so the
    /// global minimizer minimizes each axis independently.
    pub fn nearest_cell(&self, height: usize, width: usize, pixel: (f64, f64)) -> (usize, usize) {
        assert!(height > 0 && width > 0, "grid must be non-empty");
        let (x, y) = pixel;
        let i = self.nearest_axis(height, y);
        let j = self.nearest_axis(width, x);
        (i, j)
    }

    fn nearest_axis(&self, n: usize, coord: f64) -> usize {
        let offset = ratio_to_f64(self.center_offset);
        let stride = self.stride as f64;
        let t = (coord - offset) / stride;
        if t <= 0.0 {
            return 0;
        }
        let lo = (t.floor() as usize).min(n - 1);
        let hi = (lo + 1).min(n - 1);
        let d_lo = (coord - (offset + lo as f64 * stride)).abs();
        let d_hi = (coord - (offset + hi as f64 * stride)).abs();
        // ties go to the smaller index
        if d_hi < d_lo {
            hi
        } else {
            lo
        }
    }

    /// Square patch of side `stride` centered at the rf center of `cell`,
    /// rounded toward the origin when the center is fractional.
    pub fn center_patch_rect(&self, cell: (usize, usize)) -> PixelRect {
        let (cx, cy) = self.rf_center(cell);
        let half = Rational::new(self.stride as i64, 2);
        PixelRect {
            x0: (cx - half).floor().to_integer(),
            y0: (cy - half).floor().to_integer(),
            width: self.stride,
            height: self.stride,
        }
    }

    /// Whether the rf square of the cell centered at `(cx, cy)` contains the
    /// pixel. The rf covers `rf_size` pixels per axis:
    /// `|p − c| ≤ (rf_size − 1)/2`.
    pub fn rf_contains(&self, center: (Rational, Rational), pixel: (f64, f64)) -> bool {
        let half = (self.rf_size as f64 - 1.0) / 2.0;
        let (cx, cy) = (ratio_to_f64(center.0), ratio_to_f64(center.1));
        (pixel.0 - cx).abs() <= half && (pixel.1 - cy).abs() <= half
    }
}

/// Exact `f64` value of a dyadic rational.
pub fn ratio_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact rational from an `f64` whose denominator is a power of two
/// (every rf-center offset is). `None` for non-finite or non-dyadic values
/// beyond 62 fractional bits.
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    if !v.is_finite() {
        return None;
    }
    let mut x = v;
    let mut denom: i64 = 1;
    for _ in 0..=62 {
        if x.fract() == 0.0 && x.abs() <= 2f64.powi(53) {
            return Some(Rational::new(x as i64, denom));
        }
        if denom > (1 << 60) {
            break;
        }
        x *= 2.0;
        denom *= 2;
    }
    None
}

/// The bundled reference architecture (AlexNet-style conv1..pool5), in the
/// arch-config text format. Normalization layers are geometry-neutral and
/// omitted.
pub const REFERENCE_ARCH: &str = "\
conv1 11 4 0
pool1 3 2 0
conv2 5 1 2
pool2 3 2 0
conv3 3 1 1
conv4 3 1 1
conv5 3 1 1
pool5 3 2 0
";

/// Cumulative geometry of an ordered layer stack, starting from
/// (stride 1, rf 1, offset 0) and folding in each layer:
/// `rf += (k−1)·stride`, `offset += ((k−1)/2 − pad)·stride`, `stride *= s`.
pub fn compose_geometry(layers: &[LayerSpec]) -> Result<GridGeometry> {
    if layers.is_empty() {
        return Err(Error::invalid("compose_geometry needs at least one layer"));
    }
    let mut geom = GridGeometry::identity();
    for layer in layers {
        geom = compose_layer(geom, *layer)?;
    }
    Ok(geom)
}

fn compose_layer(geom: GridGeometry, layer: LayerSpec) -> Result<GridGeometry> {
    let k = layer.kernel as i64;
    let stride_before = geom.stride as i64;
    let rf = geom.rf_size as i64 + (k - 1) * stride_before;
    let offset = geom.center_offset
        + (Rational::new(k - 1, 2) - Rational::from_integer(layer.pad as i64))
            * Rational::from_integer(stride_before);
    let stride = stride_before * layer.stride as i64;
    if rf > u32::MAX as i64 || stride > u32::MAX as i64 {
        return Err(Error::DimensionOverflow(format!(
            "composed geometry exceeds u32 (rf={rf}, stride={stride})"
        )));
    }
    Ok(GridGeometry {
        stride: stride as u32,
        rf_size: rf as u32,
        center_offset: offset,
    })
}

/// Parses an architecture config: one layer per line, `name kernel stride pad`,
/// blank lines and `#` comments ignored.
pub fn parse_arch_config(text: &str) -> Result<Vec<(String, LayerSpec)>> {
    let mut layers = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno + 1,
                format!("expected `name kernel stride pad`, got {} fields", fields.len()),
            ));
        }
        let parse_u32 = |s: &str, what: &str| {
            s.parse::<u32>()
                .map_err(|_| Error::parse(lineno + 1, format!("bad {what}: {s:?}")))
        };
        let spec = LayerSpec::new(
            parse_u32(fields[1], "kernel")?,
            parse_u32(fields[2], "stride")?,
            parse_u32(fields[3], "pad")?,
        )
        .map_err(|e| Error::parse(lineno + 1, e.to_string()))?;
        layers.push((fields[0].to_string(), spec));
    }
    if layers.is_empty() {
        return Err(Error::invalid("architecture config has no layers"));
    }
    Ok(layers)
}

/// Geometry after each prefix of the stack, labeled by layer name.
pub fn compose_prefixes(layers: &[(String, LayerSpec)]) -> Result<Vec<(String, GridGeometry)>> {
    let mut out = Vec::with_capacity(layers.len());
    let mut geom = GridGeometry::identity();
    for (name, layer) in layers {
        geom = compose_layer(geom, *layer)?;
        out.push((name.clone(), geom));
    }
    Ok(out)
}
