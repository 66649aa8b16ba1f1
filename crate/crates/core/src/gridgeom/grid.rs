use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::GridGeometry;

/// An `height × width` grid of `dim`-dimensional descriptors with pixel-space
/// geometry. Immutable after construction; data is row-major with the
/// descriptor innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid<S> {
    height: usize,
    width: usize,
    dim: usize,
    geometry: GridGeometry,
    data: Vec<S>,
    source_id: String,
}

impl<S: Scalar> FeatureGrid<S> {
    pub fn new(
        height: usize,
        width: usize,
        dim: usize,
        geometry: GridGeometry,
        data: Vec<S>,
        source_id: impl Into<String>,
    ) -> Result<Self> {
        let expected = height
            .checked_mul(width)
            .and_then(|hw| hw.checked_mul(dim))
            .ok_or_else(|| {
                Error::DimensionOverflow(format!("grid {height}×{width}×{dim} overflows"))
            })?;
        if data.len() != expected {
            return Err(Error::mismatch(format!(
                "grid data length {} != {height}·{width}·{dim}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(idx));
        }
        Ok(FeatureGrid {
            height,
            width,
            dim,
            geometry,
            data,
            source_id: source_id.into(),
        })
    }

    /// Builds the grid by evaluating `f(i, j)` for every cell. `f` must
    /// return a finite `dim`-length descriptor.
    pub fn from_fn(
        height: usize,
        width: usize,
        dim: usize,
        geometry: GridGeometry,
        source_id: impl Into<String>,
        mut f: impl FnMut(usize, usize) -> Vec<S>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * dim);
        for i in 0..height {
            for j in 0..width {
                let d = f(i, j);
                assert_eq!(d.len(), dim, "descriptor length mismatch at ({i},{j})");
                data.extend_from_slice(&d);
            }
        }
        Self::new(height, width, dim, geometry, data, source_id)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    /// Descriptor of cell `(i, j)`.
    pub fn descriptor(&self, i: usize, j: usize) -> &[S] {
        debug_assert!(i < self.height && j < self.width);
        let base = (i * self.width + j) * self.dim;
        &self.data[base..base + self.dim]
    }

    /// In-bounds cell whose rf center is nearest to `pixel = (x, y)`.
    pub fn nearest_cell(&self, pixel: (f64, f64)) -> (usize, usize) {
        self.geometry.nearest_cell(self.height, self.width, pixel)
    }

    /// Copy of the grid in another scalar type.
    pub fn convert<T: Scalar>(&self) -> FeatureGrid<T> {
        FeatureGrid {
            height: self.height,
            width: self.width,
            dim: self.dim,
            geometry: self.geometry,
            data: self
                .data
                .iter()
                .map(|&v| T::from_f64_c(v.to_f64_c()))
                .collect(),
            source_id: self.source_id.clone(),
        }
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }
}
