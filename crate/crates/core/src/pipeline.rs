//! Reconstruction operator `R*_ν P K R_μ`.
//!
//! The order is fixed: the cutoff multiplies the data, the filter acts on
//! the cut data, and the result is backprojected.

use crate::cutoffs::{apply_cutoff, CutoffSpec};
use crate::filters::{apply_filter, FilterSpec};
use crate::geometry::Phantom;
use crate::transforms::{backproject, forward_analytic_weighted, Image, Sinogram, SinogramGrid, WeightSpec};
use crate::Result;

/// Where the data come from.
#[derive(Debug, Clone, Copy)]
pub enum DataSource<'a> {
    /// Simulate exact data `R_μ f` on the grid.
    Phantom(&'a Phantom, SinogramGrid),
    /// Use measured or precomputed data; the forward weight is not applied again.
    Sinogram(&'a Sinogram),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub fwd_weight: WeightSpec,
    pub filter: FilterSpec,
    pub cutoff: CutoffSpec,
    pub back_weight: WeightSpec,
    pub n: usize,
}

impl Reconstruction {
    /// Backprojection weight defaults to the forward weight.
    pub fn new(filter: impl Into<FilterSpec>, cutoff: CutoffSpec, n: usize) -> Self {
        Reconstruction {
            fwd_weight: WeightSpec::default(),
            filter: filter.into(),
            cutoff,
            back_weight: WeightSpec::default(),
            n,
        }
    }

    pub fn with_weights(mut self, fwd: WeightSpec, back: WeightSpec) -> Self {
        self.fwd_weight = fwd;
        self.back_weight = back;
        self
    }

    /// Data after the cutoff and the filter, ready for backprojection.
    pub fn filtered_data(&self, input: DataSource<'_>) -> Result<Sinogram> {
        let cutoff = self.cutoff.validated()?;
        let data = match input {
            DataSource::Phantom(p, grid) => {
                forward_analytic_weighted(p, self.fwd_weight.validated()?, grid)
            }
            DataSource::Sinogram(g) => g.clone(),
        };
        Ok(apply_filter(&apply_cutoff(&data, &cutoff), &self.filter))
    }

    pub fn run(&self, input: DataSource<'_>) -> Result<Image> {
        let filtered = self.filtered_data(input)?;
        backproject(&filtered, self.back_weight, self.n)
    }
}

/// One-call form of [`Reconstruction::run`].
pub fn reconstruct(
    input: DataSource<'_>,
    fwd_weight: WeightSpec,
    filter: FilterSpec,
    cutoff: CutoffSpec,
    back_weight: WeightSpec,
    n: usize,
) -> Result<Image> {
    Reconstruction {
        fwd_weight,
        filter,
        cutoff,
        back_weight,
        n,
    }
    .run(input)
}
