//! Solid/fluid geometry, interface distances, and the mask function chi.
//!
//! The mask is 1 inside the solid and 0 in the fluid. The smooth variant
//! replaces the jump by a hyperbolic tangent profile of width `delta`;
//! duplicated Gauss-Lobatto nodes sitting exactly on a solid/fluid interface
//! receive a per-side override so the solid-element copy saturates towards 1
//! and the fluid-element copy towards 0.

use crate::{Error, Result};

/// Solid-region geometry. Solid boundaries are assumed to lie on element
/// interfaces in all experiment configurations.
#[derive(Debug, Clone)]
pub enum MaskGeometry {
    /// Solid interval `[start, start + width]` in a 1D domain.
    Interval1d { start: f64, width: f64 },
    /// L-shaped solid: union of two axis-aligned rectangles of the given
    /// thickness whose inner corner sits at `corner`, one arm extending in
    /// +x and one in +y.
    LShape2d {
        corner: [f64; 2],
        arm_length: [f64; 2],
        thickness: f64,
    },
}

impl MaskGeometry {
    /// Whether a point lies in the (closed) solid region.
    pub fn is_solid(&self, p: &[f64]) -> bool {
        match self {
            MaskGeometry::Interval1d { start, width } => {
                p[0] >= *start && p[0] <= start + width
            }
            MaskGeometry::LShape2d {
                corner,
                arm_length,
                thickness,
            } => {
                let in_x_arm = p[0] >= corner[0]
                    && p[0] <= corner[0] + arm_length[0]
                    && p[1] >= corner[1]
                    && p[1] <= corner[1] + thickness;
                let in_y_arm = p[0] >= corner[0]
                    && p[0] <= corner[0] + thickness
                    && p[1] >= corner[1]
                    && p[1] <= corner[1] + arm_length[1];
                in_x_arm || in_y_arm
            }
        }
    }

    /// Distance `d >= 0` from a point to the nearest solid/fluid interface.
    ///
    /// For the L-shape this is the minimum over the face distances of the two
    /// rectangles.
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        match self {
            MaskGeometry::Interval1d { start, width } => {
                let d0 = (p[0] - start).abs();
                let d1 = (p[0] - (start + width)).abs();
                d0.min(d1)
            }
            MaskGeometry::LShape2d {
                corner,
                arm_length,
                thickness,
            } => {
                let x_arm = [
                    [corner[0], corner[0] + arm_length[0]],
                    [corner[1], corner[1] + thickness],
                ];
                let y_arm = [
                    [corner[0], corner[0] + thickness],
                    [corner[1], corner[1] + arm_length[1]],
                ];
                rect_boundary_distance(p, &x_arm).min(rect_boundary_distance(p, &y_arm))
            }
        }
    }
}

/// Distance from a point to the boundary of an axis-aligned rectangle.
fn rect_boundary_distance(p: &[f64], rect: &[[f64; 2]; 2]) -> f64 {
    let inside = (0..2).all(|a| p[a] >= rect[a][0] && p[a] <= rect[a][1]);
    if inside {
        let mut d = f64::INFINITY;
        for a in 0..2 {
            d = d.min(p[a] - rect[a][0]).min(rect[a][1] - p[a]);
        }
        d
    } else {
        let mut sq = 0.0;
        for a in 0..2 {
            let lo = rect[a][0] - p[a];
            let hi = p[a] - rect[a][1];
            let gap = lo.max(hi).max(0.0);
            sq += gap * gap;
        }
        sq.sqrt()
    }
}

/// Mask shape parameters.
#[derive(Debug, Clone, Copy)]
pub struct MaskParams {
    /// Smoothing width of the tanh profile; ignored by the sharp variant.
    pub delta: f64,
    pub sharp: bool,
}

impl MaskParams {
    pub fn sharp() -> Self {
        MaskParams {
            delta: 0.0,
            sharp: true,
        }
    }

    pub fn smooth(delta: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::InvalidMaskWidth(delta));
        }
        Ok(MaskParams {
            delta,
            sharp: false,
        })
    }
}

/// Mask value at a point.
///
/// Smooth: `[tanh(+-d/delta) + 1] / 2` with `+` inside the solid. Sharp:
/// the indicator of the solid region.
pub fn mask_value(p: &[f64], geom: &MaskGeometry, params: &MaskParams) -> Result<f64> {
    if params.sharp {
        return Ok(if geom.is_solid(p) { 1.0 } else { 0.0 });
    }
    if params.delta <= 0.0 {
        return Err(Error::InvalidMaskWidth(params.delta));
    }
    let d = geom.signed_distance(p);
    let arg = if geom.is_solid(p) {
        d / params.delta
    } else {
        -d / params.delta
    };
    Ok(0.5 * (arg.tanh() + 1.0))
}

/// Which element owns a duplicated interface node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceSide {
    SolidElement,
    FluidElement,
}

/// Override value for a duplicated Gauss-Lobatto node on a solid/fluid
/// interface: the solid-element copy gets `(tanh(1/delta) + 1) / 2`, the
/// fluid-element copy `(tanh(-1/delta) + 1) / 2`; the sharp variant gives
/// 1 and 0.
pub fn interface_node_mask(side: InterfaceSide, params: &MaskParams) -> f64 {
    match (params.sharp, side) {
        (true, InterfaceSide::SolidElement) => 1.0,
        (true, InterfaceSide::FluidElement) => 0.0,
        (false, InterfaceSide::SolidElement) => 0.5 * ((1.0 / params.delta).tanh() + 1.0),
        (false, InterfaceSide::FluidElement) => 0.5 * ((-1.0 / params.delta).tanh() + 1.0),
    }
}
