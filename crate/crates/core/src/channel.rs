//! Large-scale channel power mathematics.
//!
//! The planner works with grid-averaged powers. This module holds the
//! closed-form cross terms that justify dropping inter-path interference
//! when grids are many wavelengths wide, exact averages used as oracles for
//! that approximation, and the effective IRS reflection gain `T²M⁴κ`.

use core::f64::consts::PI;
use core::fmt;

use crate::propagation::PathSet;
use crate::units::sinc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelError {
    PhaseCountMismatch { paths: usize, phases: usize },
    ZeroPathCount,
    EmptyArray,
}

impl fmt::Display for ChannelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelError::PhaseCountMismatch { paths, phases } => {
                write!(f, "{phases} phases supplied for {paths} paths")
            }
            ChannelError::ZeroPathCount => write!(f, "zero path count with nonzero power"),
            ChannelError::EmptyArray => write!(f, "IRS array must have at least one element"),
        }
    }
}

/// Differences of the ground-plane direction components of two paths,
/// `(A, B)`: x components then y components.
pub fn direction_differences(el1: f64, az1: f64, el2: f64, az2: f64) -> (f64, f64) {
    let (c1, c2) = (libm::cos(el1), libm::cos(el2));
    let a = c1 * libm::sin(az1) - c2 * libm::sin(az2);
    let b = c1 * libm::cos(az1) - c2 * libm::cos(az2);
    (a, b)
}

/// Grid average of `cos(2π/λ · (ρ_l(r) − ρ_l'(r)))` over a `δ × δ` square
/// centred on the reference point.
///
/// Separates into `sinc(πAδ/λ) · sinc(πBδ/λ)`; the degenerate `A = 0` or
/// `B = 0` cases reduce to the one-dimensional factor.
pub fn cross_term_rho(el1: f64, az1: f64, el2: f64, az2: f64, grid_side: f64, wavelength: f64) -> f64 {
    let (a, b) = direction_differences(el1, az1, el2, az2);
    let k = PI * grid_side / wavelength;
    sinc(k * a) * sinc(k * b)
}

/// Upper bound `λ² / (π² δ² |AB|)` on `|ρ|`, infinite when `A` or `B` is 0.
pub fn cross_term_bound(el1: f64, az1: f64, el2: f64, az2: f64, grid_side: f64, wavelength: f64) -> f64 {
    let (a, b) = direction_differences(el1, az1, el2, az2);
    let denom = PI * PI * grid_side * grid_side * libm::fabs(a * b);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        wavelength * wavelength / denom
    }
}

/// Exact grid-averaged power of the direct channel for given path phases.
///
/// Each path contributes `u_l e^{jψ_l}` at the grid center; the average of
/// `|h(r)|²` over the square is `Σ|u_l|² + 2 Σ_{l<l'} |u_l u_l'| cos(ψ_l − ψ_l') ρ_{l,l'}`
/// because the sine part of each cross term integrates to zero over a
/// centred square.
pub fn exact_average_direct_gain(
    paths: &PathSet,
    grid_side: f64,
    wavelength: f64,
    phases: &[f64],
) -> Result<f64, ChannelError> {
    if phases.len() != paths.len() {
        return Err(ChannelError::PhaseCountMismatch {
            paths: paths.len(),
            phases: phases.len(),
        });
    }
    let p = &paths.paths;
    let mut total: f64 = p.iter().map(|x| x.power()).sum();
    for l in 0..p.len() {
        for m in 0..l {
            let rho = cross_term_rho(
                p[l].elevation_aoa,
                p[l].azimuth_aoa,
                p[m].elevation_aoa,
                p[m].azimuth_aoa,
                grid_side,
                wavelength,
            );
            total += 2.0 * p[l].amplitude * p[m].amplitude * libm::cos(phases[l] - phases[m]) * rho;
        }
    }
    Ok(total.max(0.0))
}

/// Phase advance (radians) of a path across one element step in the two
/// panel directions.
fn element_phase_steps(el: f64, az: f64, spacing: f64, wavelength: f64) -> (f64, f64) {
    let k = 2.0 * PI * spacing / wavelength;
    (k * libm::cos(el) * libm::cos(az), k * libm::sin(el))
}

/// Exact element-averaged power between the BS and an `M_a × M_b` IRS,
/// evaluated by summing over every element. Angles are taken in the panel's
/// local frame.
pub fn exact_average_incident_gain(
    paths: &PathSet,
    elements_a: u32,
    elements_b: u32,
    spacing: f64,
    wavelength: f64,
    phases: &[f64],
) -> Result<f64, ChannelError> {
    if phases.len() != paths.len() {
        return Err(ChannelError::PhaseCountMismatch {
            paths: paths.len(),
            phases: phases.len(),
        });
    }
    if elements_a == 0 || elements_b == 0 {
        return Err(ChannelError::EmptyArray);
    }
    let steps: alloc::vec::Vec<(f64, f64)> = paths
        .paths
        .iter()
        .map(|p| element_phase_steps(p.elevation_aoa, p.azimuth_aoa, spacing, wavelength))
        .collect();
    let mut acc = 0.0;
    for mb in 0..elements_b {
        for ma in 0..elements_a {
            let (mut re, mut im) = (0.0, 0.0);
            for (l, p) in paths.paths.iter().enumerate() {
                let arg = phases[l] - (ma as f64 * steps[l].0 + mb as f64 * steps[l].1);
                re += p.amplitude * libm::cos(arg);
                im += p.amplitude * libm::sin(arg);
            }
            acc += re * re + im * im;
        }
    }
    Ok(acc / (elements_a as f64 * elements_b as f64))
}

/// `|sin(Mx)/sin(x)|` with the `x → 0 (mod π)` limit `M`.
fn dirichlet(m: u32, x: f64) -> f64 {
    let s = libm::sin(x);
    if libm::fabs(s) < 1e-12 {
        m as f64
    } else {
        libm::fabs(libm::sin(m as f64 * x) / s)
    }
}

/// Bound on `|exact_average_incident_gain − Σ|σ_l|²|` from the Dirichlet
/// kernel of every path pair.
pub fn incident_cross_bound(paths: &PathSet, elements_a: u32, elements_b: u32, spacing: f64, wavelength: f64) -> f64 {
    let p = &paths.paths;
    let scale = 1.0 / (elements_a as f64 * elements_b as f64);
    let mut bound = 0.0;
    for l in 0..p.len() {
        for m in 0..l {
            let (a1, b1) = element_phase_steps(p[l].elevation_aoa, p[l].azimuth_aoa, spacing, wavelength);
            let (a2, b2) = element_phase_steps(p[m].elevation_aoa, p[m].azimuth_aoa, spacing, wavelength);
            let kernel = dirichlet(elements_a, (a1 - a2) / 2.0) * dirichlet(elements_b, (b1 - b2) / 2.0);
            bound += 2.0 * p[l].amplitude * p[m].amplitude * scale * kernel;
        }
    }
    bound
}

/// `κ = ‖σ‖² ‖ω‖² / (L₀ᵢ L_{i,n})`.
pub fn kappa(incident: (f64, u32), departing: (f64, u32)) -> Result<f64, ChannelError> {
    let (sigma_sq, l_in) = incident;
    let (omega_sq, l_out) = departing;
    if sigma_sq == 0.0 || omega_sq == 0.0 {
        return Ok(0.0);
    }
    if l_in == 0 || l_out == 0 {
        return Err(ChannelError::ZeroPathCount);
    }
    Ok(sigma_sq * omega_sq / (l_in as f64 * l_out as f64))
}

/// Effective cascaded power through an IRS of `tiles` tiles of
/// `elements_per_tile` elements each: `T² (M²)² κ`.
pub fn cascaded_gain(tiles: u32, elements_per_tile: u32, kappa: f64) -> f64 {
    let t = tiles as f64;
    let m2 = elements_per_tile as f64;
    t * t * m2 * m2 * kappa
}
