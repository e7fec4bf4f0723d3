//! Duty-cycle waveforms and per-leg offset commands.
//!
//! Each leg follows a one-second cycle in normalized time `u`. The planar
//! offset sweeps forward while the foot is planted (`u` in `[0, 1/3)` and
//! `[2/3, 1)`) and back while it is lifted (`u` in `[1/3, 2/3)`). A leg's
//! duty rank shifts its cycle by a sixth of a period per rank.

use serde::{Deserialize, Serialize};

const ONE_THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;

/// Step amplitude, step height, size factor and commanded heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaitParams {
    /// Step amplitude `A`, meters.
    pub amplitude: f64,
    /// Step height `H`, meters.
    pub height: f64,
    /// Size factor `E`, meters.
    pub size_factor: f64,
    /// Commanded planar orientation, radians.
    pub theta: f64,
}

impl GaitParams {
    pub const AMPLITUDE_RATIO: f64 = 0.11;
    pub const HEIGHT_RATIO: f64 = 0.02;

    /// `A = 0.11 E`, `H = 0.02 E`.
    pub fn for_size(size_factor: f64, theta: f64) -> Self {
        GaitParams {
            amplitude: Self::AMPLITUDE_RATIO * size_factor,
            height: Self::HEIGHT_RATIO * size_factor,
            size_factor,
            theta,
        }
    }
}

impl Default for GaitParams {
    /// `E = 1 m`, commanded heading 180 degrees (the surrogate walks
    /// opposite the foot sweep, so this travels along +x).
    fn default() -> Self {
        GaitParams::for_size(1.0, std::f64::consts::PI)
    }
}

/// Normalized cycle time, always in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Phase(f64);

impl Phase {
    /// # Panics
    /// If `u` is outside `[0, 1)`.
    pub fn new(u: f64) -> Self {
        assert!((0.0..1.0).contains(&u), "phase {u} outside [0, 1)");
        Phase(u)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `u = mod(t + (rank - 1)/6, 1)`.
pub fn phase(t: f64, rank: u8) -> Phase {
    debug_assert!((1..=6).contains(&rank));
    let shifted = t + (rank as f64 - 1.0) / 6.0;
    let u = shifted.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    Phase(if u >= 1.0 { 0.0 } else { u })
}

/// Planar offset magnitude `m(u)`.
pub fn magnitude_offset(u: Phase, amplitude: f64) -> f64 {
    let u = u.0;
    if u < ONE_THIRD {
        3.0 * u * amplitude / 2.0
    } else if u < 0.5 {
        amplitude / 2.0 - 3.0 * amplitude * (u - ONE_THIRD)
    } else if u < TWO_THIRDS {
        -3.0 * amplitude * (u - 0.5)
    } else {
        -amplitude / 2.0 * (1.0 - 3.0 * (u - TWO_THIRDS))
    }
}

/// Height offset `h(u)`; zero while the foot is planted.
pub fn height_offset(u: Phase, height: f64) -> f64 {
    let u = u.0;
    if u < ONE_THIRD {
        0.0
    } else if u < 0.5 {
        6.0 * height * (u - ONE_THIRD)
    } else if u < TWO_THIRDS {
        height * (1.0 - 6.0 * (u - 0.5))
    } else {
        0.0
    }
}

/// `dm/du`, right-limit slope at branch boundaries.
pub fn magnitude_rate(u: Phase, amplitude: f64) -> f64 {
    let u = u.0;
    if !(ONE_THIRD..TWO_THIRDS).contains(&u) {
        1.5 * amplitude
    } else {
        -3.0 * amplitude
    }
}

pub fn is_stance(u: Phase) -> bool {
    let u = u.0;
    !(ONE_THIRD..TWO_THIRDS).contains(&u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegCommand {
    pub magnitude: f64,
    pub height: f64,
    /// `d = (m cos θ, m sin θ, h)`
    pub displacement: [f64; 3],
    /// `p = p_o + d`
    pub target: [f64; 3],
    pub home: [f64; 3],
}

pub fn leg_command(t: f64, rank: u8, params: &GaitParams, home: [f64; 3]) -> LegCommand {
    let u = phase(t, rank);
    let magnitude = magnitude_offset(u, params.amplitude);
    let height = height_offset(u, params.height);
    let (sin, cos) = params.theta.sin_cos();
    let displacement = [magnitude * cos, magnitude * sin, height];
    let target = [
        home[0] + displacement[0],
        home[1] + displacement[1],
        home[2] + displacement[2],
    ];
    LegCommand {
        magnitude,
        height,
        displacement,
        target,
        home,
    }
}
