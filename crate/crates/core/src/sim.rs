//! Planar surrogate of the hexapod.
//!
//! The body is a rigid planar frame carrying six hips on a circle. Each
//! control step:
//!
//! * planted feet (functional legs with `h(u) = 0`) sweep along the body-frame
//!   traction axis at `m'(u)`; the body moves opposite to the mean sweep,
//!   scaled by `speed_scale`;
//! * each planted foot pushes the body at its hip, and the failed leg, which
//!   keeps touching the floor, drags against the body velocity with
//!   coefficient `mu_drag`; the summed yaw moment times `kappa_psi` is the
//!   yaw rate;
//! * position and heading advance by explicit Euler.
//!
//! Offsets are commanded in the body frame without heading feedback, so a
//! net yaw moment bends the path.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::encoding::{to_assignment, FailureScenario, GaitAssignment, GaitIndex, Leg, LEG_COUNT};
use crate::error::{Error, Result};
use crate::kinematics::{is_stance, magnitude_offset, magnitude_rate, phase, GaitParams};
use crate::stability::{stability_check, Point};

const HALF_SQRT_3: f64 = 0.866_025_403_784_438_6;

/// Unit direction of each hip, leg 1 at 0 degrees, counter-clockwise in
/// 60 degree steps. Legs 2 and 3 sit on the left (+y), 5 and 6 on the right.
const HIP_DIRECTIONS: [Point; LEG_COUNT] = [
    [1.0, 0.0],
    [0.5, HALF_SQRT_3],
    [-0.5, HALF_SQRT_3],
    [-1.0, 0.0],
    [-0.5, -HALF_SQRT_3],
    [0.5, -HALF_SQRT_3],
];

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Hip angle of a leg in `(-pi, pi]`: leg 5 is at -120 degrees, leg 6 at -60.
pub fn hip_angle(leg: Leg) -> f64 {
    normalize_angle((leg as f64 - 1.0) * PI / 3.0)
}

/// Leg that occupies the reflection of `leg` across the body x-axis.
pub fn mirror_leg(leg: Leg) -> Leg {
    match leg {
        1 => 1,
        4 => 4,
        l => 8 - l,
    }
}

fn cross_z(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HexapodGeometry {
    pub hip_radius: f64,
    /// Hip positions in the body frame, indexed by leg - 1.
    pub hips: [Point; LEG_COUNT],
}

impl HexapodGeometry {
    pub fn regular(hip_radius: f64) -> Self {
        let hips = HIP_DIRECTIONS.map(|[c, s]| [hip_radius * c, hip_radius * s]);
        HexapodGeometry { hip_radius, hips }
    }

    pub fn hip(&self, leg: Leg) -> Point {
        self.hips[leg as usize - 1]
    }

    /// Reflection across the body x-axis.
    pub fn mirrored(&self) -> Self {
        HexapodGeometry {
            hip_radius: self.hip_radius,
            hips: self.hips.map(|[x, y]| [x, -y]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    pub x: f64,
    pub y: f64,
    /// Heading in `(-pi, pi]`.
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub pose: BodyPose,
    /// COG inside the support polygon of the planted feet.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub scenario: FailureScenario,
    pub gait: GaitIndex,
}

impl Trajectory {
    pub fn mean_y(&self) -> f64 {
        self.samples.iter().map(|s| s.pose.y).sum::<f64>() / self.samples.len() as f64
    }

    pub fn final_pose(&self) -> BodyPose {
        self.samples.last().expect("trajectory is never empty").pose
    }

    /// Straight-line distance from the start to the final pose.
    pub fn displacement(&self) -> f64 {
        let p = self.final_pose();
        p.x.hypot(p.y)
    }

    pub fn stable_fraction(&self) -> f64 {
        self.samples.iter().filter(|s| s.stable).count() as f64 / self.samples.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub params: GaitParams,
    pub geometry: HexapodGeometry,
    /// Yaw rate per unit normalized torque.
    pub kappa_psi: f64,
    /// Drag coefficient of the failed leg.
    pub mu_drag: f64,
    /// Body speed per unit mean foot-sweep rate.
    pub speed_scale: f64,
    /// Rotate about the vertical axis before walking.
    pub self_rotation: bool,
    /// Include the yaw moment of the planted feet. With this off, drag of
    /// the failed leg is the only source of turning.
    pub stance_torque: bool,
}

impl SimConfig {
    pub const HIP_RADIUS_RATIO: f64 = 0.3;

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let checks = [
            (self.dt > 0.0 && self.dt.is_finite(), "dt must be positive"),
            (
                self.duration > 0.0 && self.duration.is_finite(),
                "duration must be positive",
            ),
            (p.amplitude >= 0.0, "step amplitude must be non-negative"),
            (p.height >= 0.0, "step height must be non-negative"),
            (p.size_factor > 0.0, "size factor must be positive"),
            (p.theta.is_finite(), "commanded angle must be finite"),
            (
                self.geometry.hip_radius > 0.0,
                "hip radius must be positive",
            ),
            (self.kappa_psi.is_finite(), "kappa_psi must be finite"),
            (self.mu_drag >= 0.0, "mu_drag must be non-negative"),
            (self.speed_scale >= 0.0, "speed_scale must be non-negative"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::config(*msg)),
            None => Ok(()),
        }
    }

    /// Number of integration steps.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        let params = GaitParams::default();
        SimConfig {
            dt: 0.01,
            duration: 30.0,
            params,
            geometry: HexapodGeometry::regular(Self::HIP_RADIUS_RATIO * params.size_factor),
            kappa_psi: 2.0,
            mu_drag: 1.0,
            speed_scale: 1.0,
            self_rotation: false,
            stance_torque: true,
        }
    }
}

/// Heading that points the failed hip along the commanded direction, which
/// cancels the drag moment of that leg.
pub fn self_rotation(scenario: FailureScenario, theta_cmd: f64) -> f64 {
    match scenario.failed_leg() {
        None => 0.0,
        Some(leg) => normalize_angle(theta_cmd - hip_angle(leg)),
    }
}

/// Initial heading and body-frame traction axis for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub psi0: f64,
    pub traction_axis: f64,
}

struct ActiveLeg {
    hip: Point,
    rank: u8,
}

struct Rig {
    legs: Vec<ActiveLeg>,
    failed_hip: Option<Point>,
}

impl Rig {
    fn new(gait: &GaitAssignment, scenario: FailureScenario, geometry: &HexapodGeometry) -> Self {
        let legs = gait
            .ranked_legs()
            .map(|(leg, rank)| ActiveLeg {
                hip: geometry.hip(leg),
                rank,
            })
            .collect();
        Rig {
            legs,
            failed_hip: scenario.failed_leg().map(|leg| geometry.hip(leg)),
        }
    }

    /// Per-step yaw-moment weight: the moment at time `t` equals
    /// `cross_z(w, axis)` for traction axis `axis`.
    fn moment_weight(&self, t: f64, config: &SimConfig) -> Point {
        let a = config.params.amplitude;
        let mut n = 0usize;
        let mut rate_sum = 0.0;
        let mut push = [0.0, 0.0];
        for leg in &self.legs {
            let u = phase(t, leg.rank);
            if is_stance(u) {
                let rate = magnitude_rate(u, a);
                n += 1;
                rate_sum += rate;
                push[0] += rate * leg.hip[0];
                push[1] += rate * leg.hip[1];
            }
        }
        if n == 0 {
            return [0.0, 0.0];
        }
        let n = n as f64;
        let mut w = [0.0, 0.0];
        if config.stance_torque {
            w = [-push[0] / n, -push[1] / n];
        }
        if let Some(r_f) = self.failed_hip {
            let drag = config.mu_drag * config.speed_scale * rate_sum / n;
            w[0] += drag * r_f[0];
            w[1] += drag * r_f[1];
        }
        w
    }
}

/// Self-rotation that balances the run: picks the traction axis along which
/// the yaw moment, summed over every integration step, vanishes. With the
/// stance moment disabled this reduces to [`self_rotation`].
pub fn balanced_self_rotation(
    gait: &GaitAssignment,
    scenario: FailureScenario,
    config: &SimConfig,
) -> Orientation {
    let theta = config.params.theta;
    let aligned = Orientation {
        psi0: self_rotation(scenario, theta),
        traction_axis: match scenario.failed_leg() {
            Some(leg) => hip_angle(leg),
            None => theta,
        },
    };
    if scenario.failed_leg().is_none() || !config.stance_torque {
        return aligned;
    }
    let rig = Rig::new(gait, scenario, &config.geometry);
    let mut w = [0.0, 0.0];
    for k in 0..config.steps() {
        let wk = rig.moment_weight(k as f64 * config.dt, config);
        w[0] += wk[0];
        w[1] += wk[1];
    }
    if w[0].hypot(w[1]) <= f64::EPSILON * config.params.amplitude * config.geometry.hip_radius {
        return aligned;
    }
    let axis = w[1].atan2(w[0]);
    Orientation {
        psi0: normalize_angle(theta - axis),
        traction_axis: axis,
    }
}

fn orientation(
    gait: &GaitAssignment,
    scenario: FailureScenario,
    config: &SimConfig,
) -> Orientation {
    if config.self_rotation {
        balanced_self_rotation(gait, scenario, config)
    } else {
        Orientation {
            psi0: 0.0,
            traction_axis: config.params.theta,
        }
    }
}

pub fn simulate(
    gait: &GaitAssignment,
    scenario: FailureScenario,
    config: &SimConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if !gait.is_consistent_with(scenario) {
        return Err(Error::config(format!(
            "gait ranks legs {:?} but scenario {} leaves legs {:?} functional",
            gait.ranked_legs().map(|(l, _)| l).collect::<Vec<_>>(),
            scenario,
            scenario.functional_legs()
        )));
    }
    let rig = Rig::new(gait, scenario, &config.geometry);
    let Orientation {
        psi0,
        traction_axis,
    } = orientation(gait, scenario, config);
    let axis = [traction_axis.cos(), traction_axis.sin()];
    let a = config.params.amplitude;

    let stance_at = |t: f64| -> (Vec<Point>, f64, f64) {
        // (planted feet, summed sweep rate, summed yaw moment)
        let mut feet = Vec::with_capacity(rig.legs.len());
        let mut rate_sum = 0.0;
        let mut moment = 0.0;
        for leg in &rig.legs {
            let u = phase(t, leg.rank);
            if is_stance(u) {
                let m = magnitude_offset(u, a);
                feet.push([leg.hip[0] + m * axis[0], leg.hip[1] + m * axis[1]]);
                let rate = magnitude_rate(u, a);
                rate_sum += rate;
                moment += cross_z(leg.hip, [-rate * axis[0], -rate * axis[1]]);
            }
        }
        (feet, rate_sum, moment)
    };

    let steps = config.steps();
    let mut samples = Vec::with_capacity(steps + 1);
    let (mut x, mut y, mut psi) = (0.0f64, 0.0f64, psi0);

    for k in 0..=steps {
        let t = k as f64 * config.dt;
        let (feet, rate_sum, moment) = stance_at(t);
        samples.push(Sample {
            t,
            pose: BodyPose {
                x,
                y,
                psi: normalize_angle(psi),
            },
            stable: stability_check(&feet, [0.0, 0.0]),
        });
        if k == steps {
            break;
        }

        let n = feet.len();
        let (v_body, yaw_rate) = if n == 0 {
            ([0.0, 0.0], 0.0)
        } else {
            let n = n as f64;
            let speed = -config.speed_scale * rate_sum / n;
            let v_body = [speed * axis[0], speed * axis[1]];
            let mut torque = 0.0;
            if config.stance_torque {
                torque += moment / n;
            }
            if let Some(r_f) = rig.failed_hip {
                let drag = [-config.mu_drag * v_body[0], -config.mu_drag * v_body[1]];
                torque += cross_z(r_f, drag);
            }
            (v_body, config.kappa_psi * torque)
        };

        let (sin, cos) = psi.sin_cos();
        x += config.dt * (cos * v_body[0] - sin * v_body[1]);
        y += config.dt * (sin * v_body[0] + cos * v_body[1]);
        psi += config.dt * yaw_rate;
    }

    Ok(Trajectory {
        samples,
        scenario,
        gait: gait.index(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveResult {
    /// Mean perpendicular distance from the commanded line, meters.
    pub f: f64,
    pub trajectory: Trajectory,
}

/// Mean distance of the path from the line through the origin at
/// `theta_cmd`.
pub fn deviation_objective(trajectory: Trajectory, theta_cmd: f64) -> ObjectiveResult {
    let f = deviation(&trajectory, theta_cmd);
    ObjectiveResult { f, trajectory }
}

pub fn deviation(trajectory: &Trajectory, theta_cmd: f64) -> f64 {
    let (sin, cos) = theta_cmd.sin_cos();
    let total: f64 = trajectory
        .samples
        .iter()
        .map(|s| (cos * s.pose.y - sin * s.pose.x).abs())
        .sum();
    total / trajectory.samples.len() as f64
}

/// Unrank, simulate, score.
pub fn evaluate(
    index: usize,
    scenario: FailureScenario,
    config: &SimConfig,
) -> Result<ObjectiveResult> {
    let gait = to_assignment(index, scenario)?;
    let trajectory = simulate(&gait, scenario, config)?;
    Ok(deviation_objective(trajectory, config.params.theta))
}
