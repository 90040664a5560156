use serde::{Deserialize, Serialize};

/// Physical and cost parameters of the routing domain.
///
/// Lengths are in grid units (1 unit = 10 km), times in seconds, so a speed
/// of 0.002 units/s is 20 m/s. One epoch lasts `epoch_s` seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DreamrParams {
    /// Weight of distance flown.
    pub lambda_d: f64,
    /// Weight of a hovering epoch.
    pub lambda_h: f64,
    /// Per-axis acceleration bound, units/s².
    pub acc_lim: f64,
    /// Per-axis acceleration noise std, units/s².
    pub sigma_acc: f64,
    /// Per-axis speed bound, units/s.
    pub xydot_lim: f64,
    /// Speeds below this count as hovering.
    pub hover_eps: f64,
    /// Boarding requires the agent within this distance of the car.
    pub eps_pos: f64,
    /// Boarding requires the agent's speed at most this.
    pub eps_vel: f64,
    pub epoch_s: f64,
    pub episode_epochs: u32,
    /// Probability that a remaining waypoint ETA shifts by ±1 epoch each epoch.
    pub perturb_p: f64,
    /// Fastest average car speed, units/s.
    pub car_speed_max: f64,
    /// Acceleration levels per axis (odd): zero and `±acc_lim` halved repeatedly.
    pub accel_levels: u32,
}

impl Default for DreamrParams {
    fn default() -> Self {
        let xydot_lim = 0.002;
        let acc_lim = 0.0001;
        Self {
            lambda_d: 400.0,
            lambda_h: 2.0,
            acc_lim,
            sigma_acc: 0.1 * acc_lim,
            xydot_lim,
            hover_eps: 0.1 * xydot_lim,
            eps_pos: 0.005,
            eps_vel: 0.1 * xydot_lim,
            epoch_s: 5.0,
            episode_epochs: 360,
            perturb_p: 0.75,
            car_speed_max: 0.005,
            accel_levels: 7,
        }
    }
}

impl DreamrParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        let pos = [
            self.lambda_d,
            self.lambda_h,
            self.acc_lim,
            self.xydot_lim,
            self.hover_eps,
            self.eps_pos,
            self.eps_vel,
            self.epoch_s,
            self.car_speed_max,
        ];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !(self.sigma_acc >= 0.0) {
            return Err("parameters must be positive and finite");
        }
        if !(0.0..=1.0).contains(&self.perturb_p) {
            return Err("perturbation probability must lie in [0, 1]");
        }
        if self.accel_levels < 3 || self.accel_levels % 2 == 0 {
            return Err("acceleration levels must be odd and at least 3");
        }
        if self.episode_epochs == 0 {
            return Err("episode length must be positive");
        }
        Ok(())
    }

    /// Largest distance covered in one epoch at full speed on both axes.
    pub fn max_epoch_displacement(&self) -> f64 {
        self.xydot_lim * self.epoch_s * core::f64::consts::SQRT_2
    }

    /// Upper bound on one Move step's cost.
    pub fn max_move_cost(&self) -> f64 {
        self.lambda_d * self.max_epoch_displacement() + self.lambda_h + 1.0
    }
}
