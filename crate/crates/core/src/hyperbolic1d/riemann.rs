//! Exact entropy solutions of Burgers' equation `u_t + (u^2)_x = 0`.

use crate::error::{Error, Result};
use crate::mesh::wrap_into;

/// Self-similar solution of the Riemann problem at `xi = x / t`.
pub fn burgers_riemann(u_left: f64, u_right: f64, xi: f64) -> f64 {
    if u_left > u_right {
        let speed = u_left + u_right;
        if xi < speed {
            u_left
        } else {
            u_right
        }
    } else if xi <= 2.0 * u_left {
        u_left
    } else if xi >= 2.0 * u_right {
        u_right
    } else {
        0.5 * xi
    }
}

/// Slowest and fastest speed of the wave emitted by a jump.
fn wave_footprint(u_left: f64, u_right: f64) -> (f64, f64) {
    if u_left > u_right {
        let s = u_left + u_right;
        (s, s)
    } else {
        (2.0 * u_left, 2.0 * u_right)
    }
}

/// Periodic data `inner` on `[left, right)` and `outer` elsewhere in
/// `[origin, origin + period)`; the exact solution holds until the two
/// emitted waves meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersPulse {
    pub origin: f64,
    pub period: f64,
    pub left: f64,
    pub right: f64,
    pub inner: f64,
    pub outer: f64,
}

impl BurgersPulse {
    pub fn new(domain: (f64, f64), jumps: (f64, f64), inner: f64, outer: f64) -> Result<Self> {
        let (origin, end) = domain;
        let (left, right) = jumps;
        if !(origin <= left && left < right && right < end) {
            return Err(Error::InvalidArgument(format!(
                "pulse [{left}, {right}) must sit inside [{origin}, {end})"
            )));
        }
        Ok(Self {
            origin,
            period: end - origin,
            left,
            right,
            inner,
            outer,
        })
    }

    pub fn initial(&self, x: f64) -> f64 {
        let x = wrap_into(x, self.origin, self.period);
        if self.left <= x && x < self.right {
            self.inner
        } else {
            self.outer
        }
    }

    /// First time at which the two waves touch.
    pub fn valid_until(&self) -> f64 {
        let (a_lo, a_hi) = wave_footprint(self.outer, self.inner);
        let (b_lo, b_hi) = wave_footprint(self.inner, self.outer);
        let inside = self.right - self.left;
        let outside = self.period - inside;
        let meet = |gap: f64, closing: f64| {
            if closing > 0.0 {
                gap / closing
            } else {
                f64::INFINITY
            }
        };
        meet(inside, a_hi - b_lo).min(meet(outside, b_hi - a_lo))
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return self.initial(x);
        }
        let (a_lo, a_hi) = wave_footprint(self.outer, self.inner);
        let (b_lo, b_hi) = wave_footprint(self.inner, self.outer);
        let split_inside = 0.5 * (self.left + a_hi * t + self.right + b_lo * t);
        let split_outside = 0.5 * (self.right + b_hi * t + self.left + self.period + a_lo * t);
        let x = wrap_into(x, split_outside - self.period, self.period);
        if x < split_inside {
            burgers_riemann(self.outer, self.inner, (x - self.left) / t)
        } else {
            burgers_riemann(self.inner, self.outer, (x - self.right) / t)
        }
    }
}
