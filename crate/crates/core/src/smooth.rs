//! Smooth profiles with analytic derivatives: compactly supported bumps and
//! a smooth cutoff in time.

use std::f64::consts::PI;

/// A scalar profile of one variable together with its derivative.
pub trait Profile: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl Profile for Constant {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }
}

/// `amplitude * exp(1 - 1/(1 - r^2))` with `r = (x - center)/half_width`,
/// zero for `|r| >= 1`. Infinitely differentiable, peak value `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64, amplitude: f64) -> Self {
        Self {
            center,
            half_width,
            amplitude,
        }
    }

    /// Support `[center - half_width, center + half_width]`.
    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

impl Profile for Bump {
    fn value(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.half_width;
        self.amplitude * unit_bump(r * r)
    }

    fn derivative(&self, x: f64) -> f64 {
        let r = (x - self.center) / self.half_width;
        let s = r * r;
        if s >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s;
        self.amplitude * unit_bump(s) * (-2.0 * r / (q * q)) / self.half_width
    }
}

/// `amplitude * sin(2 pi frequency x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub amplitude: f64,
    pub frequency: f64,
}

impl Harmonic {
    pub fn new(amplitude: f64, frequency: f64) -> Self {
        Self {
            amplitude,
            frequency,
        }
    }

    /// `sup |derivative|`.
    pub fn max_slope(&self) -> f64 {
        (self.amplitude * 2.0 * PI * self.frequency).abs()
    }
}

impl Profile for Harmonic {
    fn value(&self, x: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * x).sin()
    }

    fn derivative(&self, x: f64) -> f64 {
        let w = 2.0 * PI * self.frequency;
        self.amplitude * w * (w * x).cos()
    }
}

/// `exp(1 - 1/(1 - s))` for `s < 1`, zero otherwise (`s` is a squared radius).
pub fn unit_bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

/// Derivative of [`unit_bump`] with respect to `s`.
pub fn unit_bump_ds(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s;
        -unit_bump(s) / (q * q)
    }
}

/// Radial bump `exp(1 - 1/(1 - |x - c|^2 / R^2))` on the plane, peak 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialBump {
    pub center: (f64, f64),
    pub radius: f64,
}

impl RadialBump {
    pub fn new(center: (f64, f64), radius: f64) -> Self {
        Self { center, radius }
    }

    fn squared_radius(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        (dx * dx + dy * dy) / (self.radius * self.radius)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        unit_bump(self.squared_radius(x, y))
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let d = unit_bump_ds(self.squared_radius(x, y));
        let scale = 2.0 / (self.radius * self.radius);
        (
            d * scale * (x - self.center.0),
            d * scale * (y - self.center.1),
        )
    }
}

/// Infinitely smooth cutoff: 1 on `t <= start`, 0 on `t >= end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothCutoff {
    pub start: f64,
    pub end: f64,
}

fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn transition_ds(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        transition(s) / (s * s)
    }
}

impl SmoothCutoff {
    pub fn new(start: f64, end: f64) -> Self {
        assert!(start < end, "cutoff needs start < end");
        Self { start, end }
    }

    pub fn value(&self, t: f64) -> f64 {
        let p = transition(self.end - t);
        let q = transition(t - self.start);
        p / (p + q)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (a, b) = (self.end - t, t - self.start);
        let (p, q) = (transition(a), transition(b));
        let sum = p + q;
        -(transition_ds(a) * q + p * transition_ds(b)) / (sum * sum)
    }
}

/// Largest `|f|` over `samples` equispaced points of `[a, b)`.
pub fn max_abs_sampled(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> f64 {
    let step = (b - a) / samples as f64;
    (0..samples)
        .map(|k| f(a + k as f64 * step).abs())
        .fold(0.0, f64::max)
}
