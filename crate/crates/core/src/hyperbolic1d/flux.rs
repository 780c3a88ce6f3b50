//! Continuous fluxes and two-point numerical fluxes.

use serde::Serialize;

/// Scalar law `u_t + f(u)_x = 0`.
#[derive(Clone, Copy, Debug)]
pub enum ConservationLaw {
    /// `f(u) = a u`.
    Transport { speed: f64 },
    /// `f(u) = u^2`.
    Burgers,
    Custom {
        name: &'static str,
        f: fn(f64) -> f64,
        df: fn(f64) -> f64,
    },
}

/// Sample count used where extrema of a custom flux are needed.
const SCAN_SAMPLES: usize = 1024;

impl ConservationLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ConservationLaw::Transport { .. } => "transport",
            ConservationLaw::Burgers => "burgers",
            ConservationLaw::Custom { name, .. } => name,
        }
    }

    pub fn flux(&self, u: f64) -> f64 {
        match *self {
            ConservationLaw::Transport { speed } => speed * u,
            ConservationLaw::Burgers => u * u,
            ConservationLaw::Custom { f, .. } => f(u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            ConservationLaw::Transport { speed } => speed,
            ConservationLaw::Burgers => 2.0 * u,
            ConservationLaw::Custom { df, .. } => df(u),
        }
    }

    /// `max |f'|` over `[lo, hi]`.
    pub fn max_wave_speed(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        match *self {
            ConservationLaw::Transport { speed } => speed.abs(),
            ConservationLaw::Burgers => 2.0 * lo.abs().max(hi.abs()),
            ConservationLaw::Custom { df, .. } => (0..=SCAN_SAMPLES)
                .map(|k| df(lo + (hi - lo) * k as f64 / SCAN_SAMPLES as f64).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// `a u_L`.
pub fn flux_upwind(u_left: f64, _u_right: f64, speed: f64) -> f64 {
    speed * u_left
}

/// `(f(u_L) + f(u_R))/2 - (lambda/2)(u_R - u_L)`.
pub fn flux_lax_friedrichs(
    u_left: f64,
    u_right: f64,
    f: impl Fn(f64) -> f64,
    lambda: f64,
) -> f64 {
    0.5 * (f(u_left) + f(u_right)) - 0.5 * lambda * (u_right - u_left)
}

const GODUNOV_COARSE: usize = 64;
const GODUNOV_TOLERANCE: f64 = 1e-12;

/// Godunov flux: `min f` over `[u_L, u_R]` when `u_L <= u_R`, `max f` over
/// `[u_R, u_L]` otherwise. The extremum is bracketed on a coarse grid and
/// refined by golden-section search.
pub fn flux_godunov(u_left: f64, u_right: f64, f: impl Fn(f64) -> f64) -> f64 {
    if u_left == u_right {
        return f(u_left);
    }
    if u_left < u_right {
        bracketed_min(&f, u_left, u_right)
    } else {
        -bracketed_min(&|u| -f(u), u_right, u_left)
    }
}

fn bracketed_min(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let step = (b - a) / GODUNOV_COARSE as f64;
    let node = |k: usize| if k == GODUNOV_COARSE { b } else { a + k as f64 * step };
    let mut best_k = 0;
    let mut best = f(a);
    for k in 1..=GODUNOV_COARSE {
        let v = f(node(k));
        if v < best {
            best = v;
            best_k = k;
        }
    }
    if best_k == 0 || best_k == GODUNOV_COARSE {
        return best;
    }
    let (mut lo, mut hi) = (node(best_k - 1), node(best_k + 1));
    let ratio = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > GODUNOV_TOLERANCE {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    best.min(fc).min(fd)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxRule {
    Upwind,
    Godunov,
    LaxFriedrichs { lambda: f64 },
}

/// A two-point flux rule bound to the law it approximates.
#[derive(Clone, Copy, Debug)]
pub struct NumericalFlux {
    pub law: ConservationLaw,
    pub rule: FluxRule,
}

/// Outcome of a sampled monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest wrong-signed increment found.
    pub worst: f64,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations == 0
    }
}

impl NumericalFlux {
    /// Upwind flux of the transport law; requires `speed > 0`.
    pub fn upwind(speed: f64) -> Self {
        Self {
            law: ConservationLaw::Transport { speed },
            rule: FluxRule::Upwind,
        }
    }

    pub fn godunov(law: ConservationLaw) -> Self {
        Self {
            law,
            rule: FluxRule::Godunov,
        }
    }

    pub fn lax_friedrichs(law: ConservationLaw, lambda: f64) -> Self {
        Self {
            law,
            rule: FluxRule::LaxFriedrichs { lambda },
        }
    }

    pub fn name(&self) -> &'static str {
        match self.rule {
            FluxRule::Upwind => "upwind",
            FluxRule::Godunov => "godunov",
            FluxRule::LaxFriedrichs { .. } => "lax-friedrichs",
        }
    }

    pub fn evaluate(&self, u_left: f64, u_right: f64) -> f64 {
        let law = self.law;
        match self.rule {
            FluxRule::Upwind => match law {
                ConservationLaw::Transport { speed } => flux_upwind(u_left, u_right, speed),
                _ => law.flux(u_left),
            },
            FluxRule::Godunov => flux_godunov(u_left, u_right, |u| law.flux(u)),
            FluxRule::LaxFriedrichs { lambda } => {
                flux_lax_friedrichs(u_left, u_right, |u| law.flux(u), lambda)
            }
        }
    }

    /// Constant `L` of the step restriction `dt L <= min |K|` on states in `[lo, hi]`.
    /// For Lax–Friedrichs this is `max(lambda, max |f'|)`, so an undersized
    /// `lambda` still yields a bounded step and shows up as non-monotonicity.
    pub fn lipschitz_bound(&self, lo: f64, hi: f64) -> f64 {
        let wave = self.law.max_wave_speed(lo, hi);
        match self.rule {
            FluxRule::LaxFriedrichs { lambda } => lambda.max(wave),
            _ => wave,
        }
    }

    /// Whether the rule is monotone on `[lo, hi]` by construction.
    pub fn declared_monotone(&self, lo: f64, hi: f64) -> bool {
        match (self.rule, self.law) {
            (FluxRule::Upwind, ConservationLaw::Transport { speed }) => speed >= 0.0,
            (FluxRule::Upwind, _) => false,
            (FluxRule::Godunov, _) => true,
            (FluxRule::LaxFriedrichs { lambda }, law) => lambda >= law.max_wave_speed(lo, hi),
        }
    }

    /// Checks on a `samples x samples` state grid over `[lo, hi]` that the
    /// flux is nondecreasing in its first and nonincreasing in its second argument.
    pub fn check_monotone(&self, lo: f64, hi: f64, samples: usize) -> MonotonicityReport {
        let samples = samples.max(2);
        let state = |k: usize| lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let scale = self.law.flux(lo).abs().max(self.law.flux(hi).abs()).max(1.0);
        let slack = 1e-12 * scale;
        let mut report = MonotonicityReport {
            checked: 0,
            violations: 0,
            worst: 0.0,
        };
        for j in 0..samples {
            for k in 0..samples - 1 {
                let (a, b) = (state(k), state(k + 1));
                let fixed = state(j);
                let first = self.evaluate(a, fixed) - self.evaluate(b, fixed);
                let second = self.evaluate(fixed, b) - self.evaluate(fixed, a);
                for bad in [first, second] {
                    report.checked += 1;
                    if bad > slack {
                        report.violations += 1;
                        report.worst = report.worst.max(bad);
                    }
                }
            }
        }
        report
    }

    /// `max_s |F(s, s) - f(s)|` over `samples` equispaced states of `[lo, hi]`.
    pub fn consistency_defect(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let samples = samples.max(2);
        (0..samples)
            .map(|k| {
                let s = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
                (self.evaluate(s, s) - self.law.flux(s)).abs()
            })
            .fold(0.0, f64::max)
    }
}
