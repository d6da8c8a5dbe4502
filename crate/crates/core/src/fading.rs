//! Fading light: the capped power law `rho`, its step approximation `tau`
//! and the illumination function built on either.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::error::{input, Result};
use crate::geom::Point;
use crate::scalar::Scalar;
use crate::{Point64, PointQ, Rational};

/// Relative slack that lets values equal to a power of the base (up to
/// rounding) map to that power.
pub const EXACTNESS_GUARD: f64 = 1e-12;

/// Extra shrink of the octagon base so rational rounding of the ring radii
/// cannot break the declared factor.
pub const OCTAGON_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FadingSpec {
    alpha: f64,
}

impl FadingSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(input(format!("fading exponent must be finite and nonnegative, got {alpha}")));
        }
        Ok(FadingSpec { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cap_radius(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RingMode {
    Circle,
    Octagon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepFadingSpec {
    base_epsilon: f64,
    ring_mode: RingMode,
    effective_epsilon: f64,
}

impl StepFadingSpec {
    /// In octagon mode the base shrinks to `(1+eps)cos(pi/8)^alpha` so the
    /// inscribed octagons still give a `1+eps` sandwich.
    pub fn new(base_epsilon: f64, ring_mode: RingMode, fading: &FadingSpec) -> Result<Self> {
        if !(base_epsilon > 0.0) || !base_epsilon.is_finite() {
            return Err(input(format!("epsilon must be positive, got {base_epsilon}")));
        }
        let effective_epsilon = match ring_mode {
            RingMode::Circle => base_epsilon,
            RingMode::Octagon => {
                let b = (1.0 + base_epsilon) * (PI / 8.0).cos().powf(fading.alpha()) * (1.0 - OCTAGON_MARGIN);
                if fading.alpha() == 0.0 {
                    base_epsilon
                } else if b <= 1.0 {
                    return Err(input(format!(
                        "octagon rings cannot reach factor {} with alpha {}",
                        1.0 + base_epsilon,
                        fading.alpha()
                    )));
                } else {
                    b - 1.0
                }
            }
        };
        Ok(StepFadingSpec { base_epsilon, ring_mode, effective_epsilon })
    }

    pub fn circle(base_epsilon: f64) -> Result<Self> {
        Self::new(base_epsilon, RingMode::Circle, &FadingSpec { alpha: 1.0 })
    }

    pub fn base_epsilon(&self) -> f64 {
        self.base_epsilon
    }

    pub fn ring_mode(&self) -> RingMode {
        self.ring_mode
    }

    pub fn effective_epsilon(&self) -> f64 {
        self.effective_epsilon
    }

    pub fn base(&self) -> f64 {
        1.0 + self.effective_epsilon
    }

    /// Guaranteed ratio between the step and the exact optimum.
    pub fn declared_factor(&self) -> f64 {
        1.0 + self.base_epsilon
    }
}

pub fn rho_distance(d: f64, fading: &FadingSpec) -> f64 {
    if d <= 1.0 || fading.alpha == 0.0 {
        1.0
    } else {
        d.powf(-fading.alpha)
    }
}

pub fn rho(g: &Point64, w: &Point64, fading: &FadingSpec) -> f64 {
    rho_distance(g.dist(w), fading)
}

/// Largest `z` with `base^z <= x`, values within [`EXACTNESS_GUARD`] of a
/// power counting as that power.
pub fn hyperfloor_exponent(x: f64, base: f64) -> Result<i64> {
    if !(x > 0.0) {
        return Err(input(format!("hyperfloor needs a positive argument, got {x}")));
    }
    if !(base > 1.0) {
        return Err(input(format!("hyperfloor base must exceed 1, got {base}")));
    }
    let lim = x * (1.0 + EXACTNESS_GUARD);
    let mut z = (x.ln() / base.ln()).floor() as i64;
    while base.powi((z + 1) as i32) <= lim {
        z += 1;
    }
    while base.powi(z as i32) > lim {
        z -= 1;
    }
    Ok(z)
}

pub fn hyperfloor(x: f64, base: f64) -> Result<f64> {
    Ok(base.powi(hyperfloor_exponent(x, base)? as i32))
}

/// Index `z >= 0` of the band containing `w`; the coefficient is
/// `(1+eps')^-z`.
pub fn band_index(g: &Point64, w: &Point64, fading: &FadingSpec, step: &StepFadingSpec) -> i64 {
    if fading.alpha == 0.0 {
        return 0;
    }
    match step.ring_mode {
        RingMode::Circle => {
            let r = rho(g, w, fading);
            -hyperfloor_exponent(r, step.base()).expect("rho is positive")
        }
        RingMode::Octagon => octagon_band(&w.sub(g), None, fading, step),
    }
}

pub fn band_value(z: i64, step: &StepFadingSpec) -> f64 {
    step.base().powi(-(z as i32))
}

pub fn tau(g: &Point64, w: &Point64, fading: &FadingSpec, step: &StepFadingSpec) -> f64 {
    band_value(band_index(g, w, fading, step), step)
}

/// Exact variant for rational points; agrees with [`tau`] on points that
/// are representable in both.
pub fn tau_exact(g: &PointQ, w: &PointQ, fading: &FadingSpec, step: &StepFadingSpec) -> f64 {
    band_value(band_index_exact(g, w, fading, step), step)
}

pub fn band_index_exact(g: &PointQ, w: &PointQ, fading: &FadingSpec, step: &StepFadingSpec) -> i64 {
    if fading.alpha == 0.0 {
        return 0;
    }
    match step.ring_mode {
        RingMode::Circle => band_index(&g.to_f64(), &w.to_f64(), fading, step),
        RingMode::Octagon => {
            let d = w.sub(g);
            octagon_band(&d.to_f64(), Some(&d), fading, step)
        }
    }
}

/// Radii at which the step function drops: `r_0 = 1` and
/// `r_z = (1+eps')^(z/alpha)` up to `max_distance`.
pub fn ring_radii(fading: &FadingSpec, step: &StepFadingSpec, max_distance: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    if fading.alpha == 0.0 {
        return out;
    }
    let mut z = 1;
    loop {
        let r = ring_radius(z, fading, step);
        if r > max_distance * (1.0 + EXACTNESS_GUARD) {
            break;
        }
        out.push(r);
        z += 1;
    }
    out
}

pub fn ring_radius(z: i64, fading: &FadingSpec, step: &StepFadingSpec) -> f64 {
    if z == 0 {
        1.0
    } else {
        step.base().powf(z as f64 / fading.alpha)
    }
}

/// Circumradius of octagon ring `z`: `r_z` rounded down to a multiple of
/// `2^-32` after a relative shrink of `1e-8`, and exactly 1 for `z = 0`.
pub fn octagon_radius(z: i64, fading: &FadingSpec, step: &StepFadingSpec) -> f64 {
    if z == 0 {
        return 1.0;
    }
    let scale = 4294967296.0;
    (ring_radius(z, fading, step) * (1.0 - 1e-8) * scale).floor() / scale
}

pub fn octagon_radius_exact(z: i64, fading: &FadingSpec, step: &StepFadingSpec) -> Rational {
    Rational::from_float(octagon_radius(z, fading, step)).expect("finite radius")
}

struct UnitOctagon {
    vertices: Vec<PointQ>,
    normals: Vec<(PointQ, Rational)>,
    normals_f: Vec<(Point64, f64)>,
}

/// Rational octagon inscribed in the unit circle: vertices `(1,0)`,
/// `(c,c)`, `(0,1)`, ... with `c` just below `1/sqrt 2`.
fn unit_octagon() -> &'static UnitOctagon {
    static OCT: OnceLock<UnitOctagon> = OnceLock::new();
    OCT.get_or_init(|| {
        let scale = BigInt::from(1u64 << 32);
        let c = Rational::new(
            BigInt::from(((1u64 << 32) as f64 / 2f64.sqrt()).floor() as u64),
            scale,
        );
        let one = Rational::from_integer(1.into());
        let zero = Rational::from_integer(0.into());
        let vertices: Vec<PointQ> = vec![
            Point::new(one.clone(), zero.clone()),
            Point::new(c.clone(), c.clone()),
            Point::new(zero.clone(), one.clone()),
            Point::new(-c.clone(), c.clone()),
            Point::new(-one.clone(), zero.clone()),
            Point::new(-c.clone(), -c.clone()),
            Point::new(zero.clone(), -one.clone()),
            Point::new(c.clone(), -c.clone()),
        ];
        let normals: Vec<(PointQ, Rational)> = (0..8)
            .map(|k| {
                let e = vertices[(k + 1) % 8].sub(&vertices[k]);
                let n = Point::new(e.y.clone(), -e.x.clone());
                let h = n.dot(&vertices[k]);
                (n, h)
            })
            .collect();
        let normals_f = normals.iter().map(|(n, h)| (n.to_f64(), h.as_f64())).collect();
        UnitOctagon { vertices, normals, normals_f }
    })
}

/// Octagon gauge: the smallest `t` with `v` in `t * U`.
pub fn octagon_gauge(v: &Point64) -> f64 {
    unit_octagon()
        .normals_f
        .iter()
        .map(|(n, h)| n.dot(v) / h)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn octagon_gauge_exact(v: &PointQ) -> Rational {
    let oct = unit_octagon();
    let mut best: Option<Rational> = None;
    for (n, h) in &oct.normals {
        let g = n.dot(v) / h.clone();
        if best.as_ref().map_or(true, |b| g > *b) {
            best = Some(g);
        }
    }
    best.expect("eight normals")
}

/// Vertices of octagon ring `z` around `g`, counterclockwise.
pub fn octagon_ring(g: &PointQ, z: i64, fading: &FadingSpec, step: &StepFadingSpec) -> Vec<PointQ> {
    let q = octagon_radius_exact(z, fading, step);
    unit_octagon().vertices.iter().map(|u| g.add(&u.scale(&q))).collect()
}

fn octagon_band(d: &Point64, exact: Option<&PointQ>, fading: &FadingSpec, step: &StepFadingSpec) -> i64 {
    let gauge = octagon_gauge(d);
    // Candidate from the circle bands, then walk to the exact crossing.
    let mut z = if gauge <= 1.0 {
        0
    } else {
        ((fading.alpha * gauge.ln() / step.base().ln()).ceil() as i64).max(0)
    };
    let inside = |z: i64| -> bool {
        let q = octagon_radius(z, fading, step);
        if (gauge - q).abs() > 1e-9 * q.max(1.0) {
            return gauge <= q;
        }
        let ex = match exact {
            Some(e) => e.clone(),
            None => d.cast(),
        };
        octagon_gauge_exact(&ex) <= octagon_radius_exact(z, fading, step)
    };
    while z > 0 && inside(z - 1) {
        z -= 1;
    }
    while !inside(z) {
        z += 1;
    }
    z
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntensityAssignment(Vec<f64>);

impl IntensityAssignment {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(v) = x.iter().find(|v| !(**v >= 0.0)) {
            return Err(input(format!("intensities must be nonnegative, got {v}")));
        }
        Ok(IntensityAssignment(x))
    }

    pub fn zeros(n: usize) -> Self {
        IntensityAssignment(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        IntensityAssignment(self.0.iter().map(|v| v * k).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FadingModel {
    Rho(FadingSpec),
    Tau(FadingSpec, StepFadingSpec),
}

impl FadingModel {
    pub fn coefficient(&self, g: &Point64, w: &Point64) -> f64 {
        match self {
            FadingModel::Rho(f) => rho(g, w, f),
            FadingModel::Tau(f, s) => tau(g, w, f, s),
        }
    }

    pub fn fading(&self) -> &FadingSpec {
        match self {
            FadingModel::Rho(f) | FadingModel::Tau(f, _) => f,
        }
    }
}

/// Light received at `p`: the sum of `fading(g, p) x_g` over guards that
/// see `p`.
pub fn illumination<F>(p: &Point64, guards: &[Point64], x: &IntensityAssignment, sees: F, model: &FadingModel) -> f64
where
    F: Fn(usize, &Point64) -> bool,
{
    guards
        .iter()
        .zip(x.values())
        .enumerate()
        .filter(|(_, (_, &xg))| xg > 0.0)
        .filter(|(i, _)| sees(*i, p))
        .map(|(_, (g, &xg))| model.coefficient(g, p) * xg)
        .sum()
}
