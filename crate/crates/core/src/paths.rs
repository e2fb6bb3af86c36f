//! Sampled paths with sitting ends.
//!
//! A [`SampledPath`] stores `N + 1` samples on a uniform grid over
//! `[t0, t1]`. The first and last `sit` samples are identical, which is the
//! discrete form of a path being constant near its endpoints. Analytic test
//! paths are described by [`PathSpec`] and reparametrized by a smooth step
//! that is constant on a window at each end, so sampled derivatives stay
//! second-order accurate across junctions.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVec, GroupElement};

/// Tolerance for endpoint and fiber matching.
pub const JOIN_TOL: f64 = 1e-9;

/// Smallest sitting window of an analytic primitive, as a fraction of its
/// duration.
pub const SIT_FRACTION: f64 = 0.02;

/// A point of ℝᵈ.
pub type BasePoint = DVector<f64>;

/// A path in the base space.
pub type BasePath = SampledPath<BasePoint>;

/// Number of frozen samples at each end of a primitive path with `n` steps.
pub fn default_sit(n: usize) -> usize {
    (n / 50).max(2)
}

/// Values that can be sampled along a path.
pub trait PathPoint: Clone + Send + Sync {
    fn distance(&self, other: &Self) -> f64;
    /// Point a fraction `s` of the way from `self` to `other`.
    fn interpolate(&self, other: &Self, s: f64) -> Self;
    fn is_finite(&self) -> bool;
    fn csv_header(&self) -> Vec<String>;
    fn csv_fields(&self) -> Vec<f64>;
}

impl PathPoint for DVector<f64> {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    fn interpolate(&self, other: &Self, s: f64) -> Self {
        self * (1.0 - s) + other * s
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    fn csv_header(&self) -> Vec<String> {
        (0..self.len()).map(|i| format!("x{i}")).collect()
    }

    fn csv_fields(&self) -> Vec<f64> {
        self.iter().copied().collect()
    }
}

impl PathPoint for GroupElement {
    fn distance(&self, other: &Self) -> f64 {
        GroupElement::distance(self, other)
    }

    fn interpolate(&self, other: &Self, s: f64) -> Self {
        GroupElement::interpolate(self, other, s)
    }

    fn is_finite(&self) -> bool {
        self.matrix()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn csv_header(&self) -> Vec<String> {
        let n = self.matrix().nrows();
        let mut out = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(format!("m{i}{j}_re"));
                out.push(format!("m{i}{j}_im"));
            }
        }
        out
    }

    fn csv_fields(&self) -> Vec<f64> {
        let m = self.matrix();
        let n = m.nrows();
        let mut out = Vec::with_capacity(2 * n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(m[(i, j)].re);
                out.push(m[(i, j)].im);
            }
        }
        out
    }
}

/// A path sampled on a uniform grid with frozen ends.
#[derive(Debug, Clone)]
pub struct SampledPath<P> {
    t0: f64,
    t1: f64,
    samples: Vec<P>,
    sit: usize,
    resampled: bool,
}

impl<P: PathPoint> SampledPath<P> {
    /// Validates the sitting invariant: the first and last `sit` samples agree
    /// within [`JOIN_TOL`] and `N >= 2 sit`.
    pub fn new(t0: f64, t1: f64, samples: Vec<P>, sit: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyPath);
        }
        if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
            return Err(Error::InvalidPath(format!(
                "bad time interval [{t0}, {t1}]"
            )));
        }
        if samples.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidPath("non-finite sample".into()));
        }
        let n = samples.len() - 1;
        if sit == 0 || n < 2 * sit && n > 0 {
            return Err(Error::InvalidPath(format!(
                "sit {sit} is incompatible with {n} steps"
            )));
        }
        if n > 0 {
            let first = &samples[0];
            let last = &samples[n];
            for k in 0..sit {
                if samples[k].distance(first) > JOIN_TOL || samples[n - k].distance(last) > JOIN_TOL
                {
                    return Err(Error::InvalidPath(format!(
                        "sample {k} breaks the sitting window"
                    )));
                }
            }
        }
        Ok(SampledPath {
            t0,
            t1,
            samples,
            sit,
            resampled: false,
        })
    }

    /// Samples `f` at the `n + 1` grid times of `[t0, t1]`.
    pub fn from_fn(t0: f64, t1: f64, n: usize, sit: usize, f: impl Fn(f64) -> P) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPath(
                "a sampled path needs at least one step".into(),
            ));
        }
        let dt = (t1 - t0) / n as f64;
        let samples = (0..=n).map(|i| f(t0 + dt * i as f64)).collect();
        Self::new(t0, t1, samples, sit)
    }

    /// The constant path at `x` over `[0, duration]` with `n` steps.
    pub fn point_path(x: P, duration: f64, n: usize) -> Self {
        let n = n.max(4);
        SampledPath {
            t0: 0.0,
            t1: duration.max(0.0),
            samples: vec![x; n + 1],
            sit: default_sit(n).min(n / 2),
            resampled: false,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn duration(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Number of steps `N`.
    pub fn n_steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn dt(&self) -> f64 {
        if self.n_steps() == 0 {
            0.0
        } else {
            self.duration() / self.n_steps() as f64
        }
    }

    pub fn sit(&self) -> usize {
        self.sit
    }

    /// True when a composition had to resample onto a common grid.
    pub fn resampled(&self) -> bool {
        self.resampled
    }

    pub fn samples(&self) -> &[P] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> Result<&P> {
        self.samples.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.samples.len(),
        })
    }

    pub fn start(&self) -> &P {
        &self.samples[0]
    }

    pub fn end(&self) -> &P {
        &self.samples[self.samples.len() - 1]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt() * i as f64
    }

    /// The same samples shifted in time by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        SampledPath {
            t0: self.t0 + shift,
            t1: self.t1 + shift,
            ..self.clone()
        }
    }

    /// Canonical representative of the time-translation class: `t0 = 0`.
    pub fn normalized(&self) -> Self {
        self.translated(-self.t0)
    }

    /// Applies `f` to every sample, keeping the grid and sitting data.
    pub fn map<Q: PathPoint>(&self, f: impl Fn(&P) -> Q) -> SampledPath<Q> {
        SampledPath {
            t0: self.t0,
            t1: self.t1,
            samples: self.samples.iter().map(f).collect(),
            sit: self.sit,
            resampled: self.resampled,
        }
    }

    /// A path on the same grid carrying `samples`, one per grid time.
    pub fn with_samples<Q: PathPoint>(&self, samples: Vec<Q>) -> Result<SampledPath<Q>> {
        if samples.len() != self.samples.len() {
            return Err(Error::InvalidPath(format!(
                "expected {} samples, got {}",
                self.samples.len(),
                samples.len()
            )));
        }
        Ok(SampledPath {
            t0: self.t0,
            t1: self.t1,
            samples,
            sit: self.sit,
            resampled: self.resampled,
        })
    }

    /// Value at time `t` by interpolation between neighbouring samples;
    /// times outside the interval are clamped.
    pub fn at_time(&self, t: f64) -> P {
        let n = self.n_steps();
        if n == 0 || self.dt() == 0.0 {
            return self.samples[0].clone();
        }
        let pos = ((t - self.t0) / self.dt()).clamp(0.0, n as f64);
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        if frac <= 1e-12 {
            self.samples[i].clone()
        } else if frac >= 1.0 - 1e-12 {
            self.samples[i + 1].clone()
        } else {
            self.samples[i].interpolate(&self.samples[i + 1], frac)
        }
    }

    /// Writes `t` and the coordinates of every sample as CSV.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend(self.samples[0].csv_header());
        w.write_record(&header)?;
        for (i, p) in self.samples.iter().enumerate() {
            let mut row = vec![format!("{:.17e}", self.time(i))];
            row.extend(p.csv_fields().iter().map(|v| format!("{v:.17e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn leading_frozen(&self) -> usize {
        let first = &self.samples[0];
        self.samples
            .iter()
            .take_while(|p| p.distance(first) <= JOIN_TOL)
            .count()
    }

    fn trailing_frozen(&self) -> usize {
        let last = self.end();
        self.samples
            .iter()
            .rev()
            .take_while(|p| p.distance(last) <= JOIN_TOL)
            .count()
    }
}

/// Concatenates `first` then `second`. The second path is translated so it
/// starts when the first ends. Matching grids are concatenated directly,
/// dropping the duplicated junction sample; otherwise both pieces are
/// resampled onto the finer step and the result is flagged as resampled.
pub fn path_compose<P: PathPoint>(
    second: &SampledPath<P>,
    first: &SampledPath<P>,
) -> Result<SampledPath<P>> {
    if first.samples.is_empty() || second.samples.is_empty() {
        return Err(Error::EmptyPath);
    }
    if first.sit == 0 || second.sit == 0 {
        return Err(Error::InvalidPath("composition needs sitting ends".into()));
    }
    let mismatch = first.end().distance(second.start());
    if mismatch > JOIN_TOL {
        return Err(Error::EndpointMismatch { mismatch });
    }
    let second = second.translated(first.t1 - second.t0);
    if second.duration() == 0.0 {
        return Ok(first.clone());
    }
    if first.duration() == 0.0 {
        return Ok(second);
    }
    let (d1, d2) = (first.dt(), second.dt());
    if (d1 - d2).abs() <= 1e-9 * d1.max(d2) {
        let mut samples = first.samples.clone();
        samples.extend(second.samples.iter().skip(1).cloned());
        return Ok(SampledPath {
            t0: first.t0,
            t1: second.t1,
            samples,
            sit: first.sit.min(second.sit),
            resampled: first.resampled || second.resampled,
        });
    }
    let h = d1.min(d2);
    let total = second.t1 - first.t0;
    let n = ((total / h) - 1e-9).ceil().max(1.0) as usize;
    let dt = total / n as f64;
    let samples: Vec<P> = (0..=n)
        .map(|i| {
            let t = first.t0 + dt * i as f64;
            if t <= first.t1 {
                first.at_time(t)
            } else {
                second.at_time(t)
            }
        })
        .collect();
    let mut out = SampledPath {
        t0: first.t0,
        t1: second.t1,
        samples,
        sit: 1,
        resampled: true,
    };
    let frozen = out.leading_frozen().min(out.trailing_frozen());
    out.sit = frozen.min(first.sit.min(second.sit)).min(n / 2).max(1);
    Ok(out)
}

/// Largest pointwise distance between two paths after normalizing their
/// start times, evaluated on the grid of the coarser path, plus the
/// difference of durations.
pub fn path_distance<P: PathPoint>(a: &SampledPath<P>, b: &SampledPath<P>) -> f64 {
    let (coarse, fine) = if a.n_steps() <= b.n_steps() {
        (a, b)
    } else {
        (b, a)
    };
    let mut worst = (a.duration() - b.duration()).abs();
    for (i, p) in coarse.samples.iter().enumerate() {
        let t = coarse.time(i) - coarse.t0 + fine.t0;
        worst = worst.max(p.distance(&fine.at_time(t)));
    }
    worst
}

impl SampledPath<BasePoint> {
    /// Tangent at sample `i` by central differences, one-sided at the ends.
    pub fn derivative(&self, i: usize) -> Result<BasePoint> {
        let n = self.n_steps();
        self.sample(i)?;
        let dt = self.dt();
        if n == 0 || dt == 0.0 {
            return Ok(DVector::zeros(self.samples[0].len()));
        }
        Ok(if i == 0 {
            (&self.samples[1] - &self.samples[0]) / dt
        } else if i == n {
            (&self.samples[n] - &self.samples[n - 1]) / dt
        } else {
            (&self.samples[i + 1] - &self.samples[i - 1]) / (2.0 * dt)
        })
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }
}

impl SampledPath<GroupElement> {
    /// Right-trivialized tangent `g'(t) g(t)^-1` at sample `i`, from
    /// `log(g_{i+1} g_{i-1}^-1) / 2dt`, one-sided at the ends.
    pub fn right_derivative(&self, i: usize) -> Result<AlgebraVec> {
        let n = self.n_steps();
        self.sample(i)?;
        let dt = self.dt();
        let s = &self.samples;
        if n == 0 || dt == 0.0 {
            return Ok(DVector::zeros(s[0].group().dim()));
        }
        let (a, b, span) = if i == 0 {
            (1, 0, dt)
        } else if i == n {
            (n, n - 1, dt)
        } else {
            (i + 1, i - 1, 2.0 * dt)
        };
        Ok(s[a].right_div(&s[b]).log()? / span)
    }
}

/// Analytic description of a test path in the base space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PathSpec {
    /// Constant path.
    Point { at: Vec<f64>, duration: f64 },
    /// Straight segment.
    Line {
        from: Vec<f64>,
        to: Vec<f64>,
        #[serde(default = "unit_duration")]
        duration: f64,
    },
    /// Circular arc in the plane spanned by coordinates `axes`.
    Arc {
        center: Vec<f64>,
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        #[serde(default = "default_axes")]
        axes: [usize; 2],
        #[serde(default = "unit_duration")]
        duration: f64,
    },
    /// Straight segments through the waypoints, sharing the duration equally.
    Polyline {
        points: Vec<Vec<f64>>,
        #[serde(default = "unit_duration")]
        duration: f64,
    },
    /// Parts traversed one after the other.
    Composite { parts: Vec<PathSpec> },
}

fn unit_duration() -> f64 {
    1.0
}

fn default_axes() -> [usize; 2] {
    [0, 1]
}

/// Smooth step from 0 to 1 on `[0, 1]`, flat to all orders at both ends.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let f = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let a = f(s);
    let b = f(1.0 - s);
    a / (a + b)
}

/// Primitive pieces of a spec with their durations.
enum Piece<'a> {
    Point(&'a [f64]),
    Line(&'a [f64], &'a [f64]),
    Arc {
        center: &'a [f64],
        radius: f64,
        a0: f64,
        a1: f64,
        axes: [usize; 2],
    },
}

impl Piece<'_> {
    fn eval(&self, s: f64) -> BasePoint {
        match self {
            Piece::Point(x) => DVector::from_column_slice(x),
            Piece::Line(a, b) => DVector::from_iterator(
                a.len(),
                a.iter().zip(b.iter()).map(|(x, y)| x + s * (y - x)),
            ),
            Piece::Arc {
                center,
                radius,
                a0,
                a1,
                axes,
            } => {
                let phi = a0 + s * (a1 - a0);
                let mut p = DVector::from_column_slice(center);
                p[axes[0]] += radius * phi.cos();
                p[axes[1]] += radius * phi.sin();
                p
            }
        }
    }
}

impl PathSpec {
    pub fn line(from: &[f64], to: &[f64], duration: f64) -> Self {
        PathSpec::Line {
            from: from.to_vec(),
            to: to.to_vec(),
            duration,
        }
    }

    pub fn arc(
        center: &[f64],
        radius: f64,
        start_angle: f64,
        end_angle: f64,
        duration: f64,
    ) -> Self {
        PathSpec::Arc {
            center: center.to_vec(),
            radius,
            start_angle,
            end_angle,
            axes: [0, 1],
            duration,
        }
    }

    pub fn point(at: &[f64], duration: f64) -> Self {
        PathSpec::Point {
            at: at.to_vec(),
            duration,
        }
    }

    /// This path followed by `next`.
    pub fn then(&self, next: &PathSpec) -> Self {
        let mut parts = match self {
            PathSpec::Composite { parts } => parts.clone(),
            other => vec![other.clone()],
        };
        match next {
            PathSpec::Composite { parts: more } => parts.extend(more.iter().cloned()),
            other => parts.push(other.clone()),
        }
        PathSpec::Composite { parts }
    }

    fn pieces(&self) -> Vec<(Piece<'_>, f64)> {
        match self {
            PathSpec::Point { at, duration } => vec![(Piece::Point(at), *duration)],
            PathSpec::Line { from, to, duration } => vec![(Piece::Line(from, to), *duration)],
            PathSpec::Arc {
                center,
                radius,
                start_angle,
                end_angle,
                axes,
                duration,
            } => vec![(
                Piece::Arc {
                    center,
                    radius: *radius,
                    a0: *start_angle,
                    a1: *end_angle,
                    axes: *axes,
                },
                *duration,
            )],
            PathSpec::Polyline { points, duration } => {
                let segs = points.len().saturating_sub(1).max(1);
                points
                    .windows(2)
                    .map(|w| (Piece::Line(&w[0], &w[1]), duration / segs as f64))
                    .collect()
            }
            PathSpec::Composite { parts } => parts.iter().flat_map(|p| p.pieces()).collect(),
        }
    }

    pub fn duration(&self) -> f64 {
        self.pieces().iter().map(|(_, d)| d).sum()
    }

    pub fn dim(&self) -> usize {
        self.start().len()
    }

    pub fn start(&self) -> BasePoint {
        self.pieces()
            .first()
            .map(|(p, _)| p.eval(0.0))
            .unwrap_or_else(|| DVector::zeros(0))
    }

    pub fn end(&self) -> BasePoint {
        self.pieces()
            .last()
            .map(|(p, _)| p.eval(1.0))
            .unwrap_or_else(|| DVector::zeros(0))
    }

    /// Checks dimensions, durations and that consecutive pieces join.
    pub fn validate(&self) -> Result<()> {
        let pieces = self.pieces();
        if pieces.is_empty() {
            return Err(Error::EmptyPath);
        }
        let dim = pieces[0].0.eval(0.0).len();
        for (k, (piece, d)) in pieces.iter().enumerate() {
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::InvalidPath(format!("piece {k} has duration {d}")));
            }
            match piece {
                Piece::Line(a, b) if a.len() != b.len() => {
                    return Err(Error::InvalidPath(format!("piece {k} mixes dimensions")));
                }
                Piece::Arc { center, axes, .. }
                    if axes.iter().any(|&a| a >= center.len()) || axes[0] == axes[1] =>
                {
                    return Err(Error::InvalidPath(format!("piece {k} has bad arc axes")));
                }
                _ => {}
            }
            if piece.eval(0.0).len() != dim {
                return Err(Error::InvalidPath(format!(
                    "piece {k} has the wrong dimension"
                )));
            }
            if k > 0 {
                let gap = (pieces[k - 1].0.eval(1.0) - piece.eval(0.0)).norm();
                if gap > JOIN_TOL {
                    return Err(Error::EndpointMismatch { mismatch: gap });
                }
            }
        }
        Ok(())
    }

    /// Samples the path with `n` steps on a uniform grid. Each piece is
    /// reparametrized to sit still on windows at both ends; a piece covering
    /// `m` grid steps sits for a fraction `max(0.02, max(2, m/50)/m)` of its
    /// duration, so the window is independent of `n` once `m >= 100`.
    pub fn sample(&self, n: usize) -> Result<BasePath> {
        self.validate()?;
        if n < 8 {
            return Err(Error::InvalidPath(format!("{n} steps is too coarse")));
        }
        let pieces = self.pieces();
        let total: f64 = pieces.iter().map(|(_, d)| d).sum();
        let dt = total / n as f64;
        let steps: Vec<usize> = pieces
            .iter()
            .map(|(_, d)| ((d / dt) + 1e-9).floor().max(1.0) as usize)
            .collect();
        let windows: Vec<f64> = steps
            .iter()
            .map(|&m| SIT_FRACTION.max(default_sit(m) as f64 / m as f64).min(0.45))
            .collect();
        let mut starts = Vec::with_capacity(pieces.len());
        let mut acc = 0.0;
        for (_, d) in &pieces {
            starts.push(acc);
            acc += d;
        }
        let eval = |t: f64| -> BasePoint {
            let mut k = pieces.len() - 1;
            for (j, s) in starts.iter().enumerate().skip(1) {
                if t < *s {
                    k = j - 1;
                    break;
                }
            }
            let (piece, d) = &pieces[k];
            let u = ((t - starts[k]) / d).clamp(0.0, 1.0);
            let w = windows[k];
            piece.eval(smooth_step((u - w) / (1.0 - 2.0 * w)))
        };
        let samples: Vec<BasePoint> = (0..=n).map(|i| eval(dt * i as f64)).collect();
        let sit = default_sit(steps[0])
            .min(default_sit(steps[steps.len() - 1]))
            .min(n / 2);
        SampledPath::new(0.0, total, samples, sit)
    }
}
