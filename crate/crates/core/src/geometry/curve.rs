use std::f64::consts::{PI, TAU};

use crate::error::{Result, VemError};

/// A planar boundary curve parameterized over `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    /// `γ(t) = center + radius (cos θ, sin θ)` with `θ = angle0 + t (angle1 - angle0)`.
    Arc {
        center: [f64; 2],
        radius: f64,
        angle0: f64,
        angle1: f64,
    },
    /// Piecewise-linear curve through the sample points, uniform in `t` per segment.
    Polyline { points: Vec<[f64; 2]> },
}

/// Largest angle spanned by one composite quadrature piece on an arc.
const ARC_PIECE: f64 = PI / 8.0;

impl Curve {
    pub fn arc(center: [f64; 2], radius: f64, angle0: f64, angle1: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(VemError::InvalidCurve(format!("radius {radius} must be positive")));
        }
        let span = (angle1 - angle0).abs();
        if span == 0.0 || !span.is_finite() {
            return Err(VemError::InvalidCurve("arc with zero angular span".into()));
        }
        if span > TAU * (1.0 + 1e-14) {
            return Err(VemError::InvalidCurve(format!(
                "arc spans {span} rad, more than a full turn"
            )));
        }
        Ok(Curve::Arc {
            center,
            radius,
            angle0,
            angle1,
        })
    }

    pub fn polyline(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(VemError::InvalidCurve("polyline needs at least two points".into()));
        }
        for w in points.windows(2) {
            if w[0] == w[1] {
                return Err(VemError::InvalidCurve("polyline with repeated point".into()));
            }
        }
        Ok(Curve::Polyline { points })
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        match self {
            Curve::Arc {
                center,
                radius,
                angle0,
                angle1,
            } => {
                let th = angle0 + t * (angle1 - angle0);
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
            Curve::Polyline { points } => {
                let (i, s) = self.segment_of(t);
                let (a, b) = (points[i], points[i + 1]);
                [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
            }
        }
    }

    /// `dγ/dt`.
    pub fn deriv(&self, t: f64) -> [f64; 2] {
        match self {
            Curve::Arc {
                radius,
                angle0,
                angle1,
                ..
            } => {
                let dth = angle1 - angle0;
                let th = angle0 + t * dth;
                [-radius * th.sin() * dth, radius * th.cos() * dth]
            }
            Curve::Polyline { points } => {
                let m = (points.len() - 1) as f64;
                let (i, _) = self.segment_of(t);
                let (a, b) = (points[i], points[i + 1]);
                [(b[0] - a[0]) * m, (b[1] - a[1]) * m]
            }
        }
    }

    fn segment_of(&self, t: f64) -> (usize, f64) {
        let Curve::Polyline { points } = self else {
            unreachable!()
        };
        let m = points.len() - 1;
        let x = (t * m as f64).clamp(0.0, m as f64);
        let i = (x.floor() as usize).min(m - 1);
        (i, x - i as f64)
    }

    pub fn start(&self) -> [f64; 2] {
        self.eval(0.0)
    }

    pub fn end(&self) -> [f64; 2] {
        self.eval(1.0)
    }

    /// Length scale used for endpoint tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            Curve::Arc { radius, .. } => *radius,
            Curve::Polyline { points } => {
                let pts: Vec<_> = points.iter().map(|p| super::p2(*p)).collect();
                super::diameter(&pts)
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Curve::Arc { angle0, angle1, .. } => ((angle1 - angle0).abs() - TAU).abs() < 1e-12,
            Curve::Polyline { points } => points.first() == points.last(),
        }
    }

    /// Parameter subintervals on which composite Gauss rules are applied.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        let m = match self {
            Curve::Arc { angle0, angle1, .. } => {
                ((angle1 - angle0).abs() / ARC_PIECE).ceil().max(1.0) as usize
            }
            Curve::Polyline { points } => points.len() - 1,
        };
        (0..m)
            .map(|i| (i as f64 / m as f64, (i + 1) as f64 / m as f64))
            .collect()
    }

    /// Restriction of the curve to `[t0, t1]`, reparameterized over `[0, 1]`.
    pub fn sub_curve(&self, t0: f64, t1: f64) -> Result<Curve> {
        match self {
            Curve::Arc {
                center,
                radius,
                angle0,
                angle1,
            } => {
                let d = angle1 - angle0;
                Curve::arc(*center, *radius, angle0 + t0 * d, angle0 + t1 * d)
            }
            Curve::Polyline { .. } => {
                let mut pts = vec![self.eval(t0)];
                let Curve::Polyline { points } = self else {
                    unreachable!()
                };
                let m = (points.len() - 1) as f64;
                for (i, p) in points.iter().enumerate() {
                    let ti = i as f64 / m;
                    if ti > t0 && ti < t1 {
                        pts.push(*p);
                    }
                }
                pts.push(self.eval(t1));
                Curve::polyline(pts)
            }
        }
    }

    /// Closest curve parameter to `x` (radial projection for arcs).
    pub fn project(&self, x: [f64; 2]) -> f64 {
        match self {
            Curve::Arc {
                center,
                angle0,
                angle1,
                ..
            } => {
                let th = (x[1] - center[1]).atan2(x[0] - center[0]);
                let d = angle1 - angle0;
                // candidate unwrappings of θ closest to the arc's interval
                let mut best = (f64::INFINITY, 0.0);
                for k in -2..=2 {
                    let t = (th + k as f64 * TAU - angle0) / d;
                    let tc = t.clamp(0.0, 1.0);
                    let dev = (t - tc).abs();
                    if dev < best.0 {
                        best = (dev, tc);
                    }
                }
                best.1
            }
            Curve::Polyline { points } => {
                let m = points.len() - 1;
                let mut best = (f64::INFINITY, 0.0);
                for i in 0..m {
                    let (a, b) = (points[i], points[i + 1]);
                    let ab = [b[0] - a[0], b[1] - a[1]];
                    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
                    let s = (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / l2).clamp(0.0, 1.0);
                    let q = [a[0] + s * ab[0], a[1] + s * ab[1]];
                    let d = (q[0] - x[0]).hypot(q[1] - x[1]);
                    if d < best.0 {
                        best = (d, (i as f64 + s) / m as f64);
                    }
                }
                best.1
            }
        }
    }

    /// Unit normal at parameter `t`, pointing to the right of the direction of travel.
    pub fn right_normal(&self, t: f64) -> [f64; 2] {
        let d = self.deriv(t);
        let l = d[0].hypot(d[1]);
        [d[1] / l, -d[0] / l]
    }
}

/// A curve attached to a polygon edge, possibly traversed backwards.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedCurve {
    pub curve: Curve,
    pub reversed: bool,
}

impl OrientedCurve {
    pub fn eval(&self, t: f64) -> [f64; 2] {
        if self.reversed {
            self.curve.eval(1.0 - t)
        } else {
            self.curve.eval(t)
        }
    }

    pub fn deriv(&self, t: f64) -> [f64; 2] {
        if self.reversed {
            let d = self.curve.deriv(1.0 - t);
            [-d[0], -d[1]]
        } else {
            self.curve.deriv(t)
        }
    }

    pub fn pieces(&self) -> Vec<(f64, f64)> {
        self.curve.pieces()
    }

    /// Orients `curve` so that it runs from `a` to `b`; fails when the
    /// endpoints do not match the curve within `1e-12` of its scale.
    pub fn attach(curve: &Curve, a: [f64; 2], b: [f64; 2]) -> Result<Self> {
        let tol = 1e-12 * curve.scale().max(1.0);
        let close = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).hypot(p[1] - q[1]) <= tol;
        let (s, e) = (curve.start(), curve.end());
        if close(s, a) && close(e, b) {
            Ok(OrientedCurve {
                curve: curve.clone(),
                reversed: false,
            })
        } else if close(s, b) && close(e, a) {
            Ok(OrientedCurve {
                curve: curve.clone(),
                reversed: true,
            })
        } else {
            Err(VemError::InvalidCurve(format!(
                "curve endpoints {s:?}, {e:?} do not match edge {a:?} -> {b:?}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_validation() {
        assert!(Curve::arc([0.0, 0.0], 0.0, 0.0, 1.0).is_err());
        assert!(Curve::arc([0.0, 0.0], 1.0, 1.0, 1.0).is_err());
        assert!(Curve::arc([0.0, 0.0], 1.0, 0.0, 7.0).is_err());
        assert!(Curve::arc([0.0, 0.0], 1.0, 0.0, TAU).unwrap().is_closed());
    }

    #[test]
    fn arc_derivative_matches_finite_difference() {
        let c = Curve::arc([0.3, -0.2], 2.0, 0.4, 1.9).unwrap();
        let t = 0.37;
        let h = 1e-6;
        let (a, b) = (c.eval(t + h), c.eval(t - h));
        let d = c.deriv(t);
        assert!(((a[0] - b[0]) / (2.0 * h) - d[0]).abs() < 1e-7);
        assert!(((a[1] - b[1]) / (2.0 * h) - d[1]).abs() < 1e-7);
    }

    #[test]
    fn projection_onto_arc() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        let t = c.project([0.5, 0.5]);
        assert!((t - 0.5).abs() < 1e-14);
        let c2 = Curve::arc([0.0, 0.0], 1.0, PI / 2.0, 0.0).unwrap();
        assert!((c2.project([2.0, 0.0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn attach_detects_orientation() {
        let c = Curve::arc([0.0, 0.0], 1.0, 0.0, PI / 2.0).unwrap();
        let oc = OrientedCurve::attach(&c, [0.0, 1.0], [1.0, 0.0]).unwrap();
        assert!(oc.reversed);
        let p = oc.eval(0.0);
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        assert!(OrientedCurve::attach(&c, [0.0, 1.0], [0.9, 0.0]).is_err());
    }
}
