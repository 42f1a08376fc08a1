//! Static noise margin: half-cell transfer curves, unity-gain noise margins
//! and the maximum embedded square between the two butterfly curves.
//!
//! The butterfly lives in the `(x, y)` plane of one inverter's input and
//! output. The second inverter's curve is mirrored across `y = x`, which turns
//! it into `x = f2(y)`. Rotating by 45 degrees to `u = (x + y)/sqrt 2`,
//! `v = (y - x)/sqrt 2` makes both curves single-valued in `v`; inside a lobe
//! the largest axis-aligned square has its diagonal along `u`, so its side is
//! the largest `u`-gap divided by `sqrt 2`.

use std::f64::consts::SQRT_2;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{dc_sweep, SimConfig, SimError};
use crate::netlist::{Netlist, NetlistError, SourceSpec};
use crate::sram::{SramCellParams, NMOS_MODEL, PMOS_MODEL};

/// Default DC sweep step for transfer curves (V).
pub const VTC_STEP: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SnmError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("curve has no unity-gain point")]
    NoUnityGainPoint,
    #[error("supply sample {sample} V is outside (0, {vdd}] V")]
    InvalidSupplySample { sample: f64, vdd: f64 },
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("invalid cell parameters: {0}")]
    Params(String),
}

/// Sampled transfer curve with strictly increasing `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, SnmError> {
        if points.len() < 2 {
            return Err(SnmError::InvalidCurve("need at least 2 points".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(SnmError::InvalidCurve("values must be finite".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SnmError::InvalidCurve("x must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// Sample `f` on `n` evenly spaced points of `[x0, x1]`.
    pub fn from_fn(x0: f64, x1: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, SnmError> {
        let n = n.max(2);
        let step = (x1 - x0) / (n - 1) as f64;
        Self::new((0..n).map(|k| x0 + step * k as f64).map(|x| (x, f(x))).collect())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Linear interpolation, clamped to the end values.
    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if x <= p[0].0 {
            return p[0].1;
        }
        if x >= p[p.len() - 1].0 {
            return p[p.len() - 1].1;
        }
        let k = p.partition_point(|q| q.0 <= x);
        let (x0, y0) = p[k - 1];
        let (x1, y1) = p[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Both axes multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, SnmError> {
        Self::new(self.points.iter().map(|&(x, y)| (k * x, k * y)).collect())
    }

    fn is_non_increasing(&self, tol: f64) -> bool {
        self.points.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
    }
}

/// A transfer curve drawn mirrored across `y = x`: the point `(x, y)` of the
/// original becomes `(y, x)`. The original is kept because a mirrored step
/// has no single-valued `y(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MirroredCurve(pub Curve);

impl MirroredCurve {
    pub fn original(&self) -> &Curve {
        &self.0
    }

    /// Points in butterfly coordinates.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.0.points.iter().map(|&(x, y)| (y, x)).collect()
    }

    /// The `y` at which the mirrored curve passes through `x`, by inverse
    /// interpolation of the original. Flat stretches resolve to their
    /// midpoint; `x` outside the output range clamps to the nearest end.
    pub fn y_at(&self, x: f64) -> f64 {
        let p = &self.0.points;
        let mut lo: Option<f64> = None;
        let mut hi: Option<f64> = None;
        for w in p.windows(2) {
            let ((a0, b0), (a1, b1)) = (w[0], w[1]);
            let (bmin, bmax) = (b0.min(b1), b0.max(b1));
            if x < bmin || x > bmax {
                continue;
            }
            let a = if b1 == b0 {
                0.5 * (a0 + a1)
            } else {
                a0 + (a1 - a0) * (x - b0) / (b1 - b0)
            };
            lo = Some(lo.map_or(a, |v: f64| v.min(a)));
            hi = Some(hi.map_or(a, |v: f64| v.max(a)));
        }
        match (lo, hi) {
            (Some(l), Some(h)) => 0.5 * (l + h),
            _ => {
                let (first, last) = (p[0], p[p.len() - 1]);
                if (x - first.1).abs() <= (x - last.1).abs() {
                    first.0
                } else {
                    last.0
                }
            }
        }
    }
}

/// Noise margins from the unity-gain points of one transfer curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseMargins {
    pub v_oh: f64,
    pub v_ol: f64,
    pub v_ih: f64,
    pub v_il: f64,
    pub nm_h: f64,
    pub nm_l: f64,
}

/// Locate the slope = -1 points by centered differences and linear
/// interpolation. The first crossing is `v_il`, the last is `v_ih`.
pub fn noise_margins(c: &Curve) -> Result<NoiseMargins, SnmError> {
    let p = c.points();
    let n = p.len();
    if n < 3 {
        return Err(SnmError::NoUnityGainPoint);
    }
    let slope = |k: usize| {
        let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
        (p[b].1 - p[a].1) / (p[b].0 - p[a].0)
    };
    // g > 0 where the curve is flatter than unity gain.
    let g: Vec<f64> = (0..n).map(|k| slope(k) + 1.0).collect();
    let mut crossings = Vec::new();
    for k in 0..n - 1 {
        let (g0, g1) = (g[k], g[k + 1]);
        if (g0 > 0.0) != (g1 > 0.0) {
            let frac = g0 / (g0 - g1);
            crossings.push(p[k].0 + frac * (p[k + 1].0 - p[k].0));
        }
    }
    if crossings.len() < 2 {
        return Err(SnmError::NoUnityGainPoint);
    }
    let v_il = crossings[0];
    let v_ih = crossings[crossings.len() - 1];
    let v_oh = c.eval(v_il);
    let v_ol = c.eval(v_ih);
    Ok(NoiseMargins {
        v_oh,
        v_ol,
        v_ih,
        v_il,
        nm_h: v_oh - v_ih,
        nm_l: v_il - v_ol,
    })
}

/// Axis-aligned square given by its lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Square {
    pub x: f64,
    pub y: f64,
    pub side: f64,
}

/// Why a butterfly produced no margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SnmDiagnostic {
    /// The curves do not enclose two lobes (fewer than two intersections, or
    /// a curve that is not monotone in the rotated frame).
    DegenerateLobes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnmResult {
    /// First inverter, `y = f1(x)`.
    pub curve_fwd: Curve,
    /// Second inverter, drawn mirrored.
    pub curve_mir: MirroredCurve,
    /// Square side in the upper-left lobe, where `curve_fwd` is the outer boundary (V).
    pub snm_lobe_high: f64,
    /// Square side in the lower-right lobe (V).
    pub snm_lobe_low: f64,
    /// `min(snm_lobe_high, snm_lobe_low)` (V).
    pub snm: f64,
    pub square_high: Option<Square>,
    pub square_low: Option<Square>,
    pub diagnostic: Option<SnmDiagnostic>,
}

/// A curve in rotated coordinates, sorted by `v` ascending.
struct Rotated {
    v: Vec<f64>,
    u: Vec<f64>,
}

impl Rotated {
    fn new(points: impl Iterator<Item = (f64, f64)>) -> Option<Self> {
        let mut pts: Vec<(f64, f64)> = points.map(|(x, y)| ((y - x) / SQRT_2, (x + y) / SQRT_2)).collect();
        if pts.first()?.0 > pts.last()?.0 {
            pts.reverse();
        }
        if pts.windows(2).any(|w| w[1].0 <= w[0].0) {
            return None;
        }
        Some(Self {
            v: pts.iter().map(|p| p.0).collect(),
            u: pts.iter().map(|p| p.1).collect(),
        })
    }

    fn u_at(&self, v: f64) -> f64 {
        let k = self.v.partition_point(|&q| q <= v).clamp(1, self.v.len() - 1);
        let (v0, v1) = (self.v[k - 1], self.v[k]);
        self.u[k - 1] + (self.u[k] - self.u[k - 1]) * (v - v0) / (v1 - v0)
    }
}

fn to_xy(u: f64, v: f64) -> (f64, f64) {
    ((u - v) / SQRT_2, (u + v) / SQRT_2)
}

/// Maximum-square SNM of a butterfly formed by `c1` and the mirrored `c2`.
///
/// Degenerate butterflies (no enclosed lobe on one side, or curves that
/// cannot be parametrized in the rotated frame) give `snm = 0` with a
/// diagnostic instead of an error.
pub fn max_square_snm(c1: &Curve, c2: &MirroredCurve) -> SnmResult {
    let degenerate = || SnmResult {
        curve_fwd: c1.clone(),
        curve_mir: c2.clone(),
        snm_lobe_high: 0.0,
        snm_lobe_low: 0.0,
        snm: 0.0,
        square_high: None,
        square_low: None,
        diagnostic: Some(SnmDiagnostic::DegenerateLobes),
    };
    let (Some(r1), Some(r2)) = (
        Rotated::new(c1.points().iter().copied()),
        Rotated::new(c2.points().into_iter()),
    ) else {
        return degenerate();
    };
    let lo = r1.v[0].max(r2.v[0]);
    let hi = r1.v[r1.v.len() - 1].min(r2.v[r2.v.len() - 1]);
    if hi <= lo {
        return degenerate();
    }
    let mut grid: Vec<f64> =
        r1.v.iter()
            .chain(&r2.v)
            .copied()
            .filter(|&v| v >= lo && v <= hi)
            .collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    // Largest gap on each side, with the v at which it occurs.
    let mut best_high: Option<(f64, f64)> = None;
    let mut best_low: Option<(f64, f64)> = None;
    for &v in &grid {
        let d = r1.u_at(v) - r2.u_at(v);
        if d > 0.0 && best_high.is_none_or(|(b, _)| d > b) {
            best_high = Some((d, v));
        }
        if d < 0.0 && best_low.is_none_or(|(b, _)| -d > b) {
            best_low = Some((-d, v));
        }
    }
    let (Some((dh, vh)), Some((dl, vl))) = (best_high, best_low) else {
        return degenerate();
    };
    // Inner curve supplies the lower-left corner.
    let square = |inner: &Rotated, d: f64, v: f64| {
        let (x, y) = to_xy(inner.u_at(v), v);
        Square { x, y, side: d / SQRT_2 }
    };
    let high = square(&r2, dh, vh);
    let low = square(&r1, dl, vl);
    SnmResult {
        curve_fwd: c1.clone(),
        curve_mir: c2.clone(),
        snm_lobe_high: high.side,
        snm_lobe_low: low.side,
        snm: high.side.min(low.side),
        square_high: Some(high),
        square_low: Some(low),
        diagnostic: None,
    }
}

/// Exhaustive search for the largest axis-aligned squares between `c1` and
/// the mirrored `c2`, with corners and sides on a `grid`-spaced lattice.
///
/// Returns `(high lobe side, low lobe side)`. Slow; it exists to validate
/// [`max_square_snm`].
pub fn grid_search_snm(c1: &Curve, c2: &MirroredCurve, grid: f64) -> (f64, f64) {
    let f1 = |x: f64| c1.eval(x);
    let f2 = |y: f64| c2.original().eval(y);
    let xs: Vec<f64> = c1
        .points()
        .iter()
        .map(|p| p.0)
        .chain(c2.original().points().iter().map(|p| p.1))
        .collect();
    let ys: Vec<f64> = c1
        .points()
        .iter()
        .map(|p| p.1)
        .chain(c2.original().points().iter().map(|p| p.0))
        .collect();
    let bounds = |v: &[f64]| {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
    };
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let nx = ((x1 - x0) / grid).floor() as usize + 1;
    let ny = ((y1 - y0) / grid).floor() as usize + 1;

    // Upper-left lobe: below c1 and right of the mirrored c2.
    let in_high = |x: f64, y: f64| y <= f1(x) && x >= f2(y);
    // Lower-right lobe: above c1 and left of the mirrored c2.
    let in_low = |x: f64, y: f64| y >= f1(x) && x <= f2(y);
    let fits = |inside: &dyn Fn(f64, f64) -> bool, x: f64, y: f64, s: f64| {
        inside(x, y) && inside(x + s, y) && inside(x, y + s) && inside(x + s, y + s)
    };

    let search = |inside: &dyn Fn(f64, f64) -> bool| {
        let mut best = 0usize;
        for i in 0..nx {
            let x = x0 + grid * i as f64;
            for j in 0..ny {
                let y = y0 + grid * j as f64;
                if !inside(x, y) {
                    continue;
                }
                while fits(inside, x, y, grid * (best + 1) as f64) {
                    best += 1;
                }
            }
        }
        grid * best as f64
    };
    (search(&in_high), search(&in_low))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SnmMode {
    /// WL low, bitlines at the supply.
    Hold,
    /// WL and bitlines at the supply.
    Read,
}

impl std::str::FromStr for SnmMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hold" => Ok(SnmMode::Hold),
            "read" => Ok(SnmMode::Read),
            other => Err(format!("unknown SNM mode '{other}'")),
        }
    }
}

/// Which half of the cell: the inverter driving node A (input B) or node B (input A).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

/// One inverter of the cell with its access device, the loop broken at the
/// inverter input. Every supply-side terminal sits at `supply`.
fn half_cell(p: &SramCellParams, mode: SnmMode, side: Side, supply: f64) -> Result<Netlist, SnmError> {
    p.validate().map_err(|e| SnmError::Params(e.to_string()))?;
    let (out, bl) = match side {
        Side::A => ("A", "BL"),
        Side::B => ("B", "BLB"),
    };
    let mut n = Netlist::new(format!("half cell {out}"));
    n.add_model(NMOS_MODEL, p.nmos.clone())?;
    n.add_model(PMOS_MODEL, p.pmos.clone())?;
    let l = p.length;
    n.add_mosfet("MP", out, "IN", "VDD", "VDD", PMOS_MODEL, p.load_wl * l, l)?;
    n.add_mosfet("MN", out, "IN", "0", "0", NMOS_MODEL, p.driver_wl * l, l)?;
    n.add_mosfet("MA", bl, "WL", out, "0", NMOS_MODEL, p.access_wl * l, l)?;
    n.add_vsource("VRAIL", "VDD", "0", SourceSpec::Dc(supply))?;
    let wl = match mode {
        SnmMode::Hold => 0.0,
        SnmMode::Read => supply,
    };
    n.add_vsource("VWL", "WL", "0", SourceSpec::Dc(wl))?;
    n.add_vsource("VBL", bl, "0", SourceSpec::Dc(supply))?;
    n.add_vsource("VIN", "IN", "0", SourceSpec::Dc(0.0))?;
    Ok(n)
}

fn sweep_curve(
    n: &Netlist,
    node: &str,
    from: f64,
    to: f64,
    step: f64,
    cfg: &SimConfig,
) -> Result<Vec<(f64, f64)>, SnmError> {
    let sw = dc_sweep(n, "VIN", from, to, step, cfg)?;
    let mut pts = sw
        .node_curve(node)
        .ok_or_else(|| SnmError::InvalidCurve(format!("no node {node}")))?;
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

/// Transfer curve of one half cell at supply level `supply`, swept upward in `step` increments.
pub fn half_cell_vtc_at(
    p: &SramCellParams,
    mode: SnmMode,
    side: Side,
    supply: f64,
    step: f64,
    cfg: &SimConfig,
) -> Result<Curve, SnmError> {
    let n = half_cell(p, mode, side, supply)?;
    let out = match side {
        Side::A => "A",
        Side::B => "B",
    };
    let mut pts = sweep_curve(&n, out, 0.0, supply, step, cfg)?;
    if pts.last().is_some_and(|&(x, _)| supply - x > 1e-12 * supply) {
        let tail = sweep_curve(&n, out, supply, supply, 1.0, cfg)?;
        pts.extend(tail);
    }
    Curve::new(pts)
}

/// Same as [`half_cell_vtc_at`] but swept from `supply` down to 0.
pub fn half_cell_vtc_reverse(
    p: &SramCellParams,
    mode: SnmMode,
    side: Side,
    supply: f64,
    step: f64,
    cfg: &SimConfig,
) -> Result<Curve, SnmError> {
    let n = half_cell(p, mode, side, supply)?;
    let out = match side {
        Side::A => "A",
        Side::B => "B",
    };
    Curve::new(sweep_curve(&n, out, supply, 0.0, -step, cfg)?)
}

/// Transfer curve of one half cell at the nominal supply with the default step.
pub fn half_cell_vtc(p: &SramCellParams, mode: SnmMode, side: Side, cfg: &SimConfig) -> Result<Curve, SnmError> {
    half_cell_vtc_at(p, mode, side, p.vdd, VTC_STEP, cfg)
}

/// Result of one SNM experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnmExperiment {
    pub mode: SnmMode,
    /// Supply level the curves were evaluated at (V).
    pub supply_sample: f64,
    pub result: SnmResult,
    pub margins_fwd: Option<NoiseMargins>,
    pub margins_mir: Option<NoiseMargins>,
}

/// Butterfly of the cell at a sampled supply level.
///
/// Curve 1 is the A-side inverter (`x = v(B)`, `y = v(A)`); curve 2 is the
/// B-side inverter, mirrored into the same plane.
pub fn snm_experiment(
    p: &SramCellParams,
    mode: SnmMode,
    supply_sample: f64,
    cfg: &SimConfig,
) -> Result<SnmExperiment, SnmError> {
    if !(supply_sample > 0.0 && supply_sample <= p.vdd * (1.0 + 1e-12)) {
        return Err(SnmError::InvalidSupplySample {
            sample: supply_sample,
            vdd: p.vdd,
        });
    }
    let (c1, c2) = rayon::join(
        || half_cell_vtc_at(p, mode, Side::A, supply_sample, VTC_STEP, cfg),
        || half_cell_vtc_at(p, mode, Side::B, supply_sample, VTC_STEP, cfg),
    );
    let (c1, c2) = (c1?, c2?);
    let margins_fwd = noise_margins(&c1).ok();
    let margins_mir = noise_margins(&c2).ok();
    Ok(SnmExperiment {
        mode,
        supply_sample,
        result: max_square_snm(&c1, &MirroredCurve(c2)),
        margins_fwd,
        margins_mir,
    })
}

/// Butterfly rows `(x, y_curve1, y_curve2_mirrored)` on curve 1's x grid.
pub fn butterfly_rows(r: &SnmResult) -> Vec<[f64; 3]> {
    r.curve_fwd
        .points()
        .iter()
        .map(|&(x, y)| [x, y, r.curve_mir.y_at(x)])
        .collect()
}

/// Monotone non-increasing within `tol`.
pub fn is_vtc(c: &Curve, tol: f64) -> bool {
    c.is_non_increasing(tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(vdd: f64, trip: f64) -> Curve {
        Curve::from_fn(0.0, vdd, 361, |x| {
            if x < trip {
                vdd
            } else if x > trip {
                0.0
            } else {
                vdd / 2.0
            }
        })
        .unwrap()
    }

    #[test]
    fn curve_invariants() {
        assert!(Curve::new(vec![(0.0, 1.0)]).is_err());
        assert!(Curve::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(Curve::new(vec![(0.0, f64::NAN), (1.0, 2.0)]).is_err());
        let c = Curve::new(vec![(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!(c.eval(0.25), 0.5);
        assert_eq!(c.eval(-1.0), 0.0);
    }

    #[test]
    fn ideal_step_butterfly() {
        let c = step(1.8, 0.9);
        let r = max_square_snm(&c, &MirroredCurve(c.clone()));
        assert!(r.diagnostic.is_none());
        // The sampled step has a 5 mV transition, so allow one grid step.
        assert!((r.snm - 0.9).abs() <= 5e-3 + 1e-9, "{}", r.snm);
        assert!((r.snm_lobe_high - r.snm_lobe_low).abs() < 1e-9);
        let sq = r.square_high.unwrap();
        assert!(sq.x.abs() < 1e-9 && (sq.y - 0.9).abs() <= 5e-3 + 1e-9, "{sq:?}");
        let sq = r.square_low.unwrap();
        assert!((sq.x - 0.9).abs() <= 5e-3 + 1e-9 && sq.y.abs() < 1e-9, "{sq:?}");
    }

    #[test]
    fn identity_line_is_degenerate() {
        let c = Curve::from_fn(0.0, 1.8, 50, |x| x).unwrap();
        let r = max_square_snm(&c, &MirroredCurve(c.clone()));
        assert_eq!(r.snm, 0.0);
        assert_eq!(r.diagnostic, Some(SnmDiagnostic::DegenerateLobes));
        assert_eq!(noise_margins(&c), Err(SnmError::NoUnityGainPoint));
    }

    #[test]
    fn step_noise_margins() {
        let c = step(1.8, 0.9);
        let m = noise_margins(&c).unwrap();
        assert!((m.v_il - 0.9).abs() < 0.01 && (m.v_ih - 0.9).abs() < 0.01, "{m:?}");
        assert!((m.nm_h - 0.9).abs() < 0.01 && (m.nm_l - 0.9).abs() < 0.01, "{m:?}");
        assert_eq!(m.nm_h, m.v_oh - m.v_ih);
        assert_eq!(m.nm_l, m.v_il - m.v_ol);
    }

    #[test]
    fn mirrored_inverse_lookup() {
        let c = Curve::from_fn(0.0, 1.8, 181, |x| 1.8 - x).unwrap();
        let m = MirroredCurve(c);
        assert!((m.y_at(0.3) - 1.5).abs() < 1e-12);
        let s = MirroredCurve(step(1.8, 0.9));
        assert!((s.y_at(0.9) - 0.9).abs() < 0.01);
    }

    #[test]
    fn grid_search_agrees_on_smooth_curves() {
        let f = |g: f64| move |x: f64| 1.8 / (1.0 + ((x - 0.9) * g).exp());
        let c1 = Curve::from_fn(0.0, 1.8, 361, f(12.0)).unwrap();
        let c2 = Curve::from_fn(0.0, 1.8, 361, f(8.0)).unwrap();
        let r = max_square_snm(&c1, &MirroredCurve(c2.clone()));
        let (h, l) = grid_search_snm(&c1, &MirroredCurve(c2), 5e-3);
        assert!((r.snm_lobe_high - h).abs() <= 0.01, "{} vs {h}", r.snm_lobe_high);
        assert!((r.snm_lobe_low - l).abs() <= 0.01, "{} vs {l}", r.snm_lobe_low);
    }
}
