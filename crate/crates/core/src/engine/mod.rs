//! Modified nodal analysis: operating point, DC sweep and fixed-step transient.
//!
//! Every node carries `gmin` to ground, so floating gates never make the
//! system singular. Voltage sources are branch equations, which gives exact
//! source currents for energy metering.

mod mna;
mod waveform;

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::netlist::{Netlist, NetlistError};
use mna::{Circuit, Drive, NewtonError};

pub(crate) use waveform::interpolate as waveform_interpolate;
pub use waveform::{SignalKind, Waveform};

/// Conductance of the temporary initializers used by preloaded solves (1 GOhm).
pub const PRELOAD_CONDUCTANCE: f64 = 1e-9;

/// Deepest step halving tried when a transient step fails to converge.
const MAX_STEP_SPLITS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Integrator {
    Trapezoidal,
    BackwardEuler,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub reltol: f64,
    /// Absolute voltage tolerance (V).
    pub vntol: f64,
    /// Absolute current tolerance (A).
    pub abstol: f64,
    /// Conductance from every node to ground (S).
    pub gmin: f64,
    pub max_newton_iters: usize,
    pub source_steps: usize,
    pub integrator: Integrator,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            reltol: 1e-3,
            vntol: 1e-6,
            abstol: 1e-12,
            gmin: 1e-12,
            max_newton_iters: 100,
            source_steps: 10,
            integrator: Integrator::Trapezoidal,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let tols = [self.reltol, self.vntol, self.abstol, self.gmin];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(SimError::Invalid("tolerances and gmin must be > 0".into()));
        }
        if self.max_newton_iters < 1 || self.source_steps < 1 {
            return Err(SimError::Invalid(
                "max_newton_iters and source_steps must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no convergence after {iterations} iterations (worst: {worst}){}", context(*time, *sweep))]
    NonConvergence {
        iterations: usize,
        worst: String,
        time: Option<f64>,
        sweep: Option<f64>,
    },
    #[error("singular matrix at unknown {unknown}")]
    SingularMatrix { unknown: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("unknown source '{0}'")]
    UnknownSource(String),
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("invalid analysis: {0}")]
    Invalid(String),
}

fn context(time: Option<f64>, sweep: Option<f64>) -> String {
    match (time, sweep) {
        (Some(t), _) => format!(" at t={t:e}s"),
        (None, Some(v)) => format!(" at sweep value {v:e}V"),
        _ => String::new(),
    }
}

/// One converged DC point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub node_names: Vec<String>,
    /// Indexed like the netlist node table; entry 0 is ground.
    pub node_voltages: Vec<f64>,
    pub source_names: Vec<String>,
    /// SPICE convention: positive into the positive terminal.
    pub source_currents: Vec<f64>,
}

impl Solution {
    pub fn voltage(&self, node: &str) -> Option<f64> {
        let node = if node.eq_ignore_ascii_case("gnd") { "0" } else { node };
        self.node_names
            .iter()
            .position(|n| n == node)
            .map(|i| self.node_voltages[i])
    }

    pub fn source_current(&self, source: &str) -> Option<f64> {
        self.source_names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(source))
            .map(|i| self.source_currents[i])
    }

    fn from_vector(c: &Circuit, x: &DVector<f64>) -> Self {
        let nodes = c.node_names.len();
        Self {
            node_names: c.node_names.clone(),
            node_voltages: (0..nodes).map(|n| Circuit::voltage(x, n)).collect(),
            source_names: c.sources.iter().map(|s| s.name.clone()).collect(),
            source_currents: (0..c.sources.len()).map(|k| x[c.branch_index(k)]).collect(),
        }
    }

    fn to_vector(&self, c: &Circuit) -> Result<DVector<f64>, SimError> {
        let mut x = DVector::zeros(c.size());
        for (i, name) in c.node_names.iter().enumerate().skip(1) {
            x[i - 1] = self.voltage(name).ok_or_else(|| SimError::UnknownNode(name.clone()))?;
        }
        for (k, s) in c.sources.iter().enumerate() {
            x[c.branch_index(k)] = self.source_current(&s.name).unwrap_or(0.0);
        }
        Ok(x)
    }
}

fn newton_error(c: &Circuit, e: NewtonError, time: Option<f64>, sweep: Option<f64>) -> SimError {
    match e {
        NewtonError::NoConvergence { iterations, worst } => SimError::NonConvergence {
            iterations,
            worst: c.unknown_name(worst),
            time,
            sweep,
        },
        NewtonError::Singular { unknown } => SimError::SingularMatrix {
            unknown: c.unknown_name(unknown),
        },
    }
}

fn prepare(n: &Netlist, cfg: &SimConfig) -> Result<Circuit, SimError> {
    cfg.validate()?;
    Circuit::compile(n, cfg)
}

/// DC operating point at t = 0 with capacitors open.
pub fn dc_operating_point(n: &Netlist, cfg: &SimConfig) -> Result<Solution, SimError> {
    let c = prepare(n, cfg)?;
    let x0 = DVector::zeros(c.size());
    let x = c
        .solve_dc(&x0, &Drive::at(0.0), cfg)
        .map_err(|e| newton_error(&c, e, None, None))?;
    Ok(Solution::from_vector(&c, &x))
}

/// Operating point steered into a chosen basin: solve once with the listed
/// nodes pulled toward their preload values through 1 GOhm initializers,
/// then release the pulls and re-solve from that point.
pub fn dc_operating_point_preloaded(
    n: &Netlist,
    cfg: &SimConfig,
    preload: &[(&str, f64)],
) -> Result<Solution, SimError> {
    let c = prepare(n, cfg)?;
    let mut x0 = DVector::zeros(c.size());
    let mut forces = Vec::with_capacity(preload.len());
    for &(name, volts) in preload {
        let node = n
            .find_node(name)
            .ok_or_else(|| SimError::UnknownNode(name.to_string()))?;
        if !node.is_ground() {
            x0[node.0 - 1] = volts;
            forces.push((node.0, volts, PRELOAD_CONDUCTANCE));
        }
    }
    let forced = Drive {
        forces: &forces,
        ..Drive::at(0.0)
    };
    let x = c
        .solve_dc(&x0, &forced, cfg)
        .map_err(|e| newton_error(&c, e, None, None))?;
    let x = c
        .solve_dc(&x, &Drive::at(0.0), cfg)
        .map_err(|e| newton_error(&c, e, None, None))?;
    Ok(Solution::from_vector(&c, &x))
}

/// KCL residual per node (A) for a DC solution, ground excluded.
pub fn kcl_residual(n: &Netlist, cfg: &SimConfig, sol: &Solution) -> Result<Vec<f64>, SimError> {
    let c = prepare(n, cfg)?;
    let x = sol.to_vector(&c)?;
    let (g, b) = c.assemble(&x, &Drive::at(0.0));
    let r = g * &x - b;
    Ok(r.iter().take(c.node_names.len() - 1).copied().collect())
}

/// Ordered results of a DC sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcSweep {
    pub source: String,
    pub values: Vec<f64>,
    pub solutions: Vec<Solution>,
}

impl DcSweep {
    /// `(swept value, node voltage)` pairs in sweep order.
    pub fn node_curve(&self, node: &str) -> Option<Vec<(f64, f64)>> {
        self.values
            .iter()
            .zip(&self.solutions)
            .map(|(&x, s)| s.voltage(node).map(|y| (x, y)))
            .collect()
    }
}

/// Sweep points from `start` to `stop` inclusive (when aligned) by `step`.
pub fn sweep_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SimError> {
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step == 0.0 {
        return Err(SimError::Invalid("sweep step must be finite and non-zero".into()));
    }
    if stop != start && (stop - start).signum() != step.signum() {
        return Err(SimError::Invalid("sweep step sign does not match stop - start".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

/// Sweep a voltage source's DC value, using each solution as the next guess.
pub fn dc_sweep(
    n: &Netlist,
    source: &str,
    start: f64,
    stop: f64,
    step: f64,
    cfg: &SimConfig,
) -> Result<DcSweep, SimError> {
    let values = sweep_points(start, stop, step)?;
    let c = prepare(n, cfg)?;
    let k = c
        .source_index(source)
        .ok_or_else(|| SimError::UnknownSource(source.to_string()))?;
    let mut x = DVector::zeros(c.size());
    let mut solutions = Vec::with_capacity(values.len());
    for &v in &values {
        let drive = Drive {
            source_override: Some((k, v)),
            ..Drive::at(0.0)
        };
        x = c
            .solve_dc(&x, &drive, cfg)
            .map_err(|e| newton_error(&c, e, None, Some(v)))?;
        solutions.push(Solution::from_vector(&c, &x));
    }
    Ok(DcSweep {
        source: c.sources[k].name.clone(),
        values,
        solutions,
    })
}

fn step_count(dt: f64, tstop: f64) -> usize {
    let ratio = tstop / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-6 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Fixed-step transient from t = 0 to `tstop`, sampled every `dt`.
///
/// Without `initial`, the DC operating point at t = 0 is the starting state.
/// A step that fails to converge is retried as 2, 4, ... equal sub-steps; the
/// output grid stays uniform.
pub fn transient(
    n: &Netlist,
    cfg: &SimConfig,
    dt: f64,
    tstop: f64,
    initial: Option<&Solution>,
) -> Result<Waveform, SimError> {
    if !(dt.is_finite() && dt > 0.0 && tstop.is_finite() && tstop >= dt) {
        return Err(SimError::Invalid("transient needs dt > 0 and tstop >= dt".into()));
    }
    let c = prepare(n, cfg)?;
    let mut x = match initial {
        Some(sol) => sol.to_vector(&c)?,
        None => c
            .solve_dc(&DVector::zeros(c.size()), &Drive::at(0.0), cfg)
            .map_err(|e| newton_error(&c, e, Some(0.0), None))?,
    };
    let steps = step_count(dt, tstop);
    let mut wave = Waveform::for_circuit(&c, dt, steps + 1);
    let mut cap_currents = vec![0.0; c.caps.len()];
    wave.push(&c, &x);

    for k in 0..steps {
        let t0 = k as f64 * dt;
        let mut done = false;
        let mut last_err = None;
        for split in 0..=MAX_STEP_SPLITS {
            let pieces = 1usize << split;
            let h = dt / pieces as f64;
            let mut xs = x.clone();
            let mut is = cap_currents.clone();
            let mut ok = true;
            for p in 0..pieces {
                let t = if p + 1 == pieces {
                    (k + 1) as f64 * dt
                } else {
                    t0 + h * (p + 1) as f64
                };
                let comp = c.companions(&xs, &is, h, cfg.integrator);
                let drive = Drive {
                    companions: Some(&comp),
                    ..Drive::at(t)
                };
                match c.newton(&xs, &drive, cfg) {
                    Ok((xn, _)) => {
                        for ((i, cap), &(geq, ihist)) in is.iter_mut().zip(&c.caps).zip(&comp) {
                            let v = Circuit::voltage(&xn, cap.a) - Circuit::voltage(&xn, cap.b);
                            *i = geq * v + ihist;
                        }
                        xs = xn;
                    }
                    Err(e) => {
                        last_err = Some(newton_error(&c, e, Some(t), None));
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                x = xs;
                cap_currents = is;
                done = true;
                break;
            }
            if matches!(last_err, Some(SimError::SingularMatrix { .. })) {
                break;
            }
        }
        if !done {
            return Err(last_err.unwrap_or_else(|| SimError::Invalid("transient step failed".into())));
        }
        wave.push(&c, &x);
    }
    Ok(wave)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{mosfet_ids, ModelCard};
    use crate::netlist::{parse_netlist, SourceSpec};

    fn divider() -> Netlist {
        parse_netlist("div\nV1 in 0 DC 1.8\nR1 in mid 1k\nR2 mid 0 1k\n.end").unwrap()
    }

    #[test]
    fn resistor_divider_midpoint() {
        let sol = dc_operating_point(&divider(), &SimConfig::default()).unwrap();
        assert!((sol.voltage("mid").unwrap() - 0.9).abs() < 1e-9);
        assert_eq!(sol.voltage("0"), Some(0.0));
        // 0.9 mA flows out of the positive terminal.
        assert!((sol.source_current("V1").unwrap() + 0.9e-3).abs() < 1e-9);
    }

    #[test]
    fn sweep_of_divider_is_linear() {
        let sw = dc_sweep(&divider(), "V1", 0.0, 1.8, 0.1, &SimConfig::default()).unwrap();
        assert_eq!(sw.values.len(), 19);
        for (x, y) in sw.node_curve("mid").unwrap() {
            assert!((y - x / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_sign_mismatch_rejected_before_solving() {
        let err = dc_sweep(&divider(), "V1", 0.0, 1.8, -0.1, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, SimError::Invalid(_)));
        let err = dc_sweep(&divider(), "V9", 0.0, 1.8, 0.1, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, SimError::UnknownSource(_)));
    }

    #[test]
    fn saturated_nmos_self_consistent() {
        let card = ModelCard {
            vt0: 0.5,
            kp: 100e-6,
            lambda: 0.0,
            ..ModelCard::nmos_default()
        };
        let mut n = Netlist::new("nmos");
        n.add_model("n1", card.clone()).unwrap();
        n.add_vsource("VD", "d", "0", SourceSpec::Dc(1.8)).unwrap();
        n.add_mosfet("M1", "d", "d", "0", "0", "n1", 2e-6, 1e-6).unwrap();
        let cfg = SimConfig::default();
        let sol = dc_operating_point(&n, &cfg).unwrap();
        let vd = sol.voltage("d").unwrap();
        let want = mosfet_ids(&card, 2e-6, 1e-6, vd, vd);
        let got = -sol.source_current("VD").unwrap() - cfg.gmin * vd;
        assert!((got - want).abs() <= cfg.abstol, "{got} vs {want}");
        let r = kcl_residual(&n, &cfg, &sol).unwrap();
        assert!(r.iter().all(|v| v.abs() <= cfg.abstol + cfg.reltol * want));
    }

    #[test]
    fn parallel_sources_are_singular() {
        let n = parse_netlist("p\nV1 a 0 1\nV2 a 0 2\n.end").unwrap();
        let err = dc_operating_point(&n, &SimConfig::default()).unwrap_err();
        assert!(matches!(err, SimError::SingularMatrix { .. }), "{err}");
    }

    #[test]
    fn floating_gate_is_fine_with_gmin() {
        let text =
            "fg\nV1 d 0 1.8\nM1 d g 0 0 n W=1u L=1u\nC1 g 0 1f\n.model n NMOS vt0=0.45 kp=170u lambda=0.05\n.end";
        let sol = dc_operating_point(&parse_netlist(text).unwrap(), &SimConfig::default()).unwrap();
        assert!(sol.voltage("g").unwrap().abs() < 1e-9);
    }

    #[test]
    fn rc_zero_source_stays_at_zero() {
        let n = parse_netlist("rc\nV1 in 0 0\nR1 in out 1k\nC1 out 0 100f\n.end").unwrap();
        let w = transient(&n, &SimConfig::default(), 1e-12, 1e-10, None).unwrap();
        assert!(w.signal("v(out)").unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rc_step_matches_exponential() {
        let n = parse_netlist("rc\nV1 in 0 PWL(0 0 1p 1.8)\nR1 in out 1k\nC1 out 0 100f\n.end").unwrap();
        for method in [Integrator::Trapezoidal, Integrator::BackwardEuler] {
            let cfg = SimConfig {
                integrator: method,
                ..SimConfig::default()
            };
            let w = transient(&n, &cfg, 1e-12, 5e-10, None).unwrap();
            let v = w.value_at("v(out)", 1e-10).unwrap();
            assert!((v - 1.1378170058914039).abs() / 1.1378 < 0.01, "{method:?}: {v}");
        }
    }

    #[test]
    fn step_count_handles_rounding() {
        assert_eq!(step_count(1e-12, 1e-10), 100);
        assert_eq!(step_count(0.3, 1.0), 4);
    }
}
