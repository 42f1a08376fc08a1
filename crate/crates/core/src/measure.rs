//! Energy, power and leakage metrics computed from transient waveforms, plus
//! the closed-form charging laws they are checked against.
//!
//! Supply energy is the trapezoidal integral of `v * i_delivered`, where the
//! delivered current is the negated branch current. Energy a source takes
//! back during a ramp-down therefore counts negative.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{transient, SimConfig, SimError, Waveform};
use crate::netlist::{Element, Netlist, SourceSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("unknown signal '{0}'")]
    UnknownSignal(String),
    #[error("window [{t0:e}, {t1:e}] s is outside the waveform span [{start:e}, {end:e}] s")]
    WindowOutOfRange { t0: f64, t1: f64, start: f64, end: f64 },
    #[error("invalid charging law: {0}")]
    InvalidLaw(String),
}

/// Closed-form RC charging scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargingLaw {
    pub r: f64,
    pub c: f64,
    pub vdd: f64,
    pub t_ramp: f64,
}

impl ChargingLaw {
    pub fn new(r: f64, c: f64, vdd: f64, t_ramp: f64) -> Result<Self, MeasureError> {
        let law = Self { r, c, vdd, t_ramp };
        if [r, c, vdd, t_ramp].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(law)
        } else {
            Err(MeasureError::InvalidLaw(
                "r, c, vdd and t_ramp must be finite and > 0".into(),
            ))
        }
    }

    pub fn tau(&self) -> f64 {
        self.r * self.c
    }
}

/// Dissipation of a slow linear ramp charge: `(RC/T) * C * Vdd^2`.
pub fn adiabatic_energy_law(law: &ChargingLaw) -> f64 {
    law.tau() / law.t_ramp * law.c * law.vdd * law.vdd
}

/// Energy drawn by an abrupt charge of `c` to `vdd`: `C * Vdd^2`, half of which is dissipated.
pub fn conventional_supply_energy(c: f64, vdd: f64) -> f64 {
    c * vdd * vdd
}

/// A linear capacitance between two named nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageCap {
    pub name: String,
    pub a: String,
    pub b: String,
    pub farads: f64,
}

/// Every capacitance the simulator integrates: explicit capacitors plus the
/// constant gate-source and gate-drain capacitances of each MOSFET.
pub fn storage_elements(n: &Netlist) -> Vec<StorageCap> {
    let mut out = Vec::new();
    for d in n.devices() {
        match &d.element {
            Element::Capacitor { nodes, farads } => out.push(StorageCap {
                name: d.name.clone(),
                a: n.node_name(nodes[0]).to_string(),
                b: n.node_name(nodes[1]).to_string(),
                farads: *farads,
            }),
            Element::Mosfet { nodes, model, w, l } => {
                let Some(card) = n.model(model) else { continue };
                let gate = n.node_name(nodes[1]);
                for (suffix, per_area, other) in [
                    ("cgs", card.cgs_per_area, nodes[2]),
                    ("cgd", card.cgd_per_area, nodes[0]),
                ] {
                    if per_area > 0.0 {
                        out.push(StorageCap {
                            name: format!("{}.{suffix}", d.name),
                            a: gate.to_string(),
                            b: n.node_name(other).to_string(),
                            farads: per_area * w * l,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

fn check_window(w: &Waveform, t0: f64, t1: f64) -> Result<(), MeasureError> {
    let eps = 1e-6 * w.dt;
    let (start, end) = (w.t0, w.t_end());
    if !(t0.is_finite() && t1.is_finite()) || t0 > t1 || t0 < start - eps || t1 > end + eps {
        return Err(MeasureError::WindowOutOfRange { t0, t1, start, end });
    }
    Ok(())
}

fn node(w: &Waveform, name: &str) -> Result<Vec<f64>, MeasureError> {
    w.node_voltage(name)
        .ok_or_else(|| MeasureError::UnknownSignal(format!("v({name})")))
}

fn signal<'a>(w: &'a Waveform, name: &str) -> Result<&'a [f64], MeasureError> {
    w.signal(name)
        .ok_or_else(|| MeasureError::UnknownSignal(name.to_string()))
}

/// Trapezoidal integral of a sampled series over `[t0, t1]`; partial end
/// intervals use linear interpolation.
pub fn integrate(w: &Waveform, s: &[f64], t0: f64, t1: f64) -> f64 {
    if s.len() < 2 || t1 <= t0 {
        return 0.0;
    }
    let last = (s.len() - 1) as f64;
    let p0 = w.position(t0).clamp(0.0, last);
    let p1 = w.position(t1).clamp(0.0, last);
    let at = |p: f64| crate::engine::waveform_interpolate(s, p);
    let first_full = p0.ceil();
    let last_full = p1.floor();
    if first_full > last_full {
        return 0.5 * (at(p0) + at(p1)) * (p1 - p0) * w.dt;
    }
    let mut sum = 0.5 * (at(p0) + at(first_full)) * (first_full - p0);
    let (a, b) = (first_full as usize, last_full as usize);
    for k in a..b {
        sum += 0.5 * (s[k] + s[k + 1]);
    }
    sum += 0.5 * (at(last_full) + at(p1)) * (p1 - last_full);
    sum * w.dt
}

/// Instantaneous power delivered by a source, W per sample.
pub fn supply_power(w: &Waveform, source: &str) -> Result<Vec<f64>, MeasureError> {
    let (pos, neg) = w
        .source_terminals(source)
        .ok_or_else(|| MeasureError::UnknownSignal(format!("i({source})")))?;
    let (vp, vn) = (node(w, pos)?, node(w, neg)?);
    let i = signal(w, &format!("i({source})"))?;
    Ok(vp.iter().zip(&vn).zip(i).map(|((p, n), i)| -(p - n) * i).collect())
}

/// Net energy delivered by `source` over `[t0, t1]` (J).
pub fn supply_energy(w: &Waveform, source: &str, t0: f64, t1: f64) -> Result<f64, MeasureError> {
    check_window(w, t0, t1)?;
    Ok(integrate(w, &supply_power(w, source)?, t0, t1))
}

/// Energy drawn by `source` over `[t0, t1]` ignoring what it takes back (J).
pub fn gross_supply_energy(w: &Waveform, source: &str, t0: f64, t1: f64) -> Result<f64, MeasureError> {
    check_window(w, t0, t1)?;
    let p: Vec<f64> = supply_power(w, source)?.into_iter().map(|p| p.max(0.0)).collect();
    Ok(integrate(w, &p, t0, t1))
}

/// Total `0.5 * C * v^2` held in `caps` at time `t` (J).
pub fn stored_energy(w: &Waveform, caps: &[StorageCap], t: f64) -> Result<f64, MeasureError> {
    let pos = w.position(t);
    let mut total = 0.0;
    for c in caps {
        let va = crate::engine::waveform_interpolate(&node(w, &c.a)?, pos);
        let vb = crate::engine::waveform_interpolate(&node(w, &c.b)?, pos);
        total += 0.5 * c.farads * (va - vb).powi(2);
    }
    Ok(total)
}

/// Supply energy minus the change in stored energy over `[t0, t1]` (J).
pub fn dissipated_energy(
    w: &Waveform,
    sources: &[&str],
    caps: &[StorageCap],
    t0: f64,
    t1: f64,
) -> Result<f64, MeasureError> {
    check_window(w, t0, t1)?;
    let mut supplied = 0.0;
    for s in sources {
        supplied += supply_energy(w, s, t0, t1)?;
    }
    Ok(supplied - (stored_energy(w, caps, t1)? - stored_energy(w, caps, t0)?))
}

/// Independent dissipation estimate: integral of `v^2/R` over every resistor
/// plus `id * vds` over every MOSFET channel (J).
pub fn element_dissipation(w: &Waveform, n: &Netlist, t0: f64, t1: f64) -> Result<f64, MeasureError> {
    check_window(w, t0, t1)?;
    let mut total = 0.0;
    for d in n.devices() {
        match &d.element {
            Element::Resistor { nodes, ohms } => {
                let va = node(w, n.node_name(nodes[0]))?;
                let vb = node(w, n.node_name(nodes[1]))?;
                let p: Vec<f64> = va.iter().zip(&vb).map(|(a, b)| (a - b).powi(2) / ohms).collect();
                total += integrate(w, &p, t0, t1);
            }
            Element::Mosfet { nodes, .. } => {
                let vd = node(w, n.node_name(nodes[0]))?;
                let vs = node(w, n.node_name(nodes[2]))?;
                let id = signal(w, &format!("id({})", d.name))?;
                let p: Vec<f64> = vd.iter().zip(&vs).zip(id).map(|((d, s), i)| (d - s) * i).collect();
                total += integrate(w, &p, t0, t1);
            }
            _ => {}
        }
    }
    Ok(total)
}

/// Time-averaged channel-current magnitude of each device over `[t0, t1]` (A).
pub fn leakage_currents(
    w: &Waveform,
    devices: &[&str],
    t0: f64,
    t1: f64,
) -> Result<BTreeMap<String, f64>, MeasureError> {
    check_window(w, t0, t1)?;
    let mut out = BTreeMap::new();
    for dev in devices {
        let id = signal(w, &format!("id({dev})"))?;
        let mag: Vec<f64> = id.iter().map(|i| i.abs()).collect();
        let avg = if t1 > t0 {
            integrate(w, &mag, t0, t1) / (t1 - t0)
        } else {
            crate::engine::waveform_interpolate(&mag, w.position(t0))
        };
        out.insert(dev.to_string(), avg);
    }
    Ok(out)
}

/// Energy and power figures for one measurement window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub window: (f64, f64),
    /// Net energy delivered per source (J).
    pub supply_energy: BTreeMap<String, f64>,
    pub total_supply_energy: f64,
    /// Energy drawn without crediting recovery (J).
    pub gross_supply_energy: f64,
    pub stored_energy_delta: f64,
    pub dissipated_energy: f64,
    /// Dissipated energy over the window length (W).
    pub average_power: f64,
    /// Time-averaged channel-current magnitude per device (A).
    pub leakage: BTreeMap<String, f64>,
}

impl PowerReport {
    /// Meter every listed source over `[t0, t1]` and average the leakage of `leak_devices`.
    pub fn measure(
        w: &Waveform,
        n: &Netlist,
        sources: &[&str],
        leak_devices: &[&str],
        t0: f64,
        t1: f64,
    ) -> Result<Self, MeasureError> {
        check_window(w, t0, t1)?;
        let caps = storage_elements(n);
        let mut supply = BTreeMap::new();
        let mut gross = 0.0;
        for s in sources {
            supply.insert(s.to_string(), supply_energy(w, s, t0, t1)?);
            gross += gross_supply_energy(w, s, t0, t1)?;
        }
        let total: f64 = supply.values().sum();
        let delta = stored_energy(w, &caps, t1)? - stored_energy(w, &caps, t0)?;
        let dissipated = total - delta;
        let span = t1 - t0;
        Ok(Self {
            window: (t0, t1),
            supply_energy: supply,
            total_supply_energy: total,
            gross_supply_energy: gross,
            stored_energy_delta: delta,
            dissipated_energy: dissipated,
            average_power: if span > 0.0 { dissipated / span } else { 0.0 },
            leakage: leakage_currents(w, leak_devices, t0, t1)?,
        })
    }

    /// Flat `(metric, value)` rows for tabular export.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut rows = vec![
            ("window_start_s".to_string(), self.window.0),
            ("window_end_s".to_string(), self.window.1),
        ];
        for (k, v) in &self.supply_energy {
            rows.push((format!("supply_energy_j.{k}"), *v));
        }
        rows.extend([
            ("total_supply_energy_j".to_string(), self.total_supply_energy),
            ("gross_supply_energy_j".to_string(), self.gross_supply_energy),
            ("stored_energy_delta_j".to_string(), self.stored_energy_delta),
            ("dissipated_energy_j".to_string(), self.dissipated_energy),
            ("average_power_w".to_string(), self.average_power),
        ]);
        for (k, v) in &self.leakage {
            rows.push((format!("leakage_a.{k}"), *v));
        }
        rows
    }
}

/// How the supply of the RC charging fixture moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChargeProfile {
    /// Near-instant step to vdd (rise of RC/100).
    Step,
    /// Linear ramp 0 -> vdd over `t_ramp`, then hold.
    Ramp,
    /// Ramp up over `t_ramp`, hold, ramp back down over `t_ramp`.
    RampCycle,
}

/// Energy figures of one RC charging run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeOutcome {
    pub law: ChargingLaw,
    pub profile: ChargeProfile,
    pub dt: f64,
    pub tstop: f64,
    pub supply_energy: f64,
    pub stored_energy: f64,
    pub dissipated_energy: f64,
    /// Integral of `i^2 R`, computed independently of the supply.
    pub resistor_energy: f64,
}

impl ChargeOutcome {
    /// `|supply - stored - resistor| / supply`.
    pub fn conservation_residual(&self) -> f64 {
        (self.supply_energy - self.stored_energy - self.resistor_energy).abs()
            / self.supply_energy.abs().max(f64::MIN_POSITIVE)
    }
}

/// Source-R-C netlist for a charging profile (nodes `in`, `out`).
pub fn charge_netlist(law: &ChargingLaw, profile: ChargeProfile) -> Netlist {
    let (tau, t, v) = (law.tau(), law.t_ramp, law.vdd);
    let points = match profile {
        ChargeProfile::Step => vec![(0.0, 0.0), (tau / 100.0, v)],
        ChargeProfile::Ramp => vec![(0.0, 0.0), (t, v)],
        ChargeProfile::RampCycle => {
            let hold = 10.0 * tau;
            vec![(0.0, 0.0), (t, v), (t + hold, v), (2.0 * t + hold, 0.0)]
        }
    };
    let mut n = Netlist::new("rc charge");
    n.add_vsource("V1", "in", "0", SourceSpec::Pwl(points))
        .and_then(|_| n.add_resistor("R1", "in", "out", law.r))
        .and_then(|_| n.add_capacitor("C1", "out", "0", law.c))
        .expect("fixture elements are valid");
    n
}

/// Simulate the RC fixture and meter it over the whole run.
///
/// The run covers the profile plus 15 RC of settling; `dt` defaults to RC/100.
pub fn charge_experiment(
    law: &ChargingLaw,
    profile: ChargeProfile,
    dt: Option<f64>,
    cfg: &SimConfig,
) -> Result<ChargeOutcome, SimError> {
    let tau = law.tau();
    let dt = dt.unwrap_or(tau / 100.0);
    let active = match profile {
        ChargeProfile::Step => 0.0,
        ChargeProfile::Ramp => law.t_ramp,
        ChargeProfile::RampCycle => 2.0 * law.t_ramp + 10.0 * tau,
    };
    let tstop = active + 15.0 * tau;
    let n = charge_netlist(law, profile);
    let w = transient(&n, cfg, dt, tstop, None)?;
    let tstop = w.t_end();
    let meter = |e: Result<f64, MeasureError>| e.map_err(|e| SimError::Invalid(e.to_string()));
    let caps = storage_elements(&n);
    let supply = meter(supply_energy(&w, "V1", 0.0, tstop))?;
    let stored = meter(stored_energy(&w, &caps, tstop))? - meter(stored_energy(&w, &caps, 0.0))?;
    Ok(ChargeOutcome {
        law: *law,
        profile,
        dt,
        tstop,
        supply_energy: supply,
        stored_energy: stored,
        dissipated_energy: supply - stored,
        resistor_energy: meter(element_dissipation(&w, &n, 0.0, tstop))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SignalKind;

    fn constant_source(volts: f64, amps: f64, samples: usize, dt: f64) -> Waveform {
        let mut w = Waveform::new(
            0.0,
            dt,
            vec![
                ("v(a)".into(), SignalKind::NodeVoltage),
                ("i(V1)".into(), SignalKind::SourceCurrent),
            ],
        );
        w.set_source_terminals("V1", "a", "0");
        for _ in 0..samples {
            w.push_row(&[volts, -amps]);
        }
        w
    }

    #[test]
    fn constant_draw() {
        let w = constant_source(1.8, 1e-3, 11, 1e-9);
        let e = supply_energy(&w, "V1", 0.0, 10e-9).unwrap();
        assert!((e - 1.8e-11).abs() < 1e-24);
        let half = supply_energy(&w, "V1", 2.5e-9, 7.5e-9).unwrap();
        assert!((half - 0.9e-11).abs() < 1e-24);
    }

    #[test]
    fn window_and_signal_errors() {
        let w = constant_source(1.8, 1e-3, 11, 1e-9);
        assert!(matches!(
            supply_energy(&w, "V1", 0.0, 11e-9),
            Err(MeasureError::WindowOutOfRange { .. })
        ));
        assert!(matches!(
            supply_energy(&w, "V2", 0.0, 1e-9),
            Err(MeasureError::UnknownSignal(_))
        ));
        assert!(matches!(
            leakage_currents(&w, &["M9"], 0.0, 1e-9),
            Err(MeasureError::UnknownSignal(_))
        ));
    }

    #[test]
    fn law_identities() {
        let law = ChargingLaw::new(1e3, 100e-15, 1.8, 10e-9).unwrap();
        assert!((adiabatic_energy_law(&law) - 3.24e-15).abs() < 1e-27);
        let break_even = ChargingLaw {
            t_ramp: 2.0 * law.tau(),
            ..law
        };
        let half_cv2 = 0.5 * conventional_supply_energy(law.c, law.vdd);
        assert!((adiabatic_energy_law(&break_even) - half_cv2).abs() < 1e-27);
        let doubled = ChargingLaw {
            t_ramp: 2.0 * law.t_ramp,
            ..law
        };
        assert_eq!(adiabatic_energy_law(&doubled), adiabatic_energy_law(&law) / 2.0);
        assert!(ChargingLaw::new(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mosfet_caps_are_storage() {
        let text =
            "c\nM1 d g 0 0 n W=1u L=1u\nC1 d 0 1f\n.model n NMOS vt0=0.45 kp=170u lambda=0.05 cgs=1m cgd=2m\n.end";
        let n = crate::netlist::parse_netlist(text).unwrap();
        let caps = storage_elements(&n);
        assert_eq!(caps.len(), 3);
        let total: f64 = caps.iter().map(|c| c.farads).sum();
        assert!((total - 4e-15).abs() < 1e-27);
    }

    #[test]
    fn step_charge_budget() {
        let law = ChargingLaw::new(1e3, 100e-15, 1.8, 1e-9).unwrap();
        let out = charge_experiment(&law, ChargeProfile::Step, None, &SimConfig::default()).unwrap();
        assert!((out.supply_energy / 3.24e-13 - 1.0).abs() < 0.01, "{out:?}");
        assert!((out.dissipated_energy / 1.62e-13 - 1.0).abs() < 0.02, "{out:?}");
        assert!(out.conservation_residual() < 0.01, "{out:?}");
    }

    #[test]
    fn slow_ramp_follows_law() {
        let law = ChargingLaw::new(1e3, 100e-15, 1.8, 10e-9).unwrap();
        let out = charge_experiment(&law, ChargeProfile::Ramp, None, &SimConfig::default()).unwrap();
        let want = adiabatic_energy_law(&law);
        assert!(
            (out.dissipated_energy / want - 1.0).abs() < 0.05,
            "{} vs {want}",
            out.dissipated_energy
        );
        let cycle = charge_experiment(&law, ChargeProfile::RampCycle, None, &SimConfig::default()).unwrap();
        assert!((cycle.supply_energy / (2.0 * want) - 1.0).abs() < 0.1, "{cycle:?}");
    }
}
