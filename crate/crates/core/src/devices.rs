//! Device constitutive relations: Level-1 (square-law) MOSFET with an
//! optional exponential subthreshold term, and independent source waveforms.
//!
//! Currents are drain currents flowing *into* the drain terminal. PMOS is
//! handled by polarity reflection of the NMOS equations, with `vt0` stored as
//! a magnitude for both polarities.

use std::f64::consts::PI;

use serde::Serialize;

use crate::netlist::SourceSpec;

/// Thermal voltage at 300 K.
pub const THERMAL_VOLTAGE: f64 = 0.02585;

/// Gate oxide capacitance per area used by the default cards (about 4 nm oxide).
const COX_180NM: f64 = 8.6e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MosKind {
    Nmos,
    Pmos,
}

impl MosKind {
    fn polarity(self) -> f64 {
        match self {
            MosKind::Nmos => 1.0,
            MosKind::Pmos => -1.0,
        }
    }
}

/// Level-1 MOSFET parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelCard {
    pub kind: MosKind,
    /// Threshold magnitude (V).
    pub vt0: f64,
    /// Process transconductance mu*Cox (A/V^2).
    pub kp: f64,
    /// Channel-length modulation (1/V).
    pub lambda: f64,
    /// Gate-source capacitance per gate area (F/m^2).
    pub cgs_per_area: f64,
    /// Gate-drain capacitance per gate area (F/m^2).
    pub cgd_per_area: f64,
    /// Subthreshold current at vgs = vt0 per unit W/L (A). Zero gives pure Level-1.
    pub leak_i0: f64,
    /// Subthreshold slope factor.
    pub leak_n: f64,
    /// Thermal voltage (V).
    pub temp_vt: f64,
}

impl ModelCard {
    /// Pure square-law card with zero leakage; the starting point for `.model` lines.
    pub fn default_for(kind: MosKind) -> Self {
        let (vt0, kp) = match kind {
            MosKind::Nmos => (0.45, 170e-6),
            MosKind::Pmos => (0.45, 60e-6),
        };
        Self {
            kind,
            vt0,
            kp,
            lambda: 0.05,
            cgs_per_area: COX_180NM / 2.0,
            cgd_per_area: COX_180NM / 2.0,
            leak_i0: 0.0,
            leak_n: 1.5,
            temp_vt: THERMAL_VOLTAGE,
        }
    }

    /// Representative 180nm-like NMOS (not foundry data).
    pub fn nmos_default() -> Self {
        Self::default_for(MosKind::Nmos)
    }

    /// Representative 180nm-like PMOS (not foundry data).
    pub fn pmos_default() -> Self {
        Self::default_for(MosKind::Pmos)
    }

    pub fn with_leakage(mut self, leak_i0: f64, leak_n: f64) -> Self {
        self.leak_i0 = leak_i0;
        self.leak_n = leak_n;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.vt0,
            self.kp,
            self.lambda,
            self.cgs_per_area,
            self.cgd_per_area,
            self.leak_i0,
            self.leak_n,
            self.temp_vt,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("model parameters must be finite".into());
        }
        if self.kp <= 0.0 {
            return Err("kp must be > 0".into());
        }
        if self.lambda < 0.0 {
            return Err("lambda must be >= 0".into());
        }
        if self.leak_i0 < 0.0 {
            return Err("leak_i0 must be >= 0".into());
        }
        if self.leak_n < 1.0 {
            return Err("leak_n must be >= 1".into());
        }
        if self.vt0 <= 0.0 {
            return Err("vt0 magnitude must be > 0".into());
        }
        if self.temp_vt <= 0.0 {
            return Err("temp_vt must be > 0".into());
        }
        if self.cgs_per_area < 0.0 || self.cgd_per_area < 0.0 {
            return Err("capacitance per area must be >= 0".into());
        }
        Ok(())
    }
}

/// Drain current and its partial derivatives at one bias point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Channel {
    ids: f64,
    gm: f64,
    gds: f64,
}

/// NMOS equations in normal orientation (`vds >= 0`).
fn forward(card: &ModelCard, beta: f64, vgs: f64, vds: f64) -> Channel {
    let vov = vgs - card.vt0;
    let mut ch = if vov <= 0.0 {
        Channel {
            ids: 0.0,
            gm: 0.0,
            gds: 0.0,
        }
    } else {
        let clm = 1.0 + card.lambda * vds;
        if vds < vov {
            let core = vov * vds - 0.5 * vds * vds;
            Channel {
                ids: beta * core * clm,
                gm: beta * vds * clm,
                gds: beta * ((vov - vds) * clm + core * card.lambda),
            }
        } else {
            let core = 0.5 * vov * vov;
            Channel {
                ids: beta * core * clm,
                gm: beta * vov * clm,
                gds: beta * core * card.lambda,
            }
        }
    };
    if card.leak_i0 > 0.0 {
        // Subthreshold exponent saturates at threshold so the sum stays continuous.
        let nvt = card.leak_n * card.temp_vt;
        let below = vov < 0.0;
        let e = if below { (vov / nvt).exp() } else { 1.0 };
        let ed = (-vds / card.temp_vt).exp();
        let i0 = card.leak_i0 * (beta / card.kp) * e;
        ch.ids += i0 * (1.0 - ed);
        if below {
            ch.gm += i0 * (1.0 - ed) / nvt;
        }
        ch.gds += i0 * ed / card.temp_vt;
    }
    ch
}

/// Channel current into the drain for arbitrary terminal voltages, with
/// derivatives with respect to `vgs` and `vds` in the terminal frame.
fn channel(card: &ModelCard, w: f64, l: f64, vgs: f64, vds: f64) -> Channel {
    let beta = card.kp * w / l;
    let p = card.kind.polarity();
    let (vgs_n, vds_n) = (p * vgs, p * vds);
    if vds_n >= 0.0 {
        let f = forward(card, beta, vgs_n, vds_n);
        Channel {
            ids: p * f.ids,
            gm: f.gm,
            gds: f.gds,
        }
    } else {
        // Source and drain swap roles: evaluate with vgd and -vds.
        let f = forward(card, beta, vgs_n - vds_n, -vds_n);
        Channel {
            ids: -p * f.ids,
            gm: -f.gm,
            gds: f.gm + f.gds,
        }
    }
}

/// Level-1 drain current (A, into the drain).
pub fn mosfet_ids(card: &ModelCard, w: f64, l: f64, vgs: f64, vds: f64) -> f64 {
    channel(card, w, l, vgs, vds).ids
}

/// Linearized MOSFET at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceEval {
    /// Drain current (A, into the drain).
    pub ids: f64,
    /// dIds/dVgs (S).
    pub gm: f64,
    /// dIds/dVds (S).
    pub gds: f64,
    /// Companion current so that `ids = gm*vgs + gds*vds + ieq` holds at this point.
    pub ieq: f64,
    /// Terminal currents `[drain, gate, source, body]`, positive into the device.
    pub currents: [f64; 4],
    pub cgs: f64,
    pub cgd: f64,
}

/// Evaluate a MOSFET at terminal voltages `[vd, vg, vs, vb]`.
pub fn mosfet_stamp(card: &ModelCard, w: f64, l: f64, v: [f64; 4]) -> DeviceEval {
    let vgs = v[1] - v[2];
    let vds = v[0] - v[2];
    let ch = channel(card, w, l, vgs, vds);
    let area = w * l;
    DeviceEval {
        ids: ch.ids,
        gm: ch.gm,
        gds: ch.gds,
        ieq: ch.ids - ch.gm * vgs - ch.gds * vds,
        currents: [ch.ids, 0.0, -ch.ids, 0.0],
        cgs: card.cgs_per_area * area,
        cgd: card.cgd_per_area * area,
    }
}

/// Instantaneous value of a source waveform at time `t`.
pub fn source_value(spec: &SourceSpec, t: f64) -> f64 {
    match spec {
        SourceSpec::Dc(v) => *v,
        SourceSpec::Pwl(points) => pwl_value(points, t),
        SourceSpec::Ramp {
            v_start,
            v_end,
            delay,
            rise,
            hold,
            fall,
            period,
        } => {
            if t < *delay {
                return *v_start;
            }
            let tau = (t - delay) % period;
            let span = v_end - v_start;
            if tau < *rise {
                v_start + span * tau / rise
            } else if tau < rise + hold {
                *v_end
            } else if tau < rise + hold + fall {
                v_end - span * (tau - rise - hold) / fall
            } else {
                *v_start
            }
        }
        SourceSpec::Sine {
            offset,
            amplitude,
            freq,
            delay,
        } => {
            if t < *delay {
                *offset
            } else {
                offset + amplitude * (2.0 * PI * freq * (t - delay)).sin()
            }
        }
    }
}

fn pwl_value(points: &[(f64, f64)], t: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 <= t);
    let (t0, v0) = points[k - 1];
    let (t1, v1) = points[k];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Times at which a waveform has a corner, within `[0, tstop]`.
pub fn source_breakpoints(spec: &SourceSpec, tstop: f64) -> Vec<f64> {
    let mut out = Vec::new();
    match spec {
        SourceSpec::Dc(_) | SourceSpec::Sine { .. } => {}
        SourceSpec::Pwl(points) => out.extend(points.iter().map(|p| p.0).filter(|t| *t <= tstop)),
        SourceSpec::Ramp {
            delay,
            rise,
            hold,
            fall,
            period,
            ..
        } => {
            let mut start = *delay;
            while start <= tstop {
                for off in [0.0, *rise, rise + hold, rise + hold + fall] {
                    if start + off <= tstop {
                        out.push(start + off);
                    }
                }
                start += period;
            }
        }
    }
    out
}
