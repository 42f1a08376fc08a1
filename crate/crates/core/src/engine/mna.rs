//! Compiled MNA form of a netlist plus the Newton–Raphson kernel.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. Branch current follows the SPICE convention: positive
//! current flows into the positive terminal, through the source, and out of
//! the negative terminal.

use nalgebra::{DMatrix, DVector};

use super::{Integrator, SimConfig, SimError};
use crate::devices::{mosfet_stamp, source_value, ModelCard};
use crate::netlist::{Element, Netlist, SourceSpec};

/// Largest per-iteration node update when the circuit has MOSFETs.
const MAX_NEWTON_STEP: f64 = 0.5;

pub(crate) struct Source {
    pub name: String,
    pub pos: usize,
    pub neg: usize,
    pub spec: SourceSpec,
}

pub(crate) struct Mosfet {
    pub name: String,
    pub nodes: [usize; 4],
    pub card: ModelCard,
    pub w: f64,
    pub l: f64,
}

/// A linear capacitor, either an explicit element or a MOSFET overlap cap.
#[derive(Debug, Clone)]
pub(crate) struct Cap {
    pub a: usize,
    pub b: usize,
    pub farads: f64,
}

pub(crate) struct Circuit {
    pub node_names: Vec<String>,
    pub sources: Vec<Source>,
    pub resistors: Vec<(usize, usize, f64)>,
    pub caps: Vec<Cap>,
    pub mosfets: Vec<Mosfet>,
    pub gmin: f64,
}

/// Per-solve stamping inputs beyond the circuit itself.
pub(crate) struct Drive<'a> {
    pub time: f64,
    pub source_scale: f64,
    /// Replace one source's value (DC sweep).
    pub source_override: Option<(usize, f64)>,
    /// Transient companion: `(geq, ihist)` per capacitor.
    pub companions: Option<&'a [(f64, f64)]>,
    /// Weak pulls `(node, volts, siemens)` used for preloading.
    pub forces: &'a [(usize, f64, f64)],
}

impl Drive<'_> {
    pub fn at(time: f64) -> Drive<'static> {
        Drive {
            time,
            source_scale: 1.0,
            source_override: None,
            companions: None,
            forces: &[],
        }
    }
}

pub(crate) enum NewtonError {
    NoConvergence { iterations: usize, worst: usize },
    Singular { unknown: usize },
}

impl Circuit {
    pub fn compile(n: &Netlist, cfg: &SimConfig) -> Result<Self, SimError> {
        n.validate()?;
        let mut c = Circuit {
            node_names: n.nodes().to_vec(),
            sources: Vec::new(),
            resistors: Vec::new(),
            caps: Vec::new(),
            mosfets: Vec::new(),
            gmin: cfg.gmin,
        };
        for d in n.devices() {
            match &d.element {
                Element::Resistor { nodes, ohms } => c.resistors.push((nodes[0].0, nodes[1].0, 1.0 / ohms)),
                Element::Capacitor { nodes, farads } => c.caps.push(Cap {
                    a: nodes[0].0,
                    b: nodes[1].0,
                    farads: *farads,
                }),
                Element::VoltageSource { nodes, spec } => c.sources.push(Source {
                    name: d.name.clone(),
                    pos: nodes[0].0,
                    neg: nodes[1].0,
                    spec: spec.clone(),
                }),
                Element::Mosfet { nodes, model, w, l } => {
                    let card = n
                        .model(model)
                        .cloned()
                        .ok_or_else(|| SimError::Invalid(format!("undefined model '{model}'")))?;
                    let idx = nodes.map(|x| x.0);
                    let area = w * l;
                    let (cgs, cgd) = (card.cgs_per_area * area, card.cgd_per_area * area);
                    if cgs > 0.0 {
                        c.caps.push(Cap {
                            a: idx[1],
                            b: idx[2],
                            farads: cgs,
                        });
                    }
                    if cgd > 0.0 {
                        c.caps.push(Cap {
                            a: idx[1],
                            b: idx[0],
                            farads: cgd,
                        });
                    }
                    c.mosfets.push(Mosfet {
                        name: d.name.clone(),
                        nodes: idx,
                        card,
                        w: *w,
                        l: *l,
                    });
                }
            }
        }
        Ok(c)
    }

    pub fn size(&self) -> usize {
        self.node_names.len() - 1 + self.sources.len()
    }

    pub fn branch_index(&self, source: usize) -> usize {
        self.node_names.len() - 1 + source
    }

    pub fn unknown_name(&self, k: usize) -> String {
        let nodes = self.node_names.len() - 1;
        if k < nodes {
            self.node_names[k + 1].clone()
        } else {
            format!("i({})", self.sources[k - nodes].name)
        }
    }

    pub fn voltage(x: &DVector<f64>, node: usize) -> f64 {
        if node == 0 {
            0.0
        } else {
            x[node - 1]
        }
    }

    pub fn source_index(&self, name: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn source_level(&self, k: usize, drive: &Drive) -> f64 {
        let v = match drive.source_override {
            Some((idx, v)) if idx == k => v,
            _ => source_value(&self.sources[k].spec, drive.time),
        };
        v * drive.source_scale
    }

    /// Linearize around `x`: returns `(G, b)` with `G x = b` exact at `x`
    /// for the nonlinear devices.
    pub fn assemble(&self, x: &DVector<f64>, drive: &Drive) -> (DMatrix<f64>, DVector<f64>) {
        let size = self.size();
        let mut g = DMatrix::zeros(size, size);
        let mut b = DVector::zeros(size);
        let row = |node: usize| (node > 0).then(|| node - 1);

        let conductance = |g: &mut DMatrix<f64>, a: usize, bb: usize, val: f64| match (row(a), row(bb)) {
            (Some(i), Some(j)) => {
                g[(i, i)] += val;
                g[(j, j)] += val;
                g[(i, j)] -= val;
                g[(j, i)] -= val;
            }
            (Some(i), None) | (None, Some(i)) => g[(i, i)] += val,
            (None, None) => {}
        };

        for i in 0..self.node_names.len() - 1 {
            g[(i, i)] += self.gmin;
        }
        for &(a, bb, val) in &self.resistors {
            conductance(&mut g, a, bb, val);
        }
        for &(node, volts, siemens) in drive.forces {
            if let Some(i) = row(node) {
                g[(i, i)] += siemens;
                b[i] += siemens * volts;
            }
        }
        if let Some(comp) = drive.companions {
            for (cap, &(geq, ihist)) in self.caps.iter().zip(comp) {
                conductance(&mut g, cap.a, cap.b, geq);
                // Branch current a->b is geq*v + ihist; ihist leaves node a.
                if let Some(i) = row(cap.a) {
                    b[i] -= ihist;
                }
                if let Some(j) = row(cap.b) {
                    b[j] += ihist;
                }
            }
        }
        for (k, s) in self.sources.iter().enumerate() {
            let br = self.branch_index(k);
            if let Some(i) = row(s.pos) {
                g[(i, br)] += 1.0;
                g[(br, i)] += 1.0;
            }
            if let Some(j) = row(s.neg) {
                g[(j, br)] -= 1.0;
                g[(br, j)] -= 1.0;
            }
            b[br] = self.source_level(k, drive);
        }
        for m in &self.mosfets {
            let v = m.nodes.map(|n| Self::voltage(x, n));
            let e = mosfet_stamp(&m.card, m.w, m.l, v);
            let [d, gate, s, _] = m.nodes;
            // Ids leaves the drain node and enters the source node:
            // Ids = gm*(vg - vs) + gds*(vd - vs) + ieq
            let terms = [(gate, e.gm), (d, e.gds), (s, -e.gm - e.gds)];
            if let Some(i) = row(d) {
                for &(col, val) in &terms {
                    if let Some(j) = row(col) {
                        g[(i, j)] += val;
                    }
                }
                b[i] -= e.ieq;
            }
            if let Some(i) = row(s) {
                for &(col, val) in &terms {
                    if let Some(j) = row(col) {
                        g[(i, j)] -= val;
                    }
                }
                b[i] += e.ieq;
            }
        }
        (g, b)
    }

    /// Per-unknown tolerance on the residual `G x - b`.
    fn residual_ok(&self, g: &DMatrix<f64>, x: &DVector<f64>, b: &DVector<f64>, cfg: &SimConfig) -> bool {
        let nodes = self.node_names.len() - 1;
        let r = g * x - b;
        (0..self.size()).all(|i| {
            if i < nodes {
                let mut scale = b[i].abs();
                for j in 0..self.size() {
                    scale = scale.max((g[(i, j)] * x[j]).abs());
                }
                r[i].abs() <= cfg.abstol + cfg.reltol * scale
            } else {
                r[i].abs() <= cfg.vntol + cfg.reltol * b[i].abs()
            }
        })
    }

    fn delta_ok(&self, x_new: &DVector<f64>, delta: &DVector<f64>, cfg: &SimConfig) -> Option<usize> {
        let nodes = self.node_names.len() - 1;
        let mut worst = None;
        let mut worst_ratio = 1.0;
        for i in 0..self.size() {
            let tol = if i < nodes {
                cfg.vntol + cfg.reltol * x_new[i].abs()
            } else {
                cfg.abstol + cfg.reltol * x_new[i].abs()
            };
            let ratio = delta[i].abs() / tol;
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = Some(i);
            }
        }
        worst
    }

    pub fn newton(
        &self,
        x0: &DVector<f64>,
        drive: &Drive,
        cfg: &SimConfig,
    ) -> Result<(DVector<f64>, usize), NewtonError> {
        let nodes = self.node_names.len() - 1;
        let limit = !self.mosfets.is_empty();
        let mut x = x0.clone();
        let mut last_worst: Option<usize> = Some(0);
        for iter in 0..cfg.max_newton_iters {
            let (g, b) = self.assemble(&x, drive);
            if iter > 0 && last_worst.is_none() && self.residual_ok(&g, &x, &b, cfg) {
                return Ok((x, iter));
            }
            let x_new = solve(g, &b)?;
            let mut delta = &x_new - &x;
            let mut clipped = false;
            if limit {
                for i in 0..nodes {
                    if delta[i].abs() > MAX_NEWTON_STEP {
                        delta[i] = MAX_NEWTON_STEP.copysign(delta[i]);
                        clipped = true;
                    }
                }
            }
            x += &delta;
            last_worst = self.delta_ok(&x, &delta, cfg);
            if clipped && last_worst.is_none() {
                last_worst = Some(0);
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(NewtonError::NoConvergence {
                    iterations: iter + 1,
                    worst: 0,
                });
            }
        }
        Err(NewtonError::NoConvergence {
            iterations: cfg.max_newton_iters,
            worst: last_worst.unwrap_or(0),
        })
    }

    /// Newton with source-stepping fallback (sources scaled 0 -> 1).
    pub fn solve_dc(&self, x0: &DVector<f64>, drive: &Drive, cfg: &SimConfig) -> Result<DVector<f64>, NewtonError> {
        let first = match self.newton(x0, drive, cfg) {
            Ok((x, _)) => return Ok(x),
            Err(e @ NewtonError::Singular { .. }) => return Err(e),
            Err(e) => e,
        };
        let mut x = DVector::zeros(self.size());
        let mut scale = 0.0;
        let mut step = 1.0 / cfg.source_steps as f64;
        let mut halvings = 0;
        while scale < 1.0 {
            let target = (scale + step).min(1.0);
            let stepped = Drive {
                source_scale: target * drive.source_scale,
                ..*drive
            };
            match self.newton(&x, &stepped, cfg) {
                Ok((xn, _)) => {
                    x = xn;
                    scale = target;
                }
                Err(NewtonError::Singular { unknown }) => return Err(NewtonError::Singular { unknown }),
                Err(_) if halvings < 10 => {
                    step /= 2.0;
                    halvings += 1;
                }
                Err(_) => return Err(first),
            }
        }
        Ok(x)
    }

    /// Capacitor companion `(geq, ihist)` for one step of length `h`.
    pub fn companions(&self, x: &DVector<f64>, cap_currents: &[f64], h: f64, method: Integrator) -> Vec<(f64, f64)> {
        self.caps
            .iter()
            .zip(cap_currents)
            .map(|(c, &i)| {
                let v = Self::voltage(x, c.a) - Self::voltage(x, c.b);
                match method {
                    Integrator::Trapezoidal => {
                        let geq = 2.0 * c.farads / h;
                        (geq, -(geq * v + i))
                    }
                    Integrator::BackwardEuler => {
                        let geq = c.farads / h;
                        (geq, -geq * v)
                    }
                }
            })
            .collect()
    }
}

fn solve(g: DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>, NewtonError> {
    let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = g.lu();
    let u = lu.u();
    let tiny = 1e-18 * max.max(1.0);
    if let Some(k) = (0..u.nrows()).find(|&k| u[(k, k)].abs() <= tiny) {
        return Err(NewtonError::Singular { unknown: k });
    }
    lu.solve(b).ok_or(NewtonError::Singular { unknown: 0 })
}
