//! Assembly of the hybrid plant and closure of the PI load-frequency loops.
//!
//! Subsystems are wired by signal label: an exogenous input of one block
//! whose label names a state (or an output) of another block becomes an
//! internal coupling. The remaining inputs map onto the plant's control
//! vector `[dPcd, dPcu, us]` and disturbance vector `[dPl, dPiw, dPis]`.
//!
//! PI action is obtained by appending the integrals of `dFs` and `dFt` as
//! states `iFs`, `iFt`; the controllers then become pure state feedback
//! `u = H x`, and the closed loop is `A_hat = A_bar + B_bar H`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::diesel::{self, DieselParams};
use crate::error::{LfcError, Result};
use crate::lti::{eigenvalues, StateSpaceModel};
use crate::solar::{self, SolarChannelParams};
use crate::wind::{self, WindParams};

pub const CONTROLS: [&str; 3] = ["dPcd", "dPcu", "us"];
pub const DISTURBANCES: [&str; 3] = ["dPl", "dPiw", "dPis"];
pub const OUTPUTS: [&str; 3] = ["dPgw", "dPgs", "dP1"];
pub const INTEGRATOR_STATES: [&str; 2] = ["iFs", "iFt"];

/// Real part above which a closed loop is treated as not asymptotically stable.
pub const STABILITY_MARGIN: f64 = -1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Power system gain `1/D`, Hz / pu kW.
    pub kp: f64,
    /// Power system time constant `2H/(F D)`, s.
    pub tp: f64,
    /// Nominal frequency, Hz.
    pub fs_nominal: f64,
    /// Whether PV generation enters the power balance.
    pub include_solar: bool,
    pub diesel: DieselParams,
    pub wind: WindParams,
    pub solar: SolarChannelParams,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            kp: 72.0,
            tp: 14.4,
            fs_nominal: 60.0,
            include_solar: true,
            diesel: DieselParams::default(),
            wind: WindParams::default(),
            solar: SolarChannelParams::default(),
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [
            ("system.Kp > 0", self.kp),
            ("system.Tp > 0", self.tp),
            ("system.F > 0", self.fs_nominal),
        ] {
            if !(v > 0.0) {
                return Err(LfcError::InvalidParameter(format!("{what} (got {v})")));
            }
        }
        self.diesel.validate()?;
        self.wind.validate()
    }
}

/// PI gains of the diesel governor, blade pitch and PV controllers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerGains {
    pub kdp: f64,
    pub kdi: f64,
    pub kpp: f64,
    pub kpi: f64,
    pub ksp: f64,
    pub ksi: f64,
}

impl ControllerGains {
    pub const NAMES: [&'static str; 6] = ["Kdp", "Kdi", "Kpp", "Kpi", "Ksp", "Ksi"];

    pub fn to_array(self) -> [f64; 6] {
        [self.kdp, self.kdi, self.kpp, self.kpi, self.ksp, self.ksi]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        ControllerGains {
            kdp: v[0],
            kdi: v[1],
            kpp: v[2],
            kpi: v[3],
            ksp: v[4],
            ksi: v[5],
        }
    }

    pub fn uniform(v: f64) -> Self {
        Self::from_array([v; 6])
    }
}

/// Power balance and system frequency: state `dFs`, inputs `[dPgd, dFt, dPgs, dPl]`.
///
/// Wind generation `Kig (dFt - dFs)` is substituted, which moves `Kig Kp` into
/// the self term. With `include_solar = false` the `dPgs` coupling is zero.
pub fn build_frequency_subsystem(p: &SystemParams) -> Result<StateSpaceModel> {
    let kig = p.wind.kig;
    let r = p.kp / p.tp;
    let a = DMatrix::from_element(1, 1, -(1.0 + kig * p.kp) / p.tp);
    let solar = if p.include_solar { r } else { 0.0 };
    let g = DMatrix::from_row_slice(1, 4, &[r, kig * r, solar, -r]);
    StateSpaceModel::new(
        a,
        DMatrix::zeros(1, 0),
        g,
        &["dFs"],
        &[],
        &["dPgd", "dFt", "dPgs", "dPl"],
    )
}

/// Linear combination of global states, controls and disturbances.
#[derive(Debug, Clone)]
struct Signal {
    x: DVector<f64>,
    u: DVector<f64>,
    p: DVector<f64>,
}

impl Signal {
    fn zero(n: usize, m: usize, k: usize) -> Self {
        Signal {
            x: DVector::zeros(n),
            u: DVector::zeros(m),
            p: DVector::zeros(k),
        }
    }

    fn add_scaled(&mut self, other: &Signal, c: f64) {
        self.x.axpy(c, &other.x, 1.0);
        self.u.axpy(c, &other.u, 1.0);
        self.p.axpy(c, &other.p, 1.0);
    }
}

struct Wiring<'a> {
    blocks: &'a [StateSpaceModel],
    states: Vec<String>,
    controls: Vec<String>,
    disturbances: Vec<String>,
}

impl Wiring<'_> {
    fn zero(&self) -> Signal {
        Signal::zero(
            self.states.len(),
            self.controls.len(),
            self.disturbances.len(),
        )
    }

    fn resolve(&self, label: &str, depth: usize) -> Result<Signal> {
        if depth > self.blocks.len() {
            return Err(LfcError::OrderingMismatch(format!(
                "{label} (algebraic loop)"
            )));
        }
        let mut s = self.zero();
        if let Some(i) = self.states.iter().position(|l| l == label) {
            s.x[i] = 1.0;
            return Ok(s);
        }
        if let Some(i) = self.controls.iter().position(|l| l == label) {
            s.u[i] = 1.0;
            return Ok(s);
        }
        if let Some(i) = self.disturbances.iter().position(|l| l == label) {
            s.p[i] = 1.0;
            return Ok(s);
        }
        for block in self.blocks {
            if let Some(row) = block.output_index(label) {
                return self.block_combination(
                    block,
                    &block.c().row(row).transpose(),
                    &block.dc().row(row).transpose(),
                    &block.dg().row(row).transpose(),
                    depth + 1,
                );
            }
        }
        Err(LfcError::OrderingMismatch(label.to_string()))
    }

    /// Maps `cx x + cu u + cp p`, expressed in a block's local coordinates, to
    /// global coordinates.
    fn block_combination(
        &self,
        block: &StateSpaceModel,
        cx: &DVector<f64>,
        cu: &DVector<f64>,
        cp: &DVector<f64>,
        depth: usize,
    ) -> Result<Signal> {
        let mut s = self.zero();
        for (j, label) in block.state_labels().iter().enumerate() {
            if cx[j] != 0.0 {
                s.add_scaled(&self.resolve(label, depth)?, cx[j]);
            }
        }
        for (j, label) in block.control_labels().iter().enumerate() {
            if cu[j] != 0.0 {
                s.add_scaled(&self.resolve(label, depth)?, cu[j]);
            }
        }
        for (j, label) in block.disturbance_labels().iter().enumerate() {
            if cp[j] != 0.0 {
                s.add_scaled(&self.resolve(label, depth)?, cp[j]);
            }
        }
        Ok(s)
    }
}

/// Open-loop hybrid plant.
///
/// State order `[dFs, dFt, dPgd, dXED11, dXED21, dPcw, dPC1, dPC2, xs1, xs2]`,
/// controls `[dPcd, dPcu, us]`, disturbances `[dPl, dPiw, dPis]`, and derived
/// outputs `[dPgw, dPgs, dP1]` where `dP1` is the surplus power in the balance.
pub fn assemble_plant(p: &SystemParams) -> Result<StateSpaceModel> {
    p.validate()?;
    let blocks = vec![
        build_frequency_subsystem(p)?,
        wind::build_turbine_subsystem(&p.wind)?,
        diesel::build_diesel_subsystem(&p.diesel)?,
        wind::build_pitch_subsystem(&p.wind)?,
        solar::build_solar_subsystem(&p.solar)?,
    ];
    let mut states: Vec<String> = ["dFs", "dFt", "dPgd"]
        .iter()
        .chain(&diesel::STATES[..2])
        .chain(&wind::PITCH_STATES)
        .map(|s| s.to_string())
        .collect();
    states.extend(blocks[4].state_labels().iter().cloned());

    let wiring = Wiring {
        blocks: &blocks,
        states: states.clone(),
        controls: CONTROLS.iter().map(|s| s.to_string()).collect(),
        disturbances: DISTURBANCES.iter().map(|s| s.to_string()).collect(),
    };
    let n = states.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, CONTROLS.len());
    let mut g = DMatrix::zeros(n, DISTURBANCES.len());

    for block in &blocks {
        for (i, label) in block.state_labels().iter().enumerate() {
            let row = states
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| LfcError::OrderingMismatch(label.clone()))?;
            let s = wiring.block_combination(
                block,
                &block.a().row(i).transpose(),
                &block.b().row(i).transpose(),
                &block.g().row(i).transpose(),
                0,
            )?;
            a.row_mut(row).copy_from(&s.x.transpose());
            b.row_mut(row).copy_from(&s.u.transpose());
            g.row_mut(row).copy_from(&s.p.transpose());
        }
    }

    let kig = p.wind.kig;
    let mut dpgw = wiring.zero();
    dpgw.add_scaled(&wiring.resolve("dFt", 0)?, kig);
    dpgw.add_scaled(&wiring.resolve("dFs", 0)?, -kig);
    let dpgs = wiring.resolve("dPgs", 0)?;
    let mut surplus = wiring.resolve("dPgd", 0)?;
    surplus.add_scaled(&dpgw, 1.0);
    if p.include_solar {
        surplus.add_scaled(&dpgs, 1.0);
    }
    surplus.add_scaled(&wiring.resolve("dPl", 0)?, -1.0);
    let outputs = [dpgw, dpgs, surplus];

    let c = DMatrix::from_fn(3, n, |i, j| outputs[i].x[j]);
    let dc = DMatrix::from_fn(3, CONTROLS.len(), |i, j| outputs[i].u[j]);
    let dg = DMatrix::from_fn(3, DISTURBANCES.len(), |i, j| outputs[i].p[j]);

    StateSpaceModel::from_parts(
        a,
        b,
        g,
        states,
        wiring.controls.clone(),
        wiring.disturbances.clone(),
    )?
    .with_outputs(c, dc, dg, OUTPUTS.iter().map(|s| s.to_string()).collect())
}

/// Appends `iFs`, `iFt` with `d(iFs)/dt = dFs`, `d(iFt)/dt = dFt`; the new
/// columns, and the new rows of `B` and `G`, are zero.
pub fn augment_with_integrators(plant: &StateSpaceModel) -> Result<StateSpaceModel> {
    let fs = plant
        .state_index("dFs")
        .ok_or_else(|| LfcError::MissingFrequencyState("dFs".into()))?;
    let ft = plant
        .state_index("dFt")
        .ok_or_else(|| LfcError::MissingFrequencyState("dFt".into()))?;
    let n = plant.n_states();
    let m = plant.n_controls();
    let k = plant.n_disturbances();

    let mut a = DMatrix::zeros(n + 2, n + 2);
    a.view_mut((0, 0), (n, n)).copy_from(plant.a());
    a[(n, fs)] = 1.0;
    a[(n + 1, ft)] = 1.0;
    let mut b = DMatrix::zeros(n + 2, m);
    b.view_mut((0, 0), (n, m)).copy_from(plant.b());
    let mut g = DMatrix::zeros(n + 2, k);
    g.view_mut((0, 0), (n, k)).copy_from(plant.g());

    let q = plant.n_outputs();
    let mut c = DMatrix::zeros(q, n + 2);
    c.view_mut((0, 0), (q, n)).copy_from(plant.c());

    let mut states = plant.state_labels().to_vec();
    states.extend(INTEGRATOR_STATES.iter().map(|s| s.to_string()));
    StateSpaceModel::from_parts(
        a,
        b,
        g,
        states,
        plant.control_labels().to_vec(),
        plant.disturbance_labels().to_vec(),
    )?
    .with_outputs(
        c,
        plant.dc().clone(),
        plant.dg().clone(),
        plant.output_labels().to_vec(),
    )
}

/// Feedback matrix `H` with `u = H x_aug`:
///
/// ```text
/// dPcd = -Kdp dFs - Kdi iFs
/// dPcu =  Kig Kpp (dFs - dFt) + Kig Kpi (iFs - iFt)
/// us   = -Ksp dFs - Ksi iFs
/// ```
///
/// Columns are located by label in `augmented`, never by position.
pub fn build_feedback_matrix(
    gains: &ControllerGains,
    kig: f64,
    augmented: &StateSpaceModel,
) -> Result<DMatrix<f64>> {
    let col = |l: &str| {
        augmented
            .state_index(l)
            .ok_or_else(|| LfcError::OrderingMismatch(l.to_string()))
    };
    let row = |l: &str| {
        augmented
            .control_index(l)
            .ok_or_else(|| LfcError::OrderingMismatch(l.to_string()))
    };
    let (fs, ft, ifs, ift) = (col("dFs")?, col("dFt")?, col("iFs")?, col("iFt")?);
    let (d, w, s) = (row("dPcd")?, row("dPcu")?, row("us")?);

    let mut h = DMatrix::zeros(augmented.n_controls(), augmented.n_states());
    h[(d, fs)] = -gains.kdp;
    h[(d, ifs)] = -gains.kdi;
    h[(w, fs)] = kig * gains.kpp;
    h[(w, ft)] = -kig * gains.kpp;
    h[(w, ifs)] = kig * gains.kpi;
    h[(w, ift)] = -kig * gains.kpi;
    h[(s, fs)] = -gains.ksp;
    h[(s, ifs)] = -gains.ksi;
    Ok(h)
}

/// Plant, its integrator augmentation, the feedback matrix and the closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedModel {
    open_loop: StateSpaceModel,
    augmented: StateSpaceModel,
    h: DMatrix<f64>,
    closed: StateSpaceModel,
}

/// Closes the loop `u = H x` around the integrator-augmented plant:
/// `A_hat = A_bar + B_bar H`, `G_hat = G_bar`.
pub fn close_loop(plant: &StateSpaceModel, h: &DMatrix<f64>) -> Result<AugmentedModel> {
    let augmented = augment_with_integrators(plant)?;
    let (m, n) = (augmented.n_controls(), augmented.n_states());
    if h.nrows() != m || h.ncols() != n {
        return Err(LfcError::DimensionMismatch(format!(
            "H is {}x{}, expected {m}x{n}",
            h.nrows(),
            h.ncols()
        )));
    }
    let ahat = augmented.a() + augmented.b() * h;
    let chat = augmented.c() + augmented.dc() * h;
    let closed = StateSpaceModel::from_parts(
        ahat,
        DMatrix::zeros(n, 0),
        augmented.g().clone(),
        augmented.state_labels().to_vec(),
        Vec::new(),
        augmented.disturbance_labels().to_vec(),
    )?
    .with_outputs(
        chat,
        DMatrix::zeros(augmented.n_outputs(), 0),
        augmented.dg().clone(),
        augmented.output_labels().to_vec(),
    )?;
    Ok(AugmentedModel {
        open_loop: plant.clone(),
        augmented,
        h: h.clone(),
        closed,
    })
}

impl AugmentedModel {
    /// Assembles the plant and closes the loop with the given gains.
    pub fn build(params: &SystemParams, gains: &ControllerGains) -> Result<Self> {
        let plant = assemble_plant(params)?;
        let augmented = augment_with_integrators(&plant)?;
        let h = build_feedback_matrix(gains, params.wind.kig, &augmented)?;
        close_loop(&plant, &h)
    }

    pub fn open_loop(&self) -> &StateSpaceModel {
        &self.open_loop
    }

    /// Integrator-augmented open loop (`A_bar`, `B_bar`, `G_bar`).
    pub fn augmented(&self) -> &StateSpaceModel {
        &self.augmented
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Closed loop with disturbances as the only inputs.
    pub fn closed_loop(&self) -> &StateSpaceModel {
        &self.closed
    }

    pub fn ahat(&self) -> &DMatrix<f64> {
        self.closed.a()
    }

    pub fn ghat(&self) -> &DMatrix<f64> {
        self.closed.g()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        eigenvalues(self.ahat())
    }

    /// All closed-loop eigenvalues have real part below [`STABILITY_MARGIN`].
    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.eigenvalues()?.iter().all(|l| l.re < STABILITY_MARGIN))
    }
}
