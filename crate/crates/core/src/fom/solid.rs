//! Plane-strain Neo-Hookean beam, optionally coupled to steady heat
//! conduction through an isotropic thermal stretch.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fom::continuation::ContinuationSchedule;
use crate::fom::material::NeoHookean;
use crate::fom::mesh::{Edge, MeshSpec, QuadMesh, GAUSS_POINTS};
use crate::fom::newton::NewtonConfig;
use crate::fom::{DofLayout, FomProblem};
use crate::linalg::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Physics {
    Mechanical,
    Thermomechanical,
}

/// `offset + rate · t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ramp {
    pub offset: f64,
    #[serde(default)]
    pub rate: f64,
}

impl Ramp {
    pub fn constant(offset: f64) -> Self {
        Self { offset, rate: 0.0 }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.offset + self.rate * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    X,
    Y,
    T,
}

/// One Dirichlet block: a component prescribed uniformly along an edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletSpec {
    pub edge: Edge,
    pub component: Component,
    pub value: Ramp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    /// Dead pressure pushing into the body along `pressure_edge`.
    pub pressure: Ramp,
    pub pressure_edge: Edge,
    pub initial_temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialBlock {
    pub youngs_modulus: f64,
    pub poissons_ratio: f64,
    #[serde(default)]
    pub density: f64,
    #[serde(default = "default_temperature")]
    pub reference_temperature: f64,
}

fn default_temperature() -> f64 {
    293.0
}

/// Material values of the two block groups plus shared thermal constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Materials {
    pub a: MaterialBlock,
    pub b: MaterialBlock,
    #[serde(default)]
    pub conductivity: f64,
    #[serde(default)]
    pub expansion: f64,
}

impl Materials {
    pub const NAMES: [&'static str; 10] = [
        "E_a", "nu_a", "rho_a", "T_ref_a", "E_b", "nu_b", "rho_b", "T_ref_b", "k", "alpha",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "E_a" => &mut self.a.youngs_modulus,
            "nu_a" => &mut self.a.poissons_ratio,
            "rho_a" => &mut self.a.density,
            "T_ref_a" => &mut self.a.reference_temperature,
            "E_b" => &mut self.b.youngs_modulus,
            "nu_b" => &mut self.b.poissons_ratio,
            "rho_b" => &mut self.b.density,
            "T_ref_b" => &mut self.b.reference_temperature,
            "k" => &mut self.conductivity,
            "alpha" => &mut self.expansion,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.clone().slot(name).map(|v| *v)
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match self.slot(name) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::Config(format!(
                "unknown parameter '{name}' (expected one of {:?})",
                Self::NAMES
            ))),
        }
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        Self::NAMES
            .iter()
            .map(|n| (n.to_string(), self.get(n).expect("known name")))
            .collect()
    }
}

/// Declarative description of a built-in problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub physics: Physics,
    #[serde(default)]
    pub mesh: MeshSpec,
    pub materials: Materials,
    pub loads: LoadSpec,
    pub dirichlet: Vec<DirichletSpec>,
    pub schedule: ContinuationSchedule,
    #[serde(default)]
    pub newton: NewtonConfig,
}

impl ProblemSpec {
    /// Pressurised two-material beam clamped in x on the left and in y on top.
    pub fn mechanical_beam() -> Self {
        let block = |e: f64| MaterialBlock {
            youngs_modulus: e,
            poissons_ratio: 0.32,
            density: 7920.0,
            reference_temperature: 293.0,
        };
        Self {
            physics: Physics::Mechanical,
            mesh: MeshSpec::default(),
            materials: Materials {
                a: block(1.103e11),
                b: block(1.703e11),
                conductivity: 0.0,
                expansion: 0.0,
            },
            loads: LoadSpec {
                pressure: Ramp {
                    offset: 0.0,
                    rate: 7.2599e4,
                },
                pressure_edge: Edge::Bottom,
                initial_temperature: 293.0,
            },
            dirichlet: vec![
                DirichletSpec {
                    edge: Edge::Left,
                    component: Component::X,
                    value: Ramp::constant(0.0),
                },
                DirichletSpec {
                    edge: Edge::Top,
                    component: Component::Y,
                    value: Ramp::constant(0.0),
                },
            ],
            schedule: ContinuationSchedule {
                t_start: 0.0,
                t_end: 7200.0,
                step: 360.0,
            },
            newton: NewtonConfig::default(),
        }
    }

    /// The mechanical beam with a temperature ramp on the left edge and a
    /// fixed temperature on the right edge.
    pub fn thermomechanical_beam() -> Self {
        let mut s = Self::mechanical_beam();
        s.physics = Physics::Thermomechanical;
        let block = |e: f64| MaterialBlock {
            youngs_modulus: e,
            poissons_ratio: 0.32,
            density: 7.92e-5,
            reference_temperature: 293.0,
        };
        s.materials = Materials {
            a: block(1.103e9),
            b: block(1.703e9),
            conductivity: 1187.0,
            expansion: 1e-5,
        };
        s.loads.pressure = Ramp {
            offset: 0.0,
            rate: 5.0e5,
        };
        s.dirichlet.push(DirichletSpec {
            edge: Edge::Left,
            component: Component::T,
            value: Ramp {
                offset: 293.0,
                rate: 100.0,
            },
        });
        s.dirichlet.push(DirichletSpec {
            edge: Edge::Right,
            component: Component::T,
            value: Ramp::constant(293.0),
        });
        s.schedule = ContinuationSchedule {
            t_start: 0.0,
            t_end: 1.0,
            step: 0.05,
        };
        s
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.schedule.validate()?;
        spec.newton.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<SolidProblem> {
        SolidProblem::new(self)
    }
}

/// Finite-element problem built from a [`ProblemSpec`].
#[derive(Clone, Debug)]
pub struct SolidProblem {
    physics: Physics,
    mesh: QuadMesh,
    models: [NeoHookean; 2],
    reference_temperature: [f64; 2],
    conductivity: f64,
    expansion: f64,
    materials: Materials,
    loads: LoadSpec,
    layout: DofLayout,
    /// Ramp of each constrained dof, ordered like `layout.dbc_dofs()`.
    dbc_ramps: Vec<Ramp>,
    t_start: f64,
}

/// Pressure-loaded Neo-Hookean problem with displacement dofs only.
pub fn mechanical_problem(mesh: &MeshSpec, materials: &Materials) -> Result<SolidProblem> {
    let mut spec = ProblemSpec::mechanical_beam();
    spec.mesh = mesh.clone();
    spec.materials = materials.clone();
    SolidProblem::new(&spec)
}

/// Monolithic displacement-temperature problem, `[ux, uy, T]` per node.
pub fn thermomechanical_problem(mesh: &MeshSpec, materials: &Materials) -> Result<SolidProblem> {
    let mut spec = ProblemSpec::thermomechanical_beam();
    spec.mesh = mesh.clone();
    spec.materials = materials.clone();
    SolidProblem::new(&spec)
}

struct ElementOutput {
    dofs: Vec<usize>,
    residual: Vec<f64>,
    stiffness: Option<Vec<f64>>,
    energy: f64,
}

impl SolidProblem {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        spec.schedule.validate()?;
        let mesh = QuadMesh::structured(&spec.mesh)?;
        if spec.mesh.groups.iter().any(|&g| g > 1) {
            return Err(Error::Config("material groups must be 0 (a) or 1 (b)".into()));
        }
        let m = &spec.materials;
        let models = [
            NeoHookean::from_young_poisson(m.a.youngs_modulus, m.a.poissons_ratio)?,
            NeoHookean::from_young_poisson(m.b.youngs_modulus, m.b.poissons_ratio)?,
        ];
        let thermal = spec.physics == Physics::Thermomechanical;
        if thermal {
            if !(m.conductivity > 0.0) {
                return Err(Error::InvalidInput("conductivity must be positive".into()));
            }
            if !(m.a.reference_temperature > 0.0 && m.b.reference_temperature > 0.0) {
                return Err(Error::InvalidInput("reference temperatures must be positive".into()));
            }
            if !m.expansion.is_finite() {
                return Err(Error::InvalidInput("expansion coefficient must be finite".into()));
            }
        }
        let ndpn = if thermal { 3 } else { 2 };
        let mut claimed = vec![false; mesh.num_nodes() * ndpn];
        let mut blocks = Vec::new();
        let mut ramps = Vec::new();
        for d in &spec.dirichlet {
            let comp = match d.component {
                Component::X => 0,
                Component::Y => 1,
                Component::T if thermal => 2,
                Component::T => {
                    return Err(Error::Config("temperature condition on a mechanical problem".into()));
                }
            };
            let block: Vec<usize> = mesh
                .edge_nodes(d.edge)
                .iter()
                .map(|&n| n * ndpn + comp)
                .filter(|&dof| !std::mem::replace(&mut claimed[dof], true))
                .collect();
            if !block.is_empty() {
                blocks.push(block);
                ramps.push(d.value);
            }
        }
        let layout = DofLayout::new(mesh.num_nodes() * ndpn, blocks.clone())?;
        let mut ramp_of = vec![Ramp::constant(0.0); layout.total_dofs()];
        for (block, ramp) in blocks.iter().zip(&ramps) {
            for &d in block {
                ramp_of[d] = *ramp;
            }
        }
        let dbc_ramps = layout.dbc_dofs().iter().map(|&d| ramp_of[d]).collect();
        Ok(Self {
            physics: spec.physics,
            mesh,
            models,
            reference_temperature: [m.a.reference_temperature, m.b.reference_temperature],
            conductivity: m.conductivity,
            expansion: m.expansion,
            materials: m.clone(),
            loads: spec.loads.clone(),
            layout,
            dbc_ramps,
            t_start: spec.schedule.t_start,
        })
    }

    pub fn mesh(&self) -> &QuadMesh {
        &self.mesh
    }

    pub fn physics(&self) -> Physics {
        self.physics
    }

    pub fn dofs_per_node(&self) -> usize {
        match self.physics {
            Physics::Mechanical => 2,
            Physics::Thermomechanical => 3,
        }
    }

    /// Displacement dof indices (both components).
    pub fn displacement_dofs(&self) -> Vec<usize> {
        let n = self.dofs_per_node();
        (0..self.layout.total_dofs()).filter(|d| d % n < 2).collect()
    }

    /// Temperature dof indices; empty for the mechanical problem.
    pub fn temperature_dofs(&self) -> Vec<usize> {
        if self.physics == Physics::Mechanical {
            return Vec::new();
        }
        (0..self.layout.total_dofs()).filter(|d| d % 3 == 2).collect()
    }

    /// Total strain energy `∫ W dA`.
    pub fn stored_energy(&self, state: &[f64]) -> Result<f64> {
        self.check_len(state)?;
        let out = self.elements(state, false)?;
        Ok(out.iter().map(|e| e.energy).sum())
    }

    /// Internal force (mechanical rows) and heat-flux residual (thermal rows),
    /// without external loads or Dirichlet rows.
    pub fn internal_force(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.check_len(state)?;
        let mut r = vec![0.0; self.layout.total_dofs()];
        for e in self.elements(state, false)? {
            for (a, &d) in e.dofs.iter().enumerate() {
                r[d] += e.residual[a];
            }
        }
        Ok(r)
    }

    fn check_len(&self, state: &[f64]) -> Result<()> {
        if state.len() != self.layout.total_dofs() {
            return Err(Error::dims(self.layout.total_dofs(), state.len()));
        }
        Ok(())
    }

    fn elements(&self, state: &[f64], with_jacobian: bool) -> Result<Vec<ElementOutput>> {
        (0..self.mesh.num_elements())
            .into_par_iter()
            .map(|e| self.element(e, state, with_jacobian))
            .collect()
    }

    fn element(&self, e: usize, state: &[f64], with_jacobian: bool) -> Result<ElementOutput> {
        let ndpn = self.dofs_per_node();
        let thermal = self.physics == Physics::Thermomechanical;
        let conn = self.mesh.elements()[e];
        let nd = 4 * ndpn;
        let dofs: Vec<usize> = conn
            .iter()
            .flat_map(|&n| (0..ndpn).map(move |c| n * ndpn + c))
            .collect();
        let group = self.mesh.element_group(e);
        let model = &self.models[group];
        let mut res = vec![0.0; nd];
        let mut k = if with_jacobian { Some(vec![0.0; nd * nd]) } else { None };
        let mut energy = 0.0;

        for gp in GAUSS_POINTS {
            let (n, g, det) = self.mesh.physical_gradients(e, gp[0], gp[1]);
            let mut f = [[1.0, 0.0], [0.0, 1.0]];
            for a in 0..4 {
                for i in 0..2 {
                    let u = state[dofs[a * ndpn + i]];
                    for kk in 0..2 {
                        f[i][kk] += u * g[a][kk];
                    }
                }
            }
            let (theta, dtheta_dt) = if thermal {
                let temp: f64 = (0..4).map(|a| n[a] * state[dofs[a * ndpn + 2]]).sum();
                let th = (self.expansion * (temp - self.reference_temperature[group])).exp();
                (th, self.expansion * th)
            } else {
                (1.0, 0.0)
            };
            let sp = model.evaluate(&f, theta).map_err(|err| match err {
                Error::ElementInversion { det, .. } => Error::ElementInversion { element: e, det },
                other => other,
            })?;
            energy += det * sp.energy;

            for a in 0..4 {
                for i in 0..2 {
                    res[a * ndpn + i] += det * (sp.stress[i][0] * g[a][0] + sp.stress[i][1] * g[a][1]);
                }
            }
            if thermal {
                let grad_t: [f64; 2] = std::array::from_fn(|kk| (0..4).map(|b| g[b][kk] * state[dofs[b * ndpn + 2]]).sum());
                for a in 0..4 {
                    res[a * ndpn + 2] += det * self.conductivity * (g[a][0] * grad_t[0] + g[a][1] * grad_t[1]);
                }
            }

            let Some(k) = k.as_mut() else { continue };
            for a in 0..4 {
                for i in 0..2 {
                    let row = (a * ndpn + i) * nd;
                    for b in 0..4 {
                        for j in 0..2 {
                            let mut v = 0.0;
                            for kk in 0..2 {
                                for l in 0..2 {
                                    v += g[a][kk] * sp.tangent[i][kk][j][l] * g[b][l];
                                }
                            }
                            k[row + b * ndpn + j] += det * v;
                        }
                        if thermal {
                            let dp = (0..2).map(|kk| g[a][kk] * sp.stress_theta[i][kk]).sum::<f64>();
                            k[row + b * ndpn + 2] += det * dp * dtheta_dt * n[b];
                        }
                    }
                }
                if thermal {
                    let row = (a * ndpn + 2) * nd;
                    for b in 0..4 {
                        k[row + b * ndpn + 2] += det * self.conductivity * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                    }
                }
            }
        }
        Ok(ElementOutput {
            dofs,
            residual: res,
            stiffness: k,
            energy,
        })
    }

    /// Consistent nodal forces of the dead pressure at time `t`.
    fn external_force(&self, t: f64) -> Vec<f64> {
        let ndpn = self.dofs_per_node();
        let mut f = vec![0.0; self.layout.total_dofs()];
        let p = self.loads.pressure.value(t);
        if p == 0.0 {
            return f;
        }
        let normal = match self.loads.pressure_edge {
            Edge::Left => [1.0, 0.0],
            Edge::Right => [-1.0, 0.0],
            Edge::Bottom => [0.0, 1.0],
            Edge::Top => [0.0, -1.0],
        };
        let nodes = self.mesh.edge_nodes(self.loads.pressure_edge);
        let xy = self.mesh.coords();
        for pair in nodes.windows(2) {
            let (a, b) = (xy[pair[0]], xy[pair[1]]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            for &node in pair {
                for c in 0..2 {
                    f[node * ndpn + c] += 0.5 * p * len * normal[c];
                }
            }
        }
        f
    }
}

impl FomProblem for SolidProblem {
    fn layout(&self) -> &DofLayout {
        &self.layout
    }

    fn initial_state(&self) -> Vec<f64> {
        let ndpn = self.dofs_per_node();
        let mut w = vec![0.0; self.layout.total_dofs()];
        if ndpn == 3 {
            for d in (2..w.len()).step_by(3) {
                w[d] = self.loads.initial_temperature;
            }
        }
        self.layout.impose_dbc(&mut w, &self.dirichlet_values(self.t_start));
        w
    }

    fn dirichlet_values(&self, t: f64) -> Vec<f64> {
        self.dbc_ramps.iter().map(|r| r.value(t)).collect()
    }

    fn residual(&self, state: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut r = self.internal_force(state)?;
        for (ri, fi) in r.iter_mut().zip(self.external_force(t)) {
            *ri -= fi;
        }
        let g = self.dirichlet_values(t);
        for (&d, gd) in self.layout.dbc_dofs().iter().zip(g) {
            r[d] = state[d] - gd;
        }
        Ok(r)
    }

    fn jacobian_full(&self, state: &[f64], _t: f64) -> Result<SparseMatrix> {
        self.check_len(state)?;
        let n = self.layout.total_dofs();
        let mut is_dbc = vec![false; n];
        for &d in self.layout.dbc_dofs() {
            is_dbc[d] = true;
        }
        let elems = self.elements(state, true)?;
        let nd = 4 * self.dofs_per_node();
        let mut trip = Vec::with_capacity(elems.len() * nd * nd + n);
        for e in &elems {
            let k = e.stiffness.as_ref().expect("stiffness requested");
            for (a, &ra) in e.dofs.iter().enumerate() {
                if is_dbc[ra] {
                    continue;
                }
                for (b, &cb) in e.dofs.iter().enumerate() {
                    trip.push((ra, cb, k[a * nd + b]));
                }
            }
        }
        trip.extend(self.layout.dbc_dofs().iter().map(|&d| (d, d, 1.0)));
        Ok(SparseMatrix::from_triplets(n, n, &trip))
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        self.materials.to_map()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_problem_sizes() {
        let m = ProblemSpec::mechanical_beam().build().unwrap();
        assert_eq!(m.layout().total_dofs(), 210);
        assert_eq!(m.layout().dbc_blocks().len(), 2);
        let t = ProblemSpec::thermomechanical_beam().build().unwrap();
        assert_eq!(t.layout().total_dofs(), 315);
        assert_eq!(t.layout().dbc_blocks().len(), 4);
        assert_eq!(t.temperature_dofs().len(), 105);
    }

    #[test]
    fn parameter_names_round_trip() {
        let mut m = ProblemSpec::thermomechanical_beam().materials;
        m.set("T_ref_b", 300.0).unwrap();
        assert_eq!(m.get("T_ref_b"), Some(300.0));
        assert!(m.set("bogus", 1.0).is_err());
        assert_eq!(m.to_map().len(), Materials::NAMES.len());
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = ProblemSpec::thermomechanical_beam();
        let text = spec.to_toml_string().unwrap();
        assert_eq!(ProblemSpec::from_toml_str(&text).unwrap(), spec);
    }

    #[test]
    fn temperature_condition_needs_thermal_physics() {
        let mut spec = ProblemSpec::mechanical_beam();
        spec.dirichlet.push(ProblemSpec::thermomechanical_beam().dirichlet[2].clone());
        assert!(spec.build().is_err());
    }
}
