//! Compressible Neo-Hookean solid in plane strain with an isotropic thermal
//! stretch.
//!
//! `W = κ/2 [(J² − 1)/2 − ln J] + μ/2 [J^{-2/3} tr b − 3]` evaluated on the
//! mechanical part `F_M = F θ⁻¹` of the 3×3 deformation gradient, where the
//! in-plane block is `F` and `F₃₃ = 1`.

use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];
pub type Tangent = [[[[f64; 2]; 2]; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeoHookean {
    pub kappa: f64,
    pub mu: f64,
}

/// Energy, first Piola stress, its derivative w.r.t. `F` and w.r.t. `θ`.
#[derive(Clone, Copy, Debug)]
pub struct StressPoint {
    pub energy: f64,
    pub stress: Mat2,
    pub tangent: Tangent,
    pub stress_theta: Mat2,
}

impl NeoHookean {
    pub fn from_young_poisson(youngs: f64, poisson: f64) -> Result<Self> {
        if !(youngs > 0.0) || !(poisson > 0.0 && poisson < 0.5) {
            return Err(Error::InvalidInput(format!(
                "need E > 0 and 0 < nu < 0.5, got E = {youngs}, nu = {poisson}"
            )));
        }
        Ok(Self {
            kappa: bulk_modulus(youngs, poisson),
            mu: shear_modulus(youngs, poisson),
        })
    }

    /// Strain energy of a full 3×3 deformation gradient.
    pub fn energy_3d(&self, f: &[[f64; 3]; 3]) -> Result<f64> {
        let j = det3(f);
        if !(j > 0.0) {
            return Err(Error::ElementInversion { element: 0, det: j });
        }
        let trb: f64 = f.iter().flatten().map(|v| v * v).sum();
        Ok(self.energy_invariants(j, trb))
    }

    fn energy_invariants(&self, j: f64, trb: f64) -> f64 {
        0.5 * self.kappa * (0.5 * (j * j - 1.0) - j.ln()) + 0.5 * self.mu * (j.powf(-2.0 / 3.0) * trb - 3.0)
    }

    /// Plane-strain evaluation at in-plane gradient `f` and thermal stretch `theta`.
    pub fn evaluate(&self, f: &Mat2, theta: f64) -> Result<StressPoint> {
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::ElementInversion { element: 0, det });
        }
        let finv = [
            [f[1][1] / det, -f[0][1] / det],
            [-f[1][0] / det, f[0][0] / det],
        ];
        let t2 = theta * theta;
        let j = det / (t2 * theta);
        let norm2: f64 = f.iter().flatten().map(|v| v * v).sum();
        let i1 = (norm2 + 1.0) / t2;
        let (kappa, mu) = (self.kappa, self.mu);

        let jm23 = j.powf(-2.0 / 3.0);
        let jm53 = jm23 / j;
        let a = 0.5 * kappa * (j - 1.0 / j) - mu / 3.0 * jm53 * i1;
        let b = 0.5 * mu * jm23;
        let a_j = 0.5 * kappa * (1.0 + 1.0 / (j * j)) + 5.0 / 9.0 * mu * jm53 / j * i1;
        let a_i = -mu / 3.0 * jm53;
        let b_j = a_i;

        let mut stress = [[0.0; 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                stress[i][k] = a * j * finv[k][i] + 2.0 * b / t2 * f[i][k];
            }
        }

        let mut tangent = [[[[0.0; 2]; 2]; 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                for jj in 0..2 {
                    for l in 0..2 {
                        let dj = j * finv[l][jj];
                        let di = 2.0 / t2 * f[jj][l];
                        let mut v = (a_j * dj + a_i * di) * j * finv[k][i];
                        v += a * dj * finv[k][i];
                        v -= a * j * finv[k][jj] * finv[l][i];
                        v += 2.0 / t2 * b_j * dj * f[i][k];
                        if i == jj && k == l {
                            v += 2.0 * b / t2;
                        }
                        tangent[i][k][jj][l] = v;
                    }
                }
            }
        }

        let dj_dt = -3.0 * j / theta;
        let di_dt = -2.0 * i1 / theta;
        let da_dt = a_j * dj_dt + a_i * di_dt;
        let db_dt = b_j * dj_dt;
        let mut stress_theta = [[0.0; 2]; 2];
        for i in 0..2 {
            for k in 0..2 {
                stress_theta[i][k] = (da_dt * j + a * dj_dt) * finv[k][i]
                    + 2.0 * f[i][k] * (db_dt / t2 - 2.0 * b / (t2 * theta));
            }
        }

        Ok(StressPoint {
            energy: self.energy_invariants(j, i1),
            stress,
            tangent,
            stress_theta,
        })
    }
}

pub fn bulk_modulus(youngs: f64, poisson: f64) -> f64 {
    youngs / (3.0 * (1.0 - 2.0 * poisson))
}

pub fn shear_modulus(youngs: f64, poisson: f64) -> f64 {
    youngs / (2.0 * (1.0 + poisson))
}

fn det3(f: &[[f64; 3]; 3]) -> f64 {
    f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) - f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0])
        + f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0])
}
