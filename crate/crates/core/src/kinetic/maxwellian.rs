use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PhaseGrid;
use crate::lowrank::SvdMatrix;

/// Density, bulk velocity and temperature of a single cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub temperature: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64, temperature: f64) -> Self {
        Primitive {
            rho,
            u,
            temperature,
        }
    }

    pub fn validate(&self, cell: usize) -> Result<()> {
        if self.rho > 0.0 && self.temperature > 0.0 && self.u.is_finite() {
            Ok(())
        } else {
            Err(Error::Positivity {
                cell,
                rho: self.rho,
                temperature: self.temperature,
            })
        }
    }

    /// `(rho, rho u, E)` with `E = (rho u^2 + rho T) / 2`.
    pub fn conserved(&self) -> [f64; 3] {
        let m = self.rho * self.u;
        [
            self.rho,
            m,
            0.5 * (m * self.u + self.rho * self.temperature),
        ]
    }

    pub fn from_conserved(cell: usize, rho: f64, momentum: f64, energy: f64) -> Result<Self> {
        let u = momentum / rho;
        let temperature = (2.0 * energy - momentum * u) / rho;
        let p = Primitive {
            rho,
            u,
            temperature,
        };
        p.validate(cell)?;
        Ok(p)
    }

    /// Maxwellian value at velocity `v`; the state is assumed valid.
    #[inline]
    pub fn maxwellian(&self, v: f64) -> f64 {
        let d = v - self.u;
        self.rho / (2.0 * PI * self.temperature).sqrt() * (-d * d / (2.0 * self.temperature)).exp()
    }
}

/// `rho / sqrt(2 pi T) * exp(-(v - u)^2 / (2 T))`.
pub fn maxwellian(rho: f64, u: f64, temperature: f64, v: f64) -> Result<f64> {
    let p = Primitive::new(rho, u, temperature);
    p.validate(0)?;
    Ok(p.maxwellian(v))
}

/// Conserved and primitive variables per spatial cell.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentField {
    pub rho: Vec<f64>,
    pub momentum: Vec<f64>,
    pub energy: Vec<f64>,
    pub u: Vec<f64>,
    pub temperature: Vec<f64>,
}

impl MomentField {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Builds the field from conserved variables, rejecting `rho <= 0` or `T <= 0`.
    pub fn from_conserved(rho: &[f64], momentum: &[f64], energy: &[f64]) -> Result<Self> {
        let n = rho.len();
        assert!(momentum.len() == n && energy.len() == n);
        let mut u = Vec::with_capacity(n);
        let mut temperature = Vec::with_capacity(n);
        for i in 0..n {
            let p = Primitive::from_conserved(i, rho[i], momentum[i], energy[i])?;
            u.push(p.u);
            temperature.push(p.temperature);
        }
        Ok(MomentField {
            rho: rho.to_vec(),
            momentum: momentum.to_vec(),
            energy: energy.to_vec(),
            u,
            temperature,
        })
    }

    pub fn from_primitives(cells: &[Primitive]) -> Result<Self> {
        let mut rho = Vec::with_capacity(cells.len());
        let mut momentum = Vec::with_capacity(cells.len());
        let mut energy = Vec::with_capacity(cells.len());
        for (i, p) in cells.iter().enumerate() {
            p.validate(i)?;
            let [a, b, c] = p.conserved();
            rho.push(a);
            momentum.push(b);
            energy.push(c);
        }
        Ok(MomentField {
            rho,
            momentum,
            energy,
            u: cells.iter().map(|p| p.u).collect(),
            temperature: cells.iter().map(|p| p.temperature).collect(),
        })
    }

    /// Unpacks a component-major `[rho..., rho u..., E...]` vector.
    pub fn from_packed(state: &[f64]) -> Result<Self> {
        assert_eq!(state.len() % 3, 0);
        let n = state.len() / 3;
        Self::from_conserved(&state[..n], &state[n..2 * n], &state[2 * n..])
    }

    pub fn to_packed(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.len());
        out.extend_from_slice(&self.rho);
        out.extend_from_slice(&self.momentum);
        out.extend_from_slice(&self.energy);
        out
    }

    pub fn cell(&self, i: usize) -> Primitive {
        Primitive {
            rho: self.rho[i],
            u: self.u[i],
            temperature: self.temperature[i],
        }
    }
}

/// Midpoint-rule moments `dv * sum_j f_ij (1, v_j, v_j^2 / 2)` without positivity checks.
pub fn raw_moments_lowrank(f: &SvdMatrix, grid: &PhaseGrid) -> Result<[Vec<f64>; 3]> {
    if f.shape() != grid.shape() {
        return Err(Error::ShapeMismatch {
            expected: grid.shape(),
            found: f.shape(),
        });
    }
    let dv = grid.dv;
    let w0 = vec![dv; grid.nv];
    let w1: Vec<f64> = grid.v_centers.iter().map(|v| dv * v).collect();
    let w2: Vec<f64> = grid.v_centers.iter().map(|v| 0.5 * dv * v * v).collect();
    Ok([f.apply_right(&w0), f.apply_right(&w1), f.apply_right(&w2)])
}

/// Density, momentum and energy of a factored distribution, at `O((nx + nv) r)` cost.
pub fn moments_from_lowrank(f: &SvdMatrix, grid: &PhaseGrid) -> Result<MomentField> {
    let [rho, momentum, energy] = raw_moments_lowrank(f, grid)?;
    MomentField::from_conserved(&rho, &momentum, &energy)
}

/// Midpoint-rule moments of the Maxwellians of `field` on the velocity grid.
pub fn raw_moments_maxwellian(field: &MomentField, grid: &PhaseGrid) -> [Vec<f64>; 3] {
    let mut out = [
        vec![0.0; field.len()],
        vec![0.0; field.len()],
        vec![0.0; field.len()],
    ];
    for i in 0..field.len() {
        let p = field.cell(i);
        for &v in &grid.v_centers {
            let m = p.maxwellian(v) * grid.dv;
            out[0][i] += m;
            out[1][i] += m * v;
            out[2][i] += 0.5 * m * v * v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxwellian_values() {
        let peak = 1.0 / (2.0 * PI).sqrt();
        assert!((maxwellian(1.0, 0.0, 1.0, 0.0).unwrap() - 0.398942280).abs() < 1e-9);
        assert!((maxwellian(1.0, 0.0, 1.0, 0.0).unwrap() - peak).abs() < 1e-16);
        assert!((maxwellian(2.0, 0.5, 0.8, 0.5).unwrap() - 2.0 / (1.6 * PI).sqrt()).abs() < 1e-15);
        assert!((maxwellian(2.0, 0.5, 0.8, 0.5).unwrap() - 0.892062).abs() < 1e-6);
        let edge = maxwellian(1.0, 0.0, 1.0, 10.0).unwrap();
        assert!((edge / ((-50f64).exp() * peak) - 1.0).abs() < 1e-14);
        assert!(maxwellian(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(maxwellian(1.0, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn conserved_roundtrip() {
        let p = Primitive::new(2.0, 0.5, 0.8);
        let [r, m, e] = p.conserved();
        assert_eq!(e, 0.5 * (2.0 * 0.25 + 2.0 * 0.8));
        let q = Primitive::from_conserved(0, r, m, e).unwrap();
        assert!((q.u - 0.5).abs() < 1e-15 && (q.temperature - 0.8).abs() < 1e-15);
        assert!(matches!(
            Primitive::from_conserved(3, 1.0, 0.0, -1.0),
            Err(Error::Positivity { cell: 3, .. })
        ));
    }

    #[test]
    fn packed_roundtrip() {
        let f = MomentField::from_primitives(&[
            Primitive::new(1.0, 0.1, 1.0),
            Primitive::new(0.5, -0.2, 2.0),
        ])
        .unwrap();
        let g = MomentField::from_packed(&f.to_packed()).unwrap();
        for i in 0..2 {
            assert!((g.u[i] - f.u[i]).abs() < 1e-15);
            assert!((g.temperature[i] - f.temperature[i]).abs() < 1e-15);
        }
    }
}
