//! The experiment systems: Kepler's problem, planar point vortices,
//! Lotka-Volterra, and the trivial two-dimensional toy whose exact flow is
//! the identity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::system::VelocityLinearSystem;

// ---------------------------------------------------------------------------
// Kepler

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerParams {
    pub e: f64,
    pub a_axis: f64,
    /// Offset subtracted from the energy; `-1/(2a)` puts `H = 0` on the orbit.
    pub h0: f64,
}

impl Default for KeplerParams {
    fn default() -> Self {
        KeplerParams {
            e: 0.5,
            a_axis: 1.0,
            h0: -0.5,
        }
    }
}

impl KeplerParams {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.e) {
            return Err(Error::InvalidParameter(format!(
                "eccentricity must satisfy 0 <= e < 1, got {}",
                self.e
            )));
        }
        if !(self.a_axis > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "semi-major axis must be positive, got {}",
                self.a_axis
            )));
        }
        Ok(())
    }

    /// Pericenter state `(x, y, p_x, p_y)` of the orbit, unit gravitational
    /// parameter.
    pub fn pericenter(&self) -> Vec<f64> {
        let (e, a) = (self.e, self.a_axis);
        vec![
            (1.0 - e) * a,
            0.0,
            0.0,
            ((1.0 + e) / ((1.0 - e) * a)).sqrt(),
        ]
    }

    /// Orbital period `2π a^{3/2}`.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.a_axis.powf(1.5)
    }
}

/// Two-body problem in the phase variables `q = (x, y, p_x, p_y)` with
/// `α(q) = ½(q³, q⁴, −q¹, −q²)`.
#[derive(Debug, Clone)]
pub struct Kepler {
    params: KeplerParams,
}

pub fn kepler_system(params: KeplerParams) -> Result<Kepler> {
    params.validate()?;
    Ok(Kepler { params })
}

impl Kepler {
    pub fn params(&self) -> &KeplerParams {
        &self.params
    }

    fn lambda() -> Matrix {
        let mut l = Matrix::zeros(4, 4);
        l[(0, 2)] = -1.0;
        l[(1, 3)] = -1.0;
        l[(2, 0)] = 1.0;
        l[(3, 1)] = 1.0;
        l
    }
}

impl VelocityLinearSystem for Kepler {
    fn dim(&self) -> usize {
        4
    }

    fn name(&self) -> &str {
        "kepler"
    }

    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        vec![0.5 * q[2], 0.5 * q[3], -0.5 * q[0], -0.5 * q[1]]
    }

    fn d_alpha(&self, _q: &[f64]) -> Matrix {
        Kepler::lambda().scale(-0.5)
    }

    fn d2_alpha_vp(&self, _q: &[f64], _v: &[f64]) -> Matrix {
        Matrix::zeros(4, 4)
    }

    fn hamiltonian(&self, q: &[f64]) -> f64 {
        let r = q[0].hypot(q[1]);
        0.5 * (q[2] * q[2] + q[3] * q[3]) - 1.0 / r - self.params.h0
    }

    fn dh(&self, q: &[f64]) -> Vec<f64> {
        let r2 = q[0] * q[0] + q[1] * q[1];
        let r3 = r2 * r2.sqrt();
        vec![q[0] / r3, q[1] / r3, q[2], q[3]]
    }

    fn d2h(&self, q: &[f64]) -> Matrix {
        let (x, y) = (q[0], q[1]);
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let r3 = r2 * r;
        let r5 = r3 * r2;
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = 1.0 / r3 - 3.0 * x * x / r5;
        m[(0, 1)] = -3.0 * x * y / r5;
        m[(1, 0)] = m[(0, 1)];
        m[(1, 1)] = 1.0 / r3 - 3.0 * y * y / r5;
        m[(2, 2)] = 1.0;
        m[(3, 3)] = 1.0;
        m
    }

    fn linear_alpha(&self) -> Option<Matrix> {
        Some(Kepler::lambda())
    }

    fn check_domain(&self, q: &[f64]) -> Result<()> {
        if q.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: q.len(),
            });
        }
        if q[0] == 0.0 && q[1] == 0.0 {
            return Err(Error::Domain {
                model: "kepler".into(),
                reason: "particle at the attracting center".into(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Point vortices

#[derive(Debug, Clone, PartialEq)]
pub struct VortexParams {
    pub gammas: Vec<f64>,
    pub h0: f64,
}

impl Default for VortexParams {
    fn default() -> Self {
        VortexParams {
            gammas: vec![4.0, 2.0],
            h0: 0.0,
        }
    }
}

impl VortexParams {
    fn validate(&self) -> Result<()> {
        if self.gammas.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two vortices, got {}",
                self.gammas.len()
            )));
        }
        if let Some(i) = self.gammas.iter().position(|g| *g == 0.0 || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "circulation gamma[{i}] must be finite and nonzero"
            )));
        }
        Ok(())
    }

    fn pair(&self) -> Result<(f64, f64)> {
        match self.gammas.as_slice() {
            [g1, g2] if g1 + g2 != 0.0 => Ok((*g1, *g2)),
            [_, _] => Err(Error::InvalidParameter(
                "vortex pair with zero total circulation has no rotating solution".into(),
            )),
            g => Err(Error::InvalidParameter(format!(
                "closed-form solution needs exactly two vortices, got {}",
                g.len()
            ))),
        }
    }

    /// Angular velocity of a co-rotating pair at separation `d`.
    pub fn pair_angular_velocity(&self, d: f64) -> Result<f64> {
        let (g1, g2) = self.pair()?;
        Ok((g1 + g2) / (2.0 * PI * d * d))
    }

    /// Pair on the x-axis with the center of vorticity at the origin.
    pub fn pair_initial(&self, d: f64) -> Result<Vec<f64>> {
        vortex_exact(self, d, 0.0)
    }
}

/// `K` point vortices, `q = (x₁, y₁, …, x_K, y_K)`,
/// `α = ½(−Γ₁y₁, Γ₁x₁, …)`.
#[derive(Debug, Clone)]
pub struct PointVortices {
    params: VortexParams,
    name: String,
}

pub fn vortex_system(params: VortexParams) -> Result<PointVortices> {
    params.validate()?;
    let name = if params.gammas.len() == 2 {
        "vortex2".to_string()
    } else {
        format!("vortex{}", params.gammas.len())
    };
    Ok(PointVortices { params, name })
}

impl PointVortices {
    pub fn params(&self) -> &VortexParams {
        &self.params
    }

    fn count(&self) -> usize {
        self.params.gammas.len()
    }

    /// Pairs `(i, j)` with `c = Γ_iΓ_j/(4π)` and the offset `(dx, dy)`.
    fn pairs(&self, q: &[f64]) -> Vec<(usize, usize, f64, f64, f64)> {
        let k = self.count();
        let g = &self.params.gammas;
        let mut out = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                let dx = q[2 * i] - q[2 * j];
                let dy = q[2 * i + 1] - q[2 * j + 1];
                out.push((i, j, g[i] * g[j] / (4.0 * PI), dx, dy));
            }
        }
        out
    }
}

impl VelocityLinearSystem for PointVortices {
    fn dim(&self) -> usize {
        2 * self.count()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.dim()];
        for (i, g) in self.params.gammas.iter().enumerate() {
            a[2 * i] = -0.5 * g * q[2 * i + 1];
            a[2 * i + 1] = 0.5 * g * q[2 * i];
        }
        a
    }

    fn d_alpha(&self, _q: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for (i, g) in self.params.gammas.iter().enumerate() {
            m[(2 * i, 2 * i + 1)] = -0.5 * g;
            m[(2 * i + 1, 2 * i)] = 0.5 * g;
        }
        m
    }

    fn d2_alpha_vp(&self, _q: &[f64], _v: &[f64]) -> Matrix {
        Matrix::zeros(self.dim(), self.dim())
    }

    fn hamiltonian(&self, q: &[f64]) -> f64 {
        self.pairs(q)
            .into_iter()
            .map(|(_, _, c, dx, dy)| c * (dx * dx + dy * dy).ln())
            .sum::<f64>()
            - self.params.h0
    }

    fn dh(&self, q: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for (i, j, c, dx, dy) in self.pairs(q) {
            let d2 = dx * dx + dy * dy;
            let (gx, gy) = (2.0 * c * dx / d2, 2.0 * c * dy / d2);
            g[2 * i] += gx;
            g[2 * i + 1] += gy;
            g[2 * j] -= gx;
            g[2 * j + 1] -= gy;
        }
        g
    }

    fn d2h(&self, q: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim(), self.dim());
        for (i, j, c, dx, dy) in self.pairs(q) {
            let d2 = dx * dx + dy * dy;
            let d4 = d2 * d2;
            let hxx = c * (2.0 / d2 - 4.0 * dx * dx / d4);
            let hxy = c * (-4.0 * dx * dy / d4);
            let hyy = c * (2.0 / d2 - 4.0 * dy * dy / d4);
            let local = [[hxx, hxy], [hxy, hyy]];
            for (a, b, sign) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
                for (r, row) in local.iter().enumerate() {
                    for (s, v) in row.iter().enumerate() {
                        m[(2 * a + r, 2 * b + s)] += sign * v;
                    }
                }
            }
        }
        m
    }

    fn linear_alpha(&self) -> Option<Matrix> {
        Some(self.d_alpha(&[]).scale(-2.0))
    }

    fn check_domain(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.len(),
            });
        }
        if let Some((i, j, ..)) = self
            .pairs(q)
            .into_iter()
            .find(|(_, _, _, dx, dy)| *dx == 0.0 && *dy == 0.0)
        {
            return Err(Error::Domain {
                model: self.name.clone(),
                reason: format!("vortices {i} and {j} coincide"),
            });
        }
        Ok(())
    }
}

/// Closed-form positions `(x₁, y₁, x₂, y₂)` of a co-rotating vortex pair at
/// separation `d`, started on the x-axis.
pub fn vortex_exact(params: &VortexParams, d: f64, t: f64) -> Result<Vec<f64>> {
    let (g1, g2) = params.pair()?;
    let omega = params.pair_angular_velocity(d)?;
    let (s, c) = (omega * t).sin_cos();
    let r1 = g2 / (g1 + g2) * d;
    let r2 = -g1 / (g1 + g2) * d;
    Ok(vec![r1 * c, r1 * s, r2 * c, r2 * s])
}

// ---------------------------------------------------------------------------
// Lotka-Volterra

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotkaVolterraParams {
    pub h0: f64,
}

impl Default for LotkaVolterraParams {
    fn default() -> Self {
        LotkaVolterraParams { h0: 2.0 }
    }
}

/// `u̇ = u(v − 2)`, `v̇ = v(1 − u)` from the nonlinear one-form
/// `α(u, v) = (ln v / u + v, u)`.
#[derive(Debug, Clone)]
pub struct LotkaVolterra {
    params: LotkaVolterraParams,
}

pub fn lotka_volterra_system(params: LotkaVolterraParams) -> LotkaVolterra {
    LotkaVolterra { params }
}

impl VelocityLinearSystem for LotkaVolterra {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "lotka_volterra"
    }

    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        let (u, v) = (q[0], q[1]);
        vec![v.ln() / u + v, u]
    }

    fn d_alpha(&self, q: &[f64]) -> Matrix {
        let (u, v) = (q[0], q[1]);
        Matrix::from_rows(&[[-v.ln() / (u * u), 1.0 / (u * v) + 1.0], [1.0, 0.0]])
    }

    fn d2_alpha_vp(&self, q: &[f64], w: &[f64]) -> Matrix {
        // only α₁ is nonlinear
        let (u, v) = (q[0], q[1]);
        let uv = -1.0 / (u * u * v);
        Matrix::from_rows(&[[2.0 * v.ln() / (u * u * u), uv], [uv, -1.0 / (u * v * v)]]).scale(w[0])
    }

    fn hamiltonian(&self, q: &[f64]) -> f64 {
        let (u, v) = (q[0], q[1]);
        u - u.ln() + v - 2.0 * v.ln() - self.params.h0
    }

    fn dh(&self, q: &[f64]) -> Vec<f64> {
        vec![1.0 - 1.0 / q[0], 1.0 - 2.0 / q[1]]
    }

    fn d2h(&self, q: &[f64]) -> Matrix {
        Matrix::from_diagonal(&[1.0 / (q[0] * q[0]), 2.0 / (q[1] * q[1])])
    }

    fn check_domain(&self, q: &[f64]) -> Result<()> {
        if q.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: q.len(),
            });
        }
        if !(q[0] > 0.0 && q[1] > 0.0) {
            return Err(Error::Domain {
                model: "lotka_volterra".into(),
                reason: format!("populations must be positive, got ({}, {})", q[0], q[1]),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Toy

/// `L = ½y ẋ − ½x ẏ` with `H ≡ 0`: every point is a fixed point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Toy;

pub fn toy_system() -> Toy {
    Toy
}

impl VelocityLinearSystem for Toy {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "toy"
    }

    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        vec![0.5 * q[1], -0.5 * q[0]]
    }

    fn d_alpha(&self, _q: &[f64]) -> Matrix {
        Matrix::from_rows(&[[0.0, 0.5], [-0.5, 0.0]])
    }

    fn d2_alpha_vp(&self, _q: &[f64], _v: &[f64]) -> Matrix {
        Matrix::zeros(2, 2)
    }

    fn hamiltonian(&self, _q: &[f64]) -> f64 {
        0.0
    }

    fn dh(&self, _q: &[f64]) -> Vec<f64> {
        vec![0.0, 0.0]
    }

    fn d2h(&self, _q: &[f64]) -> Matrix {
        Matrix::zeros(2, 2)
    }

    fn linear_alpha(&self) -> Option<Matrix> {
        Some(Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]]))
    }
}

// ---------------------------------------------------------------------------
// Registry

/// Parameter overrides accepted by [`model_by_id`].
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOverrides {
    pub e: Option<f64>,
    pub a_axis: Option<f64>,
    pub h0: Option<f64>,
    pub gammas: Option<Vec<f64>>,
    pub separation: Option<f64>,
}

/// A model ready to integrate: the system, its standard initial condition
/// and the horizon used in the convergence experiments.
pub struct ModelSetup {
    pub id: String,
    pub system: Box<dyn VelocityLinearSystem>,
    pub q0: Vec<f64>,
    pub t_final: f64,
    /// Closed-form `q(t)` when one is known.
    pub exact: Option<Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl std::fmt::Debug for ModelSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelSetup")
            .field("id", &self.id)
            .field("q0", &self.q0)
            .field("t_final", &self.t_final)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

pub const MODEL_IDS: [&str; 4] = ["kepler", "vortex2", "lotka_volterra", "toy"];

pub fn model_by_id(id: &str, o: &ModelOverrides) -> Result<ModelSetup> {
    match id {
        "kepler" => {
            let d = KeplerParams::default();
            let params = KeplerParams {
                e: o.e.unwrap_or(d.e),
                a_axis: o.a_axis.unwrap_or(d.a_axis),
                h0: o.h0.unwrap_or(d.h0),
            };
            let system = kepler_system(params)?;
            Ok(ModelSetup {
                id: id.into(),
                q0: params.pericenter(),
                system: Box::new(system),
                t_final: 7.0,
                exact: None,
            })
        }
        "vortex2" => {
            let d = VortexParams::default();
            let params = VortexParams {
                gammas: o.gammas.clone().unwrap_or(d.gammas),
                h0: o.h0.unwrap_or(d.h0),
            };
            let sep = o.separation.unwrap_or(1.0);
            if !(sep > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "separation must be positive, got {sep}"
                )));
            }
            let system = vortex_system(params.clone())?;
            let q0 = params.pair_initial(sep)?;
            Ok(ModelSetup {
                id: id.into(),
                system: Box::new(system),
                q0,
                t_final: 7.0,
                exact: Some(Box::new(move |t| {
                    vortex_exact(&params, sep, t).expect("validated pair")
                })),
            })
        }
        "lotka_volterra" => {
            let params = LotkaVolterraParams {
                h0: o.h0.unwrap_or(LotkaVolterraParams::default().h0),
            };
            Ok(ModelSetup {
                id: id.into(),
                system: Box::new(lotka_volterra_system(params)),
                q0: vec![1.0, 1.0],
                t_final: 5.0,
                exact: None,
            })
        }
        "toy" => Ok(ModelSetup {
            id: id.into(),
            system: Box::new(toy_system()),
            q0: vec![1.0, 2.0],
            t_final: 1.0,
            exact: Some(Box::new(|_| vec![1.0, 2.0])),
        }),
        other => Err(Error::UnknownModel(other.into())),
    }
}
