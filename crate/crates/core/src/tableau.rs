//! Butcher tableaus for (partitioned) Runge-Kutta methods.
//!
//! A [`PartitionedTableau`] carries two coefficient matrices sharing weights
//! and nodes: `a` drives the position stages, `a_bar` the momentum stages.
//! Non-partitioned methods simply have `a_bar == a`.
//!
//! The coefficients below are the standard collocation constructions (Gauss,
//! Radau IIA, Lobatto IIIA) together with the Lobatto IIIB partner. They are
//! checked in the tests against the simplifying assumptions `B(p)`, `C(q)`
//! and the symplecticity condition rather than trusted as typed.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedTableau {
    pub name: String,
    pub a: Matrix,
    pub a_bar: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub classical_order: u32,
    pub stiffly_accurate: bool,
}

impl PartitionedTableau {
    /// Builds a non-partitioned tableau (`a_bar = a`), deriving the stiff
    /// accuracy flag from the coefficients.
    pub fn runge_kutta(
        name: impl Into<String>,
        a: Matrix,
        b: Vec<f64>,
        c: Vec<f64>,
        classical_order: u32,
    ) -> Self {
        Self::partitioned(name, a.clone(), a, b, c, classical_order)
    }

    pub fn partitioned(
        name: impl Into<String>,
        a: Matrix,
        a_bar: Matrix,
        b: Vec<f64>,
        c: Vec<f64>,
        classical_order: u32,
    ) -> Self {
        let s = b.len();
        assert!(a.rows() == s && a.cols() == s && a_bar.rows() == s && a_bar.cols() == s);
        assert_eq!(c.len(), s);
        let stiffly_accurate = (0..s).all(|j| a[(s - 1, j)] == b[j]);
        PartitionedTableau {
            name: name.into(),
            a,
            a_bar,
            b,
            c,
            classical_order,
            stiffly_accurate,
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn is_partitioned(&self) -> bool {
        self.a != self.a_bar
    }

    /// `max_i |c_i − Σ_j a_ij|` for the position tableau.
    pub fn stage_consistency_residual(&self) -> f64 {
        (0..self.stages())
            .map(|i| (self.c[i] - self.a.row(i).iter().sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for PartitionedTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} (s = {}, order {}{})",
            self.name,
            self.stages(),
            self.classical_order,
            if self.stiffly_accurate {
                ", stiffly accurate"
            } else {
                ""
            }
        )?;
        for i in 0..self.stages() {
            write!(f, "  {:>22.16} |", self.c[i])?;
            for j in 0..self.stages() {
                write!(f, " {:>22.16}", self.a[(i, j)])?;
            }
            if self.is_partitioned() {
                write!(f, "  ||")?;
                for j in 0..self.stages() {
                    write!(f, " {:>22.16}", self.a_bar[(i, j)])?;
                }
            }
            writeln!(f)?;
        }
        write!(f, "  {:>22} |", "")?;
        for bj in &self.b {
            write!(f, " {:>22.16}", bj)?;
        }
        writeln!(f)
    }
}

/// s-stage Gauss collocation, order `2s`.
pub fn gauss(s: usize) -> Result<PartitionedTableau> {
    let (a, b, c) = match s {
        1 => (Matrix::from_rows(&[[0.5]]), vec![1.0], vec![0.5]),
        2 => {
            let r = 3f64.sqrt() / 6.0;
            (
                Matrix::from_rows(&[[0.25, 0.25 - r], [0.25 + r, 0.25]]),
                vec![0.5, 0.5],
                vec![0.5 - r, 0.5 + r],
            )
        }
        3 => {
            let r = 15f64.sqrt();
            (
                Matrix::from_rows(&[
                    [5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
                    [5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
                    [5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
                ]),
                vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedStageCount {
                family: "Gauss",
                stages: s,
            })
        }
    };
    Ok(PartitionedTableau::runge_kutta(
        format!("gauss{s}"),
        a,
        b,
        c,
        2 * s as u32,
    ))
}

/// s-stage Radau IIA collocation, order `2s − 1`, stiffly accurate.
pub fn radau_iia(s: usize) -> Result<PartitionedTableau> {
    let (a, c) = match s {
        2 => (
            Matrix::from_rows(&[[5.0 / 12.0, -1.0 / 12.0], [0.75, 0.25]]),
            vec![1.0 / 3.0, 1.0],
        ),
        3 => {
            let r = 6f64.sqrt();
            (
                Matrix::from_rows(&[
                    [
                        (88.0 - 7.0 * r) / 360.0,
                        (296.0 - 169.0 * r) / 1800.0,
                        (-2.0 + 3.0 * r) / 225.0,
                    ],
                    [
                        (296.0 + 169.0 * r) / 1800.0,
                        (88.0 + 7.0 * r) / 360.0,
                        (-2.0 - 3.0 * r) / 225.0,
                    ],
                    [(16.0 - r) / 36.0, (16.0 + r) / 36.0, 1.0 / 9.0],
                ]),
                vec![(4.0 - r) / 10.0, (4.0 + r) / 10.0, 1.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedStageCount {
                family: "Radau IIA",
                stages: s,
            })
        }
    };
    let b = a.row(s - 1).to_vec();
    Ok(PartitionedTableau::runge_kutta(
        format!("radau_iia{s}"),
        a,
        b,
        c,
        2 * s as u32 - 1,
    ))
}

/// s-stage Lobatto IIIA (positions) paired with Lobatto IIIB (momenta),
/// classical order `2s − 2`.
pub fn lobatto_iiia_iiib(s: usize) -> Result<PartitionedTableau> {
    let (a, a_bar, b, c) = match s {
        2 => (
            Matrix::from_rows(&[[0.0, 0.0], [0.5, 0.5]]),
            Matrix::from_rows(&[[0.5, 0.0], [0.5, 0.0]]),
            vec![0.5, 0.5],
            vec![0.0, 1.0],
        ),
        3 => (
            Matrix::from_rows(&[
                [0.0, 0.0, 0.0],
                [5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0],
                [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            ]),
            Matrix::from_rows(&[
                [1.0 / 6.0, -1.0 / 6.0, 0.0],
                [1.0 / 6.0, 1.0 / 3.0, 0.0],
                [1.0 / 6.0, 5.0 / 6.0, 0.0],
            ]),
            vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 1.0],
        ),
        4 => {
            let r = 5f64.sqrt();
            (
                Matrix::from_rows(&[
                    [0.0, 0.0, 0.0, 0.0],
                    [
                        (11.0 + r) / 120.0,
                        (25.0 - r) / 120.0,
                        (25.0 - 13.0 * r) / 120.0,
                        (-1.0 + r) / 120.0,
                    ],
                    [
                        (11.0 - r) / 120.0,
                        (25.0 + 13.0 * r) / 120.0,
                        (25.0 + r) / 120.0,
                        (-1.0 - r) / 120.0,
                    ],
                    [1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
                ]),
                Matrix::from_rows(&[
                    [1.0 / 12.0, (-1.0 - r) / 24.0, (-1.0 + r) / 24.0, 0.0],
                    [
                        1.0 / 12.0,
                        (25.0 + r) / 120.0,
                        (25.0 - 13.0 * r) / 120.0,
                        0.0,
                    ],
                    [
                        1.0 / 12.0,
                        (25.0 + 13.0 * r) / 120.0,
                        (25.0 - r) / 120.0,
                        0.0,
                    ],
                    [1.0 / 12.0, (11.0 - r) / 24.0, (11.0 + r) / 24.0, 0.0],
                ]),
                vec![1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0],
                vec![0.0, (5.0 - r) / 10.0, (5.0 + r) / 10.0, 1.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedStageCount {
                family: "Lobatto IIIA-IIIB",
                stages: s,
            })
        }
    };
    Ok(PartitionedTableau::partitioned(
        format!("lobatto{s}"),
        a,
        a_bar,
        b,
        c,
        2 * s as u32 - 2,
    ))
}

/// The momentum tableau `ā_ij = b_j − (b_j / b_i) a_ji` that makes `(a, ā)`
/// satisfy `b_i ā_ij + b_j a_ji = b_i b_j`.
pub fn conjugate_tableau(a: &Matrix, b: &[f64]) -> Result<Matrix> {
    let s = b.len();
    if a.rows() != s || a.cols() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: a.rows(),
        });
    }
    if let Some(index) = b.iter().position(|&w| w == 0.0) {
        return Err(Error::ZeroWeight { index });
    }
    let mut out = Matrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            out[(i, j)] = b[j] - b[j] / b[i] * a[(j, i)];
        }
    }
    Ok(out)
}

/// `max_ij |b_i ā_ij + b_j a_ji − b_i b_j|`.
pub fn check_symplecticity(t: &PartitionedTableau) -> f64 {
    let s = t.stages();
    let mut worst = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let r = t.b[i] * t.a_bar[(i, j)] + t.b[j] * t.a[(j, i)] - t.b[i] * t.b[j];
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Residuals of the simplifying assumptions up to `up_to`:
///
/// * `B(k)`: `Σ_i b_i c_i^{k−1} − 1/k`
/// * `C(k)`: `max_i |Σ_j a_ij c_j^{k−1} − c_i^k / k|` (position tableau)
///
/// Ids are `"B1"`, `"B2"`, …, `"C1"`, … in that order.
pub fn check_order_conditions(t: &PartitionedTableau, up_to: u32) -> Vec<(String, f64)> {
    let s = t.stages();
    let mut out = Vec::with_capacity(2 * up_to as usize);
    for k in 1..=up_to {
        let kf = k as f64;
        let sum: f64 = (0..s).map(|i| t.b[i] * t.c[i].powi(k as i32 - 1)).sum();
        out.push((format!("B{k}"), (sum - 1.0 / kf).abs()));
    }
    for k in 1..=up_to {
        let kf = k as f64;
        let worst = (0..s)
            .map(|i| {
                let lhs: f64 = (0..s)
                    .map(|j| t.a[(i, j)] * t.c[j].powi(k as i32 - 1))
                    .sum();
                (lhs - t.c[i].powi(k as i32) / kf).abs()
            })
            .fold(0.0, f64::max);
        out.push((format!("C{k}"), worst));
    }
    out
}

pub const METHOD_IDS: [&str; 8] = [
    "gauss1",
    "gauss2",
    "gauss3",
    "radau_iia2",
    "radau_iia3",
    "lobatto2",
    "lobatto3",
    "lobatto4",
];

/// Looks up a shipped tableau by id (`"gauss2"`, `"radau_iia3"`, `"lobatto3"`, …).
pub fn tableau_by_id(id: &str) -> Result<PartitionedTableau> {
    let unknown = || Error::UnknownMethod(id.to_string());
    let (family, digits) = id
        .find(|ch: char| ch.is_ascii_digit())
        .map(|k| id.split_at(k))
        .ok_or_else(unknown)?;
    let s: usize = digits.parse().map_err(|_| unknown())?;
    match family {
        "gauss" => gauss(s),
        "radau_iia" => radau_iia(s),
        "lobatto" => lobatto_iiia_iiib(s),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(conds: &[(String, f64)], id: &str) -> f64 {
        conds.iter().find(|(k, _)| k == id).unwrap().1
    }

    #[test]
    fn gauss1_is_midpoint() {
        let t = gauss(1).unwrap();
        assert_eq!(t.a, Matrix::from_rows(&[[0.5]]));
        assert_eq!((t.b.clone(), t.c.clone()), (vec![1.0], vec![0.5]));
        assert!(!t.stiffly_accurate);
    }

    #[test]
    fn gauss2_nodes_are_legendre_roots() {
        let t = gauss(2).unwrap();
        for &c in &t.c {
            // shifted Legendre P₂(x) = 6x² − 6x + 1
            assert!((6.0 * c * c - 6.0 * c + 1.0).abs() < 1e-15);
        }
        let conds = check_order_conditions(&t, 4);
        assert!(residual(&conds, "C2") < 1e-15);
    }

    #[test]
    fn gauss_order_and_symplecticity() {
        for s in 1..=3 {
            let t = gauss(s).unwrap();
            assert_eq!(t.classical_order, 2 * s as u32);
            assert!(check_symplecticity(&t) < 1e-14, "gauss{s}");
            let conds = check_order_conditions(&t, 2 * s as u32);
            for k in 1..=2 * s {
                assert!(residual(&conds, &format!("B{k}")) < 1e-14, "gauss{s} B{k}");
            }
            for k in 1..=s {
                assert!(residual(&conds, &format!("C{k}")) < 1e-14, "gauss{s} C{k}");
            }
            let next = check_order_conditions(&t, 2 * s as u32 + 1);
            assert!(residual(&next, &format!("B{}", 2 * s + 1)) > 1e-6);
        }
        assert!(gauss(4).is_err());
    }

    #[test]
    fn radau_properties() {
        let t2 = radau_iia(2).unwrap();
        assert_eq!(t2.c, vec![1.0 / 3.0, 1.0]);
        for s in 2..=3 {
            let t = radau_iia(s).unwrap();
            assert!(t.stiffly_accurate);
            assert_eq!(*t.c.last().unwrap(), 1.0);
            assert_eq!(t.classical_order, 2 * s as u32 - 1);
            let conds = check_order_conditions(&t, 2 * s as u32 - 1);
            for k in 1..=2 * s - 1 {
                assert!(residual(&conds, &format!("B{k}")) < 1e-14, "radau{s} B{k}");
            }
            for k in 1..=s {
                assert!(residual(&conds, &format!("C{k}")) < 1e-14, "radau{s} C{k}");
            }
        }
        assert!(check_symplecticity(&radau_iia(3).unwrap()) > 1e-3);
        assert!(matches!(
            radau_iia(1),
            Err(Error::UnsupportedStageCount { .. })
        ));
    }

    #[test]
    fn lobatto_properties() {
        for s in 2..=4 {
            let t = lobatto_iiia_iiib(s).unwrap();
            assert_eq!(t.c[0], 0.0);
            assert_eq!(t.c[s - 1], 1.0);
            assert!(check_symplecticity(&t) < 1e-14, "lobatto{s}");
            assert!(t.stiffly_accurate, "IIIA has a_sj = b_j");
            let conds = check_order_conditions(&t, 2 * s as u32 - 2);
            for k in 1..=2 * s - 2 {
                assert!(
                    residual(&conds, &format!("B{k}")) < 1e-14,
                    "lobatto{s} B{k}"
                );
            }
            for k in 1..=s {
                assert!(
                    residual(&conds, &format!("C{k}")) < 1e-14,
                    "lobatto{s} C{k}"
                );
            }
            // IIIB row sums match the nodes from three stages on; the
            // 2-stage IIIB has rows (1/2, 0), (1/2, 0).
            for i in (0..s).filter(|_| s >= 3) {
                let row: f64 = t.a_bar.row(i).iter().sum();
                assert!((row - t.c[i]).abs() < 1e-14);
            }
        }
        let t2 = lobatto_iiia_iiib(2).unwrap();
        assert!(t2.a.row(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn conjugates() {
        let g1 = gauss(1).unwrap();
        assert_eq!(conjugate_tableau(&g1.a, &g1.b).unwrap(), g1.a);
        let g2 = gauss(2).unwrap();
        assert!(
            conjugate_tableau(&g2.a, &g2.b)
                .unwrap()
                .sub(&g2.a)
                .max_abs()
                < 1e-15
        );
        for s in 2..=4 {
            let t = lobatto_iiia_iiib(s).unwrap();
            let conj = conjugate_tableau(&t.a, &t.b).unwrap();
            assert!(conj.sub(&t.a_bar).max_abs() < 1e-14, "lobatto{s}");
        }
        let bad = [1.0, 0.0];
        assert!(matches!(
            conjugate_tableau(&Matrix::identity(2), &bad),
            Err(Error::ZeroWeight { index: 1 })
        ));
    }

    #[test]
    fn forward_euler_fails_b2() {
        let t =
            PartitionedTableau::runge_kutta("euler", Matrix::zeros(1, 1), vec![1.0], vec![0.0], 1);
        let conds = check_order_conditions(&t, 2);
        assert_eq!(residual(&conds, "B1"), 0.0);
        assert_eq!(residual(&conds, "B2"), 0.5);
    }

    #[test]
    fn stage_consistency_of_every_shipped_tableau() {
        for id in METHOD_IDS {
            let t = tableau_by_id(id).unwrap();
            assert_eq!(t.name, id);
            assert!(t.stage_consistency_residual() <= 1e-15, "{id}");
            assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15, "{id}");
        }
        assert!(matches!(tableau_by_id("rk4"), Err(Error::UnknownMethod(_))));
        assert!(matches!(
            tableau_by_id("gauss"),
            Err(Error::UnknownMethod(_))
        ));
        assert!(tableau_by_id("gauss7").is_err());
    }

    #[test]
    fn display_lists_coefficients() {
        let text = lobatto_iiia_iiib(2).unwrap().to_string();
        assert!(text.starts_with("lobatto2 (s = 2, order 2"));
        assert!(text.contains("||"));
    }
}
