use std::fmt;

use serde::{Deserialize, Serialize};

use super::KernelSeries;
use crate::format::float17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelRoute {
    Series,
    Quadrature,
}

impl fmt::Display for KernelRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Series => "series-route",
            Self::Quadrature => "quadrature-route",
        })
    }
}

/// Which part of the kernel a grid holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradeTag {
    /// T_{M,n} alone.
    Single(usize),
    /// Σ_{k ≤ n} ℏ^{2k} T_{M,k}.
    Sum(usize),
}

impl fmt::Display for GradeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Single(n) => write!(f, "{n}"),
            Self::Sum(n) => write!(f, "0-{n}"),
        }
    }
}

/// Kernel values on a rectangular (q, q′) grid; `values[i][j]` sits at (q_i, q′_j).
#[derive(Clone, Debug, PartialEq)]
pub struct KernelGrid {
    pub q_nodes: Vec<f64>,
    pub qprime_nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub grade: GradeTag,
    pub route: KernelRoute,
}

impl KernelGrid {
    pub fn from_series(
        k: &KernelSeries,
        grade: GradeTag,
        hbar: f64,
        q_nodes: &[f64],
        qprime_nodes: &[f64],
    ) -> Self {
        let values = q_nodes
            .iter()
            .map(|&q| {
                qprime_nodes
                    .iter()
                    .map(|&qp| match grade {
                        GradeTag::Single(n) => k.eval_grade(n, q, qp, hbar),
                        GradeTag::Sum(n) => k.eval_sum(n, q, qp, hbar),
                    })
                    .collect()
            })
            .collect();
        Self {
            q_nodes: q_nodes.to_vec(),
            qprime_nodes: qprime_nodes.to_vec(),
            values,
            grade,
            route: KernelRoute::Series,
        }
    }

    /// Largest |self − other| over the shared nodes (the grids must be the same shape).
    pub fn max_abs_diff(&self, other: &KernelGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest |self − other| / max(|other|, floor).
    pub fn max_rel_diff(&self, other: &KernelGrid, floor: f64) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
            })
            .fold(0.0, f64::max)
    }
}

/// CSV with columns q, qprime, grade, value, route.
pub fn kernel_csv(grids: &[KernelGrid]) -> String {
    let mut out = String::from("q,qprime,grade,value,route\n");
    for g in grids {
        for (i, q) in g.q_nodes.iter().enumerate() {
            for (j, qp) in g.qprime_nodes.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    float17(*q),
                    float17(*qp),
                    g.grade,
                    float17(g.values[i][j]),
                    g.route
                ));
            }
        }
    }
    out
}
