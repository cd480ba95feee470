//! Reflection vectors, the standard tridiagonal matrices, and weakly
//! completely-S certificates.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::kernel_mean;
use crate::matrix::RationalMatrix;
use crate::params::{q_int, q_ratio, q_to_string, Capacity, DynamicsParams, Epsilon, Q};
use crate::partition::{BoundaryPartition, PartitionKind};
use crate::pushtasep::push_gap_update;
use crate::simplex::find_nonnegative;

/// Lower bound imposed on every multiplier.
pub fn positivity_margin() -> Q {
    q_ratio(1, 1_000_000)
}

/// Principal reflection vector for cell `j` (1-based).
pub fn analytic_principal_reflection(j: usize, epsilon: Epsilon, capacity: Capacity, d: usize) -> Result<Vec<Q>> {
    if d < 2 || j == 0 || j >= d {
        return Err(Error::InvalidParams(format!("principal index {j} out of range for d = {d}")));
    }
    let e = epsilon.exact();
    let s = Q::one() - &e;
    let mut v = vec![Q::zero(); d - 1];
    let k = j - 1;
    if capacity.is_unit() {
        v[k] = &s * &e;
        if k + 1 < d - 1 {
            v[k + 1] = -(&s * &e);
        }
    } else {
        if k > 0 {
            v[k - 1] = &s * &s;
        }
        v[k] = &s * &e;
        if k + 1 < d - 1 {
            v[k + 1] = -s.clone();
        }
    }
    Ok(v)
}

/// Mean increment of the SBBS gap chain at a cell representative.
pub fn empirical_reflection(representative: &[i64], epsilon: Epsilon, capacity: Capacity) -> Result<Vec<Q>> {
    let params = DynamicsParams::new(epsilon, capacity, representative.len() + 1)?;
    kernel_mean(representative, &params)
}

/// Mean increment of the PushTASEP jump chain at a boundary point.
pub fn push_reflection(representative: &[i64]) -> Vec<Q> {
    let d = representative.len() + 1;
    let mut mean = vec![Q::zero(); d - 1];
    for i in 0..d {
        let mut next = representative.to_vec();
        push_gap_update(&mut next, i);
        for (m, (a, b)) in mean.iter_mut().zip(next.iter().zip(representative)) {
            *m += q_int(a - b);
        }
    }
    let scale = q_ratio(1, d as i64);
    mean.into_iter().map(|v| v * &scale).collect()
}

/// `(d-1) x k` matrix whose columns are the cell reflection vectors. The
/// parameters are ignored for PushTASEP partitions.
pub fn reflection_matrix(partition: &BoundaryPartition, epsilon: Epsilon) -> Result<RationalMatrix> {
    let columns = partition
        .cells()
        .iter()
        .map(|c| match partition.kind() {
            PartitionKind::Sbbs => {
                let cap = partition.capacity().expect("SBBS partitions carry a capacity");
                empirical_reflection(&c.representative, epsilon, cap)
            }
            PartitionKind::Pushtasep => Ok(push_reflection(&c.representative)),
        })
        .collect::<Result<Vec<_>>>()?;
    RationalMatrix::from_columns(&columns)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardMatrices {
    pub sigma_pt: RationalMatrix,
    pub r_pt: RationalMatrix,
    pub hat_r: RationalMatrix,
}

pub fn sigma_pt(d: usize) -> RationalMatrix {
    RationalMatrix::tridiagonal(d - 1, &q_int(-1), &q_int(2), &q_int(-1))
}

pub fn r_pt(d: usize) -> RationalMatrix {
    RationalMatrix::tridiagonal(d - 1, &q_int(-1), &q_int(1), &q_int(0))
}

pub fn standard_matrices(d: usize, epsilon: Epsilon, capacity: Capacity) -> Result<StandardMatrices> {
    if d < 2 {
        return Err(Error::Dimension("standard matrices need d >= 2".into()));
    }
    let e = epsilon.exact();
    let hat_r = if capacity.is_unit() {
        r_pt(d).scale(&e)
    } else {
        RationalMatrix::tridiagonal(d - 1, &q_int(-1), &e, &(Q::one() - &e))
    };
    Ok(StandardMatrices { sigma_pt: sigma_pt(d), r_pt: r_pt(d), hat_r })
}

/// Multipliers for one subset `I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCertificate {
    /// 0-based row indices `I`.
    pub subset: Vec<usize>,
    /// 0-based columns `J_I = {j : f(j) ⊆ I}`.
    pub constraints: Vec<usize>,
    pub lambda: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SCertificate {
    pub subsets: Vec<SubsetCertificate>,
}

/// Farkas witness: `y >= 0` over `J_I` with `R_{I,J} y <= 0` and `sum(y) >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SWitness {
    pub subset: Vec<usize>,
    pub constraints: Vec<usize>,
    pub y: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SCheck {
    Certified(SCertificate),
    Infeasible(SWitness),
}

impl SCheck {
    pub fn is_certified(&self) -> bool {
        matches!(self, SCheck::Certified(_))
    }
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << m).map(move |mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Solves `lambda >= margin`, `A lambda >= 1` where `A[j][i] = R[I_i, J_j]`.
fn positive_solution(a: &RationalMatrix) -> Option<Vec<Q>> {
    let margin = positivity_margin();
    let h: Vec<Q> = (0..a.rows())
        .map(|j| Q::one() - &margin * a.row(j).iter().sum::<Q>())
        .collect();
    find_nonnegative(a, &h).map(|mu| mu.into_iter().map(|v| v + &margin).collect())
}

fn farkas_witness(a: &RationalMatrix) -> Option<Vec<Q>> {
    // y >= 0, -A^T y >= 0, sum(y) >= 1.
    let at = a.transpose();
    let (n, m) = (at.rows(), at.cols());
    let mut g = RationalMatrix::zeros(n + 1, m);
    for i in 0..n {
        for j in 0..m {
            g[(i, j)] = -at[(i, j)].clone();
        }
    }
    for j in 0..m {
        g[(n, j)] = Q::one();
    }
    let mut h = vec![Q::zero(); n];
    h.push(Q::one());
    find_nonnegative(&g, &h)
}

/// Searches for multipliers certifying that `R` is weakly completely-S with
/// respect to `f` (0-based coordinate sets, one per column).
pub fn weakly_completely_s(r: &RationalMatrix, f: &[Vec<usize>]) -> Result<SCheck> {
    if f.len() != r.cols() {
        return Err(Error::Dimension(format!("{} f-sets for {} columns", f.len(), r.cols())));
    }
    let m = r.rows();
    if f.iter().flatten().any(|&i| i >= m) {
        return Err(Error::Dimension("f refers to a coordinate outside the matrix".into()));
    }
    let mut out = Vec::new();
    for subset in subsets(m) {
        let constraints: Vec<usize> = (0..r.cols()).filter(|&j| f[j].iter().all(|i| subset.contains(i))).collect();
        let a = r.submatrix(&subset, &constraints).transpose();
        match positive_solution(&a) {
            Some(lambda) => out.push(SubsetCertificate { subset, constraints, lambda }),
            None => {
                let y = farkas_witness(&a).ok_or_else(|| {
                    Error::InvalidParams("certificate search failed without a Farkas witness".into())
                })?;
                return Ok(SCheck::Infeasible(SWitness { subset, constraints, y }));
            }
        }
    }
    Ok(SCheck::Certified(SCertificate { subsets: out }))
}

/// Exact re-check of a certificate against `R`.
pub fn verify_certificate(r: &RationalMatrix, cert: &SCertificate) -> bool {
    cert.subsets.iter().all(|s| {
        s.lambda.len() == s.subset.len()
            && s.lambda.iter().all(Signed::is_positive)
            && s.constraints.iter().all(|&j| {
                s.subset.iter().zip(&s.lambda).map(|(&i, l)| l * &r[(i, j)]).sum::<Q>() >= Q::one()
            })
    })
}

/// Exact re-check of an infeasibility witness.
pub fn verify_witness(r: &RationalMatrix, w: &SWitness) -> bool {
    w.y.len() == w.constraints.len()
        && w.y.iter().all(|v| !v.is_negative())
        && w.y.iter().sum::<Q>() >= Q::one()
        && w.subset.iter().all(|&i| {
            w.constraints.iter().zip(&w.y).map(|(&j, y)| y * &r[(i, j)]).sum::<Q>() <= Q::zero()
        })
}

/// Classical test: every principal submatrix `M_II` admits `x > 0` with
/// `M_II x > 0`.
pub fn completely_s(m: &RationalMatrix) -> Result<bool> {
    if m.rows() != m.cols() {
        return Err(Error::Dimension("completely-S needs a square matrix".into()));
    }
    let margin = positivity_margin();
    for subset in subsets(m.rows()) {
        let sub = m.submatrix(&subset, &subset);
        let h: Vec<Q> = (0..sub.rows()).map(|i| Q::one() - &margin * sub.row(i).iter().sum::<Q>()).collect();
        if find_nonnegative(&sub, &h).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct SubsetJson {
    subset: Vec<usize>,
    constraints: Vec<usize>,
    lambda: Vec<String>,
}

/// JSON report with 1-based indices and `p/q` multipliers.
pub fn certificate_report(check: &SCheck) -> serde_json::Value {
    let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
    match check {
        SCheck::Certified(c) => serde_json::json!({
            "certified": true,
            "subsets": c.subsets.iter().map(|s| SubsetJson {
                subset: one_based(&s.subset),
                constraints: one_based(&s.constraints),
                lambda: s.lambda.iter().map(q_to_string).collect(),
            }).collect::<Vec<_>>(),
        }),
        SCheck::Infeasible(w) => serde_json::json!({
            "certified": false,
            "subset": one_based(&w.subset),
            "constraints": one_based(&w.constraints),
            "farkas_y": w.y.iter().map(q_to_string).collect::<Vec<_>>(),
        }),
    }
}
