//! Boundary-cell partitions of the gap orthant.
//!
//! Two boundary points share a cell when the exact coin-to-increment map at
//! their clamped coordinates agrees. Gaps at or beyond the clamp radius `d`
//! are dynamically equivalent: a carrier never holds more than `d` balls, so
//! it empties before crossing a run of `d` empty sites and the far side of
//! the run sees a fresh carrier either way.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{coin_increments, is_boundary};
use crate::params::Capacity;
use crate::pushtasep::push_gap_update;

/// Largest ball count for which partitions are enumerated.
pub const MAX_PARTITION_D: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Sbbs,
    Pushtasep,
}

/// Gap increment per coin mask (SBBS) or per jumping particle (PushTASEP).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellSignature(pub Vec<Vec<i64>>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCell {
    /// 1-based cell index.
    pub id: usize,
    /// Degenerate coordinates, 1-based and sorted.
    pub f: Vec<usize>,
    pub representative: Vec<i64>,
    /// Clamped boundary points in the cell.
    #[serde(skip)]
    pub members: Vec<Vec<i64>>,
    /// Whether the members form the box `{y_i = x_i for i in f, y_i >= x_i otherwise}`
    /// with `x` the componentwise minimum.
    #[serde(skip)]
    pub box_form: bool,
}

#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    kind: PartitionKind,
    d: usize,
    capacity: Option<Capacity>,
    clamp: i64,
    cells: Vec<BoundaryCell>,
    principal_ok: bool,
    index: HashMap<Vec<i64>, usize>,
}

#[derive(Serialize)]
struct PartitionJson<'a> {
    kind: PartitionKind,
    d: usize,
    c: Option<String>,
    k: usize,
    cells: &'a [BoundaryCell],
}

impl Serialize for BoundaryPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionJson {
            kind: self.kind,
            d: self.d,
            c: self.capacity.map(|c| c.to_string()),
            k: self.k(),
            cells: &self.cells,
        }
        .serialize(s)
    }
}

impl BoundaryPartition {
    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.cells.len()
    }

    pub fn capacity(&self) -> Option<Capacity> {
        self.capacity
    }

    pub fn clamp(&self) -> i64 {
        self.clamp
    }

    pub fn cells(&self) -> &[BoundaryCell] {
        &self.cells
    }

    /// Whether cells `1..d-1` are the principal cells with `f(i) = {i}`.
    pub fn principal_ok(&self) -> bool {
        self.principal_ok
    }

    /// 0-based cell of a gap vector, `None` in the interior.
    pub fn cell_of(&self, w: &[i64]) -> Option<usize> {
        if !is_boundary(w) {
            return None;
        }
        let key: Vec<i64> = w.iter().map(|&g| g.min(self.clamp)).collect();
        self.index.get(&key).copied()
    }

    /// The 0-based `f` sets, as used by the certificate search.
    pub fn f_sets(&self) -> Vec<Vec<usize>> {
        self.cells.iter().map(|c| c.f.iter().map(|i| i - 1).collect()).collect()
    }
}

fn clamp_point(w: &[i64], clamp: i64) -> Vec<i64> {
    w.iter().map(|&g| g.min(clamp)).collect()
}

/// Signature of a boundary point for the SBBS with `d` balls and capacity `c`.
pub fn cell_signature(w: &[i64], d: usize, capacity: Capacity) -> Result<CellSignature> {
    if w.len() + 1 != d {
        return Err(Error::Dimension(format!("gap vector of length {} for d = {d}", w.len())));
    }
    if w.iter().any(|&g| g < 0) {
        return Err(Error::InvalidConfig(format!("negative gap in {w:?}")));
    }
    if !is_boundary(w) {
        return Err(Error::InteriorPoint(w.to_vec()));
    }
    Ok(CellSignature(coin_increments(&clamp_point(w, d as i64), capacity)?))
}

/// Signature of a boundary point for the PushTASEP jump chain.
pub fn push_cell_signature(w: &[i64]) -> Result<CellSignature> {
    if !is_boundary(w) {
        return Err(Error::InteriorPoint(w.to_vec()));
    }
    let base = clamp_point(w, 1);
    Ok(CellSignature(
        (0..=w.len())
            .map(|i| {
                let mut next = base.clone();
                push_gap_update(&mut next, i);
                next.iter().zip(&base).map(|(a, b)| a - b).collect()
            })
            .collect(),
    ))
}

fn boundary_points(m: usize, clamp: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut y = vec![0i64; m];
    loop {
        if is_boundary(&y) {
            out.push(y.clone());
        }
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if y[i] < clamp {
                y[i] += 1;
                break;
            }
            y[i] = 0;
        }
    }
}

fn in_box(y: &[i64], lo: &[i64], f: &[usize], clamp: i64) -> bool {
    y.iter().enumerate().all(|(i, &v)| {
        if f.contains(&(i + 1)) {
            v == lo[i]
        } else {
            v >= lo[i] && v <= clamp
        }
    })
}

fn make_cells(
    groups: BTreeMap<CellSignature, Vec<Vec<i64>>>,
    all_points: &[Vec<i64>],
    principal_probes: &[Vec<i64>],
    clamp: i64,
) -> (Vec<BoundaryCell>, bool) {
    let mut raw: Vec<BoundaryCell> = groups
        .into_values()
        .map(|mut members| {
            members.sort();
            let m = members[0].len();
            let lo: Vec<i64> = (0..m).map(|i| members.iter().map(|y| y[i]).min().unwrap()).collect();
            let f: Vec<usize> = (0..m)
                .filter(|&i| lo[i] < clamp && members.iter().all(|y| y[i] == lo[i]))
                .map(|i| i + 1)
                .collect();
            let representative = if members.binary_search(&lo).is_ok() { lo.clone() } else { members[0].clone() };
            let expected = all_points.iter().filter(|y| in_box(y, &lo, &f, clamp)).count();
            let box_form = expected == members.len() && members.iter().all(|y| in_box(y, &lo, &f, clamp));
            BoundaryCell { id: 0, f, representative, members, box_form }
        })
        .collect();

    let mut order: Vec<usize> = Vec::new();
    let mut principal_ok = true;
    for (i, probe) in principal_probes.iter().enumerate() {
        let pos = raw.iter().position(|c| c.members.binary_search(probe).is_ok()).expect("probe is a boundary point");
        if order.contains(&pos) || raw[pos].f != vec![i + 1] {
            principal_ok = false;
        }
        if !order.contains(&pos) {
            order.push(pos);
        }
    }
    let mut rest: Vec<usize> = (0..raw.len()).filter(|j| !order.contains(j)).collect();
    rest.sort_by(|&a, &b| {
        let (ca, cb) = (&raw[a], &raw[b]);
        (ca.f.len(), &ca.f, &ca.representative).cmp(&(cb.f.len(), &cb.f, &cb.representative))
    });
    order.extend(rest);
    let mut cells: Vec<BoundaryCell> = Vec::with_capacity(raw.len());
    for (id, j) in order.into_iter().enumerate() {
        let mut c = std::mem::replace(
            &mut raw[j],
            BoundaryCell { id: 0, f: vec![], representative: vec![], members: vec![], box_form: false },
        );
        c.id = id + 1;
        cells.push(c);
    }
    (cells, principal_ok)
}

fn index_of(cells: &[BoundaryCell]) -> HashMap<Vec<i64>, usize> {
    let mut index = HashMap::new();
    for (j, c) in cells.iter().enumerate() {
        for y in &c.members {
            index.insert(y.clone(), j);
        }
    }
    index
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension("partitions need d >= 2".into()));
    }
    if d > MAX_PARTITION_D {
        return Err(Error::DimensionTooLarge { found: d, max: MAX_PARTITION_D });
    }
    Ok(())
}

/// Partition of the SBBS gap boundary for `d` balls and capacity `c`.
pub fn build_partition(d: usize, capacity: Capacity) -> Result<BoundaryPartition> {
    check_d(d)?;
    let m = d - 1;
    let clamp = d as i64;
    let points = boundary_points(m, clamp);
    let mut groups: BTreeMap<CellSignature, Vec<Vec<i64>>> = BTreeMap::new();
    for y in &points {
        groups.entry(CellSignature(coin_increments(y, capacity)?)).or_default().push(y.clone());
    }
    let probes: Vec<Vec<i64>> = (0..m)
        .map(|i| {
            let mut y = vec![1; m];
            y[i] = 0;
            if i + 1 < m {
                y[i + 1] = 2;
            }
            y
        })
        .collect();
    let (cells, principal_ok) = make_cells(groups, &points, &probes, clamp);
    let index = index_of(&cells);
    Ok(BoundaryPartition { kind: PartitionKind::Sbbs, d, capacity: Some(capacity), clamp, cells, principal_ok, index })
}

/// Partition of the PushTASEP gap boundary: one cell per nonempty zero set.
pub fn pushtasep_partition(d: usize) -> Result<BoundaryPartition> {
    check_d(d)?;
    let m = d - 1;
    let points = boundary_points(m, 1);
    let mut groups: BTreeMap<CellSignature, Vec<Vec<i64>>> = BTreeMap::new();
    for y in &points {
        groups.entry(push_cell_signature(y)?).or_default().push(y.clone());
    }
    let probes: Vec<Vec<i64>> = (0..m)
        .map(|i| {
            let mut y = vec![1; m];
            y[i] = 0;
            y
        })
        .collect();
    let (cells, principal_ok) = make_cells(groups, &points, &probes, 1);
    let index = index_of(&cells);
    Ok(BoundaryPartition { kind: PartitionKind::Pushtasep, d, capacity: None, clamp: 1, cells, principal_ok, index })
}
