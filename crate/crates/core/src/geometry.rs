//! Base-station deployments under the three models (random PPP, hexagonal
//! grid, guard-region PPP), pilot-group assignment, user placement in
//! Voronoi cells, and the exclusion-ball interferer abstraction.

use std::collections::BTreeMap;
use std::sync::Once;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Lattice extent (in rings) used when a simulation builds its hexagonal
/// deployment: large enough that the origin cell sees a complete
/// interference neighborhood.
pub const HEX_SIM_EXTENT: u32 = 5;

/// Deployment models for base-station placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeploymentModel {
    RandomPpp,
    Hexagonal,
    GuardRegion,
}

impl DeploymentModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DeploymentModel::RandomPpp => "random_ppp",
            DeploymentModel::Hexagonal => "hexagonal",
            DeploymentModel::GuardRegion => "guard_region",
        }
    }
}

/// A set of base stations with pilot-group labels. The typical BS sits at
/// the origin and uses group 1 by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub model: DeploymentModel,
    pub bs_positions: Vec<[f64; 2]>,
    pub typical_index: usize,
    /// Pilot group per BS, in 1..=delta.
    pub pilot_group: Vec<u32>,
    pub window_radius: f64,
}

impl Deployment {
    /// Smallest distance between two BSs sharing a pilot group, or None if
    /// no two BSs share one.
    pub fn co_group_min_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.bs_positions.len() {
            for j in (i + 1)..self.bs_positions.len() {
                if self.pilot_group[i] == self.pilot_group[j] {
                    let d2 = dist2(self.bs_positions[i], self.bs_positions[j]);
                    if best.is_none_or(|b| d2 < b * b) {
                        best = Some(d2.sqrt());
                    }
                }
            }
        }
        best
    }

    /// Distance from BS `idx` to its nearest neighbor.
    pub fn nearest_neighbor_distance(&self, idx: usize) -> Option<f64> {
        let p = self.bs_positions[idx];
        self.bs_positions
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != idx)
            .map(|(_, q)| dist2(p, *q))
            .fold(None, |acc: Option<f64>, d2| {
                Some(acc.map_or(d2, |a| a.min(d2)))
            })
            .map(f64::sqrt)
    }
}

/// Users placed in the Voronoi cells of a deployment, flattened into
/// parallel arrays. Within a cell, pilot indices 1..=K are assigned in
/// placement order; cells that could not be filled are omitted entirely.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDrop {
    pub positions: Vec<[f64; 2]>,
    pub serving_bs: Vec<usize>,
    pub pilot_index: Vec<u32>,
}

impl UserDrop {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Index of the typical user: pilot 1 of the typical cell.
    pub fn typical_user(&self, deployment: &Deployment) -> Option<usize> {
        (0..self.len())
            .find(|&u| self.serving_bs[u] == deployment.typical_index && self.pilot_index[u] == 1)
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Homogeneous PPP of intensity `lambda` on the annulus `r_min <= r <= r_max`:
/// Poisson-distributed count with mean lambda * area, points i.i.d. uniform.
pub fn sample_annulus_ppp(
    lambda: f64,
    r_min: f64,
    r_max: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    assert!(lambda >= 0.0, "intensity must be non-negative");
    assert!(
        0.0 <= r_min && r_min <= r_max,
        "annulus radii must satisfy 0 <= r_min <= r_max"
    );
    let area = std::f64::consts::PI * (r_max * r_max - r_min * r_min);
    let mean = lambda * area;
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean)
        .expect("positive finite mean")
        .sample(rng) as u64;
    let mut points = Vec::with_capacity(count as usize);
    let rmin2 = r_min * r_min;
    let span2 = r_max * r_max - rmin2;
    for _ in 0..count {
        let r = (rmin2 + rng.random::<f64>() * span2).sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        points.push([r * theta.cos(), r * theta.sin()]);
    }
    points
}

/// Homogeneous PPP of intensity `lambda` on the disk of radius
/// `window_radius`. `lambda = 0` yields an empty list.
pub fn sample_ppp(lambda: f64, window_radius: f64, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    assert!(window_radius > 0.0, "window radius must be positive");
    sample_annulus_ppp(lambda, 0.0, window_radius, rng)
}

/// The analysis-matched interferer process: a homogeneous PPP restricted to
/// the annulus `[d_guard, window_radius]`. `d_guard = window_radius` gives an
/// empty process; `d_guard = 0` degenerates to the full disk.
pub fn exclusion_ball_interferers(
    lambda_b: f64,
    d_guard: f64,
    window_radius: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    assert!(
        (0.0..=window_radius).contains(&d_guard),
        "guard radius must lie in [0, window_radius]"
    );
    sample_annulus_ppp(lambda_b, d_guard, window_radius, rng)
}

static GUARD_DELTA_ONE_WARNING: Once = Once::new();

/// Pilot groups under the guard-region rule: the typical BS takes group 1,
/// BSs outside radius `d_guard` draw uniformly from all `delta` groups, and
/// BSs inside draw uniformly from the groups other than 1 (no co-pilot BS
/// inside the guard region). With `delta = 1` the exclusion is unsatisfiable:
/// a warning is emitted and every BS shares group 1 (universal contamination).
///
/// `d_guard = 0` reduces to the fully random pilot assignment.
pub fn assign_guard_region_pilots(
    points: &[[f64; 2]],
    typical_index: usize,
    d_guard: f64,
    delta: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<u32> {
    assert!(delta >= 1, "pilot reuse factor must be at least 1");
    assert!(d_guard >= 0.0, "guard radius must be non-negative");
    assert!(typical_index < points.len(), "typical index out of range");
    if delta == 1 {
        if d_guard > 0.0 {
            GUARD_DELTA_ONE_WARNING.call_once(|| {
                log::warn!(
                    "guard region with a single pilot group cannot exclude co-pilot BSs; \
                     assigning group 1 everywhere"
                );
            });
        }
        return vec![1; points.len()];
    }
    let typical = points[typical_index];
    let d2 = d_guard * d_guard;
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == typical_index {
                1
            } else if dist2(*p, typical) < d2 {
                rng.random_range(2..=delta)
            } else {
                rng.random_range(1..=delta)
            }
        })
        .collect()
}

/// Integer pair (i, j) with i^2 + ij + j^2 = delta, if one exists. Exactly
/// the reuse factors admitting a hexagonal cluster tiling have one.
pub fn hex_reuse_decomposition(delta: u32) -> Option<(i64, i64)> {
    let bound = (delta as f64).sqrt() as i64 + 1;
    for i in 0..=bound {
        for j in i..=bound {
            if i * i + i * j + j * j == i64::from(delta) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Nearest valid hexagonal cluster sizes below and above an invalid one.
pub fn nearest_hex_reuse_sizes(delta: u32) -> (u32, u32) {
    let mut lower = 1;
    for d in (1..delta).rev() {
        if hex_reuse_decomposition(d).is_some() {
            lower = d;
            break;
        }
    }
    let mut upper = delta + 1;
    while hex_reuse_decomposition(upper).is_none() {
        upper += 1;
    }
    (lower, upper)
}

/// Hexagonal lattice deployment with inter-site distance 2R (R the hexagon
/// inradius fixed by the density identity) and a reuse-`delta` cluster
/// coloring whose co-group minimum distance is 2R*sqrt(delta). The origin
/// lattice point is the typical BS and carries group 1.
pub fn build_hexagonal(config: &SystemConfig, extent_rings: u32) -> Result<Deployment> {
    config.validate()?;
    if extent_rings < 3 {
        return Err(Error::Config(format!(
            "hexagonal lattice extent must be at least 3 rings, got {extent_rings}"
        )));
    }
    let delta = config.delta_int()?;
    let (ci, cj) = hex_reuse_decomposition(delta).ok_or_else(|| {
        let (lower, upper) = nearest_hex_reuse_sizes(delta);
        Error::InvalidHexReuse {
            delta,
            lower,
            upper,
        }
    })?;

    let r = config.hex_inradius();
    let ext = i64::from(extent_rings);
    let mut positions = Vec::new();
    let mut coords = Vec::new();
    let mut typical_index = 0;
    for n in -ext..=ext {
        for m in -ext..=ext {
            let ring = (n.abs() + m.abs() + (n + m).abs()) / 2;
            if ring > ext {
                continue;
            }
            if n == 0 && m == 0 {
                typical_index = positions.len();
            }
            positions.push([
                2.0 * r * n as f64 + r * m as f64,
                3.0_f64.sqrt() * r * m as f64,
            ]);
            coords.push((n, m));
        }
    }

    // Coset labels of the index-delta sublattice generated by (i, j) and
    // (-j, i+j): the map (n, m) -> (((i+j)n + jm) mod delta, (im - jn) mod
    // delta) has that sublattice as its kernel, so its level sets are the
    // delta cosets.
    let dd = i64::from(delta);
    let raw_label = |n: i64, m: i64| {
        (
            ((ci + cj) * n + cj * m).rem_euclid(dd),
            (ci * m - cj * n).rem_euclid(dd),
        )
    };
    let mut ids: BTreeMap<(i64, i64), u32> = BTreeMap::new();
    for &(n, m) in &coords {
        let next = ids.len() as u32 + 1;
        ids.entry(raw_label(n, m)).or_insert(next);
    }
    // Re-keyed in sorted order for a scan-order-independent labeling.
    let mut sorted: Vec<_> = ids.keys().copied().collect();
    sorted.sort_unstable();
    let ids: BTreeMap<(i64, i64), u32> = sorted
        .into_iter()
        .enumerate()
        .map(|(k, key)| (key, k as u32 + 1))
        .collect();
    assert_eq!(
        ids.len(),
        delta as usize,
        "cluster coloring must produce exactly delta cosets"
    );
    let mut pilot_group: Vec<u32> = coords.iter().map(|&(n, m)| ids[&raw_label(n, m)]).collect();
    // The typical BS uses group 1 by convention: swap its coset's label with 1.
    let g0 = pilot_group[typical_index];
    if g0 != 1 {
        for g in pilot_group.iter_mut() {
            if *g == g0 {
                *g = 1;
            } else if *g == 1 {
                *g = g0;
            }
        }
    }

    let circumradius = 2.0 * r / 3.0_f64.sqrt();
    let window_radius = positions
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .fold(0.0_f64, f64::max)
        + circumradius;

    Ok(Deployment {
        model: DeploymentModel::Hexagonal,
        bs_positions: positions,
        typical_index,
        pilot_group,
        window_radius,
    })
}

/// Draws a deployment for one simulation drop. The PPP models place the
/// typical BS at the origin and scatter the rest over the window; the
/// hexagonal model is deterministic.
pub fn build_deployment(
    config: &SystemConfig,
    model: DeploymentModel,
    rng: &mut ChaCha8Rng,
) -> Result<Deployment> {
    config.validate()?;
    let delta = config.delta_int()?;
    match model {
        DeploymentModel::Hexagonal => build_hexagonal(config, HEX_SIM_EXTENT),
        DeploymentModel::RandomPpp | DeploymentModel::GuardRegion => {
            let window = config.window_radius_eff();
            let mut positions = vec![[0.0, 0.0]];
            positions.extend(sample_ppp(config.lambda_b, window, rng));
            let d_guard = if model == DeploymentModel::GuardRegion {
                config.guard_radius_eff()
            } else {
                0.0
            };
            let pilot_group = assign_guard_region_pilots(&positions, 0, d_guard, delta, rng);
            Ok(Deployment {
                model,
                bs_positions: positions,
                typical_index: 0,
                pilot_group,
                window_radius: window,
            })
        }
    }
}

/// Uniform-grid spatial index answering nearest-BS queries in O(1) expected
/// time; the workhorse behind rejection-sampling users into Voronoi cells.
pub struct NearestGrid<'a> {
    points: &'a [[f64; 2]],
    cell: f64,
    nx: i64,
    min: f64,
    buckets: Vec<Vec<u32>>,
}

impl<'a> NearestGrid<'a> {
    /// Builds the index for points inside `[-half_width, half_width]^2`.
    pub fn build(points: &'a [[f64; 2]], half_width: f64) -> Self {
        assert!(!points.is_empty(), "cannot index an empty point set");
        assert!(half_width > 0.0);
        let n = points.len() as f64;
        let spacing = (std::f64::consts::PI * half_width * half_width / n).sqrt();
        let nx = ((2.0 * half_width / spacing).ceil() as i64).clamp(1, 512);
        let cell = 2.0 * half_width / nx as f64;
        let mut buckets = vec![Vec::new(); (nx * nx) as usize];
        let min = -half_width;
        let clampi = |v: i64| v.clamp(0, nx - 1);
        for (idx, p) in points.iter().enumerate() {
            let bx = clampi(((p[0] - min) / cell).floor() as i64);
            let by = clampi(((p[1] - min) / cell).floor() as i64);
            buckets[(by * nx + bx) as usize].push(idx as u32);
        }
        NearestGrid {
            points,
            cell,
            nx,
            min,
            buckets,
        }
    }

    /// Index of the nearest point and the squared distance to it.
    pub fn query(&self, p: [f64; 2]) -> (usize, f64) {
        let clampi = |v: i64| v.clamp(0, self.nx - 1);
        let bx = clampi(((p[0] - self.min) / self.cell).floor() as i64);
        let by = clampi(((p[1] - self.min) / self.cell).floor() as i64);
        let mut best = usize::MAX;
        let mut best_d2 = f64::INFINITY;
        let scan = |x: i64, y: i64, best: &mut usize, best_d2: &mut f64| {
            if x < 0 || y < 0 || x >= self.nx || y >= self.nx {
                return;
            }
            for &idx in &self.buckets[(y * self.nx + x) as usize] {
                let d2 = dist2(self.points[idx as usize], p);
                if d2 < *best_d2 {
                    *best_d2 = d2;
                    *best = idx as usize;
                }
            }
        };
        let mut ring = 0_i64;
        loop {
            if ring == 0 {
                scan(bx, by, &mut best, &mut best_d2);
            } else {
                for x in (bx - ring)..=(bx + ring) {
                    scan(x, by - ring, &mut best, &mut best_d2);
                    scan(x, by + ring, &mut best, &mut best_d2);
                }
                for y in (by - ring + 1)..=(by + ring - 1) {
                    scan(bx - ring, y, &mut best, &mut best_d2);
                    scan(bx + ring, y, &mut best, &mut best_d2);
                }
            }
            // Any point in an unscanned bucket is at least ring*cell away.
            if best < usize::MAX {
                let safe = ring as f64 * self.cell;
                if best_d2 <= safe * safe {
                    break;
                }
            }
            ring += 1;
            if ring > 2 * self.nx {
                break;
            }
        }
        (best, best_d2)
    }
}

/// Brute-force nearest point, the oracle the grid index is tested against.
pub fn nearest_bs(points: &[[f64; 2]], p: [f64; 2]) -> (usize, f64) {
    assert!(!points.is_empty());
    let mut best = 0;
    let mut best_d2 = dist2(points[0], p);
    for (idx, q) in points.iter().enumerate().skip(1) {
        let d2 = dist2(*q, p);
        if d2 < best_d2 {
            best_d2 = d2;
            best = idx;
        }
    }
    (best, best_d2)
}

/// Candidate budget multiplier for rejection-sampling users into cells.
const DROP_BUDGET_PER_USER: u64 = 400;
/// Hard cap on the targeted top-up for the typical cell.
const TYPICAL_TOPUP_ATTEMPTS: u64 = 100_000_000;

/// A cell clipped by the window edge may have too little interior area to
/// ever fill; once this many candidates in a row are rejected, the
/// remaining cells are treated as unfillable instead of burning the whole
/// budget on them.
fn stall_limit(n_cells: usize) -> u64 {
    2_000 + 20 * n_cells as u64
}

/// Places `k_users` i.i.d. uniform users in every Voronoi cell by rejection
/// sampling within the window. Boundary cells that fail to fill inside the
/// candidate budget are excluded entirely; the typical cell is always filled
/// (a targeted top-up guarantees it). Pilot indices 1..=K follow placement
/// order within each cell.
pub fn drop_users(deployment: &Deployment, k_users: u32, rng: &mut ChaCha8Rng) -> Result<UserDrop> {
    if deployment.bs_positions.is_empty() {
        return Err(Error::Config("deployment has no base stations".to_string()));
    }
    if k_users == 0 {
        return Err(Error::Config("k_users must be at least 1".to_string()));
    }
    match deployment.model {
        DeploymentModel::Hexagonal => drop_users_hexagonal(deployment, k_users, rng),
        _ => drop_users_window(deployment, k_users, rng),
    }
}

fn drop_users_window(
    deployment: &Deployment,
    k_users: u32,
    rng: &mut ChaCha8Rng,
) -> Result<UserDrop> {
    let n = deployment.bs_positions.len();
    let w = deployment.window_radius;
    let k = k_users as usize;
    let grid = NearestGrid::build(&deployment.bs_positions, w);
    let mut cells: Vec<Vec<[f64; 2]>> = vec![Vec::with_capacity(k); n];
    let mut filled = 0_usize;
    let budget = DROP_BUDGET_PER_USER * u64::from(k_users) * n as u64;

    let draw = |rng: &mut ChaCha8Rng| -> [f64; 2] {
        let r = w * rng.random::<f64>().sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        [r * theta.cos(), r * theta.sin()]
    };

    let mut attempts = 0_u64;
    let mut last_accept = 0_u64;
    let stall = stall_limit(n);
    while filled < n && attempts < budget && attempts - last_accept < stall {
        attempts += 1;
        let p = draw(rng);
        let (bi, _) = grid.query(p);
        if cells[bi].len() < k {
            cells[bi].push(p);
            last_accept = attempts;
            if cells[bi].len() == k {
                filled += 1;
            }
        }
    }

    // The typical cell must never come up short: keep sampling, accepting
    // only its own points. Its cell has positive area, so this terminates.
    let typical = deployment.typical_index;
    let mut topup = 0_u64;
    while cells[typical].len() < k {
        topup += 1;
        if topup > TYPICAL_TOPUP_ATTEMPTS {
            return Err(Error::Config(
                "typical cell could not be populated; its Voronoi cell area is vanishing"
                    .to_string(),
            ));
        }
        let p = draw(rng);
        let (bi, _) = grid.query(p);
        if bi == typical {
            cells[typical].push(p);
        }
    }

    let mut drop = UserDrop {
        positions: Vec::new(),
        serving_bs: Vec::new(),
        pilot_index: Vec::new(),
    };
    for (bi, users) in cells.iter().enumerate() {
        if users.len() < k {
            continue; // boundary cell excluded
        }
        for (j, p) in users.iter().enumerate() {
            drop.positions.push(*p);
            drop.serving_bs.push(bi);
            drop.pilot_index.push(j as u32 + 1);
        }
    }
    Ok(drop)
}

fn drop_users_hexagonal(
    deployment: &Deployment,
    k_users: u32,
    rng: &mut ChaCha8Rng,
) -> Result<UserDrop> {
    let spacing = deployment
        .nearest_neighbor_distance(deployment.typical_index)
        .ok_or_else(|| Error::Config("hexagonal deployment needs at least 2 BSs".to_string()))?;
    let r = spacing / 2.0; // hexagon inradius
    let rc = 2.0 * r / 3.0_f64.sqrt(); // circumradius
    let half = 3.0_f64.sqrt() / 2.0;
    let in_hex = |x: f64, y: f64| -> bool {
        x.abs() <= r && (0.5 * x + half * y).abs() <= r && (-0.5 * x + half * y).abs() <= r
    };
    let mut drop = UserDrop {
        positions: Vec::new(),
        serving_bs: Vec::new(),
        pilot_index: Vec::new(),
    };
    for (bi, bs) in deployment.bs_positions.iter().enumerate() {
        for j in 0..k_users {
            // Uniform over the cell hexagon via rejection from its bounding box.
            let (x, y) = loop {
                let x = (2.0 * rng.random::<f64>() - 1.0) * r;
                let y = (2.0 * rng.random::<f64>() - 1.0) * rc;
                if in_hex(x, y) {
                    break (x, y);
                }
            };
            drop.positions.push([bs[0] + x, bs[1] + y]);
            drop.serving_bs.push(bi);
            drop.pilot_index.push(j + 1);
        }
    }
    Ok(drop)
}
