//! Phase 4: deterministic 2-D coordinates from the Kamada-Kawai spring
//! model over graph-theoretic distances.
//!
//! The energy is `E = sum_{i<j} k_ij * (|p_i - p_j| - l_ij)^2` with ideal
//! lengths `l_ij = L0 * d_ij` and spring constants `k_ij = K / d_ij^2`. The
//! solver repeatedly picks the node with the largest gradient norm and
//! applies damped 2-D Newton steps; a step is only accepted when it lowers
//! the energy, so the accepted-energy sequence never increases. The initial
//! placement is a circle in node-index order, which makes the result a pure
//! function of the inputs.

use serde::{Deserialize, Serialize};

use crate::cograph::{connected_components, CoGraph};
use crate::error::{Error, Result};

/// How edge lengths enter the shortest-path distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLengthMode {
    /// Length `1 / weight`: strongly co-occurring nodes sit closer.
    InverseWeight,
    /// Unit length per edge.
    Unit,
}

/// Symmetric all-pairs shortest-path distances for one connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    mode: EdgeLengthMode,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major symmetric matrix. Checks shape, zero diagonal,
    /// symmetry, and finite positive off-diagonal entries.
    pub fn new(n: usize, data: Vec<f64>, mode: EdgeLengthMode) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParam {
                field: "distances",
                reason: format!("expected {} entries, got {}", n * n, data.len()),
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidParam {
                    field: "distances",
                    reason: format!("nonzero diagonal at {i}"),
                });
            }
            for j in (i + 1)..n {
                let d = data[i * n + j];
                if !d.is_finite() || d <= 0.0 {
                    return Err(Error::InvalidParam {
                        field: "distances",
                        reason: format!("non-finite or non-positive distance at ({i}, {j})"),
                    });
                }
                if (d - data[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidParam {
                        field: "distances",
                        reason: format!("asymmetry at ({i}, {j})"),
                    });
                }
            }
        }
        Ok(Self { n, mode, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> EdgeLengthMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn max_distance(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }
}

/// Spring-model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    /// Display length of one unit of graph distance.
    pub display_length: f64,
    /// Global spring stiffness K.
    pub spring_constant: f64,
    /// A node is at rest when its gradient norm falls below this.
    pub newton_tol: f64,
    /// Outer iteration cap; `None` means `100 * n`.
    pub max_outer_iters: Option<usize>,
    /// Gap between component bounding boxes; `None` means
    /// `0.25 * display_length`.
    pub component_tiling_gap: Option<f64>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            display_length: 1.0,
            spring_constant: 1.0,
            newton_tol: 1e-6,
            max_outer_iters: None,
            component_tiling_gap: None,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |value: f64, field: &'static str| -> Result<()> {
            if value <= 0.0 || !value.is_finite() {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be a positive finite value, got {value}"),
                });
            }
            Ok(())
        };
        positive(self.display_length, "display_length")?;
        positive(self.spring_constant, "spring_constant")?;
        positive(self.newton_tol, "newton_tol")?;
        if self.max_outer_iters == Some(0) {
            return Err(Error::InvalidParam {
                field: "max_outer_iters",
                reason: "must be positive".into(),
            });
        }
        if let Some(gap) = self.component_tiling_gap {
            positive(gap, "component_tiling_gap")?;
        }
        Ok(())
    }

    fn outer_limit(&self, n: usize) -> usize {
        self.max_outer_iters.unwrap_or(100 * n)
    }

    fn gap(&self) -> f64 {
        self.component_tiling_gap.unwrap_or(0.25 * self.display_length)
    }
}

/// Coordinates and convergence record of one layout run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub coordinates: Vec<(f64, f64)>,
    pub final_energy: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Exact all-pairs shortest paths under the chosen edge lengths. The graph
/// must be connected; lay out components separately otherwise.
pub fn shortest_path_distances(graph: &CoGraph, mode: EdgeLengthMode) -> Result<DistanceMatrix> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if connected_components(graph).len() != 1 {
        return Err(Error::Disconnected);
    }
    let nodes: Vec<usize> = (0..graph.node_count()).collect();
    component_distances(graph, &nodes, mode)
}

/// Dijkstra from every listed node, restricted to those nodes. O(k^2) per
/// source, which is fine at layout scale.
fn component_distances(graph: &CoGraph, nodes: &[usize], mode: EdgeLengthMode) -> Result<DistanceMatrix> {
    let k = nodes.len();
    let mut local = vec![usize::MAX; graph.node_count()];
    for (li, &g) in nodes.iter().enumerate() {
        local[g] = li;
    }
    let mut data = vec![f64::INFINITY; k * k];
    let mut dist = vec![f64::INFINITY; k];
    let mut done = vec![false; k];
    for source in 0..k {
        dist.fill(f64::INFINITY);
        done.fill(false);
        dist[source] = 0.0;
        for _ in 0..k {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (i, &d) in dist.iter().enumerate() {
                if !done[i] && d < best {
                    best = d;
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &(nbr, w) in graph.neighbors(nodes[u]) {
                let v = local[nbr];
                if v == usize::MAX {
                    continue;
                }
                let len = match mode {
                    EdgeLengthMode::Unit => 1.0,
                    EdgeLengthMode::InverseWeight => 1.0 / w,
                };
                if dist[u] + len < dist[v] {
                    dist[v] = dist[u] + len;
                }
            }
        }
        if dist.iter().any(|d| !d.is_finite()) {
            return Err(Error::Disconnected);
        }
        data[source * k..(source + 1) * k].copy_from_slice(&dist);
    }
    DistanceMatrix::new(k, data, mode)
}

fn spring(dist: &DistanceMatrix, cfg: &LayoutConfig, i: usize, j: usize) -> (f64, f64) {
    let d = dist.get(i, j);
    (cfg.spring_constant / (d * d), cfg.display_length * d)
}

/// Energy of one pair and its gradient contribution on point `i`.
fn pair_terms(pi: (f64, f64), pj: (f64, f64), k: f64, l: f64) -> (f64, (f64, f64)) {
    let dx = pi.0 - pj.0;
    let dy = pi.1 - pj.1;
    let dist = (dx * dx + dy * dy).sqrt();
    let stretch = dist - l;
    let energy = k * stretch * stretch;
    if dist < 1e-12 {
        // Coincident points: the energy is defined, the direction is not.
        return (energy, (0.0, 0.0));
    }
    let scale = 2.0 * k * stretch / dist;
    (energy, (scale * dx, scale * dy))
}

/// Full energy and per-node gradient of a configuration.
pub fn layout_energy(
    coords: &[(f64, f64)],
    dist: &DistanceMatrix,
    cfg: &LayoutConfig,
) -> (f64, Vec<(f64, f64)>) {
    let n = coords.len();
    debug_assert_eq!(n, dist.n());
    let mut energy = 0.0;
    let mut grad = vec![(0.0, 0.0); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (k, l) = spring(dist, cfg, i, j);
            let (e, g) = pair_terms(coords[i], coords[j], k, l);
            energy += e;
            grad[i].0 += g.0;
            grad[i].1 += g.1;
            grad[j].0 -= g.0;
            grad[j].1 -= g.1;
        }
    }
    (energy, grad)
}

/// Sum of the energy terms involving node `i` at position `p`.
fn node_energy(coords: &[(f64, f64)], dist: &DistanceMatrix, cfg: &LayoutConfig, i: usize, p: (f64, f64)) -> f64 {
    let mut energy = 0.0;
    for (j, &pj) in coords.iter().enumerate() {
        if j == i {
            continue;
        }
        let (k, l) = spring(dist, cfg, i, j);
        let (e, _) = pair_terms(p, pj, k, l);
        energy += e;
    }
    energy
}

fn node_gradient(coords: &[(f64, f64)], dist: &DistanceMatrix, cfg: &LayoutConfig, i: usize) -> (f64, f64) {
    let mut gx = 0.0;
    let mut gy = 0.0;
    for j in 0..coords.len() {
        if j == i {
            continue;
        }
        let (k, l) = spring(dist, cfg, i, j);
        let (_, g) = pair_terms(coords[i], coords[j], k, l);
        gx += g.0;
        gy += g.1;
    }
    (gx, gy)
}

/// 2x2 Hessian of E restricted to node `i`.
fn node_hessian(coords: &[(f64, f64)], dist: &DistanceMatrix, cfg: &LayoutConfig, i: usize) -> (f64, f64, f64) {
    let mut hxx = 0.0;
    let mut hxy = 0.0;
    let mut hyy = 0.0;
    for j in 0..coords.len() {
        if j == i {
            continue;
        }
        let (k, l) = spring(dist, cfg, i, j);
        let dx = coords[i].0 - coords[j].0;
        let dy = coords[i].1 - coords[j].1;
        let d2 = dx * dx + dy * dy;
        let d = d2.sqrt();
        if d < 1e-12 {
            hxx += 2.0 * k;
            hyy += 2.0 * k;
            continue;
        }
        let d3 = d2 * d;
        hxx += 2.0 * k * (1.0 - l * dy * dy / d3);
        hyy += 2.0 * k * (1.0 - l * dx * dx / d3);
        hxy += 2.0 * k * l * dx * dy / d3;
    }
    (hxx, hxy, hyy)
}

fn norm(v: (f64, f64)) -> f64 {
    (v.0 * v.0 + v.1 * v.1).sqrt()
}

const INNER_NEWTON_STEPS: usize = 50;
const MAX_HALVINGS: usize = 60;

/// Kamada-Kawai minimization; also returns the accepted-energy trace
/// (initial energy first, then one entry per accepted step).
pub fn kamada_kawai_with_trace(dist: &DistanceMatrix, cfg: &LayoutConfig) -> Result<(LayoutResult, Vec<f64>)> {
    cfg.validate()?;
    let n = dist.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n == 1 {
        return Ok((
            LayoutResult {
                coordinates: vec![(0.0, 0.0)],
                final_energy: 0.0,
                iterations_used: 0,
                converged: true,
            },
            vec![0.0],
        ));
    }

    // Deterministic circular start in node-index order.
    let radius = cfg.display_length * dist.max_distance() / 2.0;
    let mut coords: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            (radius * theta.cos(), radius * theta.sin())
        })
        .collect();

    let (mut energy, mut grad) = layout_energy(&coords, dist, cfg);
    let mut trace = vec![energy];
    let mut iterations = 0usize;
    let mut converged = false;
    let limit = cfg.outer_limit(n);
    // A node whose energy terms cannot be lowered any further in f64 is
    // frozen so the remaining nodes keep optimizing. Frozen nodes thaw at
    // the end of a round, but only if some move was accepted since the last
    // thaw; otherwise the layout is at its numerical floor and stops.
    let mut frozen = vec![false; n];
    let mut accepts_since_thaw = 0usize;

    'outer: while iterations < limit {
        // Unfrozen node with the largest gradient norm; ties keep the
        // lowest index.
        let mut pick = usize::MAX;
        let mut pick_norm = 0.0;
        for (i, &g) in grad.iter().enumerate() {
            let gn = norm(g);
            if !frozen[i] && gn > pick_norm {
                pick = i;
                pick_norm = gn;
            }
        }
        if pick == usize::MAX || pick_norm < cfg.newton_tol {
            if grad.iter().all(|&g| norm(g) < cfg.newton_tol) {
                converged = true;
                break;
            }
            if accepts_since_thaw > 0 {
                frozen.fill(false);
                accepts_since_thaw = 0;
                continue;
            }
            break;
        }
        iterations += 1;

        for _ in 0..INNER_NEWTON_STEPS {
            let g = grad[pick];
            if norm(g) < cfg.newton_tol {
                break;
            }
            let (hxx, hxy, hyy) = node_hessian(&coords, dist, cfg, pick);
            let det = hxx * hyy - hxy * hxy;
            let newton = if det.abs() > 1e-18 {
                ((-hyy * g.0 + hxy * g.1) / det, (hxy * g.0 - hxx * g.1) / det)
            } else {
                (-g.0, -g.1)
            };

            let old_terms = node_energy(&coords, dist, cfg, pick, coords[pick]);
            let mut accepted: Option<((f64, f64), f64)> = None;
            'directions: for dir in [newton, (-g.0, -g.1)] {
                let mut lambda = 1.0;
                for _ in 0..MAX_HALVINGS {
                    let cand = (coords[pick].0 + lambda * dir.0, coords[pick].1 + lambda * dir.1);
                    let new_terms = node_energy(&coords, dist, cfg, pick, cand);
                    if new_terms < old_terms {
                        accepted = Some((cand, new_terms));
                        break 'directions;
                    }
                    lambda *= 0.5;
                }
            }

            let Some((new_pos, new_terms)) = accepted else {
                frozen[pick] = true;
                continue 'outer;
            };
            accepts_since_thaw += 1;

            // Incremental gradient maintenance: only terms involving the
            // moved node change.
            let old_pos = coords[pick];
            for j in 0..n {
                if j == pick {
                    continue;
                }
                let (k, l) = spring(dist, cfg, pick, j);
                let (_, g_old) = pair_terms(old_pos, coords[j], k, l);
                let (_, g_new) = pair_terms(new_pos, coords[j], k, l);
                grad[j].0 += g_old.0 - g_new.0;
                grad[j].1 += g_old.1 - g_new.1;
            }
            coords[pick] = new_pos;
            grad[pick] = node_gradient(&coords, dist, cfg, pick);
            energy = energy - old_terms + new_terms;
            trace.push(energy);
        }
    }

    // Center the drawing; translation leaves the energy unchanged.
    let (cx, cy) = coords
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (cx, cy) = (cx / n as f64, cy / n as f64);
    for p in &mut coords {
        p.0 -= cx;
        p.1 -= cy;
    }

    let (final_energy, _) = layout_energy(&coords, dist, cfg);
    Ok((
        LayoutResult {
            coordinates: coords,
            final_energy,
            iterations_used: iterations,
            converged,
        },
        trace,
    ))
}

/// Kamada-Kawai minimization of one connected component's distances.
pub fn kamada_kawai(dist: &DistanceMatrix, cfg: &LayoutConfig) -> Result<LayoutResult> {
    kamada_kawai_with_trace(dist, cfg).map(|(result, _)| result)
}

/// Places component layouts side by side, left to right by descending
/// component flow, separated by the tiling gap. Coordinates are returned in
/// the input item order (concatenated), so callers can map them back.
pub fn tile_components(items: &[(LayoutResult, f64)], cfg: &LayoutConfig) -> Result<LayoutResult> {
    cfg.validate()?;
    if items.is_empty() {
        return Err(Error::InvalidParam {
            field: "layouts",
            reason: "at least one component layout required".into(),
        });
    }
    let gap = cfg.gap();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .1
            .partial_cmp(&items[a].1)
            .expect("component flows are finite")
            .then(a.cmp(&b))
    });

    let mut offsets = vec![(0.0, 0.0); items.len()];
    let mut cursor_x = 0.0;
    for &idx in &order {
        let coords = &items[idx].0.coordinates;
        let min_x = coords.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let max_x = coords.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = coords.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        offsets[idx] = (cursor_x - min_x, -min_y);
        cursor_x += (max_x - min_x) + gap;
    }

    let mut coordinates = Vec::new();
    let mut final_energy = 0.0;
    let mut iterations_used = 0;
    let mut converged = true;
    for (idx, (layout, _)) in items.iter().enumerate() {
        let (dx, dy) = offsets[idx];
        coordinates.extend(layout.coordinates.iter().map(|p| (p.0 + dx, p.1 + dy)));
        final_energy += layout.final_energy;
        iterations_used += layout.iterations_used;
        converged &= layout.converged;
    }
    Ok(LayoutResult {
        coordinates,
        final_energy,
        iterations_used,
        converged,
    })
}

/// Lays out a whole graph: one Kamada-Kawai run per connected component,
/// tiled by descending component flow. Coordinates are indexed like the
/// graph's nodes.
pub fn layout_graph(graph: &CoGraph, mode: EdgeLengthMode, cfg: &LayoutConfig) -> Result<LayoutResult> {
    cfg.validate()?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let components = connected_components(graph);
    let mut items = Vec::with_capacity(components.len());
    for nodes in &components {
        let dist = component_distances(graph, nodes, mode)?;
        let layout = kamada_kawai(&dist, cfg)?;
        let flow: f64 = nodes.iter().map(|&i| graph.strength(i)).sum();
        items.push((layout, flow));
    }
    let tiled = tile_components(&items, cfg)?;

    let mut coordinates = vec![(0.0, 0.0); graph.node_count()];
    let mut offset = 0;
    for nodes in &components {
        for (local, &global) in nodes.iter().enumerate() {
            coordinates[global] = tiled.coordinates[offset + local];
        }
        offset += nodes.len();
    }
    Ok(LayoutResult {
        coordinates,
        final_energy: tiled.final_energy,
        iterations_used: tiled.iterations_used,
        converged: tiled.converged,
    })
}
