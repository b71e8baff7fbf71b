use std::collections::BTreeSet;

use spade::{DelaunayTriangulation, Point2, Triangulation};

use super::{Measure, PlannerError};
use crate::grid::{BusKind, Grid};

/// Removes every line longer than `threshold_km` and, with `remove_station`,
/// the switching station together with all its lines. Buses that lost a
/// line are recorded in `meta.affected_buses`.
pub fn dismantle(grid: &Grid, threshold_km: f64, remove_station: bool) -> Result<Grid, PlannerError> {
    let mut g = grid.clone();
    let station: Option<String> = if remove_station {
        let stations: Vec<&str> = grid.buses_of_kind(BusKind::SwitchingStation).map(|b| b.id.as_str()).collect();
        match stations.as_slice() {
            [one] => Some(one.to_string()),
            [] => return Err(PlannerError::NoSwitchingStation),
            _ => return Err(PlannerError::SeveralSwitchingStations(stations.len())),
        }
    } else {
        None
    };
    let doomed = |l: &crate::grid::Line| {
        l.length > threshold_km || station.as_ref().is_some_and(|s| &l.from_bus == s || &l.to_bus == s)
    };
    let mut affected: BTreeSet<String> = g.meta.affected_buses.iter().cloned().collect();
    let removed: BTreeSet<String> = g.lines.iter().filter(|l| doomed(l)).map(|l| l.id.clone()).collect();
    for l in g.lines.iter().filter(|l| removed.contains(&l.id)) {
        affected.insert(l.from_bus.clone());
        affected.insert(l.to_bus.clone());
    }
    g.lines.retain(|l| !removed.contains(&l.id));
    g.switches.retain(|s| !removed.contains(&s.line));
    if let Some(s) = &station {
        g.buses.retain(|b| &b.id != s);
        g.injections.retain(|i| &i.bus != s);
        affected.remove(s);
    }
    g.meta.affected_buses =
        affected.into_iter().filter(|b| g.bus(b).is_some_and(|b| b.kind != BusKind::Junction)).collect();
    Ok(g)
}

/// Delaunay edges over `points` as index pairs `(i, j)` with `i < j`, sorted.
///
/// Up to three points give the complete graph; collinear points are chained
/// in order along the line. Coincident points are joined to their first copy.
pub fn delaunay_edges(points: &[(f64, f64)]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut edges = BTreeSet::new();
    if n <= 3 {
        for i in 0..n {
            for j in i + 1..n {
                edges.insert((i, j));
            }
        }
        return edges.into_iter().collect();
    }
    // Distinct positions only.
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        match reps.iter().find(|&&r| points[r] == points[i]) {
            Some(&r) => {
                edges.insert((r, i));
            }
            None => reps.push(i),
        }
    }
    let collinear = reps.len() < 3 || {
        let (a, b) = (points[reps[0]], points[reps[1]]);
        reps[2..].iter().all(|&k| {
            let c = points[k];
            ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs() <= 1e-9 * (1.0 + a.0.abs() + a.1.abs())
        })
    };
    if collinear {
        let mut sorted = reps.clone();
        sorted.sort_by(|&i, &j| points[i].0.total_cmp(&points[j].0).then(points[i].1.total_cmp(&points[j].1)));
        for w in sorted.windows(2) {
            edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
        return edges.into_iter().collect();
    }
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_point = Vec::new();
    for &r in &reps {
        let (x, y) = points[r];
        if let Ok(h) = tri.insert(Point2::new(x, y)) {
            let k = h.index();
            if handle_to_point.len() <= k {
                handle_to_point.resize(k + 1, usize::MAX);
            }
            handle_to_point[k] = r;
        }
    }
    for e in tri.undirected_edges() {
        let [a, b] = e.vertices();
        let (i, j) = (handle_to_point[a.fix().index()], handle_to_point[b.fix().index()]);
        edges.insert((i.min(j), i.max(j)));
    }
    edges.into_iter().collect()
}

/// New line trails between the affected buses of a dismantled grid: edges of
/// their Delaunay triangulation not already joined by a line, with length =
/// air-line distance × `trail_factor`.
pub fn candidate_trails(grid: &Grid, trail_factor: f64, line_type: &str) -> Vec<Measure> {
    let pts: Vec<&crate::grid::Bus> = grid.meta.affected_buses.iter().filter_map(|b| grid.bus(b)).collect();
    let coords: Vec<(f64, f64)> = pts.iter().map(|b| (b.x, b.y)).collect();
    let connected: BTreeSet<(String, String)> = grid
        .lines
        .iter()
        .filter(|l| l.in_service)
        .map(|l| {
            let (a, b) = (l.from_bus.clone(), l.to_bus.clone());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    let mut out = Vec::new();
    for (i, j) in delaunay_edges(&coords) {
        let (a, b) = (pts[i], pts[j]);
        let key = if a.id < b.id { (a.id.clone(), b.id.clone()) } else { (b.id.clone(), a.id.clone()) };
        if connected.contains(&key) || (a.kind.is_busbar() && b.kind.is_busbar()) {
            continue;
        }
        let dist_km = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt() / 1000.0;
        if dist_km <= 0.0 {
            continue;
        }
        out.push(Measure::AddTrail {
            from_station: key.0,
            to_station: key.1,
            line_type: line_type.to_string(),
            length: dist_km * trail_factor,
        });
    }
    out
}
