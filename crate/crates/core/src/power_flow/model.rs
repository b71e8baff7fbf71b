use nalgebra::DMatrix;

use super::PfError;
use crate::grid::{apply_scenario, GridIndex, Scenario, SwitchState};
use crate::topology::energized_in;

/// System base power in MVA.
pub const S_BASE_MVA: f64 = 1.0;

#[derive(Debug, Clone)]
pub(crate) struct PfBranch {
    pub line: usize,
    pub from: usize,
    pub to: usize,
    pub g: f64,
    pub b: f64,
    pub r_pu: f64,
    pub x_pu: f64,
    pub i_base_ka: f64,
    pub i_max_ka: f64,
}

/// Bus admittance model of the energized grid for one scenario.
///
/// Lines are series R + jX; the low-voltage side of every transformer is a
/// slack bus held at the scenario setpoint. Unknowns are ordered
/// `[angles of non-slack buses, magnitudes of non-slack buses]`.
#[derive(Debug, Clone)]
pub struct PfModel {
    /// Grid bus index of each model bus.
    pub(crate) buses: Vec<usize>,
    pub(crate) slack: Vec<bool>,
    pub(crate) slack_vm: Vec<f64>,
    pub(crate) pq: Vec<usize>,
    pub(crate) pq_pos: Vec<usize>,
    g: Vec<f64>,
    b: Vec<f64>,
    pub(crate) neighbours: Vec<Vec<usize>>,
    pub(crate) p_spec: Vec<f64>,
    pub(crate) q_spec: Vec<f64>,
    pub(crate) branches: Vec<PfBranch>,
    /// Stations not connected to any source.
    pub(crate) unsupplied: Vec<usize>,
}

impl PfModel {
    pub fn build(idx: &GridIndex, state: &SwitchState, scenario: &Scenario) -> Result<Self, PfError> {
        let grid = idx.grid;
        let setpoints = apply_scenario(grid, scenario)?;
        let on = energized_in(idx, state);
        let hv: Vec<bool> = {
            let mut v = vec![false; idx.n_buses()];
            for &[h, _] in &idx.transformer_ends {
                v[h] = true;
            }
            v
        };
        let mut pos = vec![usize::MAX; idx.n_buses()];
        let mut buses = Vec::new();
        for b in 0..idx.n_buses() {
            if on[b] && !hv[b] {
                pos[b] = buses.len();
                buses.push(b);
            }
        }
        let n = buses.len();
        let mut slack = vec![false; n];
        let mut slack_vm = vec![1.0; n];
        for (t, &[h, lv]) in grid.transformers.iter().zip(&idx.transformer_ends) {
            if on[h] && pos[lv] != usize::MAX {
                slack[pos[lv]] = true;
                slack_vm[pos[lv]] = setpoints.transformer_setpoints[&t.id];
            }
        }
        for src in &grid.external_sources {
            let b = idx.bus_idx(&src.bus).expect("indexed");
            if !hv[b] && pos[b] != usize::MAX && !slack[pos[b]] {
                slack[pos[b]] = true;
                slack_vm[pos[b]] = src.vm_pu;
            }
        }

        let mut g = vec![0.0; n * n];
        let mut bm = vec![0.0; n * n];
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut branches = Vec::new();
        for l in 0..idx.n_lines() {
            if !idx.line_active(state, l) {
                continue;
            }
            let [fa, ta] = idx.line_ends[l];
            let (f, t) = (pos[fa], pos[ta]);
            if f == usize::MAX || t == usize::MAX {
                continue;
            }
            let line = &grid.lines[l];
            let lt = &grid.line_types[idx.line_type[l]];
            let vn = grid.buses[fa].vn;
            let z_base = vn * vn / S_BASE_MVA;
            let r = (lt.r_per_km * line.length / z_base).max(0.0);
            let x = (lt.x_per_km * line.length / z_base).max(0.0);
            let (r, x) = if r * r + x * x < 1e-18 { (0.0, 1e-9) } else { (r, x) };
            let den = r * r + x * x;
            let (gs, bs) = (r / den, -x / den);
            g[f * n + f] += gs;
            bm[f * n + f] += bs;
            g[t * n + t] += gs;
            bm[t * n + t] += bs;
            g[f * n + t] -= gs;
            bm[f * n + t] -= bs;
            g[t * n + f] -= gs;
            bm[t * n + f] -= bs;
            if !neighbours[f].contains(&t) {
                neighbours[f].push(t);
                neighbours[t].push(f);
            }
            branches.push(PfBranch {
                line: l,
                from: f,
                to: t,
                g: gs,
                b: bs,
                r_pu: r,
                x_pu: x,
                i_base_ka: S_BASE_MVA / (3f64.sqrt() * vn),
                i_max_ka: lt.i_max,
            });
        }

        let mut p_spec = vec![0.0; n];
        let mut q_spec = vec![0.0; n];
        for (bus_id, d) in &setpoints.demand {
            let b = idx.bus_idx(bus_id).expect("validated");
            if pos[b] != usize::MAX {
                p_spec[pos[b]] -= d.p_mw / S_BASE_MVA;
                q_spec[pos[b]] -= d.q_mvar / S_BASE_MVA;
            }
        }
        let pq: Vec<usize> = (0..n).filter(|&i| !slack[i]).collect();
        let mut pq_pos = vec![usize::MAX; n];
        for (k, &i) in pq.iter().enumerate() {
            pq_pos[i] = k;
        }
        let unsupplied = (0..idx.n_buses()).filter(|&b| idx.is_station(b) && !on[b]).collect();
        Ok(PfModel { buses, slack, slack_vm, pq, pq_pos, g, b: bm, neighbours, p_spec, q_spec, branches, unsupplied })
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// Number of unknowns (twice the number of non-slack buses).
    pub fn n_unknowns(&self) -> usize {
        2 * self.pq.len()
    }

    #[inline]
    fn gb(&self, i: usize, j: usize) -> (f64, f64) {
        let n = self.buses.len();
        (self.g[i * n + j], self.b[i * n + j])
    }

    /// Flat start: slack at setpoint, all other buses 1.0 pu, 0 rad.
    pub fn flat_start(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n_unknowns()];
        let m = self.pq.len();
        for k in 0..m {
            x[m + k] = 1.0;
        }
        x
    }

    /// Full angle/magnitude vectors for an unknown vector `x`.
    pub fn expand(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.buses.len();
        let m = self.pq.len();
        let mut va = vec![0.0; n];
        let mut vm = self.slack_vm.clone();
        for (k, &i) in self.pq.iter().enumerate() {
            va[i] = x[k];
            vm[i] = x[m + k];
        }
        (va, vm)
    }

    /// Calculated active and reactive bus injections (pu).
    pub fn injections(&self, va: &[f64], vm: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.buses.len();
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            let (gii, bii) = self.gb(i, i);
            let mut pi = vm[i] * vm[i] * gii;
            let mut qi = -vm[i] * vm[i] * bii;
            for &j in &self.neighbours[i] {
                let (gij, bij) = self.gb(i, j);
                let th = va[i] - va[j];
                let (s, c) = th.sin_cos();
                pi += vm[i] * vm[j] * (gij * c + bij * s);
                qi += vm[i] * vm[j] * (gij * s - bij * c);
            }
            p[i] = pi;
            q[i] = qi;
        }
        (p, q)
    }

    /// Power mismatch `[P_calc - P_spec; Q_calc - Q_spec]` at non-slack buses.
    pub fn mismatch(&self, x: &[f64]) -> Vec<f64> {
        let (va, vm) = self.expand(x);
        let (p, q) = self.injections(&va, &vm);
        let m = self.pq.len();
        let mut f = vec![0.0; 2 * m];
        for (k, &i) in self.pq.iter().enumerate() {
            f[k] = p[i] - self.p_spec[i];
            f[m + k] = q[i] - self.q_spec[i];
        }
        f
    }

    /// Analytic Jacobian of [`PfModel::mismatch`] in polar coordinates.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let (va, vm) = self.expand(x);
        let (p, q) = self.injections(&va, &vm);
        let m = self.pq.len();
        let mut jac = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for (r, &i) in self.pq.iter().enumerate() {
            let (gii, bii) = self.gb(i, i);
            jac[(r, r)] = -q[i] - bii * vm[i] * vm[i];
            jac[(r, m + r)] = p[i] / vm[i] + gii * vm[i];
            jac[(m + r, r)] = p[i] - gii * vm[i] * vm[i];
            jac[(m + r, m + r)] = q[i] / vm[i] - bii * vm[i];
            for &j in &self.neighbours[i] {
                let c = self.pq_pos[j];
                if c == usize::MAX {
                    continue;
                }
                let (gij, bij) = self.gb(i, j);
                let (s, co) = (va[i] - va[j]).sin_cos();
                let a = gij * s - bij * co;
                let bb = gij * co + bij * s;
                jac[(r, c)] = vm[i] * vm[j] * a;
                jac[(r, m + c)] = vm[i] * bb;
                jac[(m + r, c)] = -vm[i] * vm[j] * bb;
                jac[(m + r, m + c)] = vm[i] * a;
            }
        }
        jac
    }
}
