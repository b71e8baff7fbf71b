use std::collections::HashMap;

use super::{Grid, GridError, SwitchState};

/// One end of a line: `end` 0 is `from_bus`, 1 is `to_bus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Terminal {
    pub line: usize,
    pub end: usize,
}

/// Integer index over a grid for graph algorithms.
///
/// Building the index checks referential integrity, so every analysis that
/// works on a `GridIndex` can rely on resolved endpoints.
#[derive(Debug)]
pub struct GridIndex<'g> {
    pub grid: &'g Grid,
    bus_by_id: HashMap<&'g str, usize>,
    line_by_id: HashMap<&'g str, usize>,
    switch_by_id: HashMap<&'g str, usize>,
    pub line_ends: Vec<[usize; 2]>,
    pub line_switch: Vec<[Option<usize>; 2]>,
    pub line_type: Vec<usize>,
    pub bus_lines: Vec<Vec<usize>>,
    pub transformer_ends: Vec<[usize; 2]>,
    pub source_buses: Vec<usize>,
    pub switch_terminal: Vec<Terminal>,
}

impl<'g> GridIndex<'g> {
    pub fn new(grid: &'g Grid) -> Result<Self, GridError> {
        let bus_by_id: HashMap<&str, usize> = grid.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
        let type_by_name: HashMap<&str, usize> =
            grid.line_types.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
        let line_by_id: HashMap<&str, usize> = grid.lines.iter().enumerate().map(|(i, l)| (l.id.as_str(), i)).collect();
        let switch_by_id: HashMap<&str, usize> =
            grid.switches.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();

        let bus = |id: &str| {
            bus_by_id.get(id).copied().ok_or_else(|| GridError::UnknownElement { kind: "bus", id: id.to_string() })
        };

        let mut line_ends = Vec::with_capacity(grid.lines.len());
        let mut line_type = Vec::with_capacity(grid.lines.len());
        let mut bus_lines = vec![Vec::new(); grid.buses.len()];
        for (li, line) in grid.lines.iter().enumerate() {
            let a = bus(&line.from_bus)?;
            let b = bus(&line.to_bus)?;
            if a == b {
                return Err(GridError::Invalid(1, format!("line {} is a self loop", line.id)));
            }
            line_ends.push([a, b]);
            bus_lines[a].push(li);
            bus_lines[b].push(li);
            line_type.push(
                type_by_name
                    .get(line.line_type.as_str())
                    .copied()
                    .ok_or_else(|| GridError::UnknownElement { kind: "line type", id: line.line_type.clone() })?,
            );
        }

        let mut line_switch = vec![[None, None]; grid.lines.len()];
        let mut switch_terminal = Vec::with_capacity(grid.switches.len());
        for (si, sw) in grid.switches.iter().enumerate() {
            let b = bus(&sw.bus)?;
            let li = line_by_id
                .get(sw.line.as_str())
                .copied()
                .ok_or_else(|| GridError::UnknownElement { kind: "line", id: sw.line.clone() })?;
            let end = line_ends[li].iter().position(|&x| x == b).ok_or_else(|| {
                GridError::Invalid(1, format!("switch {} is not incident to line {}", sw.id, sw.line))
            })?;
            if line_switch[li][end].is_some() {
                return Err(GridError::Invalid(1, format!("switch {} duplicates a terminal", sw.id)));
            }
            line_switch[li][end] = Some(si);
            switch_terminal.push(Terminal { line: li, end });
        }

        let mut transformer_ends = Vec::with_capacity(grid.transformers.len());
        for t in &grid.transformers {
            transformer_ends.push([bus(&t.hv_bus)?, bus(&t.lv_bus)?]);
        }
        let mut source_buses = Vec::new();
        for s in &grid.external_sources {
            source_buses.push(bus(&s.bus)?);
        }
        source_buses.sort_unstable();
        source_buses.dedup();

        Ok(GridIndex {
            grid,
            bus_by_id,
            line_by_id,
            switch_by_id,
            line_ends,
            line_switch,
            line_type,
            bus_lines,
            transformer_ends,
            source_buses,
            switch_terminal,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.grid.buses.len()
    }

    pub fn n_lines(&self) -> usize {
        self.grid.lines.len()
    }

    pub fn bus_idx(&self, id: &str) -> Option<usize> {
        self.bus_by_id.get(id).copied()
    }

    pub fn line_idx(&self, id: &str) -> Option<usize> {
        self.line_by_id.get(id).copied()
    }

    pub fn switch_idx(&self, id: &str) -> Option<usize> {
        self.switch_by_id.get(id).copied()
    }

    /// Switch at the terminal where `line` meets `bus`, if any.
    pub fn switch_at(&self, line: usize, bus: usize) -> Option<usize> {
        let end = self.end_of(line, bus)?;
        self.line_switch[line][end]
    }

    pub fn end_of(&self, line: usize, bus: usize) -> Option<usize> {
        self.line_ends[line].iter().position(|&b| b == bus)
    }

    pub fn other_end(&self, line: usize, bus: usize) -> usize {
        let [a, b] = self.line_ends[line];
        if a == bus {
            b
        } else {
            a
        }
    }

    /// A terminal without a switch is permanently connected.
    pub fn terminal_closed(&self, state: &SwitchState, t: Terminal) -> bool {
        self.line_switch[t.line][t.end].is_none_or(|s| state.is_closed(s))
    }

    /// In service and closed at both ends.
    pub fn line_active(&self, state: &SwitchState, line: usize) -> bool {
        self.grid.lines[line].in_service && (0..2).all(|end| self.terminal_closed(state, Terminal { line, end }))
    }

    pub fn is_busbar(&self, bus: usize) -> bool {
        self.grid.buses[bus].kind.is_busbar()
    }

    pub fn is_station(&self, bus: usize) -> bool {
        self.grid.buses[bus].kind.is_station()
    }

    /// Unordered endpoint pair; exact parallel lines share it.
    pub fn branch_key(&self, line: usize) -> (usize, usize) {
        let [a, b] = self.line_ends[line];
        (a.min(b), a.max(b))
    }
}
