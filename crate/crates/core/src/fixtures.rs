//! Small synthetic grids used by tests, benches and the CLI examples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{
    Bus, BusKind, Construction, ExternalSource, Grid, GridMeta, Injection, InjectionCategory, Line, LineOrigin,
    LineType, Switch, SwitchKind, Transformer,
};

pub const CABLE_150: &str = "NA2XS2Y 3x1x150";
pub const CABLE_240: &str = "NA2XS2Y 3x1x240";
pub const CABLE_300: &str = "NA2XS2Y 3x1x300";
pub const OVERHEAD_50: &str = "48-AL1/8-ST1A";

/// 20 kV cable and overhead types.
pub fn standard_line_types() -> Vec<LineType> {
    let cable = |name: &str, r, x, i| LineType {
        name: name.into(),
        r_per_km: r,
        x_per_km: x,
        i_max: i,
        construction: Construction::Cable,
        insulation: Some("xlpe".into()),
    };
    vec![
        cable(CABLE_150, 0.206, 0.116, 0.319),
        cable(CABLE_240, 0.125, 0.110, 0.417),
        cable(CABLE_300, 0.100, 0.107, 0.457),
        LineType {
            name: OVERHEAD_50.into(),
            r_per_km: 0.5939,
            x_per_km: 0.372,
            i_max: 0.21,
            construction: Construction::Overhead,
            insulation: None,
        },
    ]
}

/// Terse grid construction. Lines get a closed breaker at busbar ends and a
/// closed load-break switch at station ends; switch ids are `<line>@<bus>`.
#[derive(Debug, Clone)]
pub struct GridBuilder {
    grid: Grid,
}

pub fn switch_id(line: &str, bus: &str) -> String {
    format!("{line}@{bus}")
}

impl GridBuilder {
    pub fn new(name: &str) -> Self {
        GridBuilder {
            grid: Grid {
                buses: Vec::new(),
                line_types: standard_line_types(),
                lines: Vec::new(),
                switches: Vec::new(),
                transformers: Vec::new(),
                injections: Vec::new(),
                external_sources: Vec::new(),
                meta: GridMeta { name: name.into(), affected_buses: Vec::new() },
            },
        }
    }

    fn bus(&mut self, id: &str, kind: BusKind, x: f64, y: f64, vn: f64) {
        self.grid.buses.push(Bus { id: id.into(), kind, x, y, vn, requires_contingency_supply: true });
    }

    /// HV/MV substation: a 110 kV bus with the external source, a 40 MVA
    /// transformer and the 20 kV busbar `id`.
    pub fn primary(mut self, id: &str, x: f64, y: f64) -> Self {
        let hv = format!("{id}_hv");
        self.bus(&hv, BusKind::PrimarySubstation, x, y, 110.0);
        self.bus(id, BusKind::PrimarySubstation, x, y, 20.0);
        self.grid.transformers.push(Transformer {
            id: format!("{id}_tr"),
            hv_bus: hv.clone(),
            lv_bus: id.into(),
            sn: 40.0,
            setpoint_by_scenario: BTreeMap::from([("peak_load".into(), 1.0), ("peak_generation".into(), 1.05)]),
        });
        self.grid.external_sources.push(ExternalSource { id: format!("{id}_ext"), bus: hv, vm_pu: 1.0 });
        self
    }

    /// A bare 20 kV source busbar without transformer, held at `vm_pu`.
    pub fn source(mut self, id: &str, x: f64, y: f64, vm_pu: f64) -> Self {
        self.bus(id, BusKind::PrimarySubstation, x, y, 20.0);
        self.grid.external_sources.push(ExternalSource { id: format!("{id}_ext"), bus: id.into(), vm_pu });
        self
    }

    /// Secondary substation with a load of `load_mva` (omitted when zero).
    pub fn station(mut self, id: &str, x: f64, y: f64, load_mva: f64) -> Self {
        self.bus(id, BusKind::SecondarySubstation, x, y, 20.0);
        if load_mva > 0.0 {
            self = self.load(id, load_mva);
        }
        self
    }

    pub fn switching_station(mut self, id: &str, x: f64, y: f64) -> Self {
        self.bus(id, BusKind::SwitchingStation, x, y, 20.0);
        self
    }

    pub fn junction(mut self, id: &str, x: f64, y: f64) -> Self {
        self.bus(id, BusKind::Junction, x, y, 20.0);
        self
    }

    pub fn load(self, bus: &str, sn: f64) -> Self {
        self.injection(bus, sn, InjectionCategory::Load, None)
    }

    pub fn load_pf(self, bus: &str, sn: f64, pf: f64) -> Self {
        self.injection(bus, sn, InjectionCategory::Load, Some(pf))
    }

    pub fn pv(self, bus: &str, sn: f64) -> Self {
        self.injection(bus, sn, InjectionCategory::Pv, None)
    }

    pub fn wind(self, bus: &str, sn: f64) -> Self {
        self.injection(bus, sn, InjectionCategory::Wind, None)
    }

    fn injection(mut self, bus: &str, sn: f64, category: InjectionCategory, p_factor: Option<f64>) -> Self {
        let n = self.grid.injections.iter().filter(|i| i.bus == bus && i.category == category).count();
        let tag = match category {
            InjectionCategory::Load => "load",
            InjectionCategory::Pv => "pv",
            InjectionCategory::Wind => "wind",
        };
        let id = if n == 0 { format!("{tag}_{bus}") } else { format!("{tag}_{bus}_{n}") };
        self.grid.injections.push(Injection { id, bus: bus.into(), sn, p_factor, category });
        self
    }

    pub fn line(mut self, id: &str, from: &str, to: &str, length: f64, line_type: &str) -> Self {
        self.grid.lines.push(Line {
            id: id.into(),
            from_bus: from.into(),
            to_bus: to.into(),
            length,
            line_type: line_type.into(),
            in_service: true,
            origin: LineOrigin::Existing,
        });
        for b in [from, to] {
            let kind = self.grid.bus(b).map(|b| b.kind);
            let sw_kind = match kind {
                Some(k) if k.is_busbar() => SwitchKind::CircuitBreaker,
                Some(BusKind::SecondarySubstation) => SwitchKind::LoadBreak,
                _ => continue,
            };
            self.grid.switches.push(Switch {
                id: switch_id(id, b),
                bus: b.into(),
                line: id.into(),
                closed: true,
                kind: sw_kind,
                remote_controlled: false,
            });
        }
        self
    }

    /// Opens the switch of `line` at `bus`.
    pub fn open(mut self, line: &str, bus: &str) -> Self {
        let id = switch_id(line, bus);
        let sw = self.grid.switches.iter_mut().find(|s| s.id == id).unwrap_or_else(|| panic!("no switch {id}"));
        sw.closed = false;
        self
    }

    pub fn remote(mut self, bus: &str) -> Self {
        for s in self.grid.switches.iter_mut().filter(|s| s.bus == bus) {
            s.remote_controlled = true;
        }
        self
    }

    pub fn build(self) -> Grid {
        self.grid
    }
}

/// Open ring: two half-rings from one busbar, sectioning point between S3 and S4.
pub fn fig1_open_ring() -> Grid {
    ring_base("open_ring").open("L4", "S4").build()
}

/// The same ring with the sectioning point closed.
pub fn fig1_closed_ring() -> Grid {
    ring_base("closed_ring").build()
}

/// Ring from the primary substation through a switching station with breakers.
pub fn fig1_switching_station_ring() -> Grid {
    GridBuilder::new("switching_station_ring")
        .primary("P", 0.0, 0.0)
        .switching_station("W", 3000.0, 0.0)
        .station("S1", 1000.0, 600.0, 0.4)
        .station("S2", 2000.0, 600.0, 0.4)
        .station("S3", 1000.0, -600.0, 0.4)
        .station("S4", 2000.0, -600.0, 0.4)
        .line("L1", "P", "S1", 1.2, CABLE_240)
        .line("L2", "S1", "S2", 1.0, CABLE_240)
        .line("L3", "S2", "W", 1.2, OVERHEAD_50)
        .line("L4", "W", "S4", 1.2, OVERHEAD_50)
        .line("L5", "S4", "S3", 1.0, CABLE_240)
        .line("L6", "S3", "P", 1.2, CABLE_240)
        .build()
}

fn ring_base(name: &str) -> GridBuilder {
    GridBuilder::new(name)
        .primary("P", 0.0, 0.0)
        .station("S1", 800.0, 800.0, 0.4)
        .station("S2", 1800.0, 1000.0, 0.3)
        .station("S3", 2800.0, 600.0, 0.5)
        .station("S4", 2800.0, -600.0, 0.4)
        .station("S5", 1800.0, -1000.0, 0.3)
        .station("S6", 800.0, -800.0, 0.4)
        .line("L1", "P", "S1", 1.2, CABLE_240)
        .line("L2", "S1", "S2", 1.1, CABLE_240)
        .line("L3", "S2", "S3", 1.1, CABLE_240)
        .line("L4", "S3", "S4", 1.3, CABLE_240)
        .line("L5", "S4", "S5", 1.1, CABLE_240)
        .line("L6", "S5", "S6", 1.1, CABLE_240)
        .line("L7", "S6", "P", 1.2, CABLE_240)
}

/// Open ring of six stations; a fault on L2 takes the canonical
/// trip, isolate, re-close and resupply path.
pub fn fig5_ring() -> Grid {
    ring_base("fig5").open("L4", "S4").build()
}

/// A radial spur hanging off the open ring: S7 has only one connection.
pub fn ring_with_stub() -> Grid {
    let mut b = ring_base("ring_with_stub").open("L4", "S4");
    b = b.station("S7", 1800.0, 2000.0, 0.2).line("L8", "S2", "S7", 1.0, CABLE_150);
    b.build()
}

/// Slack bus at `v0` pu, one line, one load: the closed-form power-flow case.
pub fn two_bus(length_km: f64, load_mva: f64, pf: f64) -> Grid {
    GridBuilder::new("two_bus")
        .source("A", 0.0, 0.0, 1.0)
        .station("B", 1000.0, 0.0, 0.0)
        .load_pf("B", load_mva, pf)
        .line("L1", "A", "B", length_km, CABLE_150)
        .build()
}

/// One station on a 1 km stub: the single-term FMEA hand case when the
/// line rate is 0.1 /a and fault location plus switching take 2 h.
pub fn single_station() -> Grid {
    GridBuilder::new("single_station")
        .primary("P", 0.0, 0.0)
        .station("S1", 1000.0, 0.0, 0.0)
        .load_pf("S1", 0.1, 1.0)
        .line("L1", "P", "S1", 1.0, CABLE_150)
        .build()
}

/// Two feeders from one busbar joined by an open sectioning point: six buses.
pub fn two_feeder_six_bus() -> Grid {
    GridBuilder::new("two_feeder_six_bus")
        .primary("P", 0.0, 0.0)
        .station("A1", 1000.0, 500.0, 0.3)
        .station("A2", 2000.0, 500.0, 0.5)
        .station("B1", 1000.0, -500.0, 0.4)
        .station("B2", 2000.0, -500.0, 0.2)
        .line("LA1", "P", "A1", 1.1, CABLE_240)
        .line("LA2", "A1", "A2", 1.0, OVERHEAD_50)
        .line("LB1", "P", "B1", 1.1, CABLE_150)
        .line("LB2", "B1", "B2", 1.0, CABLE_240)
        .line("LX", "A2", "B2", 1.0, CABLE_240)
        .open("LX", "B2")
        .build()
}

/// Random radial feeder tree of `n_stations` stations below one source
/// busbar, with loads, some PV and a few open spare links.
pub fn random_radial(seed: u64, n_stations: usize) -> Grid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = [CABLE_150, CABLE_240, CABLE_300, OVERHEAD_50];
    let mut b = GridBuilder::new(&format!("random_{seed}")).primary("P", 0.0, 0.0);
    let mut pos: Vec<(String, f64, f64)> = vec![("P".into(), 0.0, 0.0)];
    for k in 0..n_stations {
        let id = format!("S{k}");
        let (pid, px, py) = pos[rng.gen_range(0..pos.len())].clone();
        let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let dist: f64 = rng.gen_range(300.0..1500.0);
        let (x, y) = (px + dist * ang.cos(), py + dist * ang.sin());
        b = b.station(&id, x, y, rng.gen_range(0.05..0.5));
        if rng.gen_bool(0.3) {
            b = b.pv(&id, rng.gen_range(0.1..0.8));
        }
        let t = types[rng.gen_range(0..types.len())];
        b = b.line(&format!("L{k}"), &pid, &id, (dist / 1000.0 * 1.2).max(0.05), t);
        pos.push((id, x, y));
    }
    // Spare links between random station pairs, left open.
    for k in 0..n_stations / 5 {
        let i = rng.gen_range(1..pos.len());
        let j = rng.gen_range(1..pos.len());
        if i == j {
            continue;
        }
        let (a, ax, ay) = pos[i].clone();
        let (c, cx, cy) = pos[j].clone();
        let len = (((ax - cx).powi(2) + (ay - cy).powi(2)).sqrt() / 1000.0).max(0.1);
        let id = format!("X{k}");
        b = b.line(&id, &a, &c, len, CABLE_240).open(&id, &c);
    }
    b.build()
}

/// Planning area around one switching station: 23 secondary substations in
/// rings from the primary substation and from the switching station, and a
/// remote cluster hanging on long overhead lines.
pub fn example_area() -> Grid {
    let mut b = GridBuilder::new("example_area").primary("P", 0.0, 0.0).switching_station("W", 2000.0, 0.0);
    let stations: [(&str, f64, f64); 23] = [
        ("A1", -800.0, 700.0),
        ("A2", -1600.0, 900.0),
        ("A3", -2200.0, 0.0),
        ("A4", -1600.0, -900.0),
        ("A5", -800.0, -700.0),
        ("B1", 700.0, 800.0),
        ("B2", 1400.0, 900.0),
        ("C1", 700.0, -800.0),
        ("C2", 1400.0, -900.0),
        ("D1", 2700.0, 700.0),
        ("D2", 3500.0, 800.0),
        ("D3", 4200.0, 0.0),
        ("D4", 3500.0, -800.0),
        ("D5", 2700.0, -700.0),
        ("E1", 2000.0, 1300.0),
        ("E2", 2800.0, 1900.0),
        ("E3", 3600.0, 1800.0),
        ("F1", 5600.0, 600.0),
        ("F2", 6200.0, -200.0),
        ("F3", 5600.0, -900.0),
        ("G1", 0.0, -1500.0),
        ("G2", 500.0, -2300.0),
        ("G3", 1300.0, -1900.0),
    ];
    for (k, (id, x, y)) in stations.iter().enumerate() {
        b = b.station(id, *x, *y, [0.4, 0.3, 0.5][k % 3]);
    }
    b = b.pv("F2", 1.0).pv("E3", 0.6).pv("G2", 0.5);
    let lines: [(&str, &str, &str, f64, &str); 29] = [
        ("LA1", "P", "A1", 1.3, CABLE_240),
        ("LA2", "A1", "A2", 1.0, CABLE_240),
        ("LA3", "A2", "A3", 1.2, CABLE_240),
        ("LA4", "A3", "A4", 1.3, CABLE_240),
        ("LA5", "A4", "A5", 1.0, CABLE_240),
        ("LA6", "A5", "P", 1.3, CABLE_240),
        ("LB1", "P", "B1", 1.2, CABLE_240),
        ("LB2", "B1", "B2", 0.9, CABLE_240),
        ("LB3", "B2", "W", 1.4, OVERHEAD_50),
        ("LC1", "P", "C1", 1.2, CABLE_240),
        ("LC2", "C1", "C2", 0.9, CABLE_240),
        ("LC3", "C2", "W", 1.4, OVERHEAD_50),
        ("LD1", "W", "D1", 1.3, OVERHEAD_50),
        ("LD2", "D1", "D2", 1.0, CABLE_240),
        ("LD3", "D2", "D3", 1.2, CABLE_240),
        ("LD4", "D3", "D4", 1.2, CABLE_240),
        ("LD5", "D4", "D5", 1.0, CABLE_240),
        ("LD6", "D5", "W", 1.3, OVERHEAD_50),
        ("LE1", "W", "E1", 1.7, OVERHEAD_50),
        ("LE2", "E1", "E2", 1.2, CABLE_150),
        ("LE3", "E2", "E3", 1.0, CABLE_150),
        ("LE4", "E3", "D2", 1.2, CABLE_150),
        ("LF1", "D3", "F1", 2.4, OVERHEAD_50),
        ("LF2", "F1", "F2", 1.2, OVERHEAD_50),
        ("LF3", "F2", "F3", 1.3, OVERHEAD_50),
        ("LF4", "F3", "D4", 2.7, OVERHEAD_50),
        ("LG1", "P", "G1", 1.6, CABLE_240),
        ("LG2", "G1", "G2", 1.0, CABLE_240),
        ("LG3", "G2", "G3", 1.0, CABLE_240),
    ];
    for (id, from, to, len, t) in lines {
        b = b.line(id, from, to, len, t);
    }
    b.line("LG4", "G3", "C1", 1.4, CABLE_240)
        .open("LA4", "A4")
        .open("LD4", "D4")
        .open("LE4", "D2")
        .open("LF4", "F3")
        .open("LG4", "C1")
        .build()
}

/// Small area whose switching station can be replaced by about 4 km of new
/// cable once it is removed.
pub fn station_replaceable() -> Grid {
    GridBuilder::new("station_replaceable")
        .primary("P", 0.0, 0.0)
        .switching_station("W", 3000.0, 0.0)
        .station("S1", 1000.0, 600.0, 0.3)
        .station("S2", 2000.0, 600.0, 0.3)
        .station("S3", 1000.0, -600.0, 0.3)
        .station("S4", 2000.0, -600.0, 0.3)
        .station("D1", 3400.0, 500.0, 0.3)
        .station("D2", 3400.0, -500.0, 0.3)
        .line("L1", "P", "S1", 1.2, CABLE_240)
        .line("L2", "S1", "S2", 1.0, CABLE_240)
        .line("L3", "S2", "W", 1.2, OVERHEAD_50)
        .line("L4", "W", "S4", 1.2, OVERHEAD_50)
        .line("L5", "S4", "S3", 1.0, CABLE_240)
        .line("L6", "S3", "P", 1.2, CABLE_240)
        .line("L7", "W", "D1", 0.8, OVERHEAD_50)
        .line("L8", "D1", "D2", 1.0, CABLE_240)
        .line("L9", "D2", "W", 0.8, OVERHEAD_50)
        .open("L8", "D2")
        .build()
}

/// Ring of three stations on long overhead spans with strong PV. Radially
/// operated, either half-ring rises above the voltage band at peak
/// generation; closing the ring keeps it inside. The switching station is
/// a spur that plays no part in the trade-off.
pub fn ring_tradeoff(pv_mva: f64) -> Grid {
    let mut b = GridBuilder::new("ring_tradeoff")
        .primary("P", 0.0, 0.0)
        .switching_station("W", -1500.0, 0.0)
        .station("R1", 1200.0, 1200.0, 0.2)
        .station("R2", 2400.0, 0.0, 0.2)
        .station("R3", 1200.0, -1200.0, 0.2)
        .line("L1", "P", "R1", 2.0, OVERHEAD_50)
        .line("L2", "R1", "R2", 2.0, OVERHEAD_50)
        .line("L3", "R2", "R3", 2.0, OVERHEAD_50)
        .line("L4", "R3", "P", 2.0, OVERHEAD_50)
        .line("LW", "P", "W", 1.5, CABLE_240)
        .open("L3", "R3");
    for s in ["R1", "R2", "R3"] {
        b = b.pv(s, pv_mva);
    }
    b.build()
}

/// Open ring of eight stations on overhead spans of `span_km`, sectioning
/// point in the middle. Longer spans raise the outage energy of every
/// station; the 1.5 km version serves as the reliability baseline.
pub fn overhead_ring(span_km: f64) -> Grid {
    let mut b = GridBuilder::new("overhead_ring").primary("P", 0.0, 0.0);
    let ids: Vec<String> = (1..=8).map(|k| format!("S{k}")).collect();
    for (k, id) in ids.iter().enumerate() {
        let a = std::f64::consts::PI * (k as f64 + 1.0) / 9.0;
        b = b.station(id, 3000.0 * a.sin(), 3000.0 * (1.0 - a.cos()), 0.4);
    }
    let mut prev = "P".to_string();
    for (k, id) in ids.iter().enumerate() {
        b = b.line(&format!("L{}", k + 1), &prev, id, span_km, OVERHEAD_50);
        prev = id.clone();
    }
    b.line("L9", &prev, "P", span_km, OVERHEAD_50).open("L5", "S5").build()
}
