//! Honeycomb code on a periodic brick-wall layout.
//!
//! Data qubit `c * height + y` sits at `(2c + 1, y)`. Columns are joined by
//! vertical edges, and horizontal edges leave `(c, y)` to the right when
//! `c + y` is even. Every edge's first endpoint is the even-parity one.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::builder::Builder;
use super::{apply_noise_model, check_strength, GenerateError, NoiseModel};
use crate::circuit::{Circuit, Opcode};
use crate::pauli::{Axis, PauliString};

const COLORS: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

fn color_index(a: Axis) -> usize {
    match a {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    }
}

/// Which logical observable the memory experiment protects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HoneycombObservable {
    #[serde(rename = "H")]
    Horizontal,
    #[serde(rename = "V")]
    Vertical,
}

impl HoneycombObservable {
    /// Index used in OBSERVABLE_INCLUDE.
    pub fn index(self) -> u32 {
        match self {
            HoneycombObservable::Vertical => 0,
            HoneycombObservable::Horizontal => 1,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            HoneycombObservable::Horizontal => "H",
            HoneycombObservable::Vertical => "V",
        }
    }
}

impl fmt::Display for HoneycombObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for HoneycombObservable {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "h" | "horizontal" => Ok(HoneycombObservable::Horizontal),
            "v" | "vertical" => Ok(HoneycombObservable::Vertical),
            _ => Err(GenerateError::InvalidSpec(format!("unknown honeycomb observable {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoneycombSpec {
    /// Number of data-qubit columns.
    pub width: usize,
    /// Number of data-qubit rows.
    pub height: usize,
    pub rounds: usize,
    pub model: NoiseModel,
    pub p: f64,
    pub observable: HoneycombObservable,
}

impl HoneycombSpec {
    /// A `d x 1.5d` torus run for `3d` rounds.
    pub fn for_distance(d: usize, model: NoiseModel, p: f64, observable: HoneycombObservable) -> Self {
        HoneycombSpec {
            width: d,
            height: 3 * d / 2,
            rounds: 3 * d,
            model,
            p,
            observable,
        }
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = rounds;
        self
    }

    /// Code distance of the layout (the width).
    pub fn distance(&self) -> usize {
        self.width
    }

    pub fn num_data_qubits(&self) -> usize {
        self.width * self.height
    }

    pub fn num_qubits(&self) -> usize {
        let n = self.num_data_qubits();
        if self.model.uses_ancillas() {
            n + 3 * n / 2
        } else {
            n
        }
    }

    /// Number of sub-rounds. The last round is cut short so the run ends on
    /// a sub-round whose Pauli matches the observable's current type: after
    /// its X sub-round for odd round counts, after its Y sub-round for even.
    pub fn subrounds(&self) -> usize {
        if self.rounds % 2 == 1 {
            3 * self.rounds - 2
        } else {
            3 * self.rounds - 1
        }
    }

    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.width < 2 || self.width % 2 != 0 {
            return Err(GenerateError::InvalidSpec(format!(
                "honeycomb width must be even and at least 2, got {}",
                self.width
            )));
        }
        if self.height < 6 || self.height % 6 != 0 {
            return Err(GenerateError::InvalidSpec(format!(
                "honeycomb height must be a positive multiple of 6, got {}",
                self.height
            )));
        }
        if self.rounds == 0 {
            return Err(GenerateError::InvalidSpec("rounds must be positive".into()));
        }
        check_strength(self.p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Even-parity endpoint.
    pub a: u32,
    pub b: u32,
    pub color: Axis,
    pub midpoint: (f64, f64),
    vertical: bool,
    column: usize,
    row: usize,
}

impl Edge {
    pub fn operator(&self) -> PauliString {
        PauliString::from_terms([(self.a, self.color), (self.b, self.color)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub center: (f64, f64),
    pub color: Axis,
    pub qubits: Vec<u32>,
    /// Indices of the six boundary edges (the two colors other than the face's).
    pub perimeter: Vec<usize>,
}

impl Face {
    /// The face stabilizer: the face's own Pauli on each of its qubits.
    pub fn operator(&self) -> PauliString {
        PauliString::uniform(self.qubits.iter().copied(), self.color)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoneycombLayout {
    pub width: usize,
    pub height: usize,
    /// Grouped by color (X, Y, Z), each group sorted by midpoint.
    pub edges: Vec<Edge>,
    /// Grouped by color, each group sorted by center.
    pub faces: Vec<Face>,
    edge_groups: [Range<usize>; 3],
    face_groups: [Range<usize>; 3],
}

fn by_color_then_position<T>(items: &mut [T], key: impl Fn(&T) -> (Axis, (f64, f64))) -> [Range<usize>; 3] {
    items.sort_by(|p, q| {
        let (cp, mp) = key(p);
        let (cq, mq) = key(q);
        color_index(cp)
            .cmp(&color_index(cq))
            .then(mp.0.total_cmp(&mq.0))
            .then(mp.1.total_cmp(&mq.1))
    });
    let mut groups = [0..0, 0..0, 0..0];
    for (k, g) in groups.iter_mut().enumerate() {
        let start = items.iter().position(|i| color_index(key(i).0) >= k).unwrap_or(items.len());
        let end = items.iter().position(|i| color_index(key(i).0) > k).unwrap_or(items.len());
        *g = start..end;
    }
    groups
}

impl HoneycombLayout {
    pub fn new(width: usize, height: usize) -> Result<Self, GenerateError> {
        HoneycombSpec {
            width,
            height,
            rounds: 1,
            model: NoiseModel::Em3,
            p: 0.0,
            observable: HoneycombObservable::Horizontal,
        }
        .validate()?;
        let (w, h) = (width, height);
        let q = |c: usize, y: usize| (c * h + y) as u32;
        let mut edges = Vec::new();
        for c in 0..w {
            for y in 0..h {
                edges.push(Edge {
                    a: if (c + y) % 2 == 0 { q(c, y) } else { q(c, (y + 1) % h) },
                    b: if (c + y) % 2 == 0 { q(c, (y + 1) % h) } else { q(c, y) },
                    color: [Axis::Z, Axis::X, Axis::Y][y % 3],
                    midpoint: (2.0 * c as f64 + 1.0, y as f64 + 0.5),
                    vertical: true,
                    column: c,
                    row: y,
                });
                if (c + y) % 2 == 0 {
                    edges.push(Edge {
                        a: q(c, y),
                        b: q((c + 1) % w, y),
                        color: COLORS[y % 3],
                        midpoint: (((2 * c + 2) % (2 * w)) as f64, y as f64),
                        vertical: false,
                        column: c,
                        row: y,
                    });
                }
            }
        }
        let edge_groups = by_color_then_position(&mut edges, |e| (e.color, e.midpoint));

        let mut faces = Vec::new();
        for y in 0..h {
            for k in (0..w).filter(|k| (k + y) % 2 == 0) {
                let color = COLORS[y % 3];
                let mut qubits: Vec<u32> = [(k + w - 1) % w, k]
                    .iter()
                    .flat_map(|&c| [(y + h - 1) % h, y, (y + 1) % h].map(|r| q(c, r)))
                    .collect();
                qubits.sort_unstable();
                let perimeter: Vec<usize> = (0..edges.len())
                    .filter(|&e| {
                        let edge = &edges[e];
                        edge.color != color && qubits.contains(&edge.a) && qubits.contains(&edge.b)
                    })
                    .collect();
                debug_assert_eq!(perimeter.len(), 6);
                faces.push(Face {
                    center: ((2 * k) as f64, y as f64),
                    color,
                    qubits,
                    perimeter,
                });
            }
        }
        let face_groups = by_color_then_position(&mut faces, |f| (f.color, f.center));
        Ok(HoneycombLayout {
            width,
            height,
            edges,
            faces,
            edge_groups,
            face_groups,
        })
    }

    pub fn num_data_qubits(&self) -> usize {
        self.width * self.height
    }

    pub fn coords(&self, q: u32) -> (f64, f64) {
        let (c, y) = (q as usize / self.height, q as usize % self.height);
        (2.0 * c as f64 + 1.0, y as f64)
    }

    pub fn is_even(&self, q: u32) -> bool {
        let (c, y) = (q as usize / self.height, q as usize % self.height);
        (c + y) % 2 == 0
    }

    pub fn edges_of(&self, color: Axis) -> Range<usize> {
        self.edge_groups[color_index(color)].clone()
    }

    pub fn faces_of(&self, color: Axis) -> Range<usize> {
        self.face_groups[color_index(color)].clone()
    }

    /// Edges whose measurement results are folded into the observable.
    pub fn observable_path(&self, obs: HoneycombObservable) -> Vec<bool> {
        self.edges
            .iter()
            .map(|e| match obs {
                HoneycombObservable::Horizontal => (!e.vertical && e.row < 2) || (e.vertical && e.row == 0),
                HoneycombObservable::Vertical => e.vertical && e.column == 0,
            })
            .collect()
    }

    /// The observable's operator right after X-basis initialization.
    pub fn initial_observable(&self, obs: HoneycombObservable) -> PauliString {
        let h = self.height;
        let qubits: Vec<u32> = match obs {
            HoneycombObservable::Horizontal => (0..self.width)
                .flat_map(|c| [(c * h) as u32, (c * h + 1) as u32])
                .collect(),
            HoneycombObservable::Vertical => (0..h).filter(|y| y % 3 != 2).map(|y| y as u32).collect(),
        };
        PauliString::uniform(qubits, Axis::X)
    }

    /// Observable operator after each of the first `subrounds` sub-rounds
    /// (entry 0 is the initial operator).
    pub fn observable_sequence(&self, obs: HoneycombObservable, subrounds: usize) -> Vec<PauliString> {
        let path = self.observable_path(obs);
        let mut op = self.initial_observable(obs);
        let mut out = vec![op.clone()];
        for s in 1..=subrounds {
            for e in self.edges_of(COLORS[(s - 1) % 3]) {
                if path[e] {
                    op = op.mul(&self.edges[e].operator());
                }
            }
            out.push(op.clone());
        }
        out
    }
}

/// Emits detectors and observable includes as sub-rounds complete.
struct Tracker<'a> {
    layout: &'a HoneycombLayout,
    observable: HoneycombObservable,
    path: Vec<bool>,
    operator: PauliString,
    latest: Vec<usize>,
    reconstruction: Vec<Option<Vec<usize>>>,
    previous: Option<Axis>,
}

impl<'a> Tracker<'a> {
    fn new(layout: &'a HoneycombLayout, observable: HoneycombObservable) -> Self {
        Tracker {
            layout,
            observable,
            path: layout.observable_path(observable),
            operator: layout.initial_observable(observable),
            latest: vec![usize::MAX; layout.edges.len()],
            reconstruction: vec![None; layout.faces.len()],
            previous: None,
        }
    }

    /// `recs` holds the results for the color's edges in layout order.
    fn subround(&mut self, b: &mut Builder, color: Axis, recs: &[usize]) {
        let layout = self.layout;
        let range = layout.edges_of(color);
        debug_assert_eq!(range.len(), recs.len());
        let mut included = Vec::new();
        for (e, &m) in range.clone().zip(recs) {
            self.latest[e] = m;
            if self.path[e] {
                included.push(m);
                self.operator = self.operator.mul(&layout.edges[e].operator());
            }
        }
        b.observable(self.observable.index(), &included);
        match self.previous {
            None => {
                if color == Axis::X {
                    for e in range {
                        let (x, y) = layout.edges[e].midpoint;
                        b.detector(x, y, &[self.latest[e]]);
                    }
                }
            }
            Some(prev) => {
                let face_color = Axis::third(prev, color);
                for f in layout.faces_of(face_color) {
                    let face = &layout.faces[f];
                    let now: Vec<usize> = face.perimeter.iter().map(|&e| self.latest[e]).collect();
                    let (x, y) = face.center;
                    match &self.reconstruction[f] {
                        Some(before) => {
                            let mut recs = before.clone();
                            recs.extend(&now);
                            b.detector(x, y, &recs);
                        }
                        None if face_color == Axis::X => b.detector(x, y, &now),
                        None => {}
                    }
                    self.reconstruction[f] = Some(now);
                }
            }
        }
        self.previous = Some(color);
        b.shift_time();
    }

    /// `data[q]` is the record of data qubit `q`, measured in the basis of
    /// the last sub-round.
    fn terminal(&mut self, b: &mut Builder, data: &[usize]) {
        let layout = self.layout;
        let basis = self.previous.expect("at least one sub-round");
        let mut included = Vec::new();
        for (q, a) in self.operator.terms() {
            assert_eq!(a, basis, "observable does not match the terminal basis");
            included.push(data[q as usize]);
        }
        b.observable(self.observable.index(), &included);
        for e in layout.edges_of(basis) {
            let edge = &layout.edges[e];
            let (x, y) = edge.midpoint;
            b.detector(x, y, &[self.latest[e], data[edge.a as usize], data[edge.b as usize]]);
        }
        for f in layout.faces_of(basis) {
            let face = &layout.faces[f];
            let mut recs = self.reconstruction[f].clone().unwrap_or_default();
            recs.extend(face.qubits.iter().map(|&q| data[q as usize]));
            let (x, y) = face.center;
            b.detector(x, y, &recs);
        }
    }
}

/// One time step of an ancilla-based schedule.
#[derive(Debug, Default)]
struct Layer {
    /// Measured groups in record order: `Some(s)` holds sub-round `s`'s
    /// ancillas, `None` the data qubits.
    measure: Vec<(Option<usize>, Vec<u32>)>,
    reset: Vec<u32>,
    rotate: Vec<u32>,
    hadamard: Vec<u32>,
    cx: Vec<u32>,
    cz: Vec<u32>,
}

fn layers(n: usize) -> Vec<Layer> {
    (0..n).map(|_| Layer::default()).collect()
}

fn subround_color(s: usize) -> Axis {
    COLORS[(s - 1) % 3]
}

fn emit_layers(b: &mut Builder, tracker: &mut Tracker, schedule: Vec<Layer>) {
    let n = schedule.len();
    for (k, layer) in schedule.into_iter().enumerate() {
        let all: Vec<u32> = layer.measure.iter().flat_map(|(_, qs)| qs.iter().copied()).collect();
        let recs = b.measure(&all);
        b.gate(Opcode::R, &layer.reset);
        b.gate(Opcode::CZyx, &layer.rotate);
        b.gate(Opcode::H, &layer.hadamard);
        b.gate(Opcode::Cx, &layer.cx);
        b.gate(Opcode::Cz, &layer.cz);
        let mut offset = 0;
        for (group, qubits) in &layer.measure {
            let r = &recs[offset..offset + qubits.len()];
            offset += qubits.len();
            match group {
                Some(s) => tracker.subround(b, subround_color(*s), r),
                None => tracker.terminal(b, r),
            }
        }
        if k + 1 < n {
            b.tick();
        }
    }
}

struct Parts<'a> {
    layout: &'a HoneycombLayout,
    n: u32,
    subrounds: usize,
}

impl Parts<'_> {
    fn ancilla(&self, e: usize) -> u32 {
        self.n + e as u32
    }

    fn ancillas(&self, color: Axis) -> Vec<u32> {
        self.layout.edges_of(color).map(|e| self.ancilla(e)).collect()
    }

    fn data(&self) -> Vec<u32> {
        (0..self.n).collect()
    }

    fn parity_data(&self, even: bool) -> Vec<u32> {
        (0..self.n).filter(|&q| self.layout.is_even(q) == even).collect()
    }

    /// Flattened (data, ancilla) pairs for the color's edges, taking the
    /// even or odd endpoint of each.
    fn pairs(&self, color: Axis, even: bool) -> Vec<u32> {
        self.layout
            .edges_of(color)
            .flat_map(|e| {
                let edge = &self.layout.edges[e];
                [if even { edge.a } else { edge.b }, self.ancilla(e)]
            })
            .collect()
    }
}

/// Six steps per round. Sub-round `s` starts at step `2(s - 1)`: ancilla
/// reset and even-qubit rotation, then a CX from the even endpoint, a CX
/// from the odd endpoint, and the ancilla measurement, with odd qubits
/// rotating one step behind. Data qubits rotate by C_ZYX before every
/// sub-round so the sub-round's Pauli sits on their Z axis.
fn sd6_schedule(parts: &Parts) -> Vec<Layer> {
    let last = parts.subrounds;
    let t_end = 2 * (last - 1) + 3;
    let mut ls = layers(t_end + 1);
    let (even, odd) = (parts.parity_data(true), parts.parity_data(false));
    for s in 1..=last {
        let color = subround_color(s);
        let t = 2 * (s - 1);
        ls[t].reset.extend(parts.ancillas(color));
        if s == 1 {
            ls[t].reset.extend(&even);
            ls[t + 1].reset.extend(&odd);
        } else {
            ls[t].rotate.extend(&even);
            ls[t + 1].rotate.extend(&odd);
        }
        ls[t + 1].cx.extend(parts.pairs(color, true));
        ls[t + 2].cx.extend(parts.pairs(color, false));
        ls[t + 3].measure.push((Some(s), parts.ancillas(color)));
    }
    // The frame after the last sub-round already puts its Pauli on Z.
    ls[t_end].measure.push((None, parts.data()));
    ls
}

/// Seven steps per round after an initial reset of every qubit. Within a
/// round, color `c` is extracted by ancilla H at step `2c`, CZ with the even
/// endpoint at `2c + 1`, CZ with the odd endpoint at `2c + 2` and H at
/// `2c + 3`. X and Y ancillas are measured and reset together at step 6,
/// Z ancillas at step 1 of the next round.
fn si1000_schedule(parts: &Parts) -> Vec<Layer> {
    let last = parts.subrounds;
    let base = |s: usize| 1 + 7 * ((s - 1) / 3);
    let c = |s: usize| (s - 1) % 3;
    let t_end = base(last) + 2 * c(last) + 4;
    let mut ls = layers(t_end + 1);
    ls[0].reset.extend(0..parts.n + parts.layout.edges.len() as u32);
    let (even, odd) = (parts.parity_data(true), parts.parity_data(false));
    for s in 1..=last {
        let color = subround_color(s);
        let t = base(s) + 2 * c(s);
        let anc = parts.ancillas(color);
        ls[t].hadamard.extend(&anc);
        ls[t + 1].cz.extend(parts.pairs(color, true));
        ls[t + 2].cz.extend(parts.pairs(color, false));
        ls[t + 3].hadamard.extend(&anc);
        if s > 1 {
            ls[t].rotate.extend(&even);
            ls[t + 1].rotate.extend(&odd);
        }
        let tm = if s == last {
            t_end
        } else if c(s) < 2 {
            base(s) + 6
        } else {
            base(s) + 8
        };
        if s + 3 <= last {
            ls[tm].reset.extend(&anc);
        }
        ls[tm].measure.push((Some(s), anc));
    }
    ls[t_end].measure.push((None, parts.data()));
    ls
}

/// Builds the noiseless circuit for a spec (the noise model still selects
/// the extraction scheme).
pub fn gen_honeycomb_ideal(spec: &HoneycombSpec) -> Result<Circuit, GenerateError> {
    spec.validate()?;
    let layout = HoneycombLayout::new(spec.width, spec.height)?;
    let n = layout.num_data_qubits() as u32;
    let subrounds = spec.subrounds();
    let mut b = Builder::new();
    for q in 0..n {
        let (x, y) = layout.coords(q);
        b.coords(q, x, y);
    }
    let mut tracker = Tracker::new(&layout, spec.observable);
    let data: Vec<u32> = (0..n).collect();
    match spec.model {
        NoiseModel::Em3 | NoiseModel::Em3Tweaked => {
            b.gate(Opcode::R, &data);
            b.tick();
            b.gate(Opcode::H, &data);
            b.tick();
            for s in 1..=subrounds {
                let color = subround_color(s);
                let products: Vec<_> = layout
                    .edges_of(color)
                    .map(|e| vec![(color, layout.edges[e].a), (color, layout.edges[e].b)])
                    .collect();
                let recs = b.mpp(&products);
                tracker.subround(&mut b, color, &recs);
                b.tick();
            }
            let basis_change = match subround_color(subrounds) {
                Axis::X => Opcode::H,
                _ => Opcode::CXyz,
            };
            b.gate(basis_change, &data);
            b.tick();
            let recs = b.measure(&data);
            tracker.terminal(&mut b, &recs);
        }
        NoiseModel::Sd6 | NoiseModel::Si1000 => {
            for (e, edge) in layout.edges.iter().enumerate() {
                b.coords(n + e as u32, edge.midpoint.0, edge.midpoint.1);
            }
            let parts = Parts {
                layout: &layout,
                n,
                subrounds,
            };
            let schedule = if spec.model == NoiseModel::Sd6 {
                sd6_schedule(&parts)
            } else {
                si1000_schedule(&parts)
            };
            emit_layers(&mut b, &mut tracker, schedule);
        }
    }
    Ok(b.finish())
}

/// Noisy honeycomb memory circuit, compressed into REPEAT blocks.
pub fn gen_honeycomb(spec: &HoneycombSpec) -> Result<Circuit, GenerateError> {
    let ideal = gen_honeycomb_ideal(spec)?;
    apply_noise_model(&ideal, spec.model, spec.p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts() {
        let l = HoneycombLayout::new(4, 6).unwrap();
        assert_eq!(l.edges.len(), 36);
        assert_eq!(l.faces.len(), 12);
        for color in COLORS {
            assert_eq!(l.edges_of(color).len(), 12);
            assert_eq!(l.faces_of(color).len(), 4);
        }
        for face in &l.faces {
            assert_eq!(face.perimeter.len(), 6);
        }
    }

    #[test]
    fn face_operators_commute_with_all_edges() {
        let l = HoneycombLayout::new(4, 12).unwrap();
        for f in &l.faces {
            let mut product = PauliString::identity();
            for &e in &f.perimeter {
                product = product.mul(&l.edges[e].operator());
            }
            assert_eq!(product.unsigned(), f.operator());
            for e in &l.edges {
                assert!(f.operator().commutes(&e.operator()));
            }
        }
    }

    #[test]
    fn observable_commutes_with_next_subround() {
        for obs in [HoneycombObservable::Horizontal, HoneycombObservable::Vertical] {
            let l = HoneycombLayout::new(4, 6).unwrap();
            let seq = l.observable_sequence(obs, 12);
            for (s, op) in seq.iter().enumerate() {
                let next = COLORS[s % 3];
                for e in l.edges_of(next) {
                    assert!(op.commutes(&l.edges[e].operator()), "{obs} after {s}");
                }
            }
        }
    }

    #[test]
    fn observable_has_period_six() {
        for obs in [HoneycombObservable::Horizontal, HoneycombObservable::Vertical] {
            let l = HoneycombLayout::new(4, 6).unwrap();
            let seq = l.observable_sequence(obs, 18);
            for s in 0..12 {
                assert_eq!(seq[s + 6].unsigned(), seq[s].unsigned(), "{obs} at {s}");
                assert_ne!(seq[s + 3].unsigned(), seq[s].unsigned(), "{obs} at {s}");
            }
        }
    }

    #[test]
    fn qubit_counts() {
        let spec = HoneycombSpec::for_distance(4, NoiseModel::Sd6, 0.0, HoneycombObservable::Vertical);
        assert_eq!(spec.num_qubits(), 60);
        assert_eq!(gen_honeycomb(&spec).unwrap().num_qubits(), 60);
        let spec = HoneycombSpec::for_distance(4, NoiseModel::Em3, 0.0, HoneycombObservable::Vertical);
        assert_eq!(gen_honeycomb(&spec).unwrap().num_qubits(), 24);
    }
}
