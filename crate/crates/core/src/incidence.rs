//! Incidence matrices and their CSV / JSON renderings.
//!
//! Four matrices are derived from a net's arc structure, all with one row
//! per place and one column per transition:
//!
//! * forward `I+`: tokens produced, from transition-to-place arcs,
//! * backward `I-`: tokens consumed, from place-to-transition arcs,
//! * combined `I = I+ - I-`: the net token change of one firing,
//! * inhibition `H`: inhibitor-arc thresholds.
//!
//! Entries are the declared arc weights; parallel arcs accumulate.

use serde::Serialize;

use crate::hlpn::{ArcKind, Net};

/// The structural view shared by every net layer that supports incidence
/// analysis. Arcs are reported as `(place index, transition index, weight)`.
pub trait NetTopology {
    fn topology_name(&self) -> &str;
    fn place_names(&self) -> Vec<String>;
    fn transition_names(&self) -> Vec<String>;
    fn consuming_arcs(&self) -> Vec<(usize, usize, u32)>;
    fn producing_arcs(&self) -> Vec<(usize, usize, u32)>;
    fn inhibiting_arcs(&self) -> Vec<(usize, usize, u32)>;
}

impl NetTopology for Net {
    fn topology_name(&self) -> &str {
        self.name()
    }

    fn place_names(&self) -> Vec<String> {
        self.places().iter().map(|p| p.name.clone()).collect()
    }

    fn transition_names(&self) -> Vec<String> {
        self.transitions().iter().map(|t| t.name.clone()).collect()
    }

    fn consuming_arcs(&self) -> Vec<(usize, usize, u32)> {
        self.arcs()
            .iter()
            .filter(|a| a.into_transition && a.kind == ArcKind::Normal)
            .map(|a| (a.place.0 as usize, a.trans.0 as usize, a.weight))
            .collect()
    }

    fn producing_arcs(&self) -> Vec<(usize, usize, u32)> {
        self.arcs()
            .iter()
            .filter(|a| !a.into_transition)
            .map(|a| (a.place.0 as usize, a.trans.0 as usize, a.weight))
            .collect()
    }

    fn inhibiting_arcs(&self) -> Vec<(usize, usize, u32)> {
        self.arcs()
            .iter()
            .filter(|a| a.into_transition && a.kind == ArcKind::Inhibitor)
            .map(|a| (a.place.0 as usize, a.trans.0 as usize, a.weight))
            .collect()
    }
}

/// A dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.cols + col]
    }

    pub fn add(&mut self, row: usize, col: usize, delta: i64) {
        self.data[row * self.cols + col] += delta;
    }

    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).collect())
            .collect()
    }

    pub fn difference(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// The four incidence matrices of one net, with row and column labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceSet {
    pub model: String,
    pub places: Vec<String>,
    pub transitions: Vec<String>,
    pub forward: Matrix,
    pub backward: Matrix,
    pub combined: Matrix,
    pub inhibition: Matrix,
}

/// Computes all four matrices. The combined matrix is accumulated in its own
/// pass over the arcs rather than derived from the other two, so the
/// `I = I+ - I-` identity is a genuine cross-check on the construction.
pub fn matrices(net: &impl NetTopology) -> IncidenceSet {
    let places = net.place_names();
    let transitions = net.transition_names();
    let (rows, cols) = (places.len(), transitions.len());

    let mut forward = Matrix::zero(rows, cols);
    for (p, t, w) in net.producing_arcs() {
        forward.add(p, t, w as i64);
    }
    let mut backward = Matrix::zero(rows, cols);
    for (p, t, w) in net.consuming_arcs() {
        backward.add(p, t, w as i64);
    }
    let mut combined = Matrix::zero(rows, cols);
    for (p, t, w) in net.producing_arcs() {
        combined.add(p, t, w as i64);
    }
    for (p, t, w) in net.consuming_arcs() {
        combined.add(p, t, -(w as i64));
    }
    let mut inhibition = Matrix::zero(rows, cols);
    for (p, t, w) in net.inhibiting_arcs() {
        inhibition.add(p, t, w as i64);
    }

    IncidenceSet {
        model: net.topology_name().to_string(),
        places,
        transitions,
        forward,
        backward,
        combined,
        inhibition,
    }
}

fn csv_cell(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

impl IncidenceSet {
    /// Renders the four matrices as one CSV document with a section header
    /// line before each matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let sections = [
            ("FORWARD", &self.forward),
            ("BACKWARD", &self.backward),
            ("COMBINED", &self.combined),
            ("INHIBITION", &self.inhibition),
        ];
        for (title, matrix) in sections {
            out.push_str(title);
            out.push('\n');
            out.push_str("place");
            for t in &self.transitions {
                out.push(',');
                out.push_str(&csv_cell(t));
            }
            out.push('\n');
            for (r, p) in self.places.iter().enumerate() {
                out.push_str(&csv_cell(p));
                for c in 0..matrix.cols() {
                    out.push(',');
                    out.push_str(&matrix.get(r, c).to_string());
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            model: &'a str,
            places: &'a [String],
            transitions: &'a [String],
            forward: Vec<Vec<i64>>,
            backward: Vec<Vec<i64>>,
            combined: Vec<Vec<i64>>,
            inhibition: Vec<Vec<i64>>,
        }
        serde_json::to_value(Doc {
            model: &self.model,
            places: &self.places,
            transitions: &self.transitions,
            forward: self.forward.to_rows(),
            backward: self.backward.to_rows(),
            combined: self.combined.to_rows(),
            inhibition: self.inhibition.to_rows(),
        })
        .expect("plain data serializes")
    }
}
