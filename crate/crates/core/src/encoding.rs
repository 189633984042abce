//! Binary encoding of a scalar queue length into a 4x12 matrix.
//!
//! Cells are visited column by column, top to bottom within a column. Each
//! cell has a weight; while scanning, a cell is set when the remaining queue
//! length is at least its weight, and the weight is then subtracted. With
//! weights that never increase along the scan and where every weight is at
//! most one more than the sum of all later weights, the encoding is exact:
//! summing the weights of the set cells recovers the queue length, up to the
//! total weight (304 for the defaults). When every value from 1 up to the
//! largest weight occurs somewhere, a longer queue never sets fewer cells.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const ROWS: usize = 4;
pub const COLS: usize = 12;
pub const CELLS: usize = ROWS * COLS;
/// Queue length represented by a matrix of all ones.
pub const CAPACITY: u32 = 304;

/// Default weights in scan order: every value 1..=12, with 4 set aside so the
/// total is 304. Queues up to 12 set a single cell.
pub const DEFAULT_SCAN_WEIGHTS: [u32; CELLS] = [
    12, 12, 12, 11, 11, 11, 11, 10, 10, 10, 10, 9, 9, 9, 9, 8, 8, 8, 8, 7, 7, 7, 7, 6, 6, 6, 6, 5, 5,
    5, 5, 4, 4, 4, 4, 4, 3, 3, 3, 3, 2, 2, 2, 2, 1, 1, 1, 1,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodingWeights {
    cells: [[u32; COLS]; ROWS],
}

impl Default for EncodingWeights {
    fn default() -> Self {
        Self::from_scan(&DEFAULT_SCAN_WEIGHTS).expect("default weights are valid")
    }
}

impl EncodingWeights {
    /// One weight per column, shared by the column's rows.
    pub fn from_columns(columns: [u32; COLS]) -> Result<Self> {
        Self::from_cells([columns; ROWS])
    }

    /// Weights listed in scan order (column by column).
    pub fn from_scan(weights: &[u32]) -> Result<Self> {
        if weights.len() != CELLS {
            return Err(Error::InvalidWeights(format!(
                "expected {CELLS} weights, got {}",
                weights.len()
            )));
        }
        let mut cells = [[0; COLS]; ROWS];
        for (k, &w) in weights.iter().enumerate() {
            cells[k % ROWS][k / ROWS] = w;
        }
        Self::from_cells(cells)
    }

    pub fn from_cells(cells: [[u32; COLS]; ROWS]) -> Result<Self> {
        let w = Self { cells };
        w.validate()?;
        Ok(w)
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.cells[row][col]
    }

    /// Weights in scan order.
    pub fn scan(&self) -> impl Iterator<Item = u32> + '_ {
        (0..COLS).flat_map(move |j| (0..ROWS).map(move |i| self.cells[i][j]))
    }

    pub fn total(&self) -> u32 {
        self.scan().sum()
    }

    fn validate(&self) -> Result<()> {
        let seq: Vec<u32> = self.scan().collect();
        if seq.contains(&0) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        if let Some(k) = seq.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidWeights(format!(
                "weights increase along the scan at cell {}",
                k + 1
            )));
        }
        let mut later = 0u32;
        for (k, &w) in seq.iter().enumerate().rev() {
            if w > later + 1 {
                return Err(Error::InvalidWeights(format!(
                    "weight {w} at scan position {k} exceeds 1 + sum of later weights ({})",
                    later + 1
                )));
            }
            later += w;
        }
        if later != CAPACITY {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {later}, expected {CAPACITY}"
            )));
        }
        let mut last = 0;
        for q in 0..=CAPACITY as usize {
            let pop = encode_queue(q, self).popcount();
            if pop < last {
                return Err(Error::InvalidWeights(format!(
                    "queue {q} sets fewer cells than queue {}",
                    q - 1
                )));
            }
            last = pop;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct StateMatrix {
    pub bits: [[bool; COLS]; ROWS],
}

impl StateMatrix {
    pub fn popcount(&self) -> usize {
        self.bits.iter().flatten().filter(|&&b| b).count()
    }

    /// Cells in scan order as 0.0/1.0.
    pub fn flatten(&self) -> impl Iterator<Item = f64> + '_ {
        (0..COLS).flat_map(move |j| (0..ROWS).map(move |i| f64::from(u8::from(self.bits[i][j]))))
    }

    pub fn to_vector(&self) -> AgentStateVector {
        AgentStateVector(self.flatten().collect())
    }
}

/// Greedy scan encoding of a queue length. Lengths beyond the capacity
/// saturate to the all-ones matrix.
pub fn encode_queue(queue: usize, weights: &EncodingWeights) -> StateMatrix {
    let mut remaining = queue;
    let mut m = StateMatrix::default();
    for j in 0..COLS {
        for i in 0..ROWS {
            let c = weights.cells[i][j] as usize;
            if remaining >= c {
                remaining -= c;
                m.bits[i][j] = true;
            }
        }
    }
    m
}

/// Sum of the weights of the set cells.
pub fn decode(matrix: &StateMatrix, weights: &EncodingWeights) -> u32 {
    let mut total = 0;
    for i in 0..ROWS {
        for j in 0..COLS {
            if matrix.bits[i][j] {
                total += weights.cells[i][j];
            }
        }
    }
    total
}

/// Flat network input: 48 values for one approach, 192 for four.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AgentStateVector(pub Vec<f64>);

impl AgentStateVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Concatenates four approach matrices in N, W, E, S order.
pub fn compose_turn_state(matrices: &[StateMatrix]) -> Result<AgentStateVector> {
    if matrices.len() != 4 {
        return Err(Error::WrongMatrixCount(matrices.len()));
    }
    Ok(AgentStateVector(
        matrices.iter().flat_map(StateMatrix::flatten).collect(),
    ))
}
