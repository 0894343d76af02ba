use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal span of the flat approach zone placed before a step or a
/// rugose field, and of the run-out on open sides.
const APPROACH_SPAN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainKind {
    Flat,
    Step,
    Rugose,
}

/// One piecewise-constant terrain cell starting at `x_start` and running to
/// the next cell's start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub x_start: f64,
    pub height: f64,
}

/// Planar heightfield: an ordered list of constant-height cells. Vertical
/// faces between cells of different heights are collidable walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub kind: TerrainKind,
    cells: Vec<Cell>,
    /// Height of the climbable entry edge (step height, or the rugose
    /// field's nominal level). Zero for flat ground.
    pub base_height: f64,
    pub cell_width: f64,
    x_end: f64,
}

impl Terrain {
    /// Flat ground at height zero.
    pub fn flat() -> Terrain {
        Terrain {
            kind: TerrainKind::Flat,
            cells: vec![Cell {
                x_start: -2.0 * APPROACH_SPAN,
                height: 0.0,
            }],
            base_height: 0.0,
            cell_width: 4.0 * APPROACH_SPAN,
            x_end: 2.0 * APPROACH_SPAN,
        }
    }

    /// Single step of the given height, with the riser at `x = 0`.
    pub fn step(height: f64) -> Terrain {
        Terrain {
            kind: TerrainKind::Step,
            cells: vec![
                Cell {
                    x_start: -APPROACH_SPAN,
                    height: 0.0,
                },
                Cell {
                    x_start: 0.0,
                    height,
                },
            ],
            base_height: height,
            cell_width: APPROACH_SPAN,
            x_end: APPROACH_SPAN,
        }
    }

    pub fn min_x(&self) -> f64 {
        self.cells[0].x_start
    }

    pub fn max_x(&self) -> f64 {
        self.x_end
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_height(&self, i: usize) -> f64 {
        self.cells[i].height
    }

    /// `[x_start, x_end)` of cell `i`.
    pub fn cell_span(&self, i: usize) -> (f64, f64) {
        let start = self.cells[i].x_start;
        let end = if i + 1 < self.cells.len() {
            self.cells[i + 1].x_start
        } else {
            self.x_end
        };
        (start, end)
    }

    /// Height of the entry edge, if the terrain has one.
    pub fn edge_height(&self) -> Option<f64> {
        match self.kind {
            TerrainKind::Flat => None,
            TerrainKind::Step | TerrainKind::Rugose => Some(self.base_height),
        }
    }

    /// Index of the cell containing `x` (boundaries belong to the cell on
    /// the right).
    pub fn cell_at(&self, x: f64) -> Result<usize> {
        if !(x >= self.min_x() && x <= self.x_end) || !x.is_finite() {
            return Err(Error::Extent {
                x,
                min: self.min_x(),
                max: self.x_end,
            });
        }
        let idx = self
            .cells
            .partition_point(|c| c.x_start <= x)
            .saturating_sub(1);
        Ok(idx)
    }

    /// Ground height at `x`. At a cell boundary this is the max of the two
    /// adjacent cells, so riser faces read as part of the higher cell.
    pub fn elevation(&self, x: f64) -> Result<f64> {
        let i = self.cell_at(x)?;
        let mut h = self.cells[i].height;
        if x == self.cells[i].x_start && i > 0 {
            h = h.max(self.cells[i - 1].height);
        }
        Ok(h)
    }

    /// Mean absolute height difference between adjacent cells, the rugosity
    /// statistic before normalization. None when fewer than two cells.
    pub fn mean_adjacent_height_delta(&self) -> Option<f64> {
        if self.cells.len() < 2 {
            return None;
        }
        let sum: f64 = self
            .cells
            .windows(2)
            .map(|w| (w[1].height - w[0].height).abs())
            .sum();
        Some(sum / (self.cells.len() - 1) as f64)
    }
}

/// Parameters for seeded rugose terrain generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RugoseParams {
    pub seed: u64,
    /// Target mean adjacent height difference, as a fraction of
    /// `edge_height` (the robot-height analog).
    pub rugosity: f64,
    /// Height of the entry edge in meters.
    pub edge_height: f64,
    /// Width of each constant-height cell in meters.
    pub cell_width: f64,
    /// Length of the rugose field in meters.
    pub extent: f64,
}

impl Default for RugoseParams {
    fn default() -> Self {
        RugoseParams {
            seed: 0,
            rugosity: 0.6,
            edge_height: 0.125,
            cell_width: 0.10,
            extent: 6.0,
        }
    }
}

impl RugoseParams {
    pub fn validate(&self) -> Result<()> {
        if self.rugosity < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "rugosity = {} must be >= 0",
                self.rugosity
            )));
        }
        if !(self.edge_height > 0.0 && self.cell_width > 0.0 && self.extent > 0.0) {
            return Err(Error::InvalidParameter(
                "edge_height, cell_width and extent must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Generate a seeded rugose field: a flat approach zone at height zero, a
/// vertical entry edge of `edge_height` at `x = 0`, then piecewise-constant
/// cells whose mean adjacent height difference equals
/// `rugosity * edge_height` exactly.
///
/// Cell levels are drawn from the discrete set {0, 0.5, 1, 1.5} and then
/// rescaled so the measured statistic hits the target; draws that would
/// require a cell below ground level are rejected and retried.
pub fn generate_rugose(p: &RugoseParams) -> Result<Terrain> {
    p.validate()?;
    let n_cells = (p.extent / p.cell_width).ceil().max(1.0) as usize;
    if n_cells < 2 && p.rugosity > 0.0 {
        return Err(Error::Generation(format!(
            "extent {} m holds {} cell(s); at least 2 are needed for a nonzero rugosity",
            p.extent, n_cells
        )));
    }

    let target = p.rugosity * p.edge_height;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    const LEVELS: [f64; 4] = [0.0, 0.5, 1.0, 1.5];
    // The first cell is pinned at level 1.0 so the entry edge is exactly
    // edge_height tall.
    const ENTRY_LEVEL: f64 = 1.0;

    let mut heights = vec![p.edge_height; n_cells];
    if p.rugosity > 0.0 {
        let mut ok = false;
        for _attempt in 0..64 {
            let mut levels = vec![ENTRY_LEVEL; n_cells];
            for lv in levels.iter_mut().skip(1) {
                *lv = LEVELS[rng.gen_range(0..LEVELS.len())];
            }
            let stat: f64 = levels.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
                / (n_cells - 1) as f64;
            if stat < 1e-9 {
                continue;
            }
            let unit = target / stat;
            if levels.iter().any(|&lv| p.edge_height + (lv - ENTRY_LEVEL) * unit < 0.0) {
                continue;
            }
            for (h, lv) in heights.iter_mut().zip(&levels) {
                *h = p.edge_height + (lv - ENTRY_LEVEL) * unit;
            }
            ok = true;
            break;
        }
        if !ok {
            return Err(Error::Generation(format!(
                "rugosity {} with edge height {} m cannot be met with non-negative cells",
                p.rugosity, p.edge_height
            )));
        }
    }

    let mut cells = Vec::with_capacity(n_cells + 1);
    cells.push(Cell {
        x_start: -APPROACH_SPAN,
        height: 0.0,
    });
    for (i, &h) in heights.iter().enumerate() {
        cells.push(Cell {
            x_start: i as f64 * p.cell_width,
            height: h,
        });
    }
    Ok(Terrain {
        kind: TerrainKind::Rugose,
        cells,
        base_height: p.edge_height,
        cell_width: p.cell_width,
        x_end: n_cells as f64 * p.cell_width,
    })
}
