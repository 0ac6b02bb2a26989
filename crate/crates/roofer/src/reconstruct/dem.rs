//! ESRI ASCII grid DEM: parsing and bilinear sampling.

use std::path::Path;

use crate::error::{Error, Result};

/// Digital elevation model on a uniform grid. `heights` is stored row-major
/// with the first row at the top (northern) edge, as in the file format.
#[derive(Debug, Clone)]
pub struct Dem {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    pub nodata: Option<f64>,
    heights: Vec<f64>,
}

impl Dem {
    pub fn load(path: &Path) -> Result<Dem> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Dem::from_ascii(&text)
    }

    /// Parse the `ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value`
    /// header (case-insensitive, NODATA optional) followed by rows*cols
    /// whitespace-separated heights, top row first.
    pub fn from_ascii(text: &str) -> Result<Dem> {
        let mut ncols: Option<usize> = None;
        let mut nrows: Option<usize> = None;
        let mut xll: Option<f64> = None;
        let mut yll: Option<f64> = None;
        let mut cell: Option<f64> = None;
        let mut nodata: Option<f64> = None;
        let mut heights: Vec<f64> = Vec::new();
        let mut header_done = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let first = parts.next().unwrap();
            if !header_done && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let value = parts.next().ok_or(Error::Parse {
                    line: line_no,
                    message: format!("header key `{first}` without a value"),
                })?;
                let parse_f = || -> Result<f64> {
                    value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("cannot parse `{value}` for `{first}`"),
                    })
                };
                match first.to_ascii_lowercase().as_str() {
                    "ncols" => ncols = Some(parse_f()? as usize),
                    "nrows" => nrows = Some(parse_f()? as usize),
                    "xllcorner" => xll = Some(parse_f()?),
                    "yllcorner" => yll = Some(parse_f()?),
                    "cellsize" => cell = Some(parse_f()?),
                    "nodata_value" => nodata = Some(parse_f()?),
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("unknown header key `{other}`"),
                        })
                    }
                }
            } else {
                header_done = true;
                for tok in std::iter::once(first).chain(parts) {
                    let v: f64 = tok.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("cannot parse height `{tok}`"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("non-finite height `{tok}`"),
                        });
                    }
                    heights.push(v);
                }
            }
        }

        let (Some(cols), Some(rows), Some(origin_x), Some(origin_y), Some(cell_size)) =
            (ncols, nrows, xll, yll, cell)
        else {
            return Err(Error::Parse {
                line: 1,
                message: "incomplete DEM header (need ncols/nrows/xllcorner/yllcorner/cellsize)"
                    .into(),
            });
        };
        if cell_size <= 0.0 || cols == 0 || rows == 0 {
            return Err(Error::Parse {
                line: 1,
                message: "DEM header values must be positive".into(),
            });
        }
        if heights.len() != rows * cols {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: format!(
                    "expected {} heights ({rows}x{cols}), got {}",
                    rows * cols,
                    heights.len()
                ),
            });
        }
        Ok(Dem {
            origin_x,
            origin_y,
            cell_size,
            rows,
            cols,
            nodata,
            heights,
        })
    }

    /// Physical extent covered by the grid cells.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        (
            self.origin_x,
            self.origin_y,
            self.origin_x + self.cols as f64 * self.cell_size,
            self.origin_y + self.rows as f64 * self.cell_size,
        )
    }

    fn cell_value(&self, row_from_bottom: usize, col: usize) -> Result<f64> {
        let row_from_top = self.rows - 1 - row_from_bottom;
        let v = self.heights[row_from_top * self.cols + col];
        if self.nodata.map(|nd| v == nd).unwrap_or(false) {
            return Err(Error::OutOfExtent {
                x: self.origin_x + (col as f64 + 0.5) * self.cell_size,
                y: self.origin_y + (row_from_bottom as f64 + 0.5) * self.cell_size,
            });
        }
        Ok(v)
    }

    /// Bilinear interpolation between the four surrounding cell centers;
    /// between the border and the outermost centers the value is held
    /// constant. Queries outside the extent (or over NODATA cells) fail.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Result<f64> {
        let (x0, y0, x1, y1) = self.extent();
        if !(x0..=x1).contains(&x) || !(y0..=y1).contains(&y) {
            return Err(Error::OutOfExtent { x, y });
        }
        // Continuous coordinates in units of cells measured at cell centers.
        let gx = ((x - self.origin_x) / self.cell_size - 0.5)
            .clamp(0.0, (self.cols - 1) as f64);
        let gy = ((y - self.origin_y) / self.cell_size - 0.5)
            .clamp(0.0, (self.rows - 1) as f64);
        let c0 = (gx.floor() as usize).min(self.cols.saturating_sub(2));
        let r0 = (gy.floor() as usize).min(self.rows.saturating_sub(2));
        if self.cols == 1 && self.rows == 1 {
            return self.cell_value(0, 0);
        }
        let (c0, c1, fx) = if self.cols == 1 {
            (0, 0, 0.0)
        } else {
            (c0, c0 + 1, gx - c0 as f64)
        };
        let (r0, r1, fy) = if self.rows == 1 {
            (0, 0, 0.0)
        } else {
            (r0, r0 + 1, gy - r0 as f64)
        };
        let mut acc = 0.0;
        for (r, c, w) in [
            (r0, c0, (1.0 - fx) * (1.0 - fy)),
            (r0, c1, fx * (1.0 - fy)),
            (r1, c0, (1.0 - fx) * fy),
            (r1, c1, fx * fy),
        ] {
            if w > 0.0 {
                acc += w * self.cell_value(r, c)?;
            }
        }
        Ok(acc)
    }
}
