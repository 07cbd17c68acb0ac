//! Grid syntax of `export-profile`: a comma-separated list of axis specs
//! `name:lo:hi:n` (a uniform axis with `n` points) or `name=value` (a fixed
//! coordinate). Names are `y1..yN` (or `yN`) on the half-space and
//! `xi1..xiN` (or `xiN`) on the ball. Coordinates not mentioned are zero.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad grid spec: {}", self.0)
    }
}

/// Per-coordinate sample values; the grid is their tensor product.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
}

fn axis_index(name: &str, prefix: &str, dim: usize) -> Result<usize, GridError> {
    let rest = name
        .strip_prefix(prefix)
        .ok_or_else(|| GridError(format!("axis `{name}` should start with `{prefix}`")))?;
    let idx = if rest == "N" {
        dim
    } else {
        rest.parse::<usize>().map_err(|_| GridError(format!("axis `{name}` has no index")))?
    };
    if idx == 0 || idx > dim {
        return Err(GridError(format!("axis `{name}` outside 1..={dim}")));
    }
    Ok(idx - 1)
}

fn number(s: &str) -> Result<f64, GridError> {
    s.trim().parse::<f64>().map_err(|_| GridError(format!("`{s}` is not a number")))
}

impl Grid {
    pub fn parse(spec: &str, dim: usize, ball: bool) -> Result<Self, GridError> {
        let prefix = if ball { "xi" } else { "y" };
        let mut axes: Vec<Option<Vec<f64>>> = vec![None; dim];
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (idx, values) = if let Some((name, value)) = part.split_once('=') {
                (axis_index(name.trim(), prefix, dim)?, vec![number(value)?])
            } else {
                let fields: Vec<&str> = part.split(':').collect();
                let [name, lo, hi, n] = fields[..] else {
                    return Err(GridError(format!("`{part}` is neither name:lo:hi:n nor name=value")));
                };
                let (lo, hi) = (number(lo)?, number(hi)?);
                let n: usize = n.trim().parse().map_err(|_| GridError(format!("`{n}` is not a point count")))?;
                if n == 0 || (n == 1 && lo != hi) || !(lo <= hi) {
                    return Err(GridError(format!("`{part}` needs lo <= hi and n >= 2 (n = 1 only when lo = hi)")));
                }
                let values = if n == 1 { vec![lo] } else { (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect() };
                (axis_index(name.trim(), prefix, dim)?, values)
            };
            if axes[idx].replace(values).is_some() {
                return Err(GridError(format!("axis {prefix}{} given twice", idx + 1)));
            }
        }
        Ok(Grid { axes: axes.into_iter().map(|a| a.unwrap_or_else(|| vec![0.0])).collect() })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// All points, first axis slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out.into_iter().flat_map(|p| axis.iter().map(move |v| [p.as_slice(), &[*v]].concat())).collect();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_product_in_order() {
        let g = Grid::parse("y1:-2:2:5,yN:0:2:3", 5, false).unwrap();
        assert_eq!(g.len(), 15);
        let pts = g.points();
        assert_eq!(pts[0], vec![-2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(pts[1], vec![-2.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(pts[14], vec![2.0, 0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn fixed_coordinates_and_ball_names() {
        let g = Grid::parse("xi1:0:1:2, xi3=0.25", 5, true).unwrap();
        assert_eq!(g.points(), vec![vec![0.0, 0.0, 0.25, 0.0, 0.0], vec![1.0, 0.0, 0.25, 0.0, 0.0]]);
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["y1:0:1", "y9:0:1:3", "x1:0:1:3", "y1:1:0:3", "y1:0:1:0", "y1=a", "y1:0:1:3,y1=2", "y1:0:1:1"] {
            assert!(Grid::parse(bad, 5, false).is_err(), "{bad}");
        }
    }
}
