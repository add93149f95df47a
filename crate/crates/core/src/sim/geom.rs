//! Points in the unit square, the L1 metric and a bucket index for
//! nearest-point queries.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn uniform(rng: &mut impl Rng) -> Self {
        Self { x: rng.random::<f64>(), y: rng.random::<f64>() }
    }

    /// Rectangular-grid (L1) distance.
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    /// Position after travelling `d` along the L1 path to `to`, x leg first.
    pub fn toward(self, to: Point, d: f64) -> Point {
        let dx = to.x - self.x;
        let dy = to.y - self.y;
        if d <= 0.0 {
            return self;
        }
        if d < dx.abs() {
            return Point::new(self.x + d * dx.signum(), self.y);
        }
        let rest = d - dx.abs();
        if rest < dy.abs() {
            Point::new(to.x, self.y + rest * dy.signum())
        } else {
            to
        }
    }
}

/// Uniform grid of buckets over the unit square holding `(id, point)` pairs.
#[derive(Debug, Clone)]
pub struct PointIndex {
    side: usize,
    cells: Vec<Vec<(usize, Point)>>,
    len: usize,
}

impl PointIndex {
    pub fn new(side: usize) -> Self {
        let side = side.max(1);
        Self { side, cells: vec![Vec::new(); side * side], len: 0 }
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let s = self.side as f64;
        let cx = ((p.x * s) as usize).min(self.side - 1);
        let cy = ((p.y * s) as usize).min(self.side - 1);
        (cx, cy)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: usize, p: Point) {
        let (cx, cy) = self.cell_of(p);
        self.cells[cy * self.side + cx].push((id, p));
        self.len += 1;
    }

    pub fn remove(&mut self, id: usize, p: Point) -> bool {
        let (cx, cy) = self.cell_of(p);
        let cell = &mut self.cells[cy * self.side + cx];
        if let Some(pos) = cell.iter().position(|e| e.0 == id) {
            cell.swap_remove(pos);
            self.len -= 1;
            true
        } else {
            false
        }
    }

    /// Nearest entry to `q` in L1; ties go to the smallest id.
    pub fn nearest(&self, q: Point) -> Option<(usize, Point, f64)> {
        if self.len == 0 {
            return None;
        }
        let h = 1.0 / self.side as f64;
        let (qx, qy) = self.cell_of(q);
        let mut best: Option<(f64, usize, Point)> = None;
        for ring in 0..self.side {
            // cells in ring r are at least (r - 1) cell widths away along one axis
            if let Some((d, _, _)) = best {
                if ring >= 1 && (ring - 1) as f64 * h > d {
                    break;
                }
            }
            let r = ring as isize;
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let cx = qx as isize + dx;
                    let cy = qy as isize + dy;
                    if cx < 0 || cy < 0 || cx >= self.side as isize || cy >= self.side as isize {
                        continue;
                    }
                    for &(id, p) in &self.cells[cy as usize * self.side + cx as usize] {
                        let d = q.dist(p);
                        let better = match best {
                            None => true,
                            Some((bd, bid, _)) => d < bd || (d == bd && id < bid),
                        };
                        if better {
                            best = Some((d, id, p));
                        }
                    }
                }
            }
        }
        best.map(|(d, id, p)| (id, p, d))
    }
}
