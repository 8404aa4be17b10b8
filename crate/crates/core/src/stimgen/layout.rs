use serde::{Deserialize, Serialize};

use super::points::Point;

/// Axis-wise affine map between data units and plot pixels. Pixel `y`
/// grows downwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub plot_px: f64,
    pub margin_px: f64,
}

impl Frame {
    /// Fits the joint range of all categories into the plot minus margins.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a Point>, plot_px: f64, margin_px: f64) -> Frame {
        let mut f = Frame {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
            plot_px,
            margin_px,
        };
        for p in points {
            f.x_min = f.x_min.min(p.x);
            f.x_max = f.x_max.max(p.x);
            f.y_min = f.y_min.min(p.y);
            f.y_max = f.y_max.max(p.y);
        }
        if f.x_max - f.x_min < 1e-12 {
            f.x_max = f.x_min + 1.0;
        }
        if f.y_max - f.y_min < 1e-12 {
            f.y_max = f.y_min + 1.0;
        }
        f
    }

    fn span(&self) -> f64 {
        self.plot_px - 2.0 * self.margin_px
    }

    pub fn to_px(&self, p: Point) -> Point {
        let s = self.span();
        Point {
            x: self.margin_px + (p.x - self.x_min) / (self.x_max - self.x_min) * s,
            y: self.plot_px - self.margin_px - (p.y - self.y_min) / (self.y_max - self.y_min) * s,
        }
    }

    pub fn from_px(&self, p: Point) -> Point {
        let s = self.span();
        Point {
            x: self.x_min + (p.x - self.margin_px) / s * (self.x_max - self.x_min),
            y: self.y_min + (self.plot_px - self.margin_px - p.y) / s * (self.y_max - self.y_min),
        }
    }
}

/// Overlap area of two axis-aligned squares of side `size` centred at `a`
/// and `b`.
pub fn overlap_area(a: Point, b: Point, size: f64) -> f64 {
    let ox = size - (a.x - b.x).abs();
    let oy = size - (a.y - b.y).abs();
    if ox > 1e-9 && oy > 1e-9 {
        ox * oy
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Declutter {
    pub mark_px: f64,
    /// Largest displacement of one point in one pass.
    pub max_step_px: f64,
    pub min_px: f64,
    pub max_px: f64,
    pub max_passes: usize,
}

struct Grid {
    cell: f64,
    cols: usize,
    cells: Vec<Vec<usize>>,
}

impl Grid {
    fn build(pos: &[Point], cell: f64, extent: f64) -> Grid {
        let cols = (extent / cell).ceil() as usize + 1;
        let mut cells = vec![Vec::new(); cols * cols];
        let mut g = Grid { cell, cols, cells: Vec::new() };
        for (i, &p) in pos.iter().enumerate() {
            let (cx, cy) = g.cell_of(p);
            cells[cy * cols + cx].push(i);
        }
        g.cells = cells;
        g
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let c = |v: f64| ((v.max(0.0) / self.cell) as usize).min(self.cols - 1);
        (c(p.x), c(p.y))
    }

    fn near(&self, p: Point) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = self.cell_of(p);
        let (x0, x1) = (cx.saturating_sub(1), (cx + 1).min(self.cols - 1));
        let (y0, y1) = (cy.saturating_sub(1), (cy + 1).min(self.cols - 1));
        (y0..=y1).flat_map(move |y| (x0..=x1).flat_map(move |x| self.cells[y * self.cols + x].iter().copied()))
    }
}

impl Declutter {
    fn offsets(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0)];
        let rings = 4;
        for k in 1..=rings {
            let r = self.max_step_px * k as f64 / rings as f64;
            for a in 0..16 {
                let t = a as f64 * std::f64::consts::TAU / 16.0;
                out.push((r * t.cos(), r * t.sin()));
            }
        }
        out
    }

    fn total_overlap(&self, pos: &[Point]) -> usize {
        let grid = Grid::build(pos, self.mark_px + self.max_step_px, self.max_px + self.mark_px);
        let mut count = 0;
        for (i, &p) in pos.iter().enumerate() {
            count += grid.near(p).filter(|&j| j > i && overlap_area(p, pos[j], self.mark_px) > 0.0).count();
        }
        count
    }

    /// Moves points, in index order, to the spiral offset that most reduces
    /// their overlap until no two marks intersect. Returns whether that
    /// state was reached within `max_passes`.
    pub fn run(&self, pos: &mut [Point]) -> bool {
        let offsets = self.offsets();
        let clamp = |v: f64| v.clamp(self.min_px, self.max_px);
        for p in pos.iter_mut() {
            *p = Point { x: clamp(p.x), y: clamp(p.y) };
        }
        for _ in 0..self.max_passes {
            let grid = Grid::build(pos, self.mark_px + self.max_step_px, self.max_px + self.mark_px);
            let mut moved = false;
            let mut any = false;
            for i in 0..pos.len() {
                let cost = |q: Point, pos: &[Point]| -> f64 {
                    grid.near(pos[i]).filter(|&j| j != i).map(|j| overlap_area(q, pos[j], self.mark_px)).sum()
                };
                let here = cost(pos[i], pos);
                if here <= 0.0 {
                    continue;
                }
                any = true;
                let mut best = (here, pos[i]);
                for &(dx, dy) in &offsets[1..] {
                    let q = Point { x: clamp(pos[i].x + dx), y: clamp(pos[i].y + dy) };
                    let c = cost(q, pos);
                    if c < best.0 - 1e-12 {
                        best = (c, q);
                    }
                }
                if best.1 != pos[i] {
                    pos[i] = best.1;
                    moved = true;
                }
            }
            if !any {
                return true;
            }
            if !moved {
                // Stuck in a local minimum: nudge each overlapping point away
                // from its heaviest neighbour.
                let grid = Grid::build(pos, self.mark_px + self.max_step_px, self.max_px + self.mark_px);
                for i in 0..pos.len() {
                    let heaviest = grid
                        .near(pos[i])
                        .filter(|&j| j != i)
                        .map(|j| (overlap_area(pos[i], pos[j], self.mark_px), j))
                        .filter(|&(a, _)| a > 0.0)
                        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
                    if let Some((_, j)) = heaviest {
                        let (dx, dy) = (pos[i].x - pos[j].x, pos[i].y - pos[j].y);
                        let len = (dx * dx + dy * dy).sqrt();
                        let (ux, uy) = if len > 1e-9 { (dx / len, dy / len) } else if i < j { (-1.0, 0.0) } else { (1.0, 0.0) };
                        pos[i] = Point {
                            x: clamp(pos[i].x + ux * self.max_step_px),
                            y: clamp(pos[i].y + uy * self.max_step_px),
                        };
                    }
                }
            }
        }
        self.total_overlap(pos) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dc() -> Declutter {
        Declutter {
            mark_px: 6.0,
            max_step_px: 2.0,
            min_px: 14.0,
            max_px: 386.0,
            max_passes: 500,
        }
    }

    #[test]
    fn frame_round_trip() {
        let pts = [Point { x: -1.0, y: 2.0 }, Point { x: 3.0, y: -2.0 }];
        let f = Frame::fit(&pts, 400.0, 20.0);
        assert_eq!(f.to_px(pts[0]), Point { x: 20.0, y: 20.0 });
        assert_eq!(f.to_px(pts[1]), Point { x: 380.0, y: 380.0 });
        let back = f.from_px(f.to_px(Point { x: 0.3, y: 0.7 }));
        assert!((back.x - 0.3).abs() < 1e-12 && (back.y - 0.7).abs() < 1e-12);
    }

    #[test]
    fn touching_boxes_do_not_overlap() {
        let a = Point { x: 0.0, y: 0.0 };
        assert_eq!(overlap_area(a, Point { x: 6.0, y: 0.0 }, 6.0), 0.0);
        assert_eq!(overlap_area(a, Point { x: 3.0, y: 3.0 }, 6.0), 9.0);
    }

    #[test]
    fn separates_a_pile() {
        let mut pos: Vec<Point> = (0..12).map(|i| Point { x: 200.0 + (i % 3) as f64, y: 200.0 + (i / 3) as f64 }).collect();
        assert!(dc().run(&mut pos));
        assert_eq!(dc().total_overlap(&pos), 0);
    }

    #[test]
    fn coincident_points_split() {
        let mut pos = vec![Point { x: 100.0, y: 100.0 }; 2];
        assert!(dc().run(&mut pos));
        assert!(overlap_area(pos[0], pos[1], 6.0) == 0.0);
    }

    #[test]
    fn leaves_clear_layout_alone() {
        let mut pos = vec![Point { x: 50.0, y: 50.0 }, Point { x: 60.0, y: 50.0 }];
        let before = pos.clone();
        assert!(dc().run(&mut pos));
        assert_eq!(pos, before);
    }
}
