//! Block-matching motion estimation with a predicted-start one-at-a-time search.
//!
//! Each block of the current frame is matched against the previous frame.
//! The search starts from the rounded mean of the top-left, top and left
//! neighbors' vectors, then descends along x until the distortion stops
//! decreasing, then along y. Blocks whose best distortion reaches the
//! motion threshold are motion blocks; the watermark goes into the motion
//! blocks nearest the frame center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::video_io::{Frame, Plane};

pub const DEFAULT_BLOCK_SIZE: usize = 8;
pub const DEFAULT_THRESHOLD: f64 = 4.0;
pub const DEFAULT_SEARCH_RANGE: i32 = 7;

/// Displacement of a block's content from the reference frame to the current frame:
/// the current block at `(x, y)` is compared against the reference at `(x - dx, y - dy)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    pub const fn new(dx: i32, dy: i32) -> Self {
        MotionVector { dx, dy }
    }

    fn within(self, range: i32) -> bool {
        self.dx.abs() <= range && self.dy.abs() <= range
    }
}

/// A square block of the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockRef {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub grid_i: usize,
    pub grid_j: usize,
    pub origin_x: usize,
    pub origin_y: usize,
    pub mv: MotionVector,
    /// Mean absolute luma difference per pixel at `mv`.
    pub distortion: f64,
    pub is_motion: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    pub ref_index: usize,
    pub cur_index: usize,
    pub block_size: usize,
    pub threshold: f64,
    pub rows: usize,
    pub cols: usize,
    /// Raster order, `rows * cols` entries.
    pub records: Vec<BlockRecord>,
}

impl MotionField {
    pub fn get(&self, grid_i: usize, grid_j: usize) -> &BlockRecord {
        &self.records[grid_i * self.cols + grid_j]
    }

    pub fn motion_blocks(&self) -> impl Iterator<Item = &BlockRecord> {
        self.records.iter().filter(|r| r.is_motion)
    }

    pub fn motion_count(&self) -> usize {
        self.motion_blocks().count()
    }

    pub fn width(&self) -> usize {
        self.cols * self.block_size
    }

    pub fn height(&self) -> usize {
        self.rows * self.block_size
    }
}

/// Vectors solved so far during a raster-order pass.
#[derive(Debug, Clone)]
pub struct VectorGrid {
    rows: usize,
    cols: usize,
    cells: Vec<Option<MotionVector>>,
}

impl VectorGrid {
    pub fn new(rows: usize, cols: usize) -> Self {
        VectorGrid {
            rows,
            cols,
            cells: vec![None; rows * cols],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<MotionVector> {
        (i < self.rows && j < self.cols)
            .then(|| self.cells[i * self.cols + j])
            .flatten()
    }

    pub fn set(&mut self, i: usize, j: usize, mv: MotionVector) {
        self.cells[i * self.cols + j] = Some(mv);
    }
}

fn displaced_origin(plane: &Plane, block: BlockRef, mv: MotionVector) -> Option<(usize, usize)> {
    let rx = block.x as i64 - mv.dx as i64;
    let ry = block.y as i64 - mv.dy as i64;
    let fits = |pos: i64, extent: usize| pos >= 0 && pos as usize + block.size <= extent;
    (fits(rx, plane.width()) && fits(ry, plane.height())).then_some((rx as usize, ry as usize))
}

fn mad(reference: &Plane, current: &Plane, block: BlockRef, rx: usize, ry: usize) -> f64 {
    let m = block.size;
    let mut sum = 0.0;
    for r in 0..m {
        let cur = &current.row(block.y + r)[block.x..block.x + m];
        let refr = &reference.row(ry + r)[rx..rx + m];
        sum += cur
            .iter()
            .zip(refr)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    }
    sum / (m * m) as f64
}

/// Mean absolute luma difference between `block` of `current` and the
/// `mv`-displaced block of `reference`.
pub fn block_distortion(
    reference: &Frame,
    current: &Frame,
    block: BlockRef,
    mv: MotionVector,
) -> Result<f64> {
    let (rx, ry) = displaced_origin(&reference.luma, block, mv).ok_or(Error::OutOfBounds {
        x: block.x,
        y: block.y,
        dx: mv.dx,
        dy: mv.dy,
        width: reference.width(),
        height: reference.height(),
    })?;
    if block.x + block.size > current.width() || block.y + block.size > current.height() {
        return Err(Error::Shape(format!(
            "block at ({}, {}) size {} exceeds the current frame",
            block.x, block.y, block.size
        )));
    }
    Ok(mad(&reference.luma, &current.luma, block, rx, ry))
}

/// Rounded mean of the top-left, left and top neighbors' vectors; missing
/// neighbors count as zero and the divisor stays 3.
pub fn predict_initial_mv(
    solved: &VectorGrid,
    grid_i: usize,
    grid_j: usize,
    range: i32,
) -> MotionVector {
    let neighbor = |di: usize, dj: usize| {
        if grid_i < di || grid_j < dj {
            MotionVector::ZERO
        } else {
            solved.get(grid_i - di, grid_j - dj).unwrap_or_default()
        }
    };
    let n = [neighbor(1, 1), neighbor(0, 1), neighbor(1, 0)];
    let mean = |f: fn(&MotionVector) -> i32| {
        let sum: i32 = n.iter().map(f).sum();
        ((sum as f64 / 3.0).round() as i32).clamp(-range, range)
    };
    MotionVector::new(mean(|v| v.dx), mean(|v| v.dy))
}

struct Searcher<'a> {
    reference: &'a Plane,
    current: &'a Plane,
    block: BlockRef,
    range: i32,
}

impl Searcher<'_> {
    fn cost(&self, mv: MotionVector) -> Option<f64> {
        if !mv.within(self.range) {
            return None;
        }
        displaced_origin(self.reference, self.block, mv)
            .map(|(rx, ry)| mad(self.reference, self.current, self.block, rx, ry))
    }

    /// One axis of the descent: probe +1 then −1, take the strictly better
    /// side, keep stepping that way while the distortion strictly drops.
    fn scan(&self, mut at: MotionVector, mut best: f64, axis: (i32, i32)) -> (MotionVector, f64) {
        let step =
            |mv: MotionVector, s: i32| MotionVector::new(mv.dx + s * axis.0, mv.dy + s * axis.1);
        let mut dir = 0;
        for s in [1, -1] {
            if let Some(c) = self.cost(step(at, s)) {
                if c < best {
                    best = c;
                    dir = s;
                }
            }
        }
        if dir == 0 {
            return (at, best);
        }
        at = step(at, dir);
        while let Some(c) = self.cost(step(at, dir)) {
            if c >= best {
                break;
            }
            best = c;
            at = step(at, dir);
        }
        (at, best)
    }
}

/// Horizontal-then-vertical one-at-a-time descent from `start`.
///
/// Candidates outside `range` or the reference frame are never selected.
/// An unavailable `start` falls back to the zero vector.
pub fn mots_search(
    reference: &Frame,
    current: &Frame,
    block: BlockRef,
    start: MotionVector,
    range: i32,
) -> Result<(MotionVector, f64)> {
    if range < 1 {
        return Err(Error::Config(format!(
            "search range must be >= 1, got {range}"
        )));
    }
    let s = Searcher {
        reference: &reference.luma,
        current: &current.luma,
        block,
        range,
    };
    let (start, cost) = match s.cost(start) {
        Some(c) => (start, c),
        None => (
            MotionVector::ZERO,
            block_distortion(reference, current, block, MotionVector::ZERO)?,
        ),
    };
    let (mv, cost) = s.scan(start, cost, (1, 0));
    Ok(s.scan(mv, cost, (0, 1)))
}

/// Runs prediction and search for every block in raster order.
pub fn compute_motion_field(
    reference: &Frame,
    current: &Frame,
    block_size: usize,
    threshold: f64,
    range: i32,
) -> Result<MotionField> {
    let (w, h) = (current.width(), current.height());
    if (reference.width(), reference.height()) != (w, h) {
        return Err(Error::Config(format!(
            "frame {} is {}x{} but frame {} is {w}x{h}",
            reference.index,
            reference.width(),
            reference.height(),
            current.index
        )));
    }
    if block_size == 0 || w % block_size != 0 || h % block_size != 0 {
        return Err(Error::Config(format!(
            "frame size {w}x{h} is not a multiple of block size {block_size}"
        )));
    }
    let (rows, cols) = (h / block_size, w / block_size);
    let mut solved = VectorGrid::new(rows, cols);
    let mut records = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let block = BlockRef {
                x: j * block_size,
                y: i * block_size,
                size: block_size,
            };
            let start = predict_initial_mv(&solved, i, j, range);
            let (mv, distortion) = mots_search(reference, current, block, start, range)?;
            solved.set(i, j, mv);
            records.push(BlockRecord {
                grid_i: i,
                grid_j: j,
                origin_x: block.x,
                origin_y: block.y,
                mv,
                distortion,
                is_motion: distortion >= threshold,
            });
        }
    }
    Ok(MotionField {
        ref_index: reference.index,
        cur_index: current.index,
        block_size,
        threshold,
        rows,
        cols,
        records,
    })
}

/// Twice the squared distance from a block's center to the frame center,
/// in half-pixel units so ties compare exactly.
fn center_distance2(r: &BlockRecord, m: usize, width: usize, height: usize) -> i64 {
    let dx = (2 * r.origin_x + m) as i64 - width as i64;
    let dy = (2 * r.origin_y + m) as i64 - height as i64;
    dx * dx + dy * dy
}

/// The `count` motion blocks nearest the frame center, ties in raster order.
pub fn select_blocks(field: &MotionField, count: usize) -> Result<Vec<BlockRecord>> {
    if count == 0 {
        return Err(Error::Config("block count must be at least 1".into()));
    }
    let (m, w, h) = (field.block_size, field.width(), field.height());
    let mut candidates: Vec<&BlockRecord> = field.motion_blocks().collect();
    if candidates.len() < count {
        return Err(Error::InsufficientMotion {
            available: candidates.len(),
            required: count,
        });
    }
    // records are already in raster order and sort_by_key is stable
    candidates.sort_by_key(|r| center_distance2(r, m, w, h));
    Ok(candidates.into_iter().take(count).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::ChromaLayout;

    fn frame(index: usize, plane: Plane) -> Frame {
        Frame::from_luma(index, plane, ChromaLayout::C420)
    }

    fn textured(w: usize, h: usize, seed: u64) -> Plane {
        // cheap hash noise, smooth enough that descent has something to follow
        Plane::from_fn(w, h, |x, y| {
            let v = (x as f64 * 0.37 + seed as f64).sin() * 60.0
                + (y as f64 * 0.23 + 1.7 * seed as f64).cos() * 50.0
                + ((x * 31 + y * 17) % 23) as f64;
            128.0 + v
        })
    }

    #[test]
    fn distortion_basics() {
        let a = frame(0, Plane::filled(16, 16, 10.0));
        let b = frame(1, Plane::filled(16, 16, 13.0));
        let blk = BlockRef {
            x: 8,
            y: 8,
            size: 8,
        };
        assert_eq!(
            block_distortion(&a, &a, blk, MotionVector::ZERO).unwrap(),
            0.0
        );
        assert_eq!(
            block_distortion(&b, &a, blk, MotionVector::ZERO).unwrap(),
            3.0
        );
        assert!(matches!(
            block_distortion(&a, &a, blk, MotionVector::new(-1, 0)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn prediction_examples() {
        let mut g = VectorGrid::new(3, 3);
        assert_eq!(predict_initial_mv(&g, 0, 0, 7), MotionVector::ZERO);
        for (i, j) in [(0, 0), (0, 1), (1, 0)] {
            g.set(i, j, MotionVector::new(3, -2));
        }
        assert_eq!(predict_initial_mv(&g, 1, 1, 7), MotionVector::new(3, -2));

        let mut g = VectorGrid::new(3, 3);
        g.set(0, 0, MotionVector::new(1, 0));
        g.set(1, 0, MotionVector::new(2, 0));
        g.set(0, 1, MotionVector::new(3, 0));
        assert_eq!(predict_initial_mv(&g, 1, 1, 7).dx, 2);

        // border: one neighbor (left) present, divisor stays 3
        let mut g = VectorGrid::new(3, 3);
        g.set(0, 0, MotionVector::new(5, -4));
        assert_eq!(predict_initial_mv(&g, 0, 1, 7), MotionVector::new(2, -1));
        // -2/3 rounds to -1
        let mut g = VectorGrid::new(3, 3);
        g.set(0, 0, MotionVector::new(-1, 0));
        g.set(0, 1, MotionVector::new(-1, 0));
        assert_eq!(predict_initial_mv(&g, 1, 1, 7), MotionVector::new(-1, 0));

        // clamped to the search range
        let mut g = VectorGrid::new(3, 3);
        for (i, j) in [(0, 0), (0, 1), (1, 0)] {
            g.set(i, j, MotionVector::new(7, -7));
        }
        assert_eq!(predict_initial_mv(&g, 1, 1, 3), MotionVector::new(3, -3));
    }

    #[test]
    fn identical_frames_give_zero_field() {
        let f = frame(0, textured(32, 32, 1));
        let g = frame(1, f.luma.clone());
        let field = compute_motion_field(&f, &g, 8, 4.0, 7).unwrap();
        assert_eq!((field.rows, field.cols), (4, 4));
        assert!(field
            .records
            .iter()
            .all(|r| r.mv == MotionVector::ZERO && r.distortion == 0.0));
        assert_eq!(field.motion_count(), 0);
    }

    #[test]
    fn horizontal_shift_is_found() {
        let base = textured(64, 64, 3);
        let shifted = Plane::from_fn(64, 64, |x, y| base.get(x.saturating_sub(2), y));
        let (r, c) = (frame(0, base), frame(1, shifted));
        let blk = BlockRef {
            x: 24,
            y: 24,
            size: 8,
        };
        let (mv, d) = mots_search(&r, &c, blk, MotionVector::ZERO, 7).unwrap();
        assert_eq!(mv, MotionVector::new(2, 0));
        assert_eq!(d, 0.0);
    }

    #[test]
    fn geometry_mismatch_is_config_error() {
        let a = frame(0, Plane::new(16, 16));
        let b = frame(1, Plane::new(24, 16));
        assert!(matches!(
            compute_motion_field(&a, &b, 8, 4.0, 7),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            compute_motion_field(&a, &a, 5, 4.0, 7),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unavailable_start_falls_back_to_zero() {
        let f = frame(0, textured(16, 16, 2));
        let blk = BlockRef {
            x: 0,
            y: 0,
            size: 8,
        };
        let (mv, d) = mots_search(&f, &f, blk, MotionVector::new(5, 5), 7).unwrap();
        assert_eq!((mv, d), (MotionVector::ZERO, 0.0));
    }

    fn field_from(motion: &[(usize, usize)], rows: usize, cols: usize) -> MotionField {
        let records = (0..rows * cols)
            .map(|k| {
                let (i, j) = (k / cols, k % cols);
                BlockRecord {
                    grid_i: i,
                    grid_j: j,
                    origin_x: j * 8,
                    origin_y: i * 8,
                    mv: MotionVector::ZERO,
                    distortion: 0.0,
                    is_motion: motion.contains(&(i, j)),
                }
            })
            .collect();
        MotionField {
            ref_index: 0,
            cur_index: 1,
            block_size: 8,
            threshold: 4.0,
            rows,
            cols,
            records,
        }
    }

    #[test]
    fn selection_examples() {
        let all: Vec<_> = (0..5).flat_map(|i| (0..5).map(move |j| (i, j))).collect();
        let field = field_from(&all, 5, 5);
        let one = select_blocks(&field, 1).unwrap();
        assert_eq!((one[0].grid_i, one[0].grid_j), (2, 2));

        let empty = field_from(&[], 4, 4);
        assert!(matches!(
            select_blocks(&empty, 16),
            Err(Error::InsufficientMotion {
                available: 0,
                required: 16
            })
        ));

        // 4x4 grid: the four central blocks tie; raster order decides
        let field = field_from(&all[..0], 4, 4);
        let mut f = field.clone();
        for r in &mut f.records {
            r.is_motion = true;
        }
        let four: Vec<_> = select_blocks(&f, 4)
            .unwrap()
            .iter()
            .map(|r| (r.grid_i, r.grid_j))
            .collect();
        assert_eq!(four, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
    }
}
