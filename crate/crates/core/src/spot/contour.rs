//! Connected components and outer-border following on binary masks.

use std::collections::VecDeque;

use super::{BitMask, Pixel};

/// Outer border of one 8-connected mask component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    /// Border pixels in tracing order; the last one is 8-adjacent to the first.
    pub boundary: Vec<Pixel>,
    /// Pixels enclosed by the outer border, holes included.
    pub area_px: usize,
    pub region_id: usize,
}

// clockwise on screen (y grows downward)
const DIRS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
const WEST: usize = 4;

fn step(p: Pixel, d: usize) -> (i64, i64) {
    (p.0 as i64 + DIRS[d].0, p.1 as i64 + DIRS[d].1)
}

fn dir_between(from: Pixel, to: Pixel) -> usize {
    let delta = (to.0 as i64 - from.0 as i64, to.1 as i64 - from.1 as i64);
    DIRS.iter().position(|d| *d == delta).expect("pixels are 8-adjacent")
}

/// A component in bounding-box-local coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Region {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub bits: Vec<bool>,
}

impl Region {
    pub fn contains(&self, x: i64, y: i64) -> bool {
        if x < self.x0 as i64 || y < self.y0 as i64 {
            return false;
        }
        let (lx, ly) = ((x - self.x0 as i64) as usize, (y - self.y0 as i64) as usize);
        lx < self.w && ly < self.h && self.bits[ly * self.w + lx]
    }

    /// Member pixels in raster order.
    pub fn pixels(&self) -> Vec<Pixel> {
        let mut out = Vec::new();
        for ly in 0..self.h {
            for lx in 0..self.w {
                if self.bits[ly * self.w + lx] {
                    out.push((self.x0 + lx, self.y0 + ly));
                }
            }
        }
        out
    }

    fn from_pixels(pixels: &[Pixel]) -> Self {
        let x0 = pixels.iter().map(|p| p.0).min().expect("non-empty");
        let y0 = pixels.iter().map(|p| p.1).min().expect("non-empty");
        let w = pixels.iter().map(|p| p.0).max().unwrap() - x0 + 1;
        let h = pixels.iter().map(|p| p.1).max().unwrap() - y0 + 1;
        let mut bits = vec![false; w * h];
        for (x, y) in pixels {
            bits[(y - y0) * w + (x - x0)] = true;
        }
        Self { x0, y0, w, h, bits }
    }

    /// Count of pixels not reachable from outside the bounding box through
    /// 4-connected non-member pixels: members plus enclosed holes.
    pub fn filled_area(&self) -> usize {
        let (pw, ph) = (self.w + 2, self.h + 2);
        let member = |x: usize, y: usize| x >= 1 && y >= 1 && x <= self.w && y <= self.h && self.bits[(y - 1) * self.w + (x - 1)];
        let mut seen = vec![false; pw * ph];
        let mut queue = VecDeque::from([(0usize, 0usize)]);
        seen[0] = true;
        let mut outside = 0;
        while let Some((x, y)) = queue.pop_front() {
            outside += 1;
            let mut visit = |nx: usize, ny: usize| {
                let i = ny * pw + nx;
                if !seen[i] && !member(nx, ny) {
                    seen[i] = true;
                    queue.push_back((nx, ny));
                }
            };
            if x > 0 {
                visit(x - 1, y);
            }
            if x + 1 < pw {
                visit(x + 1, y);
            }
            if y > 0 {
                visit(x, y - 1);
            }
            if y + 1 < ph {
                visit(x, y + 1);
            }
        }
        pw * ph - outside
    }

    /// Square-kernel erosion; pixels outside the image frame do not erode.
    pub fn eroded(&self, radius: usize, frame_w: usize, frame_h: usize) -> Region {
        let r = radius as i64;
        let mut bits = vec![false; self.bits.len()];
        for ly in 0..self.h {
            for lx in 0..self.w {
                if !self.bits[ly * self.w + lx] {
                    continue;
                }
                let (x, y) = ((self.x0 + lx) as i64, (self.y0 + ly) as i64);
                let keep = (-r..=r).all(|dy| {
                    (-r..=r).all(|dx| {
                        let (nx, ny) = (x + dx, y + dy);
                        let in_frame = nx >= 0 && ny >= 0 && (nx as usize) < frame_w && (ny as usize) < frame_h;
                        !in_frame || self.contains(nx, ny)
                    })
                });
                bits[ly * self.w + lx] = keep;
            }
        }
        Region { bits, ..*self }
    }
}

/// Pixels of the 8-connected component of `mask` that contains `seed`.
pub(crate) fn component_at(mask: &BitMask, seed: Pixel) -> Option<Region> {
    if !mask.get(seed.0, seed.1) {
        return None;
    }
    let mut seen = vec![false; mask.bits.len()];
    Some(Region::from_pixels(&flood(mask, seed, &mut seen)))
}

fn flood(mask: &BitMask, seed: Pixel, seen: &mut [bool]) -> Vec<Pixel> {
    let (w, h) = (mask.width as i64, mask.height as i64);
    let mut out = Vec::new();
    let mut queue = VecDeque::from([seed]);
    seen[seed.1 * mask.width + seed.0] = true;
    while let Some(p) = queue.pop_front() {
        out.push(p);
        for d in 0..8 {
            let (nx, ny) = step(p, d);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let i = ny as usize * mask.width + nx as usize;
            if mask.bits[i] && !seen[i] {
                seen[i] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }
    out
}

/// Follow the outer border of the region that has `start` as its first pixel in raster order.
fn trace_outer(region: &Region, start: Pixel) -> Vec<Pixel> {
    let inside = |q: (i64, i64)| region.contains(q.0, q.1);
    let as_pixel = |q: (i64, i64)| (q.0 as usize, q.1 as usize);

    // scanning clockwise from the west neighbour finds the border predecessor of `start`
    let Some(first) = (0..8).map(|k| step(start, (WEST + k) % 8)).find(|q| inside(*q)) else {
        return vec![start];
    };
    let first = as_pixel(first);

    let mut boundary = Vec::new();
    let (mut prev, mut cur) = (first, start);
    loop {
        boundary.push(cur);
        let back = dir_between(cur, prev);
        let next = (1..=8)
            .map(|k| step(cur, (back + 8 - k) % 8))
            .find(|q| inside(*q))
            .map(as_pixel)
            .expect("prev is a member");
        if next == start && cur == first {
            break;
        }
        prev = cur;
        cur = next;
    }
    boundary
}

/// One contour per 8-connected component whose filled area is at least `min_area`.
///
/// Components are visited in raster order of their first pixel; surviving
/// contours are numbered from 0 in that order.
pub fn find_contours(mask: &BitMask, min_area: usize) -> Vec<Contour> {
    let mut seen = vec![false; mask.bits.len()];
    let mut out = Vec::new();
    for y in 0..mask.height {
        for x in 0..mask.width {
            let i = y * mask.width + x;
            if !mask.bits[i] || seen[i] {
                continue;
            }
            let pixels = flood(mask, (x, y), &mut seen);
            let region = Region::from_pixels(&pixels);
            let area_px = region.filled_area();
            if area_px < min_area {
                continue;
            }
            out.push(Contour { boundary: trace_outer(&region, (x, y)), area_px, region_id: out.len() });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> BitMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        BitMask { width: w, height: h, bits }
    }

    fn adjacent(a: Pixel, b: Pixel) -> bool {
        let dx = (a.0 as i64 - b.0 as i64).abs();
        let dy = (a.1 as i64 - b.1 as i64).abs();
        dx <= 1 && dy <= 1
    }

    #[test]
    fn empty_mask() {
        assert!(find_contours(&BitMask::new(8, 8), 0).is_empty());
    }

    #[test]
    fn filled_square() {
        let mut m = BitMask::new(20, 20);
        for y in 5..15 {
            for x in 3..13 {
                m.set(x, y, true);
            }
        }
        let cs = find_contours(&m, 1);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].area_px, 100);
        let mut b = cs[0].boundary.clone();
        assert_eq!(b.len(), 36);
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 36);
        assert!(b.iter().all(|&(x, y)| x == 3 || x == 12 || y == 5 || y == 14));
        assert!(adjacent(cs[0].boundary[0], *cs[0].boundary.last().unwrap()));
    }

    #[test]
    fn small_squares_dropped() {
        let mut m = BitMask::new(20, 10);
        for y in 0..5 {
            for x in 0..5 {
                m.set(x, y, true);
                m.set(x + 10, y + 5, true);
            }
        }
        assert!(find_contours(&m, 30).is_empty());
        let cs = find_contours(&m, 25);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.iter().map(|c| c.region_id).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn hole_counts_toward_area_but_spawns_no_contour() {
        let m = mask_from(&[
            "#####",
            "#...#",
            "#...#",
            "#####",
        ]);
        let cs = find_contours(&m, 0);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].area_px, 20);
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let m = mask_from(&[
            "#..",
            ".#.",
            "..#",
        ]);
        let cs = find_contours(&m, 0);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].area_px, 3);
        for pair in cs[0].boundary.windows(2) {
            assert!(adjacent(pair[0], pair[1]));
        }
    }

    #[test]
    fn single_pixel_and_line() {
        let m = mask_from(&["...", ".#.", "..."]);
        let cs = find_contours(&m, 0);
        assert_eq!(cs[0].boundary, vec![(1, 1)]);

        let m = mask_from(&["##"]);
        assert_eq!(find_contours(&m, 0)[0].boundary, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn concave_shape_boundary_is_closed_walk_on_mask() {
        let m = mask_from(&[
            "##...##",
            "##...##",
            "##...##",
            "#######",
            "#######",
        ]);
        let cs = find_contours(&m, 0);
        assert_eq!(cs.len(), 1);
        let b = &cs[0].boundary;
        for w in b.windows(2) {
            assert!(adjacent(w[0], w[1]));
        }
        assert!(adjacent(b[0], *b.last().unwrap()));
        assert!(b.iter().all(|&(x, y)| m.get(x, y)));
        // every member with a 4-neighbour outside the region is on the border
        for y in 0..m.height {
            for x in 0..m.width {
                if !m.get(x, y) {
                    continue;
                }
                let exposed = [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)].iter().any(|(dx, dy)| {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    nx < 0 || ny < 0 || nx >= m.width as i64 || ny >= m.height as i64 || !m.get(nx as usize, ny as usize)
                });
                assert_eq!(exposed, b.contains(&(x, y)), "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn erosion_with_frame_edges() {
        let m = mask_from(&[
            "####.",
            "####.",
            "####.",
        ]);
        let region = component_at(&m, (0, 0)).unwrap();
        let e = region.eroded(1, m.width, m.height);
        // column 3 touches the empty column 4, everything else is interior or at the frame edge
        let kept = e.pixels();
        assert_eq!(kept, vec![(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]);
    }
}
