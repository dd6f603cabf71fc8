//! Connected-component labeling on binary rasters.

use crate::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(1, 0), (0, -1), (-1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (1, 0),
            (1, -1),
            (0, -1),
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Component labels: `0` for unselected pixels, `1..=sizes.len()` otherwise,
/// numbered in raster order of each component's first pixel.
#[derive(Debug, Clone)]
pub struct Labels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl Labels {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Labels the pixels equal to `value` (so `false` labels the background).
pub fn label(mask: &BinaryMask, value: bool, conn: Connectivity) -> Labels {
    let (w, h) = mask.dims();
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if bits[start] != value || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[start] = id;
        stack.push(start);
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in conn.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if bits[j] == value && labels[j] == 0 {
                    labels[j] = id;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }
    Labels {
        width: w,
        height: h,
        labels,
        sizes,
    }
}

/// Number of 8-connected foreground components.
pub fn count_components(mask: &BinaryMask) -> usize {
    label(mask, true, Connectivity::Eight).count()
}

/// Number of holes: 4-connected background components that do not touch the
/// raster border.
pub fn count_holes(mask: &BinaryMask) -> usize {
    let lab = label(mask, false, Connectivity::Four);
    let (w, h) = mask.dims();
    let mut touches = vec![false; lab.count() + 1];
    for x in 0..w {
        touches[lab.labels[x] as usize] = true;
        touches[lab.labels[(h - 1) * w + x] as usize] = true;
    }
    for y in 0..h {
        touches[lab.labels[y * w] as usize] = true;
        touches[lab.labels[y * w + w - 1] as usize] = true;
    }
    (1..=lab.count()).filter(|&l| !touches[l]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Spacing;

    #[test]
    fn diagonal_pixels_join_only_under_eight() {
        let m = BinaryMask::from_ascii(&["#.", ".#"], Spacing::default());
        assert_eq!(label(&m, true, Connectivity::Eight).count(), 1);
        assert_eq!(label(&m, true, Connectivity::Four).count(), 2);
    }

    #[test]
    fn ring_has_one_hole() {
        let m = BinaryMask::from_ascii(&[".....", ".###.", ".#.#.", ".###.", "....."], Spacing::default());
        assert_eq!(count_components(&m), 1);
        assert_eq!(count_holes(&m), 1);
    }

    #[test]
    fn sizes_sum_to_foreground() {
        let m = BinaryMask::from_ascii(&["##..#", "#...#", "..#.."], Spacing::default());
        let lab = label(&m, true, Connectivity::Four);
        assert_eq!(lab.sizes.iter().sum::<usize>(), m.count());
        assert_eq!(lab.sizes, vec![3, 2, 1]);
    }
}
