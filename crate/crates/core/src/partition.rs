//! Set partitions of `0..n`, visited as restricted growth strings.

/// Calls `visit(labels, blocks)` once per set partition of `0..n`, where
/// `labels[i]` is the block of element `i` and blocks are numbered in order of
/// first appearance.
pub fn for_each_set_partition<F: FnMut(&[usize], usize)>(n: usize, mut visit: F) {
    let mut labels = vec![0usize; n];
    if n == 0 {
        visit(&labels, 0);
        return;
    }
    grow(&mut labels, 1, 1, &mut visit);
}

fn grow<F: FnMut(&[usize], usize)>(labels: &mut [usize], at: usize, blocks: usize, visit: &mut F) {
    if at == labels.len() {
        visit(labels, blocks);
        return;
    }
    for b in 0..=blocks {
        labels[at] = b;
        grow(labels, at + 1, blocks.max(b + 1), visit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203, 877];
        for (n, &b) in bell.iter().enumerate() {
            let mut count = 0;
            for_each_set_partition(n, |labels, blocks| {
                assert_eq!(labels.len(), n);
                assert!(labels.iter().all(|&l| l < blocks.max(1)));
                count += 1;
            });
            assert_eq!(count, b, "n={n}");
        }
    }
}
