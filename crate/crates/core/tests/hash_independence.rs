//! Exact 4-wise independence over the whole family on a small domain.

use std::collections::HashMap;

use streamcut::hashing::KwiseHash;

#[test]
fn every_four_points_are_jointly_uniform() {
    let points = [[0u64, 1, 2, 3], [1, 3, 5, 7], [7, 6, 0, 4]];
    for pts in points {
        let mut counts: HashMap<[u64; 4], usize> = HashMap::new();
        for c in 0..8u64.pow(4) {
            let coeffs = (0..4).map(|i| (c >> (3 * i)) & 7).collect();
            let h = KwiseHash::from_coefficients(8, 8, coeffs).unwrap();
            assert_eq!(h.field().degree(), 3);
            *counts.entry(pts.map(|x| h.eval(x).unwrap())).or_default() += 1;
        }
        assert_eq!(counts.len(), 4096);
        assert!(counts.values().all(|&c| c == 1));
    }
}

#[test]
fn folded_range_is_uniform_for_each_point() {
    let mut counts = [[0usize; 4]; 16];
    for c in 0..16u64.pow(4) {
        let coeffs = (0..4).map(|i| (c >> (4 * i)) & 15).collect();
        let h = KwiseHash::from_coefficients(16, 4, coeffs).unwrap();
        for (x, row) in counts.iter_mut().enumerate() {
            row[h.eval(x as u64).unwrap() as usize] += 1;
        }
    }
    for row in counts {
        assert!(row.iter().all(|&c| c == 16usize.pow(4) / 4));
    }
}
