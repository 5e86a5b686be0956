//! Extrapolation of sequences to a zero step size.

/// Richardson table for values sampled at `h0, h0/r, h0/r^2, ...` whose error
/// expansion carries the powers `h^e` for each `e` in `exponents` (in order of
/// elimination).
///
/// Returns the last two diagonal entries: the best estimate and the one
/// computed without the finest sample, which serves as an error indicator.
pub fn richardson_geometric(values: &[f64], ratio: f64, exponents: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let n = values.len();
    let mut table: Vec<Vec<f64>> = vec![values.to_vec()];
    for (k, &e) in exponents.iter().enumerate().take(n - 1) {
        let factor = ratio.powf(e);
        let prev = &table[k];
        let next: Vec<f64> = prev
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        table.push(next);
    }
    let best = *table.last().unwrap().last().unwrap();
    let previous = if table.len() >= 2 {
        let row = &table[table.len() - 2];
        row[row.len() - 2]
    } else {
        best
    };
    (best, previous)
}

/// Evaluates at zero the interpolating polynomial through `(h_i, v_i)`
/// (Neville–Aitken).
pub fn polynomial_extrapolate_to_zero(hs: &[f64], values: &[f64]) -> f64 {
    assert_eq!(hs.len(), values.len());
    let mut p = values.to_vec();
    let n = hs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (hs[i], hs[i + level]);
            p[i] = (hi * p[i + 1] - hj * p[i]) / (hi - hj);
        }
    }
    p[0]
}
