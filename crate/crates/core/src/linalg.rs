//! Small dense vector helpers for the low-dimensional geometry used throughout.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Returns `a / |a|`, or `None` for the zero vector.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Orthonormal basis whose first vector is `first` (assumed unit length).
///
/// Gram–Schmidt against the standard basis, skipping vectors that are
/// numerically dependent on the ones already accepted.
pub fn orthonormal_frame(first: &[f64]) -> Vec<Vec<f64>> {
    let d = first.len();
    let mut frame = vec![first.to_vec()];
    for j in 0..d {
        if frame.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        for e in &frame {
            let c = dot(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        if norm(&v) > 1e-8 {
            frame.push(normalized(&v).expect("non-zero"));
        }
    }
    frame
}
